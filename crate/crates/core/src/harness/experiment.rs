//! Experiment runner: seeded trials, per-trial records, aggregate tables.

use std::collections::BTreeMap;

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::generate::{generate, GeneratorSpec};
use super::svg::{render_svg, Style, SvgObject};
use super::{instance_hash, parse_measure, trial_seed};
use crate::combinatorial::net::{validate_net, weak_net, NetOptions};
use crate::combinatorial::selection::selection;
use crate::combinatorial::tverberg::{
    binomial, classic_tverberg, parts_intersect, tverberg_partition, verify_partition, TverbergParams,
};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::floating::{floating_body, DirectionSet};
use crate::geometry::ConvexBody;
use crate::measures::{Measure, MeasureValue};
use crate::piercing::helly::default_direction;
use crate::piercing::{
    fractional_helly_witness, helly_check, pq_pierce, verify_certificate, PierceOptions,
};
use crate::scalar::{self, Scalar};

pub const EXPERIMENT_SCHEMA: &str = "quanthelly.experiment/1";
pub const REPORT_SCHEMA: &str = "quanthelly.report/1";

fn experiment_schema() -> String {
    EXPERIMENT_SCHEMA.to_string()
}

fn one() -> usize {
    1
}

fn volume() -> Value {
    json!("volume")
}

fn nonempty() -> Value {
    json!("nonempty")
}

fn farey7() -> String {
    "farey:7".into()
}

fn axis_diag() -> String {
    "diag".into()
}

fn unit() -> Scalar {
    Scalar::one()
}

fn s_max_default() -> usize {
    3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "experiment_schema")]
    pub schema: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub trials: Vec<TrialSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialSpec {
    pub name: String,
    #[serde(default = "one")]
    pub repeat: usize,
    #[serde(flatten)]
    pub op: Operation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Operation {
    /// Realized delta of `K(f, eps)` over a list of eps, with a log-log slope fit.
    FloatingBodySweep {
        #[serde(default)]
        body: Option<ConvexBody>,
        #[serde(default = "volume")]
        measure: Value,
        #[serde(with = "scalar::serde_scalar_vec")]
        eps: Vec<Scalar>,
        #[serde(default = "farey7")]
        dirs: String,
        #[serde(default)]
        svg: bool,
    },
    HellyCheck {
        generator: GeneratorSpec,
        h: usize,
        #[serde(default = "volume")]
        measure: Value,
        #[serde(default = "unit", with = "scalar::serde_scalar")]
        lambda: Scalar,
        #[serde(default, with = "scalar::serde_scalar")]
        eps: Scalar,
    },
    Pierce {
        generator: GeneratorSpec,
        p: usize,
        q: usize,
        #[serde(default = "volume")]
        measure: Value,
        #[serde(default = "unit", with = "scalar::serde_scalar")]
        lambda: Scalar,
        #[serde(default, with = "scalar::serde_scalar")]
        eps: Scalar,
        #[serde(default = "s_max_default")]
        s_max: usize,
    },
    FractionalHelly {
        generator: GeneratorSpec,
        h: usize,
        #[serde(default = "volume")]
        measure: Value,
        #[serde(default = "unit", with = "scalar::serde_scalar")]
        lambda: Scalar,
        #[serde(default, with = "scalar::serde_scalar")]
        eps: Scalar,
        #[serde(default = "axis_diag")]
        dirs: String,
    },
    Selection {
        generator: GeneratorSpec,
        parts: usize,
        #[serde(default = "nonempty")]
        measure: Value,
        #[serde(default = "unit", with = "scalar::serde_scalar")]
        lambda: Scalar,
        #[serde(default, with = "scalar::serde_scalar")]
        eps: Scalar,
    },
    Net {
        generator: GeneratorSpec,
        #[serde(with = "scalar::serde_scalar")]
        eps_prime: Scalar,
        #[serde(default = "nonempty")]
        measure: Value,
        #[serde(default = "unit", with = "scalar::serde_scalar")]
        lambda: Scalar,
        #[serde(default, with = "scalar::serde_scalar")]
        eps: Scalar,
    },
    Tverberg {
        generator: GeneratorSpec,
        parts: usize,
        #[serde(default = "nonempty")]
        measure: Value,
        #[serde(default = "unit", with = "scalar::serde_scalar")]
        lambda: Scalar,
        #[serde(default, with = "scalar::serde_scalar")]
        eps: Scalar,
    },
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::FloatingBodySweep { .. } => "floating-body-sweep",
            Operation::HellyCheck { .. } => "helly-check",
            Operation::Pierce { .. } => "pierce",
            Operation::FractionalHelly { .. } => "fractional-helly",
            Operation::Selection { .. } => "selection",
            Operation::Net { .. } => "net",
            Operation::Tverberg { .. } => "tverberg",
        }
    }

    fn generator(&self) -> Option<&GeneratorSpec> {
        match self {
            Operation::FloatingBodySweep { .. } => None,
            Operation::HellyCheck { generator, .. }
            | Operation::Pierce { generator, .. }
            | Operation::FractionalHelly { generator, .. }
            | Operation::Selection { generator, .. }
            | Operation::Net { generator, .. }
            | Operation::Tverberg { generator, .. } => Some(generator),
        }
    }

    /// The operation with its generator reseeded.
    fn reseeded(&self, seed: u64) -> Operation {
        let mut op = self.clone();
        match &mut op {
            Operation::FloatingBodySweep { .. } => {}
            Operation::HellyCheck { generator, .. }
            | Operation::Pierce { generator, .. }
            | Operation::FractionalHelly { generator, .. }
            | Operation::Selection { generator, .. }
            | Operation::Net { generator, .. }
            | Operation::Tverberg { generator, .. } => *generator = generator.with_seed(seed),
        }
        op
    }
}

impl ExperimentConfig {
    pub fn from_json(v: &Value) -> Result<Self> {
        super::check_schema(v, EXPERIMENT_SCHEMA)?;
        Ok(serde_json::from_value(v.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub name: String,
    pub op: String,
    pub seed: u64,
    pub instance_hash: Option<String>,
    pub params: Value,
    pub measured: BTreeMap<String, Value>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub name: String,
    pub key: String,
    pub stat: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
    /// SVG figures as `(file name, document)`; not part of the JSON report.
    #[serde(skip)]
    pub figures: Vec<(String, String)>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.schema != EXPERIMENT_SCHEMA {
        return Err(Error::Invalid(format!("unknown experiment schema {:?}", config.schema)));
    }
    let mut jobs = Vec::new();
    for spec in &config.trials {
        for _ in 0..spec.repeat {
            let trial = jobs.len();
            jobs.push((trial, spec));
        }
    }
    let outcomes: Vec<(TrialRecord, Option<String>)> = jobs
        .par_iter()
        .map(|&(trial, spec)| run_trial(trial, spec, trial_seed(config.seed, trial as u64)))
        .collect();
    let mut records = Vec::with_capacity(outcomes.len());
    let mut figures = Vec::new();
    for (rec, fig) in outcomes {
        if let Some(svg) = fig {
            figures.push((format!("{}-{}.svg", rec.name, rec.trial), svg));
        }
        records.push(rec);
    }
    let aggregates = aggregate(&records);
    let report = ExperimentReport { schema: REPORT_SCHEMA.into(), seed: config.seed, records, aggregates, figures };
    report.audit()?;
    Ok(report)
}

fn run_trial(trial: usize, spec: &TrialSpec, seed: u64) -> (TrialRecord, Option<String>) {
    let op = spec.op.reseeded(seed);
    let mut rec = TrialRecord {
        trial,
        name: spec.name.clone(),
        op: op.name().into(),
        seed,
        instance_hash: None,
        params: serde_json::to_value(&op).unwrap_or(Value::Null),
        measured: BTreeMap::new(),
        error: None,
    };
    let family = match op.generator().map(generate).transpose() {
        Ok(f) => f,
        Err(e) => {
            rec.error = Some(e.to_string());
            return (rec, None);
        }
    };
    if let Some(f) = &family {
        rec.instance_hash = Some(instance_hash(f));
    }
    let mut figure = None;
    let outcome = match (&op, family) {
        (Operation::FloatingBodySweep { body, measure, eps, dirs, svg }, _) => {
            sweep(body.as_ref(), measure, eps, dirs, *svg, &mut rec.measured).map(|fig| figure = fig)
        }
        (op, Some(f)) => measure_family(op, &f, seed, &mut rec.measured),
        (_, None) => Err(Error::Invalid("operation needs a generator".into())),
    };
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    (rec, figure)
}

fn exact(v: &MeasureValue) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn sx(x: &Scalar) -> Value {
    Value::String(scalar::format(x))
}

/// Least-squares slope of `ln y` against `ln x` over positive pairs.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn sweep(
    body: Option<&ConvexBody>,
    measure: &Value,
    eps: &[Scalar],
    dirs: &str,
    svg: bool,
    out: &mut BTreeMap<String, Value>,
) -> Result<Option<String>> {
    let k = body.cloned().unwrap_or_else(|| ConvexBody::rect_i(0, 1, 0, 1));
    let m = parse_measure(measure, k.dim())?;
    let dirs = DirectionSet::parse(dirs, k.dim())?;
    let mut order: Vec<&Scalar> = eps.iter().collect();
    order.sort();
    order.dedup();
    let mut deltas = Vec::new();
    let mut bodies = Vec::new();
    for e in &order {
        let fb = floating_body(&k, &m, e, &dirs)?;
        deltas.push(fb.delta.clone());
        bodies.push(fb.body);
    }
    let lo: Vec<f64> = deltas.iter().map(MeasureValue::to_f64).collect();
    let monotone = deltas.windows(2).all(|w| match (w[0].upper(), w[1].lower()) {
        (Some(a), Some(b)) => a <= b,
        _ => false,
    }) && bodies.windows(2).all(|w| w[0].contains_body(&w[1]));
    let xs: Vec<f64> = order.iter().map(|e| scalar::to_f64(e)).collect();
    out.insert("eps".into(), order.iter().map(|e| sx(e)).collect());
    out.insert("delta".into(), deltas.iter().map(exact).collect());
    out.insert("directions".into(), json!(dirs.len()));
    out.insert("monotone".into(), json!(monotone));
    if let Some(b) = loglog_slope(&xs, &lo) {
        out.insert("exponent".into(), json!(b));
    }
    if !svg {
        return Ok(None);
    }
    let mut objs = vec![(SvgObject::Body(k.clone()), Style::default())];
    for b in bodies {
        objs.push((SvgObject::Body(b), Style::new("#8b1e1e", "#e07a5f", 0.2)));
    }
    render_svg(&objs).map(Some)
}

fn measure_family(op: &Operation, f: &Family, seed: u64, out: &mut BTreeMap<String, Value>) -> Result<()> {
    let d = f.dim().ok_or(Error::EmptyInput("generated family is empty"))?;
    out.insert("members".into(), json!(f.len()));
    match op {
        Operation::FloatingBodySweep { .. } => unreachable!("handled by the caller"),
        Operation::HellyCheck { h, measure, lambda, eps, .. } => {
            let m = parse_measure(measure, d)?;
            let r = helly_check(f, *h, &m, lambda, eps, seed)?;
            out.insert("hypothesis".into(), json!(r.hypothesis));
            out.insert("conclusion".into(), json!(r.conclusion));
            out.insert("conclusion_failure".into(), json!(r.hypothesis && r.conclusion == Some(false)));
            out.insert("exhaustive".into(), json!(r.exhaustive));
            out.insert("value".into(), exact(&r.value));
        }
        Operation::Pierce { p, q, measure, lambda, eps, s_max, .. } => {
            let m = parse_measure(measure, d)?;
            let mut opts = PierceOptions::new(*s_max);
            opts.pool.seed = seed;
            opts.net.seed = seed;
            let cert = pq_pierce(f, *p, *q, &m, lambda, eps, &opts)?;
            verify_certificate(f, &m, lambda, eps, &cert)?;
            out.insert("tau_star".into(), sx(&cert.transcript.tau_star));
            out.insert("certificate_size".into(), json!(cert.witnesses.len()));
            out.insert("pool_size".into(), json!(cert.transcript.pool_size));
            out.insert("integral".into(), json!(cert.transcript.integral));
            out.insert("verified".into(), json!(true));
        }
        Operation::FractionalHelly { h, measure, lambda, eps, dirs, .. } => {
            let m = parse_measure(measure, d)?;
            let dirs = DirectionSet::parse(dirs, d)?;
            let w = fractional_helly_witness(f, &m, lambda, eps, *h, &default_direction(d), &dirs)?;
            let n = f.len();
            let tuples = binomial(n, (*h).min(n)) as f64;
            out.insert("beta".into(), json!(w.members.len() as f64 / n as f64));
            out.insert("alpha".into(), json!(w.qualifying as f64 / tuples));
            out.insert("qualifying".into(), json!(w.qualifying));
            out.insert("assigned".into(), json!(w.assigned));
            out.insert("witness_members".into(), json!(w.members.len()));
        }
        Operation::Selection { parts, measure, lambda, eps, .. } => {
            let m = parse_measure(measure, d)?;
            let params = TverbergParams::for_measure(&m, d, lambda.clone(), &(eps / scalar::int(2)));
            let s = selection(f, &m, eps, *parts, &params, seed)?;
            out.insert("rho_achieved".into(), sx(&s.rho_achieved));
            out.insert("tuples".into(), json!(s.tuples.len()));
            out.insert("r".into(), json!(s.r));
            out.insert("sampled".into(), json!(s.sampled));
        }
        Operation::Net { eps_prime, measure, lambda, eps, .. } => {
            let m = parse_measure(measure, d)?;
            let params = TverbergParams::for_measure(&m, d, lambda.clone(), &(eps / scalar::int(2)));
            let opts = NetOptions { seed, ..NetOptions::default() };
            let net = weak_net(f, &m, eps, eps_prime, &params, &opts)?;
            out.insert("net_size".into(), json!(net.net.len()));
            out.insert("iterations".into(), json!(net.iterations));
            out.insert("certified".into(), json!(net.certified));
            out.insert("validated".into(), json!(validate_net(f, &net.net, eps_prime)?));
        }
        Operation::Tverberg { parts, measure, lambda, eps, .. } => {
            let m = parse_measure(measure, d)?;
            let ok = match (f.as_points(), &m) {
                (Some(pts), Measure::Nonempty) => {
                    let (partition, _) = classic_tverberg(&pts, *parts)?;
                    out.insert("parts".into(), json!(partition));
                    parts_intersect(&pts, &partition)?
                }
                _ => {
                    let half = eps / scalar::int(2);
                    let params = TverbergParams::for_measure(&m, d, lambda.clone(), &half);
                    let r = tverberg_partition(f, *parts, &m, &half, &half, &params)?;
                    out.insert("parts".into(), json!(r.partition));
                    out.insert("achieved".into(), exact(&r.achieved));
                    verify_partition(f, &r.partition, &r.witness)?
                }
            };
            out.insert("verified".into(), json!(ok));
        }
    }
    Ok(())
}

/// Numeric reading of a measured value: numbers, rational strings, or
/// exact measure values.
fn numeric(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => scalar::parse(s).ok().map(|x| scalar::to_f64(&x)),
        Value::Object(o) => o.get("exact").and_then(numeric),
        _ => None,
    }
}

/// Per trial name: record and error counts, true counts of flags, and
/// mean/min/max of numeric quantities.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.name.as_str()) {
            names.push(&r.name);
        }
    }
    let mut out = Vec::new();
    for name in names {
        let group: Vec<&TrialRecord> = records.iter().filter(|r| r.name == name).collect();
        let push = |out: &mut Vec<Aggregate>, key: &str, stat: &str, value: f64| {
            out.push(Aggregate { name: name.into(), key: key.into(), stat: stat.into(), value })
        };
        push(&mut out, "records", "count", group.len() as f64);
        push(&mut out, "errors", "count", group.iter().filter(|r| r.error.is_some()).count() as f64);
        let mut keys: BTreeMap<&str, ()> = BTreeMap::new();
        for r in &group {
            for k in r.measured.keys() {
                keys.insert(k, ());
            }
        }
        for key in keys.keys() {
            let vals: Vec<&Value> = group.iter().filter_map(|r| r.measured.get(*key)).collect();
            if vals.iter().all(|v| v.is_boolean() || v.is_null()) {
                push(&mut out, key, "true", vals.iter().filter(|v| v.as_bool() == Some(true)).count() as f64);
                push(&mut out, key, "false", vals.iter().filter(|v| v.as_bool() == Some(false)).count() as f64);
                continue;
            }
            let nums: Vec<f64> = vals.iter().filter_map(|v| numeric(v)).filter(|x| x.is_finite()).collect();
            if nums.is_empty() {
                continue;
            }
            let n = nums.len() as f64;
            push(&mut out, key, "n", n);
            push(&mut out, key, "mean", nums.iter().sum::<f64>() / n);
            push(&mut out, key, "min", nums.iter().cloned().fold(f64::INFINITY, f64::min));
            push(&mut out, key, "max", nums.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }
    }
    out
}

impl ExperimentReport {
    /// Recomputes every aggregate from the trial records.
    pub fn audit(&self) -> Result<()> {
        let again = aggregate(&self.records);
        if again != self.aggregates {
            return Err(Error::Invalid("aggregates do not match the trial records".into()));
        }
        if self.records.iter().enumerate().any(|(i, r)| r.trial != i) {
            return Err(Error::Invalid("trial records out of order".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// One row per measured quantity: `trial,name,op,seed,instance_hash,key,value,error`.
    pub fn records_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "name", "op", "seed", "instance_hash", "key", "value", "error"])
            .map_err(csv_err)?;
        for r in &self.records {
            let base = [r.trial.to_string(), r.name.clone(), r.op.clone(), r.seed.to_string(), r.instance_hash.clone().unwrap_or_default()];
            let err = r.error.clone().unwrap_or_default();
            if r.measured.is_empty() {
                let row: Vec<String> = base.iter().cloned().chain([String::new(), String::new(), err.clone()]).collect();
                w.write_record(&row).map_err(csv_err)?;
            }
            for (k, v) in &r.measured {
                let text = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let row: Vec<String> = base.iter().cloned().chain([k.clone(), text, err.clone()]).collect();
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        finish(w)
    }

    /// `name,key,stat,value`
    pub fn aggregates_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "key", "stat", "value"]).map_err(csv_err)?;
        for a in &self.aggregates {
            w.write_record([a.name.clone(), a.key.clone(), a.stat.clone(), a.value.to_string()]).map_err(csv_err)?;
        }
        finish(w)
    }

    pub fn find(&self, name: &str, key: &str, stat: &str) -> Option<f64> {
        self.aggregates.iter().find(|a| a.name == name && a.key == key && a.stat == stat).map(|a| a.value)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(e.to_string()))
}
