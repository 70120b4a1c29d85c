use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quanthelly::combinatorial::net::{validate_net, weak_net, NetOptions};
use quanthelly::combinatorial::selection::selection;
use quanthelly::combinatorial::tverberg::{
    classic_tverberg, parts_intersect, tverberg_partition, verify_partition, TverbergParams,
};
use quanthelly::family::Family;
use quanthelly::floating::{floating_body, DirectionSet};
use quanthelly::geometry::ConvexBody;
use quanthelly::harness::{self, render_svg, GeneratorKind, GeneratorSpec, Style, SvgObject};
use quanthelly::piercing::helly::default_direction;
use quanthelly::piercing::{colorful_helly, helly_check, pq_pierce, verify_certificate, PierceOptions};
use quanthelly::scalar;
use quanthelly::{Error, Measure, Scalar};

const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_POOL: u8 = 3;

#[derive(Parser)]
#[command(name = "quanthelly", version, about = "Quantitative Helly-type constructions in exact arithmetic")]
struct Cli {
    /// Output format for the result on stdout.
    #[arg(long, value_enum, global = true, default_value = "json")]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

// Options shared by commands that take a measure threshold.
#[derive(clap::Args)]
struct Threshold {
    /// A measure name (volume, perimeter, nonempty, integer) or a JSON file.
    #[arg(long, default_value = "volume")]
    measure: String,
    #[arg(long, default_value = "1")]
    lambda: String,
    #[arg(long, default_value = "0")]
    eps: String,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a family from a generator spec.
    Gen {
        /// Generator spec file.
        #[arg(long, conflicts_with = "kind")]
        spec: Option<PathBuf>,
        /// Generator kind, with parameters from --params.
        #[arg(long)]
        kind: Option<String>,
        /// Generator parameters as a JSON object.
        #[arg(long, default_value = "{}")]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Piercing certificate under a (p,q) condition.
    Pierce {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        threshold: Threshold,
        #[arg(long, default_value_t = 3)]
        s_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks every h-subfamily, then the whole family.
    HellyCheck {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        h: usize,
        #[command(flatten)]
        threshold: Threshold,
    },
    /// Floating body over a finite direction set.
    FloatingBody {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, default_value = "volume")]
        measure: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "farey:7")]
        dirs: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Tverberg partition with a verified common witness.
    Tverberg {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        parts: usize,
        #[command(flatten)]
        threshold: Threshold,
    },
    /// Weak eps'-net.
    Net {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        eps_prime: String,
        #[command(flatten)]
        threshold: Threshold,
    },
    /// Selection witness hit by many colorful hulls.
    Selection {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        parts: usize,
        #[command(flatten)]
        threshold: Threshold,
    },
    /// Colorful Helly: a class whose members all contain the witness.
    ColorfulHelly {
        /// JSON file with a "classes" list of families.
        #[arg(long)]
        classes: PathBuf,
        #[command(flatten)]
        threshold: Threshold,
        #[arg(long, default_value = "diag")]
        dirs: String,
    },
    /// Runs an experiment config and writes report files.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Directory for report.json, records.csv, aggregates.csv and figures.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::Hypothesis(_)) => EXIT_HYPOTHESIS,
                Some(Error::Uncoverable { .. } | Error::NetValidation { .. }) => EXIT_POOL,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_family(path: &Path) -> anyhow::Result<Family> {
    Ok(Family::from_json(&read_json(path)?)?)
}

fn read_measure(text: &str, dim: usize) -> anyhow::Result<Measure> {
    let path = Path::new(text);
    if path.is_file() {
        return Ok(harness::parse_measure(&read_json(path)?, dim)?);
    }
    Ok(harness::measure_by_name(text, dim)?)
}

fn parse_scalar(text: &str) -> anyhow::Result<Scalar> {
    Ok(scalar::parse(text)?)
}

fn family_dim(f: &Family) -> anyhow::Result<usize> {
    f.dim().context("family is empty")
}

/// Flattens a JSON document into `path,value` rows.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, rows);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn print_out(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn emit(format: Format, v: &Value) -> anyhow::Result<()> {
    match format {
        Format::Json => print_out(&format!("{}\n", serde_json::to_string_pretty(v)?)),
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, x) in rows {
                w.write_record([k, x])?;
            }
            print_out(&String::from_utf8(w.into_inner()?)?)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let seed = cli.seed;
    match &cli.command {
        Command::Gen { spec, kind, params, out, svg } => {
            let spec = match (spec, kind) {
                (Some(path), _) => GeneratorSpec::from_json(&read_json(path)?)?.with_seed(seed),
                (None, Some(kind)) => {
                    let mut v: Value = serde_json::from_str(params).context("parsing --params")?;
                    let obj = v.as_object_mut().context("--params must be a JSON object")?;
                    obj.insert("kind".into(), json!(kind));
                    let k: GeneratorKind = serde_json::from_value(v)?;
                    GeneratorSpec::new(k, seed)
                }
                (None, None) => bail!("gen needs --spec or --kind"),
            };
            let g = harness::generate_planted(&spec)?;
            let mut doc = g.family.to_json();
            doc["generator"] = serde_json::to_value(&spec)?;
            doc["instance_hash"] = json!(harness::instance_hash(&g.family));
            if let Some(path) = svg {
                let objs: Vec<(SvgObject, Style)> =
                    g.family.members.iter().map(|b| (SvgObject::Body(b.clone()), Style::default())).collect();
                write_text(path, &render_svg(&objs)?)?;
            }
            match out {
                Some(path) => write_text(path, &serde_json::to_string_pretty(&doc)?)?,
                None => emit(cli.format, &doc)?,
            }
            Ok(0)
        }
        Command::Pierce { family, p, q, threshold, s_max, out } => {
            let f = read_family(family)?;
            let m = read_measure(&threshold.measure, family_dim(&f)?)?;
            let (lambda, eps) = (parse_scalar(&threshold.lambda)?, parse_scalar(&threshold.eps)?);
            let mut opts = PierceOptions::new(*s_max);
            opts.pool.seed = seed;
            opts.net.seed = seed;
            let cert = pq_pierce(&f, *p, *q, &m, &lambda, &eps, &opts)?;
            verify_certificate(&f, &m, &lambda, &eps, &cert)?;
            let doc = serde_json::to_value(&cert)?;
            if let Some(path) = out {
                write_text(path, &serde_json::to_string_pretty(&doc)?)?;
            }
            emit(cli.format, &doc)?;
            Ok(0)
        }
        Command::HellyCheck { family, h, threshold } => {
            let f = read_family(family)?;
            let m = read_measure(&threshold.measure, family_dim(&f)?)?;
            let (lambda, eps) = (parse_scalar(&threshold.lambda)?, parse_scalar(&threshold.eps)?);
            let r = helly_check(&f, *h, &m, &lambda, &eps, seed)?;
            emit(cli.format, &serde_json::to_value(&r)?)?;
            Ok(if r.hypothesis { 0 } else { EXIT_HYPOTHESIS })
        }
        Command::FloatingBody { body, measure, eps, dirs, svg } => {
            let k = ConvexBody::from_json(&read_json(body)?)?;
            let m = read_measure(measure, k.dim())?;
            let dirs = DirectionSet::parse(dirs, k.dim())?;
            let fb = floating_body(&k, &m, &parse_scalar(eps)?, &dirs)?;
            if let Some(path) = svg {
                let objs = vec![
                    (SvgObject::Body(k.clone()), Style::default()),
                    (SvgObject::Body(fb.body.clone()), Style::new("#8b1e1e", "#e07a5f", 0.35)),
                ];
                write_text(path, &render_svg(&objs)?)?;
            }
            let doc = json!({"body": fb.body, "delta": fb.delta, "target": scalar::format(&fb.target), "directions": dirs.len()});
            emit(cli.format, &doc)?;
            Ok(0)
        }
        Command::Tverberg { family, parts, threshold } => {
            let f = read_family(family)?;
            let d = family_dim(&f)?;
            let m = read_measure(&threshold.measure, d)?;
            let doc = match (f.as_points(), &m) {
                (Some(pts), Measure::Nonempty) => {
                    let (partition, point) = classic_tverberg(&pts, *parts)?;
                    let verified = parts_intersect(&pts, &partition)?;
                    json!({"partition": partition, "witness": point, "verified": verified})
                }
                _ => {
                    let (lambda, eps) = (parse_scalar(&threshold.lambda)?, parse_scalar(&threshold.eps)?);
                    let half = &eps / scalar::int(2);
                    let params = TverbergParams::for_measure(&m, d, lambda, &half);
                    let r = tverberg_partition(&f, *parts, &m, &half, &half, &params)?;
                    let verified = verify_partition(&f, &r.partition, &r.witness)?;
                    let mut v = serde_json::to_value(&r)?;
                    v["verified"] = json!(verified);
                    v
                }
            };
            emit(cli.format, &doc)?;
            Ok(0)
        }
        Command::Net { family, eps_prime, threshold } => {
            let f = read_family(family)?;
            let d = family_dim(&f)?;
            let m = read_measure(&threshold.measure, d)?;
            let (lambda, eps) = (parse_scalar(&threshold.lambda)?, parse_scalar(&threshold.eps)?);
            let eps_p = parse_scalar(eps_prime)?;
            let params = TverbergParams::for_measure(&m, d, lambda, &(&eps / scalar::int(2)));
            let opts = NetOptions { seed, ..NetOptions::default() };
            let net = weak_net(&f, &m, &eps, &eps_p, &params, &opts)?;
            let mut doc = serde_json::to_value(&net)?;
            doc["validated"] = json!(validate_net(&f, &net.net, &eps_p)?);
            emit(cli.format, &doc)?;
            Ok(0)
        }
        Command::Selection { family, parts, threshold } => {
            let f = read_family(family)?;
            let d = family_dim(&f)?;
            let m = read_measure(&threshold.measure, d)?;
            let (lambda, eps) = (parse_scalar(&threshold.lambda)?, parse_scalar(&threshold.eps)?);
            let params = TverbergParams::for_measure(&m, d, lambda, &(&eps / scalar::int(2)));
            let s = selection(&f, &m, &eps, *parts, &params, seed)?;
            emit(cli.format, &serde_json::to_value(&s)?)?;
            Ok(0)
        }
        Command::ColorfulHelly { classes, threshold, dirs } => {
            let doc = read_json(classes)?;
            harness::check_schema(&doc, "quanthelly.classes/1")?;
            let list = doc.get("classes").and_then(Value::as_array).context("expected a \"classes\" list")?;
            let fams: Vec<Family> = list.iter().map(Family::from_json).collect::<Result<_, _>>()?;
            let d = fams.first().and_then(Family::dim).context("no classes")?;
            let m = read_measure(&threshold.measure, d)?;
            let (lambda, eps) = (parse_scalar(&threshold.lambda)?, parse_scalar(&threshold.eps)?);
            let dirs = DirectionSet::parse(dirs, d)?;
            let r = colorful_helly(&fams, &m, &lambda, &eps, &default_direction(d), &dirs)?;
            emit(cli.format, &serde_json::to_value(&r)?)?;
            Ok(0)
        }
        Command::Experiment { config, out } => {
            let cfg = harness::ExperimentConfig::from_json(&read_json(config)?)?;
            let report = harness::run_experiment(&cfg)?;
            if let Some(dir) = out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                write_text(&dir.join("report.json"), &serde_json::to_string_pretty(&report.to_json())?)?;
                write_text(&dir.join("records.csv"), &report.records_csv()?)?;
                write_text(&dir.join("aggregates.csv"), &report.aggregates_csv()?)?;
                for (name, svg) in &report.figures {
                    write_text(&dir.join(name), svg)?;
                }
            }
            match cli.format {
                Format::Json => print_out(&format!("{}\n", serde_json::to_string_pretty(&report.to_json())?))?,
                Format::Csv => print_out(&report.aggregates_csv()?)?,
            }
            Ok(0)
        }
    }
}
