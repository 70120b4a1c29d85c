//! Fractional transversals, the (p,q) check and piercing certificates.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::pool::{build_pool, CandidatePool, PoolOptions};
use crate::combinatorial::net::{weak_net, NetOptions};
use crate::combinatorial::tverberg::{binomial, for_each_subset, TverbergParams};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::geometry::ConvexBody;
use crate::lp::{self, LpInstance, LpSolution, Objective, Sense};
use crate::measures::{Measure, MeasureValue};
use crate::scalar::{self, Scalar};

pub const CERTIFICATE_SCHEMA: &str = "quanthelly.certificate/1";
/// p-subsets checked exhaustively up to this count, sampled beyond.
pub const SUBSET_BUDGET: u128 = 1_000_000;
pub const SUBSET_SAMPLES: usize = 10_000;
/// Weight denominators above this are rounded up before replication.
pub const MAX_DENOMINATOR: u64 = 1 << 16;

#[derive(Clone, Debug, Serialize)]
pub struct PqCheck {
    pub holds: bool,
    pub violator: Option<Vec<usize>>,
    pub exhaustive: bool,
    pub checked: u64,
}

/// Whether every `p` members include `q` whose intersection reaches `lambda`.
pub fn check_pq(family: &Family, p: usize, q: usize, msr: &Measure, lambda: &Scalar, seed: u64) -> Result<PqCheck> {
    if q == 0 || q > p {
        return Err(Error::Invalid(format!("need p >= q >= 1, got p = {p}, q = {q}")));
    }
    let n = family.len();
    if n < p {
        return Err(Error::Invalid(format!("family has {n} members, fewer than p = {p}")));
    }
    let mut memo: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut good = |tuple: &[usize]| -> Result<bool> {
        if let Some(&v) = memo.get(tuple) {
            return Ok(v);
        }
        let v = msr.at_least(&family.intersection(tuple)?, lambda)?;
        memo.insert(tuple.to_vec(), v);
        Ok(v)
    };
    let mut inspect = |subset: &[usize]| -> Result<bool> {
        let mut found = false;
        let mut err = None;
        for_each_subset(p, q, &mut |pick| {
            let tuple: Vec<usize> = pick.iter().map(|&i| subset[i]).collect();
            match good(&tuple) {
                Ok(true) => {
                    found = true;
                    false
                }
                Ok(false) => true,
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(found),
        }
    };

    let total = binomial(n, p);
    let mut checked = 0u64;
    if total <= SUBSET_BUDGET {
        let mut violator = None;
        let mut err = None;
        for_each_subset(n, p, &mut |s| {
            checked += 1;
            match inspect(s) {
                Ok(true) => true,
                Ok(false) => {
                    violator = Some(s.to_vec());
                    false
                }
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        return Ok(PqCheck { holds: violator.is_none(), violator, exhaustive: true, checked });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SUBSET_SAMPLES {
        let mut s = sample(&mut rng, n, p).into_vec();
        s.sort_unstable();
        checked += 1;
        if !inspect(&s)? {
            return Ok(PqCheck { holds: false, violator: Some(s), exhaustive: false, checked });
        }
    }
    Ok(PqCheck { holds: true, violator: None, exhaustive: false, checked })
}

/// Minimum total candidate weight giving every member weight at least 1 from candidates inside it.
pub fn fractional_transversal(family: &Family, pool: &CandidatePool) -> Result<LpSolution> {
    let nc = pool.len();
    let mut lp = LpInstance::new(Objective::Minimize, vec![Scalar::one(); nc]);
    for j in 0..family.len() {
        let inside = pool.inside(j);
        if inside.is_empty() {
            return Err(Error::Uncoverable { member: j });
        }
        let mut a = vec![Scalar::zero(); nc];
        for c in inside {
            a[c] = Scalar::one();
        }
        lp.add_row(a, Sense::Ge, Scalar::one());
    }
    add_unit_bounds(&mut lp, nc);
    let sol = lp::solve(&lp)?;
    lp::verify(&lp, &sol)?;
    Ok(sol)
}

/// Maximum total member weight with at most 1 on the holders of any candidate.
pub fn fractional_packing(family: &Family, pool: &CandidatePool) -> Result<LpSolution> {
    let n = family.len();
    let mut lp = LpInstance::new(Objective::Maximize, vec![Scalar::one(); n]);
    for c in 0..pool.len() {
        let mut a = vec![Scalar::zero(); n];
        for j in pool.holders(c) {
            a[j] = Scalar::one();
        }
        lp.add_row(a, Sense::Le, Scalar::one());
    }
    add_unit_bounds(&mut lp, n);
    let sol = lp::solve(&lp)?;
    lp::verify(&lp, &sol)?;
    Ok(sol)
}

fn add_unit_bounds(lp: &mut LpInstance, vars: usize) {
    for i in 0..vars {
        let mut a = vec![Scalar::zero(); vars];
        a[i] = Scalar::one();
        lp.add_row(a, Sense::Le, Scalar::one());
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Transcript {
    #[serde(with = "scalar::serde_scalar")]
    pub tau_star: Scalar,
    #[serde(with = "scalar::serde_opt_scalar")]
    pub nu_star: Option<Scalar>,
    pub pool_size: usize,
    pub s_max: usize,
    /// The LPs only see the finite pool, so `tau_star` bounds the unrestricted value from above.
    pub pool_restricted: bool,
    pub integral: bool,
    /// Common weight denominator `M` and whether weights were rounded up to reach it.
    pub replication: String,
    pub rounded: bool,
    pub multiset_size: usize,
    #[serde(with = "scalar::serde_opt_scalar")]
    pub net_eps_prime: Option<Scalar>,
    pub net_iterations: u64,
    pub net_certified: bool,
    pub selected: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PiercingCertificate {
    pub schema: &'static str,
    pub witnesses: Vec<ConvexBody>,
    pub achieved: Vec<MeasureValue>,
    /// Witness index for each family member.
    pub coverage: Vec<usize>,
    pub transcript: Transcript,
}

/// Rounds weights up to a denominator of at most [`MAX_DENOMINATOR`]; feasibility only improves.
fn round_weights(w: &[Scalar]) -> (Vec<Scalar>, BigInt, bool) {
    let m = scalar::common_denominator(w.iter());
    if m <= BigInt::from(MAX_DENOMINATOR) {
        return (w.to_vec(), m, false);
    }
    let cap = BigInt::from(MAX_DENOMINATOR);
    let rounded: Vec<Scalar> = w
        .iter()
        .map(|x| Scalar::new((x * Scalar::from_integer(cap.clone())).ceil().to_integer(), cap.clone()))
        .collect();
    let m = scalar::common_denominator(rounded.iter());
    (rounded, m, true)
}

/// Turns a fractional transversal into a small list of witnesses via a weak net.
pub fn replicate_and_round(
    family: &Family,
    pool: &CandidatePool,
    sol: &LpSolution,
    msr: &Measure,
    lambda: &Scalar,
    eps: &Scalar,
    gamma: &Scalar,
    net_opts: &NetOptions,
) -> Result<PiercingCertificate> {
    let weights = &sol.primal;
    let integral = weights.iter().all(|w| w.is_integer());
    let mut transcript = Transcript {
        tau_star: sol.optimum.clone(),
        nu_star: None,
        pool_size: pool.len(),
        s_max: pool.s_max,
        pool_restricted: true,
        integral,
        replication: "1".into(),
        rounded: false,
        multiset_size: 0,
        net_eps_prime: None,
        net_iterations: 0,
        net_certified: true,
        selected: Vec::new(),
    };
    let witnesses: Vec<ConvexBody> = if integral {
        let chosen: Vec<usize> = (0..pool.len()).filter(|&c| weights[c].is_positive()).collect();
        transcript.selected = chosen.clone();
        chosen.iter().map(|&c| pool.candidates[c].body.clone()).collect()
    } else {
        let (w, m, rounded) = round_weights(weights);
        transcript.replication = m.to_string();
        transcript.rounded = rounded;
        let mut members = Vec::new();
        let mut owners = Vec::new();
        for (c, wc) in w.iter().enumerate() {
            let copies = (wc * Scalar::from_integer(m.clone())).to_integer().to_usize().ok_or_else(|| {
                Error::Invalid("replication count does not fit in memory".into())
            })?;
            for _ in 0..copies {
                members.push(pool.candidates[c].body.clone());
                owners.push(c);
            }
        }
        let r: Scalar = w.iter().sum();
        transcript.multiset_size = members.len();
        let eps_p = r.recip();
        transcript.net_eps_prime = Some(eps_p.clone());
        let multiset = Family::new(members)?;
        let d = multiset.dim().ok_or(Error::EmptyInput("empty multiset"))?;
        // Candidates already reach (1 - gamma eps) lambda; the net spends the rest.
        let floor = (Scalar::one() - gamma * eps) * lambda;
        let net_eps = (Scalar::one() - gamma) * eps;
        let params = TverbergParams::for_measure(msr, d, floor, &(&net_eps / scalar::int(2)));
        let net = weak_net(&multiset, msr, &net_eps, &eps_p, &params, net_opts)?;
        transcript.net_iterations = net.iterations;
        transcript.net_certified = net.certified;
        net.net
    };

    let (witnesses, coverage) = assign(family, witnesses)?;
    let achieved = witnesses.iter().map(|w| msr.evaluate(w)).collect::<Result<Vec<_>>>()?;
    Ok(PiercingCertificate { schema: CERTIFICATE_SCHEMA, witnesses, achieved, coverage, transcript })
}

/// Maps each member to the first witness inside it and drops unused witnesses.
fn assign(family: &Family, witnesses: Vec<ConvexBody>) -> Result<(Vec<ConvexBody>, Vec<usize>)> {
    let mut raw = Vec::with_capacity(family.len());
    for (j, f) in family.members.iter().enumerate() {
        let w = witnesses.iter().position(|w| f.contains_body(w)).ok_or(Error::NetValidation { member: j })?;
        raw.push(w);
    }
    let mut used: Vec<usize> = raw.clone();
    used.sort_unstable();
    used.dedup();
    let coverage = raw.iter().map(|w| used.binary_search(w).unwrap()).collect();
    Ok((used.into_iter().map(|i| witnesses[i].clone()).collect(), coverage))
}

/// Re-checks every containment and witness size from scratch.
pub fn verify_certificate(
    family: &Family,
    msr: &Measure,
    lambda: &Scalar,
    eps: &Scalar,
    cert: &PiercingCertificate,
) -> Result<()> {
    if cert.coverage.len() != family.len() {
        return Err(Error::Certificate("coverage does not list every member".into()));
    }
    for (j, &w) in cert.coverage.iter().enumerate() {
        let body = cert.witnesses.get(w).ok_or_else(|| Error::Certificate(format!("member {j} points at missing witness {w}")))?;
        if !family.get(j).contains_body(body) {
            return Err(Error::NetValidation { member: j });
        }
    }
    let floor = (Scalar::one() - eps) * lambda;
    for (i, w) in cert.witnesses.iter().enumerate() {
        if !msr.at_least(w, &floor)? {
            return Err(Error::Certificate(format!(
                "witness {i} has {} below {}",
                msr.evaluate(w)?,
                scalar::format(&floor)
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct PierceOptions {
    pub pool: PoolOptions,
    pub net: NetOptions,
}

impl PierceOptions {
    pub fn new(s_max: usize) -> Self {
        PierceOptions { pool: PoolOptions::new(s_max), net: NetOptions::default() }
    }
}

/// The full pipeline: (p,q) check, pool, both LPs, replication and a verified certificate.
pub fn pq_pierce(
    family: &Family,
    p: usize,
    q: usize,
    msr: &Measure,
    lambda: &Scalar,
    eps: &Scalar,
    opts: &PierceOptions,
) -> Result<PiercingCertificate> {
    if eps.is_negative() || eps >= &Scalar::one() {
        return Err(Error::Invalid("eps must lie in [0, 1)".into()));
    }
    let check = check_pq(family, p, q, msr, lambda, opts.pool.seed)?;
    if let Some(v) = check.violator {
        return Err(Error::Hypothesis(v));
    }
    let pool = build_pool(family, msr, lambda, eps, &opts.pool)?;
    let tau = fractional_transversal(family, &pool)?;
    let nu = fractional_packing(family, &pool)?;
    if tau.optimum != nu.optimum {
        return Err(Error::Certificate(format!(
            "duality gap: transversal {} vs packing {}",
            scalar::format(&tau.optimum),
            scalar::format(&nu.optimum)
        )));
    }
    let mut cert = replicate_and_round(family, &pool, &tau, msr, lambda, eps, &opts.pool.gamma, &opts.net)?;
    cert.transcript.nu_star = Some(nu.optimum);
    verify_certificate(family, msr, lambda, eps, &cert)?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;
    use crate::geometry::{convex_hull, Point};
    use crate::scalar::{int, ratio};

    fn three_squares() -> Family {
        Family::new(vec![ConvexBody::rect_i(0, 2, 0, 2), ConvexBody::rect_i(1, 3, 0, 2), ConvexBody::rect_i(2, 4, 0, 2)])
            .unwrap()
    }

    /// Oracle: best objective over all vertices of the transversal polytope,
    /// found by solving every square subsystem of tight constraints.
    fn vertex_enumeration_min(rows: &[Vec<Scalar>], nvars: usize) -> Scalar {
        // Constraints a.x >= 1, x >= 0, x <= 1 written as (a, b, sense) with tight = equality.
        let mut cons: Vec<(Vec<Scalar>, Scalar)> = rows.iter().map(|r| (r.clone(), int(1))).collect();
        for i in 0..nvars {
            let mut e = vec![int(0); nvars];
            e[i] = int(1);
            cons.push((e.clone(), int(0)));
            cons.push((e, int(1)));
        }
        let feasible = |x: &[Scalar]| {
            rows.iter().all(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<Scalar>() >= int(1))
                && x.iter().all(|v| v >= &int(0) && v <= &int(1))
        };
        let mut best: Option<Scalar> = None;
        for_each_subset(cons.len(), nvars, &mut |pick| {
            let a: Vec<Vec<Scalar>> = pick.iter().map(|&i| cons[i].0.clone()).collect();
            let b: Vec<Scalar> = pick.iter().map(|&i| cons[i].1.clone()).collect();
            if let Some(x) = solve_square(a, b) {
                if feasible(&x) {
                    let v: Scalar = x.iter().sum();
                    if best.as_ref().map_or(true, |cur| &v < cur) {
                        best = Some(v);
                    }
                }
            }
            true
        });
        best.unwrap()
    }

    fn solve_square(mut a: Vec<Vec<Scalar>>, mut b: Vec<Scalar>) -> Option<Vec<Scalar>> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, piv);
            b.swap(col, piv);
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = &a[r][col] / &a[col][col];
                    for c in col..n {
                        let t = &f * &a[col][c];
                        a[r][c] -= t;
                    }
                    let t = &f * &b[col];
                    b[r] -= t;
                }
            }
        }
        Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
    }

    fn transversal_rows(family: &Family, pool: &CandidatePool) -> Vec<Vec<Scalar>> {
        (0..family.len())
            .map(|j| (0..pool.len()).map(|c| if pool.containment[c][j] { int(1) } else { int(0) }).collect())
            .collect()
    }

    #[test]
    fn three_squares_lps() {
        let fam = three_squares();
        let pool = build_pool(&fam, &Measure::Volume, &int(1), &int(0), &PoolOptions::new(2)).unwrap();
        let tau = fractional_transversal(&fam, &pool).unwrap();
        let nu = fractional_packing(&fam, &pool).unwrap();
        assert_eq!(tau.optimum, int(2));
        assert_eq!(nu.optimum, int(2));
        assert_eq!(tau.optimum, vertex_enumeration_min(&transversal_rows(&fam, &pool), pool.len()));
        assert_eq!(nu.primal, vec![int(1), int(0), int(1)]);
    }

    #[test]
    fn single_and_universal() {
        let one = Family::new(vec![ConvexBody::rect_i(0, 2, 0, 2)]).unwrap();
        let pool = build_pool(&one, &Measure::Volume, &int(1), &int(0), &PoolOptions::new(1)).unwrap();
        assert_eq!(fractional_transversal(&one, &pool).unwrap().optimum, int(1));
        assert_eq!(fractional_packing(&one, &pool).unwrap().optimum, int(1));

        let fam = Family::new(vec![
            ConvexBody::rect_i(0, 4, 0, 4),
            ConvexBody::rect_i(1, 5, 0, 4),
            ConvexBody::rect_i(0, 4, 1, 5),
        ])
        .unwrap();
        let pool = build_pool(&fam, &Measure::Volume, &int(1), &int(0), &PoolOptions::new(3)).unwrap();
        assert_eq!(fractional_transversal(&fam, &pool).unwrap().optimum, int(1));
        assert_eq!(fractional_packing(&fam, &pool).unwrap().optimum, int(1));
        let cert = pq_pierce(&fam, 3, 3, &Measure::Volume, &int(1), &ratio(1, 8), &PierceOptions::new(3)).unwrap();
        assert_eq!(cert.witnesses.len(), 1);
    }

    #[test]
    fn uncoverable_member() {
        let fam = Family::new(vec![ConvexBody::rect_i(0, 2, 0, 2), ConvexBody::rect_i(10, 11, 0, 1)]).unwrap();
        let pool = build_pool(&fam, &Measure::Volume, &int(2), &int(0), &PoolOptions::new(2)).unwrap();
        assert!(matches!(fractional_transversal(&fam, &pool), Err(Error::Uncoverable { member: 1 })));
    }

    #[test]
    fn pq_checks() {
        let fam = three_squares();
        let c = check_pq(&fam, 3, 2, &Measure::Volume, &int(1), 0).unwrap();
        assert!(c.holds && c.exhaustive);
        assert!(check_pq(&fam, 1, 1, &Measure::Volume, &int(1), 0).unwrap().holds);
        assert!(!check_pq(&fam, 1, 1, &Measure::Volume, &int(5), 0).unwrap().holds);
        let apart = Family::new(vec![
            ConvexBody::rect_i(0, 1, 0, 1),
            ConvexBody::rect_i(2, 3, 0, 1),
            ConvexBody::rect_i(4, 5, 0, 1),
        ])
        .unwrap();
        let c = check_pq(&apart, 2, 2, &Measure::Volume, &int(1), 0).unwrap();
        assert_eq!(c.violator, Some(vec![0, 1]));
    }

    #[test]
    fn three_squares_pipeline() {
        let fam = three_squares();
        let cert = pq_pierce(&fam, 3, 2, &Measure::Volume, &int(1), &ratio(1, 8), &PierceOptions::new(2)).unwrap();
        assert!(cert.witnesses.len() <= 2);
        assert!(cert.achieved.iter().all(|a| a.certainly_at_least(&ratio(7, 8))));
        verify_certificate(&fam, &Measure::Volume, &int(1), &ratio(1, 8), &cert).unwrap();
    }

    #[test]
    fn copies_of_one_square() {
        let fam = Family::new(vec![ConvexBody::rect_i(0, 3, 0, 3); 6]).unwrap();
        let cert = pq_pierce(&fam, 2, 2, &Measure::Volume, &int(1), &ratio(1, 4), &PierceOptions::new(2)).unwrap();
        assert_eq!(cert.witnesses.len(), 1);
        assert_eq!(cert.coverage, vec![0; 6]);
    }

    #[test]
    fn fractional_optimum_goes_through_net() {
        // Pairwise overlaps of area >= 1 with an empty triple intersection: tau* = 3/2.
        let fam = Family::new(vec![
            ConvexBody::rect_i(0, 10, 0, 1),
            ConvexBody::rect_i(0, 1, 0, 10),
            ConvexBody::polygon_i(&[(8, 0), (10, 0), (0, 10), (0, 8)]),
        ])
        .unwrap();
        let pool = build_pool(&fam, &Measure::Volume, &int(1), &int(0), &PoolOptions::new(2)).unwrap();
        let tau = fractional_transversal(&fam, &pool).unwrap();
        let nu = fractional_packing(&fam, &pool).unwrap();
        assert_eq!(tau.optimum, ratio(3, 2));
        assert_eq!(nu.optimum, ratio(3, 2));
        let cert = replicate_and_round(&fam, &pool, &tau, &Measure::Volume, &int(1), &int(0), &ratio(1, 2), &NetOptions::default())
            .unwrap();
        assert!(!cert.transcript.integral);
        assert!(cert.transcript.net_certified);
        verify_certificate(&fam, &Measure::Volume, &int(1), &int(0), &cert).unwrap();
    }

    #[test]
    fn rounding_keeps_feasibility() {
        let w = vec![Scalar::new(BigInt::from(1), BigInt::from(100_003)), ratio(1, 3)];
        let (r, m, rounded) = round_weights(&w);
        assert!(rounded);
        assert!(m <= BigInt::from(MAX_DENOMINATOR));
        assert!(r.iter().zip(&w).all(|(a, b)| a >= b));
    }

    fn random_family(seed: u64, n: usize) -> Family {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members: Vec<ConvexBody> = (0..n)
            .map(|_| loop {
                let cx = rng.gen_range(0..10);
                let cy = rng.gen_range(0..10);
                let pts: Vec<Point> = (0..4)
                    .map(|_| Point::from_ints(&[cx + rng.gen_range(0..6), cy + rng.gen_range(0..6)]))
                    .collect();
                let b = convex_hull(&pts).unwrap();
                if b.is_full_dimensional() {
                    break b;
                }
            })
            .collect();
        Family::new(members).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn duality_and_weak_duality(seed in 0u64..1000, n in 3usize..7) {
            let fam = random_family(seed, n);
            let pool = build_pool(&fam, &Measure::Volume, &int(1), &int(0), &PoolOptions::new(2)).unwrap();
            prop_assume!((0..fam.len()).all(|j| !pool.inside(j).is_empty()));
            let tau = fractional_transversal(&fam, &pool).unwrap();
            let nu = fractional_packing(&fam, &pool).unwrap();
            prop_assert_eq!(&tau.optimum, &nu.optimum);
            // Any feasible packing is at most any feasible transversal.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<Scalar> = (0..fam.len()).map(|_| ratio(rng.gen_range(0..4), 4)).collect();
            let pack_ok = (0..pool.len()).all(|c| pool.holders(c).iter().map(|&j| y[j].clone()).sum::<Scalar>() <= int(1));
            let x = vec![int(1); pool.len()];
            if pack_ok {
                prop_assert!(y.iter().sum::<Scalar>() <= x.iter().sum::<Scalar>());
            }
        }
    }
}
