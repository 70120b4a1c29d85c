//! Greedy weak epsilon-nets.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::caratheodory::hull_contains_body;
use super::selection::selection;
use super::tverberg::TverbergParams;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::geometry::{ConvexBody, Point};
use crate::measures::{Measure, MeasureValue};
use crate::scalar::{self, Scalar};

/// Search nodes allowed before `find_uncovered_subset` falls back to sampling.
pub const NODE_BUDGET: u64 = 1_000_000;
pub const DEFAULT_TRIALS: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct UncoveredSearch {
    pub subset: Option<Vec<usize>>,
    /// False when the answer comes from sampling, so "none found" is not a certificate.
    pub exhaustive: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NetResult {
    pub net: Vec<ConvexBody>,
    pub achieved: Vec<MeasureValue>,
    pub iterations: u64,
    #[serde(with = "scalar::serde_scalar")]
    pub rho_min: Scalar,
    pub cap: u64,
    /// Every search (including the final one) was exhaustive.
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub struct NetOptions {
    pub trials: usize,
    pub seed: u64,
}

impl Default for NetOptions {
    fn default() -> Self {
        NetOptions { trials: DEFAULT_TRIALS, seed: 0 }
    }
}

/// `ceil(eps' |T|)`, at least 1.
pub fn subset_size(n: usize, eps_p: &Scalar) -> usize {
    let k = scalar::ceil_to_u64(&(eps_p * scalar::int(n as i64))).unwrap_or(u64::MAX) as usize;
    k.clamp(1, n.max(1))
}

/// Indices grouped by identical member, in order of first appearance.
fn groups(family: &Family) -> Vec<Vec<usize>> {
    let mut key: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, b) in family.members.iter().enumerate() {
        let k = serde_json::to_string(b).expect("body serializes");
        match key.get(&k) {
            Some(&g) => out[g].push(i),
            None => {
                key.insert(k, out.len());
                out.push(vec![i]);
            }
        }
    }
    out
}

fn covers(points: &[Point], net: &[ConvexBody]) -> Result<bool> {
    for e in net {
        if hull_contains_body(points, e)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Looks for `ceil(eps' |T|)` members whose hull-union contains no net element.
///
/// Identical members are searched as one group, so replicated families stay
/// cheap. Falls back to random trials after [`NODE_BUDGET`] search nodes.
pub fn find_uncovered_subset(
    family: &Family,
    net: &[ConvexBody],
    eps_p: &Scalar,
    opts: &NetOptions,
) -> Result<UncoveredSearch> {
    let n = family.len();
    if net.is_empty() {
        return Ok(UncoveredSearch { subset: Some((0..n).collect()), exhaustive: true, nodes: 0 });
    }
    if n == 0 {
        return Ok(UncoveredSearch { subset: None, exhaustive: true, nodes: 0 });
    }
    let k = subset_size(n, eps_p);
    let gs = groups(family);
    let verts: Vec<&[Point]> = gs
        .iter()
        .map(|g| family.get(g[0]).vertices().ok_or(Error::Unbounded))
        .collect::<Result<_>>()?;
    let mut suffix = vec![0usize; gs.len() + 1];
    for g in (0..gs.len()).rev() {
        suffix[g] = suffix[g + 1] + gs[g].len();
    }

    let mut search = Dfs { gs: &gs, verts: &verts, suffix: &suffix, net, k, nodes: 0, chosen: Vec::new() };
    match search.run(0, 0, &mut Vec::new())? {
        Some(true) => {
            let mut subset: Vec<usize> = search.chosen.iter().flat_map(|&g| gs[g].iter().copied()).collect();
            subset.sort_unstable();
            subset.truncate(k);
            Ok(UncoveredSearch { subset: Some(subset), exhaustive: true, nodes: search.nodes })
        }
        Some(false) => Ok(UncoveredSearch { subset: None, exhaustive: true, nodes: search.nodes }),
        None => {
            let nodes = search.nodes;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut idx: Vec<usize> = (0..n).collect();
            for _ in 0..opts.trials {
                idx.shuffle(&mut rng);
                let mut subset = idx[..k].to_vec();
                subset.sort_unstable();
                let mut pts = Vec::new();
                for &i in &subset {
                    pts.extend_from_slice(family.get(i).verts());
                }
                if !covers(&pts, net)? {
                    return Ok(UncoveredSearch { subset: Some(subset), exhaustive: false, nodes });
                }
            }
            Ok(UncoveredSearch { subset: None, exhaustive: false, nodes })
        }
    }
}

struct Dfs<'a> {
    gs: &'a [Vec<usize>],
    verts: &'a [&'a [Point]],
    suffix: &'a [usize],
    net: &'a [ConvexBody],
    k: usize,
    nodes: u64,
    chosen: Vec<usize>,
}

impl Dfs<'_> {
    /// `Some(true)` found, `Some(false)` exhausted, `None` over budget.
    fn run(&mut self, g: usize, mult: usize, pts: &mut Vec<Point>) -> Result<Option<bool>> {
        if mult >= self.k {
            return Ok(Some(true));
        }
        if g == self.gs.len() || mult + self.suffix[g] < self.k {
            return Ok(Some(false));
        }
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Ok(None);
        }
        // Take the group if the hull stays clear of the net; adding members only grows the hull.
        let before = pts.len();
        pts.extend_from_slice(self.verts[g]);
        if !covers(pts, self.net)? {
            self.chosen.push(g);
            match self.run(g + 1, mult + self.gs[g].len(), pts)? {
                Some(false) => {
                    self.chosen.pop();
                }
                other => return Ok(other),
            }
        }
        pts.truncate(before);
        self.run(g + 1, mult, pts)
    }
}

/// Number of Tverberg parts used on a subfamily of size `n`.
pub fn net_parts(n: usize, d: usize, msr: &Measure, params: &TverbergParams) -> usize {
    let part = params.part_size(d);
    let group = if matches!(msr, Measure::Nonempty) { part } else { params.helly.saturating_mul(part) };
    (n.saturating_sub(1)) / group + 1
}

/// Greedy weak net: while some large subfamily misses the net, add a selection witness for it.
pub fn weak_net(
    family: &Family,
    msr: &Measure,
    eps: &Scalar,
    eps_p: &Scalar,
    params: &TverbergParams,
    opts: &NetOptions,
) -> Result<NetResult> {
    if !eps_p.is_positive() || eps_p > &Scalar::one() {
        return Err(Error::Invalid("eps' must lie in (0, 1]".into()));
    }
    let d = family.dim().ok_or(Error::EmptyInput("empty family"))?;
    let r = params.part_size(d).min(family.len()) as u32;
    let mut net: Vec<ConvexBody> = Vec::new();
    let mut achieved = Vec::new();
    let mut rho_min = Scalar::one();
    let mut certified = true;
    let mut iterations = 0u64;
    let cap_for = |rho: &Scalar| -> u64 {
        if !rho.is_positive() {
            return u64::MAX;
        }
        let bound = (rho * pow(eps_p, r)).recip();
        scalar::ceil_to_u64(&bound).unwrap_or(u64::MAX)
    };
    let mut cap = cap_for(&rho_min);
    loop {
        let search = find_uncovered_subset(family, &net, eps_p, &NetOptions { seed: opts.seed ^ iterations, ..opts.clone() })?;
        certified &= search.exhaustive;
        let Some(subset) = search.subset else { break };
        iterations += 1;
        if iterations > cap {
            return Err(Error::IterationCap { cap, covered: net.len() });
        }
        let sub = family.subfamily(&subset);
        let mut m = net_parts(sub.len(), d, msr, params);
        let sel = loop {
            match selection(&sub, msr, eps, m, params, opts.seed.wrapping_add(iterations)) {
                Err(Error::CentralRegionTooSmall { .. } | Error::TverbergPrecondition(_)) if m > 1 => m -= 1,
                other => break other?,
            }
        };
        if sel.rho_achieved < rho_min {
            rho_min = sel.rho_achieved.clone();
            cap = cap_for(&rho_min);
        }
        net.push(sel.witness);
        achieved.push(sel.achieved);
    }
    Ok(NetResult { net, achieved, iterations, rho_min, cap, certified })
}

fn pow(x: &Scalar, e: u32) -> Scalar {
    (0..e).fold(Scalar::one(), |acc, _| acc * x)
}

/// Post-hoc check: whether every `ceil(eps' |T|)`-subset's hull contains a net element.
pub fn validate_net(family: &Family, net: &[ConvexBody], eps_p: &Scalar) -> Result<Option<bool>> {
    let opts = NetOptions { trials: 0, seed: 0 };
    let s = find_uncovered_subset(family, net, eps_p, &opts)?;
    Ok(s.exhaustive.then_some(s.subset.is_none()))
}

/// `C(n, k)` as a big integer.
pub fn binomial_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}
