//! Helly checks, fractional Helly witnesses and colorful Helly.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::pool::bounded_family;
use crate::combinatorial::tverberg::{binomial, for_each_subset};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::floating::{floating_body_at, minimal_v_halfspace, DirectionSet};
use crate::geometry::{clip, convex_hull, intersect, ConvexBody, Direction, Halfspace};
use crate::measures::{lattice_points, Measure, MeasureValue};
use crate::scalar::{self, Scalar};

pub const TUPLE_BUDGET: u128 = 1_000_000;
pub const TUPLE_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct HellyReport {
    pub hypothesis: bool,
    pub violator: Option<Vec<usize>>,
    /// `None` when the hypothesis fails and the conclusion is not needed.
    pub conclusion: Option<bool>,
    pub value: MeasureValue,
    /// Hypothesis false, or conclusion true.
    pub holds: bool,
    pub exhaustive: bool,
    pub checked: u64,
}

/// Checks "every `h` members reach `lambda`" and then "all members reach `(1 - eps) lambda`".
pub fn helly_check(family: &Family, h: usize, msr: &Measure, lambda: &Scalar, eps: &Scalar, seed: u64) -> Result<HellyReport> {
    let n = family.len();
    if h == 0 || n == 0 {
        return Err(Error::Invalid("need h >= 1 and a nonempty family".into()));
    }
    let h = h.min(n);
    let total = binomial(n, h);
    let mut checked = 0u64;
    let mut violator = None;
    let exhaustive = total <= TUPLE_BUDGET;
    if exhaustive {
        let mut err = None;
        for_each_subset(n, h, &mut |s| {
            checked += 1;
            match family.intersection(s).and_then(|b| msr.at_least(&b, lambda)) {
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
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..TUPLE_SAMPLES {
            let mut s = sample(&mut rng, n, h).into_vec();
            s.sort_unstable();
            checked += 1;
            if !msr.at_least(&family.intersection(&s)?, lambda)? {
                violator = Some(s);
                break;
            }
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let whole = family.intersection(&all)?;
    let value = msr.evaluate(&whole)?;
    let hypothesis = violator.is_none();
    let conclusion = if hypothesis {
        Some(msr.at_least(&whole, &((Scalar::one() - eps) * lambda))?)
    } else {
        None
    };
    Ok(HellyReport {
        hypothesis,
        violator,
        conclusion,
        value,
        holds: conclusion.unwrap_or(true),
        exhaustive,
        checked,
    })
}

/// `K_B`: the body cut by the minimal `v`-halfspace keeping `lambda`.
fn cut(body: &ConvexBody, v: &Direction, msr: &Measure, lambda: &Scalar) -> Result<(Halfspace, ConvexBody)> {
    let h = minimal_v_halfspace(body, v, msr, lambda)?;
    let k = clip(body, &h)?;
    Ok((h, k))
}

/// `K_B(f, eps)`: the floating body of a cut, or at `eps = 0` the cut itself
/// (its lattice points for counts).
fn shrink(k: &ConvexBody, msr: &Measure, eps: &Scalar, dirs: &DirectionSet) -> Result<ConvexBody> {
    match msr {
        Measure::Nonempty => Ok(k.clone()),
        Measure::LatticeCount(_) if eps.is_zero() => convex_hull(&lattice_points(k, msr)?),
        _ if eps.is_zero() => Ok(k.clone()),
        _ => Ok(floating_body_at(k, msr, eps, dirs)?.body),
    }
}

/// Larger offset wins; equal offsets go to the lexicographically smaller key.
fn better<K: Ord>(a: (&Scalar, &K), b: (&Scalar, &K)) -> bool {
    match a.0.cmp(b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1 < b.1,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FractionalWitness {
    pub witness: ConvexBody,
    /// Exactly the members containing the witness.
    pub members: Vec<usize>,
    /// The most-assigned `(h-1)`-tuple.
    pub tuple: Vec<usize>,
    pub cut: Halfspace,
    pub assigned: usize,
    pub qualifying: usize,
    /// Pigeonhole floor on `assigned`: qualifying tuples over `(h-1)`-tuples.
    pub pigeonhole: u64,
}

/// Finds a shrunken cut lying in many members, following the fractional Helly counting argument.
pub fn fractional_helly_witness(
    family: &Family,
    msr: &Measure,
    lambda: &Scalar,
    eps: &Scalar,
    h: usize,
    v: &Direction,
    dirs: &DirectionSet,
) -> Result<FractionalWitness> {
    let n = family.len();
    if h < 2 || h > n {
        return Err(Error::Invalid(format!("need 2 <= h <= {n}, got {h}")));
    }
    let (boxed, _) = bounded_family(family)?;

    // Qualifying h-tuples, growing only intersections that still qualify.
    let mut qualifying: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<(Vec<usize>, ConvexBody)> = Vec::new();
    for j in (0..n).rev() {
        stack.push((vec![j], boxed.get(j).clone()));
    }
    while let Some((idx, body)) = stack.pop() {
        if !msr.at_least(&body, lambda)? {
            continue;
        }
        if idx.len() == h {
            qualifying.push(idx);
            continue;
        }
        for j in (idx.last().unwrap() + 1..n).rev() {
            let mut ext = idx.clone();
            ext.push(j);
            stack.push((ext, intersect(&[body.clone(), boxed.get(j).clone()])?));
        }
    }
    if qualifying.is_empty() {
        return Err(Error::NoQualifyingTuple);
    }
    qualifying.sort();

    let mut subs: Vec<Vec<usize>> = qualifying
        .iter()
        .flat_map(|t| (0..h).map(move |skip| t.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect()))
        .collect();
    subs.sort();
    subs.dedup();
    let cuts: HashMap<Vec<usize>, Halfspace> = subs
        .par_iter()
        .map(|b| -> Result<(Vec<usize>, Halfspace)> {
            let body = boxed.intersection(b)?;
            Ok((b.clone(), cut(&body, v, msr, lambda)?.0))
        })
        .collect::<Result<_>>()?;

    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for t in &qualifying {
        let mut best: Option<Vec<usize>> = None;
        for skip in 0..h {
            let b: Vec<usize> = t.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
            let replace = match &best {
                None => true,
                Some(cur) => better((&cuts[&b].offset, &b), (&cuts[cur].offset, cur)),
            };
            if replace {
                best = Some(b);
            }
        }
        *counts.entry(best.unwrap()).or_default() += 1;
    }
    let (tuple, assigned) = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .unwrap();

    let body = boxed.intersection(&tuple)?;
    let (halfspace, k) = cut(&body, v, msr, lambda)?;
    let witness = shrink(&k, msr, eps, dirs)?;
    let members = (0..n).filter(|&j| family.get(j).contains_body(&witness)).collect();
    let denom = binomial(n, h - 1).max(1);
    let pigeonhole = (qualifying.len() as u128).div_ceil(denom) as u64;
    Ok(FractionalWitness {
        witness,
        members,
        tuple,
        cut: halfspace,
        assigned,
        qualifying: qualifying.len(),
        pigeonhole,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ColorfulHelly {
    pub class: usize,
    pub witness: ConvexBody,
    /// The containment-maximal colorful `(h-1)`-tuple as `(class, member)` pairs.
    pub tuple: Vec<(usize, usize)>,
    pub cut: Halfspace,
    /// False when there were too many colorful choices to check the hypothesis.
    pub hypothesis_checked: bool,
}

/// Calls `f` on every choice of one index per class size, in lexicographic order.
fn for_each_choice(sizes: &[usize], f: &mut dyn FnMut(&[usize]) -> Result<bool>) -> Result<()> {
    if sizes.iter().any(|&s| s == 0) {
        return Ok(());
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        if !f(&idx)? {
            return Ok(());
        }
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < sizes[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Given `h` classes whose colorful `h`-choices all reach `lambda`, finds a class
/// whose whole intersection contains a shrunken cut.
pub fn colorful_helly(
    classes: &[Family],
    msr: &Measure,
    lambda: &Scalar,
    eps: &Scalar,
    v: &Direction,
    dirs: &DirectionSet,
) -> Result<ColorfulHelly> {
    let h = classes.len();
    if h < 2 {
        return Err(Error::Invalid("colorful Helly needs at least two classes".into()));
    }
    let sizes: Vec<usize> = classes.iter().map(Family::len).collect();
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::EmptyInput("empty color class"));
    }
    // Clip everything to one common box.
    let flat = Family::new(classes.iter().flat_map(|c| c.members.iter().cloned()).collect())?;
    let (boxed, _) = bounded_family(&flat)?;
    let mut offsets = vec![0usize];
    for s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let member = |c: usize, i: usize| boxed.get(offsets[c] + i);

    let product: u128 = sizes.iter().map(|&s| s as u128).product();
    let hypothesis_checked = product <= TUPLE_BUDGET;
    if hypothesis_checked {
        let mut bad = None;
        for_each_choice(&sizes, &mut |pick| {
            let bodies: Vec<ConvexBody> = pick.iter().enumerate().map(|(c, &i)| member(c, i).clone()).collect();
            if msr.at_least(&intersect(&bodies)?, lambda)? {
                Ok(true)
            } else {
                bad = Some(pick.to_vec());
                Ok(false)
            }
        })?;
        if let Some(b) = bad {
            return Err(Error::Hypothesis(b));
        }
    }

    let mut best: Option<(Scalar, Vec<(usize, usize)>, Halfspace, ConvexBody)> = None;
    for omit in 0..h {
        let others: Vec<usize> = (0..h).filter(|&c| c != omit).collect();
        let sub_sizes: Vec<usize> = others.iter().map(|&c| sizes[c]).collect();
        let mut tuples = Vec::new();
        for_each_choice(&sub_sizes, &mut |pick| {
            tuples.push(others.iter().zip(pick).map(|(&c, &i)| (c, i)).collect::<Vec<_>>());
            Ok(true)
        })?;
        let cuts: Vec<(Vec<(usize, usize)>, Halfspace, ConvexBody)> = tuples
            .into_par_iter()
            .map(|t| {
                let bodies: Vec<ConvexBody> = t.iter().map(|&(c, i)| member(c, i).clone()).collect();
                let (hs, k) = cut(&intersect(&bodies)?, v, msr, lambda)?;
                Ok((t, hs, k))
            })
            .collect::<Result<_>>()?;
        for (t, hs, k) in cuts {
            let replace = match &best {
                None => true,
                Some((alpha, cur, _, _)) => better((&hs.offset, &t), (alpha, cur)),
            };
            if replace {
                best = Some((hs.offset.clone(), t, hs, k));
            }
        }
    }
    let (_, tuple, halfspace, k) = best.expect("at least one colorful tuple");
    let used: Vec<usize> = tuple.iter().map(|&(c, _)| c).collect();
    let class = (0..h).find(|c| !used.contains(c)).unwrap();
    let witness = shrink(&k, msr, eps, dirs)?;
    for (i, f) in classes[class].members.iter().enumerate() {
        if !f.contains_body(&witness) {
            return Err(Error::Certificate(format!("witness escapes member {i} of class {class}")));
        }
    }
    Ok(ColorfulHelly { class, witness, tuple, cut: halfspace, hypothesis_checked })
}

/// Direction used when none is given: `(1, 1/q)` scaled, generic for the lattice case.
pub fn default_direction(dim: usize) -> Direction {
    let mut v = vec![Scalar::zero(); dim];
    v[0] = scalar::int(1);
    if dim > 1 {
        v[1] = scalar::ratio(1, 7919);
    }
    if dim > 2 {
        v[2] = scalar::ratio(1, 7919 * 7919);
    }
    Direction::new(v).expect("nonzero")
}
