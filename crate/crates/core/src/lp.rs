//! Exact rational linear programming: a dense two-phase simplex with Bland's
//! rule, plus an independent optimality-certificate check.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Minimize,
    Maximize,
}

/// `opt c.x` subject to `a_i.x (<=|>=|=) b_i` and `x >= 0`.
#[derive(Clone, Debug, Serialize)]
pub struct LpInstance {
    pub objective: Objective,
    #[serde(with = "scalar::serde_scalar_vec")]
    pub c: Vec<Scalar>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    #[serde(with = "scalar::serde_scalar_vec")]
    pub a: Vec<Scalar>,
    pub sense: Sense,
    #[serde(with = "scalar::serde_scalar")]
    pub b: Scalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct LpSolution {
    #[serde(with = "scalar::serde_scalar")]
    pub optimum: Scalar,
    #[serde(with = "scalar::serde_scalar_vec")]
    pub primal: Vec<Scalar>,
    /// One multiplier per row, for the dual of the problem as stated.
    #[serde(with = "scalar::serde_scalar_vec")]
    pub dual: Vec<Scalar>,
    /// Basic columns of the final tableau (structural, then slack columns).
    pub basis: Vec<usize>,
    pub pivots: usize,
}

impl LpInstance {
    pub fn new(objective: Objective, c: Vec<Scalar>) -> Self {
        LpInstance { objective, c, rows: Vec::new() }
    }

    pub fn add_row(&mut self, a: Vec<Scalar>, sense: Sense, b: Scalar) {
        self.rows.push(Row { a, sense, b });
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    fn check(&self) -> Result<()> {
        for (i, r) in self.rows.iter().enumerate() {
            if r.a.len() != self.c.len() {
                return Err(Error::Invalid(format!("row {i} has {} coefficients, expected {}", r.a.len(), self.c.len())));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Scalar]) -> Scalar {
        dot(&self.c, x)
    }
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Tableau {
    /// `m` rows of `B^-1 A | B^-1 b`.
    t: Vec<Vec<Scalar>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Scalar {
        &self.t[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for x in self.t[r].iter_mut() {
            *x /= &p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Minimizes `cost` over the columns allowed by `usable`; Bland's rule throughout.
    fn run(&mut self, cost: &[Scalar], usable: &dyn Fn(usize) -> bool) -> Result<()> {
        loop {
            let mut entering = None;
            for j in 0..self.cols {
                if !usable(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.t[i][j].is_zero() {
                        r -= &cost[b] * &self.t[i][j];
                    }
                }
                if r.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return Ok(());
            };
            let mut leave: Option<(Scalar, usize, usize)> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][j];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &leave {
                        None => true,
                        Some((best, _, bvar)) => ratio < *best || (ratio == *best && self.basis[i] < *bvar),
                    };
                    if better {
                        leave = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = leave else {
                return Err(Error::LpUnbounded);
            };
            self.pivot(r, j);
        }
    }
}

/// Solves `B^T y = c_B` for the final basis.
fn basis_duals(a: &[Vec<Scalar>], basis: &[usize], cost: &[Scalar]) -> Result<Vec<Scalar>> {
    let m = basis.len();
    // Augmented system: row k is column basis[k] of A, right side cost[basis[k]].
    let mut sys: Vec<Vec<Scalar>> = basis
        .iter()
        .map(|&j| {
            let mut row: Vec<Scalar> = (0..m).map(|i| a[i][j].clone()).collect();
            row.push(cost[j].clone());
            row
        })
        .collect();
    for col in 0..m {
        let p = (col..m)
            .find(|&r| !sys[r][col].is_zero())
            .ok_or_else(|| Error::Certificate("singular final basis".into()))?;
        sys.swap(col, p);
        let pv = sys[col][col].clone();
        for x in sys[col].iter_mut() {
            *x /= &pv;
        }
        let prow = sys[col].clone();
        for (r, row) in sys.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
    }
    Ok(sys.into_iter().map(|r| r[m].clone()).collect())
}

/// Exact optimum with primal and dual certificates.
pub fn solve(lp: &LpInstance) -> Result<LpSolution> {
    lp.check()?;
    let n = lp.num_vars();
    let sign = match lp.objective {
        Objective::Minimize => Scalar::one(),
        Objective::Maximize => -Scalar::one(),
    };
    // Normalize to b >= 0, remembering flips and original row indices.
    let mut rows: Vec<(Vec<Scalar>, Sense, Scalar, bool, usize)> = lp
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.b.is_negative() {
                let flipped = match r.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                };
                (r.a.iter().map(|x| -x).collect(), flipped, -&r.b, true, i)
            } else {
                (r.a.clone(), r.sense, r.b.clone(), false, i)
            }
        })
        .collect();
    let m = rows.len();
    // Columns: structural | one slack per inequality | one artificial per >= or = row.
    let mut slack_of = vec![None; m];
    let mut art_of = vec![None; m];
    let mut cols = n;
    for (i, r) in rows.iter().enumerate() {
        if r.1 != Sense::Eq {
            slack_of[i] = Some(cols);
            cols += 1;
        }
    }
    let first_art = cols;
    for (i, r) in rows.iter().enumerate() {
        if r.1 != Sense::Le {
            art_of[i] = Some(cols);
            cols += 1;
        }
    }
    let mut full_a: Vec<Vec<Scalar>> = Vec::with_capacity(m);
    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (a, sense, b, _, _)) in rows.iter_mut().enumerate() {
        let mut row = a.clone();
        row.resize(cols, Scalar::zero());
        if let Some(s) = slack_of[i] {
            row[s] = if *sense == Sense::Le { Scalar::one() } else { -Scalar::one() };
        }
        if let Some(a) = art_of[i] {
            row[a] = Scalar::one();
            basis.push(a);
        } else {
            basis.push(slack_of[i].unwrap());
        }
        full_a.push(row.clone());
        row.push(b.clone());
        t.push(row);
    }
    let mut tab = Tableau { t, basis, cols, pivots: 0 };

    if first_art < cols {
        let phase1: Vec<Scalar> = (0..cols)
            .map(|j| if j >= first_art { Scalar::one() } else { Scalar::zero() })
            .collect();
        tab.run(&phase1, &|_| true)?;
        let infeas: Scalar = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= first_art)
            .map(|(i, _)| tab.rhs(i).clone())
            .sum();
        if infeas.is_positive() {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.t.len() {
            if tab.basis[i] >= first_art {
                if let Some(j) = (0..first_art).find(|&j| !tab.t[i][j].is_zero()) {
                    tab.pivot(i, j);
                } else {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    full_a.remove(i);
                    rows.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }
    let mut cost: Vec<Scalar> = lp.c.iter().map(|c| c * &sign).collect();
    cost.resize(cols, Scalar::zero());
    tab.run(&cost, &|j| j < first_art)?;

    let mut x = vec![Scalar::zero(); cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        x[b] = tab.rhs(i).clone();
    }
    let y_kept = basis_duals(&full_a, &tab.basis, &cost)?;
    // Map duals back to the original rows; dropped redundant rows get 0.
    let mut dual = vec![Scalar::zero(); lp.rows.len()];
    for (y, r) in y_kept.iter().zip(&rows) {
        let y = y * &sign;
        dual[r.4] = if r.3 { -y } else { y };
    }
    let primal: Vec<Scalar> = x[..n].to_vec();
    let optimum = lp.objective_value(&primal);
    Ok(LpSolution { optimum, primal, dual, basis: tab.basis, pivots: tab.pivots })
}

/// Checks primal and dual feasibility, complementary slackness and equal
/// objectives, independently of how the solution was produced.
pub fn verify(lp: &LpInstance, sol: &LpSolution) -> Result<()> {
    lp.check()?;
    let fail = |msg: String| Err(Error::Certificate(msg));
    if sol.primal.len() != lp.num_vars() || sol.dual.len() != lp.rows.len() {
        return fail("certificate has the wrong shape".into());
    }
    if let Some(j) = sol.primal.iter().position(Signed::is_negative) {
        return fail(format!("x[{j}] is negative"));
    }
    let min = lp.objective == Objective::Minimize;
    for (i, r) in lp.rows.iter().enumerate() {
        let lhs = dot(&r.a, &sol.primal);
        let ok = match r.sense {
            Sense::Le => lhs <= r.b,
            Sense::Ge => lhs >= r.b,
            Sense::Eq => lhs == r.b,
        };
        if !ok {
            return fail(format!("row {i} violated"));
        }
        let y = &sol.dual[i];
        // Sign of the multiplier: for a minimization, >= rows carry y >= 0 and <= rows y <= 0.
        let sign_ok = match (r.sense, min) {
            (Sense::Eq, _) => true,
            (Sense::Ge, true) | (Sense::Le, false) => !y.is_negative(),
            (Sense::Le, true) | (Sense::Ge, false) => !y.is_positive(),
        };
        if !sign_ok {
            return fail(format!("dual multiplier {i} has the wrong sign"));
        }
        if !y.is_zero() && lhs != r.b {
            return fail(format!("complementary slackness fails on row {i}"));
        }
    }
    for j in 0..lp.num_vars() {
        let ay: Scalar = lp.rows.iter().zip(&sol.dual).map(|(r, y)| &r.a[j] * y).sum();
        let reduced = &lp.c[j] - ay;
        let ok = if min { !reduced.is_negative() } else { !reduced.is_positive() };
        if !ok {
            return fail(format!("dual constraint {j} violated"));
        }
        if !sol.primal[j].is_zero() && !reduced.is_zero() {
            return fail(format!("complementary slackness fails on variable {j}"));
        }
    }
    let primal_obj = lp.objective_value(&sol.primal);
    let dual_obj: Scalar = lp.rows.iter().zip(&sol.dual).map(|(r, y)| &r.b * y).sum();
    if primal_obj != dual_obj || primal_obj != sol.optimum {
        return fail(format!(
            "objectives differ: primal {}, dual {}",
            scalar::format(&primal_obj),
            scalar::format(&dual_obj)
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::scalar::{int, ratio};

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6).
        let mut lp = LpInstance::new(Objective::Maximize, ints(&[3, 5]));
        lp.add_row(ints(&[1, 0]), Sense::Le, int(4));
        lp.add_row(ints(&[0, 2]), Sense::Le, int(12));
        lp.add_row(ints(&[3, 2]), Sense::Le, int(18));
        let s = solve(&lp).unwrap();
        assert_eq!(s.optimum, int(36));
        assert_eq!(s.primal, ints(&[2, 6]));
        verify(&lp, &s).unwrap();
        assert_eq!(s.dual, vec![int(0), ratio(3, 2), int(1)]);
    }

    #[test]
    fn covering_with_ge_rows() {
        // min x + y, x + 2y >= 2, 3x + y >= 3 -> 7/5 at (4/5, 3/5).
        let mut lp = LpInstance::new(Objective::Minimize, ints(&[1, 1]));
        lp.add_row(ints(&[1, 2]), Sense::Ge, int(2));
        lp.add_row(ints(&[3, 1]), Sense::Ge, int(3));
        let s = solve(&lp).unwrap();
        assert_eq!(s.optimum, ratio(7, 5));
        verify(&lp, &s).unwrap();
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpInstance::new(Objective::Minimize, ints(&[1]));
        lp.add_row(ints(&[1]), Sense::Ge, int(2));
        lp.add_row(ints(&[1]), Sense::Le, int(1));
        assert!(matches!(solve(&lp), Err(Error::Infeasible)));
        let mut lp = LpInstance::new(Objective::Maximize, ints(&[1, 1]));
        lp.add_row(ints(&[1, -1]), Sense::Le, int(1));
        assert!(matches!(solve(&lp), Err(Error::LpUnbounded)));
    }

    #[test]
    fn equality_and_redundant_rows() {
        let mut lp = LpInstance::new(Objective::Minimize, ints(&[2, 3]));
        lp.add_row(ints(&[1, 1]), Sense::Eq, int(4));
        lp.add_row(ints(&[2, 2]), Sense::Eq, int(8));
        lp.add_row(ints(&[-1, 0]), Sense::Le, int(-1));
        let s = solve(&lp).unwrap();
        assert_eq!(s.optimum, int(8));
        verify(&lp, &s).unwrap();
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule; Bland's rule terminates.
        let mut lp = LpInstance::new(
            Objective::Minimize,
            vec![ratio(-3, 4), int(150), ratio(-1, 50), int(6)],
        );
        lp.add_row(vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)], Sense::Le, int(0));
        lp.add_row(vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)], Sense::Le, int(0));
        lp.add_row(ints(&[0, 0, 1, 0]), Sense::Le, int(1));
        let s = solve(&lp).unwrap();
        assert_eq!(s.optimum, ratio(-1, 20));
        verify(&lp, &s).unwrap();
    }

    #[test]
    fn verify_rejects_bad_certificates() {
        let mut lp = LpInstance::new(Objective::Maximize, ints(&[3, 5]));
        lp.add_row(ints(&[1, 0]), Sense::Le, int(4));
        lp.add_row(ints(&[0, 2]), Sense::Le, int(12));
        lp.add_row(ints(&[3, 2]), Sense::Le, int(18));
        let good = solve(&lp).unwrap();
        let mut bad = good.clone();
        bad.primal = ints(&[0, 6]);
        bad.optimum = int(30);
        assert!(verify(&lp, &bad).is_err());
        let mut bad = good;
        bad.dual[0] = int(1);
        assert!(verify(&lp, &bad).is_err());
    }

    /// Oracle: enumerate all basic solutions of a tiny `<=` system.
    fn brute_max(a: &[Vec<i64>], b: &[i64], c: &[i64]) -> Scalar {
        let n = c.len();
        let m = a.len();
        // Constraints: rows plus x_j >= 0 written as -x_j <= 0.
        let mut all: Vec<(Vec<Scalar>, Scalar)> = a.iter().zip(b).map(|(r, &bi)| (ints(r), int(bi))).collect();
        for j in 0..n {
            let mut r = vec![int(0); n];
            r[j] = int(-1);
            all.push((r, int(0)));
        }
        let mut best: Option<Scalar> = None;
        let total = m + n;
        let mut pick = vec![0usize; n];
        fn combos(k: usize, start: usize, total: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..total {
                cur.push(i);
                combos(k, i + 1, total, cur, out);
                cur.pop();
            }
        }
        let mut sets = Vec::new();
        combos(n, 0, total, &mut Vec::new(), &mut sets);
        for set in sets {
            pick.copy_from_slice(&set);
            let mut sys: Vec<Vec<Scalar>> = pick
                .iter()
                .map(|&i| {
                    let mut r = all[i].0.clone();
                    r.push(all[i].1.clone());
                    r
                })
                .collect();
            let mut ok = true;
            for col in 0..n {
                let Some(p) = (col..n).find(|&r| !sys[r][col].is_zero()) else {
                    ok = false;
                    break;
                };
                sys.swap(col, p);
                let pv = sys[col][col].clone();
                for x in sys[col].iter_mut() {
                    *x /= &pv;
                }
                let prow = sys[col].clone();
                for (r, row) in sys.iter_mut().enumerate() {
                    if r != col {
                        let f = row[col].clone();
                        for (x, y) in row.iter_mut().zip(&prow) {
                            *x -= &f * y;
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            let x: Vec<Scalar> = sys.iter().map(|r| r[n].clone()).collect();
            if all.iter().all(|(r, bi)| dot(r, &x) <= *bi) {
                let v = dot(&ints(c), &x);
                if best.as_ref().map_or(true, |b| v > *b) {
                    best = Some(v);
                }
            }
        }
        best.expect("origin is feasible")
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_vertex_enumeration(
            a in prop::collection::vec(prop::collection::vec(0i64..5, 3), 2..5),
            b in prop::collection::vec(1i64..10, 4),
            c in prop::collection::vec(-2i64..6, 3),
        ) {
            // Bounded because of the box row.
            let mut a = a;
            a.push(vec![1, 1, 1]);
            let b: Vec<i64> = b.into_iter().take(a.len() - 1).chain([12]).collect();
            let a: Vec<Vec<i64>> = a.into_iter().take(b.len()).collect();
            let mut lp = LpInstance::new(Objective::Maximize, ints(&c));
            for (r, &bi) in a.iter().zip(&b) {
                lp.add_row(ints(r), Sense::Le, int(bi));
            }
            let s = solve(&lp).unwrap();
            verify(&lp, &s).unwrap();
            prop_assert_eq!(s.optimum, brute_max(&a, &b, &c));
        }

        #[test]
        fn covering_duality(
            m in prop::collection::vec(prop::collection::vec(prop::bool::ANY, 5), 1..6),
        ) {
            // Covering LP over a random 0/1 incidence matrix with every row covered.
            let rows: Vec<Vec<bool>> = m.into_iter().filter(|r| r.iter().any(|&x| x)).collect();
            prop_assume!(!rows.is_empty());
            let n = 5;
            let mut primal = LpInstance::new(Objective::Minimize, vec![int(1); n]);
            for r in &rows {
                primal.add_row(r.iter().map(|&x| int(i64::from(x))).collect(), Sense::Ge, int(1));
            }
            for j in 0..n {
                let mut e = vec![int(0); n];
                e[j] = int(1);
                primal.add_row(e, Sense::Le, int(1));
            }
            let s = solve(&primal).unwrap();
            verify(&primal, &s).unwrap();
            let mut dual = LpInstance::new(Objective::Maximize, vec![int(1); rows.len()]);
            for j in 0..n {
                dual.add_row(rows.iter().map(|r| int(i64::from(r[j]))).collect(), Sense::Le, int(1));
            }
            let t = solve(&dual).unwrap();
            verify(&dual, &t).unwrap();
            prop_assert_eq!(s.optimum, t.optimum);
        }
    }
}
