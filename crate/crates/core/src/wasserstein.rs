//! `(p, q)`-Wasserstein distances between persistence diagrams.
//!
//! `q` is the ground norm on the birth-death plane and may be
//! `f64::INFINITY`. Points with infinite death are matched among
//! themselves by sorted birth; the remaining points go through an optimal
//! assignment on the diagonal-augmented cost matrix.

use std::collections::{BTreeMap, BTreeSet};

use crate::assignment::hungarian;
use crate::error::{Error, Result};
use crate::persistence::{PersistenceDiagram, PersistencePoint};

/// Points with larger persistence would overflow `cost^p`.
pub const MAX_PERSISTENCE: f64 = 1e150;

/// Largest combined point count [`brute_force_w`] accepts.
pub const BRUTE_FORCE_CAP: usize = 8;

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidGroundNorm(q));
    }
    Ok(())
}

/// Distance from a point to the diagonal in the `q`-norm.
pub fn diagonal_cost(pt: &PersistencePoint, q: f64) -> f64 {
    if pt.is_essential() {
        return f64::INFINITY;
    }
    let pers = pt.death - pt.birth;
    if q.is_infinite() {
        pers / 2.0
    } else {
        2f64.powf((1.0 - q) / q) * pers
    }
}

/// `q`-norm distance between two points. Essential points are only at
/// finite distance from each other, measured by birth.
pub fn point_cost(x: &PersistencePoint, y: &PersistencePoint, q: f64) -> f64 {
    match (x.is_essential(), y.is_essential()) {
        (true, true) => (x.birth - y.birth).abs(),
        (false, false) => {
            let db = (x.birth - y.birth).abs();
            let dd = (x.death - y.death).abs();
            if q.is_infinite() {
                db.max(dd)
            } else if q == 1.0 {
                db + dd
            } else {
                (db.powf(q) + dd.powf(q)).powf(1.0 / q)
            }
        }
        _ => f64::INFINITY,
    }
}

/// Square cost matrix over `d1 ∪ Δ` × `d2 ∪ Δ` with entries `cost^p`.
///
/// Rows are the `m` points of `d1` followed by `n` diagonal copies;
/// columns are the `n` points of `d2` followed by `m` diagonal copies.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchingCostMatrix {
    m: usize,
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl MatchingCostMatrix {
    /// Both inputs must contain only finite-death points.
    pub fn new(d1: &[PersistencePoint], d2: &[PersistencePoint], p: f64, q: f64) -> Self {
        let (m, n) = (d1.len(), d2.len());
        let size = m + n;
        let mut entries = vec![vec![0.0; size]; size];
        for (i, x) in d1.iter().enumerate() {
            for (j, y) in d2.iter().enumerate() {
                entries[i][j] = point_cost(x, y, q).powf(p);
            }
            let diag = diagonal_cost(x, q).powf(p);
            for e in &mut entries[i][n..] {
                *e = diag;
            }
        }
        for (j, y) in d2.iter().enumerate() {
            let diag = diagonal_cost(y, q).powf(p);
            for row in &mut entries[m..] {
                row[j] = diag;
            }
        }
        MatchingCostMatrix { m, n, entries }
    }

    pub fn size(&self) -> usize {
        self.m + self.n
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    /// Optimal assignment and its total cost.
    pub fn solve(&self) -> (Vec<usize>, f64) {
        hungarian(&self.entries)
    }
}

fn split_and_check(d: &[PersistencePoint]) -> Result<(Vec<f64>, Vec<PersistencePoint>)> {
    let mut essential = Vec::new();
    let mut finite = Vec::new();
    for p in d {
        if p.is_essential() {
            essential.push(p.birth);
        } else {
            if p.persistence() > MAX_PERSISTENCE {
                return Err(Error::PersistenceOverflow(p.persistence()));
            }
            finite.push(*p);
        }
    }
    essential.sort_by(f64::total_cmp);
    Ok((essential, finite))
}

/// `(p, q)`-Wasserstein distance between two single-dimension diagrams.
pub fn w_pq(d1: &[PersistencePoint], d2: &[PersistencePoint], p: f64, q: f64) -> Result<f64> {
    Ok(w_pq_power(d1, d2, p, q)?.powf(1.0 / p))
}

/// The distance raised to the `p`.
fn w_pq_power(d1: &[PersistencePoint], d2: &[PersistencePoint], p: f64, q: f64) -> Result<f64> {
    check_exponents(p, q)?;
    let (e1, f1) = split_and_check(d1)?;
    let (e2, f2) = split_and_check(d2)?;
    if e1.len() != e2.len() {
        return Ok(f64::INFINITY);
    }
    let essential: f64 = e1.iter().zip(&e2).map(|(a, b)| (a - b).abs().powf(p)).sum();
    let (_, finite) = MatchingCostMatrix::new(&f1, &f2, p, q).solve();
    Ok(essential + finite)
}

/// Per-dimension distances over the union of dimensions present.
pub fn w_pq_by_dim(
    dgm1: &PersistenceDiagram,
    dgm2: &PersistenceDiagram,
    p: f64,
    q: f64,
) -> Result<BTreeMap<usize, f64>> {
    check_exponents(p, q)?;
    let dims: BTreeSet<usize> = dgm1
        .points()
        .iter()
        .chain(dgm2.points())
        .map(|pt| pt.dim)
        .collect();
    dims.into_iter()
        .map(|k| Ok((k, w_pq(&dgm1.in_dim(k), &dgm2.in_dim(k), p, q)?)))
        .collect()
}

/// `(sum_k W_k^p)^(1/p)` over all homological dimensions.
pub fn total_w_pq(
    dgm1: &PersistenceDiagram,
    dgm2: &PersistenceDiagram,
    p: f64,
    q: f64,
) -> Result<f64> {
    check_exponents(p, q)?;
    let dims: BTreeSet<usize> = dgm1
        .points()
        .iter()
        .chain(dgm2.points())
        .map(|pt| pt.dim)
        .collect();
    let mut sum = 0.0;
    for k in dims {
        sum += w_pq_power(&dgm1.in_dim(k), &dgm2.in_dim(k), p, q)?;
    }
    Ok(sum.powf(1.0 / p))
}

/// Exhaustive minimum over all matchings. Costs are evaluated from the
/// geometric definitions rather than the closed forms used by [`w_pq`].
pub fn brute_force_w(
    d1: &[PersistencePoint],
    d2: &[PersistencePoint],
    p: f64,
    q: f64,
) -> Result<f64> {
    check_exponents(p, q)?;
    let total = d1.len() + d2.len();
    if total > BRUTE_FORCE_CAP {
        return Err(Error::BruteForceCap {
            cap: BRUTE_FORCE_CAP,
            found: total,
        });
    }
    let mut used = vec![false; d2.len()];
    let best = enumerate(d1, d2, 0, &mut used, p, q);
    Ok(best.powf(1.0 / p))
}

fn enumerate(
    d1: &[PersistencePoint],
    d2: &[PersistencePoint],
    i: usize,
    used: &mut [bool],
    p: f64,
    q: f64,
) -> f64 {
    if i == d1.len() {
        return d2
            .iter()
            .zip(used.iter())
            .filter(|(_, u)| !**u)
            .map(|(y, _)| definitional_to_diagonal(y, q).powf(p))
            .sum();
    }
    let x = &d1[i];
    let mut best = definitional_to_diagonal(x, q).powf(p) + enumerate(d1, d2, i + 1, used, p, q);
    for j in 0..d2.len() {
        if used[j] {
            continue;
        }
        used[j] = true;
        let c = definitional_point(x, &d2[j], q).powf(p) + enumerate(d1, d2, i + 1, used, p, q);
        used[j] = false;
        best = best.min(c);
    }
    best
}

fn qnorm(v: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Distance to the nearest diagonal point `(t, t)`; for every `q >= 1` the
/// minimiser is the midpoint `t = (b + d) / 2`.
fn definitional_to_diagonal(x: &PersistencePoint, q: f64) -> f64 {
    if x.is_essential() {
        return f64::INFINITY;
    }
    let t = 0.5 * (x.birth + x.death);
    qnorm(&[x.birth - t, x.death - t], q)
}

fn definitional_point(x: &PersistencePoint, y: &PersistencePoint, q: f64) -> f64 {
    match (x.is_essential(), y.is_essential()) {
        (true, true) => (x.birth - y.birth).abs(),
        (false, false) => qnorm(&[x.birth - y.birth, x.death - y.death], q),
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn pt(b: f64, d: f64) -> PersistencePoint {
        PersistencePoint::new(b, d, 0).unwrap()
    }

    #[test]
    fn diagonal_costs() {
        assert_eq!(diagonal_cost(&pt(0.0, 2.0), 1.0), 2.0);
        assert_eq!(diagonal_cost(&pt(0.0, 2.0), INF), 1.0);
        assert!((diagonal_cost(&pt(0.0, 2.0), 2.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(diagonal_cost(&pt(0.0, INF), 1.0), INF);
        for q in [1.0, 1.5, 2.0, 3.0, INF] {
            let x = pt(0.3, 1.9);
            assert!((diagonal_cost(&x, q) - definitional_to_diagonal(&x, q)).abs() < 1e-12);
        }
    }

    #[test]
    fn point_costs() {
        assert_eq!(point_cost(&pt(0.0, 1.0), &pt(0.0, 1.0), 2.0), 0.0);
        for q in [1.0, 2.0, INF] {
            assert_eq!(point_cost(&pt(0.0, INF), &pt(3.0, INF), q), 3.0);
        }
        assert_eq!(point_cost(&pt(0.0, 1.0), &pt(2.0, 4.0), 1.0), 5.0);
        assert_eq!(point_cost(&pt(0.0, 1.0), &pt(2.0, 4.0), INF), 3.0);
        assert_eq!(point_cost(&pt(0.0, 1.0), &pt(2.0, INF), 1.0), INF);
    }

    #[test]
    fn distances() {
        let a = [pt(0.0, 2.0), pt(1.0, INF)];
        assert_eq!(w_pq(&a, &a, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(w_pq(&[pt(0.0, 2.0)], &[], 1.0, INF).unwrap(), 1.0);
        assert_eq!(
            w_pq(&[pt(0.0, 3.0)], &[pt(1.0, 3.0)], 1.0, 1.0).unwrap(),
            1.0
        );
        assert!(
            (w_pq(&[pt(0.0, 2.0)], &[pt(0.0, 2.0), pt(5.0, 5.1)], 1.0, INF).unwrap() - 0.05).abs()
                < 1e-12
        );
        assert_eq!(w_pq(&[pt(0.0, INF)], &[], 1.0, 1.0).unwrap(), INF);
        assert_eq!(w_pq(&[], &[], 2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn essential_points_match_by_sorted_birth() {
        let a = [pt(0.0, INF), pt(5.0, INF)];
        let b = [pt(6.0, INF), pt(1.0, INF)];
        assert_eq!(w_pq(&a, &b, 1.0, 1.0).unwrap(), 2.0);
        assert!((w_pq(&a, &b, 2.0, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exponent_validation() {
        assert!(matches!(
            w_pq(&[], &[], 0.5, 1.0),
            Err(Error::InvalidExponent(_))
        ));
        assert!(matches!(
            w_pq(&[], &[], 1.0, 0.5),
            Err(Error::InvalidGroundNorm(_))
        ));
        let empty = PersistenceDiagram::default();
        assert!(total_w_pq(&empty, &empty, 0.0, 1.0).is_err());
        assert!(brute_force_w(&[], &[], 0.9, 1.0).is_err());
    }

    #[test]
    fn overflow_guard() {
        let huge = [pt(0.0, 1e151)];
        assert!(matches!(
            w_pq(&huge, &[], 1.0, 1.0),
            Err(Error::PersistenceOverflow(_))
        ));
    }

    #[test]
    fn totals() {
        let pt_d = |b, d, k| PersistencePoint::new(b, d, k).unwrap();
        let a = PersistenceDiagram::from_points(vec![pt_d(0.0, INF, 0), pt_d(0.0, 6.0, 1)]);
        let b = PersistenceDiagram::from_points(vec![pt_d(3.0, INF, 0), pt_d(0.0, 2.0, 1)]);
        // dim 0: 3, dim 1: 4 under q = 1
        assert_eq!(total_w_pq(&a, &b, 1.0, 1.0).unwrap(), 7.0);
        assert_eq!(total_w_pq(&a, &b, 2.0, 1.0).unwrap(), 5.0);
        assert_eq!(total_w_pq(&a, &a, 1.0, 1.0).unwrap(), 0.0);
        let c = PersistenceDiagram::from_points(vec![pt_d(3.0, INF, 0), pt_d(0.0, 6.0, 1)]);
        assert_eq!(
            total_w_pq(&a, &c, 1.0, 1.0).unwrap(),
            w_pq(&a.in_dim(0), &c.in_dim(0), 1.0, 1.0).unwrap()
        );
        let d = PersistenceDiagram::from_points(vec![pt_d(0.0, INF, 0), pt_d(1.0, INF, 0)]);
        assert_eq!(total_w_pq(&a, &d, 1.0, 1.0).unwrap(), INF);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_w(&[], &[], 1.0, 1.0).unwrap(), 0.0);
        let v = brute_force_w(&[pt(0.0, 2.0)], &[pt(0.0, 2.0), pt(5.0, 5.1)], 1.0, INF).unwrap();
        assert!((v - 0.05).abs() < 1e-12);
        let nine: Vec<_> = (0..9).map(|i| pt(0.0, i as f64 + 1.0)).collect();
        assert!(matches!(
            brute_force_w(&nine, &[], 1.0, 1.0),
            Err(Error::BruteForceCap { .. })
        ));
    }

    #[test]
    fn cost_matrix_layout() {
        let m = MatchingCostMatrix::new(&[pt(0.0, 2.0)], &[pt(1.0, 2.0), pt(0.0, 4.0)], 1.0, 1.0);
        assert_eq!(m.size(), 3);
        let e = m.entries();
        assert_eq!(e[0], vec![1.0, 2.0, 2.0]);
        assert_eq!(e[1], vec![1.0, 4.0, 0.0]);
        assert_eq!(e[2], vec![1.0, 4.0, 0.0]);
        let (assign, cost) = m.solve();
        // (0,2) pairs with (0,4); (1,2) goes to the diagonal
        assert_eq!(cost, 3.0);
        assert_eq!(assign[0], 1);
        let mut sorted = assign.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }
}
