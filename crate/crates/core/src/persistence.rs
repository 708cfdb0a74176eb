//! Sublevel-set persistence over the two-element field.
//!
//! Simplices enter in the order (value, dimension, lexicographic vertex ids).
//! The boundary matrix is reduced with the standard left-to-right column
//! algorithm. Pairs with equal birth and death are dropped from the output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::AbstractComplex;
use crate::error::{Error, Result};
use crate::filtration::SimplexFiltration;

/// One point of a persistence diagram. `death` may be `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePoint {
    pub birth: f64,
    pub death: f64,
    pub dim: usize,
}

impl PersistencePoint {
    pub fn new(birth: f64, death: f64, dim: usize) -> Result<Self> {
        if !birth.is_finite() || death.is_nan() || death < birth {
            return Err(Error::parse(
                "persistence point",
                format!("invalid pair ({birth}, {death})"),
            ));
        }
        Ok(PersistencePoint { birth, death, dim })
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// A multiset of persistence points, grouped by homological dimension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PersistenceDiagram {
    points: Vec<PersistencePoint>,
}

impl PersistenceDiagram {
    /// Zero-persistence points are discarded.
    pub fn from_points(mut points: Vec<PersistencePoint>) -> Self {
        points.retain(|p| p.birth != p.death);
        points.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        PersistenceDiagram { points }
    }

    pub fn points(&self) -> &[PersistencePoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points in dimension `k`.
    pub fn in_dim(&self, k: usize) -> Vec<PersistencePoint> {
        self.points.iter().filter(|p| p.dim == k).copied().collect()
    }

    /// Largest dimension holding a point.
    pub fn max_dim(&self) -> Option<usize> {
        self.points.iter().map(|p| p.dim).max()
    }

    pub fn essential_count(&self, k: usize) -> usize {
        self.points
            .iter()
            .filter(|p| p.dim == k && p.is_essential())
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DiagramJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DiagramJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Death {
    Finite(f64),
    Infinite(String),
}

/// `{"dims": {"0": [[b, d | "inf"], ...], ...}}`
#[derive(Serialize, Deserialize)]
struct DiagramJson {
    dims: BTreeMap<String, Vec<(f64, Death)>>,
}

impl From<&PersistenceDiagram> for DiagramJson {
    fn from(d: &PersistenceDiagram) -> Self {
        let mut dims: BTreeMap<String, Vec<(f64, Death)>> = BTreeMap::new();
        for p in &d.points {
            let death = if p.is_essential() {
                Death::Infinite("inf".into())
            } else {
                Death::Finite(p.death)
            };
            dims.entry(p.dim.to_string())
                .or_default()
                .push((p.birth, death));
        }
        DiagramJson { dims }
    }
}

impl TryFrom<DiagramJson> for PersistenceDiagram {
    type Error = Error;

    fn try_from(raw: DiagramJson) -> Result<Self> {
        let mut points = Vec::new();
        for (k, pairs) in raw.dims {
            let dim: usize = k
                .parse()
                .map_err(|_| Error::parse("dims", format!("bad dimension key {k:?}")))?;
            for (i, (b, d)) in pairs.into_iter().enumerate() {
                let death = match d {
                    Death::Finite(x) => x,
                    Death::Infinite(s) if s == "inf" => f64::INFINITY,
                    Death::Infinite(s) => {
                        return Err(Error::parse(
                            format!("dims.{k}[{i}]"),
                            format!("unexpected death {s:?}"),
                        ))
                    }
                };
                points.push(
                    PersistencePoint::new(b, death, dim)
                        .map_err(|e| Error::parse(format!("dims.{k}[{i}]"), e.to_string()))?,
                );
            }
        }
        Ok(PersistenceDiagram::from_points(points))
    }
}

/// Persistence diagram of a simplex-wise monotone filtration.
pub fn persistence_diagram(filt: &SimplexFiltration<'_>) -> Result<PersistenceDiagram> {
    if !filt.is_simplexwise_monotone() {
        return Err(Error::NotMonotone);
    }
    let values = filt.values();
    // canonical simplex order is (dim, lex), so a stable sort on value gives
    // (value, dim, lex)
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(diagram_in_order(filt, &order))
}

/// Reduces the boundary matrix with columns in the given order. `order`
/// must be a linear extension of the face relation.
pub(crate) fn diagram_in_order(
    filt: &SimplexFiltration<'_>,
    order: &[usize],
) -> PersistenceDiagram {
    let complex = filt.complex();
    let values = filt.values();
    let n = order.len();
    let mut position = vec![0usize; n];
    for (p, &s) in order.iter().enumerate() {
        position[s] = p;
    }

    let mut columns: Vec<Vec<usize>> = order
        .iter()
        .map(|&s| {
            let mut col: Vec<usize> = complex
                .boundary_indices(s)
                .into_iter()
                .map(|f| position[f])
                .collect();
            col.sort_unstable();
            col
        })
        .collect();

    // pivot_owner[row] = column whose lowest one sits in that row
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        while let Some(&low) = columns[j].last() {
            match pivot_owner[low] {
                Some(k) => {
                    let reduced = xor_sorted(&columns[j], &columns[k]);
                    columns[j] = reduced;
                }
                None => {
                    pivot_owner[low] = Some(j);
                    break;
                }
            }
        }
    }

    let mut points = Vec::new();
    for (row, owner) in pivot_owner.iter().enumerate() {
        let birth_simplex = order[row];
        let dim = complex.simplices()[birth_simplex].dim();
        match owner {
            Some(j) => {
                let (b, d) = (values[birth_simplex], values[order[*j]]);
                if b != d {
                    points.push(PersistencePoint {
                        birth: b,
                        death: d,
                        dim,
                    });
                }
            }
            // a creator that is never killed; destroyers have nonzero columns
            None if columns[row].is_empty() => points.push(PersistencePoint {
                birth: values[birth_simplex],
                death: f64::INFINITY,
                dim,
            }),
            None => {}
        }
    }
    PersistenceDiagram::from_points(points)
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Betti numbers over the two-element field, indexed by dimension up to
/// the complex's top dimension.
pub fn betti_numbers(complex: &AbstractComplex) -> Vec<usize> {
    let Some(top) = complex.dim() else {
        return Vec::new();
    };
    let filt = SimplexFiltration::from_values(complex, vec![0.0; complex.len()])
        .expect("zero filtration is total");
    let order: Vec<usize> = (0..complex.len()).collect();
    // zero-persistence pairs are dropped, leaving only essential classes
    let dgm = diagram_in_order(&filt, &order);
    (0..=top).map(|k| dgm.essential_count(k)).collect()
}
