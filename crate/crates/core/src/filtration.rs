//! Directional height filtrations and superlevel sets of vertex functions.
//!
//! Per-simplex values are stored as a `Vec<f64>` aligned with
//! [`AbstractComplex::simplices`].

use std::collections::BTreeMap;

use crate::complex::{AbstractComplex, Embedding, GeometricComplex, Simplex};
use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// A unit vector in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts `v` only if its Euclidean norm is within `1e-12` of one.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let n = norm(&v);
        if v.is_empty() || !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnitDirection(n));
        }
        Ok(Direction(v))
    }

    /// Scales `v` to unit length.
    pub fn normalized(v: Vec<f64>) -> Result<Self> {
        let n = norm(&v);
        if v.is_empty() || !n.is_finite() || n == 0.0 {
            return Err(Error::NotUnitDirection(n));
        }
        Ok(Direction(v.into_iter().map(|x| x / n).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn negated(&self) -> Direction {
        Direction(self.0.iter().map(|x| -x).collect())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Height of a simplex: the largest `<f(v), nu>` over its vertices.
pub fn height(embedding: &Embedding, nu: &Direction, sigma: &[usize]) -> Result<f64> {
    if embedding.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: embedding.dim(),
            found: nu.dim(),
        });
    }
    if sigma.is_empty() {
        return Err(Error::EmptySimplex);
    }
    sigma.iter().try_fold(f64::NEG_INFINITY, |m, &v| {
        let p = embedding.point(v).ok_or(Error::MissingVertex(v))?;
        Ok(m.max(nu.dot(p)))
    })
}

/// A real value on every simplex of a complex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexFiltration<'a> {
    complex: &'a AbstractComplex,
    values: Vec<f64>,
}

impl<'a> SimplexFiltration<'a> {
    /// Checks totality, finiteness and simplex-wise monotonicity.
    pub fn new(complex: &'a AbstractComplex, values: Vec<f64>) -> Result<Self> {
        let f = Self::from_values(complex, values)?;
        if !f.is_simplexwise_monotone() {
            return Err(Error::NotMonotone);
        }
        Ok(f)
    }

    /// Checks totality and finiteness only. Persistence re-validates
    /// monotonicity before reducing.
    pub fn from_values(complex: &'a AbstractComplex, values: Vec<f64>) -> Result<Self> {
        if values.len() != complex.len() {
            return Err(Error::DimensionMismatch {
                expected: complex.len(),
                found: values.len(),
            });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SimplexFiltration { complex, values })
    }

    pub fn complex(&self) -> &'a AbstractComplex {
        self.complex
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_of(&self, vertices: &[usize]) -> Option<f64> {
        self.complex.index_of(vertices).map(|i| self.values[i])
    }

    /// Every face has a value no larger than its cofaces.
    pub fn is_simplexwise_monotone(&self) -> bool {
        (0..self.complex.len()).all(|i| {
            self.complex
                .boundary_indices(i)
                .into_iter()
                .all(|j| self.values[j] <= self.values[i])
        })
    }
}

/// Heights of every simplex of `gc` in direction `nu`.
pub fn directional_filtration<'a>(
    gc: &'a GeometricComplex,
    nu: &Direction,
) -> Result<SimplexFiltration<'a>> {
    let emb = gc.embedding();
    if emb.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            found: nu.dim(),
        });
    }
    let values = gc
        .complex()
        .simplices()
        .iter()
        .map(|s| height(emb, nu, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimplexFiltration {
        complex: gc.complex(),
        values,
    })
}

/// A strictly positive value on each vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFunction(BTreeMap<usize, f64>);

impl VertexFunction {
    pub fn new<I>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut map = BTreeMap::new();
        for (v, x) in values {
            if !x.is_finite() {
                return Err(Error::NonFinite);
            }
            if x <= 0.0 {
                return Err(Error::NonPositivePhi {
                    vertex: v,
                    value: x,
                });
            }
            if map.insert(v, x).is_some() {
                return Err(Error::parse("phi", format!("vertex {v} given twice")));
            }
        }
        Ok(VertexFunction(map))
    }

    /// Values for vertex ids `0..values.len()`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values.into_iter().enumerate())
    }

    /// The same value `c` on every listed vertex.
    pub fn constant(vertices: &[usize], c: f64) -> Result<Self> {
        Self::new(vertices.iter().map(|&v| (v, c)))
    }

    pub fn get(&self, v: usize) -> Option<f64> {
        self.0.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().map(|(&v, &x)| (v, x))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_value(&self) -> Option<f64> {
        self.0.values().copied().reduce(f64::max)
    }

    /// Distinct values, strictly increasing.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.0.values().copied().collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn check_covers(&self, complex: &AbstractComplex) -> Result<()> {
        match complex.vertices().iter().find(|v| !self.0.contains_key(v)) {
            Some(&v) => Err(Error::MissingVertex(v)),
            None => Ok(()),
        }
    }
}

/// Value of each simplex = smallest vertex value, aligned with
/// `complex.simplices()`. Faces never get a smaller value than their cofaces.
pub fn min_extension(complex: &AbstractComplex, phi: &VertexFunction) -> Result<Vec<f64>> {
    complex
        .simplices()
        .iter()
        .map(|s| simplex_min(s, phi))
        .collect()
}

fn simplex_min(s: &Simplex, phi: &VertexFunction) -> Result<f64> {
    s.iter().try_fold(f64::INFINITY, |m, &v| {
        Ok(m.min(phi.get(v).ok_or(Error::MissingVertex(v))?))
    })
}

/// `{ sigma : phibar(sigma) >= t }`, possibly empty.
pub fn superlevel_complex(complex: &AbstractComplex, phibar: &[f64], t: f64) -> AbstractComplex {
    debug_assert_eq!(phibar.len(), complex.len());
    complex.subcomplex(|i, _| phibar[i] >= t)
}

/// Distinct vertex values of `phi` in increasing order.
pub fn phi_breakpoints(phi: &VertexFunction) -> Vec<f64> {
    phi.breakpoints()
}
