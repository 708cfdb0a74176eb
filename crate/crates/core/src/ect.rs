//! The Euler characteristic transform and its sphere-integrated distance.
//!
//! The integral over the unit sphere is replaced by an equal-weight
//! quadrature rule, see [`DirectionScheme`]. Per-direction integrands are
//! evaluated in parallel and summed in direction order, so results do not
//! depend on the thread count.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{AbstractComplex, Embedding, GeometricComplex};
use crate::ecc::{l1_distance, StepFunction};
use crate::error::{Error, Result};
use crate::filtration::Direction;

/// Which quadrature rule to use on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub enum SchemeKind {
    /// `(cos θ_j, sin θ_j)` with `θ_j = 2πj/N`. Circle only.
    UniformCircle,
    /// Fibonacci lattice on the 2-sphere.
    FibonacciSphere,
    /// Normalised Gaussian samples from a seeded generator.
    MonteCarlo { seed: u64 },
    /// Caller-supplied unit vectors, equally weighted.
    Custom(Vec<Direction>),
}

/// An equal-weight quadrature rule on `S^{dim-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionScheme {
    dim: usize,
    count: usize,
    kind: SchemeKind,
}

impl DirectionScheme {
    pub fn new(dim: usize, count: usize, kind: SchemeKind) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidScheme(
                "direction count must be at least 1".into(),
            ));
        }
        match &kind {
            SchemeKind::UniformCircle if dim != 2 => {
                return Err(Error::InvalidScheme(format!(
                    "uniform-circle requires d = 2, got {dim}"
                )))
            }
            SchemeKind::FibonacciSphere if dim != 3 => {
                return Err(Error::InvalidScheme(format!(
                    "fibonacci-sphere requires d = 3, got {dim}"
                )))
            }
            SchemeKind::MonteCarlo { .. } if dim == 0 => {
                return Err(Error::InvalidScheme("dimension must be positive".into()))
            }
            SchemeKind::Custom(dirs) => {
                if dirs.len() != count {
                    return Err(Error::InvalidScheme(
                        "custom direction count mismatch".into(),
                    ));
                }
                if let Some(d) = dirs.iter().find(|d| d.dim() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: d.dim(),
                    });
                }
            }
            _ => {}
        }
        Ok(DirectionScheme { dim, count, kind })
    }

    /// Uniform circle for `d = 2`, Fibonacci lattice for `d = 3`, seeded
    /// Monte Carlo otherwise.
    pub fn with_count(dim: usize, count: usize) -> Result<Self> {
        let kind = match dim {
            2 => SchemeKind::UniformCircle,
            3 => SchemeKind::FibonacciSphere,
            _ => SchemeKind::MonteCarlo { seed: 0 },
        };
        Self::new(dim, count, kind)
    }

    /// [`DirectionScheme::with_count`] with 1024 directions in the plane
    /// and 4096 otherwise.
    pub fn default_for(dim: usize) -> Result<Self> {
        Self::with_count(dim, if dim == 2 { 1024 } else { 4096 })
    }

    pub fn custom(directions: Vec<Direction>) -> Result<Self> {
        let dim = directions
            .first()
            .map(Direction::dim)
            .ok_or_else(|| Error::InvalidScheme("no directions given".into()))?;
        Self::new(dim, directions.len(), SchemeKind::Custom(directions))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    /// Short human-readable tag, e.g. `uniform-circle(d=2,N=1024)`.
    pub fn describe(&self) -> String {
        let tag = match &self.kind {
            SchemeKind::UniformCircle => "uniform-circle".to_string(),
            SchemeKind::FibonacciSphere => "fibonacci-sphere".to_string(),
            SchemeKind::MonteCarlo { seed } => format!("monte-carlo[seed={seed}]"),
            SchemeKind::Custom(_) => "custom".to_string(),
        };
        format!("{tag}(d={},N={})", self.dim, self.count)
    }
}

/// Surface area of the unit sphere `S^m` in `R^{m+1}`.
///
/// Uses `ω_0 = 2` (two points), `ω_1 = 2π`, `ω_m = 2π ω_{m-2} / (m-1)`.
pub fn unit_sphere_area(m: usize) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * unit_sphere_area(m - 2),
    }
}

/// Quadrature nodes with their weights; weights sum to the area of
/// `S^{dim-1}`.
pub fn sample_directions(scheme: &DirectionScheme) -> Result<Vec<(Direction, f64)>> {
    let n = scheme.count;
    let weight = unit_sphere_area(scheme.dim - 1) / n as f64;
    let dirs: Vec<Direction> = match &scheme.kind {
        SchemeKind::UniformCircle => (0..n)
            .map(|j| {
                let theta = 2.0 * PI * j as f64 / n as f64;
                unit(vec![theta.cos(), theta.sin()])
            })
            .collect(),
        SchemeKind::FibonacciSphere => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    unit(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        SchemeKind::MonteCarlo { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let v: Vec<f64> = (0..scheme.dim)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                if let Ok(d) = Direction::normalized(v) {
                    out.push(d);
                }
            }
            out
        }
        SchemeKind::Custom(dirs) => dirs.clone(),
    };
    Ok(dirs.into_iter().map(|d| (d, weight)).collect())
}

// Closed-form nodes are unit up to a few ulps; renormalise to be safe.
fn unit(v: Vec<f64>) -> Direction {
    Direction::normalized(v).expect("closed-form node is nonzero")
}

/// Euler characteristic curves of one embedded complex in any direction.
///
/// Precomputes each simplex's vertex rows so that a curve costs one pass
/// over the simplices plus a sort.
#[derive(Clone, Debug)]
pub struct EulerTransform {
    dim: usize,
    coords: Vec<f64>,
    offsets: Vec<usize>,
    members: Vec<usize>,
    signs: Vec<i64>,
}

impl EulerTransform {
    /// `embedding` must cover the vertices of `complex`; extra vertices are ignored.
    pub fn new(complex: &AbstractComplex, embedding: &Embedding) -> Result<Self> {
        embedding.check_covers(complex)?;
        let dim = embedding.dim();
        let vertices = complex.vertices();
        let mut coords = Vec::with_capacity(vertices.len() * dim);
        for &v in vertices {
            coords.extend_from_slice(embedding.point(v).expect("covered"));
        }
        let mut offsets = Vec::with_capacity(complex.len() + 1);
        let mut members = Vec::new();
        let mut signs = Vec::with_capacity(complex.len());
        offsets.push(0);
        for s in complex.simplices() {
            members.extend(
                s.iter()
                    .map(|v| vertices.binary_search(v).expect("vertex of complex")),
            );
            offsets.push(members.len());
            signs.push(s.sign());
        }
        Ok(EulerTransform {
            dim,
            coords,
            offsets,
            members,
            signs,
        })
    }

    pub fn from_geometric(gc: &GeometricComplex) -> Result<Self> {
        Self::new(gc.complex(), gc.embedding())
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// The Euler characteristic curve in direction `nu`.
    pub fn curve(&self, nu: &Direction) -> Result<StepFunction> {
        if nu.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: nu.dim(),
            });
        }
        let heights: Vec<f64> = self
            .coords
            .chunks_exact(self.dim)
            .map(|p| nu.dot(p))
            .collect();
        let jumps = self
            .signs
            .iter()
            .enumerate()
            .map(|(i, &sign)| {
                let h = self.members[self.offsets[i]..self.offsets[i + 1]]
                    .iter()
                    .map(|&r| heights[r])
                    .fold(f64::NEG_INFINITY, f64::max);
                (h, sign)
            })
            .collect();
        Ok(StepFunction::canonical(jumps))
    }
}

/// `χ` of the sublevel set `{σ : h_ν(σ) <= a}`.
pub fn ect_eval(gc: &GeometricComplex, nu: &Direction, a: f64) -> Result<i64> {
    Ok(EulerTransform::from_geometric(gc)?.curve(nu)?.evaluate(a))
}

/// One quadrature node and the L1 distance of the two curves there.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionSample {
    pub direction: Vec<f64>,
    pub weight: f64,
    #[serde(serialize_with = "crate::io::serialize_extended")]
    pub integrand: f64,
}

/// A quadrature estimate of an integral over the sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceEstimate {
    #[serde(serialize_with = "crate::io::serialize_extended")]
    pub value: f64,
    pub quadrature: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_direction: Vec<DirectionSample>,
}

impl DistanceEstimate {
    /// Drops the per-direction breakdown.
    pub fn summary(mut self) -> Self {
        self.per_direction.clear();
        self
    }
}

/// Per-direction integrands `||ECC_ν(f) - ECC_ν(g)||_1`, in node order.
pub(crate) fn ect_integrands(
    f: &EulerTransform,
    g: &EulerTransform,
    nodes: &[(Direction, f64)],
    window: Option<f64>,
) -> Result<Vec<f64>> {
    nodes
        .par_iter()
        .map(|(nu, _)| l1_distance(&f.curve(nu)?, &g.curve(nu)?, window))
        .collect()
}

/// Weighted sum in node order. Infinite integrands make the sum infinite.
pub(crate) fn quadrature_sum(nodes: &[(Direction, f64)], integrands: &[f64]) -> f64 {
    nodes
        .iter()
        .zip(integrands)
        .fold(0.0, |acc, ((_, w), &x)| acc + w * x)
}

pub(crate) fn estimate(
    scheme: &DirectionScheme,
    nodes: &[(Direction, f64)],
    integrands: Vec<f64>,
) -> DistanceEstimate {
    let value = quadrature_sum(nodes, &integrands);
    DistanceEstimate {
        value,
        quadrature: scheme.describe(),
        per_direction: nodes
            .iter()
            .zip(integrands)
            .map(|((d, w), x)| DirectionSample {
                direction: d.as_slice().to_vec(),
                weight: *w,
                integrand: x,
            })
            .collect(),
    }
}

fn check_dims(scheme: &DirectionScheme, f: &Embedding, g: &Embedding) -> Result<()> {
    for d in [f.dim(), g.dim()] {
        if d != scheme.dim {
            return Err(Error::DimensionMismatch {
                expected: scheme.dim,
                found: d,
            });
        }
    }
    Ok(())
}

/// Quadrature estimate of `∫_{S^{d-1}} ||ECC_ν(f(K)) - ECC_ν(g(K))||_1 dν`.
///
/// With `window = Some(B)` each L1 distance is restricted to `[-B, B]`, which
/// keeps the result finite for complexes with different Euler
/// characteristics.
pub fn d_ect(
    f_gc: &GeometricComplex,
    g_gc: &GeometricComplex,
    scheme: &DirectionScheme,
    window: Option<f64>,
) -> Result<DistanceEstimate> {
    d_ect_parts(
        f_gc.complex(),
        f_gc.embedding(),
        g_gc.complex(),
        g_gc.embedding(),
        scheme,
        window,
    )
}

/// [`d_ect`] on complexes given with embeddings that may cover more vertices
/// than the complexes use.
pub fn d_ect_parts(
    f_complex: &AbstractComplex,
    f: &Embedding,
    g_complex: &AbstractComplex,
    g: &Embedding,
    scheme: &DirectionScheme,
    window: Option<f64>,
) -> Result<DistanceEstimate> {
    check_dims(scheme, f, g)?;
    let nodes = sample_directions(scheme)?;
    let ft = EulerTransform::new(f_complex, f)?;
    let gt = EulerTransform::new(g_complex, g)?;
    let integrands = ect_integrands(&ft, &gt, &nodes, window)?;
    Ok(estimate(scheme, &nodes, integrands))
}

/// The default integration window: largest vertex norm over both embeddings, plus one.
pub fn default_window(f: &Embedding, g: &Embedding) -> f64 {
    f.max_norm().max(g.max_norm()) + 1.0
}

/// `2 ω_{d-2} ∫_0^{π/2} cos θ sin^{d-2} θ dθ = 2 ω_{d-2} / (d - 1)`.
pub fn dimension_constant(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParams(format!(
            "dimension constant needs d >= 2, got {d}"
        )));
    }
    Ok(2.0 * unit_sphere_area(d - 2) / (d as f64 - 1.0))
}

/// `2 C_K C_d Σ_v ||f(v) - g(v)||`, the upper bound on [`d_ect`].
pub fn ect_bound(complex: &AbstractComplex, f: &Embedding, g: &Embedding) -> Result<f64> {
    f.check_covers(complex)?;
    g.check_covers(complex)?;
    let c_k = complex.max_vertex_cofaces() as f64;
    let c_d = dimension_constant(f.dim())?;
    Ok(2.0 * c_k * c_d * f.displacement_on(g, complex.vertices())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertex_at(x: f64, y: f64) -> GeometricComplex {
        GeometricComplex::new(
            AbstractComplex::new([vec![0]]).unwrap(),
            Embedding::from_rows(2, vec![vec![x, y]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn circle_nodes() {
        let s = DirectionScheme::new(2, 4, SchemeKind::UniformCircle).unwrap();
        let nodes = sample_directions(&s).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for ((d, w), e) in nodes.iter().zip(expect) {
            assert!((d.as_slice()[0] - e[0]).abs() < 1e-15);
            assert!((d.as_slice()[1] - e[1]).abs() < 1e-15);
            assert!((w - PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nodes_are_unit_and_weights_sum_to_area() {
        let schemes = [
            DirectionScheme::new(2, 37, SchemeKind::UniformCircle).unwrap(),
            DirectionScheme::new(3, 101, SchemeKind::FibonacciSphere).unwrap(),
            DirectionScheme::new(2, 50, SchemeKind::MonteCarlo { seed: 3 }).unwrap(),
            DirectionScheme::new(3, 50, SchemeKind::MonteCarlo { seed: 3 }).unwrap(),
            DirectionScheme::new(5, 50, SchemeKind::MonteCarlo { seed: 9 }).unwrap(),
        ];
        for s in &schemes {
            let nodes = sample_directions(s).unwrap();
            assert_eq!(nodes.len(), s.count());
            for (d, _) in &nodes {
                let n: f64 = d.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
            let total: f64 = nodes.iter().map(|(_, w)| w).sum();
            assert!((total - unit_sphere_area(s.dim() - 1)).abs() < 1e-9);
        }
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let a = sample_directions(
            &DirectionScheme::new(4, 10, SchemeKind::MonteCarlo { seed: 1 }).unwrap(),
        )
        .unwrap();
        let b = sample_directions(
            &DirectionScheme::new(4, 10, SchemeKind::MonteCarlo { seed: 1 }).unwrap(),
        )
        .unwrap();
        let c = sample_directions(
            &DirectionScheme::new(4, 10, SchemeKind::MonteCarlo { seed: 2 }).unwrap(),
        )
        .unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn scheme_validation() {
        assert!(DirectionScheme::new(3, 8, SchemeKind::UniformCircle).is_err());
        assert!(DirectionScheme::new(2, 8, SchemeKind::FibonacciSphere).is_err());
        assert!(DirectionScheme::new(2, 0, SchemeKind::UniformCircle).is_err());
    }

    #[test]
    fn eval_limits() {
        let k = AbstractComplex::new([vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let e =
            Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 1.0]]).unwrap();
        let gc = GeometricComplex::new(k, e).unwrap();
        let nu = Direction::normalized(vec![0.3, 0.7]).unwrap();
        assert_eq!(ect_eval(&gc, &nu, f64::NEG_INFINITY).unwrap(), 0);
        assert_eq!(ect_eval(&gc, &nu, 10.0).unwrap(), 0);

        let edge = GeometricComplex::new(
            AbstractComplex::new([vec![0, 1]]).unwrap(),
            Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let x = Direction::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(ect_eval(&edge, &x, 0.5).unwrap(), 1);
        assert_eq!(ect_eval(&edge, &x, 5.0).unwrap(), 1);
        assert!(ect_eval(&edge, &Direction::new(vec![0.0, 0.0, 1.0]).unwrap(), 0.0).is_err());
    }

    #[test]
    fn distance_identity_and_infinity() {
        let s = DirectionScheme::with_count(2, 64).unwrap();
        let a = vertex_at(0.2, 0.1);
        assert_eq!(d_ect(&a, &a, &s, None).unwrap().value, 0.0);
        let two = GeometricComplex::new(
            AbstractComplex::new([vec![0], vec![1]]).unwrap(),
            Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(d_ect(&a, &two, &s, None).unwrap().value, f64::INFINITY);
        assert!(d_ect(&a, &two, &s, Some(3.0)).unwrap().value.is_finite());
        let three_d = DirectionScheme::with_count(3, 16).unwrap();
        assert!(matches!(
            d_ect(&a, &a, &three_d, None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_vertex_closed_form() {
        let s = DirectionScheme::with_count(2, 2048).unwrap();
        let est = d_ect(&vertex_at(0.0, 0.0), &vertex_at(0.5, 0.0), &s, None).unwrap();
        assert!((est.value - 2.0).abs() <= 0.002, "{}", est.value);
        assert_eq!(est.per_direction.len(), 2048);
    }

    #[test]
    fn dimension_constants() {
        assert!((dimension_constant(2).unwrap() - 4.0).abs() < 1e-15);
        assert!((dimension_constant(3).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((dimension_constant(4).unwrap() - 8.0 * PI / 3.0).abs() < 1e-14);
        assert!(dimension_constant(1).is_err());
    }

    #[test]
    fn bounds() {
        let k = AbstractComplex::new([vec![0]]).unwrap();
        let f = Embedding::from_rows(2, vec![vec![0.0, 0.0]]).unwrap();
        let g = Embedding::from_rows(2, vec![vec![0.5, 0.0]]).unwrap();
        assert_eq!(ect_bound(&k, &f, &f).unwrap(), 0.0);
        assert_eq!(ect_bound(&k, &f, &g).unwrap(), 4.0);
        let tri = AbstractComplex::new([vec![0, 1, 2]]).unwrap();
        let f3 =
            Embedding::from_rows(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let g3 =
            Embedding::from_rows(2, vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(ect_bound(&tri, &f3, &g3).unwrap(), 32.0);
    }
}
