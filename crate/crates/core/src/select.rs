//! SELECT transforms of fields induced by vertex functions, and the
//! distance between two embeddings of the same field.
//!
//! The field on an embedded complex takes the value `phibar(σ) = min_{v∈σ} φ(v)`
//! on the image of each simplex, so its superlevel set at `t` is the
//! subcomplex `K^t`. `K^t` only changes at values of `φ`, which makes the
//! integral over `t` a finite sum.

use serde::Serialize;

use crate::complex::{AbstractComplex, Embedding, GeometricComplex};
use crate::ect::{
    dimension_constant, ect_integrands, quadrature_sum, sample_directions, DirectionScheme,
    EulerTransform,
};
use crate::error::{Error, Result};
use crate::filtration::{min_extension, superlevel_complex, Direction, VertexFunction};

/// An embedded complex carrying a positive vertex function.
#[derive(Clone, Debug)]
pub struct SelectField {
    gc: GeometricComplex,
    phi: VertexFunction,
    phibar: Vec<f64>,
    breakpoints: Vec<f64>,
}

impl SelectField {
    pub fn new(gc: GeometricComplex, phi: VertexFunction) -> Result<Self> {
        phi.check_covers(gc.complex())?;
        let phibar = min_extension(gc.complex(), &phi)?;
        let mut breakpoints: Vec<f64> = gc
            .complex()
            .vertices()
            .iter()
            .map(|&v| phi.get(v).expect("covered"))
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(SelectField {
            gc,
            phi,
            phibar,
            breakpoints,
        })
    }

    pub fn geometric(&self) -> &GeometricComplex {
        &self.gc
    }

    pub fn phi(&self) -> &VertexFunction {
        &self.phi
    }

    /// Min-extension values aligned with the complex's simplices.
    pub fn phibar(&self) -> &[f64] {
        &self.phibar
    }

    /// Distinct vertex values in increasing order.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// The subcomplex on which the field is at least `t`.
    pub fn superlevel(&self, t: f64) -> AbstractComplex {
        superlevel_complex(self.gc.complex(), &self.phibar, t)
    }
}

/// `χ({x : <x, ν> <= a, field(x) >= t})`.
pub fn select_eval(field: &SelectField, nu: &Direction, a: f64, t: f64) -> Result<i64> {
    let sub = field.superlevel(t);
    if nu.dim() != field.gc.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: field.gc.ambient_dim(),
            found: nu.dim(),
        });
    }
    if sub.is_empty() {
        return Ok(0);
    }
    Ok(EulerTransform::new(&sub, field.gc.embedding())?
        .curve(nu)?
        .evaluate(a))
}

/// Largest field value, attained at a vertex.
pub fn r_max(field: &SelectField) -> Result<f64> {
    field.breakpoints.last().copied().ok_or(Error::EmptyComplex)
}

/// Contribution of one interval `(t_lo, t_hi]` on which `K^t` is constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentContribution {
    pub t_lo: f64,
    pub t_hi: f64,
    /// Number of simplices in `K^t` on this interval.
    pub simplices: usize,
    #[serde(serialize_with = "crate::io::serialize_extended")]
    pub d_ect: f64,
    #[serde(serialize_with = "crate::io::serialize_extended")]
    pub contribution: f64,
}

/// Result of [`d_select`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectEstimate {
    #[serde(serialize_with = "crate::io::serialize_extended")]
    pub value: f64,
    pub quadrature: String,
    pub segments: Vec<SegmentContribution>,
}

/// `phibar` and the intervals `(t_i, t_{i+1}]` on which `K^t` is constant.
type Segments = (Vec<f64>, Vec<(f64, f64)>);

fn segments(complex: &AbstractComplex, phi: &VertexFunction) -> Result<Segments> {
    if complex.is_empty() {
        return Err(Error::EmptyComplex);
    }
    phi.check_covers(complex)?;
    let phibar = min_extension(complex, phi)?;
    let mut cuts: Vec<f64> = complex
        .vertices()
        .iter()
        .map(|&v| phi.get(v).expect("covered"))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut lo = 0.0;
    let segs = cuts
        .into_iter()
        .map(|hi| {
            let s = (lo, hi);
            lo = hi;
            s
        })
        .collect();
    Ok((phibar, segs))
}

/// `∫_0^∞ d_ECT(f(K^t), g(K^t)) dt`, exact in `t` and quadrature in direction.
///
/// Each interval `(t_i, t_{i+1}]` between consecutive vertex values
/// contributes `(t_{i+1} - t_i) · d_ECT` of the subcomplex `K^{t_{i+1}}`.
/// Above the largest value `K^t` is empty and contributes nothing.
pub fn d_select(
    complex: &AbstractComplex,
    phi: &VertexFunction,
    f: &Embedding,
    g: &Embedding,
    scheme: &DirectionScheme,
    window: Option<f64>,
) -> Result<SelectEstimate> {
    for e in [f, g] {
        if e.dim() != scheme.dim() {
            return Err(Error::DimensionMismatch {
                expected: scheme.dim(),
                found: e.dim(),
            });
        }
        e.check_covers(complex)?;
    }
    let (phibar, segs) = segments(complex, phi)?;
    let nodes = sample_directions(scheme)?;
    let mut value = 0.0;
    let mut out = Vec::with_capacity(segs.len());
    for (t_lo, t_hi) in segs {
        let sub = superlevel_complex(complex, &phibar, t_hi);
        let d = if sub.is_empty() {
            0.0
        } else {
            let ft = EulerTransform::new(&sub, f)?;
            let gt = EulerTransform::new(&sub, g)?;
            quadrature_sum(&nodes, &ect_integrands(&ft, &gt, &nodes, window)?)
        };
        let contribution = (t_hi - t_lo) * d;
        value += contribution;
        out.push(SegmentContribution {
            t_lo,
            t_hi,
            simplices: sub.len(),
            d_ect: d,
            contribution,
        });
    }
    Ok(SelectEstimate {
        value,
        quadrature: scheme.describe(),
        segments: out,
    })
}

/// `2 r_max C_d C_K Σ_v ||f(v) - g(v)||`, the upper bound on [`d_select`].
pub fn select_bound(
    complex: &AbstractComplex,
    phi: &VertexFunction,
    f: &Embedding,
    g: &Embedding,
) -> Result<f64> {
    let (phibar, _) = segments(complex, phi)?;
    let r_max = phibar.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_d = dimension_constant(f.dim())?;
    let c_k = complex.max_vertex_cofaces() as f64;
    Ok(2.0 * r_max * c_d * c_k * f.displacement_on(g, complex.vertices())?)
}

/// The sharper bound that keeps the per-`t` constants:
/// `Σ_i Δt_i · 2 C_d C_{K^t} Σ_{v ∈ V(K^t)} ||f(v) - g(v)||`.
/// Sits between [`d_select`] and [`select_bound`].
pub fn select_segment_bound(
    complex: &AbstractComplex,
    phi: &VertexFunction,
    f: &Embedding,
    g: &Embedding,
) -> Result<f64> {
    let (phibar, segs) = segments(complex, phi)?;
    let c_d = dimension_constant(f.dim())?;
    let mut total = 0.0;
    for (t_lo, t_hi) in segs {
        let sub = superlevel_complex(complex, &phibar, t_hi);
        let c_k = sub.max_vertex_cofaces() as f64;
        total += (t_hi - t_lo) * 2.0 * c_d * c_k * f.displacement_on(g, sub.vertices())?;
    }
    Ok(total)
}
