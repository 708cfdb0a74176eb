//! Randomised checks of the stability bounds.
//!
//! Each check compares a computed quantity `lhs` against an upper bound
//! `rhs` and reports whether `lhs <= rhs (1 + rel) + abs`. Instances are
//! drawn from seeded generators so every report can be replayed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::complex::{AbstractComplex, Embedding, GeometricComplex};
use crate::ecc::{ecc_from_filtration, l1_distance};
use crate::ect::{d_ect_parts, dimension_constant, ect_bound, sample_directions, DirectionScheme};
use crate::error::{Error, Result};
use crate::filtration::{directional_filtration, Direction, VertexFunction};
use crate::io::{serialize_extended, LoadedComplex};
use crate::persistence::{persistence_diagram, PersistenceDiagram, PersistencePoint};
use crate::select::{d_select, select_bound};
use crate::wasserstein::total_w_pq;

/// Slack allowed when comparing a computed value with its bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    /// For quantities estimated by quadrature over directions.
    pub const QUADRATURE: Tolerance = Tolerance {
        rel: 1e-6,
        abs: 1e-3,
    };
    /// For quantities computed exactly up to rounding.
    pub const EXACT: Tolerance = Tolerance {
        rel: 0.0,
        abs: 1e-9,
    };

    /// `(holds, vacuous)`. Both sides infinite counts as holding vacuously.
    pub fn check(&self, lhs: f64, rhs: f64) -> (bool, bool) {
        if lhs.is_nan() || rhs.is_nan() {
            return (false, false);
        }
        if lhs == f64::INFINITY && rhs == f64::INFINITY {
            return (true, true);
        }
        (lhs <= rhs * (1.0 + self.rel) + self.abs, false)
    }
}

/// Parameters of one random instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceParams {
    pub vertices: usize,
    pub top_dim: usize,
    pub edge_density: f64,
    pub face_density: f64,
    pub ambient_dim: usize,
    pub epsilon: f64,
    pub phi_range: (f64, f64),
    pub seed: u64,
}

impl InstanceParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.vertices == 0 {
            return bad("at least one vertex required".into());
        }
        if self.ambient_dim == 0 {
            return bad("ambient dimension must be positive".into());
        }
        for (name, x) in [
            ("edge_density", self.edge_density),
            ("face_density", self.face_density),
        ] {
            if !(0.0..=1.0).contains(&x) {
                return bad(format!("{name} must lie in [0, 1], got {x}"));
            }
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return bad(format!(
                "epsilon must be finite and non-negative, got {}",
                self.epsilon
            ));
        }
        let (lo, hi) = self.phi_range;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return bad(format!(
                "phi range must satisfy 0 <= lo < hi, got ({lo}, {hi})"
            ));
        }
        Ok(())
    }
}

/// A random complex with two nearby embeddings and a vertex function.
#[derive(Clone, Debug)]
pub struct Instance {
    pub params: InstanceParams,
    pub complex: AbstractComplex,
    pub f: Embedding,
    pub g: Embedding,
    pub phi: VertexFunction,
}

impl Instance {
    pub fn generate(params: InstanceParams) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let complex = random_complex(
            params.vertices,
            params.top_dim,
            params.edge_density,
            params.face_density,
            &mut rng,
        );
        let f = random_embedding(&complex, params.ambient_dim, &mut rng)?;
        let g = perturb(&f, params.epsilon, &mut rng)?;
        let (lo, hi) = params.phi_range;
        let phi = random_phi(&complex, lo, hi, &mut rng)?;
        Ok(Instance {
            params,
            complex,
            f,
            g,
            phi,
        })
    }

    pub fn f_geometric(&self) -> Result<GeometricComplex> {
        GeometricComplex::new(self.complex.clone(), self.f.clone())
    }

    pub fn g_geometric(&self) -> Result<GeometricComplex> {
        GeometricComplex::new(self.complex.clone(), self.g.clone())
    }

    /// The instance in the complex JSON schema, embeddings `f` and `g`.
    pub fn to_loaded(&self) -> LoadedComplex {
        LoadedComplex {
            complex: self.complex.clone(),
            labels: self.complex.vertices().iter().map(|&v| v as u64).collect(),
            embeddings: [
                ("f".to_string(), self.f.clone()),
                ("g".to_string(), self.g.clone()),
            ]
            .into_iter()
            .collect(),
            phis: [("phi".to_string(), self.phi.clone())]
                .into_iter()
                .collect(),
        }
    }
}

/// Vertices `0..n`; each edge with probability `edge_density`; each
/// higher simplex whose facets are all present with probability
/// `face_density`, up to `top_dim`.
pub fn random_complex<R: Rng>(
    n: usize,
    top_dim: usize,
    edge_density: f64,
    face_density: f64,
    rng: &mut R,
) -> AbstractComplex {
    let mut layers: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|v| vec![v]).collect()];
    for k in 1..=top_dim {
        let p = if k == 1 { edge_density } else { face_density };
        let prev = &layers[k - 1];
        let present: std::collections::HashSet<&[usize]> =
            prev.iter().map(|s| s.as_slice()).collect();
        let mut next = Vec::new();
        for s in prev {
            let last = *s.last().expect("non-empty");
            for w in last + 1..n {
                let mut cand = s.clone();
                cand.push(w);
                let closed = (0..cand.len() - 1).all(|drop| {
                    let facet: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &v)| v)
                        .collect();
                    present.contains(facet.as_slice())
                });
                if closed && rng.random::<f64>() < p {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }
    AbstractComplex::new(layers.into_iter().flatten()).expect("vertex set is non-empty")
}

/// Each vertex uniform in `[-1, 1]^d`.
pub fn random_embedding<R: Rng>(
    complex: &AbstractComplex,
    d: usize,
    rng: &mut R,
) -> Result<Embedding> {
    Embedding::new(
        d,
        complex
            .vertices()
            .iter()
            .map(|&v| (v, (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect()))
            .collect::<Vec<_>>(),
    )
}

/// Moves every point by an independent vector uniform in the closed
/// `epsilon`-ball.
pub fn perturb<R: Rng>(f: &Embedding, epsilon: f64, rng: &mut R) -> Result<Embedding> {
    if epsilon == 0.0 {
        return Ok(f.clone());
    }
    let d = f.dim();
    f.map_points(|x| {
        let mut dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dir.iter().map(|z| z * z).sum::<f64>().sqrt();
        let r = epsilon * rng.random::<f64>().powf(1.0 / d as f64);
        for z in &mut dir {
            *z *= r / norm;
        }
        x.iter().zip(&dir).map(|(a, b)| a + b).collect()
    })
}

/// Values uniform in `(lo, hi]`.
pub fn random_phi<R: Rng>(
    complex: &AbstractComplex,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<VertexFunction> {
    VertexFunction::new(
        complex
            .vertices()
            .iter()
            .map(|&v| (v, hi - rng.random::<f64>() * (hi - lo)))
            .collect::<Vec<_>>(),
    )
}

/// A uniformly random unit vector.
pub fn random_direction<R: Rng>(d: usize, rng: &mut R) -> Result<Direction> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if v.iter().any(|x| *x != 0.0) {
            return Direction::normalized(v);
        }
    }
}

/// Outcome of one bound check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub id: String,
    #[serde(serialize_with = "serialize_extended")]
    pub lhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub rhs: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub slack: f64,
    pub holds: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub vacuous: bool,
    pub instance: Value,
}

impl BoundReport {
    pub fn new(id: impl Into<String>, lhs: f64, rhs: f64, tol: Tolerance, instance: Value) -> Self {
        let (holds, vacuous) = tol.check(lhs, rhs);
        BoundReport {
            id: id.into(),
            lhs,
            rhs,
            slack: if vacuous { 0.0 } else { rhs - lhs },
            holds,
            vacuous,
            instance,
        }
    }

    fn with_instance(mut self, key: &str, v: Value) -> Self {
        if let Value::Object(m) = &mut self.instance {
            m.insert(key.to_string(), v);
        }
        self
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: lhs={} rhs={} slack={}",
            if self.holds { "PASS" } else { "FAIL" },
            self.id,
            self.lhs,
            self.rhs,
            self.slack
        )
    }
}

/// JSON number, or `"inf"` when not finite.
fn ext(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else if x < 0.0 {
        json!("-inf")
    } else {
        json!("nan")
    }
}

fn vertex_set_check(complex: &AbstractComplex, f: &Embedding, g: &Embedding) -> Result<()> {
    f.check_covers(complex)?;
    g.check_covers(complex)?;
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    Ok(())
}

/// `d_ECT(f(K), g(K)) <= 2 C_K C_d Σ_v ||f(v) - g(v)||`.
pub fn verify_ect_stability(
    complex: &AbstractComplex,
    f: &Embedding,
    g: &Embedding,
    scheme: &DirectionScheme,
) -> Result<BoundReport> {
    vertex_set_check(complex, f, g)?;
    let lhs = d_ect_parts(complex, f, complex, g, scheme, None)?.value;
    let rhs = ect_bound(complex, f, g)?;
    Ok(BoundReport::new(
        "ect-stability",
        lhs,
        rhs,
        Tolerance::QUADRATURE,
        json!({ "quadrature": scheme.describe(), "simplices": complex.len() }),
    ))
}

/// `d_SELECT <= 2 r_max C_d C_K Σ_v ||f(v) - g(v)||`.
pub fn verify_select_stability(
    complex: &AbstractComplex,
    phi: &VertexFunction,
    f: &Embedding,
    g: &Embedding,
    scheme: &DirectionScheme,
) -> Result<BoundReport> {
    vertex_set_check(complex, f, g)?;
    let lhs = d_select(complex, phi, f, g, scheme, None)?.value;
    let rhs = select_bound(complex, phi, f, g)?;
    Ok(BoundReport::new(
        "select-stability",
        lhs,
        rhs,
        Tolerance::QUADRATURE,
        json!({ "quadrature": scheme.describe(), "simplices": complex.len() }),
    ))
}

fn diagram(gc: &GeometricComplex, nu: &Direction) -> Result<PersistenceDiagram> {
    persistence_diagram(&directional_filtration(gc, nu)?)
}

/// `||ECC_ν(f) - ECC_ν(g)||_1 <= 2 W_{1,∞}(Dgm_ν(f), Dgm_ν(g))` in one direction.
pub fn verify_ecc_vs_wasserstein(
    f: &GeometricComplex,
    g: &GeometricComplex,
    nu: &Direction,
) -> Result<BoundReport> {
    let (ff, gf) = (
        directional_filtration(f, nu)?,
        directional_filtration(g, nu)?,
    );
    let lhs = l1_distance(&ecc_from_filtration(&ff), &ecc_from_filtration(&gf), None)?;
    let rhs = 2.0
        * total_w_pq(
            &persistence_diagram(&ff)?,
            &persistence_diagram(&gf)?,
            1.0,
            f64::INFINITY,
        )?;
    Ok(BoundReport::new(
        "ecc-vs-wasserstein",
        lhs,
        rhs,
        Tolerance::EXACT,
        json!({ "direction": nu.as_slice() }),
    ))
}

/// `∫ W_{1,1}(Dgm_ν(f), Dgm_ν(g)) dν <= C_K C_d Σ_v ||f(v) - g(v)||`.
pub fn verify_integrated_wasserstein(
    complex: &AbstractComplex,
    f: &Embedding,
    g: &Embedding,
    scheme: &DirectionScheme,
) -> Result<BoundReport> {
    vertex_set_check(complex, f, g)?;
    let fg = GeometricComplex::new(complex.clone(), f.clone())?;
    let gg = GeometricComplex::new(complex.clone(), g.clone())?;
    let nodes = sample_directions(scheme)?;
    let integrands = nodes
        .par_iter()
        .map(|(nu, _)| total_w_pq(&diagram(&fg, nu)?, &diagram(&gg, nu)?, 1.0, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let lhs = weighted_sum(&nodes, &integrands);
    let rhs = complex.max_vertex_cofaces() as f64
        * dimension_constant(f.dim())?
        * f.displacement_on(g, complex.vertices())?;
    Ok(BoundReport::new(
        "integrated-wasserstein",
        lhs,
        rhs,
        Tolerance::QUADRATURE,
        json!({ "quadrature": scheme.describe(), "simplices": complex.len() }),
    ))
}

/// `W_{p,∞} <= W_{p,p} <= 2 W_{p,∞}`. Reports the upper inequality with
/// the lower side in `instance.lower`; `holds` requires both.
pub fn verify_turner_sandwich(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    p: f64,
) -> Result<BoundReport> {
    let w_inf = total_w_pq(d1, d2, p, f64::INFINITY)?;
    let w_pp = total_w_pq(d1, d2, p, p)?;
    let mut r = BoundReport::new(
        "turner-sandwich",
        w_pp,
        2.0 * w_inf,
        Tolerance::EXACT,
        json!({ "p": p, "lower": ext(w_inf) }),
    );
    let (lower_ok, _) = Tolerance::EXACT.check(w_inf, w_pp);
    r.holds &= lower_ok;
    Ok(r)
}

fn weighted_sum(nodes: &[(Direction, f64)], xs: &[f64]) -> f64 {
    nodes
        .iter()
        .zip(xs)
        .fold(0.0, |acc, ((_, w), x)| acc + w * x)
}

/// The intermediate quantities of the ECT stability argument on one
/// quadrature rule, as three consecutive inequalities:
/// `d_ECT <= ∫ 2 W_{1,∞}`, `∫ 2 W_{1,∞} <= 2 ∫ W_{1,1}`, and
/// `2 ∫ W_{1,1} <= 2 C_K C_d Σ ||δ_v||`.
pub fn verify_proof_chain(
    complex: &AbstractComplex,
    f: &Embedding,
    g: &Embedding,
    scheme: &DirectionScheme,
) -> Result<Vec<BoundReport>> {
    vertex_set_check(complex, f, g)?;
    let fg = GeometricComplex::new(complex.clone(), f.clone())?;
    let gg = GeometricComplex::new(complex.clone(), g.clone())?;
    let nodes = sample_directions(scheme)?;
    let per: Vec<(f64, f64, f64)> = nodes
        .par_iter()
        .map(|(nu, _)| {
            let (ff, gf) = (
                directional_filtration(&fg, nu)?,
                directional_filtration(&gg, nu)?,
            );
            let l1 = l1_distance(&ecc_from_filtration(&ff), &ecc_from_filtration(&gf), None)?;
            let (df, dg) = (persistence_diagram(&ff)?, persistence_diagram(&gf)?);
            Ok((
                l1,
                total_w_pq(&df, &dg, 1.0, f64::INFINITY)?,
                total_w_pq(&df, &dg, 1.0, 1.0)?,
            ))
        })
        .collect::<Result<_>>()?;
    let col = |k: usize| -> Vec<f64> { per.iter().map(|t| [t.0, t.1, t.2][k]).collect() };
    let ect = weighted_sum(&nodes, &col(0));
    let w_inf = 2.0 * weighted_sum(&nodes, &col(1));
    let w_11 = 2.0 * weighted_sum(&nodes, &col(2));
    let bound = ect_bound(complex, f, g)?;
    let info = json!({ "quadrature": scheme.describe(), "simplices": complex.len() });
    Ok(vec![
        BoundReport::new(
            "chain-ecc-vs-wasserstein",
            ect,
            w_inf,
            Tolerance::EXACT,
            info.clone(),
        ),
        BoundReport::new(
            "chain-ground-norm",
            w_inf,
            w_11,
            Tolerance::EXACT,
            info.clone(),
        ),
        BoundReport::new(
            "chain-integrated-wasserstein",
            w_11,
            bound,
            Tolerance::QUADRATURE,
            info,
        ),
    ])
}

/// Which family of checks to run in a batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Ect,
    Select,
    Prop2,
    Skraba,
    Turner,
    All,
}

impl Check {
    pub const SINGLE: [Check; 5] = [
        Check::Ect,
        Check::Select,
        Check::Prop2,
        Check::Skraba,
        Check::Turner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Ect => "ect",
            Check::Select => "select",
            Check::Prop2 => "prop2",
            Check::Skraba => "skraba",
            Check::Turner => "turner",
            Check::All => "all",
        }
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::SINGLE
            .into_iter()
            .chain([Check::All])
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown check {s:?}")))
    }
}

/// Settings for [`run_batch`].
#[derive(Clone, Debug, PartialEq)]
pub struct BatchConfig {
    pub trials: usize,
    pub seed: u64,
    /// Overrides the per-check default direction count.
    pub directions: Option<usize>,
}

const EPSILONS: [f64; 3] = [0.01, 0.1, 0.5];

/// Parameters of trial `i` of a batch: ambient dimension alternates 2, 3
/// and `ε` cycles through 0.01, 0.1, 0.5.
pub fn trial_params(check: Check, seed: u64, i: usize) -> InstanceParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64 * 8 + check as u64);
    let (max_n, max_top) = match check {
        Check::Skraba => (8, 2),
        Check::Prop2 => (10, 3),
        _ => (12, 3),
    };
    InstanceParams {
        vertices: rng.random_range(1..=max_n),
        top_dim: rng.random_range(0..=max_top),
        edge_density: rng.random_range(0.2..=0.9),
        face_density: rng.random_range(0.2..=1.0),
        ambient_dim: 2 + i % 2,
        epsilon: EPSILONS[(i / 2) % 3],
        phi_range: (0.1, 5.0),
        seed: rng.random(),
    }
}

fn scheme_for(d: usize, override_n: Option<usize>) -> Result<DirectionScheme> {
    match override_n {
        Some(n) => DirectionScheme::with_count(d, n),
        None => DirectionScheme::default_for(d),
    }
}

/// A random diagram with `0..=5` finite points and `essential` points of
/// infinite death in each of dimensions 0, 1, 2.
pub fn random_diagram<R: Rng>(essential: [usize; 3], rng: &mut R) -> PersistenceDiagram {
    let mut pts = Vec::new();
    for (k, &e) in essential.iter().enumerate() {
        for _ in 0..rng.random_range(0..=5) {
            let b: f64 = rng.random_range(-1.0..1.0);
            let life: f64 = rng.random_range(0.0..2.0);
            pts.push(PersistencePoint {
                birth: b,
                death: b + life,
                dim: k,
            });
        }
        for _ in 0..e {
            pts.push(PersistencePoint {
                birth: rng.random_range(-1.0..1.0),
                death: f64::INFINITY,
                dim: k,
            });
        }
    }
    PersistenceDiagram::from_points(pts)
}

fn failure_replay(r: BoundReport, inst: &Instance) -> Result<BoundReport> {
    if r.holds {
        return Ok(r);
    }
    let complex: Value = serde_json::from_str(&inst.to_loaded().to_json()?)?;
    Ok(r.with_instance("replay", complex))
}

fn run_trial(check: Check, cfg: &BatchConfig, i: usize) -> Result<BoundReport> {
    let params = trial_params(check, cfg.seed, i);
    let d = params.ambient_dim;
    if check == Check::Turner {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let ess = [
            rng.random_range(0..=2),
            rng.random_range(0..=1),
            rng.random_range(0..=1),
        ];
        let d1 = random_diagram(ess, &mut rng);
        let d2 = random_diagram(ess, &mut rng);
        let r = verify_turner_sandwich(&d1, &d2, 1.0)?;
        let r = r
            .with_instance("trial", json!(i))
            .with_instance("seed", json!(params.seed));
        return Ok(if r.holds {
            r
        } else {
            r.with_instance(
                "replay",
                json!({ "a": serde_json::from_str::<Value>(&d1.to_json()?)?,
                        "b": serde_json::from_str::<Value>(&d2.to_json()?)? }),
            )
        });
    }
    let inst = Instance::generate(params.clone())?;
    let r = match check {
        Check::Ect => verify_ect_stability(
            &inst.complex,
            &inst.f,
            &inst.g,
            &scheme_for(d, cfg.directions)?,
        )?,
        Check::Select => verify_select_stability(
            &inst.complex,
            &inst.phi,
            &inst.f,
            &inst.g,
            &scheme_for(d, cfg.directions)?,
        )?,
        Check::Skraba => verify_integrated_wasserstein(
            &inst.complex,
            &inst.f,
            &inst.g,
            &scheme_for(d, cfg.directions)?,
        )?,
        Check::Prop2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x5bd1_e995);
            let nu = random_direction(d, &mut rng)?;
            verify_ecc_vs_wasserstein(&inst.f_geometric()?, &inst.g_geometric()?, &nu)?
        }
        Check::Turner | Check::All => unreachable!("handled above"),
    };
    let r = r
        .with_instance("trial", json!(i))
        .with_instance("params", serde_json::to_value(&params)?);
    failure_replay(r, &inst)
}

/// Runs `cfg.trials` independent trials of each selected check. Trials run
/// in parallel; reports come back in trial order.
pub fn run_batch(check: Check, cfg: &BatchConfig) -> Result<Vec<BoundReport>> {
    let checks: Vec<Check> = if check == Check::All {
        Check::SINGLE.to_vec()
    } else {
        vec![check]
    };
    let mut out = Vec::with_capacity(checks.len() * cfg.trials);
    for c in checks {
        let batch = (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(c, cfg, i))
            .collect::<Result<Vec<_>>>()?;
        out.extend(batch);
    }
    Ok(out)
}
