//! Euler characteristic curves, persistence diagrams, Wasserstein
//! distances, and Euler characteristic / SELECT transform distances for
//! embedded simplicial complexes, with randomised checks of the stability
//! bounds relating them.
//!
//! ```
//! use ectkit::{AbstractComplex, Embedding, GeometricComplex, DirectionScheme, d_ect};
//!
//! let k = AbstractComplex::new([vec![0]]).unwrap();
//! let f = GeometricComplex::new(k.clone(), Embedding::from_rows(2, vec![vec![0.0, 0.0]]).unwrap()).unwrap();
//! let g = GeometricComplex::new(k, Embedding::from_rows(2, vec![vec![0.5, 0.0]]).unwrap()).unwrap();
//! let scheme = DirectionScheme::with_count(2, 2048).unwrap();
//! let d = d_ect(&f, &g, &scheme, None).unwrap();
//! assert!((d.value - 2.0).abs() < 2e-3);
//! ```

pub mod assignment;
pub mod complex;
pub mod ecc;
pub mod ect;
pub mod error;
pub mod filtration;
pub mod io;
pub mod persistence;
pub mod select;
pub mod stability;
pub mod wasserstein;

pub use complex::{AbstractComplex, Embedding, GeometricComplex, Simplex};
pub use ecc::{ecc_from_diagram, ecc_from_filtration, l1_distance, StepFunction};
pub use ect::{
    d_ect, d_ect_parts, default_window, dimension_constant, ect_bound, ect_eval, sample_directions,
    DirectionScheme, DistanceEstimate, EulerTransform, SchemeKind,
};
pub use error::{Error, Result};
pub use filtration::{
    directional_filtration, height, min_extension, superlevel_complex, Direction,
    SimplexFiltration, VertexFunction,
};
pub use io::{load_complex_file, LoadedComplex};
pub use persistence::{betti_numbers, persistence_diagram, PersistenceDiagram, PersistencePoint};
pub use select::{d_select, r_max, select_bound, select_eval, SelectEstimate, SelectField};
pub use stability::{
    run_batch, BatchConfig, BoundReport, Check, Instance, InstanceParams, Tolerance,
};
pub use wasserstein::{brute_force_w, total_w_pq, w_pq, w_pq_by_dim};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/complexes.md")]
    struct Complexes;
    #[doc = include_str!("../../../book/src/euler-curves.md")]
    struct EulerCurves;
    #[doc = include_str!("../../../book/src/persistence.md")]
    struct Persistence;
    #[doc = include_str!("../../../book/src/wasserstein.md")]
    struct Wasserstein;
    #[doc = include_str!("../../../book/src/ect-distance.md")]
    struct EctDistance;
    #[doc = include_str!("../../../book/src/select.md")]
    struct Select;
    #[doc = include_str!("../../../book/src/stability.md")]
    struct Stability;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
