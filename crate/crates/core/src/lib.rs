//! Transversality of families of vector-valued measures.
//!
//! A discrete surface is a finite set of weighted vectors in `R^d`. For `j`
//! surfaces the quantity `Q_j^p` is the `L^p` mean of `|v_1 ∧ ⋯ ∧ v_j|` under
//! the product measure, raised to `1/j`. This crate computes it exactly, through
//! covariance spectra (`p = 2`), through zonotope mixed volumes (`p = 1`), or by
//! Monte Carlo, and uses these routes to certify a family of inequalities.
//!
//! ```
//! use qgeo::{q_exact, DiscreteSurface, Exponent, QOptions};
//!
//! // unit square: four outward normals of length 1
//! let s = DiscreteSurface::from_pairs(2, [
//!     (1.0, vec![1.0, 0.0]), (1.0, vec![-1.0, 0.0]),
//!     (1.0, vec![0.0, 1.0]), (1.0, vec![0.0, -1.0]),
//! ]).unwrap();
//! let q = q_exact(&[&s, &s], Exponent::Finite(1.0), &QOptions::default()).unwrap();
//! assert!((q.value - 8f64.sqrt()).abs() < 1e-12);
//! ```

pub mod convex;
pub mod crofton;
pub mod ensembles;
pub mod error;
pub mod exterior;
pub mod inequality;
pub mod numeric;
pub mod q;
pub mod rng;
pub mod surface;

pub use error::{Error, Result};
pub use exterior::{wedge_norm, Frame, Plane, RealVector};
pub use q::{q1_zonotope, q2_spectral, q_exact, q_mc, q_profile, Exponent, Method, QEstimate, QOptions, QProfile};
pub use surface::{sphere_reference, Atom, DiscreteSurface, SurfaceFile};

/// The guide's code listings, compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/q-quantities.md")]
    mod q_quantities {}
    #[doc = include_str!("../../../book/src/convex-bodies.md")]
    mod convex_bodies {}
    #[doc = include_str!("../../../book/src/inequalities.md")]
    mod inequalities {}
    #[doc = include_str!("../../../book/src/crofton.md")]
    mod crofton {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
