//! Convex bodies attached to a discrete surface: the projection body
//! `Π(S)` (a zonotope), the unit ball `K^p(S)` of the gauge
//! `y ↦ (Σ w|y·v|^p)^{1/p}`, ellipsoids, boxes, and the mixed volumes and
//! mixed discriminants that connect them to `Q_j^p`.

mod boxes;
mod discriminant;
mod john;
mod visibility;
mod zonotope;

pub use boxes::{box_permutation_sum, mixed_volume_boxes, BoxSpec, MAX_BOX_DIM};
pub use discriminant::{
    covariance, mixed_discriminant, mixed_discriminant_identity_check, CovarianceMatrix, IdentityCheck,
    MAX_DISCRIMINANT_DIM,
};
pub use john::{john_ellipsoid, mvee, Ellipsoid, JohnEllipsoid, MveeOptions, SymmetricBody};
pub use visibility::{
    directional_mass, interpolation_sum, kp_norm, line_bound, plane_bound, santalo_diagnostic, visibility,
    visibility_bounds, BoundsConfig, FrameBound, MassTarget, SantaloDiagnostic, VisibilityBoundsReport,
    VisibilityEstimate,
};
pub use zonotope::{
    diagonal_wedge_sum, mixed_volume_zb, mixed_volume_zb_diagonal, projection_body, zonotope_volume, Zonotope,
    DEFAULT_SUBSET_CAP,
};
