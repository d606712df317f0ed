//! Szegő kernel of the non-smooth worm domain
//! `D'_β = {(z1, z2) : |Im z1 − log|z2|²| < π/2, |log|z2|²| < β − π/2}`.
//!
//! The kernel depends on `(w, z)` only through `τ = w1 − conj z1` and
//! `λ = w2 conj z2`:
//!
//! ```text
//! K(w, z) = (1/8π) Σ_j λ^j I_j(τ),   I_j(τ) = ∫ e^{iτξ} dξ / (cosh(πξ) cosh((2β−π)(ξ − j/2)))
//! ```
//!
//! Modules follow the evaluation pipeline: [`domain`] geometry, [`quadrature`],
//! per-mode [`kernel_terms`], the assembled kernel in [`szego`], boundary
//! singularity [`analysis`] and the [`reproducing`] property.

pub mod analysis;
pub mod domain;
pub mod error;
pub mod kernel_terms;
pub mod quadrature;
pub mod reproducing;
mod series;
pub mod special;
pub mod szego;

pub use num_complex::Complex64;

pub use domain::{
    contains, face_point, make_params, make_path, reduce, ApproachPath, BoundaryFace, DomainParams, FaceKind,
    Point, PointPair, TauLambda,
};
pub use error::{Result, SzegoError};
pub use quadrature::{integrate_line, truncation_radius, Integrand, QuadResult};
pub use szego::{kernel, kernel_derivative, kernel_via, leading_term, KernelValue, LeadingTerm, Route, Variable};
