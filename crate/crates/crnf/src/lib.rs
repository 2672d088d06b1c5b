//! Spectral CR calculus on the round 3-sphere.
//!
//! The crate realizes functions, vector fields and deformation tensors on
//! S³ ⊂ C² as coefficient vectors over an orthonormal polynomial basis,
//! builds the tangential Cauchy-Riemann operator suite as exact per-degree
//! matrices, integrates contact flows at quadrature nodes, and solves for the
//! normal form F*φ = i∂̄Y + ψ of a small deformation tensor.

pub mod cli;
pub mod contact_fields;
pub mod contact_flow;
pub mod cr_operators;
pub mod error;
pub mod geometry;
pub mod harmonic_basis;
pub mod io;
pub mod linalg;
pub mod normal_form;
pub mod par;
pub mod random;

pub use num_complex::Complex64 as C64;

pub use contact_fields::{ComplexContactField, ContactField, VField};
pub use contact_flow::{ContactDiffeo, DeformationTensor, FlowConfig};
pub use cr_operators::{FieldForm01, HolField, OperatorSuite, ScalarForm01};
pub use error::{Error, Result};
pub use geometry::ReferenceGeometry;
pub use harmonic_basis::{Basis, Letter, NormOrder, QuadratureGrid, SpectralScalar, SpectralSpace};
pub use normal_form::{NormalFormResult, SolveConfig};

