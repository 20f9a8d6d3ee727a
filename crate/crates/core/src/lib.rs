//! Intrinsic diameter bounds for discrete surfaces with boundary immersed in
//! conformally flat 3-manifolds `(V, e^{2φ} δ)`.
//!
//! The crate evaluates every quantity that enters the bound
//!
//! ```text
//! d(Σ) ≤ C(2, α) [ 2 ∫_Σ |H| dμ + π ℓ(∂Σ) ]
//! ```
//!
//! on triangle meshes: conformal areas and lengths ([`surface`]), graph
//! approximations of the intrinsic diameter ([`geodesy`]), the curvature and
//! injectivity-radius gates together with the constants ([`gates`]), the
//! doubling construction that turns a bordered surface into a closed one
//! ([`doubling`]), and discrete area minimization plus boundary screening for
//! Plateau-type problems ([`plateau`]).

pub mod ambient;
pub mod doubling;
pub mod error;
pub mod gates;
pub mod generate;
pub mod geodesy;
pub mod io;
pub mod mesh;
pub mod plateau;
pub mod quadrature;
mod sparse;
pub mod surface;

pub use ambient::{AmbientKind, ConformalAmbient, CustomAmbient};
pub use error::{Error, MeshErrorCode, Result};
pub use mesh::ImmersedMesh;

/// Points and vectors in chart coordinates.
pub type Vec3 = nalgebra::Vector3<f64>;
