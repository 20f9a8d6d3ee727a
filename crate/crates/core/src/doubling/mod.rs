//! Doubling a surface with boundary into a closed surface: a teardrop
//! profile swept along the boundary with a conormal frame, welded to the
//! surface and a mirrored copy.

mod frames;
mod teardrop;
mod tube;

pub use frames::{boundary_frames, BoundaryFrame};
pub use teardrop::{make_teardrop, CurveSample, Piece, ProfileCurve, TeardropCurve, Vec2};
pub use tube::{
    build_double, convergence_study, monotonicity, tube_area, tube_mean_curvature_integral, tube_vertex_weights,
    ConvergenceRow, ConvergenceStudy, DoubledMesh, FaceTag,
};

/// `∫|κ| ds` of a sampled profile.
pub fn total_abs_curvature(curve: &ProfileCurve) -> f64 {
    curve.total_abs_curvature()
}
