//! The doubled surface `M_ε = Σ ∪ T_ε ∪ Σ` and its tube integrals.

use serde::Serialize;

use super::frames::boundary_frames;
use super::teardrop::TeardropCurve;
use crate::gates::{self, GateReport, ReportOptions};
use crate::geodesy::{self, WeightedGraph};
use crate::surface;
use crate::{ConformalAmbient, Error, ImmersedMesh, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceTag {
    CopyA,
    Tube,
    CopyB,
}

#[derive(Debug, Clone)]
pub struct DoubledMesh {
    pub mesh: ImmersedMesh,
    pub face_tags: Vec<FaceTag>,
    /// Vertex of `mesh` copying each vertex of the input in copy A.
    pub copy_a: Vec<usize>,
    /// Vertex of `mesh` copying each vertex of the input in copy B.
    pub copy_b: Vec<usize>,
    pub eps: f64,
}

impl DoubledMesh {
    pub fn tube_face_count(&self) -> usize {
        self.face_tags.iter().filter(|&&t| t == FaceTag::Tube).count()
    }
}

/// Welds `mesh` to a mirrored copy of itself through the tube
/// `F(s, t) = γ(t) + ε (x(s) e₂(t) + y(s) e₃(t))` along every boundary loop.
///
/// The tube has `s_res` segments in `s`. Its first ring is the boundary of
/// copy A and its last ring the boundary of copy B, both exactly on `γ`
/// because the profile starts and ends at the origin. A closed input is
/// returned unchanged with an empty tube.
pub fn build_double(
    mesh: &ImmersedMesh,
    a: &ConformalAmbient,
    eps: f64,
    drop: &TeardropCurve,
    s_res: usize,
) -> Result<DoubledMesh> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if s_res < 8 {
        return Err(Error::invalid(format!("s_res must be at least 8, got {s_res}")));
    }
    let n = mesh.vertex_count();
    if mesh.is_closed() {
        let ids: Vec<usize> = (0..n).collect();
        return Ok(DoubledMesh {
            mesh: mesh.clone(),
            face_tags: vec![FaceTag::CopyA; mesh.face_count()],
            copy_a: ids.clone(),
            copy_b: ids,
            eps,
        });
    }
    let frames = boundary_frames(mesh)?;
    let profile = drop.resampled(s_res)?.profile();
    let rings = profile.len();

    let mut positions = mesh.positions().to_vec();
    let mut tube_base = Vec::with_capacity(frames.len());
    for loop_frames in &frames {
        tube_base.push(positions.len());
        for sample in &profile[1..rings - 1] {
            let [x, y] = sample.point;
            for f in loop_frames {
                let q = mesh.position(f.vertex) + (f.e2 * x + f.e3 * y) * eps;
                a.ensure_contains(&q)?;
                positions.push(q);
            }
        }
    }
    let offset_b = positions.len();
    positions.extend_from_slice(mesh.positions());

    let mut faces = mesh.faces().to_vec();
    let mut face_tags = vec![FaceTag::CopyA; faces.len()];
    for (l, lp) in mesh.boundary_loops().iter().enumerate() {
        let len = lp.len();
        let vertex = |j: usize, k: usize| {
            let k = k % len;
            if j == 0 {
                lp[k]
            } else if j == rings - 1 {
                offset_b + lp[k]
            } else {
                tube_base[l] + (j - 1) * len + k
            }
        };
        for j in 0..rings - 1 {
            for k in 0..len {
                let (u, v) = (vertex(j, k), vertex(j, k + 1));
                let (u2, v2) = (vertex(j + 1, k), vertex(j + 1, k + 1));
                faces.push([v, u, u2]);
                faces.push([v, u2, v2]);
                face_tags.extend([FaceTag::Tube, FaceTag::Tube]);
            }
        }
    }
    for &[p, q, r] in mesh.faces() {
        faces.push([offset_b + p, offset_b + r, offset_b + q]);
        face_tags.push(FaceTag::CopyB);
    }
    let doubled = ImmersedMesh::new(positions, faces)?;
    Ok(DoubledMesh {
        mesh: doubled,
        face_tags,
        copy_a: (0..n).collect(),
        copy_b: (offset_b..offset_b + n).collect(),
        eps,
    })
}

/// Per-vertex share of the tube: 1 when every incident face is a tube face,
/// ½ on the welding rings, 0 elsewhere.
pub fn tube_vertex_weights(d: &DoubledMesh) -> Vec<f64> {
    let mut tube = vec![0usize; d.mesh.vertex_count()];
    let mut total = vec![0usize; d.mesh.vertex_count()];
    for (f, tag) in d.mesh.faces().iter().zip(&d.face_tags) {
        for &v in f {
            total[v] += 1;
            if *tag == FaceTag::Tube {
                tube[v] += 1;
            }
        }
    }
    tube.iter()
        .zip(&total)
        .map(|(&t, &all)| {
            if t == 0 {
                0.0
            } else if t == all {
                1.0
            } else {
                0.5
            }
        })
        .collect()
}

/// `∫_{T_ε} |H| dμ` in `ḡ`.
pub fn tube_mean_curvature_integral(d: &DoubledMesh, a: &ConformalAmbient) -> Result<f64> {
    let curvature = surface::mean_curvature(&d.mesh, a)?;
    Ok(curvature.density.iter().zip(tube_vertex_weights(d)).map(|(h, w)| h * w).sum())
}

/// `|T_ε|` in `ḡ`.
pub fn tube_area(d: &DoubledMesh, a: &ConformalAmbient) -> Result<f64> {
    Ok(surface::face_areas(&d.mesh, a)?
        .iter()
        .zip(&d.face_tags)
        .filter(|(_, t)| **t == FaceTag::Tube)
        .map(|(x, _)| x)
        .sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub tube_integral: f64,
    pub tube_area: f64,
    /// `𝒦(z) ℓ(∂Σ)` with `𝒦` measured on the sampled profile.
    pub limit: f64,
    pub error: f64,
    pub d_sigma: f64,
    pub d_m_eps: f64,
    /// `d(Σ) ≤ d(M_ε)` up to twice the largest graph edge.
    pub monotone: bool,
    pub monotone_tolerance: f64,
    pub wu_zheng: GateReport,
    /// `C(2, α) (2 ∫_Σ |H| dμ + ∫_{T_ε} |H| dμ)` when the gates of `M_ε` pass.
    pub doubled_bound: Option<f64>,
    /// `d(M_ε)` does not exceed `doubled_bound`.
    pub doubled_bound_ok: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStudy {
    pub total_abs_curvature: f64,
    pub boundary_length: f64,
    pub sigma_total_h: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Doubles `mesh` for each `ε` in the strictly decreasing `eps_list`.
pub fn convergence_study(
    mesh: &ImmersedMesh,
    a: &ConformalAmbient,
    drop: &TeardropCurve,
    eps_list: &[f64],
    s_res: usize,
    opts: &ReportOptions,
) -> Result<ConvergenceStudy> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("eps list must be positive and strictly decreasing"));
    }
    if mesh.is_closed() {
        return Err(Error::invalid("convergence study needs a surface with boundary"));
    }
    mesh.require_connected()?;
    let total_abs_curvature = drop.total_abs_curvature();
    let boundary_length = surface::boundary_length(mesh, a)?.total;
    let sigma_total_h = surface::total_mean_curvature(mesh, a)?;
    let limit = total_abs_curvature * boundary_length;
    let g_sigma = WeightedGraph::build(mesh, a, &opts.graph)?;
    let d_sigma = g_sigma.diameter().value;

    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let doubled = build_double(mesh, a, eps, drop, s_res)?;
        let tube_integral = tube_mean_curvature_integral(&doubled, a)?;
        let g_m = WeightedGraph::build(&doubled.mesh, a, &opts.graph)?;
        let d_m = g_m.diameter();
        let tolerance = 2.0 * g_sigma.max_weight().max(g_m.max_weight());
        let wu_zheng = gates::wu_zheng_with_diameter(&doubled.mesh, a, None, opts, Some(d_m))?;
        let doubled_bound = wu_zheng
            .c2alpha
            .filter(|_| wu_zheng.star_ok && wu_zheng.starstar_ok)
            .map(|c| c * (2.0 * sigma_total_h + tube_integral));
        rows.push(ConvergenceRow {
            eps,
            tube_integral,
            tube_area: tube_area(&doubled, a)?,
            limit,
            error: (tube_integral - limit).abs(),
            d_sigma,
            d_m_eps: d_m.value,
            monotone: d_sigma <= d_m.value + tolerance,
            monotone_tolerance: tolerance,
            doubled_bound_ok: doubled_bound.map(|b| d_m.value <= b),
            doubled_bound,
            wu_zheng,
        });
    }
    Ok(ConvergenceStudy { total_abs_curvature, boundary_length, sigma_total_h, rows })
}

/// Convenience wrapper over [`geodesy::doubling_monotonicity_check`].
pub fn monotonicity(
    sigma: &ImmersedMesh,
    d: &DoubledMesh,
    a: &ConformalAmbient,
    opts: &geodesy::GraphOptions,
) -> Result<geodesy::Monotonicity> {
    geodesy::doubling_monotonicity_check(sigma, &d.mesh, &d.copy_a, a, opts)
}
