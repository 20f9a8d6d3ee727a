//! Areas, boundary lengths and mean curvature of an [`ImmersedMesh`] in both
//! the flat metric `δ` and the conformal metric `ḡ = e^{2φ} δ`.
//!
//! Conventions:
//!
//! * `H` is the trace of the second fundamental form, so the unit sphere has
//!   `|H_δ| = 2` with `H_δ` pointing inward.
//! * Under `ḡ`, `H = e^{−2φ}(H_δ − 2(Dφ)^⊥)`, `|·|_ḡ = e^{φ}|·|_δ` and
//!   `dμ = e^{2φ} dμ_δ`, hence `|H|_ḡ dμ = e^{φ} |H_δ − 2(Dφ)^⊥|_δ dμ_δ`.
//! * Face integrals sample `φ` at centroids; vertex integrals sample it at
//!   the vertex.

use rayon::prelude::*;
use serde::Serialize;

use crate::{ConformalAmbient, ImmersedMesh, Result, Vec3};

/// Vertices whose mixed area falls below this fraction of their barycentric
/// area use the barycentric area instead.
pub const MIXED_AREA_FALLBACK_FRACTION: f64 = 1e-6;

fn ensure_in_domain(mesh: &ImmersedMesh, a: &ConformalAmbient) -> Result<()> {
    mesh.positions().iter().try_for_each(|p| a.ensure_contains(p))
}

/// Per-face `ḡ`-areas `e^{2φ(centroid)} A_δ(f)`.
pub fn face_areas(mesh: &ImmersedMesh, a: &ConformalAmbient) -> Result<Vec<f64>> {
    ensure_in_domain(mesh, a)?;
    Ok((0..mesh.face_count())
        .map(|f| {
            let w = a.conformal_factor(&mesh.face_centroid(f));
            w * w * mesh.face_area(f)
        })
        .collect())
}

/// `|Σ|` in `ḡ`.
pub fn area(mesh: &ImmersedMesh, a: &ConformalAmbient) -> Result<f64> {
    Ok(face_areas(mesh, a)?.iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryLength {
    pub total: f64,
    pub per_loop: Vec<f64>,
    /// Set when the mesh has no boundary (total is then zero).
    pub closed: bool,
}

/// `ℓ(∂Σ)` in `ḡ`, summed over all boundary loops.
pub fn boundary_length(mesh: &ImmersedMesh, a: &ConformalAmbient) -> Result<BoundaryLength> {
    let per_loop = (0..mesh.boundary_loops().len())
        .map(|l| a.curve_length(&mesh.loop_positions(l), true))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryLength { total: per_loop.iter().sum(), closed: per_loop.is_empty(), per_loop })
}

/// Per-vertex areas from the mixed Voronoi rule.
#[derive(Debug, Clone)]
pub struct VertexAreas {
    pub areas: Vec<f64>,
    /// Vertices that fell back to the barycentric area.
    pub fallback: Vec<usize>,
}

struct FaceGeometry {
    /// Cotangent of the angle at each corner.
    cot: [f64; 3],
    area: f64,
    /// Mixed-area share of each corner.
    mixed: [f64; 3],
}

fn face_geometry(mesh: &ImmersedMesh, f: usize) -> FaceGeometry {
    let p = mesh.face_corners(f);
    let twice_area = mesh.face_cross(f).norm();
    let area = 0.5 * twice_area;
    let mut cot = [0.0; 3];
    let mut dots = [0.0; 3];
    for i in 0..3 {
        let (u, v) = (p[(i + 1) % 3] - p[i], p[(i + 2) % 3] - p[i]);
        dots[i] = u.dot(&v);
        cot[i] = dots[i] / twice_area;
    }
    let mut mixed = [0.0; 3];
    if let Some(obtuse) = (0..3).find(|&i| dots[i] < 0.0) {
        for (i, m) in mixed.iter_mut().enumerate() {
            *m = if i == obtuse { area / 2.0 } else { area / 4.0 };
        }
    } else {
        for (i, m) in mixed.iter_mut().enumerate() {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let eij = (p[j] - p[i]).norm_squared();
            let eik = (p[k] - p[i]).norm_squared();
            *m = (eij * cot[k] + eik * cot[j]) / 8.0;
        }
    }
    FaceGeometry { cot, area, mixed }
}

pub fn vertex_areas(mesh: &ImmersedMesh) -> VertexAreas {
    let n = mesh.vertex_count();
    let mut mixed = vec![0.0; n];
    let mut bary = vec![0.0; n];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let g = face_geometry(mesh, fi);
        for i in 0..3 {
            mixed[f[i]] += g.mixed[i];
            bary[f[i]] += g.area / 3.0;
        }
    }
    let mut fallback = Vec::new();
    for v in 0..n {
        if !(mixed[v] > MIXED_AREA_FALLBACK_FRACTION * bary[v]) {
            mixed[v] = bary[v];
            fallback.push(v);
        }
    }
    VertexAreas { areas: mixed, fallback }
}

/// Angle-weighted vertex normals (unit length, Euclidean).
pub fn vertex_normals(mesh: &ImmersedMesh) -> Vec<Vec3> {
    let mut acc = vec![Vec3::zeros(); mesh.vertex_count()];
    let mut area_acc = vec![Vec3::zeros(); mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let cross = mesh.face_cross(fi);
        let n = cross.normalize();
        let p = mesh.face_corners(fi);
        for i in 0..3 {
            let (u, v) = (p[(i + 1) % 3] - p[i], p[(i + 2) % 3] - p[i]);
            let angle = u.angle(&v);
            acc[f[i]] += n * angle;
            area_acc[f[i]] += cross;
        }
    }
    acc.iter()
        .zip(&area_acc)
        .map(|(n, fallback)| n.try_normalize(1e-300).or_else(|| fallback.try_normalize(1e-300)).unwrap_or_else(Vec3::z))
        .collect()
}

/// Discrete curvature quantities at every vertex.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    /// Euclidean mean curvature vector at interior vertices: the cotangent
    /// Laplacian of the positions divided by the mixed area, projected on the
    /// vertex normal. `None` on the boundary.
    pub h_delta: Vec<Option<Vec3>>,
    /// `|H|_ḡ = e^{−φ}|H_δ − 2(Dφ)^⊥|_δ` at interior vertices.
    pub h_conf_norm: Vec<Option<f64>>,
    pub normals: Vec<Vec3>,
    /// Euclidean mixed Voronoi areas (all vertices).
    pub mixed_areas: Vec<f64>,
    /// Vertices whose area fell back to the barycentric rule.
    pub fallback_vertices: Vec<usize>,
    /// `e^{φ} |H_δ − 2(Dφ)^⊥|_δ A_mixed`: each interior vertex's share of
    /// `∫|H| dμ` (zero on the boundary).
    pub density: Vec<f64>,
}

/// Unprojected cotangent Laplacian `Σ (cot α + cot β)(x_j − x_i)`, halved.
fn cotan_laplacian(mesh: &ImmersedMesh) -> Vec<Vec3> {
    let mut lap = vec![Vec3::zeros(); mesh.vertex_count()];
    for (fi, f) in mesh.faces().iter().enumerate() {
        let g = face_geometry(mesh, fi);
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let (pi, pj, pk) = (mesh.position(f[i]), mesh.position(f[j]), mesh.position(f[k]));
            // Edge (i, j) is opposite corner k, edge (i, k) opposite corner j.
            lap[f[i]] += (pj - pi) * (0.5 * g.cot[k]) + (pk - pi) * (0.5 * g.cot[j]);
        }
    }
    lap
}

/// Curvature with respect to `ḡ`.
pub fn mean_curvature(mesh: &ImmersedMesh, a: &ConformalAmbient) -> Result<CurvatureField> {
    ensure_in_domain(mesh, a)?;
    let areas = vertex_areas(mesh);
    let normals = vertex_normals(mesh);
    let lap = cotan_laplacian(mesh);
    let per_vertex: Vec<(Option<Vec3>, Option<f64>, f64)> = (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| {
            if mesh.is_boundary_vertex(v) {
                return (None, None, 0.0);
            }
            let n = normals[v];
            let raw = lap[v] / areas.areas[v];
            let h = n * raw.dot(&n);
            let p = mesh.position(v);
            let dphi_perp = n * a.grad_phi(p).dot(&n);
            let flat_norm = (h - dphi_perp * 2.0).norm();
            let ef = a.conformal_factor(p);
            (Some(h), Some(flat_norm / ef), ef * flat_norm * areas.areas[v])
        })
        .collect();
    let mut h_delta = Vec::with_capacity(per_vertex.len());
    let mut h_conf_norm = Vec::with_capacity(per_vertex.len());
    let mut density = Vec::with_capacity(per_vertex.len());
    for (h, hc, d) in per_vertex {
        h_delta.push(h);
        h_conf_norm.push(hc);
        density.push(d);
    }
    Ok(CurvatureField {
        h_delta,
        h_conf_norm,
        normals,
        mixed_areas: areas.areas,
        fallback_vertices: areas.fallback,
        density,
    })
}

/// Curvature with respect to the flat metric.
pub fn mean_curvature_delta(mesh: &ImmersedMesh) -> CurvatureField {
    mean_curvature(mesh, &ConformalAmbient::Euclidean).expect("Euclidean chart contains every finite point")
}

/// `∫_Σ |H| dμ` in `ḡ`, summed over interior vertices.
pub fn total_mean_curvature(mesh: &ImmersedMesh, a: &ConformalAmbient) -> Result<f64> {
    Ok(mean_curvature(mesh, a)?.density.iter().sum())
}
