//! Discrete area minimization with fixed boundary, and a distance screen
//! that rules out connected surfaces spanning far-apart boundary curves.

use crate::gates::{check_gates, optimal_alpha, wz_constant};
use crate::sparse::{conjugate_gradient, CsrMatrix};
use crate::{ConformalAmbient, Error, ImmersedMesh, Result, Vec3};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error as ThisError;

/// Minimum face quality (inradius over longest edge) below which a descent
/// is reported as a collapsing neck.
pub const NECK_QUALITY: f64 = 1e-3;

/// Area may grow by at most this relative amount across an accepted step.
pub const AREA_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Step multiplier applied after each rejected trial, in `(0, 1)`.
    pub shrink: f64,
    /// Sufficient-decrease constant of the Armijo test, in `(0, 1)`.
    pub armijo: f64,
    /// Stop once the sup-norm of the normal component of the interior `ḡ`-area
    /// gradient is below this.
    pub grad_tol: f64,
    /// Stop once an accepted step lowers the area by less than this fraction.
    pub rel_area_tol: f64,
    /// Maximum number of step reductions per iteration.
    pub max_backtracks: usize,
    /// Precondition the gradient with the weighted cotangent stiffness matrix.
    pub precondition: bool,
    pub neck_quality: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 500,
            shrink: 0.5,
            armijo: 1e-4,
            grad_tol: 1e-6,
            rel_area_tol: 1e-9,
            max_backtracks: 40,
            precondition: true,
            neck_quality: NECK_QUALITY,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if self.max_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::invalid("iteration limits must be positive"));
        }
        if !unit(self.shrink) || !unit(self.armijo) {
            return Err(Error::invalid("shrink and armijo must lie in (0, 1)"));
        }
        if !(self.grad_tol > 0.0 && self.rel_area_tol > 0.0 && self.neck_quality > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub area: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub mesh: ImmersedMesh,
    /// Entry 0 describes the input; entry `i` the mesh after step `i`.
    pub history: Vec<IterationRecord>,
    /// Whether a tolerance was met before `max_iters`.
    pub converged: bool,
}

impl SolveOutcome {
    pub fn iterations(&self) -> usize {
        self.history.len() - 1
    }

    pub fn final_area(&self) -> f64 {
        self.history.last().expect("history starts with the input").area
    }
}

#[derive(Debug, ThisError)]
pub enum SolveError {
    #[error("solver stalled after {} iterations: no admissible step", .0.iterations())]
    Stalled(Box<SolveOutcome>),
    #[error("neck collapse after {} iterations: face quality fell below threshold", .0.iterations())]
    NeckCollapse(Box<SolveOutcome>),
    #[error(transparent)]
    Input(#[from] Error),
}

impl SolveError {
    /// The last admissible mesh, when the descent got under way.
    pub fn partial(&self) -> Option<&SolveOutcome> {
        match self {
            SolveError::Stalled(o) | SolveError::NeckCollapse(o) => Some(o),
            SolveError::Input(_) => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            SolveError::Stalled(_) => "stalled",
            SolveError::NeckCollapse(_) => "neck-collapse",
            SolveError::Input(e) => e.code(),
        }
    }
}

/// `|Σ|` in `ḡ` as `Σ_f e^{2φ(c_f)} A_δ(f)`, for raw positions.
fn area_of(positions: &[Vec3], faces: &[[usize; 3]], a: &ConformalAmbient) -> f64 {
    let per_face: Vec<f64> = faces
        .par_iter()
        .map(|&[i, j, k]| {
            let (p, q, r) = (positions[i], positions[j], positions[k]);
            let w = a.conformal_factor(&((p + q + r) / 3.0));
            0.5 * w * w * (q - p).cross(&(r - p)).norm()
        })
        .collect();
    per_face.iter().sum()
}

/// Exact gradient of `Σ_f e^{2φ(c_f)} A_δ(f)` with respect to every vertex
/// position, boundary vertices included.
pub fn area_gradient(mesh: &ImmersedMesh, a: &ConformalAmbient) -> Result<Vec<Vec3>> {
    mesh.positions().iter().try_for_each(|p| a.ensure_contains(p))?;
    Ok(gradient_of(mesh.positions(), mesh.faces(), a))
}

fn gradient_of(positions: &[Vec3], faces: &[[usize; 3]], a: &ConformalAmbient) -> Vec<Vec3> {
    let per_face: Vec<[Vec3; 3]> = faces
        .par_iter()
        .map(|f| {
            let p = [positions[f[0]], positions[f[1]], positions[f[2]]];
            let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
            let twice = cross.norm();
            let n = cross / twice;
            let c = (p[0] + p[1] + p[2]) / 3.0;
            let w2 = a.conformal_factor(&c).powi(2);
            let centroid_term = a.grad_phi(&c) * (2.0 * w2 * 0.5 * twice / 3.0);
            std::array::from_fn(|i| {
                let opposite = p[(i + 2) % 3] - p[(i + 1) % 3];
                n.cross(&opposite) * (0.5 * w2) + centroid_term
            })
        })
        .collect();
    let mut grad = vec![Vec3::zeros(); positions.len()];
    for (f, g) in faces.iter().zip(&per_face) {
        for i in 0..3 {
            grad[f[i]] += g[i];
        }
    }
    grad
}

/// Weighted cotangent stiffness on interior vertices (Dirichlet boundary).
fn stiffness(positions: &[Vec3], faces: &[[usize; 3]], a: &ConformalAmbient, slot: &[Option<usize>]) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(faces.len() * 12);
    for f in faces {
        let p = [positions[f[0]], positions[f[1]], positions[f[2]]];
        let w2 = a.conformal_factor(&((p[0] + p[1] + p[2]) / 3.0)).powi(2);
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let (u, v) = (p[i] - p[k], p[j] - p[k]);
            let cot = u.dot(&v) / u.cross(&v).norm();
            let c = 0.5 * w2 * cot;
            let (si, sj) = (slot[f[i]], slot[f[j]]);
            if let Some(si) = si {
                triplets.push((si, si, c));
            }
            if let Some(sj) = sj {
                triplets.push((sj, sj, c));
            }
            if let (Some(si), Some(sj)) = (si, sj) {
                triplets.push((si, sj, -c));
                triplets.push((sj, si, -c));
            }
        }
    }
    CsrMatrix::from_triplets(slot.iter().flatten().count(), triplets)
}

/// Component of the gradient along the area-weighted vertex normals.
fn normal_gradient(positions: &[Vec3], faces: &[[usize; 3]], grad: &[Vec3]) -> Vec<Vec3> {
    let mut normals = vec![Vec3::zeros(); positions.len()];
    for &[i, j, k] in faces {
        let c = (positions[j] - positions[i]).cross(&(positions[k] - positions[i]));
        for v in [i, j, k] {
            normals[v] += c;
        }
    }
    normals
        .iter()
        .zip(grad)
        .map(|(n, g)| {
            let n = n.normalize();
            n * n.dot(g)
        })
        .collect()
}

/// Descent direction along the vertex normals: the preconditioned normal
/// gradient projected back onto the normals, or the negative normal
/// gradient when that fails to descend.
fn search_direction(
    positions: &[Vec3],
    faces: &[[usize; 3]],
    a: &ConformalAmbient,
    interior: &[usize],
    slot: &[Option<usize>],
    gn: &[Vec3],
    precondition: bool,
) -> Vec<Vec3> {
    let steepest = || interior.iter().map(|&v| -gn[v]).collect::<Vec<Vec3>>();
    if !precondition {
        return steepest();
    }
    let m = stiffness(positions, faces, a, slot);
    let mut dir = vec![Vec3::zeros(); interior.len()];
    for c in 0..3 {
        let rhs: Vec<f64> = interior.iter().map(|&v| -gn[v][c]).collect();
        match conjugate_gradient(&m, &rhs, 1e-8, 10 * interior.len().max(100)) {
            Some(x) => dir.iter_mut().zip(x).for_each(|(d, xc)| d[c] = xc),
            None => return steepest(),
        }
    }
    for (d, &v) in dir.iter_mut().zip(interior) {
        let n = gn[v].try_normalize(0.0).unwrap_or_else(Vec3::zeros);
        *d = n * n.dot(d);
    }
    let slope: f64 = interior.iter().zip(&dir).map(|(&v, d)| gn[v].dot(d)).sum();
    if slope < 0.0 {
        dir
    } else {
        steepest()
    }
}

fn admissible(old: &[Vec3], new: &[Vec3], faces: &[[usize; 3]], a: &ConformalAmbient, moved: &[usize]) -> bool {
    if moved.iter().any(|&v| !a.contains(&new[v])) {
        return false;
    }
    faces.par_iter().all(|&[i, j, k]| {
        let before = (old[j] - old[i]).cross(&(old[k] - old[i]));
        let after = (new[j] - new[i]).cross(&(new[k] - new[i]));
        after.dot(&before) > 0.0 && after.norm() > 1e-12 * before.norm()
    })
}

fn sup_norm(grad: &[Vec3], interior: &[usize]) -> f64 {
    interior.iter().map(|&v| grad[v].norm()).fold(0.0, f64::max)
}

/// Descends the `ḡ`-area over interior vertex positions with backtracking
/// (Armijo) line search, keeping boundary vertices fixed.
///
/// Vertices move along their area-weighted normals. The search direction is
/// the normal gradient preconditioned by the weighted cotangent stiffness
/// matrix when `opts.precondition` is set, falling back to the negative
/// normal gradient if the linear solve breaks down. Trial steps that leave
/// the chart domain, flip a face, or collapse one are rejected. The recorded
/// gradient norm is the sup over interior vertices of the normal component.
pub fn minimize_area(
    mesh: &ImmersedMesh,
    a: &ConformalAmbient,
    opts: &SolverOptions,
) -> std::result::Result<SolveOutcome, SolveError> {
    opts.validate()?;
    if mesh.is_closed() {
        return Err(Error::invalid("area minimization needs a fixed boundary").into());
    }
    mesh.positions().iter().try_for_each(|p| a.ensure_contains(p))?;
    let faces = mesh.faces();
    let interior: Vec<usize> = mesh.interior_vertices().collect();
    let mut slot = vec![None; mesh.vertex_count()];
    for (s, &v) in interior.iter().enumerate() {
        slot[v] = Some(s);
    }
    let mut x = mesh.positions().to_vec();
    let mut area = area_of(&x, faces, a);
    let mut grad = normal_gradient(&x, faces, &gradient_of(&x, faces, a));
    let mut history = vec![IterationRecord { area, grad_norm: sup_norm(&grad, &interior), step: 0.0 }];
    let finish = |x: Vec<Vec3>, history: Vec<IterationRecord>, converged: bool| -> Result<SolveOutcome> {
        Ok(SolveOutcome { mesh: mesh.with_positions(x)?, history, converged })
    };
    if interior.is_empty() || history[0].grad_norm <= opts.grad_tol {
        return Ok(finish(x, history, true)?);
    }
    for _ in 0..opts.max_iters {
        let dir = search_direction(&x, faces, a, &interior, &slot, &grad, opts.precondition);
        let slope: f64 = interior.iter().zip(&dir).map(|(&v, d)| grad[v].dot(d)).sum();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let mut trial = x.clone();
            for (&v, d) in interior.iter().zip(&dir) {
                trial[v] += d * t;
            }
            if admissible(&x, &trial, faces, a, &interior) {
                let trial_area = area_of(&trial, faces, a);
                if trial_area <= area + opts.armijo * t * slope {
                    accepted = Some((trial, trial_area));
                    break;
                }
            }
            t *= opts.shrink;
        }
        let Some((next, next_area)) = accepted else {
            let partial = finish(x, history, false)?;
            return Err(SolveError::Stalled(Box::new(partial)));
        };
        let decrease = (area - next_area) / area;
        x = next;
        area = next_area;
        grad = normal_gradient(&x, faces, &gradient_of(&x, faces, a));
        let grad_norm = sup_norm(&grad, &interior);
        history.push(IterationRecord { area, grad_norm, step: t });
        let quality = faces
            .iter()
            .map(|&[i, j, k]| crate::mesh::triangle_quality([&x[i], &x[j], &x[k]]))
            .fold(f64::INFINITY, f64::min);
        if quality < opts.neck_quality {
            let partial = finish(x, history, false)?;
            return Err(SolveError::NeckCollapse(Box::new(partial)));
        }
        if grad_norm <= opts.grad_tol || decrease < opts.rel_area_tol {
            return Ok(finish(x, history, true)?);
        }
    }
    Ok(finish(x, history, false)?)
}

/// Height-to-radius ratio beyond which two coaxial circles of equal radius
/// bound no catenoid: `2u / cosh u` where `coth u = u`.
pub fn catenoid_critical_ratio() -> f64 {
    let u = catenoid_critical_parameter();
    2.0 * u / u.cosh()
}

/// Root of `coth u = u` on `(1, 2)`, by bisection.
pub fn catenoid_critical_parameter() -> f64 {
    let f = |u: f64| 1.0 / u.tanh() - u;
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Neck radius of the stable catenoid `r(z) = c cosh(z / c)` through two
/// coaxial circles of radius `r` at heights `±h/2`, if one exists.
pub fn catenoid_neck_radius(r: f64, h: f64) -> Option<f64> {
    if !(r > 0.0 && h > 0.0) || h / r > catenoid_critical_ratio() {
        return None;
    }
    // Along u = h / (2c), the boundary condition reads h cosh(u) / (2u) = r;
    // the stable branch has u below the critical parameter.
    let g = |u: f64| h * u.cosh() / (2.0 * u) - r;
    let (mut lo, mut hi) = (1e-12_f64, catenoid_critical_parameter());
    if g(hi) > 0.0 {
        return None;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(h / (2.0 * 0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Screen {
    NoConnectedSurface,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDistance {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenVerdict {
    pub component_lengths: Vec<f64>,
    pub total_length: f64,
    pub pair_distances: Vec<PairDistance>,
    /// Largest pairwise minimum distance `D*`.
    pub separation: f64,
    /// `C(2, α) π ℓ(Γ)`.
    pub bound: f64,
    pub verdict: Screen,
    pub alpha: f64,
    pub constant: f64,
    pub area_budget: Option<f64>,
}

/// Exponent and constant for a screen, after gate checks.
fn screen_constant(k: f64, inj: f64, alpha: Option<f64>, area_budget: Option<f64>, strict: bool) -> Result<(f64, f64)> {
    if let Some(b) = area_budget {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid("area budget must be positive and finite"));
        }
    }
    let needs_budget = k > 0.0 || inj.is_finite();
    let area = match area_budget {
        Some(b) => b,
        None if needs_budget => {
            return Err(Error::invalid("this ambient needs an area budget for the gates"));
        }
        None => 0.0,
    };
    match alpha {
        Some(alpha) => {
            let (star, starstar) = check_gates(area, k, inj, alpha, strict);
            if !(star && starstar) {
                return Err(Error::GateViolation(format!("alpha {alpha} fails the gates for area {area}")));
            }
            Ok((alpha, wz_constant(alpha)?))
        }
        None => optimal_alpha(area, k, inj, strict),
    }
}

/// Screen from precomputed totals: the bound `C(2, α) π ℓ` and the verdict
/// for a separation `D*`.
pub fn screen_from_summary(
    total_length: f64,
    separation: f64,
    k: f64,
    inj: f64,
    alpha: Option<f64>,
    area_budget: Option<f64>,
    strict: bool,
) -> Result<(f64, f64, f64, Screen)> {
    if !(total_length > 0.0 && separation >= 0.0) {
        return Err(Error::invalid("length must be positive and separation non-negative"));
    }
    let (alpha, constant) = screen_constant(k, inj, alpha, area_budget, strict)?;
    let bound = constant * std::f64::consts::PI * total_length;
    let verdict = if separation > bound { Screen::NoConnectedSurface } else { Screen::Inconclusive };
    Ok((alpha, constant, bound, verdict))
}

/// Necessary condition for a connected surface spanning closed curves:
/// its intrinsic diameter dominates the ambient distance between any two
/// boundary components, and is itself at most `C(2, α) π ℓ(Γ)` for a
/// minimal surface.
pub fn screen_boundary(
    curves: &[Vec<Vec3>],
    a: &ConformalAmbient,
    alpha: Option<f64>,
    area_budget: Option<f64>,
    strict: bool,
) -> Result<ScreenVerdict> {
    if curves.is_empty() {
        return Err(Error::invalid("no boundary curves"));
    }
    if curves.iter().any(|c| c.len() < 3) {
        return Err(Error::invalid("a closed polyline needs at least 3 points"));
    }
    let component_lengths = curves.iter().map(|c| a.curve_length(c, true)).collect::<Result<Vec<f64>>>()?;
    let mut sorted = component_lengths.clone();
    sorted.sort_by(f64::total_cmp);
    let total_length: f64 = sorted.iter().sum();
    let pairs: Vec<(usize, usize)> =
        (0..curves.len()).flat_map(|i| (i + 1..curves.len()).map(move |j| (i, j))).collect();
    let pair_distances = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut best = f64::INFINITY;
            for p in &curves[i] {
                for q in &curves[j] {
                    best = best.min(a.ambient_distance(p, q)?);
                }
            }
            Ok(PairDistance { i, j, distance: best })
        })
        .collect::<Result<Vec<_>>>()?;
    let separation = pair_distances.iter().map(|p| p.distance).fold(0.0, f64::max);
    let (alpha, constant, bound, verdict) =
        screen_from_summary(total_length, separation, a.k_upper(), a.inj_radius(), alpha, area_budget, strict)?;
    Ok(ScreenVerdict {
        component_lengths,
        total_length,
        pair_distances,
        separation,
        bound,
        verdict,
        alpha,
        constant,
        area_budget,
    })
}

/// Initial spanning surface for boundary curves: concentric shrunken copies
/// of a single loop around its centroid, or a ruled band between two loops
/// with equal point counts.
pub fn spanning_mesh(curves: &[Vec<Vec3>], layers: usize) -> Result<ImmersedMesh> {
    if layers == 0 {
        return Err(Error::invalid("layers must be positive"));
    }
    match curves {
        [lp] => {
            let n = lp.len();
            if n < 3 {
                return Err(Error::invalid("a closed polyline needs at least 3 points"));
            }
            let centroid = lp.iter().fold(Vec3::zeros(), |s, p| s + p) / n as f64;
            let mut positions = Vec::with_capacity(n * layers + 1);
            for l in 0..layers {
                let s = 1.0 - l as f64 / layers as f64;
                positions.extend(lp.iter().map(|p| centroid + (p - centroid) * s));
            }
            let center = positions.len();
            positions.push(centroid);
            let mut faces = band_faces(n, layers);
            let inner = (layers - 1) * n;
            for i in 0..n {
                faces.push([inner + i, inner + (i + 1) % n, center]);
            }
            ImmersedMesh::new(positions, faces)
        }
        [c0, c1] => {
            let n = c0.len();
            if n < 3 || c1.len() != n {
                return Err(Error::invalid("a ruled band needs two loops with the same point count (≥ 3)"));
            }
            let mut positions = Vec::with_capacity(n * (layers + 1));
            for l in 0..=layers {
                let s = l as f64 / layers as f64;
                positions.extend(c0.iter().zip(c1).map(|(p, q)| p * (1.0 - s) + q * s));
            }
            ImmersedMesh::new(positions, band_faces(n, layers + 1))
        }
        _ => Err(Error::Unsupported("spanning surfaces for more than two loops".into())),
    }
}

/// Faces joining `rings` consecutive loops of `n` vertices each.
fn band_faces(n: usize, rings: usize) -> Vec<[usize; 3]> {
    let mut faces = Vec::with_capacity(2 * n * rings.saturating_sub(1));
    for l in 0..rings.saturating_sub(1) {
        let (a, b) = (l * n, (l + 1) * n);
        for i in 0..n {
            let j = (i + 1) % n;
            faces.push([a + i, a + j, b + j]);
            faces.push([a + i, b + j, b + i]);
        }
    }
    faces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::surface::{boundary_length, mean_curvature_delta, total_mean_curvature};
    use crate::AmbientKind;
    use std::f64::consts::PI;

    fn euclid() -> ConformalAmbient {
        ConformalAmbient::from_kind(AmbientKind::Euclidean).unwrap()
    }

    #[test]
    fn critical_ratio_matches_known_value() {
        assert!((catenoid_critical_parameter() - 1.19968).abs() < 1e-5);
        assert!((catenoid_critical_ratio() - 1.32549).abs() < 1e-5);
        let u = catenoid_critical_parameter();
        assert!((1.0 / u.tanh() - u).abs() < 1e-13);
    }

    #[test]
    fn neck_radius_solves_boundary_condition() {
        let c = catenoid_neck_radius(1.0, 1.0).unwrap();
        assert!((c * (0.5 / c).cosh() - 1.0).abs() < 1e-12);
        assert!(c > 0.8 && c < 0.9);
        assert!(catenoid_neck_radius(1.0, 1.4).is_none());
    }

    #[test]
    fn bumpy_disk_flattens() {
        let bumpy = generate::bumpy_disk(1.0, 8, 0.1);
        let out = minimize_area(&bumpy, &euclid(), &SolverOptions::default()).unwrap();
        assert!(out.converged);
        let ell = boundary_length(&out.mesh, &euclid()).unwrap().total;
        assert!(total_mean_curvature(&out.mesh, &euclid()).unwrap() <= 1e-3 * ell);
        for w in out.history.windows(2) {
            assert!(w[1].area <= w[0].area * (1.0 + AREA_SLACK));
        }
        assert!(out.mesh.positions().iter().all(|p| p.z.abs() < 1e-6));
    }

    #[test]
    fn steepest_descent_also_decreases_area() {
        let bumpy = generate::bumpy_disk(1.0, 4, 0.1);
        let opts = SolverOptions { precondition: false, max_iters: 50, ..Default::default() };
        let out = minimize_area(&bumpy, &euclid(), &opts).unwrap();
        assert!(out.final_area() < out.history[0].area);
        for w in out.history.windows(2) {
            assert!(w[1].area <= w[0].area * (1.0 + AREA_SLACK));
        }
    }

    #[test]
    fn catenoid_below_critical_ratio() {
        let cyl = generate::cylinder(1.0, 1.0, 48, 16);
        let out = minimize_area(&cyl, &euclid(), &SolverOptions::default()).unwrap();
        assert!(out.converged);
        let h = mean_curvature_delta(&out.mesh);
        let worst = out.mesh.interior_vertices().map(|v| h.h_delta[v].unwrap().norm()).fold(0.0, f64::max);
        assert!(worst <= 5e-2, "max |H| {worst}");
        let neck = catenoid_neck_radius(1.0, 1.0).unwrap();
        let waist = out
            .mesh
            .positions()
            .iter()
            .filter(|p| p.z.abs() < 1e-9)
            .map(|p| p.x.hypot(p.y))
            .fold(f64::INFINITY, f64::min);
        assert!((waist - neck).abs() < 0.01 * neck, "waist {waist} vs {neck}");
    }

    #[test]
    fn catenoid_beyond_critical_ratio_collapses() {
        let cyl = generate::cylinder(1.0, 1.45, 48, 24);
        let err = minimize_area(&cyl, &euclid(), &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, SolveError::NeckCollapse(_)), "{err}");
        assert!(err.partial().unwrap().mesh.min_face_quality() < NECK_QUALITY);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let a = ConformalAmbient::from_kind(AmbientKind::HyperbolicBall).unwrap();
        let mesh = generate::bumpy_disk(0.5, 4, 0.05);
        let g = area_gradient(&mesh, &a).unwrap();
        let h = 1e-6 * mesh.bounding_box_diagonal();
        for v in mesh.interior_vertices().step_by(5) {
            for c in 0..3 {
                let shift = |s: f64| {
                    let mut x = mesh.positions().to_vec();
                    x[v][c] += s;
                    area_of(&x, mesh.faces(), &a)
                };
                let fd = (shift(h) - shift(-h)) / (2.0 * h);
                assert!((fd - g[v][c]).abs() <= 1e-5 * g[v].norm(), "v {v} c {c}: {fd} vs {}", g[v][c]);
            }
        }
    }

    #[test]
    fn hyperbolic_circle_spans_geodesic_cap() {
        let ball = ConformalAmbient::from_kind(AmbientKind::HyperbolicBall).unwrap();
        let (rho, z0) = (0.5, 0.3);
        let flat = generate::disk(rho, 10).map_positions(|p| p + Vec3::new(0.0, 0.0, z0)).unwrap();
        let out = minimize_area(&flat, &ball, &SolverOptions::default()).unwrap();
        let area = crate::surface::area(&out.mesh, &ball).unwrap();
        assert!(total_mean_curvature(&out.mesh, &ball).unwrap() <= 1e-2 * area);
        let c = (1.0 + rho * rho + z0 * z0) / (2.0 * z0);
        let r = (c * c - 1.0).sqrt();
        for p in out.mesh.positions() {
            assert!(((p - Vec3::new(0.0, 0.0, c)).norm() - r).abs() < 2e-3);
        }
        let bottom = out.mesh.positions().iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        assert!((bottom - (c - r)).abs() < 2e-3);
    }

    #[test]
    fn solver_rejects_bad_input() {
        let bad = SolverOptions { shrink: 1.5, ..Default::default() };
        assert!(matches!(minimize_area(&generate::disk(1.0, 2), &euclid(), &bad), Err(SolveError::Input(_))));
        let closed = minimize_area(&generate::icosphere(1), &euclid(), &SolverOptions::default());
        assert!(matches!(closed, Err(SolveError::Input(_))));
    }

    #[test]
    fn far_circles_admit_no_connected_surface() {
        let c0 = generate::circle(Vec3::zeros(), 1.0, 64);
        let c1 = generate::circle(Vec3::new(1e6, 0.0, 0.0), 1.0, 64);
        let v = screen_boundary(&[c0.clone(), c1.clone()], &euclid(), None, None, false).unwrap();
        assert_eq!(v.verdict, Screen::NoConnectedSurface);
        assert!((v.constant - 3888.0 * PI).abs() < 1e-9 * v.constant);
        assert!((v.separation - (1e6 - 2.0)).abs() < 1e-6);
        let near = generate::circle(Vec3::new(10.0, 0.0, 0.0), 1.0, 64);
        let v = screen_boundary(&[c0.clone(), near], &euclid(), None, None, false).unwrap();
        assert_eq!(v.verdict, Screen::Inconclusive);
        let single = screen_boundary(&[c0], &euclid(), None, None, false).unwrap();
        assert_eq!((single.separation, single.verdict), (0.0, Screen::Inconclusive));
    }

    #[test]
    fn hyperbolic_summary_screens() {
        let (alpha, c, bound, verdict) = screen_from_summary(0.2, 1e5, -1.0, f64::INFINITY, None, None, false).unwrap();
        assert!((alpha - 2.0 / 3.0).abs() < 1e-15);
        assert!((c - 3888.0 * PI).abs() < 1e-9 * c);
        assert!((bound - 7.674e3).abs() < 1.0);
        assert_eq!(verdict, Screen::NoConnectedSurface);
        let (.., verdict) = screen_from_summary(0.2, 1e3, -1.0, f64::INFINITY, None, None, false).unwrap();
        assert_eq!(verdict, Screen::Inconclusive);
    }

    #[test]
    fn sphere_screen_needs_area_budget() {
        let s3 = ConformalAmbient::from_kind(AmbientKind::SphereStereographic).unwrap();
        let c0 = generate::circle(Vec3::zeros(), 0.1, 32);
        let c1 = generate::circle(Vec3::new(0.0, 0.0, 0.5), 0.1, 32);
        let curves = [c0, c1];
        assert!(screen_boundary(&curves, &s3, None, None, false).is_err());
        let v = screen_boundary(&curves, &s3, None, Some(PI / 6.0), false).unwrap();
        assert!((v.alpha - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(v.verdict, Screen::Inconclusive);
    }

    #[test]
    fn spanning_meshes_are_valid() {
        let disk = spanning_mesh(&[generate::circle(Vec3::zeros(), 1.0, 32)], 6).unwrap();
        assert_eq!(disk.euler_characteristic(), 1);
        let band = spanning_mesh(
            &[generate::circle(Vec3::zeros(), 1.0, 32), generate::circle(Vec3::new(0.0, 0.0, 1.0), 1.0, 32)],
            8,
        )
        .unwrap();
        assert_eq!(band.euler_characteristic(), 0);
        assert_eq!(band.boundary_loops().len(), 2);
    }
}
