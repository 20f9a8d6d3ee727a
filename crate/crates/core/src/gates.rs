//! Smallness gates, isoperimetric constants and the evaluated diameter
//! inequalities.
//!
//! All gate conditions are the `m = 2` forms. They are expressed through a
//! single area measure `A`: `2|Σ|` for a surface with boundary, `|M|` for a
//! closed surface, `|supp f|` for the Sobolev inequality. With that measure
//!
//! ```text
//! area gate:    K (1 − α)^{-1} A / π ≤ 1
//! radius gate:  2 ρ₀ ≤ R̄,   ρ₀ = K^{-1/2} asin(K^{1/2} (1 − α)^{-1/2} (A/π)^{1/2})   (K > 0)
//!                           ρ₀ = (1 − α)^{-1/2} (A/π)^{1/2}                          (K ≤ 0)
//! ```
//!
//! Strict mode replaces `≤` with `<`. Values within a relative
//! [`EQUALITY_SLACK`] of the threshold count as equal to it in both modes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geodesy::{self, GraphOptions};
use crate::surface::{self, vertex_areas};
use crate::{ConformalAmbient, Error, ImmersedMesh, Result, Vec3};

/// Relative tolerance that lets non-strict gates hold at exact equality.
pub const EQUALITY_SLACK: f64 = 1e-12;

/// Evaluated constants are capped here and flagged as overflowing.
pub const CONSTANT_CAP: f64 = 1e18;

/// Unconstrained minimizer of `1 / (α² (1 − α))`.
pub const OPTIMAL_ALPHA: f64 = 2.0 / 3.0;

/// Distance below a binding cap used for `α` in strict mode.
pub const STRICT_ALPHA_MARGIN: f64 = 1e-9;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `lhs ≤ rhs` (or `<` when strict), treating values within
/// [`EQUALITY_SLACK`] of `rhs` as equal to it.
fn le(lhs: f64, rhs: f64, strict: bool) -> bool {
    let slack = EQUALITY_SLACK * rhs.abs().max(f64::MIN_POSITIVE);
    if strict {
        lhs < rhs - slack
    } else {
        lhs <= rhs + slack
    }
}

/// `ρ₀` for the area measure `area2`.
pub fn rho0(alpha: f64, area2: f64, k: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(area2 > 0.0) {
        return Err(Error::invalid(format!("area measure must be positive, got {area2}")));
    }
    let base = ((area2 / PI) / (1.0 - alpha)).sqrt();
    if k > 0.0 {
        let arg = k.sqrt() * base;
        if !le(arg, 1.0, false) {
            return Err(Error::GateViolation(format!("area gate fails: K (1 - α)^-1 A / π = {} > 1", arg * arg)));
        }
        Ok(arg.min(1.0).asin() / k.sqrt())
    } else {
        Ok(base)
    }
}

/// Area and radius gates for an arbitrary area measure.
pub fn check_gates_measure(area2: f64, k: f64, inj: f64, alpha: f64, strict: bool) -> (bool, bool) {
    if !(alpha > 0.0 && alpha < 1.0) {
        return (false, false);
    }
    let star = le(k * area2 / (PI * (1.0 - alpha)), 1.0, strict);
    let starstar = star
        && match rho0(alpha, area2.max(f64::MIN_POSITIVE), k) {
            Ok(r) => inj.is_infinite() || le(2.0 * r, inj, strict),
            Err(_) => false,
        };
    (star, starstar)
}

/// Gates for a surface with boundary of area `area` (measure `2|Σ|`).
pub fn check_gates(area: f64, k: f64, inj: f64, alpha: f64, strict: bool) -> (bool, bool) {
    check_gates_measure(2.0 * area, k, inj, alpha, strict)
}

/// `C(2, α) = 576π / (α² (1 − α))` with the overflow flag of the cap.
pub fn wz_constant_flagged(alpha: f64) -> Result<(f64, bool)> {
    check_alpha(alpha)?;
    let c = 576.0 * PI / (alpha * alpha * (1.0 - alpha));
    Ok(if c.is_finite() && c <= CONSTANT_CAP { (c, false) } else { (CONSTANT_CAP, true) })
}

pub fn wz_constant(alpha: f64) -> Result<f64> {
    Ok(wz_constant_flagged(alpha)?.0)
}

/// Volume of the unit `m`-ball.
pub fn unit_ball_volume(m: u32) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / m as f64 * unit_ball_volume(m - 2),
    }
}

/// `c(m, α)`; the `π/2` factor is present when `k ≥ 0`.
pub fn hs_constant(m: u32, alpha: f64, k: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid(format!("dimension must be at least 2, got {m}")));
    }
    check_alpha(alpha)?;
    let mf = m as f64;
    let base = 2f64.powi(m as i32 - 2) / alpha * (1.0 - alpha).powf(-1.0 / mf) * mf / (mf - 1.0)
        * unit_ball_volume(m).powf(-1.0 / mf);
    Ok(if k >= 0.0 { PI / 2.0 * base } else { base })
}

/// Largest `α` allowed by both gates for the measure `area2`.
fn alpha_cap(area2: f64, k: f64, inj: f64) -> f64 {
    let mut cap: f64 = 1.0;
    if k > 0.0 {
        cap = cap.min(1.0 - k * area2 / PI);
        let half = k.sqrt() * inj / 2.0;
        if half < PI / 2.0 {
            cap = cap.min(1.0 - k * area2 / (PI * half.sin().powi(2)));
        }
    } else if inj.is_finite() {
        cap = cap.min(1.0 - 4.0 * area2 / (PI * inj * inj));
    }
    cap
}

/// Minimizes `C(2, α)` subject to the gates for the measure `area2`.
pub fn optimal_alpha_measure(area2: f64, k: f64, inj: f64, strict: bool) -> Result<(f64, f64)> {
    let cap = alpha_cap(area2, k, inj);
    let alpha = if cap > OPTIMAL_ALPHA {
        OPTIMAL_ALPHA
    } else if strict {
        cap - STRICT_ALPHA_MARGIN
    } else {
        cap
    };
    if !(alpha > 0.0) {
        return Err(Error::GateViolation(format!(
            "no admissible alpha: area measure {area2} with K = {k} and injectivity radius {inj}"
        )));
    }
    Ok((alpha, wz_constant(alpha)?))
}

/// [`optimal_alpha_measure`] for a surface with boundary of area `area`.
pub fn optimal_alpha(area: f64, k: f64, inj: f64, strict: bool) -> Result<(f64, f64)> {
    optimal_alpha_measure(2.0 * area, k, inj, strict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub area: f64,
    pub k_upper: f64,
    pub alpha: Option<f64>,
    pub rho0: Option<f64>,
    pub star_ok: bool,
    pub starstar_ok: bool,
    pub strict_mode: bool,
    pub c2alpha: Option<f64>,
    pub total_h: f64,
    pub boundary_len: f64,
    pub diameter: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
    pub diameter_pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportOptions {
    pub strict: bool,
    pub graph: GraphOptions,
}

struct GateOutcome {
    alpha: Option<f64>,
    rho0: Option<f64>,
    star_ok: bool,
    starstar_ok: bool,
    constant: Option<f64>,
    note: Option<String>,
}

fn evaluate_gates(area2: f64, k: f64, inj: f64, alpha: Option<f64>, strict: bool) -> Result<GateOutcome> {
    let alpha = match alpha {
        Some(a) => {
            check_alpha(a)?;
            a
        }
        None => match optimal_alpha_measure(area2, k, inj, strict) {
            Ok((a, _)) => a,
            Err(Error::GateViolation(msg)) => {
                return Ok(GateOutcome {
                    alpha: None,
                    rho0: None,
                    star_ok: false,
                    starstar_ok: false,
                    constant: None,
                    note: Some(format!("not applicable: {msg}")),
                })
            }
            Err(e) => return Err(e),
        },
    };
    let (star_ok, starstar_ok) = check_gates_measure(area2, k, inj, alpha, strict);
    let note = if !star_ok {
        Some("not applicable: area gate fails".to_string())
    } else if !starstar_ok {
        Some("not applicable: injectivity-radius gate fails".to_string())
    } else {
        None
    };
    Ok(GateOutcome {
        alpha: Some(alpha),
        rho0: if star_ok { rho0(alpha, area2, k).ok() } else { None },
        star_ok,
        starstar_ok,
        constant: Some(wz_constant(alpha)?),
        note,
    })
}

fn finish_report(
    area: f64,
    k: f64,
    gates: GateOutcome,
    strict: bool,
    total_h: f64,
    boundary_len: f64,
    diameter: Option<geodesy::Diameter>,
    rhs_of: impl Fn(f64) -> f64,
) -> GateReport {
    let mut report = GateReport {
        area,
        k_upper: k,
        alpha: gates.alpha,
        rho0: gates.rho0,
        star_ok: gates.star_ok,
        starstar_ok: gates.starstar_ok,
        strict_mode: strict,
        c2alpha: gates.constant,
        total_h,
        boundary_len,
        diameter: diameter.map(|d| d.value),
        rhs: None,
        margin: None,
        verdict: Verdict::NotApplicable,
        note: gates.note.clone().unwrap_or_default(),
        diameter_pair: diameter.map(|d| d.pair),
    };
    if gates.note.is_none() {
        let c = gates.constant.expect("constant exists when gates pass");
        let rhs = rhs_of(c);
        report.rhs = Some(rhs);
        if let Some(d) = report.diameter {
            let margin = rhs - d;
            report.margin = Some(margin);
            report.verdict = if margin >= 0.0 { Verdict::Holds } else { Verdict::Violated };
            report.note = if margin >= 0.0 { "inequality holds".into() } else { "inequality violated".into() };
        }
    }
    report
}

/// Evaluates `d(Σ) ≤ C(2, α) [2 ∫_Σ |H| dμ + π ℓ(∂Σ)]` on a connected mesh
/// with boundary. `alpha = None` picks the smallest admissible constant.
pub fn main_inequality_report(
    mesh: &ImmersedMesh,
    a: &ConformalAmbient,
    alpha: Option<f64>,
    opts: &ReportOptions,
) -> Result<GateReport> {
    mesh.require_connected()?;
    let area = surface::area(mesh, a)?;
    let total_h = surface::total_mean_curvature(mesh, a)?;
    let (k, inj) = (a.k_upper(), a.inj_radius());
    if mesh.is_closed() {
        return Ok(GateReport {
            area,
            k_upper: k,
            alpha,
            rho0: None,
            star_ok: false,
            starstar_ok: false,
            strict_mode: opts.strict,
            c2alpha: None,
            total_h,
            boundary_len: 0.0,
            diameter: None,
            rhs: None,
            margin: None,
            verdict: Verdict::NotApplicable,
            note: "not applicable: closed surface; use wu_zheng_check".into(),
            diameter_pair: None,
        });
    }
    let gates = evaluate_gates(2.0 * area, k, inj, alpha, opts.strict)?;
    let boundary_len = surface::boundary_length(mesh, a)?.total;
    let diameter = geodesy::intrinsic_diameter(mesh, a, &opts.graph)?;
    Ok(finish_report(area, k, gates, opts.strict, total_h, boundary_len, Some(diameter), |c| {
        c * (2.0 * total_h + PI * boundary_len)
    }))
}

/// Evaluates `d(M) ≤ C(2, α) ∫_M |H| dμ` on a closed connected mesh.
pub fn wu_zheng_check(
    mesh: &ImmersedMesh,
    a: &ConformalAmbient,
    alpha: Option<f64>,
    opts: &ReportOptions,
) -> Result<GateReport> {
    wu_zheng_with_diameter(mesh, a, alpha, opts, None)
}

/// [`wu_zheng_check`] reusing an already computed diameter of `mesh`.
pub(crate) fn wu_zheng_with_diameter(
    mesh: &ImmersedMesh,
    a: &ConformalAmbient,
    alpha: Option<f64>,
    opts: &ReportOptions,
    diameter: Option<geodesy::Diameter>,
) -> Result<GateReport> {
    if !mesh.is_closed() {
        return Err(Error::invalid("wu_zheng_check needs a closed surface"));
    }
    mesh.require_connected()?;
    let area = surface::area(mesh, a)?;
    let total_h = surface::total_mean_curvature(mesh, a)?;
    let (k, inj) = (a.k_upper(), a.inj_radius());
    let gates = evaluate_gates(area, k, inj, alpha, opts.strict)?;
    let diameter = match diameter {
        Some(d) => Some(d),
        None if gates.note.is_none() => Some(geodesy::intrinsic_diameter(mesh, a, &opts.graph)?),
        None => None,
    };
    Ok(finish_report(area, k, gates, opts.strict, total_h, 0.0, diameter, |c| c * total_h))
}

/// Both sides of the discrete Sobolev inequality
/// `(∫ f² dμ)^{1/2} ≤ c(2, α) ∫ (|∇f| + f |H|) dμ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobolevCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub alpha: f64,
    /// `ḡ`-area of the faces touching the support of `f`.
    pub supp_area: f64,
}

/// Evaluates the Sobolev inequality for a piecewise-linear `f` given by its
/// vertex values. `alpha = None` uses `2/3`.
pub fn hoffman_spruck_check(
    mesh: &ImmersedMesh,
    a: &ConformalAmbient,
    f: &[f64],
    alpha: Option<f64>,
    strict: bool,
) -> Result<SobolevCheck> {
    if f.len() != mesh.vertex_count() {
        return Err(Error::invalid(format!("f has {} values for {} vertices", f.len(), mesh.vertex_count())));
    }
    if let Some(v) = f.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid(format!("f must be finite and non-negative, vertex {v} has {}", f[v])));
    }
    if let Some(v) = (0..f.len()).find(|&v| mesh.is_boundary_vertex(v) && f[v] != 0.0) {
        return Err(Error::invalid(format!("f must vanish on the boundary, vertex {v} has {}", f[v])));
    }
    let alpha = alpha.unwrap_or(OPTIMAL_ALPHA);
    let (k, inj) = (a.k_upper(), a.inj_radius());
    let constant = hs_constant(2, alpha, k)?;

    let face_areas = surface::face_areas(mesh, a)?;
    let supp_area: f64 = mesh
        .faces()
        .iter()
        .zip(&face_areas)
        .filter(|(face, _)| face.iter().any(|&v| f[v] != 0.0))
        .map(|(_, a)| a)
        .sum();
    if supp_area == 0.0 {
        return Ok(SobolevCheck { lhs: 0.0, rhs: 0.0, constant, alpha, supp_area });
    }
    let (star, starstar) = check_gates_measure(supp_area, k, inj, alpha, strict);
    if !(star && starstar) {
        return Err(Error::GateViolation(format!("gates fail for |supp f| = {supp_area}")));
    }

    let curvature = surface::mean_curvature(mesh, a)?;
    let areas = vertex_areas(mesh);
    let lhs = (0..mesh.vertex_count())
        .map(|v| {
            let e = a.conformal_factor(mesh.position(v));
            f[v] * f[v] * e * e * areas.areas[v]
        })
        .sum::<f64>()
        .sqrt();
    let gradient_term: f64 = (0..mesh.face_count())
        .map(|fi| {
            let face = mesh.faces()[fi];
            if face.iter().all(|&v| f[v] == 0.0) {
                return 0.0;
            }
            let e = a.conformal_factor(&mesh.face_centroid(fi));
            e * pl_gradient(mesh, fi, f).norm() * mesh.face_area(fi)
        })
        .sum();
    let curvature_term: f64 = f.iter().zip(&curvature.density).map(|(fv, d)| fv * d).sum();
    Ok(SobolevCheck { lhs, rhs: constant * (gradient_term + curvature_term), constant, alpha, supp_area })
}

/// Euclidean gradient of the linear interpolant of `f` on face `fi`.
pub fn pl_gradient(mesh: &ImmersedMesh, fi: usize, f: &[f64]) -> Vec3 {
    let face = mesh.faces()[fi];
    let p = mesh.face_corners(fi);
    let cross = mesh.face_cross(fi);
    let n = cross.normalize();
    let twice_area = cross.norm();
    (0..3).map(|i| n.cross(&(p[(i + 2) % 3] - p[(i + 1) % 3])) * (f[face[i]] / twice_area)).sum()
}

/// `∫_Σ ⟨x, Dψ(x)⟩ e^{ψ(x)} dμ_δ` by vertex quadrature over mixed areas.
pub fn weighted_gate(mesh: &ImmersedMesh, psi: impl Fn(&Vec3) -> f64, grad_psi: impl Fn(&Vec3) -> Vec3) -> f64 {
    let areas = vertex_areas(mesh);
    mesh.positions().iter().zip(&areas.areas).map(|(x, w)| x.dot(&grad_psi(x)) * psi(x).exp() * w).sum()
}

/// Volume weight `ψ = 3φ` of the stereographic chart of the 3-sphere.
pub fn stereographic_psi(x: &Vec3) -> f64 {
    3.0 * (2.0 / (1.0 + x.norm_squared())).ln()
}

pub fn stereographic_grad_psi(x: &Vec3) -> Vec3 {
    x * (-6.0 / (1.0 + x.norm_squared()))
}
