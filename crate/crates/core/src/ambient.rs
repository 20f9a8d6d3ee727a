//! Conformally flat ambient geometries `ḡ = e^{2φ} δ` on a chart `V ⊂ ℝ³`.
//!
//! The four model charts are closed-form: Euclidean space, the Poincaré ball
//! and upper half-space models of hyperbolic space, and the stereographic
//! chart of the unit 3-sphere. [`CustomAmbient`] accepts user callables and is
//! checked against finite differences when constructed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quadrature::GaussLegendre;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientKind {
    Euclidean,
    HyperbolicBall,
    HyperbolicHalfSpace,
    SphereStereographic,
    Custom,
}

impl AmbientKind {
    /// Short CLI name (`e3`, `h3-ball`, `h3-half`, `s3`).
    pub fn cli_name(self) -> &'static str {
        match self {
            AmbientKind::Euclidean => "e3",
            AmbientKind::HyperbolicBall => "h3-ball",
            AmbientKind::HyperbolicHalfSpace => "h3-half",
            AmbientKind::SphereStereographic => "s3",
            AmbientKind::Custom => "custom",
        }
    }
}

type ScalarField = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
type VectorField = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;
type Predicate = Arc<dyn Fn(&Vec3) -> bool + Send + Sync>;

/// User-supplied conformal factor.
#[derive(Clone)]
pub struct CustomAmbient {
    pub name: String,
    pub phi: ScalarField,
    pub grad_phi: VectorField,
    pub domain: Predicate,
    /// Upper bound on sectional curvatures.
    pub k_upper: f64,
    /// Injectivity radius over the region of interest (`f64::INFINITY` allowed).
    pub inj_radius: f64,
}

impl fmt::Debug for CustomAmbient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomAmbient")
            .field("name", &self.name)
            .field("k_upper", &self.k_upper)
            .field("inj_radius", &self.inj_radius)
            .finish_non_exhaustive()
    }
}

/// Relative tolerance for the gradient self-check of custom ambients.
pub const GRADIENT_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum ConformalAmbient {
    Euclidean,
    HyperbolicBall,
    HyperbolicHalfSpace,
    SphereStereographic,
    Custom(Arc<CustomAmbient>),
}

impl ConformalAmbient {
    pub fn from_kind(kind: AmbientKind) -> Result<Self> {
        Ok(match kind {
            AmbientKind::Euclidean => ConformalAmbient::Euclidean,
            AmbientKind::HyperbolicBall => ConformalAmbient::HyperbolicBall,
            AmbientKind::HyperbolicHalfSpace => ConformalAmbient::HyperbolicHalfSpace,
            AmbientKind::SphereStereographic => ConformalAmbient::SphereStereographic,
            AmbientKind::Custom => {
                return Err(Error::Unsupported("custom ambients are built from callables, not by name".into()))
            }
        })
    }

    /// Parses a CLI name (`e3`, `h3-ball`, `h3-half`, `s3`).
    pub fn from_cli_name(name: &str) -> Result<Self> {
        match name {
            "e3" => Ok(ConformalAmbient::Euclidean),
            "h3-ball" => Ok(ConformalAmbient::HyperbolicBall),
            "h3-half" => Ok(ConformalAmbient::HyperbolicHalfSpace),
            "s3" => Ok(ConformalAmbient::SphereStereographic),
            other => Err(Error::invalid(format!("unknown ambient '{other}'"))),
        }
    }

    /// Builds a custom ambient, verifying `grad_phi` against central
    /// differences of `phi` at every probe point inside the domain.
    pub fn custom(custom: CustomAmbient, probes: &[Vec3]) -> Result<Self> {
        if custom.k_upper.is_nan() || custom.inj_radius.is_nan() || custom.inj_radius <= 0.0 {
            return Err(Error::invalid("custom ambient needs finite K and positive injectivity radius"));
        }
        for p in probes.iter().filter(|p| (custom.domain)(p)) {
            let h = 1e-5 * p.norm().max(1.0);
            let analytic = (custom.grad_phi)(p);
            let mut fd = Vec3::zeros();
            for axis in 0..3 {
                let mut e = Vec3::zeros();
                e[axis] = h;
                let (a, b) = (p + e, p - e);
                if !(custom.domain)(&a) || !(custom.domain)(&b) {
                    return Err(Error::invalid("gradient probe too close to the domain boundary"));
                }
                fd[axis] = ((custom.phi)(&a) - (custom.phi)(&b)) / (2.0 * h);
            }
            let err = (analytic - fd).norm() / analytic.norm().max(1e-3);
            if !(err <= GRADIENT_CHECK_TOL) {
                return Err(Error::invalid(format!(
                    "grad_phi of '{}' disagrees with finite differences at {:?} (relative error {err:e})",
                    custom.name,
                    p.as_slice()
                )));
            }
        }
        Ok(ConformalAmbient::Custom(Arc::new(custom)))
    }

    /// The same chart with `φ` replaced by `φ + c`, i.e. `ḡ ↦ e^{2c} ḡ`.
    pub fn shifted(&self, c: f64) -> Self {
        let base = self.clone();
        let base_grad = self.clone();
        let base_dom = self.clone();
        let scale = c.exp();
        ConformalAmbient::Custom(Arc::new(CustomAmbient {
            name: format!("{}+{c}", self.kind().cli_name()),
            phi: Arc::new(move |p| base.phi(p) + c),
            grad_phi: Arc::new(move |p| base_grad.grad_phi(p)),
            domain: Arc::new(move |p| base_dom.contains(p)),
            k_upper: self.k_upper() / (scale * scale),
            inj_radius: self.inj_radius() * scale,
        }))
    }

    pub fn kind(&self) -> AmbientKind {
        match self {
            ConformalAmbient::Euclidean => AmbientKind::Euclidean,
            ConformalAmbient::HyperbolicBall => AmbientKind::HyperbolicBall,
            ConformalAmbient::HyperbolicHalfSpace => AmbientKind::HyperbolicHalfSpace,
            ConformalAmbient::SphereStereographic => AmbientKind::SphereStereographic,
            ConformalAmbient::Custom(_) => AmbientKind::Custom,
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return false;
        }
        match self {
            ConformalAmbient::Euclidean | ConformalAmbient::SphereStereographic => true,
            ConformalAmbient::HyperbolicBall => p.norm_squared() < 1.0,
            ConformalAmbient::HyperbolicHalfSpace => p.z > 0.0,
            ConformalAmbient::Custom(c) => (c.domain)(p),
        }
    }

    pub fn ensure_contains(&self, p: &Vec3) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(p.x, p.y, p.z))
        }
    }

    /// Log-conformal factor. Callers are responsible for `p ∈ V`.
    pub fn phi(&self, p: &Vec3) -> f64 {
        match self {
            ConformalAmbient::Euclidean => 0.0,
            ConformalAmbient::HyperbolicBall => (2.0 / one_minus_r2(p)).ln(),
            ConformalAmbient::HyperbolicHalfSpace => -p.z.ln(),
            ConformalAmbient::SphereStereographic => (2.0 / (1.0 + p.norm_squared())).ln(),
            ConformalAmbient::Custom(c) => (c.phi)(p),
        }
    }

    /// `e^{φ(p)}`, evaluated without a log/exp round trip for the builtins.
    pub fn conformal_factor(&self, p: &Vec3) -> f64 {
        match self {
            ConformalAmbient::Euclidean => 1.0,
            ConformalAmbient::HyperbolicBall => 2.0 / one_minus_r2(p),
            ConformalAmbient::HyperbolicHalfSpace => 1.0 / p.z,
            ConformalAmbient::SphereStereographic => 2.0 / (1.0 + p.norm_squared()),
            ConformalAmbient::Custom(c) => (c.phi)(p).exp(),
        }
    }

    /// Euclidean gradient `Dφ`.
    pub fn grad_phi(&self, p: &Vec3) -> Vec3 {
        match self {
            ConformalAmbient::Euclidean => Vec3::zeros(),
            ConformalAmbient::HyperbolicBall => p * (2.0 / one_minus_r2(p)),
            ConformalAmbient::HyperbolicHalfSpace => Vec3::new(0.0, 0.0, -1.0 / p.z),
            ConformalAmbient::SphereStereographic => p * (-2.0 / (1.0 + p.norm_squared())),
            ConformalAmbient::Custom(c) => (c.grad_phi)(p),
        }
    }

    pub fn k_upper(&self) -> f64 {
        match self {
            ConformalAmbient::Euclidean => 0.0,
            ConformalAmbient::HyperbolicBall | ConformalAmbient::HyperbolicHalfSpace => -1.0,
            ConformalAmbient::SphereStereographic => 1.0,
            ConformalAmbient::Custom(c) => c.k_upper,
        }
    }

    pub fn inj_radius(&self) -> f64 {
        match self {
            ConformalAmbient::SphereStereographic => std::f64::consts::PI,
            ConformalAmbient::Custom(c) => c.inj_radius,
            _ => f64::INFINITY,
        }
    }

    /// `|v|_ḡ = e^{φ(p)} |v|_δ`.
    pub fn conformal_norm(&self, p: &Vec3, v: &Vec3) -> Result<f64> {
        self.ensure_contains(p)?;
        Ok(self.conformal_factor(p) * v.norm())
    }

    /// `ḡ`-length of the straight chart segment `p → q` under `rule`.
    pub fn segment_length(&self, p: &Vec3, q: &Vec3, rule: &GaussLegendre) -> f64 {
        let d = q - p;
        let len = d.norm();
        if len == 0.0 {
            return 0.0;
        }
        len * rule.integrate(|t| self.conformal_factor(&(p + d * t)))
    }

    /// `ḡ`-length of a polyline with the default two-point rule.
    pub fn curve_length(&self, points: &[Vec3], closed: bool) -> Result<f64> {
        self.curve_length_with(points, closed, &GaussLegendre::default())
    }

    pub fn curve_length_with(&self, points: &[Vec3], closed: bool, rule: &GaussLegendre) -> Result<f64> {
        if points.len() < 2 {
            return Err(Error::invalid("polyline needs at least two points"));
        }
        for p in points {
            self.ensure_contains(p)?;
        }
        let n = points.len();
        let segments = if closed { n } else { n - 1 };
        let mut total = 0.0;
        for i in 0..segments {
            let (a, b) = (&points[i], &points[(i + 1) % n]);
            if a == b {
                return Err(Error::invalid(format!("polyline points {i} and {} coincide", (i + 1) % n)));
            }
            total += self.segment_length(a, b, rule);
        }
        Ok(total)
    }

    /// Geodesic distance in `(N, ḡ)` for the model charts.
    pub fn ambient_distance(&self, p: &Vec3, q: &Vec3) -> Result<f64> {
        if let ConformalAmbient::Custom(c) = self {
            return Err(Error::Unsupported(format!("no closed-form distance for custom ambient '{}'", c.name)));
        }
        self.ensure_contains(p)?;
        self.ensure_contains(q)?;
        let chord = (p - q).norm();
        Ok(match self {
            ConformalAmbient::Euclidean => chord,
            // arcosh(1 + x) written as 2 asinh(sqrt(x / 2)) to keep short distances accurate.
            ConformalAmbient::HyperbolicBall => 2.0 * (chord / (one_minus_r2(p) * one_minus_r2(q)).sqrt()).asinh(),
            ConformalAmbient::HyperbolicHalfSpace => 2.0 * (chord / (2.0 * (p.z * q.z).sqrt())).asinh(),
            ConformalAmbient::SphereStereographic => {
                let (a, b) = (inverse_stereographic(p), inverse_stereographic(q));
                let diff = (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
                let sum = (0..4).map(|i| (a[i] + b[i]).powi(2)).sum::<f64>().sqrt();
                2.0 * diff.atan2(sum)
            }
            ConformalAmbient::Custom(_) => unreachable!(),
        })
    }
}

impl fmt::Display for ConformalAmbient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalAmbient::Custom(c) => write!(f, "custom:{}", c.name),
            other => f.write_str(other.kind().cli_name()),
        }
    }
}

fn one_minus_r2(p: &Vec3) -> f64 {
    let r = p.norm();
    (1.0 - r) * (1.0 + r)
}

/// Inverse stereographic projection `ℝ³ → S³ ⊂ ℝ⁴` from the north pole.
pub fn inverse_stereographic(p: &Vec3) -> [f64; 4] {
    let r2 = p.norm_squared();
    let s = 1.0 + r2;
    [2.0 * p.x / s, 2.0 * p.y / s, 2.0 * p.z / s, (r2 - 1.0) / s]
}
