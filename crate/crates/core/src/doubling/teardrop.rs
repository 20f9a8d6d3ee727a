//! Planar unit-speed profile curves built from straight and circular pieces.

use std::f64::consts::PI;

use nalgebra::Vector2;
use serde::Serialize;

use crate::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Samples allotted to each piece never drop below this.
const MIN_SAMPLES_PER_PIECE: usize = 4;

/// Newton iterations allowed for the closure solve.
const MAX_SHOOTING_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Piece {
    Line {
        length: f64,
    },
    /// Circular arc with signed turning angle (positive turns left).
    Arc {
        radius: f64,
        turn: f64,
    },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Line { length } => length,
            Piece::Arc { radius, turn } => radius * turn.abs(),
        }
    }

    pub fn curvature(&self) -> f64 {
        match *self {
            Piece::Line { .. } => 0.0,
            Piece::Arc { radius, turn } => turn.signum() / radius,
        }
    }

    pub fn turn(&self) -> f64 {
        match *self {
            Piece::Line { .. } => 0.0,
            Piece::Arc { turn, .. } => turn,
        }
    }

    fn scaled(&self, f: f64) -> Piece {
        match *self {
            Piece::Line { length } => Piece::Line { length: length * f },
            Piece::Arc { radius, turn } => Piece::Arc { radius: radius * f, turn },
        }
    }

    /// Position and heading after arclength `s` from `(p, heading)`.
    fn advance(&self, p: Vec2, heading: f64, s: f64) -> (Vec2, f64) {
        let k = self.curvature();
        if k == 0.0 {
            (p + Vec2::new(heading.cos(), heading.sin()) * s, heading)
        } else {
            let h = heading + k * s;
            (p + Vec2::new(h.sin() - heading.sin(), heading.cos() - h.cos()) / k, h)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub s: f64,
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    /// Signed curvature; at a breakpoint the sample is repeated with the
    /// curvature of each adjacent piece.
    pub kappa: f64,
}

impl CurveSample {
    pub fn point(&self) -> Vec2 {
        Vec2::new(self.point[0], self.point[1])
    }

    pub fn tangent(&self) -> Vec2 {
        Vec2::new(self.tangent[0], self.tangent[1])
    }
}

/// Piecewise arc-and-segment curve starting at the origin with tangent `+x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCurve {
    pub pieces: Vec<Piece>,
    pub samples: Vec<CurveSample>,
    /// Total length `b`.
    pub length: f64,
}

/// The closed drop-shaped profile of the doubling tube.
pub type TeardropCurve = ProfileCurve;

impl ProfileCurve {
    pub fn from_pieces(pieces: Vec<Piece>, n_samples: usize) -> Result<Self> {
        if pieces.iter().any(|p| !(p.length() > 0.0 && p.length().is_finite())) {
            return Err(Error::Construction("profile pieces need positive finite lengths".into()));
        }
        let length = pieces.iter().map(Piece::length).sum();
        let counts = allot_samples(&pieces, length, n_samples);
        let mut samples = Vec::with_capacity(n_samples + 2 * pieces.len());
        let (mut p, mut heading, mut s0) = (Vec2::zeros(), 0.0, 0.0);
        for (piece, &count) in pieces.iter().zip(&counts) {
            let len = piece.length();
            for j in 0..=count {
                let ds = if j == count { len } else { len * j as f64 / count as f64 };
                let (q, h) = piece.advance(p, heading, ds);
                samples.push(CurveSample {
                    s: s0 + ds,
                    point: [q.x, q.y],
                    tangent: [h.cos(), h.sin()],
                    kappa: piece.curvature(),
                });
            }
            let (q, h) = piece.advance(p, heading, len);
            p = q;
            heading = h;
            s0 += len;
        }
        Ok(ProfileCurve { pieces, samples, length })
    }

    /// Circle of radius `r` traversed counterclockwise from the origin.
    pub fn circle(radius: f64, n_samples: usize) -> Result<Self> {
        ProfileCurve::from_pieces(vec![Piece::Arc { radius, turn: PI }, Piece::Arc { radius, turn: PI }], n_samples)
    }

    /// Open half circle of radius `r`.
    pub fn semicircle(radius: f64, n_samples: usize) -> Result<Self> {
        ProfileCurve::from_pieces(vec![Piece::Arc { radius, turn: PI }], n_samples)
    }

    /// `∫|κ| ds` by trapezoid quadrature over the samples.
    pub fn total_abs_curvature(&self) -> f64 {
        self.samples.windows(2).map(|w| 0.5 * (w[0].kappa.abs() + w[1].kappa.abs()) * (w[1].s - w[0].s)).sum()
    }

    /// `∫κ ds` by trapezoid quadrature over the samples.
    pub fn signed_turning(&self) -> f64 {
        self.samples.windows(2).map(|w| 0.5 * (w[0].kappa + w[1].kappa) * (w[1].s - w[0].s)).sum()
    }

    /// Total turning of the tangent measured from sample tangents alone.
    pub fn tangent_turning(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].tangent(), w[1].tangent());
                (a.x * b.y - a.y * b.x).atan2(a.dot(&b))
            })
            .sum()
    }

    /// Exact `Σ |turn|` of the pieces.
    pub fn analytic_total_abs_curvature(&self) -> f64 {
        self.pieces.iter().map(|p| p.turn().abs()).sum()
    }

    pub fn start(&self) -> Vec2 {
        self.samples[0].point()
    }

    pub fn end(&self) -> Vec2 {
        self.samples[self.samples.len() - 1].point()
    }

    /// Distinct-arclength samples, suitable as tube cross-section rings.
    pub fn profile(&self) -> Vec<CurveSample> {
        let mut out: Vec<CurveSample> = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            if out.last().is_none_or(|last| s.s > last.s) {
                out.push(*s);
            }
        }
        out
    }

    /// The same curve sampled with `n_samples` segments.
    pub fn resampled(&self, n_samples: usize) -> Result<Self> {
        ProfileCurve::from_pieces(self.pieces.clone(), n_samples)
    }
}

/// Splits `n` samples across pieces by `length/b + |turn|/π`, largest
/// remainder first, with at least [`MIN_SAMPLES_PER_PIECE`] each.
fn allot_samples(pieces: &[Piece], b: f64, n: usize) -> Vec<usize> {
    let weights: Vec<f64> = pieces.iter().map(|p| p.length() / b + p.turn().abs() / PI).collect();
    let total: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&i, &j| (exact[j] - exact[j].floor()).total_cmp(&(exact[i] - exact[i].floor())).then(i.cmp(&j)));
    let mut missing = n.saturating_sub(counts.iter().sum());
    for &i in order.iter().cycle().take(pieces.len() * 2) {
        if missing == 0 {
            break;
        }
        counts[i] += 1;
        missing -= 1;
    }
    counts.iter().map(|&c| c.max(MIN_SAMPLES_PER_PIECE)).collect()
}

fn endpoint(pieces: &[Piece]) -> (Vec2, f64) {
    pieces.iter().fold((Vec2::zeros(), 0.0), |(p, h), piece| piece.advance(p, h, piece.length()))
}

fn drop_pieces(eta: f64, l1: f64, l2: f64) -> [Piece; 4] {
    [
        Piece::Line { length: l1 },
        Piece::Arc { radius: 1.0, turn: PI + 2.0 * eta },
        Piece::Line { length: l2 },
        Piece::Arc { radius: 1.0, turn: -2.0 * eta },
    ]
}

/// Endpoint of the drop for trial straight lengths (of either sign).
fn drop_endpoint(eta: f64, l1: f64, l2: f64) -> Vec2 {
    endpoint(&drop_pieces(eta, l1, l2)).0
}

/// Closed drop: straight lead-out along `+x`, left arc turning `π + 2η`,
/// slant segment, right arc turning `2η` back into the origin with tangent
/// `−x`. Both arcs have unit radius before the curve is scaled to unit
/// maximal distance from the origin; the straight lengths are found by
/// Newton shooting on the endpoint.
pub fn make_teardrop(eta: f64, n_samples: usize) -> Result<TeardropCurve> {
    if !(eta > 0.0 && eta < PI / 4.0) {
        return Err(Error::invalid(format!("eta must lie in (0, π/4), got {eta}")));
    }
    if n_samples < 64 {
        return Err(Error::invalid(format!("need at least 64 samples, got {n_samples}")));
    }
    let mut x = Vec2::new(1.0, 1.0);
    let mut converged = false;
    for _ in 0..MAX_SHOOTING_ITERS {
        let r = drop_endpoint(eta, x.x, x.y);
        let b = x.x.abs() + x.y.abs() + PI + 4.0 * eta;
        if r.norm() <= 1e-12 * b {
            converged = true;
            break;
        }
        let h = 1e-6;
        let j = nalgebra::Matrix2::from_columns(&[
            (drop_endpoint(eta, x.x + h, x.y) - drop_endpoint(eta, x.x - h, x.y)) / (2.0 * h),
            (drop_endpoint(eta, x.x, x.y + h) - drop_endpoint(eta, x.x, x.y - h)) / (2.0 * h),
        ]);
        let step = j.lu().solve(&(-r)).ok_or_else(|| Error::Construction("singular shooting Jacobian".into()))?;
        x += step;
    }
    if !converged || x.x <= 0.0 || x.y <= 0.0 {
        return Err(Error::Construction(format!("teardrop closure did not converge (lengths {}, {})", x.x, x.y)));
    }
    let pieces = drop_pieces(eta, x.x, x.y);
    let b: f64 = pieces.iter().map(Piece::length).sum();
    let residual = endpoint(&pieces).0.norm();
    if residual > 1e-9 * b {
        return Err(Error::Construction(format!("teardrop endpoint residual {residual}")));
    }
    let extent = dense_extent(&pieces);
    let pieces: Vec<Piece> = pieces.iter().map(|p| p.scaled(1.0 / extent)).collect();
    let mut curve = ProfileCurve::from_pieces(pieces, n_samples)?;
    let last = curve.samples.len() - 1;
    curve.samples[last].point = [0.0, 0.0];
    Ok(curve)
}

/// Maximal distance from the origin over a dense evaluation of the pieces.
fn dense_extent(pieces: &[Piece]) -> f64 {
    let (mut p, mut h, mut best) = (Vec2::zeros(), 0.0f64, 0.0f64);
    for piece in pieces {
        let steps = 4096;
        for j in 1..=steps {
            let (q, _) = piece.advance(p, h, piece.length() * j as f64 / steps as f64);
            best = best.max(q.norm());
        }
        (p, h) = piece.advance(p, h, piece.length());
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Closed form with unit radii: `L2 = cot η − tan η`,
    /// `L1 = 2 sin 2η + L2 cos 2η`.
    fn closed_form(eta: f64) -> (f64, f64) {
        let l2 = 1.0 / eta.tan() - eta.tan();
        (2.0 * (2.0 * eta).sin() + l2 * (2.0 * eta).cos(), l2)
    }

    #[test]
    fn shooting_matches_closed_form() {
        for eta in [0.01, 0.05, 0.1, 0.3, 0.7] {
            let c = make_teardrop(eta, 128).unwrap();
            let (l1, l2) = closed_form(eta);
            let scale = c.pieces[1].length() / (PI + 2.0 * eta);
            assert_relative_eq!(c.pieces[0].length() / scale, l1, max_relative = 1e-9);
            assert_relative_eq!(c.pieces[2].length() / scale, l2, max_relative = 1e-9);
        }
    }

    #[test]
    fn teardrop_examples() {
        let c = make_teardrop(0.1, 256).unwrap();
        assert_relative_eq!(c.analytic_total_abs_curvature(), PI + 0.4, epsilon = 1e-12);
        assert_relative_eq!(c.total_abs_curvature(), PI + 0.4, epsilon = 1e-6);
        let c = make_teardrop(0.01, 64).unwrap();
        assert_relative_eq!(c.total_abs_curvature(), PI + 0.04, epsilon = 1e-6);
        assert!((c.end() - c.start()).norm() <= 1e-9 * c.length);
        assert!(make_teardrop(0.0, 128).is_err());
        assert!(make_teardrop(PI / 4.0, 128).is_err());
        assert!(make_teardrop(0.1, 32).is_err());
    }

    #[test]
    fn teardrop_sample_invariants() {
        for eta in [0.02, 0.05, 0.2] {
            let c = make_teardrop(eta, 96).unwrap();
            for s in &c.samples {
                assert!((s.tangent().norm() - 1.0).abs() < 1e-9);
            }
            let (first, last) = (c.samples[0], c.samples[c.samples.len() - 1]);
            assert!((first.tangent() - Vec2::new(1.0, 0.0)).norm() < 1e-6);
            assert!((last.tangent() - Vec2::new(-1.0, 0.0)).norm() < 1e-6);
            let max_extent = c.samples.iter().map(|s| s.point().norm()).fold(0.0, f64::max);
            assert!(max_extent <= 1.0 + 1e-12 && max_extent > 0.99);
            // Consecutive samples are one chord apart at unit speed.
            for w in c.samples.windows(2) {
                let chord = (w[1].point() - w[0].point()).norm();
                assert!(chord <= w[1].s - w[0].s + 1e-12);
            }
        }
    }

    #[test]
    fn helper_curves() {
        let c = ProfileCurve::circle(0.7, 128).unwrap();
        assert_relative_eq!(c.total_abs_curvature(), 2.0 * PI, epsilon = 1e-4);
        assert!(c.end().norm() < 1e-12);
        let s = ProfileCurve::semicircle(2.0, 64).unwrap();
        assert_relative_eq!(s.total_abs_curvature(), PI, epsilon = 1e-4);
        assert_relative_eq!(s.end().y, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn turning_number_forces_curvature_above_pi() {
        for eta in [0.01, 0.1, 0.5] {
            let c = make_teardrop(eta, 128).unwrap();
            // Opposite end tangents: the signed turning is π modulo 2π.
            let turning = c.tangent_turning();
            let reduced = (turning - PI).rem_euclid(2.0 * PI);
            assert!(reduced.min(2.0 * PI - reduced) < 1e-9);
            assert_relative_eq!(c.signed_turning(), turning, epsilon = 1e-9);
            assert!(c.total_abs_curvature() >= turning.abs() - 1e-12);
            assert!(c.total_abs_curvature() >= PI - 1e-3);
        }
    }

    #[test]
    fn profile_drops_repeated_breakpoints() {
        for (eta, n) in [(0.05, 64), (0.3544909767368891, 32)] {
            let c = make_teardrop(eta, 128).unwrap().resampled(n).unwrap();
            let p = c.profile();
            assert_eq!(p.len(), c.samples.len() - (c.pieces.len() - 1));
            assert!(p.windows(2).all(|w| w[1].s > w[0].s));
        }
    }
}
