//! Gauss–Legendre rules on the unit interval.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `order` nodes on `[0, 1]`, exact for polynomials of degree
    /// `2 * order - 1`. Panics if `order == 0`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 1.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.5;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[0, 1]`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

impl Default for GaussLegendre {
    fn default() -> Self {
        GaussLegendre::new(2)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_and_two_point_rules() {
        let g1 = GaussLegendre::new(1);
        assert_eq!(g1.nodes(), &[0.5]);
        assert!((g1.weights()[0] - 1.0).abs() < 1e-15);

        let g2 = GaussLegendre::new(2);
        let off = 0.5 / 3f64.sqrt();
        assert!((g2.nodes()[0] - (0.5 - off)).abs() < 1e-15);
        assert!((g2.nodes()[1] - (0.5 + off)).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=10 {
            let g = GaussLegendre::new(n);
            let wsum: f64 = g.weights().iter().sum();
            assert!((wsum - 1.0).abs() < 1e-14, "order {n}");
            for deg in 0..(2 * n) {
                let exact = 1.0 / (deg as f64 + 1.0);
                let got = g.integrate(|t| t.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "order {n} degree {deg}");
            }
        }
    }
}
