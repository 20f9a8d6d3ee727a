//! Compressed sparse rows and a Jacobi-preconditioned conjugate gradient.

#[derive(Debug, Clone)]
pub(crate) struct CsrMatrix {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n × n` matrix from triplets, summing duplicates.
    pub(crate) fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut offsets = vec![0; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("duplicate follows an entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        CsrMatrix { n, offsets, cols, vals }
    }

    pub(crate) fn mul(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.n) {
            *out = (self.offsets[r]..self.offsets[r + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum();
        }
    }

    pub(crate) fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| (self.offsets[r]..self.offsets[r + 1]).find(|&k| self.cols[k] == r).map_or(0.0, |k| self.vals[k]))
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A`. Returns `None` on
/// breakdown (non-positive curvature or diagonal) or when `max_iter` is
/// exhausted before the residual falls below `tol · |b|`.
pub(crate) fn conjugate_gradient(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let n = b.len();
    let diag = a.diagonal();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return None;
    }
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Some(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return None;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol * b_norm {
            return Some(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (1, 1, 5.0)]);
        let mut y = vec![0.0; 2];
        m.mul(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![4.0, 7.0]);
        assert_eq!(m.diagonal(), vec![4.0, 5.0]);
    }

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a.mul(&exact, &mut b);
        let x = conjugate_gradient(&a, &b, 1e-13, 200).unwrap();
        for (xi, ei) in x.iter().zip(&exact) {
            assert!((xi - ei).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (0, 1, 3.0), (1, 0, 3.0), (1, 1, 1.0)]);
        assert!(conjugate_gradient(&a, &[1.0, -1.0], 1e-12, 10).is_none());
    }
}
