//! Direct solvers for the structured linear systems produced by Newton's
//! method: tridiagonal (1D) and symmetric banded (2D five-point Jacobians).

use crate::error::{Error, Result};

/// Solve a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` couples row `i` to `i - 1` (so `lower[0]` is ignored) and
/// `upper[i]` couples row `i` to `i + 1` (`upper[n - 1]` is ignored).
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::Linalg("tridiagonal bands have inconsistent lengths".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::Linalg("zero pivot in row 0".into()));
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Linalg(format!("zero pivot in row {i}")));
        }
        c[i] = upper[i] / pivot;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// A symmetric matrix with half-bandwidth `bw`, stored by rows of its lower
/// triangle: row `i` holds columns `i - bw ..= i`.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Add `v` to entry `(i, j)` with `j <= i`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && i - j <= self.bw);
        self.data[i * (self.bw + 1) + self.bw + j - i] += v;
    }

    /// Factor as `L D L^T` without pivoting. Succeeds for any matrix whose
    /// leading minors are nonzero; the number of negative pivots equals the
    /// number of negative eigenvalues.
    pub fn factor(mut self) -> Result<BandLdl> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        // c[j - lo] = L_ij * d_j for the row being factored.
        let mut c = vec![0.0; bw];
        let mut negative_pivots = 0;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..i {
                // L_jk for k in lo..j sits at offsets bw + k - j of row j.
                let lj = &self.data[j * w + bw + lo - j..j * w + bw];
                let s = dot(&c[..j - lo], lj);
                c[j - lo] = self.data[i * w + bw + j - i] - s;
            }
            let mut pivot = self.data[i * w + bw];
            for j in lo..i {
                let l = c[j - lo] / self.data[j * w + bw];
                self.data[i * w + bw + j - i] = l;
                pivot -= c[j - lo] * l;
            }
            let scale = self.data[i * w + bw].abs().max(f64::MIN_POSITIVE);
            if !pivot.is_finite() || pivot.abs() <= 1e-14 * scale {
                return Err(Error::Linalg(format!("singular pivot {pivot:e} in row {i}")));
            }
            if pivot < 0.0 {
                negative_pivots += 1;
            }
            self.data[i * w + bw] = pivot;
        }
        Ok(BandLdl {
            n,
            bw,
            data: self.data,
            negative_pivots,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLdl {
    n: usize,
    bw: usize,
    data: Vec<f64>,
    negative_pivots: usize,
}

impl BandLdl {
    /// Number of negative eigenvalues of the factored matrix.
    pub fn negative_pivots(&self) -> usize {
        self.negative_pivots
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        assert_eq!(rhs.len(), n);
        let mut z = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let li = &self.data[i * w + bw + lo - i..i * w + bw];
            z[i] -= dot(li, &z[lo..i]);
        }
        for i in 0..n {
            z[i] /= self.data[i * w + bw];
        }
        for i in (0..n).rev() {
            let lo = i.saturating_sub(bw);
            let xi = z[i];
            let li = &self.data[i * w + bw + lo - i..i * w + bw];
            for (zk, l) in z[lo..i].iter_mut().zip(li) {
                *zk -= l * xi;
            }
        }
        z
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thomas_solves_poisson_1d() {
        // -u'' = 2 on (0,1), u(0) = u(1) = 0 => u = x(1-x), exact for the stencil.
        let n = 11;
        let h = 1.0 / (n - 1) as f64;
        let mut lower = vec![-1.0 / (h * h); n];
        let mut upper = lower.clone();
        let mut diag = vec![2.0 / (h * h); n];
        let mut rhs = vec![2.0; n];
        for i in [0, n - 1] {
            lower[i] = 0.0;
            upper[i] = 0.0;
            diag[i] = 1.0;
            rhs[i] = 0.0;
        }
        let u = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (i, ui) in u.iter().enumerate() {
            let x = i as f64 * h;
            assert_relative_eq!(*ui, x * (1.0 - x), epsilon = 1e-13);
        }
    }

    #[test]
    fn thomas_reports_zero_pivot() {
        let r = solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(r.is_err());
    }

    fn dense_from_band(a: &SymBand) -> Vec<Vec<f64>> {
        let n = a.n;
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(a.bw)..=i {
                let v = a.data[i * (a.bw + 1) + a.bw + j - i];
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }

    fn test_matrix(n: usize, bw: usize) -> SymBand {
        let mut a = SymBand::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 10.0 + (i % 3) as f64);
            for j in i.saturating_sub(bw)..i {
                a.add(
                    i,
                    j,
                    -1.0 / (1.0 + (i - j) as f64) + 0.1 * ((i * 7 + j) % 5) as f64 / 5.0,
                );
            }
        }
        a
    }

    #[test]
    fn band_ldl_matches_dense_product() {
        for (n, bw) in [(1, 0), (5, 1), (30, 4), (57, 9)] {
            let a = test_matrix(n, bw);
            let dense = dense_from_band(&a);
            let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin() + 1.0).collect();
            let ldl = a.factor().unwrap();
            assert_eq!(ldl.negative_pivots(), 0);
            let x = ldl.solve(&b);
            for i in 0..n {
                let ax: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum();
                assert_relative_eq!(ax, b[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn band_ldl_counts_negative_eigenvalues() {
        // diag(-1, 2, -3) is its own LDL^T.
        let mut a = SymBand::zeros(3, 1);
        a.add(0, 0, -1.0);
        a.add(1, 1, 2.0);
        a.add(2, 2, -3.0);
        let ldl = a.factor().unwrap();
        assert_eq!(ldl.negative_pivots(), 2);
        let x = ldl.solve(&[1.0, 1.0, 1.0]);
        assert_relative_eq!(x[0], -1.0);
        assert_relative_eq!(x[1], 0.5);
        assert_relative_eq!(x[2], -1.0 / 3.0);
    }

    #[test]
    fn band_ldl_rejects_singular() {
        let mut a = SymBand::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 1, 1.0);
        assert!(a.factor().is_err());
    }
}
