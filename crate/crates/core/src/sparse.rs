//! Envelope (skyline) `LDLᵀ` factorization of sparse symmetric matrices with
//! reverse Cuthill–McKee ordering. Pivots are unrestricted in sign, so the
//! factorization also yields the inertia.

use sprs::CsMat;

use crate::error::{Error, Result};

/// `y = A x` for a CSR matrix.
pub fn spmv(a: &CsMat<f64>, x: &[f64], y: &mut [f64]) {
    debug_assert!(a.is_csr());
    for (i, row) in a.outer_iterator().enumerate() {
        let mut s = 0.0;
        for (j, v) in row.iter() {
            s += v * x[j];
        }
        y[i] = s;
    }
}

/// `y = |A| |x|`, used in backward-error denominators.
pub fn abs_spmv(a: &CsMat<f64>, x: &[f64], y: &mut [f64]) {
    for (i, row) in a.outer_iterator().enumerate() {
        let mut s = 0.0;
        for (j, v) in row.iter() {
            s += v.abs() * x[j].abs();
        }
        y[i] = s;
    }
}

/// `K − σ M` in CSR form.
pub fn shifted(k: &CsMat<f64>, m: &CsMat<f64>, sigma: f64) -> CsMat<f64> {
    let scaled = m.map(|v| -sigma * v);
    let sum = &k.to_csr() + &scaled.to_csr();
    sum.to_csr()
}

#[derive(Clone, Debug)]
pub struct EnvelopeLdl {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeLdl {
    /// Factors a symmetric matrix. `shift` only labels a failure.
    pub fn factor(a: &CsMat<f64>, shift: f64) -> Result<Self> {
        let a = a.to_csr();
        let n = a.rows();
        let perm: Vec<usize> = if n > 0 {
            let ord = sprs::linalg::reverse_cuthill_mckee(a.view());
            ord.perm.vec()
        } else {
            Vec::new()
        };
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first = vec![0usize; n];
        for new in 0..n {
            let row = a.outer_view(perm[new]).unwrap();
            first[new] = row.indices().iter().map(|&c| inv[c]).filter(|&c| c <= new).min().unwrap_or(new);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        for i in 0..n {
            start.push(acc);
            acc += i - first[i];
        }
        start.push(acc);
        let mut lower = vec![0.0; acc];
        let mut diag = vec![0.0; n];
        let scale = a.diag().iter().fold(0.0f64, |m, v| m.max(v.1.abs())).max(f64::MIN_POSITIVE);
        let mut u = Vec::new();
        for i in 0..n {
            let f = first[i];
            let len = i - f;
            u.clear();
            u.resize(len, 0.0);
            let mut aii = 0.0;
            for (c, v) in a.outer_view(perm[i]).unwrap().iter() {
                let j = inv[c];
                if j < i {
                    u[j - f] += *v;
                } else if j == i {
                    aii += *v;
                }
            }
            for j in f..i {
                let fj = first[j];
                let lo = f.max(fj);
                let lj = &lower[start[j]..start[j + 1]];
                let mut s = u[j - f];
                for k in lo..j {
                    s -= u[k - f] * lj[k - fj];
                }
                u[j - f] = s;
            }
            let row = &mut lower[start[i]..start[i + 1]];
            let mut di = aii;
            for j in f..i {
                let l = u[j - f] / diag[j];
                row[j - f] = l;
                di -= u[j - f] * l;
            }
            if !(di.abs() > 1e-14 * scale) {
                return Err(Error::FactorizationFailure { shift });
            }
            diag[i] = di;
        }
        Ok(EnvelopeLdl { n, perm, first, start, lower, diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries below the diagonal.
    pub fn envelope_size(&self) -> usize {
        self.lower.len()
    }

    /// Number of negative pivots, i.e. of negative eigenvalues of the factored matrix.
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|d| **d < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let f = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let mut s = x[i];
            for (k, l) in row.iter().enumerate() {
                s -= l * x[f + k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let f = self.first[i];
            let xi = x[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, l) in row.iter().enumerate() {
                x[f + k] -= l * xi;
            }
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

/// Number of eigenvalues of `K x = λ M x` below `sigma` (Sylvester's law of inertia).
///
/// Without pivoting a leading minor of `K − σM` can vanish even when the shift
/// is not an eigenvalue; the shift is then nudged by a relative `1e-12`.
pub fn count_below(k: &CsMat<f64>, m: &CsMat<f64>, sigma: f64) -> Result<usize> {
    let mut s = sigma;
    for attempt in 1..=4 {
        match EnvelopeLdl::factor(&shifted(k, m, s), sigma) {
            Ok(f) => return Ok(f.negative_pivots()),
            Err(e) if attempt == 4 => return Err(e),
            Err(_) => s = sigma + attempt as f64 * 1e-12 * sigma.abs().max(1.0),
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use sprs::TriMat;

    fn laplacian_shuffled(n: usize, seed: u64) -> (CsMat<f64>, Vec<usize>) {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut t = TriMat::new((n, n));
        for i in 0..n {
            t.add_triplet(p[i], p[i], 2.0);
            if i + 1 < n {
                t.add_triplet(p[i], p[i + 1], -1.0);
                t.add_triplet(p[i + 1], p[i], -1.0);
            }
        }
        (t.to_csr(), p)
    }

    #[test]
    fn ordering_recovers_narrow_band() {
        let (a, _) = laplacian_shuffled(500, 1);
        let f = EnvelopeLdl::factor(&a, 0.0).unwrap();
        assert!(f.envelope_size() <= 500, "envelope {}", f.envelope_size());
    }

    #[test]
    fn solves_against_dense_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let mut t = TriMat::new((n, n));
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                if rng.random_bool(0.08) {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    t.add_triplet(i, j, v);
                    t.add_triplet(j, i, v);
                    dense[(i, j)] = v;
                    dense[(j, i)] = v;
                }
            }
            // indefinite diagonal
            let d = if i % 3 == 0 { -4.0 } else { 4.0 };
            t.add_triplet(i, i, d);
            dense[(i, i)] = d;
        }
        let a: CsMat<f64> = t.to_csr();
        let f = EnvelopeLdl::factor(&a, 0.0).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = f.solve(&b);
        let mut r = vec![0.0; n];
        spmv(&a, &x, &mut r);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
        let eig = dense.symmetric_eigen();
        let neg = eig.eigenvalues.iter().filter(|v| **v < 0.0).count();
        assert_eq!(f.negative_pivots(), neg);
    }

    #[test]
    fn inertia_counts_eigenvalues_below_shift() {
        // 1D Dirichlet Laplacian, eigenvalues 2 − 2cos(kπ/(n+1))
        let (a, _) = laplacian_shuffled(40, 3);
        let eye: CsMat<f64> = CsMat::eye(40);
        for sigma in [0.1, 1.0, 2.5, 3.9] {
            let exact = (1..=40)
                .filter(|k| 2.0 - 2.0 * (*k as f64 * std::f64::consts::PI / 41.0).cos() < sigma)
                .count();
            assert_eq!(count_below(&a, &eye, sigma).unwrap(), exact);
        }
    }

    #[test]
    fn singular_matrix_fails() {
        let mut t = TriMat::new((2, 2));
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            t.add_triplet(i, j, 1.0);
        }
        let a: CsMat<f64> = t.to_csr();
        assert!(matches!(EnvelopeLdl::factor(&a, 0.5), Err(Error::FactorizationFailure { shift }) if shift == 0.5));
    }
}
