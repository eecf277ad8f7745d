//! Smallest eigenpairs of sparse symmetric pencils by shift-invert Lanczos, eigenvalue
//! counting, and convergence tables with Richardson extrapolation.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sprs::CsMat;

use crate::error::{Error, Result};
use crate::forms::Pencil;
use crate::mesh::MeshSummary;
use crate::sparse::{abs_spmv, count_below, shifted, spmv, EnvelopeLdl};

pub const DEFAULT_TOL_1D: f64 = 1e-10;
pub const DEFAULT_TOL_2D: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Pencils at most this large are solved densely.
const DENSE_LIMIT: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    /// Maximum number of Lanczos steps (shift-invert applications).
    pub max_iter: usize,
    /// Krylov basis size; chosen from the request when `None`.
    pub ncv: Option<usize>,
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions { tol, seed: DEFAULT_SEED, max_iter: 400, ncv: None }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self::with_tol(DEFAULT_TOL_1D)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `‖Kx − λMx‖ / ‖Mx‖`.
    pub residuals: Vec<f64>,
    /// `‖Kx − λMx‖ / (‖|K||x|‖ + |λ| ‖|M||x|‖)`, the convergence test.
    pub backward_errors: Vec<f64>,
    pub iterations: usize,
    pub restarts: usize,
    pub dof: usize,
    pub shift: f64,
    pub tolerance: f64,
    pub dense: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSummary>,
    /// M-orthonormal eigenvectors on the free degrees of freedom.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectralReport {
    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `index,value,residual` rows.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "value", "residual"]).unwrap();
        for (i, (v, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            w.write_record([i.to_string(), format!("{v:.16e}"), format!("{r:.16e}")]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn matvec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.rows()];
    spmv(a, x, &mut y);
    y
}

/// Shift strictly below the spectrum: a Gershgorin-type guess, lowered until the
/// inertia of `K − σM` is zero, then raised by bisection against `min K_ii/M_ii`.
pub fn choose_shift(k: &CsMat<f64>, m: &CsMat<f64>) -> Result<f64> {
    let n = k.rows();
    let mut hi = f64::INFINITY;
    let mut guess = f64::INFINITY;
    for i in 0..n {
        let (mut kii, mut off) = (0.0, 0.0);
        for (j, v) in k.outer_view(i).unwrap().iter() {
            if j == i {
                kii += v;
            } else {
                off += v.abs();
            }
        }
        let mii = m.get(i, i).copied().unwrap_or(0.0);
        if mii > 0.0 {
            hi = hi.min(kii / mii);
            guess = guess.min((kii - off) / mii);
        }
    }
    if !hi.is_finite() {
        return Err(Error::InvalidArgument("mass matrix has no positive diagonal".into()));
    }
    let mut lo = guess.min(hi);
    lo -= 1e-3 * lo.abs().max(1.0);
    let mut step = lo.abs().max(1.0);
    let mut ok = false;
    for _ in 0..80 {
        match count_below(k, m, lo) {
            Ok(0) => {
                ok = true;
                break;
            }
            _ => {
                lo -= step;
                step *= 2.0;
            }
        }
    }
    if !ok {
        return Err(Error::FactorizationFailure { shift: lo });
    }
    // Bisection in the magnitude of the shift: spectra of singular problems span
    // many orders of magnitude, so halving the interval would stall far below λ₁.
    for _ in 0..60 {
        if hi - lo <= 0.1 * lo.abs().max(hi.abs()) {
            break;
        }
        let mut mid = split_point(lo, hi);
        let mut counted = None;
        for attempt in 0..=3 {
            match count_below(k, m, mid) {
                Ok(c) => {
                    counted = Some(c);
                    break;
                }
                Err(_) if attempt < 3 => mid -= 1e-6 * (hi - lo),
                Err(_) => {}
            }
        }
        match counted {
            Some(0) => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(lo)
}

/// Point between `lo < hi`: zero across a sign change, otherwise the geometric mean
/// (with the smaller magnitude floored at `1e-12` of the larger).
fn split_point(lo: f64, hi: f64) -> f64 {
    if lo < 0.0 && hi > 0.0 {
        0.0
    } else if lo >= 0.0 {
        (lo.max(1e-12 * hi) * hi).sqrt()
    } else {
        -(lo.abs() * hi.abs().max(1e-12 * lo.abs())).sqrt()
    }
}

struct Pair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    backward: f64,
}

fn evaluate(k: &CsMat<f64>, m: &CsMat<f64>, x: Vec<f64>) -> Pair {
    let kx = matvec(k, &x);
    let mx = matvec(m, &x);
    let xmx = dot(&x, &mx);
    let scale = 1.0 / xmx.sqrt();
    let x: Vec<f64> = x.iter().map(|v| v * scale).collect();
    let kx: Vec<f64> = kx.iter().map(|v| v * scale).collect();
    let mx: Vec<f64> = mx.iter().map(|v| v * scale).collect();
    let lambda = dot(&x, &kx);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
    let rn = norm(&r);
    let mut ak = vec![0.0; x.len()];
    let mut am = vec![0.0; x.len()];
    abs_spmv(k, &x, &mut ak);
    abs_spmv(m, &x, &mut am);
    let denom = norm(&ak) + lambda.abs() * norm(&am);
    Pair {
        value: lambda,
        vector: x,
        residual: rn / norm(&mx),
        backward: if denom > 0.0 { rn / denom } else { rn },
    }
}

/// The `count` algebraically smallest eigenpairs with default options for `tol`.
pub fn smallest_eigenpairs(pencil: &Pencil, count: usize, tol: f64) -> Result<SpectralReport> {
    smallest_eigenpairs_with(pencil, count, &SolverOptions::with_tol(tol))
}

pub fn smallest_eigenpairs_with(pencil: &Pencil, count: usize, opts: &SolverOptions) -> Result<SpectralReport> {
    let n = pencil.dof();
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenpairs of a pencil with {n} degrees of freedom"
        )));
    }
    let (k, m) = (pencil.k.to_csr(), pencil.m.to_csr());
    let shift = choose_shift(&k, &m)?;
    if n <= DENSE_LIMIT {
        return dense_solve(&k, &m, count, shift, opts);
    }
    lanczos(&k, &m, count, shift, opts)
}

fn to_dense(a: &CsMat<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.rows(), a.cols());
    for (v, (i, j)) in a.iter() {
        d[(i, j)] += *v;
    }
    d
}

fn dense_solve(k: &CsMat<f64>, m: &CsMat<f64>, count: usize, shift: f64, opts: &SolverOptions) -> Result<SpectralReport> {
    let (kd, md) = (to_dense(k), to_dense(m));
    let chol = md
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(Error::FactorizationFailure { shift })?;
    let c = &linv * &kd * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let lt_inv = linv.transpose();
    let pairs: Vec<Pair> = idx[..count]
        .iter()
        .map(|&i| {
            let y = eig.eigenvectors.column(i);
            let x = &lt_inv * y;
            evaluate(k, m, x.iter().copied().collect())
        })
        .collect();
    Ok(finish(pairs, 0, 0, k.rows(), shift, opts.tol, true))
}

fn finish(mut pairs: Vec<Pair>, iterations: usize, restarts: usize, dof: usize, shift: f64, tol: f64, dense: bool) -> SpectralReport {
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    SpectralReport {
        eigenvalues: pairs.iter().map(|p| p.value).collect(),
        residuals: pairs.iter().map(|p| p.residual).collect(),
        backward_errors: pairs.iter().map(|p| p.backward).collect(),
        iterations,
        restarts,
        dof,
        shift,
        tolerance: tol,
        dense,
        mesh: None,
        eigenvectors: pairs.into_iter().map(|p| p.vector).collect(),
    }
}

/// M-orthogonalizes `w` against the basis (two passes) and returns its M-norm and `M w`.
/// M-orthogonalizes `w` against the basis (twice). Returns the M-norm of the
/// remainder relative to the M-norm of the input, the absolute M-norm, and `M w`.
fn orthogonalize(m: &CsMat<f64>, basis: &[Vec<f64>], mbasis: &[Vec<f64>], w: &mut [f64]) -> (f64, f64, Vec<f64>) {
    let before = dot(w, &matvec(m, w)).max(0.0).sqrt();
    for _ in 0..2 {
        for (v, mv) in basis.iter().zip(mbasis) {
            let c = dot(mv, w);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
        }
    }
    let mw = matvec(m, w);
    let after = dot(w, &mw).max(0.0).sqrt();
    let relative = if before > 0.0 { after / before } else { 0.0 };
    (relative, after, mw)
}

/// One inverse-iteration step on each unconverged Ritz vector, kept when it lowers the
/// backward error. A Ritz vector is a combination of basis vectors, so its small entries
/// carry absolute rounding of order `ε‖x‖∞`; with very large stiffness entries near the
/// boundary (`a = d^β`, `β < 0`, graded meshes) that alone stalls the backward error
/// above the tolerance. The solve recomputes those entries to componentwise accuracy.
fn polish(k: &CsMat<f64>, m: &CsMat<f64>, factor: &EnvelopeLdl, pairs: &mut [Pair]) {
    for i in 0..pairs.len() {
        let mut x = factor.solve(&matvec(m, &pairs[i].vector));
        for j in 0..i {
            let c = dot(&matvec(m, &pairs[j].vector), &x);
            for (xi, vj) in x.iter_mut().zip(&pairs[j].vector) {
                *xi -= c * vj;
            }
        }
        let candidate = evaluate(k, m, x);
        if candidate.backward < pairs[i].backward {
            pairs[i] = candidate;
        }
    }
}

fn lanczos(k: &CsMat<f64>, m: &CsMat<f64>, count: usize, shift: f64, opts: &SolverOptions) -> Result<SpectralReport> {
    let n = k.rows();
    let mut factor = None;
    let mut sigma = shift;
    for attempt in 0..=3 {
        match EnvelopeLdl::factor(&shifted(k, m, sigma), sigma) {
            Ok(f) => {
                factor = Some(f);
                break;
            }
            Err(e) if attempt == 3 => return Err(e),
            Err(_) => sigma -= 1e-3 * sigma.abs().max(1.0),
        }
    }
    let factor = factor.unwrap();
    let ncv = opts.ncv.unwrap_or((2 * count + 10).max(25)).min(n).max(count + 1).min(n);
    let keep = (count + (ncv - count) / 2).min(ncv - 1).max(count);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(ncv);
    let mut mbasis: Vec<Vec<f64>> = Vec::with_capacity(ncv);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(ncv);
    let mut v0 = random(&mut rng);
    let (_, nv, mv) = orthogonalize(m, &[], &[], &mut v0);
    basis.push(v0.iter().map(|x| x / nv).collect());
    mbasis.push(mv.iter().map(|x| x / nv).collect());

    let mut iterations = 0;
    let mut restarts = 0;
    let mut last: Vec<Pair> = Vec::new();
    loop {
        while images.len() < basis.len() {
            if iterations >= opts.max_iter {
                let partial = last.iter().map(|p| p.value).collect();
                return Err(Error::NoConvergence {
                    iterations,
                    converged: last.iter().filter(|p| p.backward <= opts.tol).count(),
                    requested: count,
                    partial,
                });
            }
            let j = images.len();
            let w = factor.solve(&mbasis[j]);
            iterations += 1;
            images.push(w.clone());
            if basis.len() < ncv {
                let mut f = w;
                let (mut rel, mut nf, mut mf) = orthogonalize(m, &basis, &mbasis, &mut f);
                let mut tries = 0;
                while !(rel > 1e-10) && tries < 5 {
                    f = random(&mut rng);
                    (rel, nf, mf) = orthogonalize(m, &basis, &mbasis, &mut f);
                    tries += 1;
                }
                basis.push(f.iter().map(|x| x / nf).collect());
                mbasis.push(mf.iter().map(|x| x / nf).collect());
            }
        }
        let p = basis.len();
        let mut h = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                h[(i, j)] = dot(&mbasis[i], &images[j]);
            }
        }
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]));
        let combine = |cols: &[Vec<f64>], y: nalgebra::DVectorView<f64>| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (c, yc) in cols.iter().zip(y.iter()) {
                for (o, v) in out.iter_mut().zip(c) {
                    *o += yc * v;
                }
            }
            out
        };
        last = order[..count]
            .iter()
            .map(|&i| evaluate(k, m, combine(&basis, eig.eigenvectors.column(i).as_view())))
            .collect();
        if !last.iter().all(|pr| pr.backward <= opts.tol) {
            polish(k, m, &factor, &mut last);
        }
        if last.iter().all(|pr| pr.backward <= opts.tol) {
            return Ok(finish(last, iterations, restarts, n, sigma, opts.tol, false));
        }
        if p < ncv {
            // the whole space is spanned; only rounding is left
            if p == n {
                return Ok(finish(last, iterations, restarts, n, sigma, opts.tol, false));
            }
        }
        // thick restart: leading Ritz vectors plus the continuation direction
        let mut next = images[p - 1].clone();
        let (rel, mut nf, mut mf) = orthogonalize(m, &basis, &mbasis, &mut next);
        if !(rel > 1e-10) {
            next = random(&mut rng);
            (_, nf, mf) = orthogonalize(m, &basis, &mbasis, &mut next);
        }
        let kept: Vec<usize> = order[..keep].to_vec();
        let nb: Vec<Vec<f64>> = kept.iter().map(|&i| combine(&basis, eig.eigenvectors.column(i).as_view())).collect();
        let nmb: Vec<Vec<f64>> = kept.iter().map(|&i| combine(&mbasis, eig.eigenvectors.column(i).as_view())).collect();
        let nim: Vec<Vec<f64>> = kept.iter().map(|&i| combine(&images, eig.eigenvectors.column(i).as_view())).collect();
        basis = nb;
        mbasis = nmb;
        images = nim;
        basis.push(next.iter().map(|x| x / nf).collect());
        mbasis.push(mf.iter().map(|x| x / nf).collect());
        restarts += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: usize,
    /// `λ` is not below the largest computed eigenvalue, so eigenvalues beyond the
    /// computed ones may also lie below it.
    pub lower_bound_only: bool,
}

/// `#{computed eigenvalues ≤ λ}`.
pub fn counting_function(report: &SpectralReport, lambda: f64) -> CountResult {
    let count = report.eigenvalues.iter().filter(|v| **v <= lambda).count();
    let largest = report.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY);
    CountResult {
        count,
        lower_bound_only: !(lambda < largest) && report.eigenvalues.len() < report.dof,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged,
    NonConvergent,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelValue {
    pub level: usize,
    pub dof: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub levels: Vec<LevelValue>,
    /// Observed order from each consecutive triple, `log₂((λ₀−λ₁)/(λ₁−λ₂))`.
    pub rates: Vec<Option<f64>>,
    pub extrapolated: f64,
    pub status: ConvergenceStatus,
}

/// Observed orders and the Richardson limit of a sequence obtained by halving the mesh size.
pub fn extrapolate(values: &[f64]) -> (Vec<Option<f64>>, f64, ConvergenceStatus) {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let diffs: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
    if diffs.iter().all(|d| d.abs() <= 1e-13 * scale) {
        return (vec![None; values.len().saturating_sub(2)], values[0], ConvergenceStatus::Exact);
    }
    let rates: Vec<Option<f64>> = diffs
        .windows(2)
        .map(|w| {
            let r = w[0] / w[1];
            (r.is_finite() && r > 0.0).then(|| r.log2())
        })
        .collect();
    let last = *values.last().unwrap();
    match rates.last().copied().flatten() {
        Some(p) if p > 0.5 => {
            let dl = diffs[diffs.len() - 1];
            (rates, last - dl / (2f64.powf(p) - 1.0), ConvergenceStatus::Converged)
        }
        _ => (rates, last, ConvergenceStatus::NonConvergent),
    }
}

/// Smallest eigenvalue on `levels` nested meshes; `build(level)` returns the pencil of a level.
pub fn refine_and_extrapolate<F>(levels: usize, mut build: F, opts: &SolverOptions) -> Result<ConvergenceTable>
where
    F: FnMut(usize) -> Result<Pencil>,
{
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 levels, got {levels}")));
    }
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let p = build(level)?;
        let rep = smallest_eigenpairs_with(&p, 1, opts)?;
        rows.push(LevelValue { level, dof: p.dof(), value: rep.smallest() });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (rates, extrapolated, status) = extrapolate(&values);
    Ok(ConvergenceTable { levels: rows, rates, extrapolated, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::coef;
    use crate::forms::{assemble_pencil, AssemblyOptions, FormSpec};
    use crate::geometry::Domain;
    use crate::mesh::{build_mesh_1d, Mesh};
    use approx::assert_relative_eq;
    use sprs::TriMat;
    use std::f64::consts::PI;

    fn diag(v: &[f64]) -> CsMat<f64> {
        let mut t = TriMat::new((v.len(), v.len()));
        for (i, x) in v.iter().enumerate() {
            t.add_triplet(i, i, *x);
        }
        t.to_csr()
    }

    fn laplacian(n: usize) -> Pencil {
        let mesh = Mesh::OneD(build_mesh_1d(&Domain::interval(0.0, 1.0).unwrap(), n, 1.0).unwrap());
        assemble_pencil(&mesh, &FormSpec::laplacian(), &coef("1"), &AssemblyOptions::default()).unwrap()
    }

    #[test]
    fn identity_pencils() {
        for n in [3, 250] {
            let p = Pencil::from_matrices(CsMat::eye(n), CsMat::eye(n));
            let r = smallest_eigenpairs(&p, 2, 1e-10).unwrap();
            for v in &r.eigenvalues {
                assert_relative_eq!(*v, 1.0, epsilon = 1e-12);
            }
            assert!(r.shift < 1.0);
        }
        let p = Pencil::from_matrices(diag(&[3.0, 1.0, 2.0]), CsMat::eye(3));
        let r = smallest_eigenpairs(&p, 2, 1e-10).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.eigenvalues[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn lanczos_on_a_large_diagonal() {
        let v: Vec<f64> = (0..1000).map(|i| 1.0 + (i as f64) * 0.01).rev().collect();
        let p = Pencil::from_matrices(diag(&v), CsMat::eye(1000));
        let r = smallest_eigenpairs(&p, 3, 1e-12).unwrap();
        assert!(!r.dense);
        assert_relative_eq!(r.eigenvalues[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(r.eigenvalues[2], 1.02, epsilon = 1e-10);
    }

    #[test]
    fn dirichlet_laplacian_spectrum() {
        let p = laplacian(2000);
        let r = smallest_eigenpairs(&p, 5, DEFAULT_TOL_1D).unwrap();
        for (k, v) in r.eigenvalues.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            assert!((v - exact).abs() <= 1e-4 * exact, "{v} vs {exact}");
        }
        assert!(r.eigenvalues[0] > r.shift);
        // M-orthonormality
        for i in 0..5 {
            for j in 0..5 {
                let mx = matvec(&p.m, &r.eigenvectors[j]);
                let g = dot(&r.eigenvectors[i], &mx);
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-8);
            }
        }
        assert!(r.backward_errors.iter().all(|b| *b <= DEFAULT_TOL_1D));
    }

    #[test]
    fn matches_dense_generalized_solve() {
        let mesh = Mesh::OneD(build_mesh_1d(&Domain::interval(0.0, 1.0).unwrap(), 400, 0.97).unwrap());
        let p = assemble_pencil(&mesh, &FormSpec::power(0.5), &coef("d^-1.5"), &AssemblyOptions::default()).unwrap();
        let r = smallest_eigenpairs(&p, 3, 1e-10).unwrap();
        let (k, m) = (to_dense(&p.k), to_dense(&p.m));
        let l = m.cholesky().unwrap().l();
        let li = l.try_inverse().unwrap();
        let c = &li * k * li.transpose();
        let mut e: Vec<f64> = SymmetricEigen::new((&c + c.transpose()) * 0.5).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        for i in 0..3 {
            assert_relative_eq!(r.eigenvalues[i], e[i], max_relative = 1e-9);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = laplacian(600);
        let a = smallest_eigenpairs(&p, 3, 1e-10).unwrap();
        let b = smallest_eigenpairs(&p, 3, 1e-10).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
    }

    #[test]
    fn counting() {
        let rep = SpectralReport {
            eigenvalues: vec![1.0, 2.0, 3.0],
            residuals: vec![0.0; 3],
            backward_errors: vec![0.0; 3],
            iterations: 0,
            restarts: 0,
            dof: 10,
            shift: 0.0,
            tolerance: 1e-10,
            dense: true,
            mesh: None,
            eigenvectors: vec![],
        };
        assert_eq!(counting_function(&rep, 2.5).count, 2);
        assert!(!counting_function(&rep, 2.5).lower_bound_only);
        assert_eq!(counting_function(&rep, 0.0).count, 0);
        assert_eq!(counting_function(&rep, 3.0).count, 3);
        assert!(counting_function(&rep, 3.0).lower_bound_only);
    }

    #[test]
    fn richardson_on_laplacian() {
        let t = refine_and_extrapolate(4, |l| Ok(laplacian(128 << l)), &SolverOptions::default()).unwrap();
        assert_eq!(t.status, ConvergenceStatus::Converged);
        for r in t.rates.iter().flatten() {
            assert!((1.9..=2.1).contains(r), "rate {r}");
        }
        assert!((t.extrapolated - PI * PI).abs() <= 1e-6 * PI * PI);
    }

    #[test]
    fn identity_recipe_is_exact() {
        let t = refine_and_extrapolate(3, |_| Ok(Pencil::from_matrices(CsMat::eye(4), CsMat::eye(4))), &SolverOptions::default())
            .unwrap();
        assert_eq!(t.status, ConvergenceStatus::Exact);
        assert_eq!(t.extrapolated, 1.0);
        assert!(t.rates.iter().all(|r| r.is_none()));
    }

    #[test]
    fn rejects_bad_requests() {
        let p = laplacian(4);
        assert!(matches!(smallest_eigenpairs(&p, 0, 1e-10), Err(Error::InvalidArgument(_))));
        assert!(matches!(smallest_eigenpairs(&p, 4, 1e-10), Err(Error::InvalidArgument(_))));
    }
}
