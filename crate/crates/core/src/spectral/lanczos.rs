//! Lanczos iteration for the smallest nonzero eigenvalue of the symmetrised
//! generator, with full reorthogonalisation and explicit restarts.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng;
use crate::walk::WalkGenerator;

/// Tuning of the iterative eigensolver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Krylov basis size before a restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Ritz values are extracted every this many steps.
    pub check_every: usize,
    /// Residual tolerance relative to the Ritz value.
    pub rel_tol: f64,
    /// Seed of the start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_basis: 1500,
            max_restarts: 20,
            check_every: 10,
            rel_tol: 1e-7,
            seed: 0x5eed,
        }
    }
}

/// `S = W^{-1/2} (D - R) W^{-1/2}` in sparse form together with its null
/// vector `sqrt(nu)`.
pub(crate) struct SymOperator<'a> {
    gen: &'a WalkGenerator,
    inv_sqrt_w: Vec<f64>,
    diag: Vec<f64>,
    pub(crate) null: Vec<f64>,
    /// Row-sum norm, an upper bound on the spectral radius.
    pub(crate) norm: f64,
}

impl<'a> SymOperator<'a> {
    pub(crate) fn new(gen: &'a WalkGenerator) -> Self {
        let n = gen.n();
        let w = gen.weights();
        let g = gen.graph();
        let inv_sqrt_w: Vec<f64> = w.iter().map(|x| 1.0 / x.sqrt()).collect();
        let diag: Vec<f64> = (0..n).map(|x| g.degree(x) / w[x]).collect();
        let norm = (0..n)
            .map(|x| diag[x] + g.neighbors(x).map(|(y, r)| r * inv_sqrt_w[x] * inv_sqrt_w[y]).sum::<f64>())
            .fold(0.0, f64::max);
        let null = gen.pi().iter().map(|p| p.sqrt()).collect();
        SymOperator {
            gen,
            inv_sqrt_w,
            diag,
            null,
            norm,
        }
    }

    pub(crate) fn apply(&self, v: &[f64], exec: Execution) -> Vec<f64> {
        let g = self.gen.graph();
        exec.map_range(v.len(), |x| {
            let off: f64 = g
                .neighbor_indices(x)
                .iter()
                .zip(g.neighbor_rates(x))
                .map(|(&y, &r)| r * self.inv_sqrt_w[y as usize] * v[y as usize])
                .sum();
            self.diag[x] * v[x] - self.inv_sqrt_w[x] * off
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = dot(v, v).sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Two passes of classical Gram-Schmidt against the basis and the null vector.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>], null: &[f64]) {
    for _ in 0..2 {
        let c = dot(w, null);
        axpy(w, -c, null);
        let coeffs: Vec<f64> = basis.iter().map(|q| dot(q, w)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            axpy(w, -c, q);
        }
    }
}

fn random_vector(rng: &mut rng::Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
pub(crate) fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    let tiny = f64::MIN_POSITIVE.sqrt();
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        q = alpha[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -tiny;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by bisection.
pub(crate) fn tridiag_smallest(alpha: &[f64], beta: &[f64]) -> f64 {
    let m = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < m { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if sturm_count(alpha, beta, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector of the tridiagonal matrix for eigenvalue `theta`, by inverse
/// iteration with a partially pivoted LU factorisation.
pub(crate) fn tridiag_eigenvector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let m = alpha.len();
    if m == 1 {
        return vec![1.0];
    }
    let scale = alpha.iter().map(|a| a.abs()).chain(beta.iter().map(|b| b.abs())).fold(0.0, f64::max);
    let eps = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    // rows of U have up to three nonzeros: u0 (diag), u1, u2
    let mut u0 = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    let mut u2 = vec![0.0; m];
    let mut l = vec![0.0; m];
    let mut swapped = vec![false; m];
    let mut cur = [alpha[0] - theta, beta[0], 0.0];
    for i in 0..m - 1 {
        let next = [beta[i], alpha[i + 1] - theta, if i + 2 < m { beta[i + 1] } else { 0.0 }];
        let (piv, other, swap) = if next[0].abs() > cur[0].abs() { (next, cur, true) } else { (cur, next, false) };
        let p = if piv[0] == 0.0 { eps } else { piv[0] };
        swapped[i] = swap;
        u0[i] = p;
        u1[i] = piv[1];
        u2[i] = piv[2];
        let f = other[0] / p;
        l[i] = f;
        cur = [other[1] - f * piv[1], other[2] - f * piv[2], 0.0];
    }
    u0[m - 1] = if cur[0] == 0.0 { eps } else { cur[0] };
    let mut y = vec![1.0; m];
    for _ in 0..3 {
        // forward elimination
        for i in 0..m - 1 {
            if swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= l[i] * y[i];
        }
        // back substitution
        for i in (0..m).rev() {
            let mut s = y[i];
            if i + 1 < m {
                s -= u1[i] * y[i + 1];
            }
            if i + 2 < m {
                s -= u2[i] * y[i + 2];
            }
            y[i] = s / u0[i];
        }
        normalize(&mut y);
    }
    y
}

/// Result of an iterative solve.
pub(crate) struct LanczosResult {
    pub value: f64,
    pub vector: Vec<f64>,
    #[allow(dead_code)] // read by tests
    pub residual: f64,
}

/// Smallest eigenpair of `S` on the orthogonal complement of its null vector.
pub(crate) fn smallest_nonnull(op: &SymOperator, opts: &LanczosOptions, exec: Execution) -> Result<LanczosResult> {
    let n = op.null.len();
    let target = n - 1;
    let mut rng = rng::rng_from_seed(opts.seed);
    let mut start = random_vector(&mut rng, n);
    orthogonalize(&mut start, &[], &op.null);
    normalize(&mut start);
    let invariant_tol = 1e-13 * op.norm;
    let tol = |theta: f64| (opts.rel_tol * theta.abs()).max(1e-12 * op.norm);
    let mut last = None;
    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        loop {
            let j = basis.len() - 1;
            let mut w = op.apply(&basis[j], exec);
            let a = dot(&basis[j], &w);
            axpy(&mut w, -a, &basis[j]);
            if j > 0 {
                axpy(&mut w, -beta[j - 1], &basis[j - 1]);
            }
            orthogonalize(&mut w, &basis, &op.null);
            let mut b = normalize(&mut w);
            alpha.push(a);
            let full = basis.len() >= target;
            let at_cap = basis.len() >= opts.max_basis;
            let mut fresh = None;
            if b <= invariant_tol && !full {
                let mut v = random_vector(&mut rng, n);
                orthogonalize(&mut v, &basis, &op.null);
                if normalize(&mut v) > 1e-8 {
                    fresh = Some(v);
                }
                b = 0.0;
            }
            let check = full || at_cap || (fresh.is_none() && b == 0.0) || alpha.len().is_multiple_of(opts.check_every);
            if check {
                let theta = tridiag_smallest(&alpha, &beta);
                let y = tridiag_eigenvector(&alpha, &beta, theta);
                let residual = b * y[y.len() - 1].abs();
                let mut ritz = vec![0.0; n];
                if residual <= tol(theta) || full || at_cap || (fresh.is_none() && b == 0.0) {
                    for (q, c) in basis.iter().zip(&y) {
                        axpy(&mut ritz, *c, q);
                    }
                    orthogonalize(&mut ritz, &[], &op.null);
                    normalize(&mut ritz);
                }
                if residual <= tol(theta) || full || (fresh.is_none() && b == 0.0) {
                    let sv = op.apply(&ritz, exec);
                    let value = dot(&ritz, &sv);
                    let res: f64 = sv.iter().zip(&ritz).map(|(s, v)| (s - value * v).powi(2)).sum::<f64>().sqrt();
                    return Ok(LanczosResult {
                        value,
                        vector: ritz,
                        residual: res,
                    });
                }
                if at_cap {
                    last = Some((theta, residual));
                    start = ritz;
                    break;
                }
            }
            beta.push(b);
            basis.push(fresh.unwrap_or(w));
        }
    }
    let (theta, residual) = last.unwrap_or((f64::NAN, f64::NAN));
    Err(Error::NotConverged(format!(
        "Lanczos stopped after {} restarts: Ritz value {theta:e}, residual {residual:e}",
        opts.max_restarts
    )))
}
