//! Dense eigendecomposition, heat kernels and the exact uniform mixing time.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::walk::WalkGenerator;

/// Dense symmetrised generator `S = W^{-1/2} (D - R) W^{-1/2}`.
pub fn symmetrized_matrix(gen: &WalkGenerator) -> DMatrix<f64> {
    let n = gen.n();
    let w = gen.weights();
    let g = gen.graph();
    let mut s = DMatrix::zeros(n, n);
    for x in 0..n {
        s[(x, x)] = g.degree(x) / w[x];
        for (y, r) in g.neighbors(x) {
            s[(x, y)] = -r / (w[x] * w[y]).sqrt();
        }
    }
    s
}

/// Nonzero spectrum of `S`: eigenvalues `lambda_1 <= ... <= lambda_{n-1}`
/// with orthonormal eigenvectors (columns), all orthogonal to `sqrt(nu)`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub sqrt_pi: Vec<f64>,
    /// Infinity norm of `S`.
    pub norm: f64,
}

impl Eigensystem {
    /// Diagonalise `S + sigma u u^T` with `u = sqrt(nu)`, which moves the null
    /// eigenvalue to the top of the spectrum, and drop that top pair.
    pub fn new(gen: &WalkGenerator) -> Self {
        let n = gen.n();
        let mut s = symmetrized_matrix(gen);
        let norm = (0..n).map(|i| s.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let sqrt_pi: Vec<f64> = gen.pi().iter().map(|p| p.sqrt()).collect();
        let sigma = 2.0 * norm + 1.0;
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += sigma * sqrt_pi[i] * sqrt_pi[j];
            }
        }
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order.pop();
        let mut vectors = DMatrix::zeros(n, order.len());
        let mut values = Vec::with_capacity(order.len());
        for (k, &j) in order.iter().enumerate() {
            values.push(eig.eigenvalues[j]);
            let col = eig.eigenvectors.column(j);
            // fix the sign so that the largest entry is positive
            let big = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            let sign = if big < 0.0 { -1.0 } else { 1.0 };
            vectors.set_column(k, &(col * sign));
        }
        Eigensystem {
            values,
            vectors,
            sqrt_pi,
            norm,
        }
    }

    pub fn n(&self) -> usize {
        self.sqrt_pi.len()
    }

    /// `H_t(x, y) = sqrt(nu_y / nu_x) sum_k exp(-lambda_k t) v_k(x) v_k(y)`,
    /// including the stationary term `k = 0`.
    pub fn heat_kernel(&self, t: f64) -> DMatrix<f64> {
        let n = self.n();
        let decay: Vec<f64> = self.values.iter().map(|l| (-l * t).exp()).collect();
        let mut h = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                let mut s = self.sqrt_pi[x] * self.sqrt_pi[y];
                for (k, d) in decay.iter().enumerate() {
                    s += d * self.vectors[(x, k)] * self.vectors[(y, k)];
                }
                h[(x, y)] = s * self.sqrt_pi[y] / self.sqrt_pi[x];
            }
        }
        h
    }

    /// `sup_{x,y} |H_t(x, y) / nu(y) - 1|`, attained on the diagonal:
    /// `max_x sum_{k >= 1} exp(-lambda_k t) v_k(x)^2 / nu(x)`.
    pub fn uniform_distance(&self, t: f64) -> f64 {
        let n = self.n();
        let decay: Vec<f64> = self.values.iter().map(|l| (-l * t).exp()).collect();
        (0..n)
            .map(|x| {
                let s: f64 = decay
                    .iter()
                    .enumerate()
                    .map(|(k, d)| d * self.vectors[(x, k)] * self.vectors[(x, k)])
                    .sum();
                s / (self.sqrt_pi[x] * self.sqrt_pi[x])
            })
            .fold(0.0, f64::max)
    }

    /// Smallest `t` with `uniform_distance(t) <= 1/e`, by bisection on
    /// `[0, hi]` to relative accuracy `1e-12`; returns the upper end.
    pub fn mixing_time(&self, hi: f64) -> f64 {
        let target = (-1.0f64).exp();
        if self.uniform_distance(0.0) <= target {
            return 0.0;
        }
        let mut hi = hi.max(f64::MIN_POSITIVE);
        while self.uniform_distance(hi) > target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.uniform_distance(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `exp(-t S)` by Taylor series and repeated squaring.
pub fn expm_symmetric(s: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = s.nrows();
    let a = s * (-t);
    let norm = (0..n).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * scale;
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=40 {
        term = &term * &a / k as f64;
        result += &term;
        let tn = term.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if tn < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Heat kernel by spectral synthesis.
pub fn heat_kernel(gen: &WalkGenerator, t: f64, dense_limit: usize) -> Result<DMatrix<f64>> {
    check_dense(gen, t, dense_limit)?;
    Ok(Eigensystem::new(gen).heat_kernel(t))
}

/// Heat kernel by scaling and squaring of `exp(-t S)` followed by the
/// similarity transform back to `exp(t L)`.
pub fn heat_kernel_expm(gen: &WalkGenerator, t: f64, dense_limit: usize) -> Result<DMatrix<f64>> {
    check_dense(gen, t, dense_limit)?;
    let s = symmetrized_matrix(gen);
    let e = expm_symmetric(&s, t);
    let sq: Vec<f64> = gen.pi().iter().map(|p| p.sqrt()).collect();
    let n = gen.n();
    Ok(DMatrix::from_fn(n, n, |x, y| e[(x, y)] * sq[y] / sq[x]))
}

fn check_dense(gen: &WalkGenerator, t: f64, dense_limit: usize) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    if gen.n() > dense_limit {
        return Err(Error::SizeLimit {
            what: "dense heat kernel",
            n: gen.n(),
            limit: dense_limit,
        });
    }
    Ok(())
}
