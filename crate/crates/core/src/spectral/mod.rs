//! Spectral gaps, Poincaré constants, heat kernels, exact uniform mixing
//! times, spectral profiles and mixing-time bounds.
//!
//! All computations use the symmetrised operator
//! `S = W^{-1/2} (D - R) W^{-1/2}`, which is similar to `-L` and has null
//! vector `sqrt(nu)`.

mod heat;
mod lanczos;
mod profile;

use std::fmt;
use std::io::Write;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::walk::{Model, WalkGenerator};

pub use heat::{expm_symmetric, heat_kernel, heat_kernel_expm, symmetrized_matrix, Eigensystem};
pub use lanczos::LanczosOptions;
pub use profile::{
    dirichlet_eigenvalue, integral_upper_end, mixing_bound_profile_integral, spectral_profile_bound,
    spectral_profile_exact, spectral_profile_exact_with, PiecewisePowerProfile, PowerSegment, ProfileInput, SpectralProfile,
    SPECTRAL_PROFILE_LIMIT,
};

/// Default size limit of dense eigendecompositions and heat kernels.
pub const DENSE_LIMIT: usize = 400;

/// Default size limit of the iterative eigensolver.
pub const EIGENSOLVE_LIMIT: usize = 6000;

/// Gaps below this multiple of `||S||` are not resolved by double precision.
pub const GAP_FLOOR: f64 = 1e-12;

/// Which solver produced the gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
    /// Single-state chain; no eigensolve.
    Trivial,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Dense => "dense",
            Method::Iterative => "iterative",
            Method::Trivial => "trivial",
        })
    }
}

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub dense_limit: usize,
    pub eigensolve_limit: usize,
    pub lanczos: LanczosOptions,
    pub exec: Execution,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            dense_limit: DENSE_LIMIT,
            eigensolve_limit: EIGENSOLVE_LIMIT,
            lanczos: LanczosOptions::default(),
            exec: Execution::default(),
        }
    }
}

fn ser_model<S: Serializer>(m: &Model, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(m.index())
}

fn ser_real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("nan")
    }
}

fn ser_opt_real<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_real(x, s),
        None => s.serialize_none(),
    }
}

/// Gap, Poincaré constant and mixing time of one generator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    #[serde(serialize_with = "ser_model")]
    pub model: Model,
    pub n: usize,
    /// `lambda_1`; `+inf` for a single-state chain.
    #[serde(serialize_with = "ser_real")]
    pub gap: f64,
    /// `gamma = 1 / lambda_1`.
    pub poincare: f64,
    pub nu_star: f64,
    /// Exact uniform mixing time; absent above the dense limit.
    #[serde(serialize_with = "ser_opt_real")]
    pub tau_exact: Option<f64>,
    /// `gamma (1 + log(1 / nu_*))`.
    pub bound_simple: f64,
    #[serde(serialize_with = "ser_opt_real")]
    pub bound_profile: Option<f64>,
    pub method: Method,
    /// Set for the single-state chain.
    pub degenerate: bool,
}

impl SpectralReport {
    pub const CSV_HEADER: &'static str = "model,n,gap,poincare,nu_star,tau,bound_simple,bound_profile,method";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.model,
            self.n,
            fmt_real(self.gap),
            fmt_real(self.poincare),
            fmt_real(self.nu_star),
            opt(self.tau_exact),
            fmt_real(self.bound_simple),
            opt(self.bound_profile),
            self.method
        )
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Shortest round-trip decimal, `inf` for infinity.
pub fn fmt_real(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        format!("{v:e}")
    }
}

/// `gamma (1 + log(1 / nu_*))`.
pub fn bound_simple(poincare: f64, nu_star: f64) -> f64 {
    poincare * (1.0 - nu_star.ln())
}

fn check_solvable(gen: &WalkGenerator) -> Result<()> {
    if gen.n() < 2 {
        return Err(Error::TooSmall { need: 2, got: gen.n() });
    }
    gen.graph().ensure_connected()
}

fn check_floor(gap: f64, norm: f64) -> Result<f64> {
    let floor = GAP_FLOOR * norm;
    if gap < floor {
        return Err(Error::GapUnresolved { estimate: gap, floor });
    }
    Ok(gap)
}

/// `lambda_1` and its unit eigenvector of `S`.
pub fn spectral_gap(gen: &WalkGenerator) -> Result<(f64, Vec<f64>)> {
    spectral_gap_with(gen, &SpectralOptions::default()).map(|(l, v, _)| (l, v))
}

pub fn spectral_gap_with(gen: &WalkGenerator, opts: &SpectralOptions) -> Result<(f64, Vec<f64>, Method)> {
    check_solvable(gen)?;
    let n = gen.n();
    if n <= opts.dense_limit {
        let es = Eigensystem::new(gen);
        let gap = check_floor(es.values[0], es.norm)?;
        return Ok((gap, es.vectors.column(0).iter().copied().collect(), Method::Dense));
    }
    if n > opts.eigensolve_limit {
        return Err(Error::SizeLimit {
            what: "eigensolve",
            n,
            limit: opts.eigensolve_limit,
        });
    }
    let op = lanczos::SymOperator::new(gen);
    let res = lanczos::smallest_nonnull(&op, &opts.lanczos, opts.exec)?;
    let gap = check_floor(res.value, op.norm)?;
    Ok((gap, res.vector, Method::Iterative))
}

/// The eigenfunction `f = v / sqrt(nu)` of `-L` for `lambda_1`, used to
/// order sweep cuts.
pub fn slowest_eigenfunction(gen: &WalkGenerator) -> Result<Vec<f64>> {
    slowest_eigenfunction_with(gen, &SpectralOptions::default())
}

pub fn slowest_eigenfunction_with(gen: &WalkGenerator, opts: &SpectralOptions) -> Result<Vec<f64>> {
    let (_, v, _) = spectral_gap_with(gen, opts)?;
    Ok(eigenfunction(gen, &v))
}

pub(crate) fn eigenfunction(gen: &WalkGenerator, v: &[f64]) -> Vec<f64> {
    v.iter().zip(gen.pi()).map(|(x, p)| x / p.sqrt()).collect()
}

/// Exact uniform mixing time of a chain with at most `dense_limit` states.
pub fn mixing_time_exact(gen: &WalkGenerator, dense_limit: usize) -> Result<f64> {
    check_solvable(gen)?;
    if gen.n() > dense_limit {
        return Err(Error::SizeLimit {
            what: "exact mixing time",
            n: gen.n(),
            limit: dense_limit,
        });
    }
    let es = Eigensystem::new(gen);
    let gap = check_floor(es.values[0], es.norm)?;
    Ok(es.mixing_time(10.0 * bound_simple(1.0 / gap, gen.nu_star())))
}

/// Everything in a [`SpectralReport`] except the profile bound, which the
/// caller adds when a profile is available. Also returns the eigenvector.
pub fn spectral_report(gen: &WalkGenerator, opts: &SpectralOptions) -> Result<(SpectralReport, Vec<f64>)> {
    let n = gen.n();
    let nu_star = gen.nu_star();
    if n == 1 {
        return Ok((
            SpectralReport {
                model: gen.model(),
                n,
                gap: f64::INFINITY,
                poincare: 0.0,
                nu_star,
                tau_exact: Some(0.0),
                bound_simple: 0.0,
                bound_profile: None,
                method: Method::Trivial,
                degenerate: true,
            },
            vec![1.0],
        ));
    }
    check_solvable(gen)?;
    let (gap, vector, method, tau) = if n <= opts.dense_limit {
        let es = Eigensystem::new(gen);
        let gap = check_floor(es.values[0], es.norm)?;
        let tau = es.mixing_time(10.0 * bound_simple(1.0 / gap, nu_star));
        (gap, es.vectors.column(0).iter().copied().collect(), Method::Dense, Some(tau))
    } else {
        let (gap, v, m) = spectral_gap_with(gen, opts)?;
        (gap, v, m, None)
    };
    let poincare = 1.0 / gap;
    Ok((
        SpectralReport {
            model: gen.model(),
            n,
            gap,
            poincare,
            nu_star,
            tau_exact: tau,
            bound_simple: bound_simple(poincare, nu_star),
            bound_profile: None,
            method,
            degenerate: false,
        },
        vector,
    ))
}
