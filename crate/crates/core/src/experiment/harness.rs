//! Scaling sweeps over box sizes and transition scans over intensities.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::config::{ExperimentConfig, Process};
use super::fit::{fit_samples, median, ScalingFit};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::isoperimetry::{sweep_cut, trap_upper_bound};
use crate::pointprocess::{sample_inhomogeneous_poisson, sample_poisson, sample_thinned_lattice, PointSet};
use crate::rng::derive_seed;
use crate::spectral::{eigenfunction, fmt_real, spectral_profile_bound, spectral_report, SpectralOptions};
use crate::walk::{build_generator_with, radial_ratio, Model};

/// Outcome of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// Fewer than two points.
    Degenerate,
    Disconnected,
    /// Above the eigensolve limit; only the cut bounds are recorded.
    SizeLimit,
    GapUnresolved,
    NotConverged,
    Failed,
}

impl CellStatus {
    fn from_error(e: &Error) -> Self {
        match e {
            Error::TooSmall { .. } | Error::DegenerateModel(_) => CellStatus::Degenerate,
            Error::Disconnected { .. } => CellStatus::Disconnected,
            Error::SizeLimit { .. } => CellStatus::SizeLimit,
            Error::GapUnresolved { .. } => CellStatus::GapUnresolved,
            Error::NotConverged(_) => CellStatus::NotConverged,
            _ => CellStatus::Failed,
        }
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Ok => "ok",
            CellStatus::Degenerate => "degenerate",
            CellStatus::Disconnected => "disconnected",
            CellStatus::SizeLimit => "size_limit",
            CellStatus::GapUnresolved => "gap_unresolved",
            CellStatus::NotConverged => "not_converged",
            CellStatus::Failed => "failed",
        })
    }
}

/// One `(L, rho, seed)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub l: u32,
    pub seed: u64,
    pub n: usize,
    pub model: Model,
    pub alpha: f64,
    pub rho: f64,
    pub gap: Option<f64>,
    pub poincare: Option<f64>,
    pub nu_star: Option<f64>,
    pub tau: Option<f64>,
    pub bound_simple: Option<f64>,
    pub bound_profile: Option<f64>,
    pub phi_sweep: Option<f64>,
    pub phi_trap: Option<f64>,
    pub remark1_ratio: Option<f64>,
    pub status: CellStatus,
}

pub const SCALING_HEADER: &str =
    "L,seed,n,model,alpha,rho,gap,poincare,nu_star,tau,bound_simple,bound_profile,phi_sweep,phi_trap,remark1_ratio,status";

impl ScalingRow {
    fn empty(cfg: &ExperimentConfig, l: u32, rho: f64, seed: u64) -> Self {
        ScalingRow {
            l,
            seed,
            n: 0,
            model: cfg.model,
            alpha: cfg.alpha,
            rho,
            gap: None,
            poincare: None,
            nu_star: None,
            tau: None,
            bound_simple: None,
            bound_profile: None,
            phi_sweep: None,
            phi_trap: None,
            remark1_ratio: None,
            status: CellStatus::Ok,
        }
    }

    pub fn csv_row(&self) -> String {
        let o = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.l,
            self.seed,
            self.n,
            self.model,
            self.alpha,
            self.rho,
            o(self.gap),
            o(self.poincare),
            o(self.nu_star),
            o(self.tau),
            o(self.bound_simple),
            o(self.bound_profile),
            o(self.phi_sweep),
            o(self.phi_trap),
            o(self.remark1_ratio),
            self.status
        )
    }

    /// Smallest recorded upper bound on the Cheeger constant.
    pub fn phi_hat(&self) -> Option<f64> {
        match (self.phi_sweep, self.phi_trap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Lower estimate `max(gamma, 1 / (2 Phi_trap))` of the Poincaré
    /// constant, valid since `lambda_1 <= 2 Phi <= 2 Phi_trap`.
    pub fn gamma_hat(&self) -> Option<f64> {
        let trap = self.phi_trap.filter(|p| *p > 0.0).map(|p| 0.5 / p);
        match (self.poincare, trap) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn value(&self, stat: Statistic) -> Option<f64> {
        match stat {
            Statistic::N => Some(self.n as f64),
            Statistic::Gap => self.gap,
            Statistic::Poincare => self.poincare,
            Statistic::NuStar => self.nu_star,
            Statistic::Tau => self.tau,
            Statistic::BoundSimple => self.bound_simple,
            Statistic::BoundProfile => self.bound_profile,
            Statistic::PhiSweep => self.phi_sweep,
            Statistic::PhiTrap => self.phi_trap,
            Statistic::Remark1Ratio => self.remark1_ratio,
            Statistic::GammaHat => self.gamma_hat(),
            Statistic::PhiHat => self.phi_hat(),
        }
    }
}

/// A fittable column of the scaling table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    N,
    Gap,
    Poincare,
    NuStar,
    Tau,
    BoundSimple,
    BoundProfile,
    PhiSweep,
    PhiTrap,
    Remark1Ratio,
    GammaHat,
    PhiHat,
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "n" => Statistic::N,
            "gap" => Statistic::Gap,
            "poincare" => Statistic::Poincare,
            "nu_star" => Statistic::NuStar,
            "tau" => Statistic::Tau,
            "bound_simple" => Statistic::BoundSimple,
            "bound_profile" => Statistic::BoundProfile,
            "phi_sweep" => Statistic::PhiSweep,
            "phi_trap" => Statistic::PhiTrap,
            "remark1_ratio" => Statistic::Remark1Ratio,
            "gamma_hat" => Statistic::GammaHat,
            "phi_hat" => Statistic::PhiHat,
            _ => return Err(Error::InvalidParameter(format!("unknown statistic {s:?}"))),
        })
    }
}

/// Seed of the cell `(L, rho)` for a base seed.
pub fn cell_seed(seed: u64, l: u32, rho: f64) -> u64 {
    derive_seed(seed, &[l as u64, rho.to_bits()])
}

/// The configured process on `[-L/2, L/2]^d`.
pub fn sample_process(cfg: &ExperimentConfig, side: f64, rho: f64, seed: u64) -> Result<PointSet> {
    match cfg.process {
        Process::Poisson => sample_poisson(rho, cfg.dim, side, seed),
        Process::ThinnedLattice => sample_thinned_lattice(cfg.spacing, cfg.keep_prob, cfg.dim, side, seed),
        Process::Inhomogeneous => {
            let (lo, hi) = (cfg.rho_min, rho);
            let k = 2.0 * std::f64::consts::PI / side;
            let intensity = move |x: &[f64]| lo + (hi - lo) * 0.5 * (1.0 + (k * x[0]).cos());
            sample_inhomogeneous_poisson(intensity, hi, cfg.dim, side, seed)
        }
    }
}

/// Evaluate one cell. Errors land in the status column.
pub fn run_cell(cfg: &ExperimentConfig, l: u32, rho: f64, seed: u64) -> ScalingRow {
    let mut row = ScalingRow::empty(cfg, l, rho, seed);
    if let Err(e) = fill_cell(cfg, &mut row) {
        row.status = CellStatus::from_error(&e);
    }
    row
}

fn fill_cell(cfg: &ExperimentConfig, row: &mut ScalingRow) -> Result<()> {
    let seq = Execution::Sequential;
    let xi = sample_process(cfg, row.l as f64, row.rho, cell_seed(row.seed, row.l, row.rho))?;
    row.n = xi.len();
    if row.n < 2 {
        return Err(Error::TooSmall { need: 2, got: row.n });
    }
    let gen = build_generator_with(&xi, cfg.alpha, cfg.model, cfg.cutoff, seq)?;
    row.nu_star = Some(gen.nu_star());
    row.remark1_ratio = radial_ratio(&gen).ok();
    row.phi_trap = trap_upper_bound(&gen).ok().map(|t| t.0);
    let opts = SpectralOptions {
        dense_limit: cfg.size_limits.dense,
        eigensolve_limit: cfg.size_limits.eigensolve,
        exec: seq,
        ..SpectralOptions::default()
    };
    let (report, vector) = spectral_report(&gen, &opts)?;
    row.gap = Some(report.gap);
    row.poincare = Some(report.poincare);
    row.tau = report.tau_exact;
    row.bound_simple = Some(report.bound_simple);
    row.phi_sweep = sweep_cut(&gen, &eigenfunction(&gen, &vector)).ok().map(|c| c.conductance);
    if cfg.model != Model::Unit && row.n <= cfg.size_limits.profile && row.n <= cfg.size_limits.cut_enum {
        row.bound_profile = Some(spectral_profile_bound(&gen, report.gap, seq)?);
    }
    Ok(())
}

fn run_cells(cfg: &ExperimentConfig, cells: &[(u32, f64, u64)]) -> Vec<ScalingRow> {
    Execution::with_workers(cfg.workers).map_slice(cells, |&(l, rho, seed)| run_cell(cfg, l, rho, seed))
}

pub fn write_rows<W: Write>(rows: &[ScalingRow], mut out: W) -> Result<()> {
    writeln!(out, "{SCALING_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// One row per `(L, seed)` at intensity `rho`, ordered by `L` then seed.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<ScalingRow>> {
    cfg.validate()?;
    let cells: Vec<(u32, f64, u64)> = cfg
        .l_list
        .iter()
        .flat_map(|&l| cfg.seeds.iter().map(move |&s| (l, cfg.rho, s)))
        .collect();
    Ok(run_cells(cfg, &cells))
}

/// Log-log fit of the per-`L` medians of a statistic.
pub fn fit_exponent(rows: &[ScalingRow], stat: Statistic) -> Result<ScalingFit> {
    fit_samples(rows.iter().map(|r| (r.l as f64, r.value(stat))))
}

/// Monotonicity verdict of a transition scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `Phi L` increases and `gamma / L^2` decreases strictly in `rho`.
    Monotone,
    NotMonotone,
    /// A single intensity.
    Trivial,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Monotone => "monotone",
            Verdict::NotMonotone => "not_monotone",
            Verdict::Trivial => "trivially_monotone",
        })
    }
}

/// Medians at one `(L, rho)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionPoint {
    pub l: u32,
    pub rho: f64,
    pub median_phi_l: Option<f64>,
    pub median_gamma_l2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub rows: Vec<ScalingRow>,
    pub points: Vec<TransitionPoint>,
    /// Verdict per box size.
    pub verdicts: Vec<(u32, Verdict)>,
}

impl TransitionReport {
    pub const SUMMARY_HEADER: &'static str = "L,rho,median_phi_L,median_gamma_over_L2";

    pub fn verdict(&self) -> Verdict {
        if self.verdicts.iter().any(|v| v.1 == Verdict::NotMonotone) {
            Verdict::NotMonotone
        } else if self.verdicts.iter().all(|v| v.1 == Verdict::Trivial) {
            Verdict::Trivial
        } else {
            Verdict::Monotone
        }
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::SUMMARY_HEADER)?;
        let o = |v: Option<f64>| v.map(fmt_real).unwrap_or_default();
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.l, p.rho, o(p.median_phi_l), o(p.median_gamma_l2))?;
        }
        for (l, v) in &self.verdicts {
            writeln!(out, "# L={l} verdict={v}")?;
        }
        Ok(())
    }
}

fn strictly(v: &[Option<f64>], up: bool) -> bool {
    v.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => {
            if up {
                b > a
            } else {
                b < a
            }
        }
        _ => false,
    })
}

/// Scan over `rho_list` at `alpha = d`.
pub fn transition_scan(cfg: &ExperimentConfig) -> Result<TransitionReport> {
    cfg.validate()?;
    if cfg.alpha != cfg.dim as f64 {
        return Err(Error::Precondition(format!(
            "transition scans need alpha = dim, got alpha = {} and dim = {}",
            cfg.alpha, cfg.dim
        )));
    }
    let rhos = cfg.rhos();
    let cells: Vec<(u32, f64, u64)> = cfg
        .l_list
        .iter()
        .flat_map(|&l| rhos.iter().flat_map(move |&r| cfg.seeds.iter().map(move |&s| (l, r, s))))
        .collect();
    let rows = run_cells(cfg, &cells);
    let mut points = Vec::new();
    let mut verdicts = Vec::new();
    for &l in &cfg.l_list {
        let lf = l as f64;
        let start = points.len();
        for &rho in &rhos {
            let cell = rows.iter().filter(|r| r.l == l && r.rho == rho);
            let mut phi: Vec<f64> = cell.clone().filter_map(|r| r.phi_hat()).map(|p| p * lf).collect();
            let mut gam: Vec<f64> = cell.filter_map(|r| r.gamma_hat()).map(|g| g / (lf * lf)).collect();
            points.push(TransitionPoint {
                l,
                rho,
                median_phi_l: median(&mut phi),
                median_gamma_l2: median(&mut gam),
            });
        }
        let pts = &points[start..];
        let verdict = if pts.len() == 1 {
            Verdict::Trivial
        } else {
            let phi: Vec<_> = pts.iter().map(|p| p.median_phi_l).collect();
            let gam: Vec<_> = pts.iter().map(|p| p.median_gamma_l2).collect();
            if strictly(&phi, true) && strictly(&gam, false) {
                Verdict::Monotone
            } else {
                Verdict::NotMonotone
            }
        };
        verdicts.push((l, verdict));
    }
    Ok(TransitionReport { rows, points, verdicts })
}
