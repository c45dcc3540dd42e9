//! Monte Carlo check of the `S_ell` and `R` statistics over box sides.

use std::io::Write;

use super::config::{ExperimentConfig, Process};
use super::fit::ols;
use super::harness::sample_process;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pointprocess::{r_statistic, rate_radius, s_statistic, s_truncation, Region, R_TERM_FLOOR};
use crate::rng::derive_seed;
use crate::spectral::fmt_real;

const A2_STREAM: u64 = 0xa2;

/// One `(ell, seed)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct A2Row {
    pub ell: u32,
    pub seed: u64,
    /// Points in `Λ_ell`.
    pub count: usize,
    pub s_stat: f64,
    pub r_stat: f64,
    /// `R >= count`, which holds for every configuration.
    pub ok: bool,
}

impl A2Row {
    pub const CSV_HEADER: &'static str = "ell,seed,count,s_stat,r_stat,status";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.ell,
            self.seed,
            self.count,
            fmt_real(self.s_stat),
            fmt_real(self.r_stat),
            if self.ok { "ok" } else { "violation" }
        )
    }
}

/// Per-`ell` moments of `S_ell / ell^d` and the tail frequency of `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct A2Summary {
    pub ell: u32,
    pub mean_s: f64,
    pub var_s: f64,
    pub tail_freq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct A2Report {
    pub rows: Vec<A2Row>,
    pub summary: Vec<A2Summary>,
    /// Slope of `log Var(S_ell / ell^d)` against `log ell`; absent when
    /// fewer than three sides have positive variance.
    pub variance_slope: Option<f64>,
    /// `max / min` of the per-side means.
    pub mean_spread: f64,
    pub violations: usize,
}

impl A2Report {
    pub const SUMMARY_HEADER: &'static str = "ell,mean_s,var_s,tail_freq";

    pub fn write_rows<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", A2Row::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::SUMMARY_HEADER)?;
        for s in &self.summary {
            writeln!(out, "{},{},{},{}", s.ell, fmt_real(s.mean_s), fmt_real(s.var_s), fmt_real(s.tail_freq))?;
        }
        let slope = self.variance_slope.map(fmt_real).unwrap_or_else(|| "n/a".into());
        writeln!(out, "# variance_slope={slope} mean_spread={} violations={}", fmt_real(self.mean_spread), self.violations)?;
        Ok(())
    }
}

/// Extra box margin so that both statistics see every point they sum over.
pub fn sample_margin(alpha: f64) -> f64 {
    rate_radius(R_TERM_FLOOR, alpha).max((s_truncation(alpha) + 1) as f64).ceil()
}

pub fn a2_check(cfg: &ExperimentConfig) -> Result<A2Report> {
    cfg.validate()?;
    if cfg.process == Process::Inhomogeneous {
        return Err(Error::Precondition(
            "the statistics check needs a Poisson or thinned-lattice process".into(),
        ));
    }
    let margin = sample_margin(cfg.alpha);
    let cells: Vec<(u32, u64)> = cfg
        .ell_list
        .iter()
        .flat_map(|&e| cfg.seeds.iter().map(move |&s| (e, s)))
        .collect();
    let rows = Execution::with_workers(cfg.workers).map_slice(&cells, |&(ell, seed)| -> Result<A2Row> {
        let side = ell as f64 + 2.0 * margin;
        let xi = sample_process(cfg, side, cfg.rho, derive_seed(seed, &[ell as u64, A2_STREAM]))?;
        let region = Region::centered(cfg.dim, ell as f64);
        let count = xi.count_in(&region);
        let r_stat = r_statistic(&xi, &region, cfg.alpha);
        Ok(A2Row {
            ell,
            seed,
            count,
            s_stat: s_statistic(&xi, ell, cfg.alpha),
            r_stat,
            ok: r_stat >= count as f64,
        })
    });
    let rows: Vec<A2Row> = rows.into_iter().collect::<Result<_>>()?;
    let mut summary = Vec::new();
    for &ell in &cfg.ell_list {
        let vol = (ell as f64).powi(cfg.dim as i32);
        let cell: Vec<&A2Row> = rows.iter().filter(|r| r.ell == ell).collect();
        let k = cell.len() as f64;
        let s: Vec<f64> = cell.iter().map(|r| r.s_stat / vol).collect();
        let mean_s = s.iter().sum::<f64>() / k;
        let var_s = if cell.len() > 1 {
            s.iter().map(|v| (v - mean_s).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let tail = cell.iter().filter(|r| r.r_stat >= cfg.tail_gamma * vol).count() as f64 / k;
        summary.push(A2Summary {
            ell,
            mean_s,
            var_s,
            tail_freq: tail,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = summary
        .iter()
        .filter(|s| s.var_s > 0.0)
        .map(|s| ((s.ell as f64).ln(), s.var_s.ln()))
        .unzip();
    let variance_slope = (xs.len() >= 3).then(|| ols(&xs, &ys).0);
    let means: Vec<f64> = summary.iter().map(|s| s.mean_s).collect();
    let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let violations = rows.iter().filter(|r| !r.ok).count();
    Ok(A2Report {
        rows,
        summary,
        variance_slope,
        mean_spread,
        violations,
    })
}
