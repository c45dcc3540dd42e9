//! Spectral profiles and the profile-integral mixing bounds.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::isoperimetry::{check_grid, cheeger_exact_with, fits, IsoProfile};
use crate::walk::{Model, WalkGenerator};

/// Largest `n` for the spectral-profile enumeration.
pub const SPECTRAL_PROFILE_LIMIT: usize = 18;

/// Upper end `4e` of the profile integrals.
pub fn integral_upper_end() -> f64 {
    4.0 * std::f64::consts::E
}

/// Right-continuous nonincreasing step function `Lambda(r)`: equal to
/// `values[j]` on `[breakpoints[j], breakpoints[j + 1])`, and to the last
/// value from the last breakpoint up to `r = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectralProfile {
    /// `Lambda(r)`, `+inf` below the first breakpoint.
    pub fn value_at(&self, r: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= r);
        if i == 0 {
            f64::INFINITY
        } else {
            self.values[i - 1]
        }
    }
}

/// Smallest Dirichlet eigenvalue of `S` restricted to `subset`, taken per
/// connected component of the induced graph. The second entry reports
/// whether every component's ground state was sign-definite.
pub fn dirichlet_eigenvalue(gen: &WalkGenerator, subset: &[usize]) -> (f64, bool) {
    let g = gen.graph();
    let w = gen.weights();
    let n = gen.n();
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in subset.iter().enumerate() {
        pos[x] = i;
    }
    // components of the induced subgraph
    let mut comp = vec![usize::MAX; subset.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..subset.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        let c = comps.len();
        comp[s] = c;
        let mut members = vec![s];
        let mut k = 0;
        while k < members.len() {
            let x = subset[members[k]];
            for &y in g.neighbor_indices(x) {
                let p = pos[y as usize];
                if p != usize::MAX && comp[p] == usize::MAX {
                    comp[p] = c;
                    members.push(p);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        comps.push(members);
    }
    let mut best = f64::INFINITY;
    let mut definite = true;
    for members in comps {
        let m = members.len();
        if m == 1 {
            let x = subset[members[0]];
            best = best.min(g.degree(x) / w[x]);
            continue;
        }
        let a = DMatrix::from_fn(m, m, |i, j| {
            let (x, y) = (subset[members[i]], subset[members[j]]);
            if i == j {
                g.degree(x) / w[x]
            } else {
                -g.rate(x, y) / (w[x] * w[y]).sqrt()
            }
        });
        let eig = SymmetricEigen::new(a);
        let (k, lam) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty component");
        let v = eig.eigenvectors.column(k);
        let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let neg = v.iter().any(|&x| x < -1e-9 * big);
        let pos_ = v.iter().any(|&x| x > 1e-9 * big);
        if neg && pos_ {
            definite = false;
        }
        best = best.min(lam);
    }
    (best, definite)
}

/// Exact spectral profile. Every proper subset contributes its Dirichlet
/// eigenvalue at mass `nu(U)`; the full set contributes `lambda_1` at mass 1.
pub fn spectral_profile_exact(gen: &WalkGenerator, lambda1: f64) -> Result<SpectralProfile> {
    spectral_profile_exact_with(gen, lambda1, Execution::default())
}

pub fn spectral_profile_exact_with(gen: &WalkGenerator, lambda1: f64, exec: Execution) -> Result<SpectralProfile> {
    let n = gen.n();
    if n > SPECTRAL_PROFILE_LIMIT {
        return Err(Error::SizeLimit {
            what: "spectral profile",
            n,
            limit: SPECTRAL_PROFILE_LIMIT,
        });
    }
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    let full = (1u32 << n) - 1;
    let chunk = 1u32 << n.min(10);
    let chunks = (full as usize).div_ceil(chunk as usize);
    let pi = gen.pi();
    let parts: Vec<Result<Vec<(f64, u32, f64)>>> = exec.map_range(chunks, |c| {
        let start = (c as u32 * chunk).max(1);
        let end = ((c as u32 + 1) * chunk).min(full);
        let mut out = Vec::with_capacity((end - start) as usize);
        for mask in start..end {
            let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let mass: f64 = subset.iter().map(|&x| pi[x]).sum();
            let (lam, definite) = dirichlet_eigenvalue(gen, &subset);
            if !definite {
                return Err(Error::NotConverged(format!("ground state of subset {subset:?} changes sign")));
            }
            out.push((mass, mask, lam));
        }
        Ok(out)
    });
    let mut all = Vec::with_capacity(full as usize);
    for p in parts {
        all.extend(p?);
    }
    all.push((1.0, full, lambda1));
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut breakpoints = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (mass, _, lam) in all {
        let current = values.last().copied().unwrap_or(f64::INFINITY);
        if lam < current {
            if breakpoints.last() == Some(&mass) {
                *values.last_mut().expect("paired with breakpoint") = lam;
            } else {
                breakpoints.push(mass);
                values.push(lam);
            }
        }
    }
    Ok(SpectralProfile { breakpoints, values })
}

/// One piece `g(t) = coef * t^power` on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSegment {
    pub lo: f64,
    pub hi: f64,
    pub coef: f64,
    pub power: f64,
}

impl PowerSegment {
    /// `int_lo^hi dt / (t g(t))` in closed form; zero for an infinite piece.
    pub fn integral_reciprocal(&self) -> f64 {
        if self.hi <= self.lo || self.coef.is_infinite() {
            return 0.0;
        }
        if self.power == 0.0 {
            (self.hi / self.lo).ln() / self.coef
        } else {
            let p = self.power;
            (self.lo.powf(-p) - self.hi.powf(-p)) / (p * self.coef)
        }
    }

    fn clipped(&self, lo: f64, hi: f64) -> PowerSegment {
        PowerSegment {
            lo: self.lo.max(lo),
            hi: self.hi.min(hi),
            ..*self
        }
    }

    fn squared(&self) -> PowerSegment {
        PowerSegment {
            coef: self.coef * self.coef,
            power: 2.0 * self.power,
            ..*self
        }
    }
}

/// Piecewise power-law profile on consecutive segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePowerProfile {
    pub segments: Vec<PowerSegment>,
}

impl PiecewisePowerProfile {
    /// Step profile from right endpoints: value `values[i]` on
    /// `(grid[i-1], grid[i]]`, starting at `start`.
    pub fn upper_steps(start: f64, grid: &[f64], values: &[f64]) -> Self {
        let mut segments = Vec::new();
        let mut lo = start;
        for (&t, &v) in grid.iter().zip(values) {
            if t > lo {
                segments.push(PowerSegment {
                    lo,
                    hi: t,
                    coef: v,
                    power: 0.0,
                });
                lo = t;
            }
        }
        PiecewisePowerProfile { segments }
    }

    pub fn start(&self) -> f64 {
        self.segments.first().map_or(f64::INFINITY, |s| s.lo)
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map_or(f64::NEG_INFINITY, |s| s.hi)
    }

    /// `int_lo^hi dt / (t g(t))` over the covered part of `[lo, hi]`.
    pub fn integral_reciprocal(&self, lo: f64, hi: f64) -> f64 {
        self.segments.iter().map(|s| s.clipped(lo, hi).integral_reciprocal()).sum()
    }

    /// `int_lo^hi dt / (t g(t)^2)`.
    pub fn integral_reciprocal_squared(&self, lo: f64, hi: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.clipped(lo, hi).squared().integral_reciprocal())
            .sum()
    }
}

/// Profile supplied to [`mixing_bound_profile_integral`].
#[derive(Debug, Clone, Copy)]
pub enum ProfileInput<'a> {
    /// Exact spectral profile; beyond `r = 1` it is extended by `Phi^2 / 2`.
    Spectral(&'a SpectralProfile),
    /// Isoperimetric profile on a grid. Between grid points the value at
    /// the right end is used, which bounds `phi` from below.
    Iso(&'a IsoProfile),
    /// Isoperimetric profile given analytically on `(0, 1/2]`.
    Power(&'a PiecewisePowerProfile),
}

/// Profile-integral bound on the uniform mixing time. From a spectral
/// profile: `2 int_{4 nu_*}^{4e} dr / (r Lambda(r))`. From an
/// isoperimetric profile: `4 int_{4 nu_*}^{4e} dt / (t phi(t)^2)` with
/// `phi(t) = Phi` for `t > 1/2`.
pub fn mixing_bound_profile_integral(profile: ProfileInput<'_>, nu_star: f64, cheeger: f64) -> Result<f64> {
    if !(nu_star > 0.0 && nu_star <= 1.0) {
        return Err(Error::InvalidParameter(format!("nu_star must lie in (0, 1], got {nu_star}")));
    }
    if !(cheeger > 0.0 && cheeger.is_finite()) {
        return Err(Error::InvalidParameter(format!("Cheeger constant must be positive, got {cheeger}")));
    }
    let lo = 4.0 * nu_star;
    let top = integral_upper_end();
    match profile {
        ProfileInput::Spectral(sp) => {
            let first = sp.breakpoints.first().copied().unwrap_or(f64::INFINITY);
            if first > lo.min(1.0) {
                return Err(Error::Coverage { lo, hi: top });
            }
            let mut segments = Vec::new();
            for (j, (&b, &v)) in sp.breakpoints.iter().zip(&sp.values).enumerate() {
                let hi = sp.breakpoints.get(j + 1).copied().unwrap_or(1.0).max(b);
                segments.push(PowerSegment {
                    lo: b,
                    hi,
                    coef: v,
                    power: 0.0,
                });
            }
            segments.push(PowerSegment {
                lo: 1.0,
                hi: top,
                coef: 0.5 * cheeger * cheeger,
                power: 0.0,
            });
            Ok(2.0 * PiecewisePowerProfile { segments }.integral_reciprocal(lo, top))
        }
        ProfileInput::Iso(ip) => {
            check_grid(&ip.grid)?;
            if !ip.grid.iter().any(|&t| fits(0.5, t)) {
                return Err(Error::Coverage { lo, hi: top });
            }
            let pp = PiecewisePowerProfile::upper_steps(0.0, &ip.grid, &ip.values);
            Ok(iso_bound(&pp, lo, cheeger))
        }
        ProfileInput::Power(pp) => {
            if pp.start() > lo.min(0.5) || pp.end() < 0.5 {
                return Err(Error::Coverage { lo, hi: top });
            }
            Ok(iso_bound(pp, lo, cheeger))
        }
    }
}

/// Profile-integral bound from the exact spectral profile and the exact
/// Cheeger constant. Needs a model with `w(x) >= sum_y r(x, y)`.
pub fn spectral_profile_bound(gen: &WalkGenerator, lambda1: f64, exec: Execution) -> Result<f64> {
    if gen.model() == Model::Unit {
        return Err(Error::InvalidModel { expected: 2, got: 1 });
    }
    let sp = spectral_profile_exact_with(gen, lambda1, exec)?;
    let (phi, _) = cheeger_exact_with(gen, exec)?;
    mixing_bound_profile_integral(ProfileInput::Spectral(&sp), gen.nu_star(), phi)
}

fn iso_bound(pp: &PiecewisePowerProfile, lo: f64, cheeger: f64) -> f64 {
    let top = integral_upper_end();
    let tail = PowerSegment {
        lo: 0.5_f64.max(lo),
        hi: top,
        coef: cheeger,
        power: 0.0,
    };
    let head = if lo < 0.5 { pp.integral_reciprocal_squared(lo, 0.5) } else { 0.0 };
    4.0 * (head + tail.squared().integral_reciprocal())
}
