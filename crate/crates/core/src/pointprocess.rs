//! Random environments: finite point configurations in the centred box
//! `[-L/2, L/2]^d`, their samplers, the good-box occupancy field and the
//! local regularity statistics `R_A` and `S_ell`.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng;

/// Tag for the thinning stream of the inhomogeneous sampler.
const THINNING_STREAM: u64 = 0x7468_696e;

/// Terms of `R_A` below this value are dropped. The dropped mass is far below
/// the rounding error of any nonempty `R_A >= 1`.
pub const R_TERM_FLOOR: f64 = 1e-20;

/// `S_ell` truncates the `v`-sum where every dropped kernel value is below this.
pub const S_KERNEL_FLOOR: f64 = 1e-16;

/// Jump rate `exp(-|x-y|^alpha)` from a squared Euclidean distance.
#[inline]
pub fn jump_rate(dist_sq: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        (-dist_sq).exp()
    } else if alpha == 1.0 {
        (-dist_sq.sqrt()).exp()
    } else {
        (-dist_sq.powf(0.5 * alpha)).exp()
    }
}

/// Distance beyond which `exp(-r^alpha) < floor`.
pub fn rate_radius(floor: f64, alpha: f64) -> f64 {
    (-floor.ln()).powf(1.0 / alpha)
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A realisation of the point process restricted to `[-side/2, side/2]^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    side: f64,
    coords: Vec<f64>,
    pub seed: u64,
    pub label: String,
}

impl PointSet {
    /// Build from flat coordinates (`dim` per point). Rejects points outside
    /// the closed box and repeated points.
    pub fn new(dim: usize, side: f64, coords: Vec<f64>, seed: u64, label: impl Into<String>) -> Result<Self> {
        ensure(dim >= 1, || "dim must be >= 1".into())?;
        ensure(side > 0.0 && side.is_finite(), || format!("side must be positive, got {side}"))?;
        ensure(coords.len().is_multiple_of(dim), || "coordinate count not a multiple of dim".into())?;
        let half = 0.5 * side;
        if let Some(c) = coords.iter().find(|c| !c.is_finite() || c.abs() > half) {
            return Err(Error::InvalidInput(format!("coordinate {c} outside [-{half}, {half}]")));
        }
        let ps = PointSet {
            dim,
            side,
            coords,
            seed,
            label: label.into(),
        };
        if let Some((i, j)) = ps.find_duplicate() {
            return Err(Error::InvalidInput(format!("points {i} and {j} coincide")));
        }
        Ok(ps)
    }

    pub fn empty(dim: usize, side: f64) -> Result<Self> {
        PointSet::new(dim, side, Vec::new(), 0, "empty")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Number of points in a closed axis-aligned region.
    pub fn count_in(&self, region: &Region) -> usize {
        self.points().filter(|p| region.contains(p)).count()
    }

    /// Add a point; used by monotonicity checks.
    pub fn with_point(&self, p: &[f64]) -> Result<Self> {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(p);
        PointSet::new(self.dim, self.side, coords, self.seed, self.label.clone())
    }

    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| lex_cmp(self.point(a), self.point(b)));
        idx.windows(2)
            .find(|w| self.point(w[0]) == self.point(w[1]))
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Closed axis-aligned box `prod [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    /// The centred cube `[-side/2, side/2]^dim`.
    pub fn centered(dim: usize, side: f64) -> Self {
        Region {
            lo: vec![-0.5 * side; dim],
            hi: vec![0.5 * side; dim],
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }
}

fn uniform_in_box(rng: &mut rng::Rng, dim: usize, side: f64, count: usize) -> Vec<f64> {
    let half = 0.5 * side;
    (0..count * dim)
        .map(|_| (-half + side * rng.gen::<f64>()).min(half))
        .collect()
}

/// Homogeneous Poisson process of intensity `rho` in `[-side/2, side/2]^dim`.
pub fn sample_poisson(rho: f64, dim: usize, side: f64, seed: u64) -> Result<PointSet> {
    ensure(rho > 0.0 && rho.is_finite(), || format!("rho must be positive, got {rho}"))?;
    ensure(side > 0.0 && side.is_finite(), || format!("side must be positive, got {side}"))?;
    ensure(dim >= 1, || "dim must be >= 1".into())?;
    let mean = rho * side.powi(dim as i32);
    let mut rng = rng::rng_from_seed(seed);
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidParameter(format!("poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    let coords = uniform_in_box(&mut rng, dim, side, count);
    PointSet::new(dim, side, coords, seed, format!("poisson(rho={rho})"))
}

/// Inhomogeneous Poisson process with intensity `intensity(x) <= rho_max`,
/// sampled by thinning a rate-`rho_max` homogeneous sample. With the same
/// seed the candidate points coincide with [`sample_poisson`]`(rho_max, ..)`.
pub fn sample_inhomogeneous_poisson<F>(intensity: F, rho_max: f64, dim: usize, side: f64, seed: u64) -> Result<PointSet>
where
    F: Fn(&[f64]) -> f64,
{
    let base = sample_poisson(rho_max, dim, side, seed)?;
    let check = |p: &[f64]| -> Result<f64> {
        let v = intensity(p);
        if !(v > 0.0) || v > rho_max {
            return Err(Error::InvalidParameter(format!(
                "intensity {v} at {p:?} outside (0, {rho_max}]"
            )));
        }
        Ok(v)
    };
    check(&vec![0.0; dim])?;
    let mut thin = rng::child_rng(seed, &[THINNING_STREAM]);
    let mut coords = Vec::with_capacity(base.coords.len());
    for p in base.points() {
        let keep = check(p)? / rho_max;
        if thin.gen::<f64>() < keep {
            coords.extend_from_slice(p);
        }
    }
    PointSet::new(dim, side, coords, seed, format!("inhomogeneous(rho_max={rho_max})"))
}

/// Points of `spacing * Z^d` inside the closed box, each kept independently
/// with probability `keep_prob`. Points on the box boundary are included.
pub fn sample_thinned_lattice(spacing: f64, keep_prob: f64, dim: usize, side: f64, seed: u64) -> Result<PointSet> {
    ensure(spacing > 0.0 && spacing.is_finite(), || format!("spacing must be positive, got {spacing}"))?;
    ensure(keep_prob > 0.0 && keep_prob <= 1.0, || format!("keep_prob must lie in (0, 1], got {keep_prob}"))?;
    ensure(side > 0.0 && side.is_finite(), || format!("side must be positive, got {side}"))?;
    ensure(dim >= 1, || "dim must be >= 1".into())?;
    let half = 0.5 * side;
    let mut kmax = (half / spacing).floor() as i64;
    while (kmax + 1) as f64 * spacing <= half {
        kmax += 1;
    }
    while kmax as f64 * spacing > half {
        kmax -= 1;
    }
    let per_axis = (2 * kmax + 1) as usize;
    let total = per_axis.pow(dim as u32);
    let mut rng = rng::rng_from_seed(seed);
    let mut coords = Vec::new();
    let mut idx = vec![-kmax; dim];
    for _ in 0..total {
        let keep = keep_prob >= 1.0 || rng.gen::<f64>() < keep_prob;
        if keep {
            coords.extend(idx.iter().map(|&k| k as f64 * spacing));
        }
        // odometer, last axis fastest
        for a in (0..dim).rev() {
            if idx[a] < kmax {
                idx[a] += 1;
                break;
            }
            idx[a] = -kmax;
        }
    }
    PointSet::new(dim, side, coords, seed, format!("thinned_lattice(spacing={spacing},p={keep_prob})"))
}

/// Occupancy field of the partition into cubes `x K + [0, K)^d` that meet
/// the box in positive volume.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxOccupancy {
    pub cube_side: f64,
    pub origin_offset: Vec<f64>,
    lo: Vec<i64>,
    shape: Vec<usize>,
    occupied: Vec<bool>,
}

impl BoxOccupancy {
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    fn flat(&self, x: &[i64]) -> Option<usize> {
        let mut f = 0usize;
        for a in 0..self.dim() {
            let off = x[a] - self.lo[a];
            if off < 0 || off as usize >= self.shape[a] {
                return None;
            }
            f = f * self.shape[a] + off as usize;
        }
        Some(f)
    }

    fn unflat(&self, mut f: usize) -> Vec<i64> {
        let mut x = vec![0i64; self.dim()];
        for a in (0..self.dim()).rev() {
            x[a] = self.lo[a] + (f % self.shape[a]) as i64;
            f /= self.shape[a];
        }
        x
    }

    /// `sigma_x`, or `None` outside the field.
    pub fn get(&self, x: &[i64]) -> Option<bool> {
        self.flat(x).map(|f| self.occupied[f])
    }

    /// All `(index, sigma)` pairs in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, bool)> + '_ {
        (0..self.occupied.len()).map(move |f| (self.unflat(f), self.occupied[f]))
    }

    pub fn good_count(&self) -> usize {
        self.occupied.iter().filter(|&&b| b).count()
    }

    pub fn good_fraction(&self) -> f64 {
        if self.occupied.is_empty() {
            0.0
        } else {
            self.good_count() as f64 / self.occupied.len() as f64
        }
    }
}

/// Good-box field `sigma_x = [xi(B_x) >= 1]` for the `K`-cube partition.
/// Points exactly on the upper box face fall in a cube that meets the box
/// only in a null set and are not counted.
pub fn good_box_field(xi: &PointSet, cube_side: f64) -> Result<BoxOccupancy> {
    ensure(cube_side > 0.0 && cube_side.is_finite(), || format!("cube side must be positive, got {cube_side}"))?;
    let d = xi.dim();
    let half = 0.5 * xi.side();
    let lo_i = (-half / cube_side).floor() as i64;
    let hi_i = (half / cube_side).ceil() as i64 - 1;
    let lo = vec![lo_i; d];
    let shape = vec![(hi_i - lo_i + 1).max(0) as usize; d];
    let total = shape.iter().product();
    let mut field = BoxOccupancy {
        cube_side,
        origin_offset: vec![0.0; d],
        lo,
        shape,
        occupied: vec![false; total],
    };
    for p in xi.points() {
        let x: Vec<i64> = p.iter().map(|c| (c / cube_side).floor() as i64).collect();
        if let Some(f) = field.flat(&x) {
            field.occupied[f] = true;
        }
    }
    Ok(field)
}

/// `R_A(xi) = sum_{x in xi ∩ A} sum_{y in xi} exp(-|x-y|^alpha)`, diagonal
/// included, so `R_A >= xi(A)`. Terms below [`R_TERM_FLOOR`] are skipped.
pub fn r_statistic(xi: &PointSet, region: &Region, alpha: f64) -> f64 {
    let n = xi.len();
    if n == 0 {
        return 0.0;
    }
    let radius = rate_radius(R_TERM_FLOOR, alpha);
    let r2 = radius * radius;
    // strip search along the first axis
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xi.point(a)[0].total_cmp(&xi.point(b)[0]).then(a.cmp(&b)));
    let first: Vec<f64> = order.iter().map(|&i| xi.point(i)[0]).collect();
    let mut total = 0.0;
    for x in xi.points().filter(|p| region.contains(p)) {
        let start = first.partition_point(|&v| v < x[0] - radius);
        let end = first.partition_point(|&v| v <= x[0] + radius);
        let mut row = 0.0;
        for &j in &order[start..end] {
            let d2 = dist_sq(x, xi.point(j));
            if d2 <= r2 {
                row += jump_rate(d2, alpha);
            }
        }
        total += row;
    }
    total
}

/// Largest `||u - v||_inf` kept in the `S_ell` double sum.
pub fn s_truncation(alpha: f64) -> i64 {
    rate_radius(S_KERNEL_FLOOR, alpha).ceil() as i64
}

/// `S_ell(xi) = sum_{u in Λ_ell ∩ Z^d} sum_{v} exp(-|u-v|^alpha) xi(Q_u) xi(Q_v)`
/// with unit cubes `Q_u = u + [-1/2, 1/2]^d`. The `v`-sum is truncated at
/// `||v - u||_inf <= `[`s_truncation`]`(alpha)`; only points of `xi` enter, so
/// the caller's box should extend that far beyond `Λ_ell`.
pub fn s_statistic(xi: &PointSet, ell: u32, alpha: f64) -> f64 {
    let d = xi.dim();
    let vmax = s_truncation(alpha);
    let uhalf = (ell / 2) as i64;
    let reach = uhalf + vmax;
    let width = (2 * reach + 1) as usize;
    let cells = width.pow(d as u32);
    let mut counts = vec![0u32; cells];
    let flat = |x: &[i64]| -> Option<usize> {
        let mut f = 0usize;
        for &c in x {
            if c.abs() > reach {
                return None;
            }
            f = f * width + (c + reach) as usize;
        }
        Some(f)
    };
    for p in xi.points() {
        let x: Vec<i64> = p.iter().map(|c| c.round() as i64).collect();
        if let Some(f) = flat(&x) {
            counts[f] += 1;
        }
    }
    // kernel offsets
    let kw = (2 * vmax + 1) as usize;
    let mut offsets: Vec<(Vec<i64>, f64)> = Vec::with_capacity(kw.pow(d as u32));
    let mut off = vec![-vmax; d];
    for _ in 0..kw.pow(d as u32) {
        let d2: f64 = off.iter().map(|&o| (o * o) as f64).sum();
        offsets.push((off.clone(), jump_rate(d2, alpha)));
        for a in (0..d).rev() {
            if off[a] < vmax {
                off[a] += 1;
                break;
            }
            off[a] = -vmax;
        }
    }
    let mut total = 0.0;
    let mut u = vec![-uhalf; d];
    let mut v = vec![0i64; d];
    for _ in 0..((2 * uhalf + 1) as usize).pow(d as u32) {
        let nu = counts[flat(&u).expect("u inside count grid")];
        if nu > 0 {
            let mut acc = 0.0;
            for (o, k) in &offsets {
                for a in 0..d {
                    v[a] = u[a] + o[a];
                }
                let nv = counts[flat(&v).expect("v inside count grid")];
                if nv > 0 {
                    acc += k * nv as f64;
                }
            }
            total += nu as f64 * acc;
        }
        for a in (0..d).rev() {
            if u[a] < uhalf {
                u[a] += 1;
                break;
            }
            u[a] = -uhalf;
        }
    }
    total
}

/// Write a point set as CSV: a `# dim=..,side=..,seed=..,label=..` comment
/// line, then one row per point with 17 significant digits.
pub fn write_csv<W: Write>(xi: &PointSet, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# dim={},side={},seed={},label={}",
        xi.dim,
        xi.side,
        xi.seed,
        xi.label.replace(['\n', ','], " ")
    )?;
    for p in xi.points() {
        let row: Vec<String> = p.iter().map(|c| format!("{c:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Read a point set written by [`write_csv`]. Files without the header line
/// are accepted: the dimension comes from the column count and the side is
/// the smallest centred box holding every point.
pub fn read_csv<R: BufRead>(input: R) -> Result<PointSet> {
    let mut dim = None;
    let mut side = None;
    let mut seed = 0u64;
    let mut label = String::from("csv");
    let mut coords = Vec::new();
    let mut cols = None;
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            for kv in rest.trim().split(',') {
                let Some((k, v)) = kv.split_once('=') else { continue };
                let bad = |_| Error::InvalidInput(format!("line {}: bad header value {kv:?}", lineno + 1));
                match k.trim() {
                    "dim" => dim = Some(v.trim().parse::<usize>().map_err(|e| bad(e.to_string()))?),
                    "side" => side = Some(v.trim().parse::<f64>().map_err(|e| bad(e.to_string()))?),
                    "seed" => seed = v.trim().parse::<u64>().map_err(|e| bad(e.to_string()))?,
                    "label" => label = v.trim().to_string(),
                    _ => {}
                }
            }
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::InvalidInput(format!("line {}: expected {c} columns", lineno + 1)))
            }
            _ => {}
        }
        coords.extend(row);
    }
    let dim = dim.or(cols).ok_or_else(|| Error::InvalidInput("no header and no points".into()))?;
    if let Some(c) = cols {
        if c != dim {
            return Err(Error::InvalidInput(format!("header dim {dim} but rows have {c} columns")));
        }
    }
    let side = match side {
        Some(s) => s,
        None => {
            let m = coords.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if m > 0.0 {
                2.0 * m
            } else {
                1.0
            }
        }
    };
    PointSet::new(dim, side, coords, seed, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_points() -> PointSet {
        PointSet::new(2, 4.0, vec![0.0, 0.0, 1.0, 0.0], 0, "pair").unwrap()
    }

    #[test]
    fn poisson_is_deterministic_and_inside_box() {
        let a = sample_poisson(1.0, 2, 10.0, 42).unwrap();
        let b = sample_poisson(1.0, 2, 10.0, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_poisson(1.0, 2, 10.0, 43).unwrap();
        assert_ne!(a, c);
        assert!(a.points().all(|p| p.iter().all(|x| x.abs() <= 5.0)));
    }

    #[test]
    fn poisson_rejects_bad_parameters() {
        assert!(matches!(sample_poisson(0.0, 2, 10.0, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(sample_poisson(1.0, 2, -1.0, 1), Err(Error::InvalidParameter(_))));
        assert!(sample_poisson(1.0, 0, 1.0, 1).is_err());
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let err = PointSet::new(2, 4.0, vec![0.5, 0.5, 0.5, 0.5], 0, "dup").unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(PointSet::new(1, 2.0, vec![1.5], 0, "out").is_err());
    }

    #[test]
    fn inhomogeneous_with_full_intensity_matches_homogeneous() {
        let a = sample_inhomogeneous_poisson(|_| 2.0, 2.0, 2, 8.0, 9).unwrap();
        let b = sample_poisson(2.0, 2, 8.0, 9).unwrap();
        assert_eq!(a.coords(), b.coords());
    }

    #[test]
    fn inhomogeneous_rejects_out_of_range_intensity() {
        assert!(sample_inhomogeneous_poisson(|_| 0.0, 1.0, 2, 5.0, 1).is_err());
        assert!(sample_inhomogeneous_poisson(|_| 2.0, 1.0, 2, 5.0, 1).is_err());
    }

    #[test]
    fn full_lattice_includes_boundary() {
        let a = sample_thinned_lattice(1.0, 1.0, 2, 4.0, 1).unwrap();
        assert_eq!(a.len(), 25);
        let b = sample_thinned_lattice(1.0, 1.0, 2, 4.0, 999).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert!(a.points().any(|p| p == [2.0, -2.0]));
        assert!(sample_thinned_lattice(1.0, 0.0, 2, 4.0, 1).is_err());
        assert!(sample_thinned_lattice(1.0, 1.5, 2, 4.0, 1).is_err());
    }

    #[test]
    fn good_boxes_of_trivial_configurations() {
        let empty = PointSet::empty(2, 6.0).unwrap();
        let f = good_box_field(&empty, 1.0).unwrap();
        assert_eq!(f.len(), 36);
        assert_eq!(f.good_count(), 0);

        let origin = PointSet::new(2, 6.0, vec![0.0, 0.0], 0, "o").unwrap();
        let f = good_box_field(&origin, 1.0).unwrap();
        assert_eq!(f.good_count(), 1);
        assert_eq!(f.get(&[0, 0]), Some(true));
        assert_eq!(f.get(&[-1, 0]), Some(false));
        assert!(good_box_field(&origin, 0.0).is_err());
    }

    #[test]
    fn r_statistic_closed_forms() {
        let one = PointSet::new(2, 4.0, vec![0.3, -0.2], 0, "one").unwrap();
        let all = Region::centered(2, 4.0);
        assert_relative_eq!(r_statistic(&one, &all, 1.0), 1.0);
        let pair = two_points();
        assert_relative_eq!(r_statistic(&pair, &all, 1.0), 2.0 + 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        let far = Region {
            lo: vec![1.5, 1.5],
            hi: vec![2.0, 2.0],
        };
        assert_eq!(r_statistic(&pair, &far, 1.0), 0.0);
    }

    #[test]
    fn s_statistic_closed_forms() {
        let empty = PointSet::empty(2, 20.0).unwrap();
        assert_eq!(s_statistic(&empty, 4, 1.0), 0.0);
        let one = PointSet::new(2, 100.0, vec![0.1, 0.2], 0, "one").unwrap();
        assert_relative_eq!(s_statistic(&one, 4, 1.0), 1.0);
        // two points in neighbouring unit cubes
        let two = PointSet::new(2, 100.0, vec![0.0, 0.0, 1.0, 0.0], 0, "two").unwrap();
        assert_relative_eq!(s_statistic(&two, 4, 1.0), 2.0 + 2.0 * (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn csv_round_trip_and_headerless_input() {
        let a = sample_poisson(1.0, 2, 5.0, 3).unwrap();
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# dim=2,side=5,seed=3"));
        let b = read_csv(buf.as_slice()).unwrap();
        assert_eq!(a.coords(), b.coords());
        assert_eq!((a.dim(), a.side(), a.seed), (b.dim(), b.side(), b.seed));

        let bare = read_csv("0,0\n1,0\n".as_bytes()).unwrap();
        assert_eq!(bare.len(), 2);
        assert_eq!(bare.side(), 2.0);
        assert!(read_csv("0,0\n1\n".as_bytes()).is_err());
    }
}
