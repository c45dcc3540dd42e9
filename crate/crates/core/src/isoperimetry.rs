//! Cut conductances, exact Cheeger constants and isoperimetric profiles by
//! subset enumeration, and the sweep and trap upper bounds for large sets.
//!
//! Every cut flow is computed from untruncated rates recomputed from the
//! point coordinates, so a sparse generator never underestimates a flow.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use crate::error::{ensure, Error, Result};
use crate::exec::Execution;
use crate::walk::{Model, WalkGenerator};

/// Largest `n` for exact enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

/// Relative slack when comparing a subset mass with a constraint, so that
/// ties at exactly `t` survive rounding.
pub const MASS_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn fits(mass: f64, bound: f64) -> bool {
    mass <= bound * (1.0 + MASS_TOL)
}

/// Conductance of one cut.
#[derive(Debug, Clone, PartialEq)]
pub struct CutReport {
    pub subset: Vec<usize>,
    pub weight: f64,
    pub flow: f64,
    pub conductance: f64,
    pub pi_mass: f64,
}

/// Which conductance and which size constraint a profile uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// `phi(t)`: model conductance, constraint `W(U) <= t W`.
    Standard(Model),
    /// `psi(t)`: model-3 conductance, constraint `#U <= t n`.
    Hybrid,
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Standard(m) => write!(f, "standard-{m}"),
            ProfileKind::Hybrid => write!(f, "hybrid"),
        }
    }
}

/// A profile sampled on an increasing grid; `+inf` marks grid points with no
/// admissible set.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ProfileKind,
}

impl IsoProfile {
    /// Value at the largest grid point `<= t`, `+inf` below the grid.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.grid.partition_point(|&g| g <= t);
        if i == 0 {
            f64::INFINITY
        } else {
            self.values[i - 1]
        }
    }

    /// CSV with a `t,phi` header; infinite values are written as `inf`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,phi")?;
        for (t, v) in self.grid.iter().zip(&self.values) {
            if v.is_infinite() {
                writeln!(out, "{t},inf")?;
            } else {
                writeln!(out, "{t},{v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Sorted vertex list of a bit mask.
pub fn mask_to_subset(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Lexicographic order of the sorted index lists of two masks.
pub fn lex_cmp_masks(a: u32, b: u32) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let j = (a ^ b).trailing_zeros();
    // the list containing j wins unless the other one ends before j
    let (with_j, other) = if a >> j & 1 == 1 { (a, b) } else { (b, a) };
    let other_continues = j < 31 && other >> (j + 1) != 0;
    let with_j_smaller = other_continues;
    if (with_j == a) == with_j_smaller {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn lex_cmp_lists(a: &[usize], b: &[usize]) -> Ordering {
    a.cmp(b)
}

fn validate_subset(n: usize, subset: &[usize]) -> Result<Vec<usize>> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != subset.len() {
        return Err(Error::InvalidCut("repeated vertex".into()));
    }
    if s.is_empty() {
        return Err(Error::InvalidCut("empty set".into()));
    }
    if s.len() >= n {
        return Err(Error::InvalidCut("set is the whole vertex set".into()));
    }
    if let Some(&x) = s.iter().find(|&&x| x >= n) {
        return Err(Error::InvalidCut(format!("vertex {x} out of range")));
    }
    Ok(s)
}

/// `I_U = flow(U, U^c) / W(U)` with untruncated rates.
pub fn cut_conductance(gen: &WalkGenerator, subset: &[usize]) -> Result<CutReport> {
    let n = gen.n();
    let s = validate_subset(n, subset)?;
    let mut inside = vec![false; n];
    for &x in &s {
        inside[x] = true;
    }
    let g = gen.graph();
    let mut flow = 0.0;
    for &x in &s {
        for y in (0..n).filter(|&y| !inside[y]) {
            flow += g.exact_rate(x, y);
        }
    }
    let weight: f64 = s.iter().map(|&x| gen.weights()[x]).sum();
    Ok(CutReport {
        conductance: flow / weight,
        pi_mass: weight / gen.total_weight(),
        subset: s,
        weight,
        flow,
    })
}

/// Precomputed partial sums for enumerating all `2^n` subsets. Vertices
/// `0..k` form the low part, `k..n` the high part; every flow is a sum of
/// nonnegative table entries.
pub(crate) struct CutTables {
    n: usize,
    k: usize,
    h: usize,
    /// `low_rate[v][a] = sum_{y in a} r(v, y)` for low subsets `a`.
    low_rate: Vec<Vec<f64>>,
    low_flow: Vec<f64>,
    high_flow: Vec<f64>,
    low_weight: Vec<f64>,
    high_weight: Vec<f64>,
    low_count: Vec<u32>,
    high_count: Vec<u32>,
}

fn subset_sums(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut out = vec![0.0; 1 << m];
    for a in 1usize..1 << m {
        let low = a.trailing_zeros() as usize;
        out[a] = out[a & (a - 1)] + values[low];
    }
    out
}

impl CutTables {
    pub(crate) fn new(gen: &WalkGenerator) -> Self {
        let n = gen.n();
        let g = gen.graph();
        let rate: Vec<Vec<f64>> = (0..n).map(|x| (0..n).map(|y| g.exact_rate(x, y)).collect()).collect();
        let k = n.min(12);
        let h = n - k;
        let low_rate: Vec<Vec<f64>> = (0..n).map(|v| subset_sums(&rate[v][..k])).collect();
        let high_rate: Vec<Vec<f64>> = (0..n).map(|v| subset_sums(&rate[v][k..])).collect();
        let lmask = (1usize << k) - 1;
        let hmask = (1usize << h) - 1;
        let low_flow = (0..1usize << k)
            .map(|a| (0..k).filter(|&u| a >> u & 1 == 1).map(|u| low_rate[u][lmask ^ a]).sum())
            .collect();
        let high_flow = (0..1usize << h)
            .map(|b| (0..h).filter(|&u| b >> u & 1 == 1).map(|u| high_rate[k + u][hmask ^ b]).sum())
            .collect();
        let w = gen.weights();
        CutTables {
            n,
            k,
            h,
            low_rate,
            low_flow,
            high_flow,
            low_weight: subset_sums(&w[..k]),
            high_weight: subset_sums(&w[k..]),
            low_count: (0..1u32 << k).map(u32::count_ones).collect(),
            high_count: (0..1u32 << h).map(u32::count_ones).collect(),
        }
    }

    /// Visit every proper nonempty subset as `(mask, flow, weight, count)`;
    /// one accumulator per high block, returned in block order.
    pub(crate) fn for_each_block<R, I, V>(&self, exec: Execution, init: I, visit: V) -> Vec<R>
    where
        R: Send,
        I: Fn() -> R + Sync + Send,
        V: Fn(&mut R, u32, f64, f64, u32) + Sync + Send,
    {
        let (n, k, h) = (self.n, self.k, self.h);
        let lmask = (1usize << k) - 1;
        let full = (1u64 << n) - 1;
        exec.map_range(1 << h, |b| {
            let mut acc = init();
            let mut cross = vec![0.0; 1 << k];
            for u in 0..h {
                let table = &self.low_rate[k + u];
                if b >> u & 1 == 1 {
                    for (a, c) in cross.iter_mut().enumerate() {
                        *c += table[lmask ^ a];
                    }
                } else {
                    for (a, c) in cross.iter_mut().enumerate() {
                        *c += table[a];
                    }
                }
            }
            for a in 0..1usize << k {
                let mask = (b << k | a) as u64;
                if mask == 0 || mask == full {
                    continue;
                }
                let flow = self.high_flow[b] + self.low_flow[a] + cross[a];
                let weight = self.high_weight[b] + self.low_weight[a];
                let count = self.high_count[b] + self.low_count[a];
                visit(&mut acc, mask as u32, flow, weight, count);
            }
            acc
        })
    }
}

fn check_enumerable(n: usize) -> Result<()> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    Ok(())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    ensure(!grid.is_empty(), || "empty grid".into())?;
    ensure(grid.iter().all(|&t| t > 0.0 && t <= 1.0), || "grid points must lie in (0, 1]".into())?;
    ensure(grid.windows(2).all(|w| w[0] < w[1]), || "grid must be increasing".into())?;
    Ok(())
}

/// Best `(conductance, mask)` per grid bin.
type Bins = Vec<(f64, u32)>;

fn better(a: (f64, u32), b: (f64, u32)) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => lex_cmp_masks(a.1, b.1) == Ordering::Less,
    }
}

/// Enumerate and reduce to the running minimum on the grid, with argmin.
fn profile_with_argmin(gen: &WalkGenerator, grid: &[f64], kind: ProfileKind, exec: Execution) -> Result<Vec<(f64, u32)>> {
    check_enumerable(gen.n())?;
    check_grid(grid)?;
    let tables = CutTables::new(gen);
    let n = gen.n() as f64;
    let total = gen.total_weight();
    let empty = (f64::INFINITY, u32::MAX);
    let blocks: Vec<Bins> = tables.for_each_block(
        exec,
        || vec![empty; grid.len()],
        |bins, mask, flow, weight, count| {
            let i = match kind {
                ProfileKind::Standard(_) => grid.partition_point(|&t| !fits(weight, t * total)),
                ProfileKind::Hybrid => grid.partition_point(|&t| !fits(count as f64, t * n)),
            };
            if i < bins.len() {
                let cand = (flow / weight, mask);
                if better(cand, bins[i]) {
                    bins[i] = cand;
                }
            }
        },
    );
    let mut best = vec![empty; grid.len()];
    for bins in blocks {
        for (b, c) in best.iter_mut().zip(bins) {
            if better(c, *b) {
                *b = c;
            }
        }
    }
    for i in 1..best.len() {
        if better(best[i - 1], best[i]) {
            best[i] = best[i - 1];
        }
    }
    Ok(best)
}

/// Exact Cheeger constant `Phi = min I_U` over `W(U) <= W/2`, with the
/// lexicographically smallest minimising set.
pub fn cheeger_exact(gen: &WalkGenerator) -> Result<(f64, Vec<usize>)> {
    cheeger_exact_with(gen, Execution::default())
}

pub fn cheeger_exact_with(gen: &WalkGenerator, exec: Execution) -> Result<(f64, Vec<usize>)> {
    let best = profile_with_argmin(gen, &[0.5], ProfileKind::Standard(gen.model()), exec)?;
    let (phi, mask) = best[0];
    Ok((phi, mask_to_subset(mask)))
}

/// Exact isoperimetric profile `phi(t)` on the grid.
pub fn iso_profile_exact(gen: &WalkGenerator, grid: &[f64]) -> Result<IsoProfile> {
    iso_profile_exact_with(gen, grid, Execution::default())
}

pub fn iso_profile_exact_with(gen: &WalkGenerator, grid: &[f64], exec: Execution) -> Result<IsoProfile> {
    let kind = ProfileKind::Standard(gen.model());
    let best = profile_with_argmin(gen, grid, kind, exec)?;
    Ok(IsoProfile {
        grid: grid.to_vec(),
        values: best.into_iter().map(|b| b.0).collect(),
        kind,
    })
}

/// Exact hybrid profile `psi(t)`: model-3 conductance under `#U <= t n`.
pub fn hybrid_profile_exact(gen3: &WalkGenerator, grid: &[f64]) -> Result<IsoProfile> {
    hybrid_profile_exact_with(gen3, grid, Execution::default())
}

pub fn hybrid_profile_exact_with(gen3: &WalkGenerator, grid: &[f64], exec: Execution) -> Result<IsoProfile> {
    if gen3.model() != Model::Hybrid {
        return Err(Error::InvalidModel {
            expected: 3,
            got: gen3.model().index(),
        });
    }
    let best = profile_with_argmin(gen3, grid, ProfileKind::Hybrid, exec)?;
    Ok(IsoProfile {
        grid: grid.to_vec(),
        values: best.into_iter().map(|b| b.0).collect(),
        kind: ProfileKind::Hybrid,
    })
}

/// Sweep-cut upper bound: order vertices by `values` (ties by index) and take
/// the best admissible side of every prefix cut.
pub fn sweep_cut(gen: &WalkGenerator, values: &[f64]) -> Result<CutReport> {
    let n = gen.n();
    if n < 2 {
        return Err(Error::TooSmall { need: 2, got: n });
    }
    if values.len() != n {
        return Err(Error::InvalidInput(format!("{} sweep values for {n} vertices", values.len())));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let g = gen.graph();
    let w = gen.weights();
    let total = gen.total_weight();
    let mut prefix_w = vec![0.0; n + 1];
    for k in 0..n {
        prefix_w[k + 1] = prefix_w[k] + w[order[k]];
    }
    let mut suffix_w = vec![0.0; n + 1];
    for k in (0..n).rev() {
        suffix_w[k] = suffix_w[k + 1] + w[order[k]];
    }
    // into[y] = sum of rates from the current prefix to y
    let mut into = vec![0.0; n];
    let mut inside = vec![false; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for k in 1..n {
        let u = order[k - 1];
        inside[u] = true;
        for (y, c) in into.iter_mut().enumerate() {
            if y != u {
                *c += g.exact_rate(u, y);
            }
        }
        let flow: f64 = (0..n).filter(|&y| !inside[y]).map(|y| into[y]).sum();
        let (wu, wc) = (prefix_w[k], suffix_w[k]);
        let (cond, side) = if fits(wu, 0.5 * total) && (wu >= wc || !fits(wc, 0.5 * total)) {
            (flow / wu, &order[..k])
        } else {
            (flow / wc, &order[k..])
        };
        let replace = match &best {
            None => true,
            Some((c, s)) => match cond.total_cmp(c) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let mut cand = side.to_vec();
                    cand.sort_unstable();
                    lex_cmp_lists(&cand, s) == Ordering::Less
                }
            },
        };
        if replace {
            let mut s = side.to_vec();
            s.sort_unstable();
            best = Some((cond, s));
        }
    }
    let (_, subset) = best.expect("n >= 2 gives at least one cut");
    cut_conductance(gen, &subset)
}

/// Sweep upper bound on `Phi` along the slowest eigenfunction.
pub fn cheeger_sweep_upper(gen: &WalkGenerator) -> Result<(f64, Vec<usize>)> {
    let f = crate::spectral::slowest_eigenfunction(gen)?;
    let report = sweep_cut(gen, &f)?;
    Ok((report.conductance, report.subset))
}

/// Trap upper bound: the best admissible singleton, and for model 2 also
/// every pair at distance at most `sqrt(d)`.
pub fn trap_upper_bound(gen: &WalkGenerator) -> Result<(f64, Vec<usize>)> {
    let report = trap_cut(gen)?;
    Ok((report.conductance, report.subset))
}

pub fn trap_cut(gen: &WalkGenerator) -> Result<CutReport> {
    let n = gen.n();
    if n < 3 {
        return Err(Error::TooSmall { need: 3, got: n });
    }
    let g = gen.graph();
    let w = gen.weights();
    let half = 0.5 * gen.total_weight();
    let exec = Execution::default();
    let degree: Vec<f64> = exec.map_range(n, |x| (0..n).filter(|&y| y != x).map(|y| g.exact_rate(x, y)).sum());
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut offer = |cond: f64, set: Vec<usize>| {
        let replace = match &best {
            None => true,
            Some((c, s)) => cond < *c || (cond == *c && set < *s),
        };
        if replace {
            best = Some((cond, set));
        }
    };
    for x in 0..n {
        if fits(w[x], half) {
            offer(degree[x] / w[x], vec![x]);
        }
    }
    if gen.model() == Model::Full {
        let pairs = close_pairs(gen, (g.dim() as f64).sqrt());
        let flows = exec.map_slice(&pairs, |&(x, y)| {
            let r = g.exact_rate(x, y);
            let sum = degree[x] + degree[y];
            let diff = sum - 2.0 * r;
            if diff > 1e-3 * sum {
                diff
            } else {
                (0..n)
                    .filter(|&z| z != x && z != y)
                    .map(|z| g.exact_rate(x, z) + g.exact_rate(y, z))
                    .sum()
            }
        });
        for (&(x, y), flow) in pairs.iter().zip(flows) {
            let wu = w[x] + w[y];
            if fits(wu, half) {
                offer(flow / wu, vec![x, y]);
            }
        }
    }
    let (_, subset) = best.ok_or_else(|| Error::InvalidCut("no admissible trap candidate".into()))?;
    cut_conductance(gen, &subset)
}

/// Pairs `x < y` with `|x - y| <= radius`, in lexicographic order.
fn close_pairs(gen: &WalkGenerator, radius: f64) -> Vec<(usize, usize)> {
    let g = gen.graph();
    let n = g.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g.point(a)[0].total_cmp(&g.point(b)[0]).then(a.cmp(&b)));
    let r2 = radius * radius;
    let mut pairs = Vec::new();
    for (i, &x) in order.iter().enumerate() {
        for &y in &order[i + 1..] {
            let dx = g.point(y)[0] - g.point(x)[0];
            if dx > radius {
                break;
            }
            let d2: f64 = g.point(x).iter().zip(g.point(y)).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= r2 {
                pairs.push((x.min(y), x.max(y)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::{sample_poisson, PointSet};
    use crate::walk::build_generator;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointSet {
        let coords = xs.iter().flat_map(|&x| [x, 0.0]).collect();
        PointSet::new(2, 40.0, coords, 0, "line").unwrap()
    }

    /// Direct definition over all masks, independent of the tables.
    fn brute_profile(gen: &WalkGenerator, grid: &[f64], hybrid: bool) -> Vec<f64> {
        let n = gen.n();
        grid.iter()
            .map(|&t| {
                let mut best = f64::INFINITY;
                for mask in 1u32..(1 << n) - 1 {
                    let s = mask_to_subset(mask);
                    let c = cut_conductance(gen, &s).unwrap();
                    let ok = if hybrid {
                        fits(s.len() as f64, t * n as f64)
                    } else {
                        fits(c.weight, t * gen.total_weight())
                    };
                    if ok {
                        best = best.min(c.conductance);
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn two_point_conductances() {
        let xi = line(&[0.0, 1.5]);
        let r = (-1.5f64).exp();
        let g1 = build_generator(&xi, 1.0, Model::Unit, 0.0).unwrap();
        assert_relative_eq!(cut_conductance(&g1, &[0]).unwrap().conductance, r, max_relative = 1e-15);
        assert_eq!(
            cut_conductance(&g1, &[0]).unwrap().conductance,
            cut_conductance(&g1, &[1]).unwrap().conductance
        );
        let g2 = build_generator(&xi, 1.0, Model::Full, 0.0).unwrap();
        assert_relative_eq!(cut_conductance(&g2, &[0]).unwrap().conductance, 1.0, max_relative = 1e-15);
        assert_relative_eq!(cheeger_exact(&g2).unwrap().0, 1.0, max_relative = 1e-15);
        let (phi, set) = cheeger_exact(&g1).unwrap();
        assert_relative_eq!(phi, r, max_relative = 1e-15);
        assert_eq!(set, vec![0]);
        assert!(matches!(cut_conductance(&g1, &[]), Err(Error::InvalidCut(_))));
        assert!(matches!(cut_conductance(&g1, &[0, 1]), Err(Error::InvalidCut(_))));
    }

    #[test]
    fn hybrid_two_points() {
        let g3 = build_generator(&line(&[0.0, 1.0]), 1.0, Model::Hybrid, 0.0).unwrap();
        let p = hybrid_profile_exact(&g3, &[0.5]).unwrap();
        assert_relative_eq!(p.values[0], (-1.0f64).exp(), max_relative = 1e-15);
        let g1 = build_generator(&line(&[0.0, 1.0]), 1.0, Model::Unit, 0.0).unwrap();
        assert_eq!(
            hybrid_profile_exact(&g1, &[0.5]),
            Err(Error::InvalidModel { expected: 3, got: 1 })
        );
    }

    #[test]
    fn trap_on_three_collinear_points() {
        let g1 = build_generator(&line(&[0.0, 1.0, 10.0]), 1.0, Model::Unit, 0.0).unwrap();
        let (phi, set) = trap_upper_bound(&g1).unwrap();
        assert_eq!(set, vec![2]);
        assert_relative_eq!(phi, (-10.0f64).exp() + (-9.0f64).exp(), max_relative = 1e-14);
        assert!(cheeger_exact(&g1).unwrap().0 <= phi);
        let two = build_generator(&line(&[0.0, 1.0]), 1.0, Model::Unit, 0.0).unwrap();
        assert_eq!(trap_upper_bound(&two), Err(Error::TooSmall { need: 3, got: 2 }));
    }

    #[test]
    fn trap_finds_isolated_pair_in_model2() {
        let mut coords = vec![10.0, 10.0, 10.5, 10.0];
        for i in 0..3 {
            for j in 0..3 {
                coords.extend([-3.0 + i as f64 * 0.8, -3.0 + j as f64 * 0.8]);
            }
        }
        let xi = PointSet::new(2, 30.0, coords, 0, "pair").unwrap();
        let gen = build_generator(&xi, 1.0, Model::Full, 0.0).unwrap();
        let (phi, set) = trap_upper_bound(&gen).unwrap();
        assert_eq!(set, vec![0, 1]);
        for x in 0..gen.n() {
            assert!(phi <= cut_conductance(&gen, &[x]).unwrap().conductance);
        }
        assert!(cheeger_exact(&gen).unwrap().0 <= phi * (1.0 + 1e-12));
    }

    #[test]
    fn enumeration_limit() {
        let xi = sample_poisson(4.0, 2, 3.0, 1).unwrap();
        assert!(xi.len() > ENUMERATION_LIMIT);
        let gen = build_generator(&xi, 1.0, Model::Unit, 0.0).unwrap();
        assert!(matches!(cheeger_exact(&gen), Err(Error::EnumerationLimit { .. })));
    }

    #[test]
    fn square_corners_sweep_is_deterministic() {
        let xi = PointSet::new(2, 4.0, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0], 0, "square").unwrap();
        let gen = build_generator(&xi, 1.0, Model::Unit, 0.0).unwrap();
        let a = cheeger_sweep_upper(&gen).unwrap();
        let b = cheeger_sweep_upper(&gen).unwrap();
        assert_eq!(a, b);
        assert!(a.0 >= cheeger_exact(&gen).unwrap().0 * (1.0 - 1e-12));
    }

    #[test]
    fn mask_order_is_lexicographic() {
        for a in 1u32..64 {
            for b in 1u32..64 {
                assert_eq!(lex_cmp_masks(a, b), mask_to_subset(a).cmp(&mask_to_subset(b)), "{a} {b}");
            }
        }
    }

    #[test]
    fn profile_csv_uses_inf_literal() {
        let p = IsoProfile {
            grid: vec![0.1, 0.5],
            values: vec![f64::INFINITY, 0.25],
            kind: ProfileKind::Hybrid,
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().nth(1), Some("0.1,inf"));
    }

    #[test]
    fn tables_agree_with_direct_enumeration_for_large_n() {
        // n > 12 exercises the split into high and low parts
        let xi = (0..)
            .map(|seed| sample_poisson(1.0, 2, 4.0, seed).unwrap())
            .find(|xi| (14..=18).contains(&xi.len()))
            .unwrap();
        let gen = build_generator(&xi, 1.0, Model::Full, 0.0).unwrap();
        let (phi, set) = cheeger_exact_with(&gen, Execution::Sequential).unwrap();
        let direct = cut_conductance(&gen, &set).unwrap();
        assert_relative_eq!(phi, direct.conductance, max_relative = 1e-12);
        assert!(fits(direct.weight, 0.5 * gen.total_weight()));
        assert_eq!(cheeger_exact_with(&gen, Execution::Parallel { workers: 3 }).unwrap(), (phi, set));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn enumeration_matches_brute_force(seed in 0u64..100_000, m in 1u8..=3, alpha in prop_oneof![Just(0.5), Just(1.0), Just(2.0)]) {
            let xi = sample_poisson(1.0, 2, 3.0, seed).unwrap();
            prop_assume!(xi.len() >= 4 && xi.len() <= 10);
            let gen = build_generator(&xi, alpha, Model::try_from(m).unwrap(), 0.0).unwrap();
            let grid = [0.1, 0.25, 0.4, 0.5, 0.75, 1.0];
            let p = iso_profile_exact(&gen, &grid).unwrap();
            let q = brute_profile(&gen, &grid, false);
            for (a, b) in p.values.iter().zip(&q) {
                prop_assert!(a == b || (a - b).abs() <= 1e-10 * b.abs());
            }
            prop_assert!(p.values.windows(2).all(|w| w[0] >= w[1]));
            let (phi, set) = cheeger_exact(&gen).unwrap();
            prop_assert_eq!(phi, p.values[3]);
            let c = cut_conductance(&gen, &set).unwrap();
            prop_assert!((c.conductance - phi).abs() <= 1e-12 * phi);
            let sweep = cheeger_sweep_upper(&gen).unwrap().0;
            prop_assert!(sweep >= phi * (1.0 - 1e-12));
            let trap = trap_upper_bound(&gen).unwrap().0;
            prop_assert!(trap >= phi * (1.0 - 1e-12));
            if m == 3 {
                let h = hybrid_profile_exact(&gen, &grid).unwrap();
                let hq = brute_profile(&gen, &grid, true);
                for (a, b) in h.values.iter().zip(&hq) {
                    prop_assert!(a == b || (a - b).abs() <= 1e-10 * b.abs());
                }
            }
        }

        #[test]
        fn report_mass_is_weight_fraction(seed in 0u64..10_000) {
            let xi = sample_poisson(1.0, 2, 4.0, seed).unwrap();
            prop_assume!(xi.len() >= 3);
            let gen = build_generator(&xi, 1.0, Model::Full, 1e-14).unwrap();
            let c = cut_conductance(&gen, &[0]).unwrap();
            prop_assert!(c.weight > 0.0 && c.conductance >= 0.0);
            prop_assert!((c.pi_mass - c.weight / gen.total_weight()).abs() <= 1e-12 * c.pi_mass);
        }
    }
}
