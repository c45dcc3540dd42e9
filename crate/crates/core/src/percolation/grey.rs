//! Grey-cube cluster of a point configuration and its multiscale checks.

use std::collections::HashSet;

use rand::Rng as _;

use crate::error::{ensure, Error, Result};
use crate::pointprocess::{good_box_field, PointSet};
use crate::rng::Rng;

/// Largest nearest-neighbour connected component of good `K`-cubes lying
/// inside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct GreyCluster {
    pub source: PointSet,
    pub cube_side: f64,
    /// Index range of cubes inside the box: `lo ..= lo + shape - 1` per axis.
    pub lo: Vec<i64>,
    pub shape: Vec<usize>,
    /// Member cube indices in lexicographic order.
    pub members: Vec<Vec<i64>>,
    member_flags: Vec<bool>,
    /// Number of cubes inside the box.
    pub inside_cubes: usize,
}

impl GreyCluster {
    fn flat(&self, x: &[i64]) -> Option<usize> {
        flat_index(&self.lo, &self.shape, x)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.flat(x).is_some_and(|f| self.member_flags[f])
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Fraction of inside cubes that belong to the cluster.
    pub fn coverage(&self) -> f64 {
        self.members.len() as f64 / self.inside_cubes as f64
    }

    /// Cluster cubes adjacent to `x`.
    pub fn member_neighbors(&self, x: &[i64]) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for a in 0..x.len() {
            for step in [-1, 1] {
                let mut y = x.to_vec();
                y[a] += step;
                if self.contains(&y) {
                    out.push(y);
                }
            }
        }
        out
    }
}

fn flat_index(lo: &[i64], shape: &[usize], x: &[i64]) -> Option<usize> {
    let mut f = 0usize;
    for a in 0..lo.len() {
        let off = x[a] - lo[a];
        if off < 0 || off as usize >= shape[a] {
            return None;
        }
        f = f * shape[a] + off as usize;
    }
    Some(f)
}

fn unflat(lo: &[i64], shape: &[usize], mut f: usize) -> Vec<i64> {
    let mut x = vec![0; lo.len()];
    for a in (0..lo.len()).rev() {
        x[a] = lo[a] + (f % shape[a]) as i64;
        f /= shape[a];
    }
    x
}

/// The grey cluster `C_L`: good cubes are those holding a point of `xi`.
/// Ties in size go to the component with the smallest cube index.
pub fn grey_cluster(xi: &PointSet, cube_side: f64) -> Result<GreyCluster> {
    let field = good_box_field(xi, cube_side)?;
    let d = xi.dim();
    let half = 0.5 * xi.side();
    let lo_i = (-half / cube_side).ceil() as i64;
    let hi_i = (half / cube_side).floor() as i64 - 1;
    if hi_i < lo_i {
        return Err(Error::Scale(format!("no {cube_side}-cube fits in a box of side {}", xi.side())));
    }
    let lo = vec![lo_i; d];
    let shape = vec![(hi_i - lo_i + 1) as usize; d];
    let total: usize = shape.iter().product();
    let good: Vec<bool> = (0..total)
        .map(|f| field.get(&unflat(&lo, &shape, f)).unwrap_or(false))
        .collect();
    let mut comp = vec![usize::MAX; total];
    let mut best: Option<(usize, usize)> = None; // (size, component id)
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..total {
        if !good[s] || comp[s] != usize::MAX {
            continue;
        }
        let c = comps.len();
        comp[s] = c;
        let mut members = vec![s];
        let mut k = 0;
        while k < members.len() {
            let x = unflat(&lo, &shape, members[k]);
            for a in 0..d {
                for step in [-1, 1] {
                    let mut y = x.clone();
                    y[a] += step;
                    if let Some(f) = flat_index(&lo, &shape, &y) {
                        if good[f] && comp[f] == usize::MAX {
                            comp[f] = c;
                            members.push(f);
                        }
                    }
                }
            }
            k += 1;
        }
        // components are discovered in order of their smallest index
        if best.is_none_or(|b| members.len() > b.0) {
            best = Some((members.len(), c));
        }
        comps.push(members);
    }
    let (_, c) = best.ok_or_else(|| Error::EmptyEnvironment("no good cube inside the box".into()))?;
    let mut flat_members = comps.swap_remove(c);
    flat_members.sort_unstable();
    let mut member_flags = vec![false; total];
    for &f in &flat_members {
        member_flags[f] = true;
    }
    Ok(GreyCluster {
        source: xi.clone(),
        cube_side,
        members: flat_members.iter().map(|&f| unflat(&lo, &shape, f)).collect(),
        lo,
        shape,
        member_flags,
        inside_cubes: total,
    })
}

/// Result of the density and occupancy checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    /// `min_x |C_L ∩ V_x| / |V_x|` over the `L^eps`-cube partition.
    pub density_min: f64,
    pub density_cube_side: f64,
    pub density_cubes: usize,
    /// Every `C_W (log L)^{1/d}`-cube holds a point.
    pub occupancy: bool,
    pub occupancy_cube_side: f64,
    pub occupancy_cubes: usize,
    pub empty_cubes: usize,
}

/// Partition of `[-L/2, L/2]` into `m` equal intervals of side close to
/// `target`, with `m` even so that the partition is symmetric.
fn rescaled_partition(side: f64, target: f64) -> Result<(usize, f64)> {
    // the relative slack absorbs rounding in powers such as L^eps
    let per_half = (0.5 * side / target * (1.0 + 1e-12)).floor();
    if !(per_half >= 1.0) {
        return Err(Error::Scale(format!("no cube of side {target} fits in a box of side {side}")));
    }
    let m = 2 * per_half as usize;
    Ok((m, side / m as f64))
}

pub fn density_and_occupancy_checks(xi: &PointSet, cube_side: f64, eps: f64, c_w: f64) -> Result<DensityReport> {
    ensure(eps > 0.0 && eps <= 1.0, || format!("eps must lie in (0, 1], got {eps}"))?;
    ensure(c_w > 0.0, || format!("C_W must be positive, got {c_w}"))?;
    let side = xi.side();
    let d = xi.dim();
    let half = 0.5 * side;

    let (m, a) = rescaled_partition(side, side.powf(eps))?;
    let cubes = m.pow(d as u32);
    let mut covered = vec![0.0; cubes];
    match grey_cluster(xi, cube_side) {
        Ok(cluster) => {
            for x in &cluster.members {
                // overlaps of the K-cube with the V-cubes along each axis
                let per_axis: Vec<Vec<(usize, f64)>> = x
                    .iter()
                    .map(|&xi_| {
                        let lo = xi_ as f64 * cube_side + half;
                        let hi = lo + cube_side;
                        let first = ((lo / a).floor() as usize).min(m - 1);
                        let last = (((hi / a).ceil() as usize).max(1) - 1).min(m - 1);
                        (first..=last)
                            .map(|k| {
                                let ov = hi.min((k + 1) as f64 * a) - lo.max(k as f64 * a);
                                (k, ov.max(0.0))
                            })
                            .filter(|e| e.1 > 0.0)
                            .collect()
                    })
                    .collect();
                let mut idx = vec![0usize; d];
                'outer: loop {
                    let mut flat = 0;
                    let mut vol = 1.0;
                    for ax in 0..d {
                        let (k, ov) = per_axis[ax][idx[ax]];
                        flat = flat * m + k;
                        vol *= ov;
                    }
                    covered[flat] += vol;
                    for ax in (0..d).rev() {
                        idx[ax] += 1;
                        if idx[ax] < per_axis[ax].len() {
                            continue 'outer;
                        }
                        idx[ax] = 0;
                    }
                    break;
                }
            }
        }
        Err(Error::EmptyEnvironment(_)) => {}
        Err(e) => return Err(e),
    }
    let vol = a.powi(d as i32);
    let density_min = covered.iter().map(|c| c / vol).fold(f64::INFINITY, f64::min);

    let (mo, b) = rescaled_partition(side, c_w * side.ln().max(0.0).powf(1.0 / d as f64))?;
    let ocubes = mo.pow(d as u32);
    let mut hit = vec![false; ocubes];
    for p in xi.points() {
        let mut flat = 0;
        for &c in p {
            let k = (((c + half) / b).floor() as usize).min(mo - 1);
            flat = flat * mo + k;
        }
        hit[flat] = true;
    }
    let empty = hit.iter().filter(|&&h| !h).count();
    Ok(DensityReport {
        density_min,
        density_cube_side: a,
        density_cubes: cubes,
        occupancy: empty == 0,
        occupancy_cube_side: b,
        occupancy_cubes: ocubes,
        empty_cubes: empty,
    })
}

/// `(|∂A|, |A|, |∂A| / |A|)` with volumes in units of `K^d`, where `∂A` is
/// the set of cluster cubes outside `A` adjacent to `A`.
pub fn boundary_ratio(cluster: &GreyCluster, subset: &[Vec<i64>]) -> Result<(f64, f64, f64)> {
    if subset.is_empty() {
        return Err(Error::InvalidSubset("empty cube set".into()));
    }
    let set: HashSet<&Vec<i64>> = subset.iter().collect();
    if set.len() != subset.len() {
        return Err(Error::InvalidSubset("repeated cube".into()));
    }
    if let Some(x) = subset.iter().find(|x| x.len() != cluster.shape.len() || !cluster.contains(x)) {
        return Err(Error::InvalidSubset(format!("cube {x:?} is not in the cluster")));
    }
    let mut boundary: HashSet<Vec<i64>> = HashSet::new();
    for x in subset {
        for y in cluster.member_neighbors(x) {
            if !set.contains(&y) {
                boundary.insert(y);
            }
        }
    }
    let unit = cluster.cube_side.powi(cluster.shape.len() as i32);
    let b = boundary.len() as f64 * unit;
    let a = subset.len() as f64 * unit;
    Ok((b, a, b / a))
}

/// Connected cube set of the given size grown from a uniform member cube
/// by adding uniform frontier cubes.
pub fn random_connected_subset(cluster: &GreyCluster, size: usize, rng: &mut Rng) -> Result<Vec<Vec<i64>>> {
    if size == 0 || size > cluster.len() {
        return Err(Error::InvalidParameter(format!("size must lie in [1, {}], got {size}", cluster.len())));
    }
    let start = cluster.members[rng.gen_range(0..cluster.len())].clone();
    let mut chosen: Vec<Vec<i64>> = vec![start.clone()];
    let mut inside: HashSet<Vec<i64>> = HashSet::from([start.clone()]);
    let mut frontier: Vec<Vec<i64>> = Vec::new();
    let mut in_frontier: HashSet<Vec<i64>> = HashSet::new();
    let mut extend = |x: &Vec<i64>, inside: &HashSet<Vec<i64>>, frontier: &mut Vec<Vec<i64>>| {
        for y in cluster.member_neighbors(x) {
            if !inside.contains(&y) && in_frontier.insert(y.clone()) {
                frontier.push(y);
            }
        }
    };
    extend(&start, &inside, &mut frontier);
    while chosen.len() < size {
        if frontier.is_empty() {
            return Err(Error::InvalidParameter("cluster exhausted before reaching the size".into()));
        }
        let k = rng.gen_range(0..frontier.len());
        let x = frontier.swap_remove(k);
        inside.insert(x.clone());
        extend(&x, &inside, &mut frontier);
        chosen.push(x);
    }
    chosen.sort();
    Ok(chosen)
}
