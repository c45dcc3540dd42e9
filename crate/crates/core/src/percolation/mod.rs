//! Bernoulli site percolation on `{0, .., n-1}^d` and the grey-cube
//! constructions over sampled point processes.

mod flow;
mod grey;

use std::fmt::Write as _;

use rand::Rng as _;

use crate::error::{ensure, Error, Result};
use crate::exec::Execution;
use crate::rng;

pub use flow::crossing_count;
pub use grey::{
    boundary_ratio, density_and_occupancy_checks, grey_cluster, random_connected_subset, DensityReport,
    GreyCluster,
};

/// Open/closed sites of the box, last axis fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteField {
    n: usize,
    dim: usize,
    open: Vec<bool>,
    pub seed: u64,
    /// Stored as bits so the field stays `Eq`.
    p_bits: u64,
}

impl SiteField {
    pub fn from_sites(n: usize, dim: usize, open: Vec<bool>) -> Result<Self> {
        ensure(n >= 1 && dim >= 1, || "n and dim must be positive".into())?;
        let total = n.checked_pow(dim as u32).ok_or_else(|| Error::InvalidParameter("field too large".into()))?;
        if open.len() != total {
            return Err(Error::InvalidInput(format!("{} sites for a field of {total}", open.len())));
        }
        let frac = open.iter().filter(|&&b| b).count() as f64 / total as f64;
        Ok(SiteField {
            n,
            dim,
            open,
            seed: 0,
            p_bits: frac.to_bits(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> f64 {
        f64::from_bits(self.p_bits)
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_open(&self, site: usize) -> bool {
        self.open[site]
    }

    pub fn sites(&self) -> &[bool] {
        &self.open
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&b| b).count()
    }

    /// Coordinate of `site` along `axis`.
    pub fn coord(&self, site: usize, axis: usize) -> usize {
        site / self.n.pow((self.dim - 1 - axis) as u32) % self.n
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Nearest-neighbour sites inside the box.
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).flat_map(move |a| {
            let c = self.coord(site, a);
            let s = self.stride(a);
            let down = (c > 0).then(|| site - s);
            let up = (c + 1 < self.n).then(|| site + s);
            down.into_iter().chain(up)
        })
    }

    /// Run-length encoding, one line per lattice line along the last axis,
    /// e.g. `3o2c1o`.
    pub fn to_rle(&self) -> String {
        let mut out = String::new();
        for line in self.open.chunks(self.n) {
            let mut i = 0;
            while i < line.len() {
                let mut j = i;
                while j < line.len() && line[j] == line[i] {
                    j += 1;
                }
                let _ = write!(out, "{}{}", j - i, if line[i] { 'o' } else { 'c' });
                i = j;
            }
            out.push('\n');
        }
        out
    }

    pub fn from_rle(text: &str, n: usize, dim: usize) -> Result<Self> {
        let mut open = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut count = String::new();
            let mut len = 0;
            for ch in line.trim().chars() {
                match ch {
                    '0'..='9' => count.push(ch),
                    'o' | 'c' => {
                        let k: usize = count
                            .parse()
                            .map_err(|_| Error::InvalidInput(format!("bad run in {line:?}")))?;
                        open.extend(std::iter::repeat_n(ch == 'o', k));
                        len += k;
                        count.clear();
                    }
                    _ => return Err(Error::InvalidInput(format!("unexpected {ch:?} in field dump"))),
                }
            }
            if len != n || !count.is_empty() {
                return Err(Error::InvalidInput(format!("line {line:?} does not have {n} sites")));
            }
        }
        SiteField::from_sites(n, dim, open)
    }
}

/// I.i.d. Bernoulli(`p`) sites, deterministic in `seed`.
pub fn sample_site_field(n: usize, dim: usize, p: f64, seed: u64) -> Result<SiteField> {
    ensure((0.0..=1.0).contains(&p), || format!("p must lie in [0, 1], got {p}"))?;
    ensure(n >= 1 && dim >= 1, || "n and dim must be positive".into())?;
    let total = n
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::InvalidParameter("field too large".into()))?;
    let mut rng = rng::rng_from_seed(seed);
    let open = (0..total).map(|_| rng.gen::<f64>() < p).collect();
    Ok(SiteField {
        n,
        dim,
        open,
        seed,
        p_bits: p.to_bits(),
    })
}

/// Open clusters, labelled `0, 1, ..` in order of their first site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    pub n: usize,
    pub dim: usize,
    /// `labels[site]`, `None` for closed sites.
    pub labels: Vec<Option<u32>>,
    pub sizes: Vec<usize>,
    /// `l_inf` diameters.
    pub diameters: Vec<usize>,
    /// Bit `2a` set if the cluster touches face `x_a = 0`, bit `2a + 1` for
    /// `x_a = n - 1`.
    pub faces: Vec<u32>,
}

impl ClusterLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Label of the largest cluster, ties to the smaller label.
    pub fn max_label(&self) -> Option<u32> {
        let mut best: Option<(usize, u32)> = None;
        for (l, &s) in self.sizes.iter().enumerate() {
            if best.is_none_or(|b| s > b.0) {
                best = Some((s, l as u32));
            }
        }
        best.map(|b| b.1)
    }

    pub fn max_size(&self) -> usize {
        self.max_label().map_or(0, |l| self.sizes[l as usize])
    }

    pub fn max_diameter(&self) -> usize {
        self.max_label().map_or(0, |l| self.diameters[l as usize])
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Union-find labelling with nearest-neighbour adjacency.
pub fn label_clusters(field: &SiteField) -> ClusterLabeling {
    let total = field.len();
    let mut parent: Vec<usize> = (0..total).collect();
    for s in 0..total {
        if !field.is_open(s) {
            continue;
        }
        for a in 0..field.dim {
            if field.coord(s, a) + 1 < field.n {
                let t = s + field.stride(a);
                if field.is_open(t) {
                    let (rs, rt) = (find(&mut parent, s), find(&mut parent, t));
                    if rs != rt {
                        parent[rs.max(rt)] = rs.min(rt);
                    }
                }
            }
        }
    }
    let mut root_label = vec![u32::MAX; total];
    let mut labels = vec![None; total];
    let mut sizes = Vec::new();
    let mut lo: Vec<Vec<usize>> = Vec::new();
    let mut hi: Vec<Vec<usize>> = Vec::new();
    let mut faces = Vec::new();
    for s in 0..total {
        if !field.is_open(s) {
            continue;
        }
        let r = find(&mut parent, s);
        if root_label[r] == u32::MAX {
            root_label[r] = sizes.len() as u32;
            sizes.push(0);
            lo.push(vec![usize::MAX; field.dim]);
            hi.push(vec![0; field.dim]);
            faces.push(0u32);
        }
        let l = root_label[r];
        labels[s] = Some(l);
        let li = l as usize;
        sizes[li] += 1;
        for a in 0..field.dim {
            let c = field.coord(s, a);
            lo[li][a] = lo[li][a].min(c);
            hi[li][a] = hi[li][a].max(c);
            if c == 0 {
                faces[li] |= 1 << (2 * a);
            }
            if c + 1 == field.n {
                faces[li] |= 1 << (2 * a + 1);
            }
        }
    }
    let diameters = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| l.iter().zip(h).map(|(a, b)| b - a).max().unwrap_or(0))
        .collect();
    ClusterLabeling {
        n: field.n,
        dim: field.dim,
        labels,
        sizes,
        diameters,
        faces,
    }
}

/// The events `A_n` (at most one cluster of diameter `>= floor(n/10)`),
/// `B_n` (a cluster meets all `2d` faces) and `C_n(kappa)` (a cluster has at
/// least `kappa n^d` sites).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Events {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

impl Events {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c
    }
}

pub fn evaluate_events(labels: &ClusterLabeling, kappa: f64) -> Result<Events> {
    ensure(kappa > 0.0 && kappa < 1.0, || format!("kappa must lie in (0, 1), got {kappa}"))?;
    let big = labels.n / 10;
    let wide = labels.diameters.iter().filter(|&&d| d >= big).count();
    let all_faces = (1u32 << (2 * labels.dim)) - 1;
    let volume = (labels.n as f64).powi(labels.dim as i32);
    Ok(Events {
        a: wide <= 1,
        b: labels.faces.contains(&all_faces),
        c: labels.sizes.iter().any(|&s| s as f64 >= kappa * volume),
    })
}

/// Fractions `|M(n) ∩ C_j| / |C_j|` for the partition into cubes of side
/// `cube_side`; a trailing partial cube is merged into the last full cube.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeDensity {
    pub cubes_per_axis: usize,
    pub fractions: Vec<f64>,
    pub min_fraction: f64,
}

pub fn cluster_cube_density(labels: &ClusterLabeling, cube_side: usize) -> Result<CubeDensity> {
    let n = labels.n;
    ensure(cube_side >= 1 && cube_side <= n, || format!("cube side must lie in [1, {n}], got {cube_side}"))?;
    let m = n / cube_side;
    let d = labels.dim;
    let cubes = m.pow(d as u32);
    let mut hits = vec![0usize; cubes];
    let target = labels.max_label();
    let axis_cube = |c: usize| (c / cube_side).min(m - 1);
    let extent = |k: usize| if k + 1 == m { n - k * cube_side } else { cube_side };
    for (s, l) in labels.labels.iter().enumerate() {
        if l.is_some() && *l == target {
            let mut idx = 0;
            let mut rest = s;
            let mut coords = vec![0; d];
            for a in (0..d).rev() {
                coords[a] = rest % n;
                rest /= n;
            }
            for &c in &coords {
                idx = idx * m + axis_cube(c);
            }
            hits[idx] += 1;
        }
    }
    let fractions: Vec<f64> = (0..cubes)
        .map(|j| {
            let mut rest = j;
            let mut vol = 1usize;
            for _ in 0..d {
                vol *= extent(rest % m);
                rest /= m;
            }
            hits[j] as f64 / vol as f64
        })
        .collect();
    let min_fraction = fractions.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CubeDensity {
        cubes_per_axis: m,
        fractions,
        min_fraction,
    })
}

/// One row of a percolation event sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub events: Events,
    pub max_size: usize,
    pub max_diam: usize,
    pub min_cube_density: f64,
}

impl EventRow {
    pub const CSV_HEADER: &'static str = "n,p,seed,A,B,C,max_size,max_diam,min_cube_density";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.p,
            self.seed,
            self.events.a,
            self.events.b,
            self.events.c,
            self.max_size,
            self.max_diam,
            self.min_cube_density
        )
    }
}

/// Events and cube densities for every seed.
pub fn event_sweep(
    n: usize,
    dim: usize,
    p: f64,
    kappa: f64,
    cube_side: usize,
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<EventRow>> {
    let rows = exec.map_slice(seeds, |&seed| -> Result<EventRow> {
        let field = sample_site_field(n, dim, p, seed)?;
        let labels = label_clusters(&field);
        let events = evaluate_events(&labels, kappa)?;
        let density = cluster_cube_density(&labels, cube_side)?;
        Ok(EventRow {
            n,
            p,
            seed,
            events,
            max_size: labels.max_size(),
            max_diam: labels.max_diameter(),
            min_cube_density: density.min_fraction,
        })
    });
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests;
