//! Rate graphs and the three reversible generators.
//!
//! Rates are `r(x, y) = exp(-|x - y|^alpha)`. The generator of model `i` is
//! `L(x, y) = r(x, y) / w_x` with weights `w¹ = 1`, `w² = sum_z r(x, z)` and
//! `w³ = max(1, w²)`; it is reversible with respect to `nu = w / sum w`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use crate::error::{ensure, Error, Result};
use crate::exec::Execution;
use crate::pointprocess::{dist_sq, jump_rate, rate_radius, PointSet};

/// Default rate cutoff for sparse graphs.
pub const DEFAULT_CUTOFF: f64 = 1e-14;

/// Weight normalisation of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    /// `w = 1`; uniform stationary law.
    Unit = 1,
    /// `w = sum of incident rates`.
    Full = 2,
    /// `w = max(1, sum of incident rates)`.
    Hybrid = 3,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Unit, Model::Full, Model::Hybrid];

    pub fn index(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Model {
    type Error = Error;

    fn try_from(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Model::Unit),
            2 => Ok(Model::Full),
            3 => Ok(Model::Hybrid),
            _ => Err(Error::InvalidParameter(format!("model must be 1, 2 or 3, got {i}"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Sparse symmetric rate matrix in compressed-row form. Neighbour lists are
/// sorted by index. The point coordinates are kept so that untruncated rates
/// can be recomputed.
#[derive(Debug, Clone)]
pub struct RateGraph {
    dim: usize,
    alpha: f64,
    cutoff: f64,
    coords: Vec<f64>,
    offsets: Vec<usize>,
    nbrs: Vec<u32>,
    rates: Vec<f64>,
    degree: Vec<f64>,
}

impl RateGraph {
    pub fn n(&self) -> usize {
        self.degree.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn point(&self, x: usize) -> &[f64] {
        &self.coords[x * self.dim..(x + 1) * self.dim]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.nbrs.len() / 2
    }

    /// Stored neighbours of `x` with their rates, by increasing index.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[x]..self.offsets[x + 1];
        self.nbrs[r.clone()].iter().map(|&y| y as usize).zip(self.rates[r].iter().copied())
    }

    pub fn neighbor_indices(&self, x: usize) -> &[u32] {
        &self.nbrs[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn neighbor_rates(&self, x: usize) -> &[f64] {
        &self.rates[self.offsets[x]..self.offsets[x + 1]]
    }

    /// Stored rate, zero when the edge was dropped.
    pub fn rate(&self, x: usize, y: usize) -> f64 {
        let idx = self.neighbor_indices(x);
        match idx.binary_search(&(y as u32)) {
            Ok(k) => self.rates[self.offsets[x] + k],
            Err(_) => 0.0,
        }
    }

    /// Rate recomputed from coordinates, ignoring the cutoff.
    pub fn exact_rate(&self, x: usize, y: usize) -> f64 {
        if x == y {
            return 0.0;
        }
        jump_rate(dist_sq(self.point(x), self.point(y)), self.alpha)
    }

    /// Sum of stored rates at `x`.
    pub fn degree(&self, x: usize) -> f64 {
        self.degree[x]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    /// Connected components of the stored graph: per-vertex labels (numbered
    /// by first vertex) and component sizes.
    pub fn components(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let c = sizes.len();
            label[s] = c;
            stack.push(s);
            let mut size = 0;
            while let Some(x) = stack.pop() {
                size += 1;
                for &y in self.neighbor_indices(x) {
                    let y = y as usize;
                    if label[y] == usize::MAX {
                        label[y] = c;
                        stack.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        (label, sizes)
    }

    /// Error unless the stored graph is connected.
    pub fn ensure_connected(&self) -> Result<()> {
        let (_, sizes) = self.components();
        if sizes.len() > 1 {
            return Err(Error::Disconnected {
                count: sizes.len(),
                sizes,
            });
        }
        Ok(())
    }

    /// Write the edge list as `x_index,y_index,rate` rows (each undirected
    /// edge once, `x < y`).
    pub fn write_edges<W: Write>(&self, mut out: W) -> Result<()> {
        for x in 0..self.n() {
            for (y, r) in self.neighbors(x).filter(|&(y, _)| y > x) {
                writeln!(out, "{x},{y},{r:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Build the rate graph. Edges with rate below `cutoff` are dropped, except
/// that every vertex keeps its largest-rate edge. `cutoff = 0` keeps every
/// pair with a nonzero rate.
pub fn build_rate_graph(xi: &PointSet, alpha: f64, cutoff: f64) -> Result<RateGraph> {
    build_rate_graph_with(xi, alpha, cutoff, Execution::default())
}

pub fn build_rate_graph_with(xi: &PointSet, alpha: f64, cutoff: f64, exec: Execution) -> Result<RateGraph> {
    ensure(alpha > 0.0 && alpha.is_finite(), || format!("alpha must be positive, got {alpha}"))?;
    ensure((0.0..1.0).contains(&cutoff), || format!("cutoff must lie in [0, 1), got {cutoff}"))?;
    let n = xi.len();
    let dim = xi.dim();
    let radius = if cutoff > 0.0 { rate_radius(cutoff, alpha) } else { f64::INFINITY };

    let rows: Vec<Result<Vec<(u32, f64)>>> = if radius >= xi.side() * (dim as f64).sqrt() {
        exec.map_range(n, |x| {
            let mut row = Vec::new();
            for y in 0..n {
                if y != x {
                    push_edge(xi, alpha, cutoff, x, y, &mut row)?;
                }
            }
            Ok(row)
        })
    } else {
        let grid = CellGrid::new(xi, radius);
        exec.map_range(n, |x| {
            let mut row = Vec::new();
            grid.for_each_candidate(xi.point(x), |y| {
                if y != x {
                    push_edge(xi, alpha, cutoff, x, y, &mut row)?;
                }
                Ok(())
            })?;
            row.sort_unstable_by_key(|e| e.0);
            Ok(row)
        })
    };
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    // keep-max rule for vertices left without neighbours
    if n >= 2 {
        let lonely: Vec<usize> = (0..n).filter(|&x| rows[x].is_empty()).collect();
        let extra = exec.map_slice(&lonely, |&x| nearest_neighbor(xi, x));
        for (&x, y) in lonely.iter().zip(extra) {
            let r = jump_rate(dist_sq(xi.point(x), xi.point(y)), alpha);
            if r > 0.0 {
                insert_sorted(&mut rows[x], y as u32, r);
                insert_sorted(&mut rows[y], x as u32, r);
            }
        }
    }

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let total: usize = rows.iter().map(Vec::len).sum();
    let mut nbrs = Vec::with_capacity(total);
    let mut rates = Vec::with_capacity(total);
    let mut degree = Vec::with_capacity(n);
    for row in rows {
        degree.push(row.iter().map(|e| e.1).sum());
        for (y, r) in row {
            nbrs.push(y);
            rates.push(r);
        }
        offsets.push(nbrs.len());
    }
    Ok(RateGraph {
        dim,
        alpha,
        cutoff,
        coords: xi.coords().to_vec(),
        offsets,
        nbrs,
        rates,
        degree,
    })
}

fn push_edge(xi: &PointSet, alpha: f64, cutoff: f64, x: usize, y: usize, row: &mut Vec<(u32, f64)>) -> Result<()> {
    let d2 = dist_sq(xi.point(x), xi.point(y));
    if d2 == 0.0 {
        return Err(Error::InvalidInput(format!("points {x} and {y} coincide")));
    }
    let r = jump_rate(d2, alpha);
    if r > 0.0 && r >= cutoff {
        row.push((y as u32, r));
    }
    Ok(())
}

fn insert_sorted(row: &mut Vec<(u32, f64)>, y: u32, r: f64) {
    if let Err(pos) = row.binary_search_by_key(&y, |e| e.0) {
        row.insert(pos, (y, r));
    }
}

/// Closest other point, ties to the smaller index.
fn nearest_neighbor(xi: &PointSet, x: usize) -> usize {
    let p = xi.point(x);
    let mut best = (f64::INFINITY, usize::MAX);
    for y in (0..xi.len()).filter(|&y| y != x) {
        let d2 = dist_sq(p, xi.point(y));
        if d2 < best.0 {
            best = (d2, y);
        }
    }
    best.1
}

/// Uniform cell grid with cell side at least the search radius, so that all
/// points within the radius lie in the `3^d` surrounding cells.
struct CellGrid {
    cell: f64,
    dim: usize,
    order: Vec<u32>,
    ranges: HashMap<Vec<i64>, (usize, usize)>,
}

impl CellGrid {
    fn new(xi: &PointSet, radius: f64) -> Self {
        let cell = radius * (1.0 + 1e-9);
        let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c / cell).floor() as i64).collect() };
        let mut keyed: Vec<(Vec<i64>, u32)> = (0..xi.len()).map(|i| (key(xi.point(i)), i as u32)).collect();
        keyed.sort();
        let mut ranges = HashMap::new();
        let mut start = 0;
        for i in 1..=keyed.len() {
            if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                ranges.insert(keyed[start].0.clone(), (start, i));
                start = i;
            }
        }
        CellGrid {
            cell,
            dim: xi.dim(),
            order: keyed.into_iter().map(|k| k.1).collect(),
            ranges,
        }
    }

    fn for_each_candidate(&self, p: &[f64], mut f: impl FnMut(usize) -> Result<()>) -> Result<()> {
        let base: Vec<i64> = p.iter().map(|c| (c / self.cell).floor() as i64).collect();
        let mut off = vec![-1i64; self.dim];
        let mut key = base.clone();
        for _ in 0..3usize.pow(self.dim as u32) {
            for a in 0..self.dim {
                key[a] = base[a] + off[a];
            }
            if let Some(&(s, e)) = self.ranges.get(&key) {
                for &y in &self.order[s..e] {
                    f(y as usize)?;
                }
            }
            for a in (0..self.dim).rev() {
                if off[a] < 1 {
                    off[a] += 1;
                    break;
                }
                off[a] = -1;
            }
        }
        Ok(())
    }
}

/// Per-vertex weights of the given model.
pub fn vertex_weights(graph: &RateGraph, model: Model) -> Result<Vec<f64>> {
    let n = graph.n();
    if n == 0 {
        return Err(Error::EmptyEnvironment("no points".into()));
    }
    match model {
        Model::Unit => Ok(vec![1.0; n]),
        Model::Full => {
            if n == 1 {
                return Err(Error::DegenerateModel("model 2 needs at least two points".into()));
            }
            if let Some(x) = graph.degrees().iter().position(|&d| d <= 0.0) {
                return Err(Error::DegenerateModel(format!("vertex {x} has zero total rate")));
            }
            Ok(graph.degrees().to_vec())
        }
        Model::Hybrid => Ok(graph.degrees().iter().map(|&d| d.max(1.0)).collect()),
    }
}

/// Generator `L(x, y) = r(x, y) / w_x` with its stationary law.
#[derive(Debug, Clone)]
pub struct WalkGenerator {
    model: Model,
    graph: RateGraph,
    weights: Vec<f64>,
    total_weight: f64,
    pi: Vec<f64>,
}

impl WalkGenerator {
    pub fn new(graph: RateGraph, model: Model) -> Result<Self> {
        let weights = vertex_weights(&graph, model)?;
        let total_weight: f64 = weights.iter().sum();
        let pi = weights.iter().map(|w| w / total_weight).collect();
        Ok(WalkGenerator {
            model,
            graph,
            weights,
            total_weight,
            pi,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn graph(&self) -> &RateGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// `nu_* = min_x nu(x)`.
    pub fn nu_star(&self) -> f64 {
        self.pi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Generator entry `L(x, y)`, including the diagonal.
    pub fn entry(&self, x: usize, y: usize) -> f64 {
        if x == y {
            -self.graph.degree(x) / self.weights[x]
        } else {
            self.graph.rate(x, y) / self.weights[x]
        }
    }

    /// Total jump rate out of `x`, i.e. `-L(x, x)`.
    pub fn escape_rate(&self, x: usize) -> f64 {
        self.graph.degree(x) / self.weights[x]
    }

    /// `(L f)(x) = sum_y L(x, y) (f(y) - f(x))`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|x| {
                let s: f64 = self.graph.neighbors(x).map(|(y, r)| r * (f[y] - f[x])).sum();
                s / self.weights[x]
            })
            .collect()
    }

    /// Write the weights, one `x_index,weight` row per vertex.
    pub fn write_weights<W: Write>(&self, mut out: W) -> Result<()> {
        for (x, w) in self.weights.iter().enumerate() {
            writeln!(out, "{x},{w:.16e}")?;
        }
        Ok(())
    }
}

/// Build the rate graph and the generator in one step.
pub fn build_generator(xi: &PointSet, alpha: f64, model: Model, cutoff: f64) -> Result<WalkGenerator> {
    build_generator_with(xi, alpha, model, cutoff, Execution::default())
}

pub fn build_generator_with(xi: &PointSet, alpha: f64, model: Model, cutoff: f64, exec: Execution) -> Result<WalkGenerator> {
    WalkGenerator::new(build_rate_graph_with(xi, alpha, cutoff, exec)?, model)
}

/// `(E(f, f), Var(f))` with `E(f, f) = 1/2 sum nu(x) L(x, y) (f(x) - f(y))^2`.
pub fn dirichlet_form(gen: &WalkGenerator, f: &[f64]) -> Result<(f64, f64)> {
    let n = gen.n();
    if f.len() != n {
        return Err(Error::InvalidInput(format!("function has {} values for {n} vertices", f.len())));
    }
    let mut energy = 0.0;
    for x in 0..n {
        let row: f64 = gen
            .graph
            .neighbors(x)
            .map(|(y, r)| r * (f[x] - f[y]) * (f[x] - f[y]))
            .sum();
        energy += row;
    }
    energy *= 0.5 / gen.total_weight;
    let mean: f64 = f.iter().zip(&gen.pi).map(|(v, p)| v * p).sum();
    let variance: f64 = f.iter().zip(&gen.pi).map(|(v, p)| p * (v - mean) * (v - mean)).sum();
    Ok((energy, variance))
}

/// Variance over energy of `f(x) = |x|`; a lower bound on the Poincaré
/// constant.
pub fn radial_ratio(gen: &WalkGenerator) -> Result<f64> {
    let f: Vec<f64> = (0..gen.n())
        .map(|x| gen.graph.point(x).iter().map(|c| c * c).sum::<f64>().sqrt())
        .collect();
    let (energy, variance) = dirichlet_form(gen, &f)?;
    if energy <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(variance / energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointprocess::sample_poisson;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointSet {
        let coords = xs.iter().flat_map(|&x| [x, 0.0]).collect();
        PointSet::new(2, 40.0, coords, 0, "line").unwrap()
    }

    #[test]
    fn two_point_rates() {
        let g = build_rate_graph(&line(&[0.0, 1.0]), 1.0, 0.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_relative_eq!(g.rate(0, 1), 0.36787944117144233, max_relative = 1e-15);
        let g = build_rate_graph(&line(&[0.0, 2.0]), 2.0, 0.0).unwrap();
        assert_relative_eq!(g.rate(1, 0), 0.01831563888873418, max_relative = 1e-15);
    }

    #[test]
    fn keep_max_rule() {
        let g = build_rate_graph(&line(&[0.0, 1.0, 10.0]), 1.0, 0.1).unwrap();
        assert!(g.rate(0, 1) > 0.0);
        assert_eq!(g.rate(0, 2), 0.0);
        assert_relative_eq!(g.rate(1, 2), (-9.0f64).exp(), max_relative = 1e-15);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn parameter_checks() {
        let xi = line(&[0.0, 1.0]);
        assert!(build_rate_graph(&xi, 0.0, 0.0).is_err());
        assert!(build_rate_graph(&xi, 1.0, 1.0).is_err());
        assert!(Model::try_from(4).is_err());
    }

    #[test]
    fn weights_of_small_configurations() {
        let one = build_rate_graph(&line(&[0.0]), 1.0, 0.0).unwrap();
        assert_eq!(vertex_weights(&one, Model::Unit).unwrap(), vec![1.0]);
        assert_eq!(vertex_weights(&one, Model::Hybrid).unwrap(), vec![1.0]);
        assert!(matches!(vertex_weights(&one, Model::Full), Err(Error::DegenerateModel(_))));

        let two = build_rate_graph(&line(&[0.0, 1.0]), 1.0, 0.0).unwrap();
        let e1 = (-1.0f64).exp();
        assert_eq!(vertex_weights(&two, Model::Full).unwrap(), vec![e1, e1]);
        assert_eq!(vertex_weights(&two, Model::Hybrid).unwrap(), vec![1.0, 1.0]);
        for m in Model::ALL {
            let gen = WalkGenerator::new(two.clone(), m).unwrap();
            assert_eq!(gen.pi(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn three_point_model2_law() {
        let gen = build_generator(&line(&[0.0, 1.0, 10.0]), 1.0, Model::Full, 0.0).unwrap();
        let e = |t: f64| (-t).exp();
        let w = [e(1.0) + e(10.0), e(1.0) + e(9.0), e(9.0) + e(10.0)];
        let total: f64 = w.iter().sum();
        for x in 0..3 {
            assert_relative_eq!(gen.pi()[x], w[x] / total, max_relative = 1e-14);
            for y in 0..3 {
                let lhs = gen.pi()[x] * gen.entry(x, y);
                let rhs = gen.pi()[y] * gen.entry(y, x);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn two_state_dirichlet_form() {
        let gen = build_generator(&line(&[0.0, 1.0]), 1.0, Model::Unit, 0.0).unwrap();
        let w = (-1.0f64).exp();
        let (energy, variance) = dirichlet_form(&gen, &[0.0, 1.0]).unwrap();
        // nu(x) L(x,y) = w/2 in each direction
        assert_relative_eq!(energy, 0.5 * w, max_relative = 1e-14);
        assert_relative_eq!(variance, 0.25, max_relative = 1e-14);
        // gap of the two-state chain is 2w, and f = (0,1) attains 1/gap
        assert_relative_eq!(variance / energy, 1.0 / (2.0 * w), max_relative = 1e-14);
        let (e0, v0) = dirichlet_form(&gen, &[3.0, 3.0]).unwrap();
        assert_eq!((e0, v0), (0.0, 0.0));
    }

    #[test]
    fn radial_function_is_slow() {
        let xi = sample_poisson(1.0, 2, 32.0, 5).unwrap();
        let gen = build_generator(&xi, 2.0, Model::Unit, DEFAULT_CUTOFF).unwrap();
        assert!(radial_ratio(&gen).unwrap() >= 0.01 * 32.0 * 32.0);
    }

    #[test]
    fn sparse_graph_matches_dense_above_cutoff() {
        let xi = sample_poisson(1.0, 2, 12.0, 8).unwrap();
        let full = build_rate_graph(&xi, 1.0, 0.0).unwrap();
        let sparse = build_rate_graph(&xi, 1.0, 1e-3).unwrap();
        for x in 0..xi.len() {
            for y in 0..xi.len() {
                let r = full.rate(x, y);
                if r >= 1e-3 {
                    assert_eq!(sparse.rate(x, y), r);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn generator_invariants(seed in 0u64..10_000, alpha in 0.5f64..4.0, m in 1u8..=3, cutoff in prop_oneof![Just(0.0), Just(1e-14), Just(1e-3)]) {
            let xi = sample_poisson(1.0, 2, 6.0, seed).unwrap();
            prop_assume!(xi.len() >= 2);
            let model = Model::try_from(m).unwrap();
            let gen = build_generator(&xi, alpha, model, cutoff).unwrap();
            let g = gen.graph();
            let n = gen.n();
            let mut pi_sum = 0.0;
            for x in 0..n {
                prop_assert!(g.neighbors(x).count() >= 1);
                let mut row = gen.entry(x, x);
                for (y, r) in g.neighbors(x) {
                    prop_assert!(y != x);
                    prop_assert!(r > 0.0 && r <= 1.0);
                    prop_assert_eq!(g.rate(y, x), r);
                    row += gen.entry(x, y);
                    let lhs = gen.pi()[x] * gen.entry(x, y);
                    let rhs = gen.pi()[y] * gen.entry(y, x);
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
                }
                prop_assert!(row.abs() < 1e-12);
                prop_assert!(gen.pi()[x] > 0.0);
                pi_sum += gen.pi()[x];
                // the largest-rate edge survives any cutoff
                let best = (0..n).filter(|&y| y != x).map(|y| g.exact_rate(x, y)).fold(0.0, f64::max);
                prop_assert!(g.neighbor_rates(x).contains(&best));
            }
            prop_assert!((pi_sum - 1.0).abs() < 1e-12);
            let w2 = vertex_weights(g, Model::Full).unwrap();
            let w3 = vertex_weights(g, Model::Hybrid).unwrap();
            for x in 0..n {
                prop_assert_eq!(w3[x], w2[x].max(1.0));
                prop_assert!(w3[x] >= 1.0);
            }
            if model == Model::Unit {
                prop_assert!(gen.pi().iter().all(|&p| p == gen.pi()[0]));
            }
        }
    }
}
