//! Bernoulli bond percolation on finite slab graphs: sampling, cluster
//! labels, crossing events, Monte Carlo estimators, road survival, the
//! cluster census of the folded process and the exact FKG check.
//!
//! Every trial draws one uniform `u_e` per edge and opens `e` iff `u_e < p`.
//! Runs at different `p` that share a seed therefore see nested open sets.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    graph_union, induced_rect_graph, FiniteGraph, Orientation, PlanarRect, SlabVertex,
};
use crate::rng::trial_rng;
use crate::slicing::{FoldedSlice, SlabAssembly};
use crate::unionfind::DisjointSet;

/// Largest edge count accepted by the exhaustive routines.
pub const MAX_EXACT_EDGES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct BondConfig<'g> {
    pub graph: &'g FiniteGraph,
    /// Aligned with `graph.edges()`.
    pub open: Vec<bool>,
    pub p: f64,
    pub seed: u64,
}

impl BondConfig<'_> {
    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

fn check_p(p: f64) {
    assert!(
        (0.0..=1.0).contains(&p),
        "retention probability {p} outside [0, 1]"
    );
}

fn uniforms<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn threshold(u: &[f64], p: f64) -> Vec<bool> {
    u.iter().map(|&x| x < p).collect()
}

/// Configuration of trial 0 under `seed`.
pub fn sample_config(graph: &FiniteGraph, p: f64, seed: u64) -> BondConfig<'_> {
    sample_trial(graph, p, seed, 0)
}

/// Configuration of trial `trial` under the master `seed`.
pub fn sample_trial(graph: &FiniteGraph, p: f64, seed: u64, trial: u64) -> BondConfig<'_> {
    check_p(p);
    let u = uniforms(graph.edge_count(), &mut trial_rng(seed, trial));
    BondConfig {
        graph,
        open: threshold(&u, p),
        p,
        seed,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabeling {
    /// Cluster id per vertex, aligned with the graph's vertices.
    pub label: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl ClusterLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

fn label_open(n: usize, edges: &[[u32; 2]], open: &[bool]) -> ClusterLabeling {
    let mut ds = DisjointSet::new(n);
    for (e, _) in edges.iter().zip(open).filter(|(_, &o)| o) {
        ds.union(e[0] as usize, e[1] as usize);
    }
    let (label, count) = ds.labels();
    let mut sizes = vec![0; count];
    for &l in &label {
        sizes[l as usize] += 1;
    }
    ClusterLabeling { label, sizes }
}

pub fn label_clusters(config: &BondConfig<'_>) -> ClusterLabeling {
    label_open(
        config.graph.vertex_count(),
        &config.graph.indexed_edges(),
        &config.open,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Left side to right side.
    H,
    /// Bottom side to top side.
    V,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CrossingTarget {
    Rect { rect: PlanarRect, layer: u8 },
    Folded(Box<FoldedSlice>),
}

/// A crossing event: an open path inside the target graph from `sources`
/// to `sinks`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingSpec {
    pub target: CrossingTarget,
    pub direction: Direction,
    pub sources: Vec<SlabVertex>,
    pub sinks: Vec<SlabVertex>,
}

impl CrossingSpec {
    /// Crossing of a planar rectangle, drawn on layer 0.
    pub fn rect(rect: PlanarRect, direction: Direction) -> Self {
        Self::rect_on_layer(rect, direction, 0)
    }

    pub fn rect_on_layer(rect: PlanarRect, direction: Direction, layer: u8) -> Self {
        let at = |x, y| SlabVertex::new(x, y, layer);
        let (sources, sinks) = match direction {
            Direction::H => (
                rect.v.iter().map(|y| at(rect.h.lo, y)).collect(),
                rect.v.iter().map(|y| at(rect.h.hi, y)).collect(),
            ),
            Direction::V => (
                rect.h.iter().map(|x| at(x, rect.v.lo)).collect(),
                rect.h.iter().map(|x| at(x, rect.v.hi)).collect(),
            ),
        };
        Self {
            target: CrossingTarget::Rect { rect, layer },
            direction,
            sources,
            sinks,
        }
    }

    /// The long way of a rectangle: `V` for vertical, `H` otherwise.
    pub fn lengthwise(rect: PlanarRect) -> Self {
        let dir = if rect.orientation == Orientation::Vertical {
            Direction::V
        } else {
            Direction::H
        };
        Self::rect(rect, dir)
    }

    /// Between the images of the two short sides of a folded slice.
    pub fn folded(slice: &FoldedSlice) -> Self {
        let (sources, sinks) = slice.end_sets();
        let direction = if slice.source.rect.orientation == Orientation::Horizontal {
            Direction::H
        } else {
            Direction::V
        };
        Self {
            target: CrossingTarget::Folded(Box::new(slice.clone())),
            direction,
            sources,
            sinks,
        }
    }

    pub fn graph(&self) -> FiniteGraph {
        match &self.target {
            CrossingTarget::Rect { rect, layer } => induced_rect_graph(rect, *layer),
            CrossingTarget::Folded(f) => f.graph.clone(),
        }
    }
}

/// A crossing problem with everything resolved to vertex and edge indices
/// of some host graph.
#[derive(Clone, Debug)]
struct Prepared {
    n: usize,
    /// Host edge ids of the target's edges.
    edge_ids: Vec<usize>,
    edges: Vec<[u32; 2]>,
    source: Vec<bool>,
    sink: Vec<bool>,
}

impl Prepared {
    fn new(spec: &CrossingSpec, host: &FiniteGraph) -> Self {
        let target = spec.graph();
        let mut edge_ids = Vec::with_capacity(target.edge_count());
        let mut edges = Vec::with_capacity(target.edge_count());
        for (a, b) in target.edges() {
            let k = host
                .edges()
                .binary_search(&(*a, *b))
                .expect("host graph contains the crossing target");
            edge_ids.push(k);
            edges.push([
                host.index_of(a).unwrap() as u32,
                host.index_of(b).unwrap() as u32,
            ]);
        }
        let n = host.vertex_count();
        let mut source = vec![false; n];
        let mut sink = vec![false; n];
        for v in &spec.sources {
            source[host.index_of(v).expect("source in host graph")] = true;
        }
        for v in &spec.sinks {
            sink[host.index_of(v).expect("sink in host graph")] = true;
        }
        Self {
            n,
            edge_ids,
            edges,
            source,
            sink,
        }
    }

    fn trivially_crossed(&self) -> bool {
        self.source.iter().zip(&self.sink).any(|(&a, &b)| a && b)
    }

    /// `open` is indexed by host edge id.
    fn crosses(&self, open: &[bool]) -> bool {
        if self.trivially_crossed() {
            return true;
        }
        let mut ds = DisjointSet::new(self.n);
        for (k, e) in self.edge_ids.iter().zip(&self.edges) {
            if open[*k] {
                ds.union(e[0] as usize, e[1] as usize);
            }
        }
        let mut hit = vec![false; self.n];
        for v in (0..self.n).filter(|&v| self.source[v]) {
            hit[ds.find(v)] = true;
        }
        (0..self.n).any(|v| self.sink[v] && hit[ds.find(v)])
    }

    /// Smallest `t` such that the event holds for every `p > t`; `None` if it
    /// fails even with everything open.
    fn critical_value(&self, u: &[f64]) -> Option<f64> {
        if self.trivially_crossed() {
            return Some(f64::NEG_INFINITY);
        }
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| u[self.edge_ids[a]].total_cmp(&u[self.edge_ids[b]]));
        let mut ds = DisjointSet::new(self.n);
        let mut has_src = self.source.clone();
        let mut has_sink = self.sink.clone();
        for k in order {
            let [a, b] = self.edges[k];
            let (ra, rb) = (ds.find(a as usize), ds.find(b as usize));
            if ra == rb {
                continue;
            }
            ds.union(ra, rb);
            let r = ds.find(ra);
            has_src[r] = has_src[ra] || has_src[rb];
            has_sink[r] = has_sink[ra] || has_sink[rb];
            if has_src[r] && has_sink[r] {
                return Some(u[self.edge_ids[k]]);
            }
        }
        None
    }

    /// An open source-to-sink path as host vertex index pairs.
    fn path(&self, open: &[bool]) -> Option<Vec<[u32; 2]>> {
        let mut adj: Vec<Vec<(u32, usize)>> = vec![Vec::new(); self.n];
        for (k, e) in self.edge_ids.iter().zip(&self.edges) {
            if open[*k] {
                adj[e[0] as usize].push((e[1], *k));
                adj[e[1] as usize].push((e[0], *k));
            }
        }
        let mut via: Vec<Option<(u32, usize)>> = vec![None; self.n];
        let mut seen = self.source.clone();
        let mut queue: VecDeque<u32> = (0..self.n as u32)
            .filter(|&v| self.source[v as usize])
            .collect();
        while let Some(v) = queue.pop_front() {
            if self.sink[v as usize] {
                let mut out = Vec::new();
                let mut cur = v;
                while let Some((prev, _)) = via[cur as usize] {
                    out.push([prev, cur]);
                    cur = prev;
                }
                return Some(out);
            }
            for &(w, k) in &adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    via[w as usize] = Some((v, k));
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

/// Whether `config` has an open crossing of `spec` using only edges of the
/// target.
pub fn crossing_event(spec: &CrossingSpec, config: &BondConfig<'_>) -> bool {
    Prepared::new(spec, config.graph).crosses(&config.open)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    /// Binomial standard error.
    pub sigma: f64,
    pub successes: usize,
    pub trials: usize,
}

impl Estimate {
    pub fn from_counts(successes: usize, trials: usize) -> Self {
        assert!(trials >= 1, "need at least one trial");
        let p_hat = successes as f64 / trials as f64;
        Self {
            p_hat,
            sigma: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            successes,
            trials,
        }
    }

    /// `p_hat ± z σ`, clamped to `[0, 1]`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (
            (self.p_hat - z * self.sigma).max(0.0),
            (self.p_hat + z * self.sigma).min(1.0),
        )
    }
}

pub fn estimate_crossing(spec: &CrossingSpec, p: f64, trials: usize, seed: u64) -> Estimate {
    estimate_crossing_coupled(spec, &[p], trials, seed)[0]
}

/// Estimates at every `p` in `ps` from the same uniforms: each trial's
/// critical value decides the event at all grid points at once.
pub fn estimate_crossing_coupled(
    spec: &CrossingSpec,
    ps: &[f64],
    trials: usize,
    seed: u64,
) -> Vec<Estimate> {
    assert!(trials >= 1, "need at least one trial");
    ps.iter().for_each(|&p| check_p(p));
    let host = spec.graph();
    let prep = Prepared::new(spec, &host);
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let u = uniforms(host.edge_count(), &mut trial_rng(seed, t));
            let crit = prep.critical_value(&u);
            ps.iter()
                .map(|&p| usize::from(crit.is_some_and(|c| c < p)))
                .collect::<Vec<_>>()
        })
        .reduce(
            || vec![0; ps.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    counts
        .into_iter()
        .map(|c| Estimate::from_counts(c, trials))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadSurvival {
    pub joint: Estimate,
    pub marginals: Vec<Estimate>,
    /// Joint successes whose crossing paths did not contain one path from
    /// the start of the first member to the end of the last.
    pub extraction_failures: usize,
}

impl RoadSurvival {
    pub fn product_of_marginals(&self) -> f64 {
        self.marginals.iter().map(|e| e.p_hat).product()
    }
}

/// Joint and marginal frequencies of the prescribed crossings of a ray
/// prefix under one configuration per trial.
pub fn road_survival(members: &[CrossingSpec], p: f64, trials: usize, seed: u64) -> RoadSurvival {
    assert!(!members.is_empty() && trials >= 1);
    check_p(p);
    let graphs: Vec<FiniteGraph> = members.iter().map(CrossingSpec::graph).collect();
    let host = graph_union(&graphs);
    let preps: Vec<Prepared> = members.iter().map(|m| Prepared::new(m, &host)).collect();
    let first = &preps[0];
    let last = preps.last().unwrap();

    let per_trial: Vec<(Vec<bool>, bool, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let u = uniforms(host.edge_count(), &mut trial_rng(seed, t));
            let open = threshold(&u, p);
            let hits: Vec<bool> = preps.iter().map(|pr| pr.crosses(&open)).collect();
            let joint = hits.iter().all(|&h| h);
            let extracted = !joint || {
                let mut ds = DisjointSet::new(host.vertex_count());
                for [a, b] in preps
                    .iter()
                    .flat_map(|pr| pr.path(&open).expect("crossed member has a path"))
                {
                    ds.union(a as usize, b as usize);
                }
                let mut start = vec![false; host.vertex_count()];
                for v in (0..host.vertex_count()).filter(|&v| first.source[v]) {
                    start[ds.find(v)] = true;
                }
                (0..host.vertex_count()).any(|v| last.sink[v] && start[ds.find(v)])
            };
            (hits, joint, extracted)
        })
        .collect();

    let joint = per_trial.iter().filter(|t| t.1).count();
    let failures = per_trial.iter().filter(|t| !t.2).count();
    let marginals = (0..members.len())
        .map(|k| Estimate::from_counts(per_trial.iter().filter(|t| t.0[k]).count(), trials))
        .collect();
    RoadSurvival {
        joint: Estimate::from_counts(joint, trials),
        marginals,
        extraction_failures: failures,
    }
}

/// Touches both vertical sides or both horizontal sides.
fn spans(touched: [bool; 4]) -> bool {
    (touched[0] && touched[1]) || (touched[2] && touched[3])
}

fn side_flags(rect: &PlanarRect, v: &SlabVertex) -> [bool; 4] {
    if !rect.contains(v.x, v.y) {
        return [false; 4];
    }
    [
        v.x == rect.h.lo,
        v.x == rect.h.hi,
        v.y == rect.v.lo,
        v.y == rect.v.hi,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusResult {
    pub p: f64,
    pub span_box: PlanarRect,
    /// Spanning assembly components per trial.
    pub counts: Vec<usize>,
}

impl CensusResult {
    pub fn median(&self) -> f64 {
        let mut c = self.counts.clone();
        c.sort_unstable();
        let n = c.len();
        if n == 0 {
            return 0.0;
        }
        if n % 2 == 1 {
            c[n / 2] as f64
        } else {
            (c[n / 2 - 1] + c[n / 2]) as f64 / 2.0
        }
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().sum::<usize>() as f64 / self.counts.len().max(1) as f64
    }

    pub fn min(&self) -> usize {
        self.counts.iter().copied().min().unwrap_or(0)
    }
}

struct CensusHost<'a> {
    assembly: &'a SlabAssembly,
    edges: Vec<[u32; 2]>,
    sides: Vec<[bool; 4]>,
}

impl<'a> CensusHost<'a> {
    fn new(assembly: &'a SlabAssembly, span: &PlanarRect) -> Self {
        Self {
            assembly,
            edges: assembly.graph.indexed_edges(),
            sides: assembly
                .graph
                .vertices()
                .iter()
                .map(|v| side_flags(span, v))
                .collect(),
        }
    }

    fn count(&self, open: &[bool]) -> usize {
        let n = self.sides.len();
        let lab = label_open(n, &self.edges, open);
        let mut touched = vec![[false; 4]; lab.count()];
        for (v, s) in self.sides.iter().enumerate() {
            let t = &mut touched[lab.label[v] as usize];
            for k in 0..4 {
                t[k] |= s[k];
            }
        }
        let mut comps: Vec<u32> = (0..n)
            .filter(|&v| spans(touched[lab.label[v] as usize]))
            .map(|v| self.assembly.labels[v])
            .collect();
        comps.sort_unstable();
        comps.dedup();
        comps.len()
    }
}

/// Assembly components that span `span` with every edge open.
pub fn spanning_components(assembly: &SlabAssembly, span: &PlanarRect) -> usize {
    let host = CensusHost::new(assembly, span);
    host.count(&vec![true; host.edges.len()])
}

/// Per-trial number of assembly components containing an open cluster that
/// touches two opposite sides of `span`.
pub fn phi_census(
    assembly: &SlabAssembly,
    p: f64,
    trials: usize,
    seed: u64,
    span: &PlanarRect,
) -> CensusResult {
    phi_census_coupled(assembly, &[p], trials, seed, span).remove(0)
}

pub fn phi_census_coupled(
    assembly: &SlabAssembly,
    ps: &[f64],
    trials: usize,
    seed: u64,
    span: &PlanarRect,
) -> Vec<CensusResult> {
    ps.iter().for_each(|&p| check_p(p));
    let host = CensusHost::new(assembly, span);
    let per_trial: Vec<Vec<usize>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let u = uniforms(host.edges.len(), &mut trial_rng(seed, t));
            ps.iter().map(|&p| host.count(&threshold(&u, p))).collect()
        })
        .collect();
    ps.iter()
        .enumerate()
        .map(|(k, &p)| CensusResult {
            p,
            span_box: *span,
            counts: per_trial.iter().map(|c| c[k]).collect(),
        })
        .collect()
}

/// An event on the open-edge vector of a small graph.
pub type Event<'a> = &'a (dyn Fn(&[bool]) -> bool + Sync);

/// `spec` as an event on configurations of `graph`.
pub fn crossing_predicate(
    spec: &CrossingSpec,
    graph: &FiniteGraph,
) -> impl Fn(&[bool]) -> bool + Sync {
    let prep = Prepared::new(spec, graph);
    move |open: &[bool]| prep.crosses(open)
}

fn config(m: usize, mask: u32) -> Vec<bool> {
    (0..m).map(|k| mask >> k & 1 == 1).collect()
}

/// Checks exhaustively that adding an open edge never destroys the event.
pub fn is_increasing(edge_count: usize, event: Event<'_>) -> Result<bool> {
    if edge_count > MAX_EXACT_EDGES {
        return Err(Error::TooManyEdges(edge_count));
    }
    Ok((0u32..1 << edge_count).into_par_iter().all(|mask| {
        let mut w = config(edge_count, mask);
        if !event(&w) {
            return true;
        }
        (0..edge_count).filter(|&k| mask >> k & 1 == 0).all(|k| {
            w[k] = true;
            let still = event(&w);
            w[k] = false;
            still
        })
    }))
}

/// `P_p(event)` by summing over all `2^|E|` configurations.
pub fn exact_probability(edge_count: usize, event: Event<'_>, p: f64) -> Result<f64> {
    if edge_count > MAX_EXACT_EDGES {
        return Err(Error::TooManyEdges(edge_count));
    }
    check_p(p);
    // Sum per open-edge count first so the result does not depend on the
    // order rayon combines partial sums.
    let by_count = (0u32..1 << edge_count)
        .into_par_iter()
        .filter(|&mask| event(&config(edge_count, mask)))
        .fold(
            || vec![0u64; edge_count + 1],
            |mut acc, mask| {
                acc[mask.count_ones() as usize] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; edge_count + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(by_count
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * p.powi(k as i32) * (1.0 - p).powi((edge_count - k) as i32))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkgResult {
    pub p_ab: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub product: f64,
    pub pass: bool,
}

/// Absolute slack for the `P(A∩B) ≥ P(A)P(B)` comparison.
pub const FKG_SLACK: f64 = 1e-12;

pub fn fkg_check(graph: &FiniteGraph, a: Event<'_>, b: Event<'_>, p: f64) -> Result<FkgResult> {
    let m = graph.edge_count();
    if m > MAX_EXACT_EDGES {
        return Err(Error::TooManyEdges(m));
    }
    if !is_increasing(m, a)? {
        return Err(Error::NotIncreasing("event A".into()));
    }
    if !is_increasing(m, b)? {
        return Err(Error::NotIncreasing("event B".into()));
    }
    let both = |w: &[bool]| a(w) && b(w);
    let p_ab = exact_probability(m, &both, p)?;
    let p_a = exact_probability(m, a, p)?;
    let p_b = exact_probability(m, b, p)?;
    let product = p_a * p_b;
    Ok(FkgResult {
        p_ab,
        p_a,
        p_b,
        product,
        pass: p_ab + FKG_SLACK >= product,
    })
}
