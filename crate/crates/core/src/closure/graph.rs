use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::index::SpatialIndex;
use super::set_approx::SetApprox;
use super::ClosureError;
use crate::shadowing::PseudoOrbit;
use crate::torus::{distance_unchecked, HyperbolicMap};

/// Edges `i → j` whenever `d(f(x_i), x_j) < δ`, on the points of a net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionGraph {
    pub delta: f64,
    /// Sorted successor lists.
    pub successors: Vec<Vec<usize>>,
}

impl TransitionGraph {
    pub fn node_count(&self) -> usize {
        self.successors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.successors[i].binary_search(&j).is_ok()
    }

    /// Re-check every edge against the defining inequality.
    pub fn verify<M: HyperbolicMap + ?Sized>(&self, map: &M, set: &SetApprox) -> bool {
        self.edges().all(|(i, j)| {
            let image = map.forward(&set.points()[i]);
            distance_unchecked(image.coords(), set.points()[j].coords()) < self.delta
        })
    }
}

pub fn build_graph<M: HyperbolicMap + ?Sized>(map: &M, set: &SetApprox, delta: f64) -> TransitionGraph {
    let Some(dim) = set.dim() else {
        return TransitionGraph {
            delta,
            successors: Vec::new(),
        };
    };
    let mut idx = SpatialIndex::with_cell_width(dim, delta);
    for p in set.points() {
        idx.insert(p.coords().to_vec());
    }
    let successors = set
        .points()
        .par_iter()
        .map(|p| idx.within(map.forward(p).coords(), delta))
        .collect();
    TransitionGraph { delta, successors }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub max_cycle_len: usize,
    pub n_paths: usize,
    pub path_len: usize,
    pub seed: u64,
    /// Hard cap on enumerated simple cycles.
    pub cycle_cap: usize,
    /// Hard cap on cycle-to-cycle connectors.
    pub connector_cap: usize,
    /// Points dropped at each open end before collecting an orbit window.
    pub margin: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            max_cycle_len: 4,
            n_paths: 64,
            path_len: 40,
            seed: 0,
            cycle_cap: 2000,
            connector_cap: 400,
            margin: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Cycle,
    Walk,
    Connector,
}

/// One pseudo-orbit read off the graph, with the slice of its shadow to keep.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbitSample {
    pub kind: SampleKind,
    pub nodes: Vec<usize>,
    pub orbit: PseudoOrbit,
    /// Half-open index range (into the window) of trustworthy shadow points.
    pub keep: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    pub samples: Vec<PseudoOrbitSample>,
    /// Set when a hard cap cut enumeration short.
    pub partial: bool,
}

/// Simple cycles of length `<= max_len`, each listed from its smallest node.
///
/// Returns the cycles in discovery order and whether `cap` was hit.
pub fn simple_cycles(graph: &TransitionGraph, max_len: usize, cap: usize) -> (Vec<Vec<usize>>, bool) {
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; graph.node_count()];
    for s in 0..graph.node_count() {
        path.push(s);
        on_path[s] = true;
        if !dfs(graph, s, max_len, cap, &mut path, &mut on_path, &mut out) {
            return (out, true);
        }
        path.pop();
        on_path[s] = false;
    }
    (out, false)
}

fn dfs(
    g: &TransitionGraph,
    s: usize,
    max_len: usize,
    cap: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) -> bool {
    let v = *path.last().expect("nonempty path");
    for &w in &g.successors[v] {
        if w == s {
            if out.len() >= cap {
                return false;
            }
            out.push(path.clone());
        } else if w > s && !on_path[w] && path.len() < max_len {
            path.push(w);
            on_path[w] = true;
            let ok = dfs(g, s, max_len, cap, path, on_path, out);
            path.pop();
            on_path[w] = false;
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Shortest path `u → v₁ → … → w` leaving `from` through an off-cycle node and
/// ending on `to` (which may equal `from`). Returns `u` and the nodes after it.
fn connector(
    g: &TransitionGraph,
    from: &[usize],
    to: &[usize],
    max_len: usize,
) -> Option<(usize, Vec<usize>)> {
    let n = g.node_count();
    let on_from: BTreeSet<usize> = from.iter().copied().collect();
    let on_to: BTreeSet<usize> = to.iter().copied().collect();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let trace = |parent: &[usize], depth: &[usize], v: usize| {
        let mut nodes = vec![v];
        let mut c = v;
        while depth[c] > 1 {
            c = parent[c];
            nodes.push(c);
        }
        nodes.reverse();
        (parent[c], nodes)
    };
    for &u in from {
        for &v in &g.successors[u] {
            if on_from.contains(&v) || depth[v] != usize::MAX {
                continue;
            }
            parent[v] = u;
            depth[v] = 1;
            if on_to.contains(&v) {
                return Some(trace(&parent, &depth, v));
            }
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        if depth[v] >= max_len {
            continue;
        }
        for &w in &g.successors[v] {
            if on_to.contains(&w) {
                let (u, mut nodes) = trace(&parent, &depth, v);
                nodes.push(w);
                return Some((u, nodes));
            }
            if depth[w] == usize::MAX && !on_from.contains(&w) {
                parent[w] = v;
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Walk `reps` full turns around `cycle`, ending at `cycle[end]`.
fn turns_ending_at(cycle: &[usize], end: usize, reps: usize) -> Vec<usize> {
    let k = cycle.len();
    (0..k * reps).map(|t| cycle[(end + 1 + t) % k]).collect()
}

fn turns_starting_at(cycle: &[usize], start: usize, reps: usize) -> Vec<usize> {
    let k = cycle.len();
    (0..k * reps).map(|t| cycle[(start + t) % k]).collect()
}

fn keep_range(len: usize, margin: usize) -> (usize, usize) {
    if len > 2 * margin {
        (margin, len - margin)
    } else {
        (len / 2, len / 2 + 1)
    }
}

/// Cycles, seeded random walks and cycle-to-cycle connectors of the graph.
pub fn sample_pseudo_orbits<M: HyperbolicMap + ?Sized>(
    map: &M,
    set: &SetApprox,
    graph: &TransitionGraph,
    params: &SamplingParams,
) -> Result<Sampling, ClosureError> {
    if graph.node_count() == 0 {
        return Err(ClosureError::EmptySet);
    }
    let pts = set.points();
    let segment = |nodes: &[usize]| -> Result<PseudoOrbit, ClosureError> {
        PseudoOrbit::new(map, 0, nodes.iter().map(|&i| pts[i].clone()).collect())
            .map_err(ClosureError::from)
    };
    let mut samples = Vec::new();

    let (cycles, mut partial) = simple_cycles(graph, params.max_cycle_len, params.cycle_cap);
    for c in &cycles {
        let orbit = PseudoOrbit::periodic(map, 0, c.iter().map(|&i| pts[i].clone()).collect())?;
        samples.push(PseudoOrbitSample {
            kind: SampleKind::Cycle,
            nodes: c.clone(),
            keep: (0, c.len()),
            orbit,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let starts: Vec<usize> = (0..graph.node_count())
        .filter(|&i| !graph.successors[i].is_empty())
        .collect();
    if !starts.is_empty() && params.path_len >= 2 {
        for _ in 0..params.n_paths {
            let mut v = starts[rng.random_range(0..starts.len())];
            let mut nodes = vec![v];
            while nodes.len() < params.path_len {
                let succ = &graph.successors[v];
                if succ.is_empty() {
                    break;
                }
                v = succ[rng.random_range(0..succ.len())];
                nodes.push(v);
            }
            if nodes.len() < 2 {
                continue;
            }
            let orbit = segment(&nodes)?;
            samples.push(PseudoOrbitSample {
                kind: SampleKind::Walk,
                keep: keep_range(nodes.len(), params.margin),
                nodes,
                orbit,
            });
        }
    }

    let mut connectors = 0usize;
    'outer: for a in &cycles {
        for b in &cycles {
            if connectors >= params.connector_cap {
                partial = true;
                break 'outer;
            }
            let Some((u, path)) = connector(graph, a, b, params.path_len) else {
                continue;
            };
            let w = *path.last().expect("connector ends on target");
            let end = a.iter().position(|&x| x == u).expect("u on source cycle");
            let start = b.iter().position(|&x| x == w).expect("w on target cycle");
            let ra = params.margin.div_ceil(a.len()).max(1) + 1;
            let rb = params.margin.div_ceil(b.len()).max(1) + 1;
            let mut nodes = turns_ending_at(a, end, ra);
            nodes.extend_from_slice(&path[..path.len() - 1]);
            nodes.extend(turns_starting_at(b, start, rb));
            let orbit = segment(&nodes)?;
            samples.push(PseudoOrbitSample {
                kind: SampleKind::Connector,
                keep: keep_range(nodes.len(), params.margin),
                nodes,
                orbit,
            });
            connectors += 1;
        }
    }
    Ok(Sampling { samples, partial })
}
