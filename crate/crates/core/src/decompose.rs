//! Convex decompositions of LP solutions into weighted valid mappings.
//!
//! Each round maps the root onto a node with positive mapping value, walks
//! the reoriented request breadth-first and routes every edge along a
//! positive-flow path, then subtracts the smallest used value from all used
//! variables. Reversed edges search the transposed flow.

use std::collections::VecDeque;

use crate::cactus::{AcyclicReorientation, CactusStructure};
use crate::formulations::{CycleCopyVars, McfModel, NovelModel, NovelRequestVars, RequestVars};
use crate::lp::{LpSolution, VarId};
use crate::model::{allocations_unchecked, ConvexDecomposition, DecompositionEntry, Mapping, Request, SubstrateNetwork};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DecomposeError {
    #[error("request `{request}`: no positive-flow path for {edge} from `{from}`")]
    NoFlowPath { request: String, edge: String, from: String },
    #[error("request `{request}`: no positive node mapping left for `{node}`")]
    NoNodeMapping { request: String, node: String },
    #[error("request `{request}`: `{node}` already mapped to `{mapped}` but flow of {edge} leads to `{reached}`")]
    DivergentNodeMapping {
        request: String,
        node: String,
        edge: String,
        mapped: String,
        reached: String,
    },
    #[error("request `{request}`: no cycle copy has positive mass at `{node}`")]
    NoCycleCopy { request: String, node: String },
    #[error("request `{0}`: iteration limit reached")]
    NoProgress(String),
    #[error("request `{request}`: start node `{node}` has no flow path to a terminal")]
    NoPath { request: String, node: String },
}

#[derive(Copy, Clone, Debug)]
pub struct DecomposeOptions {
    /// Values at or below this count as zero.
    pub tolerance: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6 }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FlowDirection {
    /// Follow edges along their direction.
    Forward,
    /// Follow edges against their direction (the transposed flow).
    Reverse,
}

/// Breadth-first search from `start` over edges with `flow > tol` until a
/// node satisfying `terminal` is found.
///
/// The path is returned in substrate edge direction: leaving `start` for
/// [`FlowDirection::Forward`], ending in `start` for
/// [`FlowDirection::Reverse`]. `None` if no terminal is reachable.
pub fn extract_flow_path(
    substrate: &SubstrateNetwork,
    flow: &[f64],
    direction: FlowDirection,
    start: usize,
    terminal: impl Fn(usize) -> bool,
    tol: f64,
) -> Option<(usize, Vec<usize>)> {
    if terminal(start) {
        return Some((start, Vec::new()));
    }
    let n = substrate.num_nodes();
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let edges = match direction {
            FlowDirection::Forward => substrate.out_edges(u),
            FlowDirection::Reverse => substrate.in_edges(u),
        };
        for &e in edges {
            if flow[e] <= tol {
                continue;
            }
            let (a, b) = substrate.edge(e);
            let next = if direction == FlowDirection::Forward { b } else { a };
            if seen[next] {
                continue;
            }
            seen[next] = true;
            pred[next] = Some(e);
            if terminal(next) {
                let mut path = Vec::new();
                let mut w = next;
                while let Some(e) = pred[w] {
                    path.push(e);
                    let (a, b) = substrate.edge(e);
                    w = if direction == FlowDirection::Forward { a } else { b };
                }
                if direction == FlowDirection::Forward {
                    path.reverse();
                }
                return Some((next, path));
            }
            queue.push_back(next);
        }
    }
    None
}

/// Where the flow and node variables of one request edge live.
#[derive(Clone, Copy)]
enum EdgeSource {
    Global,
    Cycle(usize),
}

struct Engine<'a> {
    request: &'a Request,
    substrate: &'a SubstrateNetwork,
    ro: &'a AcyclicReorientation,
    global: &'a RequestVars,
    sources: Vec<EdgeSource>,
    cycles: &'a [Vec<CycleCopyVars>],
    cycle_sources: Vec<usize>,
    tol: f64,
}

impl Engine<'_> {
    fn err_node(&self, i: usize) -> String {
        self.request.node_id(i).to_string()
    }

    fn run(&self, index: usize, values: &[f64]) -> Result<ConvexDecomposition, DecomposeError> {
        let (r, s, ro, tol) = (self.request, self.substrate, self.ro, self.tol);
        let mut vals = values.to_vec();
        let mut out = ConvexDecomposition::empty(index);
        let x = self.global.x;
        let limit = vals.len() + 1;
        let mut flow = vec![0.0; s.num_edges()];
        while vals[x.index()] > tol {
            if out.entries.len() >= limit {
                return Err(DecomposeError::NoProgress(r.id().to_string()));
            }
            let mut used: Vec<VarId> = vec![x];
            let mut node_map: Vec<Option<usize>> = vec![None; r.num_nodes()];
            let mut edge_map: Vec<Vec<usize>> = vec![Vec::new(); r.num_edges()];
            let mut chosen: Vec<Option<usize>> = vec![None; self.cycles.len()];

            let root = ro.root;
            let root_u = (0..s.num_nodes())
                .find(|&u| self.global.y[root][u].is_some_and(|v| vals[v.index()] > tol))
                .ok_or_else(|| DecomposeError::NoNodeMapping {
                    request: r.id().to_string(),
                    node: self.err_node(root),
                })?;
            node_map[root] = Some(root_u);
            let mut queue = VecDeque::from([root]);
            while let Some(p) = queue.pop_front() {
                let mp = node_map[p].expect("queued nodes are mapped");
                for &k in &ro.out_edges[p] {
                    let h = ro.oriented[k].1;
                    let (y_grid, z_row) = match self.sources[k] {
                        EdgeSource::Global => (&self.global.y, &self.global.z[k]),
                        EdgeSource::Cycle(c) => {
                            let copy = match chosen[c] {
                                Some(w) => w,
                                None => {
                                    let w = self.pick_copy(c, p, mp, &vals)?;
                                    chosen[c] = Some(w);
                                    w
                                }
                            };
                            let cv = &self.cycles[c][copy];
                            (&cv.y, &cv.z[k])
                        }
                    };
                    for (e, slot) in flow.iter_mut().enumerate() {
                        *slot = z_row[e].map_or(0.0, |v| vals[v.index()]);
                    }
                    let dir = if ro.reversed[k] {
                        FlowDirection::Reverse
                    } else {
                        FlowDirection::Forward
                    };
                    let terminal = |u: usize| y_grid[h][u].is_some_and(|v| vals[v.index()] > tol);
                    let (reached, path) = extract_flow_path(s, &flow, dir, mp, terminal, tol).ok_or_else(|| {
                        DecomposeError::NoFlowPath {
                            request: r.id().to_string(),
                            edge: r.edge_label(k),
                            from: s.node_id(mp).to_string(),
                        }
                    })?;
                    used.extend(path.iter().map(|&e| z_row[e].expect("path uses positive flow")));
                    edge_map[k] = path;
                    match node_map[h] {
                        Some(m) if m != reached => {
                            return Err(DecomposeError::DivergentNodeMapping {
                                request: r.id().to_string(),
                                node: self.err_node(h),
                                edge: r.edge_label(k),
                                mapped: s.node_id(m).to_string(),
                                reached: s.node_id(reached).to_string(),
                            })
                        }
                        Some(_) => {}
                        None => {
                            node_map[h] = Some(reached);
                            queue.push_back(h);
                        }
                    }
                }
            }

            let node_map: Vec<usize> = node_map.into_iter().map(|m| m.expect("all nodes reachable")).collect();
            for (i, &u) in node_map.iter().enumerate() {
                used.push(self.global.y[i][u].expect("mapped on an allowed node"));
            }
            for (c, copy) in chosen.iter().enumerate() {
                let Some(w) = copy else { continue };
                let cv = &self.cycles[c][*w];
                used.push(cv.x);
                for (i, &u) in node_map.iter().enumerate() {
                    if let Some(v) = cv.y[i][u] {
                        used.push(v);
                    }
                }
            }
            used.sort_unstable();
            used.dedup();
            let f = used.iter().map(|v| vals[v.index()]).fold(f64::INFINITY, f64::min);
            for v in &used {
                let slot = &mut vals[v.index()];
                *slot -= f;
                if *slot < 0.0 {
                    out.clamped += -*slot;
                    *slot = 0.0;
                }
            }
            let mapping = Mapping { node_map, edge_map };
            let alloc = allocations_unchecked(r, s, &mapping);
            for (idx, amount) in alloc.0.iter().enumerate() {
                if *amount == 0.0 {
                    continue;
                }
                if let Some(a) = self.global.a[idx] {
                    let slot = &mut vals[a.index()];
                    *slot -= f * amount;
                    if *slot < 0.0 {
                        out.clamped += -*slot;
                        *slot = 0.0;
                    }
                }
            }
            out.entries.push(DecompositionEntry { weight: f, mapping });
        }
        out.residual_mass = vals[x.index()];
        Ok(out)
    }

    /// Copy of cycle `c` with the largest mapping value of its source on
    /// `mp`; ties go to the earlier target candidate.
    fn pick_copy(&self, c: usize, p: usize, mp: usize, vals: &[f64]) -> Result<usize, DecomposeError> {
        debug_assert_eq!(self.cycle_sources[c], p);
        let mut best: Option<(usize, f64)> = None;
        for (w, cv) in self.cycles[c].iter().enumerate() {
            let Some(v) = cv.y[p][mp] else { continue };
            let val = vals[v.index()];
            if val > self.tol && best.map_or(true, |(_, b)| val > b) {
                best = Some((w, val));
            }
        }
        best.map(|(w, _)| w).ok_or_else(|| DecomposeError::NoCycleCopy {
            request: self.request.id().to_string(),
            node: self.err_node(p),
        })
    }
}

/// Decomposes one request of a flow-model solution. The request graph is
/// expected to be a tree; on cyclic requests the walk reports the first
/// node that two branches map differently.
pub fn decompose_tree(
    index: usize,
    request: &Request,
    substrate: &SubstrateNetwork,
    vars: &RequestVars,
    values: &[f64],
    ro: &AcyclicReorientation,
    opts: &DecomposeOptions,
) -> Result<ConvexDecomposition, DecomposeError> {
    Engine {
        request,
        substrate,
        ro,
        global: vars,
        sources: vec![EdgeSource::Global; request.num_edges()],
        cycles: &[],
        cycle_sources: Vec::new(),
        tol: opts.tolerance,
    }
    .run(index, values)
}

/// Decomposes one request of a cactus-model solution. Cycle edges read the
/// flows of one copy per cycle, chosen when the walk first enters the cycle.
pub fn decompose_cactus(
    index: usize,
    request: &Request,
    substrate: &SubstrateNetwork,
    vars: &NovelRequestVars,
    values: &[f64],
    structure: &CactusStructure,
    opts: &DecomposeOptions,
) -> Result<ConvexDecomposition, DecomposeError> {
    let part = &structure.partition;
    let sources = part
        .edge_cycle
        .iter()
        .map(|c| c.map_or(EdgeSource::Global, EdgeSource::Cycle))
        .collect();
    Engine {
        request,
        substrate,
        ro: &structure.reorientation,
        global: &vars.global,
        sources,
        cycles: &vars.cycles,
        cycle_sources: part.cycles.iter().map(|c| c.source).collect(),
        tol: opts.tolerance,
    }
    .run(index, values)
}

/// Decomposes every request of a flow-model solution, rooting each request
/// at its smallest node id.
pub fn decompose_mcf_solution(
    model: &McfModel,
    requests: &[Request],
    substrate: &SubstrateNetwork,
    solution: &LpSolution<f64>,
    opts: &DecomposeOptions,
) -> Result<Vec<ConvexDecomposition>, DecomposeError> {
    requests
        .iter()
        .enumerate()
        .map(|(idx, r)| {
            let ro = crate::cactus::reorient_default(r).expect("requests are connected");
            decompose_tree(idx, r, substrate, &model.requests[idx], &solution.values, &ro, opts)
        })
        .collect()
}

/// Decomposes every request of a cactus-model solution.
pub fn decompose_novel_solution(
    model: &NovelModel,
    requests: &[Request],
    substrate: &SubstrateNetwork,
    solution: &LpSolution<f64>,
    opts: &DecomposeOptions,
) -> Result<Vec<ConvexDecomposition>, DecomposeError> {
    requests
        .iter()
        .enumerate()
        .map(|(idx, r)| {
            decompose_cactus(
                idx,
                r,
                substrate,
                &model.requests[idx],
                &solution.values,
                &model.structures[idx],
                opts,
            )
        })
        .collect()
}
