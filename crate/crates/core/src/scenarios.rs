//! Random cactus instances on a substrate, following the evaluation setup:
//! tree-plus-cycles topologies, exponential demands scaled to resource
//! factors, sampled placement restrictions and cost-based profits.

use std::collections::VecDeque;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formulations::{build_mcf, FormulationError, McfOptions, Objective};
use crate::io::{read_substrate, IoError};
use crate::lp::{LpError, LpStatus};
use crate::model::{Instance, ModelError, Request, SubstrateNetwork};

const GEANT: &str = include_str!("../data/geant.json");

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("request `{request}`: no admissible placement for `{node}` after {retries} draws")]
    Restriction { request: String, node: String, retries: usize },
    #[error("request `{0}`: node budget exhausted while computing its profit")]
    Budget(String),
    #[error("unknown builtin substrate `{0}`")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub request_count: usize,
    pub nrf: f64,
    pub erf: f64,
    pub node_restriction_fraction: f64,
    /// Probabilities of zero, one and two children.
    pub child_probabilities: [f64; 3],
    pub max_depth: usize,
    pub min_nodes: usize,
    pub seed: u64,
    pub restriction_retries: usize,
    pub ip_node_budget: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            request_count: 10,
            nrf: 0.6,
            erf: 1.0,
            node_restriction_fraction: 0.25,
            child_probabilities: [0.15, 0.5, 0.35],
            max_depth: 3,
            min_nodes: 3,
            seed: 0,
            restriction_retries: 100,
            ip_node_budget: 200_000,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::InvalidConfig(m.to_string()));
        let sum: f64 = self.child_probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.child_probabilities.iter().any(|p| *p < 0.0) {
            return bad("child probabilities must be nonnegative and sum to 1");
        }
        if !(self.nrf > 0.0) || !(self.erf > 0.0) {
            return bad("nrf and erf must be positive");
        }
        if !(self.node_restriction_fraction > 0.0 && self.node_restriction_fraction <= 1.0) {
            return bad("node restriction fraction must lie in (0, 1]");
        }
        if self.min_nodes > (1usize << (self.max_depth + 1)) - 1 {
            return bad("min_nodes exceeds the size of a full binary tree of max_depth");
        }
        Ok(())
    }
}

/// Undirected-then-oriented request graph on nodes `0..nodes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestTopology {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    /// Whether each edge lies on a cycle of the underlying undirected graph.
    pub on_cycle: Vec<bool>,
}

fn sample_tree(config: &GenerationConfig, rng: &mut impl Rng) -> (usize, Vec<(usize, usize)>) {
    let children = WeightedIndex::new(config.child_probabilities).expect("validated probabilities");
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    let mut n = 1;
    while let Some((v, depth)) = queue.pop_front() {
        if depth == config.max_depth {
            continue;
        }
        for _ in 0..children.sample(rng) {
            edges.push((v, n));
            queue.push_back((n, depth + 1));
            n += 1;
        }
    }
    (n, edges)
}

/// Path between `a` and `b` using only edges not yet on a cycle, as edge
/// indices.
fn bridge_path(n: usize, edges: &[(usize, usize)], on_cycle: &[bool], a: usize, b: usize) -> Option<Vec<usize>> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        if v == b {
            break;
        }
        for (k, &(x, y)) in edges.iter().enumerate() {
            if on_cycle[k] {
                continue;
            }
            let w = if x == v {
                y
            } else if y == v {
                x
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((v, k));
                queue.push_back(w);
            }
        }
    }
    if !seen[b] {
        return None;
    }
    let mut path = Vec::new();
    let mut v = b;
    while let Some((p, k)) = parent[v] {
        path.push(k);
        v = p;
    }
    Some(path)
}

/// Samples a binary tree (redrawing small ones), closes random cycles while
/// the graph stays a cactus, then orients every edge at random.
pub fn generate_request_topology(config: &GenerationConfig, rng: &mut impl Rng) -> RequestTopology {
    let (n, mut edges) = loop {
        let t = sample_tree(config, rng);
        if t.0 >= config.min_nodes {
            break t;
        }
    };
    let mut on_cycle = vec![false; edges.len()];
    loop {
        let mut candidates = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if let Some(p) = bridge_path(n, &edges, &on_cycle, a, b) {
                    if p.len() >= 2 {
                        candidates.push((a, b, p));
                    }
                }
            }
        }
        let Some((a, b, path)) = candidates.choose(rng).cloned() else { break };
        for k in path {
            on_cycle[k] = true;
        }
        edges.push((a, b));
        on_cycle.push(true);
    }
    for e in &mut edges {
        if rng.gen::<bool>() {
            *e = (e.1, e.0);
        }
    }
    RequestTopology {
        nodes: n,
        edges,
        on_cycle,
    }
}

/// A request before restrictions and profit are fixed.
#[derive(Clone, Debug)]
pub struct RequestDraft {
    pub id: String,
    pub topology: RequestTopology,
    /// Type index per virtual node.
    pub node_types: Vec<usize>,
    pub node_demands: Vec<f64>,
    pub edge_demands: Vec<f64>,
}

impl RequestDraft {
    pub fn node_id(i: usize) -> String {
        format!("v{i}")
    }
}

pub fn total_node_capacity(substrate: &SubstrateNetwork) -> f64 {
    (0..substrate.node_resources().len())
        .map(|idx| substrate.capacity(substrate.resource(idx)))
        .sum()
}

pub fn total_edge_capacity(substrate: &SubstrateNetwork) -> f64 {
    (0..substrate.num_edges()).map(|e| substrate.edge_capacity(e)).sum()
}

/// Draws `Exp(1)` demands and scales them so that the node demands total
/// `nrf` times the node capacities and the edge capacities total `erf`
/// times the edge demands.
pub fn assign_demands(drafts: &mut [RequestDraft], substrate: &SubstrateNetwork, config: &GenerationConfig, rng: &mut impl Rng) {
    loop {
        for d in drafts.iter_mut() {
            d.node_demands = (0..d.topology.nodes).map(|_| rng.sample(Exp1)).collect();
            d.edge_demands = (0..d.topology.edges.len()).map(|_| rng.sample(Exp1)).collect();
        }
        let node_total: f64 = drafts.iter().flat_map(|d| &d.node_demands).sum();
        let edge_total: f64 = drafts.iter().flat_map(|d| &d.edge_demands).sum();
        let has_edges = drafts.iter().any(|d| !d.edge_demands.is_empty());
        if node_total <= 0.0 || (has_edges && edge_total <= 0.0) {
            continue;
        }
        let fn_ = config.nrf * total_node_capacity(substrate) / node_total;
        let fe = if has_edges {
            total_edge_capacity(substrate) / (config.erf * edge_total)
        } else {
            1.0
        };
        for d in drafts.iter_mut() {
            d.node_demands.iter_mut().for_each(|x| *x *= fn_);
            d.edge_demands.iter_mut().for_each(|x| *x *= fe);
        }
        return;
    }
}

/// Samples `⌈fraction·|V_S|⌉` substrate nodes per virtual node and keeps the
/// compatible, sufficiently capacitated ones, redrawing empty results.
/// Edges stay unrestricted apart from capacity.
pub fn assign_restrictions(
    draft: &RequestDraft,
    substrate: &SubstrateNetwork,
    config: &GenerationConfig,
    rng: &mut impl Rng,
) -> Result<Request, ScenarioError> {
    let n = substrate.num_nodes();
    let k = ((config.node_restriction_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut b = Request::builder(&draft.id, 1.0);
    let ty_name = |i: usize| substrate.type_id(draft.node_types[i]).to_string();
    for i in 0..draft.topology.nodes {
        b.node(&RequestDraft::node_id(i), &ty_name(i), draft.node_demands[i]);
    }
    for (k, &(a, c)) in draft.topology.edges.iter().enumerate() {
        b.edge(&RequestDraft::node_id(a), &RequestDraft::node_id(c), draft.edge_demands[k]);
    }
    for i in 0..draft.topology.nodes {
        let ty = draft.node_types[i];
        let mut allowed = Vec::new();
        for _ in 0..config.restriction_retries.max(1) {
            allowed = rand::seq::index::sample(rng, n, k)
                .into_iter()
                .filter(|&u| {
                    substrate
                        .node_capacity(ty, u)
                        .is_some_and(|c| c >= draft.node_demands[i])
                })
                .collect::<Vec<_>>();
            if !allowed.is_empty() {
                break;
            }
        }
        if allowed.is_empty() {
            return Err(ScenarioError::Restriction {
                request: draft.id.clone(),
                node: RequestDraft::node_id(i),
                retries: config.restriction_retries,
            });
        }
        allowed.sort_unstable();
        let ids: Vec<&str> = allowed.iter().map(|&u| substrate.node_id(u)).collect();
        b.allow_nodes(&RequestDraft::node_id(i), &ids);
    }
    Ok(b.build(substrate)?)
}

/// Great-circle distance in kilometres between `(lat, lon)` pairs in degrees.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (la1, lo1) = (a.0.to_radians(), a.1.to_radians());
    let (la2, lo2) = (b.0.to_radians(), b.1.to_radians());
    let h = ((la2 - la1) / 2.0).sin().powi(2) + la1.cos() * la2.cos() * ((lo2 - lo1) / 2.0).sin().powi(2);
    2.0 * 6371.0 * h.sqrt().asin()
}

/// Edge costs from coordinates (one where missing), node costs uniform with
/// the same total as the edge costs.
pub fn with_default_costs(substrate: &SubstrateNetwork) -> SubstrateNetwork {
    let edge_cost: Vec<f64> = substrate
        .edges()
        .iter()
        .map(|&(u, v)| match (substrate.coordinates(u), substrate.coordinates(v)) {
            (Some(a), Some(b)) => haversine_km(a, b),
            _ => 1.0,
        })
        .collect();
    let node_cost = edge_cost.iter().sum::<f64>() / substrate.num_nodes() as f64;
    let mut s = substrate.clone();
    s.set_costs(vec![node_cost; substrate.node_resources().len()], edge_cost);
    s
}

/// Minimum cost of a valid mapping of `request` alone, or `None` if it has
/// no valid mapping that fits.
pub fn compute_profit(request: &Request, substrate: &SubstrateNetwork, node_budget: usize) -> Result<Option<f64>, ScenarioError> {
    let opts = McfOptions {
        integral: true,
        objective: Objective::MinCost,
        force_embedding: true,
    };
    let model = build_mcf(std::slice::from_ref(request), substrate, &opts)?;
    let ip = model.solve_ip(node_budget)?;
    match ip.solution.status {
        LpStatus::Optimal if ip.proven_optimal => Ok(Some(ip.solution.objective)),
        LpStatus::Infeasible => Ok(None),
        _ => Err(ScenarioError::Budget(request.id().to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroppedRequest {
    pub id: String,
    pub reason: String,
}

/// Provenance of a generated instance. Demand totals cover every sampled
/// request, including dropped ones, so the resource-factor identities can be
/// checked from the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationInfo {
    pub config: GenerationConfig,
    pub sampled: usize,
    pub dropped: Vec<DroppedRequest>,
    pub node_demand_total: f64,
    pub edge_demand_total: f64,
    pub node_capacity_total: f64,
    pub edge_capacity_total: f64,
}

/// Generates one instance; a pure function of `(substrate, config)`.
pub fn generate_instance(
    substrate: &SubstrateNetwork,
    config: &GenerationConfig,
) -> Result<(Instance, GenerationInfo), ScenarioError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let substrate = with_default_costs(substrate);
    let mut drafts: Vec<RequestDraft> = (0..config.request_count)
        .map(|r| {
            let topology = generate_request_topology(config, &mut rng);
            let node_types = (0..topology.nodes)
                .map(|_| rng.gen_range(0..substrate.num_types()))
                .collect();
            RequestDraft {
                id: format!("r{r}"),
                topology,
                node_types,
                node_demands: Vec::new(),
                edge_demands: Vec::new(),
            }
        })
        .collect();
    assign_demands(&mut drafts, &substrate, config, &mut rng);
    let mut requests = Vec::new();
    let mut dropped = Vec::new();
    for d in &drafts {
        let mut r = assign_restrictions(d, &substrate, config, &mut rng)?;
        match compute_profit(&r, &substrate, config.ip_node_budget)? {
            Some(cost) if cost > 0.0 => {
                r.set_profit(cost);
                requests.push(r);
            }
            Some(_) => dropped.push(DroppedRequest {
                id: d.id.clone(),
                reason: "zero embedding cost".into(),
            }),
            None => dropped.push(DroppedRequest {
                id: d.id.clone(),
                reason: "infeasible".into(),
            }),
        }
    }
    let info = GenerationInfo {
        config: config.clone(),
        sampled: drafts.len(),
        dropped,
        node_demand_total: drafts.iter().flat_map(|d| &d.node_demands).sum(),
        edge_demand_total: drafts.iter().flat_map(|d| &d.edge_demands).sum(),
        node_capacity_total: total_node_capacity(&substrate),
        edge_capacity_total: total_edge_capacity(&substrate),
    };
    Ok((Instance { substrate, requests }, info))
}

/// Generates one instance per config in parallel; results keep input order.
pub fn generate_instances(
    substrate: &SubstrateNetwork,
    configs: &[GenerationConfig],
) -> Vec<Result<(Instance, GenerationInfo), ScenarioError>> {
    configs.par_iter().map(|c| generate_instance(substrate, c)).collect()
}

/// Directed ring `u1 -> u2 -> ... -> un -> u1`, one type `cpu`, uniform
/// capacity.
pub fn ring(n: usize, capacity: f64) -> SubstrateNetwork {
    let mut b = SubstrateNetwork::builder();
    for k in 1..=n {
        b.node(&format!("u{k}"), &[("cpu", capacity)]);
    }
    for k in 1..=n {
        b.edge(&format!("u{k}"), &format!("u{}", k % n + 1), capacity);
    }
    b.build().expect("ring with positive capacity")
}

/// The bundled 40-node, 122-edge European backbone with capacity 100.
pub fn geant() -> SubstrateNetwork {
    read_substrate(GEANT).expect("bundled substrate is valid")
}

/// A builtin name (`geant`, `ring:<n>`) or a path to a substrate JSON file.
pub fn load_substrate(name_or_path: &str) -> Result<SubstrateNetwork, ScenarioError> {
    if name_or_path == "geant" {
        return Ok(geant());
    }
    if let Some(n) = name_or_path.strip_prefix("ring:") {
        return match n.parse::<usize>() {
            Ok(n) if n >= 2 => Ok(ring(n, 1.0)),
            _ => Err(ScenarioError::UnknownBuiltin(name_or_path.to_string())),
        };
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(ScenarioError::UnknownBuiltin(name_or_path.to_string()));
    }
    let text = std::fs::read_to_string(path).map_err(IoError::from)?;
    Ok(read_substrate(&text)?)
}
