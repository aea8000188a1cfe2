//! Substrates, requests, mappings and the allocations they induce.
//!
//! Everything is index based once built. Ids are kept for display and
//! serialization; node and type ids must not contain characters that the LP
//! variable naming scheme uses as separators.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::oracle::{self, OracleError};

/// Absolute tolerance for capacity and weight comparisons.
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("id `{0}` is empty or contains one of `@/,:;[]` or whitespace")]
    InvalidId(String),
    #[error("duplicate {kind} `{id}`")]
    Duplicate { kind: &'static str, id: String },
    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("capacity of {0} must be positive")]
    NonPositiveCapacity(String),
    #[error("node `{node}` does not support type `{ty}`")]
    UnsupportedType { node: String, ty: String },
    #[error("request `{request}`: {what}")]
    InvalidRequest { request: String, what: String },
    #[error("request `{request}`: virtual node `{node}` has no allowed substrate node")]
    EmptyAllowedSet { request: String, node: String },
    #[error("mapping does not fit request: {0}")]
    Structural(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(Violation),
}

fn check_id(id: &str) -> Result<(), ModelError> {
    let bad = id.is_empty() || id.chars().any(|c| c.is_whitespace() || "@/,:;[]".contains(c));
    if bad {
        Err(ModelError::InvalidId(id.to_string()))
    } else {
        Ok(())
    }
}

/// A capacitated resource of the substrate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resource {
    /// `(type index, node index)`
    Node { ty: usize, node: usize },
    /// Substrate edge index.
    Edge(usize),
}

/// Directed substrate graph with typed node capacities and edge capacities.
#[derive(Clone, Debug)]
pub struct SubstrateNetwork {
    nodes: Vec<String>,
    node_index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    types: Vec<String>,
    type_index: HashMap<String, usize>,
    node_resources: Vec<(usize, usize)>,
    node_resource_index: HashMap<(usize, usize), usize>,
    node_capacity: Vec<f64>,
    node_cost: Vec<f64>,
    edge_capacity: Vec<f64>,
    edge_cost: Vec<f64>,
    coordinates: BTreeMap<usize, (f64, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct SubstrateBuilder {
    nodes: Vec<(String, Vec<(String, f64)>)>,
    edges: Vec<(String, String, f64)>,
    node_costs: Vec<(String, String, f64)>,
    edge_costs: Vec<(String, String, f64)>,
    coordinates: Vec<(String, f64, f64)>,
    extra_types: Vec<String>,
}

impl SubstrateBuilder {
    /// Adds a node supporting the listed `(type, capacity)` pairs.
    pub fn node(&mut self, id: &str, resources: &[(&str, f64)]) -> &mut Self {
        self.nodes.push((
            id.to_string(),
            resources.iter().map(|(t, c)| (t.to_string(), *c)).collect(),
        ));
        self
    }

    pub fn edge(&mut self, from: &str, to: &str, capacity: f64) -> &mut Self {
        self.edges.push((from.to_string(), to.to_string(), capacity));
        self
    }

    /// Declares a type that no node needs to support.
    pub fn declare_type(&mut self, ty: &str) -> &mut Self {
        self.extra_types.push(ty.to_string());
        self
    }

    pub fn node_cost(&mut self, ty: &str, node: &str, cost: f64) -> &mut Self {
        self.node_costs.push((ty.to_string(), node.to_string(), cost));
        self
    }

    pub fn edge_cost(&mut self, from: &str, to: &str, cost: f64) -> &mut Self {
        self.edge_costs.push((from.to_string(), to.to_string(), cost));
        self
    }

    pub fn coordinates(&mut self, node: &str, lat: f64, lon: f64) -> &mut Self {
        self.coordinates.push((node.to_string(), lat, lon));
        self
    }

    pub fn build(&self) -> Result<SubstrateNetwork, ModelError> {
        let mut types: Vec<String> = self
            .nodes
            .iter()
            .flat_map(|(_, r)| r.iter().map(|(t, _)| t.clone()))
            .chain(self.extra_types.iter().cloned())
            .collect();
        types.sort();
        types.dedup();
        for t in &types {
            check_id(t)?;
        }
        let type_index: HashMap<String, usize> = types.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();

        let mut nodes = Vec::new();
        let mut node_index = HashMap::new();
        for (id, _) in &self.nodes {
            check_id(id)?;
            if node_index.insert(id.clone(), nodes.len()).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "substrate node",
                    id: id.clone(),
                });
            }
            nodes.push(id.clone());
        }

        let mut node_res: Vec<(usize, usize, f64)> = Vec::new();
        for (u, (id, res)) in self.nodes.iter().enumerate() {
            for (t, cap) in res {
                if !(*cap > 0.0) || !cap.is_finite() {
                    return Err(ModelError::NonPositiveCapacity(format!("node `{id}` type `{t}`")));
                }
                let ty = type_index[t];
                if node_res.iter().any(|&(a, b, _)| a == ty && b == u) {
                    return Err(ModelError::Duplicate {
                        kind: "node resource",
                        id: format!("{t}:{id}"),
                    });
                }
                node_res.push((ty, u, *cap));
            }
        }
        node_res.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let node_resources: Vec<(usize, usize)> = node_res.iter().map(|&(t, u, _)| (t, u)).collect();
        let node_capacity: Vec<f64> = node_res.iter().map(|&(_, _, c)| c).collect();
        let node_resource_index: HashMap<(usize, usize), usize> =
            node_resources.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        let lookup = |id: &str| -> Result<usize, ModelError> {
            node_index.get(id).copied().ok_or_else(|| ModelError::Unknown {
                kind: "substrate node",
                id: id.to_string(),
            })
        };

        let mut edges = Vec::new();
        let mut edge_capacity = Vec::new();
        let mut edge_index = HashMap::new();
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (a, b, cap) in &self.edges {
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(ModelError::SelfLoop(a.clone()));
            }
            if !(*cap > 0.0) || !cap.is_finite() {
                return Err(ModelError::NonPositiveCapacity(format!("edge ({a},{b})")));
            }
            if edge_index.insert((u, v), edges.len()).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "substrate edge",
                    id: format!("({a},{b})"),
                });
            }
            out_edges[u].push(edges.len());
            in_edges[v].push(edges.len());
            edges.push((u, v));
            edge_capacity.push(*cap);
        }

        let mut node_cost = vec![0.0; node_resources.len()];
        for (t, n, c) in &self.node_costs {
            let ty = *type_index.get(t).ok_or_else(|| ModelError::Unknown {
                kind: "type",
                id: t.clone(),
            })?;
            let u = lookup(n)?;
            let r = *node_resource_index
                .get(&(ty, u))
                .ok_or_else(|| ModelError::UnsupportedType {
                    node: n.clone(),
                    ty: t.clone(),
                })?;
            node_cost[r] = *c;
        }
        let mut edge_cost = vec![0.0; edges.len()];
        for (a, b, c) in &self.edge_costs {
            let key = (lookup(a)?, lookup(b)?);
            let e = *edge_index.get(&key).ok_or_else(|| ModelError::Unknown {
                kind: "substrate edge",
                id: format!("({a},{b})"),
            })?;
            edge_cost[e] = *c;
        }
        let mut coordinates = BTreeMap::new();
        for (n, lat, lon) in &self.coordinates {
            coordinates.insert(lookup(n)?, (*lat, *lon));
        }

        Ok(SubstrateNetwork {
            nodes,
            node_index,
            edges,
            edge_index,
            out_edges,
            in_edges,
            types,
            type_index,
            node_resources,
            node_resource_index,
            node_capacity,
            node_cost,
            edge_capacity,
            edge_cost,
            coordinates,
        })
    }
}

impl SubstrateNetwork {
    pub fn builder() -> SubstrateBuilder {
        SubstrateBuilder::default()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    pub fn node_id(&self, u: usize) -> &str {
        &self.nodes[u]
    }

    pub fn node_ids(&self) -> &[String] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn type_id(&self, t: usize) -> &str {
        &self.types[t]
    }

    pub fn type_ids(&self) -> &[String] {
        &self.types
    }

    pub fn type_of(&self, id: &str) -> Option<usize> {
        self.type_index.get(id).copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u, v)).copied()
    }

    /// Edge by endpoint ids.
    pub fn edge_by_ids(&self, u: &str, v: &str) -> Option<usize> {
        self.edge_between(self.node(u)?, self.node(v)?)
    }

    pub fn edge_label(&self, e: usize) -> String {
        let (u, v) = self.edges[e];
        format!("({},{})", self.nodes[u], self.nodes[v])
    }

    pub fn out_edges(&self, u: usize) -> &[usize] {
        &self.out_edges[u]
    }

    pub fn in_edges(&self, u: usize) -> &[usize] {
        &self.in_edges[u]
    }

    /// Node resources `(type, node)`, sorted by type then node.
    pub fn node_resources(&self) -> &[(usize, usize)] {
        &self.node_resources
    }

    pub fn supports(&self, ty: usize, u: usize) -> bool {
        self.node_resource_index.contains_key(&(ty, u))
    }

    /// Types supported by node `u`.
    pub fn supported_types(&self, u: usize) -> Vec<usize> {
        (0..self.types.len()).filter(|&t| self.supports(t, u)).collect()
    }

    pub fn node_capacity(&self, ty: usize, u: usize) -> Option<f64> {
        self.node_resource_index.get(&(ty, u)).map(|&r| self.node_capacity[r])
    }

    pub fn node_cost(&self, ty: usize, u: usize) -> Option<f64> {
        self.node_resource_index.get(&(ty, u)).map(|&r| self.node_cost[r])
    }

    pub fn edge_capacity(&self, e: usize) -> f64 {
        self.edge_capacity[e]
    }

    pub fn edge_cost(&self, e: usize) -> f64 {
        self.edge_cost[e]
    }

    pub fn coordinates(&self, u: usize) -> Option<(f64, f64)> {
        self.coordinates.get(&u).copied()
    }

    pub fn has_coordinates(&self) -> bool {
        !self.coordinates.is_empty()
    }

    /// Total number of resources: node resources followed by edges.
    pub fn num_resources(&self) -> usize {
        self.node_resources.len() + self.edges.len()
    }

    /// Dense index of a resource in `0..num_resources()`.
    pub fn resource_index(&self, r: Resource) -> Option<usize> {
        match r {
            Resource::Node { ty, node } => self.node_resource_index.get(&(ty, node)).copied(),
            Resource::Edge(e) => (e < self.edges.len()).then(|| self.node_resources.len() + e),
        }
    }

    pub fn resource(&self, index: usize) -> Resource {
        let nr = self.node_resources.len();
        if index < nr {
            let (ty, node) = self.node_resources[index];
            Resource::Node { ty, node }
        } else {
            Resource::Edge(index - nr)
        }
    }

    pub fn resources(&self) -> impl Iterator<Item = Resource> + '_ {
        (0..self.num_resources()).map(|i| self.resource(i))
    }

    pub fn capacity(&self, r: Resource) -> f64 {
        match r {
            Resource::Node { ty, node } => self.node_capacity(ty, node).unwrap_or(0.0),
            Resource::Edge(e) => self.edge_capacity[e],
        }
    }

    pub fn cost(&self, r: Resource) -> f64 {
        match r {
            Resource::Node { ty, node } => self.node_cost(ty, node).unwrap_or(0.0),
            Resource::Edge(e) => self.edge_cost[e],
        }
    }

    pub fn resource_label(&self, r: Resource) -> String {
        match r {
            Resource::Node { ty, node } => format!("{}:{}", self.types[ty], self.nodes[node]),
            Resource::Edge(e) => self.edge_label(e),
        }
    }

    pub(crate) fn set_costs(&mut self, node_cost: Vec<f64>, edge_cost: Vec<f64>) {
        assert_eq!(node_cost.len(), self.node_resources.len());
        assert_eq!(edge_cost.len(), self.edges.len());
        self.node_cost = node_cost;
        self.edge_cost = edge_cost;
    }

    /// Rebuilds the builder that produces this network.
    pub fn to_builder(&self) -> SubstrateBuilder {
        let mut b = SubstrateBuilder::default();
        for (u, id) in self.nodes.iter().enumerate() {
            let res: Vec<(&str, f64)> = self
                .node_resources
                .iter()
                .zip(&self.node_capacity)
                .filter(|((_, n), _)| *n == u)
                .map(|((t, _), c)| (self.types[*t].as_str(), *c))
                .collect();
            b.node(id, &res);
        }
        for t in &self.types {
            b.declare_type(t);
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            b.edge(&self.nodes[u], &self.nodes[v], self.edge_capacity[e]);
            b.edge_cost(&self.nodes[u], &self.nodes[v], self.edge_cost[e]);
        }
        for (r, &(t, u)) in self.node_resources.iter().enumerate() {
            b.node_cost(&self.types[t], &self.nodes[u], self.node_cost[r]);
        }
        for (&u, &(lat, lon)) in &self.coordinates {
            b.coordinates(&self.nodes[u], lat, lon);
        }
        b
    }
}

/// Virtual network request, resolved against one substrate.
#[derive(Clone, Debug)]
pub struct Request {
    id: String,
    nodes: Vec<String>,
    node_index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    profit: f64,
    node_type: Vec<usize>,
    node_demand: Vec<f64>,
    edge_demand: Vec<f64>,
    allowed_nodes: Vec<Vec<usize>>,
    /// Sorted substrate edge indices per virtual edge.
    allowed_edges: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct RequestBuilder {
    id: String,
    profit: f64,
    nodes: Vec<(String, String, f64)>,
    edges: Vec<(String, String, f64)>,
    allowed_nodes: HashMap<String, Vec<String>>,
    allowed_edges: HashMap<(String, String), Vec<(String, String)>>,
}

impl RequestBuilder {
    pub fn new(id: &str, profit: f64) -> Self {
        Self {
            id: id.to_string(),
            profit,
            nodes: Vec::new(),
            edges: Vec::new(),
            allowed_nodes: HashMap::new(),
            allowed_edges: HashMap::new(),
        }
    }

    pub fn node(&mut self, id: &str, ty: &str, demand: f64) -> &mut Self {
        self.nodes.push((id.to_string(), ty.to_string(), demand));
        self
    }

    pub fn edge(&mut self, from: &str, to: &str, demand: f64) -> &mut Self {
        self.edges.push((from.to_string(), to.to_string(), demand));
        self
    }

    /// Restricts the placement of `node`. Without a call every compatible,
    /// sufficiently capacitated substrate node is allowed.
    pub fn allow_nodes(&mut self, node: &str, substrate_nodes: &[&str]) -> &mut Self {
        self.allowed_nodes
            .insert(node.to_string(), substrate_nodes.iter().map(|s| s.to_string()).collect());
        self
    }

    /// Restricts the routing of virtual edge `(from, to)`. Without a call
    /// every sufficiently capacitated substrate edge is allowed.
    pub fn allow_edges(&mut self, from: &str, to: &str, substrate_edges: &[(&str, &str)]) -> &mut Self {
        self.allowed_edges.insert(
            (from.to_string(), to.to_string()),
            substrate_edges
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        );
        self
    }

    pub fn profit(&mut self, profit: f64) -> &mut Self {
        self.profit = profit;
        self
    }

    pub fn build(&self, substrate: &SubstrateNetwork) -> Result<Request, ModelError> {
        let invalid = |what: String| ModelError::InvalidRequest {
            request: self.id.clone(),
            what,
        };
        check_id(&self.id)?;
        if !(self.profit > 0.0) || !self.profit.is_finite() {
            return Err(invalid(format!("profit {} is not positive", self.profit)));
        }
        if self.nodes.is_empty() {
            return Err(invalid("no virtual nodes".into()));
        }
        let mut nodes = Vec::new();
        let mut node_index = HashMap::new();
        let mut node_type = Vec::new();
        let mut node_demand = Vec::new();
        for (id, ty, d) in &self.nodes {
            check_id(id)?;
            if node_index.insert(id.clone(), nodes.len()).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "virtual node",
                    id: id.clone(),
                });
            }
            let t = substrate.type_of(ty).ok_or_else(|| ModelError::Unknown {
                kind: "type",
                id: ty.clone(),
            })?;
            if !(*d >= 0.0) || !d.is_finite() {
                return Err(invalid(format!("node `{id}` has demand {d}")));
            }
            nodes.push(id.clone());
            node_type.push(t);
            node_demand.push(*d);
        }
        let vnode = |id: &str| -> Result<usize, ModelError> {
            node_index.get(id).copied().ok_or_else(|| ModelError::Unknown {
                kind: "virtual node",
                id: id.to_string(),
            })
        };
        let snode = |id: &str| -> Result<usize, ModelError> {
            substrate.node(id).ok_or_else(|| ModelError::Unknown {
                kind: "substrate node",
                id: id.to_string(),
            })
        };

        let mut edges = Vec::new();
        let mut edge_demand = Vec::new();
        for (a, b, d) in &self.edges {
            let (i, j) = (vnode(a)?, vnode(b)?);
            if i == j {
                return Err(ModelError::SelfLoop(a.clone()));
            }
            if edges.contains(&(i, j)) {
                return Err(ModelError::Duplicate {
                    kind: "virtual edge",
                    id: format!("({a},{b})"),
                });
            }
            if !(*d >= 0.0) || !d.is_finite() {
                return Err(invalid(format!("edge ({a},{b}) has demand {d}")));
            }
            edges.push((i, j));
            edge_demand.push(*d);
        }
        for key in self.allowed_nodes.keys() {
            vnode(key)?;
        }
        for (a, b) in self.allowed_edges.keys() {
            let key = (vnode(a)?, vnode(b)?);
            if !edges.contains(&key) {
                return Err(ModelError::Unknown {
                    kind: "virtual edge",
                    id: format!("({a},{b})"),
                });
            }
        }

        let mut allowed_nodes = Vec::with_capacity(nodes.len());
        for (i, id) in nodes.iter().enumerate() {
            let ty = node_type[i];
            let fits = |u: usize| {
                substrate
                    .node_capacity(ty, u)
                    .is_some_and(|c| c + TOLERANCE >= node_demand[i])
            };
            let mut set: Vec<usize> = match self.allowed_nodes.get(id) {
                Some(list) => {
                    let mut out = Vec::new();
                    for s in list {
                        let u = snode(s)?;
                        if !fits(u) {
                            return Err(invalid(format!(
                                "`{s}` is not a compatible node with sufficient capacity for `{id}`"
                            )));
                        }
                        out.push(u);
                    }
                    out
                }
                None => (0..substrate.num_nodes()).filter(|&u| fits(u)).collect(),
            };
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(ModelError::EmptyAllowedSet {
                    request: self.id.clone(),
                    node: id.clone(),
                });
            }
            allowed_nodes.push(set);
        }

        let mut allowed_edges = Vec::with_capacity(edges.len());
        for (k, &(i, j)) in edges.iter().enumerate() {
            let d = edge_demand[k];
            let fits = |e: usize| substrate.edge_capacity(e) + TOLERANCE >= d;
            let key = (nodes[i].clone(), nodes[j].clone());
            let mut set: Vec<usize> = match self.allowed_edges.get(&key) {
                Some(list) => {
                    let mut out = Vec::new();
                    for (a, b) in list {
                        let e = substrate.edge_between(snode(a)?, snode(b)?).ok_or_else(|| ModelError::Unknown {
                            kind: "substrate edge",
                            id: format!("({a},{b})"),
                        })?;
                        if !fits(e) {
                            return Err(invalid(format!(
                                "substrate edge ({a},{b}) cannot carry virtual edge ({},{})",
                                key.0, key.1
                            )));
                        }
                        out.push(e);
                    }
                    out
                }
                None => (0..substrate.num_edges()).filter(|&e| fits(e)).collect(),
            };
            set.sort_unstable();
            set.dedup();
            allowed_edges.push(set);
        }

        let req = Request {
            id: self.id.clone(),
            nodes,
            node_index,
            edges,
            profit: self.profit,
            node_type,
            node_demand,
            edge_demand,
            allowed_nodes,
            allowed_edges,
        };
        if !req.is_connected() {
            return Err(invalid("underlying undirected graph is not connected".into()));
        }
        Ok(req)
    }
}

impl Request {
    pub fn builder(id: &str, profit: f64) -> RequestBuilder {
        RequestBuilder::new(id, profit)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn profit(&self) -> f64 {
        self.profit
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_id(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn node_ids(&self) -> &[String] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> (usize, usize) {
        self.edges[k]
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.iter().position(|&e| e == (i, j))
    }

    pub fn edge_label(&self, k: usize) -> String {
        let (i, j) = self.edges[k];
        format!("({},{})", self.nodes[i], self.nodes[j])
    }

    pub fn node_type(&self, i: usize) -> usize {
        self.node_type[i]
    }

    pub fn node_demand(&self, i: usize) -> f64 {
        self.node_demand[i]
    }

    pub fn edge_demand(&self, k: usize) -> f64 {
        self.edge_demand[k]
    }

    pub fn allowed_nodes(&self, i: usize) -> &[usize] {
        &self.allowed_nodes[i]
    }

    pub fn allowed_edges(&self, k: usize) -> &[usize] {
        &self.allowed_edges[k]
    }

    pub fn node_allowed(&self, i: usize, u: usize) -> bool {
        self.allowed_nodes[i].binary_search(&u).is_ok()
    }

    pub fn edge_allowed(&self, k: usize, e: usize) -> bool {
        self.allowed_edges[k].binary_search(&e).is_ok()
    }

    pub(crate) fn set_profit(&mut self, profit: f64) {
        self.profit = profit;
    }

    /// Undirected adjacency as `(neighbor, edge index)`, sorted.
    pub fn undirected_neighbors(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            adj[i].push((j, k));
            adj[j].push((i, k));
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn is_connected(&self) -> bool {
        let adj = self.undirected_neighbors();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &(j, _) in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Rebuilds a builder that produces this request on `substrate`.
    pub fn to_builder(&self, substrate: &SubstrateNetwork) -> RequestBuilder {
        let mut b = RequestBuilder::new(&self.id, self.profit);
        for i in 0..self.nodes.len() {
            b.node(&self.nodes[i], substrate.type_id(self.node_type[i]), self.node_demand[i]);
            let allowed: Vec<&str> = self.allowed_nodes[i].iter().map(|&u| substrate.node_id(u)).collect();
            b.allow_nodes(&self.nodes[i], &allowed);
        }
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            b.edge(&self.nodes[i], &self.nodes[j], self.edge_demand[k]);
            let allowed: Vec<(&str, &str)> = self.allowed_edges[k]
                .iter()
                .map(|&e| {
                    let (u, v) = substrate.edge(e);
                    (substrate.node_id(u), substrate.node_id(v))
                })
                .collect();
            b.allow_edges(&self.nodes[i], &self.nodes[j], &allowed);
        }
        b
    }
}

/// A substrate with a list of requests.
#[derive(Clone, Debug)]
pub struct Instance {
    pub substrate: SubstrateNetwork,
    pub requests: Vec<Request>,
}

/// Node placement plus one substrate edge path per virtual edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping {
    /// Substrate node per virtual node.
    pub node_map: Vec<usize>,
    /// Substrate edge path per virtual edge; may be empty.
    pub edge_map: Vec<Vec<usize>>,
}

impl Mapping {
    /// Builds a mapping from ids. Virtual edges without an entry get the
    /// empty path.
    pub fn from_ids(
        request: &Request,
        substrate: &SubstrateNetwork,
        nodes: &[(&str, &str)],
        paths: &[((&str, &str), &[&str])],
    ) -> Result<Mapping, ModelError> {
        let mut node_map = vec![usize::MAX; request.num_nodes()];
        for (i, u) in nodes {
            let i = request.node(i).ok_or_else(|| ModelError::Unknown {
                kind: "virtual node",
                id: i.to_string(),
            })?;
            node_map[i] = substrate.node(u).ok_or_else(|| ModelError::Unknown {
                kind: "substrate node",
                id: u.to_string(),
            })?;
        }
        if node_map.contains(&usize::MAX) {
            return Err(ModelError::Structural("virtual node left unmapped".into()));
        }
        let mut edge_map = vec![Vec::new(); request.num_edges()];
        for ((a, b), walk) in paths {
            let (i, j) = (
                request.node(a).ok_or_else(|| ModelError::Unknown {
                    kind: "virtual node",
                    id: a.to_string(),
                })?,
                request.node(b).ok_or_else(|| ModelError::Unknown {
                    kind: "virtual node",
                    id: b.to_string(),
                })?,
            );
            let k = request.edge_index(i, j).ok_or_else(|| ModelError::Unknown {
                kind: "virtual edge",
                id: format!("({a},{b})"),
            })?;
            let mut path = Vec::new();
            for w in walk.windows(2) {
                let e = substrate.edge_by_ids(w[0], w[1]).ok_or_else(|| ModelError::Unknown {
                    kind: "substrate edge",
                    id: format!("({},{})", w[0], w[1]),
                })?;
                path.push(e);
            }
            edge_map[k] = path;
        }
        Ok(Mapping { node_map, edge_map })
    }
}

/// First violated condition of a mapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NodeNotAllowed { node: String, substrate: String },
    EdgeNotAllowed { edge: String, substrate: String },
    PathEndpointMismatch { edge: String },
    PathNotContiguous { edge: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeNotAllowed { node, substrate } => {
                write!(f, "node not allowed: `{node}` on `{substrate}`")
            }
            Violation::EdgeNotAllowed { edge, substrate } => {
                write!(f, "edge not allowed: {edge} over {substrate}")
            }
            Violation::PathEndpointMismatch { edge } => write!(f, "path endpoint mismatch on {edge}"),
            Violation::PathNotContiguous { edge } => write!(f, "path not contiguous on {edge}"),
        }
    }
}

/// Result of [`validate_mapping`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingCheck {
    pub valid: bool,
    pub violation: Option<Violation>,
}

fn check_shape(request: &Request, substrate: &SubstrateNetwork, m: &Mapping) -> Result<(), ModelError> {
    if m.node_map.len() != request.num_nodes() {
        return Err(ModelError::Structural(format!(
            "{} node entries for {} virtual nodes",
            m.node_map.len(),
            request.num_nodes()
        )));
    }
    if m.edge_map.len() != request.num_edges() {
        return Err(ModelError::Structural(format!(
            "{} path entries for {} virtual edges",
            m.edge_map.len(),
            request.num_edges()
        )));
    }
    if let Some(&u) = m.node_map.iter().find(|&&u| u >= substrate.num_nodes()) {
        return Err(ModelError::Structural(format!("unknown substrate node #{u}")));
    }
    if let Some(&e) = m.edge_map.iter().flatten().find(|&&e| e >= substrate.num_edges()) {
        return Err(ModelError::Structural(format!("unknown substrate edge #{e}")));
    }
    Ok(())
}

/// Checks the mapping conditions: allowed placements, allowed edges and
/// contiguous paths between the placed endpoints. Paths may revisit nodes.
pub fn validate_mapping(
    request: &Request,
    substrate: &SubstrateNetwork,
    m: &Mapping,
) -> Result<MappingCheck, ModelError> {
    check_shape(request, substrate, m)?;
    let fail = |v: Violation| {
        Ok(MappingCheck {
            valid: false,
            violation: Some(v),
        })
    };
    for (i, &u) in m.node_map.iter().enumerate() {
        if !request.node_allowed(i, u) {
            return fail(Violation::NodeNotAllowed {
                node: request.node_id(i).to_string(),
                substrate: substrate.node_id(u).to_string(),
            });
        }
    }
    for (k, path) in m.edge_map.iter().enumerate() {
        let (i, j) = request.edge(k);
        let (from, to) = (m.node_map[i], m.node_map[j]);
        let label = request.edge_label(k);
        let Some((&first, _)) = path.split_first() else {
            if from != to {
                return fail(Violation::PathEndpointMismatch { edge: label });
            }
            continue;
        };
        if substrate.edge(first).0 != from || substrate.edge(*path.last().unwrap()).1 != to {
            return fail(Violation::PathEndpointMismatch { edge: label });
        }
        for w in path.windows(2) {
            if substrate.edge(w[0]).1 != substrate.edge(w[1]).0 {
                return fail(Violation::PathNotContiguous { edge: label });
            }
        }
        if let Some(&e) = path.iter().find(|&&e| !request.edge_allowed(k, e)) {
            return fail(Violation::EdgeNotAllowed {
                edge: label,
                substrate: substrate.edge_label(e),
            });
        }
    }
    Ok(MappingCheck {
        valid: true,
        violation: None,
    })
}

/// Allocations indexed by [`SubstrateNetwork::resource_index`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationVector(pub Vec<f64>);

impl AllocationVector {
    pub fn zeros(substrate: &SubstrateNetwork) -> Self {
        Self(vec![0.0; substrate.num_resources()])
    }

    pub fn get(&self, substrate: &SubstrateNetwork, r: Resource) -> f64 {
        substrate.resource_index(r).map_or(0.0, |i| self.0[i])
    }

    pub fn add_scaled(&mut self, other: &AllocationVector, factor: f64) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }

    /// Largest allocation-to-capacity ratio over node resources and over
    /// edges, as `(node, edge)`.
    pub fn max_loads(&self, substrate: &SubstrateNetwork) -> (f64, f64) {
        let nr = substrate.node_resources().len();
        let mut node = 0.0f64;
        let mut edge = 0.0f64;
        for (idx, a) in self.0.iter().enumerate() {
            let load = a / substrate.capacity(substrate.resource(idx));
            if idx < nr {
                node = node.max(load);
            } else {
                edge = edge.max(load);
            }
        }
        (node, edge)
    }

    /// `true` if every allocation is within capacity up to [`TOLERANCE`].
    pub fn within_capacity(&self, substrate: &SubstrateNetwork) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(idx, a)| *a <= substrate.capacity(substrate.resource(idx)) + TOLERANCE)
    }
}

/// Allocation vector of a mapping without validity checks.
pub(crate) fn allocations_unchecked(request: &Request, substrate: &SubstrateNetwork, m: &Mapping) -> AllocationVector {
    let mut alloc = AllocationVector::zeros(substrate);
    for (i, &u) in m.node_map.iter().enumerate() {
        let idx = substrate
            .resource_index(Resource::Node {
                ty: request.node_type(i),
                node: u,
            })
            .expect("allowed node supports the type");
        alloc.0[idx] += request.node_demand(i);
    }
    let nr = substrate.node_resources().len();
    for (k, path) in m.edge_map.iter().enumerate() {
        for &e in path {
            alloc.0[nr + e] += request.edge_demand(k);
        }
    }
    alloc
}

/// Cumulative allocations a valid mapping induces on every resource.
pub fn allocations(request: &Request, substrate: &SubstrateNetwork, m: &Mapping) -> Result<AllocationVector, ModelError> {
    let check = validate_mapping(request, substrate, m)?;
    if let Some(v) = check.violation {
        return Err(ModelError::InvalidMapping(v));
    }
    Ok(allocations_unchecked(request, substrate, m))
}

/// `true` if the summed allocations of all given mappings respect every
/// capacity.
pub fn is_feasible_embedding(substrate: &SubstrateNetwork, embedded: &[(&Request, &Mapping)]) -> Result<bool, ModelError> {
    let mut total = AllocationVector::zeros(substrate);
    for (req, m) in embedded {
        total.add_scaled(&allocations(req, substrate, m)?, 1.0);
    }
    Ok(total.within_capacity(substrate))
}

/// Largest demand any single virtual element of `request` may place on `r`.
pub fn max_demand(request: &Request, substrate: &SubstrateNetwork, r: Resource) -> f64 {
    let mut best = 0.0f64;
    match r {
        Resource::Node { ty, node } => {
            for i in 0..request.num_nodes() {
                if request.node_type(i) == ty && request.node_allowed(i, node) {
                    best = best.max(request.node_demand(i));
                }
            }
        }
        Resource::Edge(e) => {
            debug_assert!(e < substrate.num_edges());
            for k in 0..request.num_edges() {
                if request.edge_allowed(k, e) {
                    best = best.max(request.edge_demand(k));
                }
            }
        }
    }
    best
}

/// Largest allocation any valid mapping of `request` places on `r`, by
/// exhaustive enumeration.
pub fn max_allocation_exact(
    request: &Request,
    substrate: &SubstrateNetwork,
    r: Resource,
    budget: usize,
) -> Result<f64, OracleError> {
    let idx = substrate
        .resource_index(r)
        .ok_or_else(|| OracleError::UnknownResource(format!("{r:?}")))?;
    let mappings = oracle::enumerate_valid_mappings_with(request, substrate, substrate.num_edges(), budget)?;
    Ok(mappings
        .iter()
        .map(|m| allocations_unchecked(request, substrate, m).0[idx])
        .fold(0.0, f64::max))
}

/// One weighted mapping of a convex decomposition.
#[derive(Clone, Debug)]
pub struct DecompositionEntry {
    pub weight: f64,
    pub mapping: Mapping,
}

/// Weighted valid mappings whose weights sum to at most one.
#[derive(Clone, Debug)]
pub struct ConvexDecomposition {
    /// Index of the request in its instance.
    pub request: usize,
    pub entries: Vec<DecompositionEntry>,
    /// Embedding mass left over once no tolerance-level path remained.
    pub residual_mass: f64,
    /// Total amount by which allocation variables were clamped at zero.
    pub clamped: f64,
}

impl ConvexDecomposition {
    pub fn empty(request: usize) -> Self {
        Self {
            request,
            entries: Vec::new(),
            residual_mass: 0.0,
            clamped: 0.0,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// `Σ_k f_k · A(m_k)`.
    pub fn expected_allocation(&self, request: &Request, substrate: &SubstrateNetwork) -> AllocationVector {
        let mut acc = AllocationVector::zeros(substrate);
        for e in &self.entries {
            acc.add_scaled(&allocations_unchecked(request, substrate, &e.mapping), e.weight);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> SubstrateNetwork {
        let mut b = SubstrateNetwork::builder();
        for u in ["u1", "u2", "u3", "u4", "u5"] {
            b.node(u, &[("cpu", 10.0)]);
        }
        for w in ["u1", "u2", "u3", "u4", "u5"].windows(2) {
            b.edge(w[0], w[1], 100.0);
        }
        b.build().unwrap()
    }

    #[test]
    fn rejects_bad_ids_and_capacities() {
        let mut b = SubstrateNetwork::builder();
        b.node("a/b", &[("cpu", 1.0)]);
        assert!(matches!(b.build(), Err(ModelError::InvalidId(_))));
        let mut b = SubstrateNetwork::builder();
        b.node("a", &[("cpu", 0.0)]);
        assert!(matches!(b.build(), Err(ModelError::NonPositiveCapacity(_))));
        let mut b = SubstrateNetwork::builder();
        b.node("a", &[("cpu", 1.0)]).edge("a", "a", 1.0);
        assert!(matches!(b.build(), Err(ModelError::SelfLoop(_))));
    }

    #[test]
    fn co_located_demands_add_up() {
        let s = line();
        let mut rb = Request::builder("r", 1.0);
        rb.node("i", "cpu", 2.0).node("j", "cpu", 3.0).edge("i", "j", 1.0);
        let r = rb.build(&s).unwrap();
        let m = Mapping::from_ids(&r, &s, &[("i", "u2"), ("j", "u2")], &[]).unwrap();
        let a = allocations(&r, &s, &m).unwrap();
        let cpu = s.type_of("cpu").unwrap();
        assert_eq!(a.get(&s, Resource::Node { ty: cpu, node: 1 }), 5.0);
        assert!(a.0[s.node_resources().len()..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn edge_demand_on_every_path_edge() {
        let s = line();
        let mut rb = Request::builder("r", 1.0);
        rb.node("i", "cpu", 0.0).node("j", "cpu", 0.0).edge("i", "j", 1.0);
        let r = rb.build(&s).unwrap();
        let m = Mapping::from_ids(&r, &s, &[("i", "u1"), ("j", "u5")], &[(("i", "j"), &["u1", "u2", "u3", "u4", "u5"])])
            .unwrap();
        let a = allocations(&r, &s, &m).unwrap();
        let nr = s.node_resources().len();
        assert_eq!(&a.0[nr..], &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn broken_path_is_reported() {
        let s = line();
        let mut rb = Request::builder("r", 1.0);
        rb.node("i", "cpu", 0.0).node("j", "cpu", 0.0).edge("i", "j", 1.0);
        let r = rb.build(&s).unwrap();
        let m = Mapping::from_ids(&r, &s, &[("i", "u1"), ("j", "u3")], &[(("i", "j"), &["u2", "u3"])]).unwrap();
        let c = validate_mapping(&r, &s, &m).unwrap();
        assert!(!c.valid);
        assert!(c.violation.unwrap().to_string().starts_with("path endpoint mismatch"));
        let bad = Mapping {
            node_map: vec![0],
            edge_map: vec![],
        };
        assert!(matches!(validate_mapping(&r, &s, &bad), Err(ModelError::Structural(_))));
    }

    #[test]
    fn max_demand_cases() {
        let s = line();
        let mut rb = Request::builder("r", 1.0);
        rb.node("i", "cpu", 2.0)
            .node("j", "cpu", 5.0)
            .node("k", "cpu", 1.0)
            .edge("i", "j", 1.0)
            .edge("j", "k", 3.0)
            .allow_nodes("k", &["u5"])
            .allow_edges("i", "j", &[("u1", "u2")]);
        let r = rb.build(&s).unwrap();
        let cpu = s.type_of("cpu").unwrap();
        assert_eq!(max_demand(&r, &s, Resource::Node { ty: cpu, node: 0 }), 5.0);
        assert_eq!(max_demand(&r, &s, Resource::Node { ty: cpu, node: 4 }), 5.0);
        let e12 = s.edge_by_ids("u1", "u2").unwrap();
        let e23 = s.edge_by_ids("u2", "u3").unwrap();
        assert_eq!(max_demand(&r, &s, Resource::Edge(e12)), 3.0);
        assert_eq!(max_demand(&r, &s, Resource::Edge(e23)), 3.0);
    }

    #[test]
    fn request_validation() {
        let s = line();
        let mut rb = Request::builder("r", 1.0);
        rb.node("i", "cpu", 20.0);
        assert!(matches!(rb.build(&s), Err(ModelError::EmptyAllowedSet { .. })));
        let mut rb = Request::builder("r", 1.0);
        rb.node("i", "cpu", 1.0).node("j", "cpu", 1.0);
        assert!(matches!(rb.build(&s), Err(ModelError::InvalidRequest { .. })));
        let mut rb = Request::builder("r", 0.0);
        rb.node("i", "cpu", 1.0);
        assert!(rb.build(&s).is_err());
    }
}
