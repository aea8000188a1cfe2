//! JSON instance schema and conversions.
//!
//! ```json
//! {
//!   "substrate": {
//!     "nodes": [{"id": "u1", "capacity": {"cpu": 10.0}, "cost": {"cpu": 1.0}, "coordinates": [52.5, 13.4]}],
//!     "edges": [{"from": "u1", "to": "u2", "capacity": 10.0, "cost": 1.0}]
//!   },
//!   "requests": [{
//!     "id": "r1", "profit": 5.0,
//!     "nodes": [{"id": "i", "type": "cpu", "demand": 1.0, "allowed": ["u1"]}],
//!     "edges": [{"from": "i", "to": "j", "demand": 1.0, "allowed": [["u1", "u2"]]}]
//!   }]
//! }
//! ```
//!
//! `cost`, `coordinates`, `types` and `allowed` are optional. A missing
//! `allowed` means every compatible, sufficiently capacitated element.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{ConvexDecomposition, Instance, Mapping, ModelError, Request, SubstrateNetwork};
use crate::scenarios::GenerationInfo;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("JSON error at `{path}`: {message}")]
    Json { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    File(#[from] std::io::Error),
}

/// Parses JSON, reporting the path of the offending key on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| IoError::Json {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateNodeDto {
    pub id: String,
    /// Capacity per supported type.
    pub capacity: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cost: BTreeMap<String, f64>,
    /// `[latitude, longitude]` in degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateEdgeDto {
    pub from: String,
    pub to: String,
    pub capacity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateDto {
    /// Types no node supports; types of node capacities are implied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub types: Vec<String>,
    pub nodes: Vec<SubstrateNodeDto>,
    pub edges: Vec<SubstrateEdgeDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualNodeDto {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
    pub demand: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualEdgeDto {
    pub from: String,
    pub to: String,
    pub demand: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<(String, String)>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestDto {
    pub id: String,
    pub profit: f64,
    pub nodes: Vec<VirtualNodeDto>,
    #[serde(default)]
    pub edges: Vec<VirtualEdgeDto>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDto {
    pub substrate: SubstrateDto,
    pub requests: Vec<RequestDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<GenerationInfo>,
}

impl SubstrateDto {
    pub fn from_substrate(s: &SubstrateNetwork) -> Self {
        let mut nodes: Vec<SubstrateNodeDto> = s
            .node_ids()
            .iter()
            .enumerate()
            .map(|(u, id)| SubstrateNodeDto {
                id: id.clone(),
                capacity: BTreeMap::new(),
                cost: BTreeMap::new(),
                coordinates: s.coordinates(u).map(|(a, b)| [a, b]),
            })
            .collect();
        for &(t, u) in s.node_resources() {
            let ty = s.type_id(t).to_string();
            nodes[u].capacity.insert(ty.clone(), s.node_capacity(t, u).unwrap());
            let c = s.node_cost(t, u).unwrap();
            if c != 0.0 {
                nodes[u].cost.insert(ty, c);
            }
        }
        let used: Vec<usize> = s.node_resources().iter().map(|&(t, _)| t).collect();
        let types = (0..s.num_types())
            .filter(|t| !used.contains(t))
            .map(|t| s.type_id(t).to_string())
            .collect();
        let edges = s
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| SubstrateEdgeDto {
                from: s.node_id(u).to_string(),
                to: s.node_id(v).to_string(),
                capacity: s.edge_capacity(e),
                cost: Some(s.edge_cost(e)).filter(|c| *c != 0.0),
            })
            .collect();
        Self { types, nodes, edges }
    }

    pub fn build(&self) -> Result<SubstrateNetwork, ModelError> {
        let mut b = SubstrateNetwork::builder();
        for t in &self.types {
            b.declare_type(t);
        }
        for n in &self.nodes {
            let caps: Vec<(&str, f64)> = n.capacity.iter().map(|(t, c)| (t.as_str(), *c)).collect();
            b.node(&n.id, &caps);
            for (t, c) in &n.cost {
                b.node_cost(t, &n.id, *c);
            }
            if let Some([lat, lon]) = n.coordinates {
                b.coordinates(&n.id, lat, lon);
            }
        }
        for e in &self.edges {
            b.edge(&e.from, &e.to, e.capacity);
            if let Some(c) = e.cost {
                b.edge_cost(&e.from, &e.to, c);
            }
        }
        b.build()
    }
}

impl RequestDto {
    pub fn from_request(r: &Request, s: &SubstrateNetwork) -> Self {
        let nodes = (0..r.num_nodes())
            .map(|i| VirtualNodeDto {
                id: r.node_id(i).to_string(),
                ty: s.type_id(r.node_type(i)).to_string(),
                demand: r.node_demand(i),
                allowed: Some(r.allowed_nodes(i).iter().map(|&u| s.node_id(u).to_string()).collect()),
            })
            .collect();
        let edges = (0..r.num_edges())
            .map(|k| {
                let (i, j) = r.edge(k);
                VirtualEdgeDto {
                    from: r.node_id(i).to_string(),
                    to: r.node_id(j).to_string(),
                    demand: r.edge_demand(k),
                    allowed: Some(r.allowed_edges(k).iter().map(|&e| edge_ids(s, e)).collect()),
                }
            })
            .collect();
        Self {
            id: r.id().to_string(),
            profit: r.profit(),
            nodes,
            edges,
        }
    }

    pub fn build(&self, s: &SubstrateNetwork) -> Result<Request, ModelError> {
        let mut b = Request::builder(&self.id, self.profit);
        for n in &self.nodes {
            b.node(&n.id, &n.ty, n.demand);
            if let Some(allowed) = &n.allowed {
                let ids: Vec<&str> = allowed.iter().map(String::as_str).collect();
                b.allow_nodes(&n.id, &ids);
            }
        }
        for e in &self.edges {
            b.edge(&e.from, &e.to, e.demand);
            if let Some(allowed) = &e.allowed {
                let ids: Vec<(&str, &str)> = allowed.iter().map(|(a, c)| (a.as_str(), c.as_str())).collect();
                b.allow_edges(&e.from, &e.to, &ids);
            }
        }
        b.build(s)
    }
}

fn edge_ids(s: &SubstrateNetwork, e: usize) -> (String, String) {
    let (u, v) = s.edge(e);
    (s.node_id(u).to_string(), s.node_id(v).to_string())
}

impl InstanceDto {
    pub fn from_instance(instance: &Instance, generation: Option<GenerationInfo>) -> Self {
        Self {
            substrate: SubstrateDto::from_substrate(&instance.substrate),
            requests: instance
                .requests
                .iter()
                .map(|r| RequestDto::from_request(r, &instance.substrate))
                .collect(),
            generation,
        }
    }

    pub fn build(&self) -> Result<Instance, ModelError> {
        let substrate = self.substrate.build()?;
        let requests = self
            .requests
            .iter()
            .map(|r| r.build(&substrate))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance { substrate, requests })
    }
}

pub fn read_instance(text: &str) -> Result<(Instance, Option<GenerationInfo>), IoError> {
    let dto: InstanceDto = parse_json(text)?;
    Ok((dto.build()?, dto.generation))
}

pub fn write_instance(instance: &Instance, generation: Option<GenerationInfo>) -> String {
    serde_json::to_string_pretty(&InstanceDto::from_instance(instance, generation)).expect("serializable")
}

pub fn read_substrate(text: &str) -> Result<SubstrateNetwork, IoError> {
    let dto: SubstrateDto = parse_json(text)?;
    Ok(dto.build()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgePathDto {
    pub from: String,
    pub to: String,
    /// Substrate edges in traversal order.
    pub path: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingDto {
    pub nodes: BTreeMap<String, String>,
    pub edges: Vec<EdgePathDto>,
}

impl MappingDto {
    pub fn from_mapping(r: &Request, s: &SubstrateNetwork, m: &Mapping) -> Self {
        Self {
            nodes: m
                .node_map
                .iter()
                .enumerate()
                .map(|(i, &u)| (r.node_id(i).to_string(), s.node_id(u).to_string()))
                .collect(),
            edges: m
                .edge_map
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let (i, j) = r.edge(k);
                    EdgePathDto {
                        from: r.node_id(i).to_string(),
                        to: r.node_id(j).to_string(),
                        path: p.iter().map(|&e| edge_ids(s, e)).collect(),
                    }
                })
                .collect(),
        }
    }

    pub fn build(&self, r: &Request, s: &SubstrateNetwork) -> Result<Mapping, ModelError> {
        let unknown = |kind: &'static str, id: String| ModelError::Unknown { kind, id };
        let mut node_map = vec![usize::MAX; r.num_nodes()];
        for (i, u) in &self.nodes {
            let i = r.node(i).ok_or_else(|| unknown("virtual node", i.clone()))?;
            node_map[i] = s.node(u).ok_or_else(|| unknown("substrate node", u.clone()))?;
        }
        if node_map.contains(&usize::MAX) {
            return Err(ModelError::Structural("virtual node left unmapped".into()));
        }
        let mut edge_map = vec![Vec::new(); r.num_edges()];
        for p in &self.edges {
            let i = r.node(&p.from).ok_or_else(|| unknown("virtual node", p.from.clone()))?;
            let j = r.node(&p.to).ok_or_else(|| unknown("virtual node", p.to.clone()))?;
            let k = r
                .edge_index(i, j)
                .ok_or_else(|| unknown("virtual edge", format!("({},{})", p.from, p.to)))?;
            edge_map[k] = p
                .path
                .iter()
                .map(|(a, b)| s.edge_by_ids(a, b).ok_or_else(|| unknown("substrate edge", format!("({a},{b})"))))
                .collect::<Result<_, _>>()?;
        }
        Ok(Mapping { node_map, edge_map })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionEntryDto {
    pub weight: f64,
    pub mapping: MappingDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionDto {
    pub request: String,
    pub entries: Vec<DecompositionEntryDto>,
    pub residual_mass: f64,
    pub clamped: f64,
}

impl DecompositionDto {
    pub fn from_decomposition(d: &ConvexDecomposition, requests: &[Request], s: &SubstrateNetwork) -> Self {
        let r = &requests[d.request];
        Self {
            request: r.id().to_string(),
            entries: d
                .entries
                .iter()
                .map(|e| DecompositionEntryDto {
                    weight: e.weight,
                    mapping: MappingDto::from_mapping(r, s, &e.mapping),
                })
                .collect(),
            residual_mass: d.residual_mass,
            clamped: d.clamped,
        }
    }
}
