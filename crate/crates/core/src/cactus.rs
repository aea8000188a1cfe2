//! Acyclic reorientation of request graphs and the cycle/forest partition
//! of cactus requests.

use std::collections::VecDeque;

use crate::model::Request;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CactusError {
    #[error("request `{0}` is not connected")]
    Disconnected(String),
    #[error("request `{request}` is not a cactus: {why}")]
    NotCactus { request: String, why: String },
    #[error("root #{0} is not a node of the request")]
    BadRoot(usize),
}

/// Request edges re-directed so that every node is reachable from `root`.
///
/// `oriented[k]` is the direction of request edge `k`; `reversed[k]` is set
/// when it differs from the original direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcyclicReorientation {
    pub root: usize,
    pub oriented: Vec<(usize, usize)>,
    pub reversed: Vec<bool>,
    /// Nodes in discovery order, starting with the root.
    pub order: Vec<usize>,
    /// Incoming oriented edges per node.
    pub in_edges: Vec<Vec<usize>>,
    /// Outgoing oriented edges per node.
    pub out_edges: Vec<Vec<usize>>,
}

impl AcyclicReorientation {
    pub fn in_degree(&self, i: usize) -> usize {
        self.in_edges[i].len()
    }

    /// Topological order check; always succeeds for outputs of [`reorient`].
    pub fn is_acyclic(&self) -> bool {
        let n = self.in_edges.len();
        let mut indeg: Vec<usize> = (0..n).map(|i| self.in_edges[i].len()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for &k in &self.out_edges[i] {
                let j = self.oriented[k].1;
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
        seen == n
    }
}

/// Breadth-first search from `root` over the undirected request graph;
/// every edge is oriented from the earlier discovered endpoint to the later.
pub fn reorient(request: &Request, root: usize) -> Result<AcyclicReorientation, CactusError> {
    let n = request.num_nodes();
    if root >= n {
        return Err(CactusError::BadRoot(root));
    }
    let adj = request.undirected_neighbors();
    let mut disc = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    disc[root] = 0;
    order.push(root);
    while let Some(i) = queue.pop_front() {
        for &(j, _) in &adj[i] {
            if disc[j] == usize::MAX {
                disc[j] = order.len();
                order.push(j);
                queue.push_back(j);
            }
        }
    }
    if order.len() != n {
        return Err(CactusError::Disconnected(request.id().to_string()));
    }
    let mut oriented = Vec::with_capacity(request.num_edges());
    let mut reversed = Vec::with_capacity(request.num_edges());
    let mut in_edges = vec![Vec::new(); n];
    let mut out_edges = vec![Vec::new(); n];
    for (k, &(i, j)) in request.edges().iter().enumerate() {
        let flip = disc[i] > disc[j];
        let (a, b) = if flip { (j, i) } else { (i, j) };
        oriented.push((a, b));
        reversed.push(flip);
        out_edges[a].push(k);
        in_edges[b].push(k);
    }
    Ok(AcyclicReorientation {
        root,
        oriented,
        reversed,
        order,
        in_edges,
        out_edges,
    })
}

/// Reorientation rooted at the lexicographically smallest node id.
pub fn reorient_default(request: &Request) -> Result<AcyclicReorientation, CactusError> {
    let root = (0..request.num_nodes())
        .min_by(|&a, &b| request.node_id(a).cmp(request.node_id(b)))
        .expect("requests have nodes");
    reorient(request, root)
}

/// `true` if no edge of the undirected request graph lies on two simple
/// cycles. Anti-parallel edge pairs count as cycles of length two.
pub fn is_cactus(request: &Request) -> bool {
    let n = request.num_nodes();
    let adj = request.undirected_neighbors();
    let mut depth = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut covered = vec![false; request.num_edges()];
    // Iterative DFS: (node, next neighbor position).
    let mut stack = vec![(0usize, 0usize)];
    depth[0] = 0;
    while let Some(top) = stack.last_mut() {
        let i = top.0;
        if top.1 == adj[i].len() {
            stack.pop();
            continue;
        }
        let (j, k) = adj[i][top.1];
        top.1 += 1;
        if k == parent_edge[i] {
            continue;
        }
        if depth[j] == usize::MAX {
            depth[j] = depth[i] + 1;
            parent[j] = i;
            parent_edge[j] = k;
            stack.push((j, 0));
        } else if depth[j] < depth[i] {
            // Back edge to an ancestor: mark the tree path.
            let mut w = i;
            while w != j {
                let e = parent_edge[w];
                if covered[e] {
                    return false;
                }
                covered[e] = true;
                w = parent[w];
            }
        }
    }
    depth.iter().all(|&d| d != usize::MAX)
}

/// One cycle of the reoriented request: two branches from a common source
/// to a common target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleSubgraph {
    pub source: usize,
    pub target: usize,
    /// Request edge indices in source-to-target order.
    pub branch1: Vec<usize>,
    pub branch2: Vec<usize>,
    /// Allowed substrate nodes of the target.
    pub target_candidates: Vec<usize>,
}

impl CycleSubgraph {
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.branch1.iter().chain(&self.branch2).copied()
    }

    pub fn contains_edge(&self, k: usize) -> bool {
        self.branch1.contains(&k) || self.branch2.contains(&k)
    }

    /// Nodes of the cycle, source first.
    pub fn nodes(&self, ro: &AcyclicReorientation) -> Vec<usize> {
        let mut out = vec![self.source];
        for k in self.edges() {
            let b = ro.oriented[k].1;
            if !out.contains(&b) {
                out.push(b);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CactusPartition {
    pub cycles: Vec<CycleSubgraph>,
    /// Request edges outside every cycle.
    pub forest: Vec<usize>,
    /// Cycle index per request edge, `None` for forest edges.
    pub edge_cycle: Vec<Option<usize>>,
}

fn not_cactus(request: &Request, why: impl Into<String>) -> CactusError {
    CactusError::NotCactus {
        request: request.id().to_string(),
        why: why.into(),
    }
}

/// Splits the reoriented edges into cycles, one per node of in-degree two,
/// and the remaining forest.
pub fn partition(request: &Request, ro: &AcyclicReorientation) -> Result<CactusPartition, CactusError> {
    if !is_cactus(request) {
        return Err(not_cactus(request, "an edge lies on more than one cycle"));
    }
    let mut edge_cycle: Vec<Option<usize>> = vec![None; request.num_edges()];
    let mut cycles = Vec::new();
    for &t in &ro.order {
        match ro.in_degree(t) {
            0 | 1 => continue,
            2 => {}
            d => {
                return Err(not_cactus(
                    request,
                    format!("node `{}` has {d} incoming edges", request.node_id(t)),
                ))
            }
        }
        let mut ins = ro.in_edges[t].clone();
        ins.sort_unstable();
        // Ancestor chains through unique incoming edges, as (node, edge into it).
        let chain = |start_edge: usize| -> Vec<(usize, usize)> {
            let mut out = Vec::new();
            let mut edge = start_edge;
            loop {
                let tail = ro.oriented[edge].0;
                out.push((tail, edge));
                if ro.in_degree(tail) != 1 {
                    break;
                }
                edge = ro.in_edges[tail][0];
            }
            out
        };
        let c1 = chain(ins[0]);
        let c2 = chain(ins[1]);
        let meet = c1
            .iter()
            .position(|(n, _)| c2.iter().any(|(m, _)| m == n))
            .ok_or_else(|| not_cactus(request, format!("branches into `{}` never meet", request.node_id(t))))?;
        let source = c1[meet].0;
        let meet2 = c2.iter().position(|(m, _)| *m == source).expect("common node");
        let mut branch1: Vec<usize> = c1[..=meet].iter().map(|&(_, e)| e).collect();
        let mut branch2: Vec<usize> = c2[..=meet2].iter().map(|&(_, e)| e).collect();
        branch1.reverse();
        branch2.reverse();
        let idx = cycles.len();
        for &k in branch1.iter().chain(&branch2) {
            if edge_cycle[k].is_some() {
                return Err(not_cactus(request, format!("edge {} shared by two cycles", request.edge_label(k))));
            }
            edge_cycle[k] = Some(idx);
        }
        cycles.push(CycleSubgraph {
            source,
            target: t,
            branch1,
            branch2,
            target_candidates: request.allowed_nodes(t).to_vec(),
        });
    }
    let forest = (0..request.num_edges()).filter(|&k| edge_cycle[k].is_none()).collect();
    Ok(CactusPartition {
        cycles,
        forest,
        edge_cycle,
    })
}

/// Reorientation and partition of one request, shared by the LP builder and
/// the decomposer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CactusStructure {
    pub reorientation: AcyclicReorientation,
    pub partition: CactusPartition,
}

impl CactusStructure {
    pub fn new(request: &Request) -> Result<Self, CactusError> {
        let reorientation = reorient_default(request)?;
        let partition = partition(request, &reorientation)?;
        Ok(Self {
            reorientation,
            partition,
        })
    }

    pub fn with_root(request: &Request, root: usize) -> Result<Self, CactusError> {
        let reorientation = reorient(request, root)?;
        let partition = partition(request, &reorientation)?;
        Ok(Self {
            reorientation,
            partition,
        })
    }
}
