//! The multi-commodity-flow LP and the cactus LP as [`LinearProgram`]s.
//!
//! Variable names:
//!
//! | variable | name |
//! |---|---|
//! | embedding of request `r` | `x@r` |
//! | node mapping of `i` onto `u` | `y@r/i/u` |
//! | flow of virtual edge `(i,j)` on `(u,v)` | `z@r/i,j/u,v` |
//! | allocation on node resource `(τ,u)` | `a@r/τ:u` |
//! | allocation on substrate edge `(u,v)` | `a@r/u,v` |
//!
//! Variables of the cactus LP's sub-problems carry a suffix: `[F]` for the
//! forest and `[Ck;w]` for cycle `k` with its target fixed on `w`. Forest
//! node mappings coincide with the global ones and are not duplicated.
//! Combinations the mapping restrictions forbid get no variable at all.

use std::collections::HashSet;

use crate::cactus::{CactusError, CactusStructure};
use crate::lp::{solve_ip_with, IpOptions, IpSolution, LinearProgram, LpError, Relation, Sense, VarId};
use crate::model::{Request, Resource, SubstrateNetwork};

#[derive(Debug, thiserror::Error)]
pub enum FormulationError {
    #[error("request id `{0}` used twice")]
    DuplicateRequest(String),
    #[error(transparent)]
    Cactus(#[from] CactusError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Objective {
    /// Maximize `Σ b_r x_r`.
    #[default]
    Profit,
    /// Minimize `Σ c(res) a_r(res)`.
    MinCost,
}

#[derive(Clone, Debug, Default)]
pub struct McfOptions {
    /// Mark `x`, `y` and `z` as binary.
    pub integral: bool,
    pub objective: Objective,
    /// Fix every `x_r` to one.
    pub force_embedding: bool,
}

/// Variables of one request. `y[i][u]` and `z[k][e]` are `None` where the
/// restrictions forbid the combination; `a` is indexed by resource index.
#[derive(Clone, Debug)]
pub struct RequestVars {
    pub x: VarId,
    pub y: Vec<Vec<Option<VarId>>>,
    pub z: Vec<Vec<Option<VarId>>>,
    pub a: Vec<Option<VarId>>,
}

#[derive(Clone, Debug)]
pub struct McfModel {
    pub lp: LinearProgram<f64>,
    pub requests: Vec<RequestVars>,
    /// Variables to hand to branch and bound.
    pub integer: Vec<VarId>,
    /// Branching class per entry of `integer`: embedding decisions, then
    /// node mappings, then flows.
    pub priority: Vec<u32>,
}

impl McfModel {
    /// Branch and bound with the model's branching priorities.
    pub fn solve_ip(&self, node_budget: usize) -> Result<IpSolution<f64>, LpError> {
        let opts = IpOptions {
            node_budget,
            priority: self.priority.clone(),
            ..IpOptions::default()
        };
        solve_ip_with(&self.lp, &self.integer, &opts)
    }
}

/// Variables of the sub-problem for one cycle with its target fixed on `w`.
#[derive(Clone, Debug)]
pub struct CycleCopyVars {
    pub target: usize,
    pub x: VarId,
    /// Rows for every request node; only cycle nodes have entries.
    pub y: Vec<Vec<Option<VarId>>>,
    /// Rows for every request edge; only cycle edges have entries.
    pub z: Vec<Vec<Option<VarId>>>,
}

#[derive(Clone, Debug)]
pub struct NovelRequestVars {
    /// Global `x`, `y`, `a`; `z` holds the forest flows.
    pub global: RequestVars,
    /// Copies per cycle, in target-candidate order.
    pub cycles: Vec<Vec<CycleCopyVars>>,
}

#[derive(Clone, Debug)]
pub struct NovelModel {
    pub lp: LinearProgram<f64>,
    pub requests: Vec<NovelRequestVars>,
    pub structures: Vec<CactusStructure>,
}

fn res_name(s: &SubstrateNetwork, r: Resource) -> String {
    match r {
        Resource::Node { ty, node } => format!("{}:{}", s.type_id(ty), s.node_id(node)),
        Resource::Edge(e) => {
            let (u, v) = s.edge(e);
            format!("{},{}", s.node_id(u), s.node_id(v))
        }
    }
}

fn check_unique(requests: &[Request]) -> Result<(), FormulationError> {
    let mut seen = HashSet::new();
    for r in requests {
        if !seen.insert(r.id()) {
            return Err(FormulationError::DuplicateRequest(r.id().to_string()));
        }
    }
    Ok(())
}

/// Adds node-mapping and flow-conservation variables and rows for the
/// given virtual nodes and edges, with mapping sums equal to `x`.
///
/// `y_pre` supplies already existing node variables (shared with another
/// sub-problem); otherwise new ones are created with `suffix`.
struct SubProblem<'a> {
    request: &'a Request,
    substrate: &'a SubstrateNetwork,
    suffix: &'a str,
    integral: bool,
}

impl SubProblem<'_> {
    fn node_vars(
        &self,
        lp: &mut LinearProgram<f64>,
        x: VarId,
        nodes: &[usize],
        fixed: Option<(usize, usize)>,
    ) -> Result<Vec<Vec<Option<VarId>>>, LpError> {
        let (r, s) = (self.request, self.substrate);
        let mut y = vec![vec![None; s.num_nodes()]; r.num_nodes()];
        for &i in nodes {
            let mut row = vec![(x, -1.0)];
            for &u in r.allowed_nodes(i) {
                if let Some((fi, fu)) = fixed {
                    if fi == i && fu != u {
                        continue;
                    }
                }
                let name = format!("y@{}/{}/{}{}", r.id(), r.node_id(i), s.node_id(u), self.suffix);
                let v = lp.add_unit(name, self.integral)?;
                y[i][u] = Some(v);
                row.push((v, 1.0));
            }
            lp.add_constraint(format!("emb@{}/{}{}", r.id(), r.node_id(i), self.suffix), row, Relation::Eq, 0.0)?;
        }
        Ok(y)
    }

    fn flow_vars(
        &self,
        lp: &mut LinearProgram<f64>,
        y: &[Vec<Option<VarId>>],
        edges: &[usize],
    ) -> Result<Vec<Vec<Option<VarId>>>, LpError> {
        let (r, s) = (self.request, self.substrate);
        let mut z = vec![vec![None; s.num_edges()]; r.num_edges()];
        for &k in edges {
            let (i, j) = r.edge(k);
            for &e in r.allowed_edges(k) {
                let (u, v) = s.edge(e);
                let name = format!(
                    "z@{}/{},{}/{},{}{}",
                    r.id(),
                    r.node_id(i),
                    r.node_id(j),
                    s.node_id(u),
                    s.node_id(v),
                    self.suffix
                );
                z[k][e] = Some(lp.add_unit(name, self.integral)?);
            }
            for u in 0..s.num_nodes() {
                let mut row = Vec::new();
                for &e in s.out_edges(u) {
                    if let Some(v) = z[k][e] {
                        row.push((v, 1.0));
                    }
                }
                for &e in s.in_edges(u) {
                    if let Some(v) = z[k][e] {
                        row.push((v, -1.0));
                    }
                }
                if let Some(v) = y[i][u] {
                    row.push((v, -1.0));
                }
                if let Some(v) = y[j][u] {
                    row.push((v, 1.0));
                }
                if row.is_empty() {
                    continue;
                }
                let name = format!(
                    "flow@{}/{},{}/{}{}",
                    r.id(),
                    r.node_id(i),
                    r.node_id(j),
                    s.node_id(u),
                    self.suffix
                );
                lp.add_constraint(name, row, Relation::Eq, 0.0)?;
            }
        }
        Ok(z)
    }
}

/// Allocation variables with their defining rows. `edge_terms` lists, per
/// edge resource, the flow variables and demands that load it.
fn allocation_vars(
    lp: &mut LinearProgram<f64>,
    request: &Request,
    substrate: &SubstrateNetwork,
    y: &[Vec<Option<VarId>>],
    edge_terms: Vec<Vec<(VarId, f64)>>,
) -> Result<Vec<Option<VarId>>, LpError> {
    let mut a = vec![None; substrate.num_resources()];
    let nr = substrate.node_resources().len();
    for (idx, &(ty, u)) in substrate.node_resources().iter().enumerate() {
        let mut row = Vec::new();
        for i in 0..request.num_nodes() {
            if request.node_type(i) == ty {
                if let Some(v) = y[i][u] {
                    row.push((v, -request.node_demand(i)));
                }
            }
        }
        if row.is_empty() {
            continue;
        }
        let res = res_name(substrate, Resource::Node { ty, node: u });
        let av = lp.add_nonneg(format!("a@{}/{}", request.id(), res))?;
        row.push((av, 1.0));
        lp.add_constraint(format!("nload@{}/{}", request.id(), res), row, Relation::Eq, 0.0)?;
        a[idx] = Some(av);
    }
    for (e, terms) in edge_terms.into_iter().enumerate() {
        if terms.is_empty() {
            continue;
        }
        let res = res_name(substrate, Resource::Edge(e));
        let av = lp.add_nonneg(format!("a@{}/{}", request.id(), res))?;
        let mut row: Vec<(VarId, f64)> = terms.into_iter().map(|(v, d)| (v, -d)).collect();
        row.push((av, 1.0));
        lp.add_constraint(format!("eload@{}/{}", request.id(), res), row, Relation::Eq, 0.0)?;
        a[nr + e] = Some(av);
    }
    Ok(a)
}

fn edge_terms_of(
    request: &Request,
    substrate: &SubstrateNetwork,
    z: &[Vec<Option<VarId>>],
    into: &mut [Vec<(VarId, f64)>],
) {
    for k in 0..request.num_edges() {
        for e in 0..substrate.num_edges() {
            if let Some(v) = z[k][e] {
                into[e].push((v, request.edge_demand(k)));
            }
        }
    }
}

fn add_x(lp: &mut LinearProgram<f64>, request: &Request, opts: &McfOptions) -> Result<VarId, LpError> {
    let x = lp.add_unit(format!("x@{}", request.id()), opts.integral)?;
    if opts.force_embedding {
        lp.set_bounds(x, Some(1.0), Some(1.0));
    }
    Ok(x)
}

fn finish(
    lp: &mut LinearProgram<f64>,
    requests: &[Request],
    substrate: &SubstrateNetwork,
    vars: &[&RequestVars],
    opts: &McfOptions,
) -> Result<(), LpError> {
    for idx in 0..substrate.num_resources() {
        let row: Vec<(VarId, f64)> = vars.iter().filter_map(|v| v.a[idx]).map(|a| (a, 1.0)).collect();
        if row.is_empty() {
            continue;
        }
        let r = substrate.resource(idx);
        lp.add_constraint(
            format!("cap/{}", res_name(substrate, r)),
            row,
            Relation::Le,
            substrate.capacity(r),
        )?;
    }
    match opts.objective {
        Objective::Profit => {
            let terms = vars.iter().zip(requests).map(|(v, r)| (v.x, r.profit())).collect();
            lp.set_objective(Sense::Maximize, terms)?;
        }
        Objective::MinCost => {
            let mut terms = Vec::new();
            for v in vars {
                for (idx, a) in v.a.iter().enumerate() {
                    if let Some(a) = a {
                        let c = substrate.cost(substrate.resource(idx));
                        if c != 0.0 {
                            terms.push((*a, c));
                        }
                    }
                }
            }
            lp.set_objective(Sense::Minimize, terms)?;
        }
    }
    Ok(())
}

/// Builds the multi-commodity-flow formulation.
pub fn build_mcf(requests: &[Request], substrate: &SubstrateNetwork, opts: &McfOptions) -> Result<McfModel, FormulationError> {
    check_unique(requests)?;
    let mut lp = LinearProgram::new("mcf");
    let mut all = Vec::with_capacity(requests.len());
    let mut integer = Vec::new();
    let mut priority = Vec::new();
    for r in requests {
        let sub = SubProblem {
            request: r,
            substrate,
            suffix: "",
            integral: opts.integral,
        };
        let x = add_x(&mut lp, r, opts)?;
        let nodes: Vec<usize> = (0..r.num_nodes()).collect();
        let edges: Vec<usize> = (0..r.num_edges()).collect();
        let y = sub.node_vars(&mut lp, x, &nodes, None)?;
        let z = sub.flow_vars(&mut lp, &y, &edges)?;
        let mut terms = vec![Vec::new(); substrate.num_edges()];
        edge_terms_of(r, substrate, &z, &mut terms);
        let a = allocation_vars(&mut lp, r, substrate, &y, terms)?;
        if opts.integral {
            integer.push(x);
            priority.push(0);
            integer.extend(y.iter().flatten().flatten());
            priority.resize(integer.len(), 1);
            integer.extend(z.iter().flatten().flatten());
            priority.resize(integer.len(), 2);
        }
        all.push(RequestVars { x, y, z, a });
    }
    let refs: Vec<&RequestVars> = all.iter().collect();
    finish(&mut lp, requests, substrate, &refs, opts)?;
    Ok(McfModel {
        lp,
        requests: all,
        integer,
        priority,
    })
}

/// Builds the cactus formulation, computing default structures.
pub fn build_novel(requests: &[Request], substrate: &SubstrateNetwork) -> Result<NovelModel, FormulationError> {
    let structures = requests
        .iter()
        .map(CactusStructure::new)
        .collect::<Result<Vec<_>, _>>()?;
    build_novel_with(requests, substrate, structures, &McfOptions::default())
}

/// Builds the cactus formulation on the given reorientations and partitions.
/// Only the objective and `force_embedding` options apply; the model is
/// always continuous.
pub fn build_novel_with(
    requests: &[Request],
    substrate: &SubstrateNetwork,
    structures: Vec<CactusStructure>,
    opts: &McfOptions,
) -> Result<NovelModel, FormulationError> {
    check_unique(requests)?;
    assert_eq!(structures.len(), requests.len(), "one structure per request");
    let mut lp = LinearProgram::new("cactus");
    let mut all = Vec::with_capacity(requests.len());
    let continuous = McfOptions {
        integral: false,
        ..opts.clone()
    };
    for (r, st) in requests.iter().zip(&structures) {
        let part = &st.partition;
        let x = add_x(&mut lp, r, &continuous)?;
        // Global node mappings; forest flows use them directly.
        let global = SubProblem {
            request: r,
            substrate,
            suffix: "",
            integral: false,
        };
        let nodes: Vec<usize> = (0..r.num_nodes()).collect();
        let y = global.node_vars(&mut lp, x, &nodes, None)?;
        let forest = SubProblem {
            suffix: "[F]",
            ..global
        };
        let z = forest.flow_vars(&mut lp, &y, &part.forest)?;
        let mut terms = vec![Vec::new(); substrate.num_edges()];
        edge_terms_of(r, substrate, &z, &mut terms);

        let mut cycles = Vec::with_capacity(part.cycles.len());
        for (ci, cycle) in part.cycles.iter().enumerate() {
            let cnodes = cycle.nodes(&st.reorientation);
            let cedges: Vec<usize> = cycle.edges().collect();
            let mut copies = Vec::with_capacity(cycle.target_candidates.len());
            for &w in &cycle.target_candidates {
                let suffix = format!("[C{ci};{}]", substrate.node_id(w));
                let sub = SubProblem {
                    request: r,
                    substrate,
                    suffix: &suffix,
                    integral: false,
                };
                let cx = lp.add_unit(format!("x@{}{}", r.id(), suffix), false)?;
                let cy = sub.node_vars(&mut lp, cx, &cnodes, Some((cycle.target, w)))?;
                let cz = sub.flow_vars(&mut lp, &cy, &cedges)?;
                edge_terms_of(r, substrate, &cz, &mut terms);
                copies.push(CycleCopyVars {
                    target: w,
                    x: cx,
                    y: cy,
                    z: cz,
                });
            }
            // Global mapping of every cycle node is split over the copies.
            for &i in &cnodes {
                for &u in r.allowed_nodes(i) {
                    let mut row = vec![(y[i][u].expect("global node variable"), 1.0)];
                    for c in &copies {
                        if let Some(v) = c.y[i][u] {
                            row.push((v, -1.0));
                        }
                    }
                    lp.add_constraint(
                        format!("link@{}/{}/{}[C{ci}]", r.id(), r.node_id(i), substrate.node_id(u)),
                        row,
                        Relation::Eq,
                        0.0,
                    )?;
                }
            }
            cycles.push(copies);
        }
        let a = allocation_vars(&mut lp, r, substrate, &y, terms)?;
        all.push(NovelRequestVars {
            global: RequestVars { x, y, z, a },
            cycles,
        });
    }
    let refs: Vec<&RequestVars> = all.iter().map(|v| &v.global).collect();
    finish(&mut lp, requests, substrate, &refs, &continuous)?;
    Ok(NovelModel {
        lp,
        requests: all,
        structures,
    })
}

impl NovelModel {
    /// Maps a solution of this model onto the variables of `mcf` (built on
    /// the same requests): global `x`, `y`, `a` carry over, flows are summed
    /// over all sub-problems.
    pub fn project_onto(&self, values: &[f64], mcf: &McfModel) -> Vec<f64> {
        let mut out = vec![0.0; mcf.lp.num_variables()];
        for (nv, mv) in self.requests.iter().zip(&mcf.requests) {
            let g = &nv.global;
            out[mv.x.index()] = values[g.x.index()];
            copy_grid(&g.y, &mv.y, values, &mut out);
            add_grid(&g.z, &mv.z, values, &mut out);
            for copies in &nv.cycles {
                for c in copies {
                    add_grid(&c.z, &mv.z, values, &mut out);
                }
            }
            for (src, dst) in g.a.iter().zip(&mv.a) {
                if let (Some(s), Some(d)) = (src, dst) {
                    out[d.index()] = values[s.index()];
                }
            }
        }
        out
    }
}

fn copy_grid(src: &[Vec<Option<VarId>>], dst: &[Vec<Option<VarId>>], values: &[f64], out: &mut [f64]) {
    for (a, b) in src.iter().zip(dst) {
        for (s, d) in a.iter().zip(b) {
            if let (Some(s), Some(d)) = (s, d) {
                out[d.index()] = values[s.index()];
            }
        }
    }
}

fn add_grid(src: &[Vec<Option<VarId>>], dst: &[Vec<Option<VarId>>], values: &[f64], out: &mut [f64]) {
    for (a, b) in src.iter().zip(dst) {
        for (s, d) in a.iter().zip(b) {
            if let (Some(s), Some(d)) = (s, d) {
                out[d.index()] += values[s.index()];
            }
        }
    }
}

/// Number of LP variables that belong to one request.
pub fn variable_count(lp: &LinearProgram<f64>, request: &Request) -> usize {
    let prefixes = ["x@", "y@", "z@", "a@"].map(|p| format!("{p}{}", request.id()));
    lp.variables()
        .filter(|(_, n, _)| {
            prefixes.iter().any(|p| {
                n.strip_prefix(p.as_str())
                    .is_some_and(|rest| rest.is_empty() || rest.starts_with('/') || rest.starts_with('['))
            })
        })
        .count()
}
