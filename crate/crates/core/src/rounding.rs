//! Randomized rounding of decomposed LP solutions, the three rounding
//! heuristics and the resource-augmentation bounds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decompose::{decompose_novel_solution, DecomposeError, DecomposeOptions};
use crate::formulations::{build_novel, FormulationError, NovelModel};
use crate::lp::{solve_lp, LpSolution, LpStatus};
use crate::model::{
    allocations_unchecked, max_allocation_exact, max_demand, AllocationVector, ConvexDecomposition, Request, Resource,
    SubstrateNetwork, TOLERANCE,
};
use crate::oracle::OracleError;

#[derive(Debug, thiserror::Error)]
pub enum RoundingError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("LP solve ended with status {0:?}")]
    Lp(LpStatus),
}

/// Requests that can be embedded on their own: the cactus LP with only that
/// request reaches `x_r = 1`. Returns the indices of the kept requests.
pub fn preprocess(requests: &[Request], substrate: &SubstrateNetwork) -> Result<Vec<usize>, RoundingError> {
    let mut kept = Vec::new();
    for (idx, r) in requests.iter().enumerate() {
        let model = build_novel(std::slice::from_ref(r), substrate)?;
        let sol = solve_lp(&model.lp);
        match sol.status {
            LpStatus::Optimal => {}
            s => return Err(RoundingError::Lp(s)),
        }
        if sol.values[model.requests[0].global.x.index()] >= 1.0 - TOLERANCE {
            kept.push(idx);
        }
    }
    Ok(kept)
}

/// Everything the rounding loops need: decompositions with the allocation of
/// every entry precomputed.
#[derive(Clone, Debug)]
pub struct RoundingContext<'a> {
    pub substrate: &'a SubstrateNetwork,
    pub requests: &'a [Request],
    pub decompositions: Vec<ConvexDecomposition>,
    allocs: Vec<Vec<AllocationVector>>,
}

impl<'a> RoundingContext<'a> {
    pub fn new(requests: &'a [Request], substrate: &'a SubstrateNetwork, decompositions: Vec<ConvexDecomposition>) -> Self {
        let allocs = decompositions
            .iter()
            .map(|d| {
                d.entries
                    .iter()
                    .map(|e| allocations_unchecked(&requests[d.request], substrate, &e.mapping))
                    .collect()
            })
            .collect();
        Self {
            substrate,
            requests,
            decompositions,
            allocs,
        }
    }

    /// `Σ_r b_r Σ_k f_k`, the expected profit of [`round_once`].
    pub fn expected_profit(&self) -> f64 {
        self.decompositions
            .iter()
            .map(|d| self.requests[d.request].profit() * d.total_weight())
            .sum()
    }

    fn draw(&self, d: usize, rng: &mut impl Rng) -> Option<usize> {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (k, e) in self.decompositions[d].entries.iter().enumerate() {
            acc += e.weight;
            if u < acc {
                return Some(k);
            }
        }
        None
    }

    fn outcome(&self, choices: Vec<Option<usize>>) -> RoundingOutcome {
        let mut allocation = AllocationVector::zeros(self.substrate);
        let mut profit = 0.0;
        for (d, c) in choices.iter().enumerate() {
            if let Some(k) = c {
                allocation.add_scaled(&self.allocs[d][*k], 1.0);
                profit += self.requests[self.decompositions[d].request].profit();
            }
        }
        let (max_node_load, max_edge_load) = allocation.max_loads(self.substrate);
        RoundingOutcome {
            choices,
            profit,
            allocation,
            max_node_load,
            max_edge_load,
        }
    }
}

/// One rounded solution. `choices[d]` is the chosen entry of decomposition
/// `d`, `None` if its request is rejected.
#[derive(Clone, Debug, Serialize)]
pub struct RoundingOutcome {
    pub choices: Vec<Option<usize>>,
    pub profit: f64,
    pub allocation: AllocationVector,
    pub max_node_load: f64,
    pub max_edge_load: f64,
}

impl RoundingOutcome {
    pub fn max_load(&self) -> f64 {
        self.max_node_load.max(self.max_edge_load)
    }
}

/// Draws one entry per request with probability equal to its weight,
/// rejecting with the remaining mass.
pub fn round_once(ctx: &RoundingContext<'_>, rng: &mut impl Rng) -> RoundingOutcome {
    let choices = (0..ctx.decompositions.len()).map(|d| ctx.draw(d, rng)).collect();
    ctx.outcome(choices)
}

/// Generator for iteration `k` of a seeded run; independent of the order in
/// which iterations are evaluated.
pub fn iteration_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AmaxSource {
    /// `A_max / d_max` replaced by `|V_r|` for nodes and `|E_r|` for edges,
    /// giving `Δ = |R| · max |V_r|` and `Δ = |R| · max |E_r|`.
    UpperBound,
    /// Exact `A_max` by enumerating valid mappings.
    OracleExact { budget: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundParameters {
    pub epsilon: f64,
    pub delta_nodes: f64,
    pub delta_edges: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `|V_S| · |T|`
    pub lambda_nodes: f64,
    /// `|E_S|`
    pub lambda_edges: f64,
    /// Set when some demand exceeds its resource capacity share of one.
    pub epsilon_exceeds_one: bool,
}

/// `1 + ε·sqrt(2·Δ·ln λ)`
pub fn augmentation(epsilon: f64, delta: f64, lambda: f64) -> f64 {
    1.0 + epsilon * (2.0 * delta * lambda.ln().max(0.0)).sqrt()
}

pub fn compute_bounds(
    requests: &[Request],
    substrate: &SubstrateNetwork,
    source: AmaxSource,
) -> Result<BoundParameters, RoundingError> {
    let mut epsilon = 0.0f64;
    for r in requests {
        for res in substrate.resources() {
            epsilon = epsilon.max(max_demand(r, substrate, res) / substrate.capacity(res));
        }
    }
    let (delta_nodes, delta_edges) = match source {
        AmaxSource::UpperBound => {
            let n = requests.len() as f64;
            let v = requests.iter().map(Request::num_nodes).max().unwrap_or(0) as f64;
            let e = requests.iter().map(Request::num_edges).max().unwrap_or(0) as f64;
            (n * v, n * e)
        }
        AmaxSource::OracleExact { budget } => {
            let mut dn = 0.0f64;
            let mut de = 0.0f64;
            for res in substrate.resources() {
                let mut delta = 0.0;
                for r in requests {
                    let dmax = max_demand(r, substrate, res);
                    if dmax > 0.0 {
                        let amax = max_allocation_exact(r, substrate, res, budget)?;
                        delta += (amax / dmax).powi(2);
                    }
                }
                match res {
                    Resource::Node { .. } => dn = dn.max(delta),
                    Resource::Edge(_) => de = de.max(delta),
                }
            }
            (dn, de)
        }
    };
    let lambda_nodes = (substrate.num_nodes() * substrate.num_types()) as f64;
    let lambda_edges = substrate.num_edges() as f64;
    Ok(BoundParameters {
        epsilon,
        delta_nodes,
        delta_edges,
        alpha: 1.0 / 3.0,
        beta: augmentation(epsilon, delta_nodes, lambda_nodes),
        gamma: augmentation(epsilon, delta_edges, lambda_edges),
        lambda_nodes,
        lambda_edges,
        epsilon_exceeds_one: epsilon > 1.0 + TOLERANCE,
    })
}

/// Profit at least `α · lp_objective`, node loads within `β` and edge loads
/// within `γ`.
pub fn is_abc_approximate(outcome: &RoundingOutcome, bounds: &BoundParameters, lp_objective: f64) -> bool {
    outcome.profit + 1e-9 >= bounds.alpha * lp_objective
        && outcome.max_node_load <= bounds.beta + TOLERANCE
        && outcome.max_edge_load <= bounds.gamma + TOLERANCE
}

/// Failure-probability constants of the analysis. Not used at runtime.
#[derive(Clone, Debug, Serialize)]
pub struct FailureBounds {
    /// Probability that the profit falls below a third of the optimum.
    pub profit: f64,
    /// Probability that some node resource exceeds `β` times its capacity.
    pub nodes: f64,
    /// Probability that some edge exceeds `γ` times its capacity.
    pub edges: f64,
    /// Probability that a single round is not approximate.
    pub single_round: f64,
}

/// Per-resource overload probability `λ^-4`.
pub fn overload_probability(lambda: f64) -> f64 {
    lambda.powi(-4)
}

pub fn failure_bounds(substrate_nodes: usize, types: usize) -> FailureBounds {
    let nv = substrate_nodes as f64;
    let lv = nv * types as f64;
    let profit = (-2.0f64 / 9.0).exp();
    // At most |V_S|·|T| node resources and |V_S|² edges.
    let nodes = lv * overload_probability(lv);
    let edges = nv.powi(-2);
    FailureBounds {
        profit,
        nodes,
        edges,
        single_round: profit + nodes + edges,
    }
}

/// Lower bound `1 - (19/20)^N` on finding an approximate solution within
/// `rounds` rounds.
pub fn success_probability(rounds: u32) -> f64 {
    1.0 - (19.0f64 / 20.0).powi(rounds as i32)
}

/// LP solve and decomposition shared by all rounding strategies.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// Indices of requests surviving preprocessing.
    pub kept: Vec<usize>,
    pub model: NovelModel,
    pub solution: LpSolution<f64>,
    pub lp_objective: f64,
    /// One per kept request; `request` fields index the full request list.
    pub decompositions: Vec<ConvexDecomposition>,
}

/// Preprocesses, solves the cactus LP on the kept requests and decomposes
/// its solution.
pub fn prepare(requests: &[Request], substrate: &SubstrateNetwork) -> Result<Prepared, RoundingError> {
    let kept = preprocess(requests, substrate)?;
    let subset: Vec<Request> = kept.iter().map(|&i| requests[i].clone()).collect();
    let model = build_novel(&subset, substrate)?;
    let solution = solve_lp(&model.lp);
    if solution.status != LpStatus::Optimal {
        return Err(RoundingError::Lp(solution.status));
    }
    let mut decompositions =
        decompose_novel_solution(&model, &subset, substrate, &solution, &DecomposeOptions::default())?;
    for d in &mut decompositions {
        d.request = kept[d.request];
    }
    Ok(Prepared {
        kept,
        lp_objective: solution.objective,
        model,
        solution,
        decompositions,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrace {
    pub round: usize,
    pub profit: f64,
    pub max_node_load: f64,
    pub max_edge_load: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RandRoundResult {
    pub outcome: RoundingOutcome,
    pub accepted: bool,
    pub bounds: BoundParameters,
    pub lp_objective: f64,
    pub trace: Vec<RoundTrace>,
}

#[derive(Clone, Debug)]
pub struct RandRoundOptions {
    pub max_rounds: usize,
    pub seed: u64,
    pub amax: AmaxSource,
}

impl Default for RandRoundOptions {
    fn default() -> Self {
        Self {
            max_rounds: 1000,
            seed: 0,
            amax: AmaxSource::UpperBound,
        }
    }
}

/// Rounds until an outcome is `(α, β, γ)`-approximate with respect to the
/// LP objective, or `max_rounds` is reached; then the most profitable
/// outcome seen is returned.
pub fn run_randround(
    ctx: &RoundingContext<'_>,
    lp_objective: f64,
    opts: &RandRoundOptions,
) -> Result<RandRoundResult, RoundingError> {
    let kept: Vec<Request> = ctx
        .decompositions
        .iter()
        .map(|d| ctx.requests[d.request].clone())
        .collect();
    let bounds = compute_bounds(&kept, ctx.substrate, opts.amax)?;
    let mut trace = Vec::new();
    let mut best: Option<RoundingOutcome> = None;
    for round in 0..opts.max_rounds.max(1) {
        let mut rng = iteration_rng(opts.seed, round as u64);
        let out = round_once(ctx, &mut rng);
        let accepted = is_abc_approximate(&out, &bounds, lp_objective);
        trace.push(RoundTrace {
            round,
            profit: out.profit,
            max_node_load: out.max_node_load,
            max_edge_load: out.max_edge_load,
            accepted,
        });
        if accepted {
            return Ok(RandRoundResult {
                outcome: out,
                accepted: true,
                bounds,
                lp_objective,
                trace,
            });
        }
        if best.as_ref().map_or(true, |b| out.profit > b.profit) {
            best = Some(out);
        }
    }
    Ok(RandRoundResult {
        outcome: best.expect("at least one round"),
        accepted: false,
        bounds,
        lp_objective,
        trace,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// Smallest maximum load, then highest profit.
    MinLoad,
    /// Highest profit, then smallest maximum load.
    MaxProfit,
}

fn better(criterion: Criterion, a: &(usize, RoundingOutcome), b: &(usize, RoundingOutcome)) -> bool {
    let (ia, oa) = a;
    let (ib, ob) = b;
    let key = |o: &RoundingOutcome| match criterion {
        Criterion::MinLoad => (-o.max_load(), o.profit),
        Criterion::MaxProfit => (o.profit, -o.max_load()),
    };
    let (ka, kb) = (key(oa), key(ob));
    match ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => ia < ib,
    }
}

fn pick(criterion: Criterion, a: (usize, RoundingOutcome), b: (usize, RoundingOutcome)) -> (usize, RoundingOutcome) {
    if better(criterion, &a, &b) {
        a
    } else {
        b
    }
}

/// Best of `iterations` independent roundings under `criterion`.
/// Iterations are spread over the rayon pool when `parallel` is set; the
/// result does not depend on it.
pub fn run_vanilla(
    ctx: &RoundingContext<'_>,
    iterations: usize,
    criterion: Criterion,
    seed: u64,
    parallel: bool,
) -> RoundingOutcome {
    let one = |k: usize| (k, round_once(ctx, &mut iteration_rng(seed, k as u64)));
    let n = iterations.max(1);
    let best = if parallel {
        (0..n).into_par_iter().map(one).reduce_with(|a, b| pick(criterion, a, b))
    } else {
        (0..n).map(one).reduce(|a, b| pick(criterion, a, b))
    };
    best.expect("at least one iteration").1
}

/// One heuristic rounding: requests in random order, each draw kept only if
/// it fits into the remaining capacities.
pub fn heuristic_once(ctx: &RoundingContext<'_>, rng: &mut impl Rng) -> RoundingOutcome {
    let mut order: Vec<usize> = (0..ctx.decompositions.len()).collect();
    order.shuffle(rng);
    let mut load = AllocationVector::zeros(ctx.substrate);
    let mut choices = vec![None; order.len()];
    for d in order {
        let Some(k) = ctx.draw(d, rng) else { continue };
        let alloc = &ctx.allocs[d][k];
        let fits = alloc.0.iter().enumerate().all(|(idx, a)| {
            *a == 0.0 || load.0[idx] + a <= ctx.substrate.capacity(ctx.substrate.resource(idx)) + TOLERANCE
        });
        if fits {
            load.add_scaled(alloc, 1.0);
            choices[d] = Some(k);
        }
    }
    ctx.outcome(choices)
}

/// Most profitable of `iterations` heuristic roundings. Always feasible.
pub fn run_heuristic(ctx: &RoundingContext<'_>, iterations: usize, seed: u64, parallel: bool) -> RoundingOutcome {
    let one = |k: usize| (k, heuristic_once(ctx, &mut iteration_rng(seed, k as u64)));
    let n = iterations.max(1);
    let best = if parallel {
        (0..n)
            .into_par_iter()
            .map(one)
            .reduce_with(|a, b| pick(Criterion::MaxProfit, a, b))
    } else {
        (0..n).map(one).reduce(|a, b| pick(Criterion::MaxProfit, a, b))
    };
    best.expect("at least one iteration").1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_for_large_request_sets() {
        // |R| = 100, max |E_r| = 8, |E_S| = 122, ε = 0.1.
        let g = augmentation(0.1, 800.0, 122.0);
        let expect = 1.0 + 0.1 * (2.0f64 * 800.0 * 122f64.ln()).sqrt();
        assert!((g - expect).abs() < 1e-12);
        assert!((g - 9.77).abs() < 0.01);
    }

    #[test]
    fn zero_epsilon_means_no_augmentation() {
        assert_eq!(augmentation(0.0, 50.0, 40.0), 1.0);
    }

    #[test]
    fn failure_constants() {
        let f = failure_bounds(3, 1);
        assert!((f.profit - 0.8007).abs() < 1e-4);
        assert!(f.single_round <= 19.0 / 20.0);
        assert!((success_probability(1) - 0.05).abs() < 1e-12);
        assert_eq!(overload_probability(2.0), 1.0 / 16.0);
    }
}
