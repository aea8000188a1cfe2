//! Exhaustive ground truth for tiny instances.

use std::collections::{HashMap, HashSet};

use crate::model::{allocations_unchecked, AllocationVector, Mapping, Request, SubstrateNetwork, TOLERANCE};

/// Default cap on the number of enumerated mappings or search nodes.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("unknown resource {0}")]
    UnknownResource(String),
}

/// All simple paths from `from` to `to` over `allowed` edges with at most
/// `cap` edges. The empty path is the only path when `from == to`.
pub fn simple_paths(
    substrate: &SubstrateNetwork,
    allowed: &[usize],
    from: usize,
    to: usize,
    cap: usize,
    budget: usize,
) -> Result<Vec<Vec<usize>>, OracleError> {
    if from == to {
        return Ok(vec![Vec::new()]);
    }
    let allowed: HashSet<usize> = allowed.iter().copied().collect();
    let mut out = Vec::new();
    let mut on_path = vec![false; substrate.num_nodes()];
    let mut path = Vec::new();
    on_path[from] = true;
    fn walk(
        s: &SubstrateNetwork,
        allowed: &HashSet<usize>,
        u: usize,
        to: usize,
        cap: usize,
        budget: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<(), OracleError> {
        if path.len() == cap {
            return Ok(());
        }
        for &e in s.out_edges(u) {
            if !allowed.contains(&e) {
                continue;
            }
            let v = s.edge(e).1;
            if on_path[v] {
                continue;
            }
            path.push(e);
            if v == to {
                if out.len() >= budget {
                    return Err(OracleError::BudgetExceeded(budget));
                }
                out.push(path.clone());
            } else {
                on_path[v] = true;
                walk(s, allowed, v, to, cap, budget, on_path, path, out)?;
                on_path[v] = false;
            }
            path.pop();
        }
        Ok(())
    }
    walk(substrate, &allowed, from, to, cap, budget, &mut on_path, &mut path, &mut out)?;
    Ok(out)
}

/// Every valid mapping of `request` whose edge paths are simple with at most
/// `path_cap` edges.
pub fn enumerate_valid_mappings(
    request: &Request,
    substrate: &SubstrateNetwork,
    path_cap: usize,
) -> Result<Vec<Mapping>, OracleError> {
    enumerate_valid_mappings_with(request, substrate, path_cap, DEFAULT_BUDGET)
}

pub fn enumerate_valid_mappings_with(
    request: &Request,
    substrate: &SubstrateNetwork,
    path_cap: usize,
    budget: usize,
) -> Result<Vec<Mapping>, OracleError> {
    let mut cache: HashMap<(usize, usize, usize), Vec<Vec<usize>>> = HashMap::new();
    let mut out = Vec::new();
    let n = request.num_nodes();
    let mut node_map = vec![0usize; n];

    fn place(
        i: usize,
        request: &Request,
        substrate: &SubstrateNetwork,
        path_cap: usize,
        budget: usize,
        node_map: &mut Vec<usize>,
        cache: &mut HashMap<(usize, usize, usize), Vec<Vec<usize>>>,
        out: &mut Vec<Mapping>,
    ) -> Result<(), OracleError> {
        if i == request.num_nodes() {
            let mut options = Vec::with_capacity(request.num_edges());
            for k in 0..request.num_edges() {
                let (a, b) = request.edge(k);
                let key = (k, node_map[a], node_map[b]);
                if !cache.contains_key(&key) {
                    let paths =
                        simple_paths(substrate, request.allowed_edges(k), key.1, key.2, path_cap, budget)?;
                    cache.insert(key, paths);
                }
                let paths = &cache[&key];
                if paths.is_empty() {
                    return Ok(());
                }
                options.push(key);
            }
            // Cartesian product over per-edge path choices.
            let mut choice = vec![0usize; options.len()];
            loop {
                if out.len() >= budget {
                    return Err(OracleError::BudgetExceeded(budget));
                }
                out.push(Mapping {
                    node_map: node_map.clone(),
                    edge_map: options
                        .iter()
                        .zip(&choice)
                        .map(|(key, &c)| cache[key][c].clone())
                        .collect(),
                });
                let mut pos = 0;
                loop {
                    if pos == options.len() {
                        return Ok(());
                    }
                    choice[pos] += 1;
                    if choice[pos] < cache[&options[pos]].len() {
                        break;
                    }
                    choice[pos] = 0;
                    pos += 1;
                }
            }
        }
        for &u in request.allowed_nodes(i) {
            node_map[i] = u;
            place(i + 1, request, substrate, path_cap, budget, node_map, cache, out)?;
        }
        Ok(())
    }

    place(0, request, substrate, path_cap, budget, &mut node_map, &mut cache, &mut out)?;
    Ok(out)
}

/// Optimal feasible embedding found by exhaustive search.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub profit: f64,
    /// Chosen mapping per request, `None` for rejected requests.
    pub mappings: Vec<Option<Mapping>>,
}

struct Candidate {
    alloc: AllocationVector,
    mapping: Mapping,
}

/// Allocation-distinct, non-dominated mappings of one request.
fn candidates(request: &Request, substrate: &SubstrateNetwork, mappings: Vec<Mapping>) -> Vec<Candidate> {
    let mut list: Vec<Candidate> = Vec::new();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for m in mappings {
        let alloc = allocations_unchecked(request, substrate, &m);
        let key: Vec<u64> = alloc.0.iter().map(|v| v.to_bits()).collect();
        if seen.insert(key) {
            list.push(Candidate { alloc, mapping: m });
        }
    }
    let dominated = |a: &AllocationVector, b: &AllocationVector| a.0.iter().zip(&b.0).all(|(x, y)| x <= y);
    let mut keep = vec![true; list.len()];
    for i in 0..list.len() {
        for j in 0..list.len() {
            if i != j && keep[j] && dominated(&list[j].alloc, &list[i].alloc) {
                keep[i] = false;
                break;
            }
        }
    }
    list.into_iter().zip(keep).filter(|(_, k)| *k).map(|(c, _)| c).collect()
}

/// Maximum-profit feasible embedding by exhaustive search over all valid
/// mappings of all requests.
pub fn exact_vnep(requests: &[Request], substrate: &SubstrateNetwork, path_cap: usize) -> Result<ExactSolution, OracleError> {
    exact_vnep_with(requests, substrate, path_cap, DEFAULT_BUDGET)
}

pub fn exact_vnep_with(
    requests: &[Request],
    substrate: &SubstrateNetwork,
    path_cap: usize,
    budget: usize,
) -> Result<ExactSolution, OracleError> {
    let mut cands = Vec::with_capacity(requests.len());
    for r in requests {
        let maps = enumerate_valid_mappings_with(r, substrate, path_cap, budget)?;
        let maps = candidates(r, substrate, maps);
        // Drop mappings that do not fit even on an empty substrate.
        let maps: Vec<Candidate> = maps.into_iter().filter(|c| c.alloc.within_capacity(substrate)).collect();
        cands.push(maps);
    }
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by(|&a, &b| requests[b].profit().total_cmp(&requests[a].profit()).then(a.cmp(&b)));
    // suffix[p]: total profit of requests order[p..] that have a candidate.
    let mut suffix = vec![0.0; order.len() + 1];
    for p in (0..order.len()).rev() {
        let r = order[p];
        suffix[p] = suffix[p + 1] + if cands[r].is_empty() { 0.0 } else { requests[r].profit() };
    }

    struct Search<'a> {
        requests: &'a [Request],
        substrate: &'a SubstrateNetwork,
        cands: &'a [Vec<Candidate>],
        order: &'a [usize],
        suffix: &'a [f64],
        budget: usize,
        nodes: usize,
        best: f64,
        best_choice: Vec<Option<usize>>,
        choice: Vec<Option<usize>>,
        load: Vec<f64>,
    }

    impl Search<'_> {
        fn fits(&self, alloc: &AllocationVector) -> bool {
            alloc.0.iter().enumerate().all(|(idx, a)| {
                *a == 0.0 || self.load[idx] + a <= self.substrate.capacity(self.substrate.resource(idx)) + TOLERANCE
            })
        }

        fn go(&mut self, pos: usize, profit: f64) -> Result<(), OracleError> {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(OracleError::BudgetExceeded(self.budget));
            }
            if profit > self.best {
                self.best = profit;
                self.best_choice = self.choice.clone();
            }
            if pos == self.order.len() || profit + self.suffix[pos] <= self.best {
                return Ok(());
            }
            let r = self.order[pos];
            for c in 0..self.cands[r].len() {
                if !self.fits(&self.cands[r][c].alloc) {
                    continue;
                }
                for (l, a) in self.load.iter_mut().zip(&self.cands[r][c].alloc.0) {
                    *l += a;
                }
                self.choice[r] = Some(c);
                self.go(pos + 1, profit + self.requests[r].profit())?;
                self.choice[r] = None;
                for (l, a) in self.load.iter_mut().zip(&self.cands[r][c].alloc.0) {
                    *l -= a;
                }
            }
            self.go(pos + 1, profit)
        }
    }

    let mut search = Search {
        requests,
        substrate,
        cands: &cands,
        order: &order,
        suffix: &suffix,
        budget,
        nodes: 0,
        best: 0.0,
        best_choice: vec![None; requests.len()],
        choice: vec![None; requests.len()],
        load: vec![0.0; substrate.num_resources()],
    };
    search.go(0, 0.0)?;
    let mappings = search
        .best_choice
        .iter()
        .enumerate()
        .map(|(r, c)| c.map(|c| cands[r][c].mapping.clone()))
        .collect();
    Ok(ExactSolution {
        profit: search.best,
        mappings,
    })
}
