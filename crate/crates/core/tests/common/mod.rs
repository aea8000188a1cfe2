#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use vnep::model::{Instance, Request, SubstrateNetwork};
use vnep::scenarios::{generate_request_topology, GenerationConfig, RequestDraft};

pub struct Shape {
    pub nodes: (usize, usize),
    pub requests: (usize, usize),
    pub max_depth: usize,
    /// Chance of each extra substrate edge beyond the bidirected ring.
    pub chord: f64,
}

pub const SMALL: Shape = Shape {
    nodes: (4, 8),
    requests: (1, 3),
    max_depth: 2,
    chord: 0.15,
};

/// Small enough for the branch and bound to prove optimality quickly.
pub const IP: Shape = Shape {
    nodes: (4, 6),
    requests: (1, 2),
    max_depth: 2,
    chord: 0.15,
};

pub const TINY: Shape = Shape {
    nodes: (3, 4),
    requests: (1, 2),
    max_depth: 1,
    chord: 0.2,
};

pub fn random_substrate(n: usize, chord: f64, rng: &mut impl Rng) -> SubstrateNetwork {
    let mut b = SubstrateNetwork::builder();
    let id = |u: usize| format!("u{u}");
    for u in 0..n {
        b.node(&id(u), &[("cpu", rng.gen_range(1.0..3.0))]);
    }
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let ring = v == (u + 1) % n || u == (v + 1) % n;
            if ring || rng.gen_bool(chord) {
                b.edge(&id(u), &id(v), rng.gen_range(1.0..3.0));
            }
        }
    }
    b.build().unwrap()
}

pub fn random_request(id: &str, substrate: &SubstrateNetwork, max_depth: usize, rng: &mut impl Rng) -> Request {
    let config = GenerationConfig {
        max_depth,
        min_nodes: 2,
        ..GenerationConfig::default()
    };
    let topo = generate_request_topology(&config, rng);
    loop {
        let mut b = Request::builder(id, rng.gen_range(1.0..10.0));
        for i in 0..topo.nodes {
            b.node(&RequestDraft::node_id(i), "cpu", rng.gen_range(0.1..1.5));
        }
        for &(x, y) in &topo.edges {
            b.edge(&RequestDraft::node_id(x), &RequestDraft::node_id(y), rng.gen_range(0.1..1.5));
        }
        let n = substrate.num_nodes();
        for i in 0..topo.nodes {
            let k = rng.gen_range(1..=n.div_ceil(2));
            let pick: Vec<&str> = rand::seq::index::sample(rng, n, k)
                .into_iter()
                .map(|u| substrate.node_id(u))
                .collect();
            b.allow_nodes(&RequestDraft::node_id(i), &pick);
        }
        if let Ok(r) = b.build(substrate) {
            return r;
        }
    }
}

pub fn random_instance(seed: u64, shape: &Shape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(shape.nodes.0..=shape.nodes.1);
    let substrate = random_substrate(n, shape.chord, &mut rng);
    let k = rng.gen_range(shape.requests.0..=shape.requests.1);
    let requests = (0..k)
        .map(|r| random_request(&format!("r{r}"), &substrate, shape.max_depth, &mut rng))
        .collect();
    Instance { substrate, requests }
}

/// Solves the cactus LP of `inst`, decomposes it and returns every broken
/// decomposition property. With `oracle`, each mapping must also appear in
/// the exhaustive enumeration.
pub fn decomposition_problems(inst: &Instance, oracle: bool) -> Vec<String> {
    use vnep::decompose::{decompose_novel_solution, DecomposeOptions};
    use vnep::formulations::build_novel;
    use vnep::lp::solve_lp;
    use vnep::model::validate_mapping;
    use vnep::oracle::enumerate_valid_mappings;

    let (s, reqs) = (&inst.substrate, &inst.requests);
    let model = build_novel(reqs, s).unwrap();
    let sol = solve_lp(&model.lp);
    let mut problems = Vec::new();
    if !sol.is_optimal() {
        return vec![format!("LP status {:?}", sol.status)];
    }
    let decs = match decompose_novel_solution(&model, reqs, s, &sol, &DecomposeOptions::default()) {
        Ok(d) => d,
        Err(e) => return vec![e.to_string()],
    };
    for d in &decs {
        let r = &reqs[d.request];
        let vars = &model.requests[d.request].global;
        let x = sol.values[vars.x.index()];
        if (d.total_weight() - x).abs() > 1e-5 {
            problems.push(format!("{}: weights {} vs x {}", r.id(), d.total_weight(), x));
        }
        let exp = d.expected_allocation(r, s);
        for (idx, a) in vars.a.iter().enumerate() {
            let lp_a = a.map_or(0.0, |a| sol.values[a.index()]);
            if exp.0[idx] > lp_a + 1e-5 {
                problems.push(format!("{}: allocation {} on {} above {}", r.id(), exp.0[idx], idx, lp_a));
            }
        }
        let all = if oracle {
            Some(enumerate_valid_mappings(r, s, s.num_edges()).unwrap())
        } else {
            None
        };
        for e in &d.entries {
            if e.weight <= 0.0 {
                problems.push(format!("{}: nonpositive weight", r.id()));
            }
            let check = validate_mapping(r, s, &e.mapping).unwrap();
            if !check.valid {
                problems.push(format!("{}: invalid mapping {:?}", r.id(), check.violation));
            }
            if let Some(all) = &all {
                if !all.contains(&e.mapping) {
                    problems.push(format!("{}: mapping missing from enumeration", r.id()));
                }
            }
        }
    }
    problems
}

/// `(ip, novel_lp, mcf_lp)` objectives; infeasible IPs count as zero.
pub fn three_bounds(inst: &Instance) -> (f64, f64, f64) {
    use vnep::formulations::{build_mcf, build_novel, McfOptions};
    use vnep::lp::{solve_lp, IpOptions, LpStatus};

    let (s, reqs) = (&inst.substrate, &inst.requests);
    let mcf = solve_lp(&build_mcf(reqs, s, &McfOptions::default()).unwrap().lp);
    let novel = solve_lp(&build_novel(reqs, s).unwrap().lp);
    let opts = McfOptions {
        integral: true,
        ..McfOptions::default()
    };
    let m = build_mcf(reqs, s, &opts).unwrap();
    let ip = m.solve_ip(IpOptions::default().node_budget).unwrap();
    assert!(ip.proven_optimal, "IP budget exhausted");
    let ip = if ip.solution.status == LpStatus::Optimal {
        ip.solution.objective
    } else {
        0.0
    };
    assert!(mcf.is_optimal() && novel.is_optimal());
    (ip, novel.objective, mcf.objective)
}
