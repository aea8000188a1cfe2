//! Small hand-built instances with known LP and IP optima.

use crate::formulations::McfModel;
use crate::model::{Instance, ModelError, Request, SubstrateNetwork};
use crate::scenarios::ring;

const HEXAGON: [&str; 6] = ["u1", "u2", "u3", "u4", "u5", "u6"];

/// Directed six-cycle `u1 -> u2 -> ... -> u6 -> u1` with uniform capacities.
pub fn hexagon(capacity: f64) -> SubstrateNetwork {
    let mut b = SubstrateNetwork::builder();
    for u in HEXAGON {
        b.node(u, &[("cpu", capacity)]);
    }
    for k in 0..6 {
        b.edge(HEXAGON[k], HEXAGON[(k + 1) % 6], capacity);
    }
    b.build().expect("static fixture")
}

/// Triangle request `i -> j -> k -> i` with `i` on `{u1,u4}`, `j` on
/// `{u2,u5}` and `k` on `{u3,u6}`. With `restrict_edges` each virtual edge may
/// only use the two substrate edges leaving its tail's placements.
pub fn triangle_request(substrate: &SubstrateNetwork, profit: f64, restrict_edges: bool) -> Result<Request, ModelError> {
    let mut rb = Request::builder("r", profit);
    rb.node("i", "cpu", 1.0)
        .node("j", "cpu", 1.0)
        .node("k", "cpu", 1.0)
        .edge("i", "j", 1.0)
        .edge("j", "k", 1.0)
        .edge("k", "i", 1.0)
        .allow_nodes("i", &["u1", "u4"])
        .allow_nodes("j", &["u2", "u5"])
        .allow_nodes("k", &["u3", "u6"]);
    if restrict_edges {
        rb.allow_edges("i", "j", &[("u1", "u2"), ("u4", "u5")])
            .allow_edges("j", "k", &[("u2", "u3"), ("u5", "u6")])
            .allow_edges("k", "i", &[("u3", "u4"), ("u6", "u1")]);
    }
    rb.build(substrate)
}

/// The triangle on the hexagon without edge restrictions.
pub fn triangle_instance() -> Instance {
    let substrate = hexagon(10.0);
    let request = triangle_request(&substrate, 10.0, false).expect("static fixture");
    Instance {
        substrate,
        requests: vec![request],
    }
}

/// The edge-restricted triangle: the flow relaxation reaches the full profit
/// while no valid mapping exists.
pub fn unbounded_gap_instance(profit: f64) -> Instance {
    let substrate = hexagon(1000.0);
    let request = triangle_request(&substrate, profit, true).expect("static fixture");
    Instance {
        substrate,
        requests: vec![request],
    }
}

/// Assignment for a flow model of the triangle instance (one request) that
/// embeds it fully with every placement and flow at one half.
pub fn triangle_half_solution(model: &McfModel, instance: &Instance) -> Vec<f64> {
    let s = &instance.substrate;
    let r = &instance.requests[0];
    let vars = &model.requests[0];
    let mut values = vec![0.0; model.lp.num_variables()];
    values[vars.x.index()] = 1.0;
    let place = [("i", ["u1", "u4"]), ("j", ["u2", "u5"]), ("k", ["u3", "u6"])];
    for (i, us) in place {
        let i = r.node(i).unwrap();
        for u in us {
            let v = vars.y[i][s.node(u).unwrap()].expect("allowed placement");
            values[v.index()] = 0.5;
        }
    }
    let flows = [
        (("i", "j"), [("u1", "u2"), ("u4", "u5")]),
        (("j", "k"), [("u2", "u3"), ("u5", "u6")]),
        (("k", "i"), [("u3", "u4"), ("u6", "u1")]),
    ];
    for ((a, b), es) in flows {
        let k = r.edge_index(r.node(a).unwrap(), r.node(b).unwrap()).unwrap();
        for (u, v) in es {
            let e = s.edge_by_ids(u, v).unwrap();
            let var = vars.z[k][e].expect("allowed edge");
            values[var.index()] = 0.5;
        }
    }
    // Allocations follow from their defining rows.
    for (idx, a) in vars.a.iter().enumerate() {
        let Some(a) = a else { continue };
        let res = s.resource(idx);
        let mut load = 0.0;
        match res {
            crate::model::Resource::Node { ty, node } => {
                for i in 0..r.num_nodes() {
                    if r.node_type(i) == ty {
                        if let Some(v) = vars.y[i][node] {
                            load += r.node_demand(i) * values[v.index()];
                        }
                    }
                }
            }
            crate::model::Resource::Edge(e) => {
                for k in 0..r.num_edges() {
                    if let Some(v) = vars.z[k][e] {
                        load += r.edge_demand(k) * values[v.index()];
                    }
                }
            }
        }
        values[a.index()] = load;
    }
    values
}

/// Two-node request `i <-> j` on a unit-capacity directed ring, `i` on odd
/// and `j` on even ring positions, edge demands one, node demands zero.
pub fn ring_request(substrate: &SubstrateNetwork, id: &str, profit: f64) -> Result<Request, ModelError> {
    let n = substrate.num_nodes();
    let odd: Vec<String> = (1..=n).step_by(2).map(|p| format!("u{p}")).collect();
    let even: Vec<String> = (2..=n).step_by(2).map(|p| format!("u{p}")).collect();
    let odd: Vec<&str> = odd.iter().map(String::as_str).collect();
    let even: Vec<&str> = even.iter().map(String::as_str).collect();
    let mut rb = Request::builder(id, profit);
    rb.node("i", "cpu", 0.0)
        .node("j", "cpu", 0.0)
        .edge("i", "j", 1.0)
        .edge("j", "i", 1.0)
        .allow_nodes("i", &odd)
        .allow_nodes("j", &even);
    rb.build(substrate)
}

/// `copies` identical ring requests on `ring(n)`. Every valid mapping uses
/// every ring edge once, so at most one copy fits.
pub fn ring_gap_instance(n: usize, copies: usize, profit: f64) -> Instance {
    let substrate = ring(n, 1.0);
    let requests = (0..copies)
        .map(|c| ring_request(&substrate, &format!("r{c}"), profit).expect("static fixture"))
        .collect();
    Instance { substrate, requests }
}
