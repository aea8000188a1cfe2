use vnep::fixtures::{hexagon, ring_gap_instance, ring_request, triangle_request, unbounded_gap_instance};
use vnep::model::{
    is_feasible_embedding, max_allocation_exact, max_demand, validate_mapping, Mapping, Resource,
};
use vnep::oracle::{enumerate_valid_mappings, exact_vnep, DEFAULT_BUDGET};
use vnep::scenarios::ring;
use vnep::{Request, SubstrateNetwork};

fn triangle_mapping(s: &SubstrateNetwork, r: &Request) -> Mapping {
    Mapping::from_ids(
        r,
        s,
        &[("i", "u1"), ("j", "u2"), ("k", "u3")],
        &[
            (("i", "j"), &["u1", "u2"]),
            (("j", "k"), &["u2", "u3"]),
            (("k", "i"), &["u3", "u4", "u5", "u6", "u1"]),
        ],
    )
    .unwrap()
}

fn two_nodes(edge_cap: f64) -> SubstrateNetwork {
    let mut b = SubstrateNetwork::builder();
    b.node("u", &[("cpu", 10.0)]).node("v", &[("cpu", 10.0)]).edge("u", "v", edge_cap);
    b.build().unwrap()
}

fn edge_request(s: &SubstrateNetwork, id: &str, profit: f64, demand: f64) -> Request {
    let mut b = Request::builder(id, profit);
    b.node("i", "cpu", 0.0)
        .node("j", "cpu", 0.0)
        .edge("i", "j", demand)
        .allow_nodes("i", &["u"])
        .allow_nodes("j", &["v"]);
    b.build(s).unwrap()
}

#[test]
fn triangle_mapping_is_valid() {
    let s = hexagon(10.0);
    let r = triangle_request(&s, 1.0, false).unwrap();
    let m = triangle_mapping(&s, &r);
    assert!(validate_mapping(&r, &s, &m).unwrap().valid);
    let all = enumerate_valid_mappings(&r, &s, 6).unwrap();
    assert!(all.contains(&m));
    assert!(all.iter().all(|m| validate_mapping(&r, &s, m).unwrap().valid));
}

#[test]
fn restricted_triangle_has_no_mapping() {
    let inst = unbounded_gap_instance(1.0);
    let all = enumerate_valid_mappings(&inst.requests[0], &inst.substrate, 6).unwrap();
    assert!(all.is_empty());
}

#[test]
fn single_node_placements() {
    let mut b = SubstrateNetwork::builder();
    for u in ["a", "b", "c", "d"] {
        b.node(u, &[("cpu", 5.0)]);
    }
    let s = b.build().unwrap();
    let mut rb = Request::builder("r", 1.0);
    rb.node("i", "cpu", 4.0).allow_nodes("i", &["a", "b", "d"]);
    let r = rb.build(&s).unwrap();
    let all = enumerate_valid_mappings(&r, &s, 0).unwrap();
    assert_eq!(all.len(), 3);
    let m = Mapping::from_ids(&r, &s, &[("i", "a")], &[]).unwrap();
    assert!(validate_mapping(&r, &s, &m).unwrap().valid);
    let cpu = s.type_of("cpu").unwrap();
    let a = Resource::Node { ty: cpu, node: 0 };
    assert_eq!(max_allocation_exact(&r, &s, a, DEFAULT_BUDGET).unwrap(), 4.0);
    let c = Resource::Node { ty: cpu, node: 2 };
    assert_eq!(max_demand(&r, &s, c), 0.0);
    assert_eq!(max_allocation_exact(&r, &s, c, DEFAULT_BUDGET).unwrap(), 0.0);
}

#[test]
fn triangle_node_allocation_maximum() {
    let s = hexagon(10.0);
    let r = triangle_request(&s, 1.0, false).unwrap();
    let cpu = s.type_of("cpu").unwrap();
    let u1 = Resource::Node { ty: cpu, node: s.node("u1").unwrap() };
    assert_eq!(max_allocation_exact(&r, &s, u1, DEFAULT_BUDGET).unwrap(), 1.0);
    assert_eq!(max_demand(&r, &s, u1), 1.0);
}

#[test]
fn ring_request_uses_every_edge_once() {
    let s = ring(8, 1.0);
    let r = ring_request(&s, "r", 1.0).unwrap();
    let all = enumerate_valid_mappings(&r, &s, 8).unwrap();
    assert!(!all.is_empty());
    for e in 0..s.num_edges() {
        assert_eq!(max_allocation_exact(&r, &s, Resource::Edge(e), DEFAULT_BUDGET).unwrap(), 1.0);
    }
}

#[test]
fn feasibility_of_combined_embeddings() {
    let s = two_nodes(100.0);
    assert!(is_feasible_embedding(&s, &[]).unwrap());
    let a = edge_request(&s, "a", 1.0, 60.0);
    let b = edge_request(&s, "b", 1.0, 60.0);
    let ma = Mapping::from_ids(&a, &s, &[("i", "u"), ("j", "v")], &[(("i", "j"), &["u", "v"])]).unwrap();
    let mb = ma.clone();
    assert!(is_feasible_embedding(&s, &[(&a, &ma)]).unwrap());
    assert!(!is_feasible_embedding(&s, &[(&a, &ma), (&b, &mb)]).unwrap());

    let inst = ring_gap_instance(8, 2, 1.0);
    let (r0, r1) = (&inst.requests[0], &inst.requests[1]);
    let m0 = enumerate_valid_mappings(r0, &inst.substrate, 8).unwrap().remove(0);
    let m1 = enumerate_valid_mappings(r1, &inst.substrate, 8).unwrap().remove(0);
    assert!(is_feasible_embedding(&inst.substrate, &[(r0, &m0)]).unwrap());
    assert!(!is_feasible_embedding(&inst.substrate, &[(r0, &m0), (r1, &m1)]).unwrap());
}

#[test]
fn exact_solutions() {
    let s = two_nodes(100.0);
    assert_eq!(exact_vnep(&[], &s, 1).unwrap().profit, 0.0);

    let reqs = [edge_request(&s, "a", 3.0, 60.0), edge_request(&s, "b", 5.0, 60.0)];
    let sol = exact_vnep(&reqs, &s, 1).unwrap();
    assert_eq!(sol.profit, 5.0);
    assert!(sol.mappings[0].is_none() && sol.mappings[1].is_some());

    let inst = ring_gap_instance(8, 4, 2.5);
    let sol = exact_vnep(&inst.requests, &inst.substrate, 8).unwrap();
    assert_eq!(sol.profit, 2.5);
    assert_eq!(sol.mappings.iter().filter(|m| m.is_some()).count(), 1);
}
