use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vnep::cactus::{is_cactus, partition, reorient, reorient_default, CactusStructure};
use vnep::fixtures::{hexagon, triangle_request};
use vnep::scenarios::{generate_request_topology, GenerationConfig, RequestDraft};
use vnep::{Request, SubstrateNetwork};

fn one_node() -> SubstrateNetwork {
    let mut b = SubstrateNetwork::builder();
    b.node("u", &[("cpu", 1.0)]);
    b.build().unwrap()
}

fn request(nodes: &[&str], edges: &[(&str, &str)]) -> Request {
    let s = one_node();
    let mut b = Request::builder("r", 1.0);
    for n in nodes {
        b.node(n, "cpu", 0.0);
    }
    for (x, y) in edges {
        b.edge(x, y, 0.0);
    }
    b.build(&s).unwrap()
}

fn edge(r: &Request, a: &str, b: &str) -> usize {
    r.edge_index(r.node(a).unwrap(), r.node(b).unwrap()).unwrap()
}

#[test]
fn recognition() {
    let tri = triangle_request(&hexagon(1.0), 1.0, false).unwrap();
    assert!(is_cactus(&tri));
    assert!(is_cactus(&request(&["a", "b", "c", "d"], &[("a", "b"), ("a", "c"), ("c", "d")])));
    let k4 = request(
        &["a", "b", "c", "d"],
        &[("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")],
    );
    assert!(!is_cactus(&k4));
    assert!(CactusStructure::new(&k4).is_err());
}

#[test]
fn single_flip() {
    let r = request(&["a", "b", "c"], &[("a", "b"), ("c", "b")]);
    let ro = reorient(&r, r.node("a").unwrap()).unwrap();
    let (a, b, c) = (r.node("a").unwrap(), r.node("b").unwrap(), r.node("c").unwrap());
    assert_eq!(ro.oriented, vec![(a, b), (b, c)]);
    assert_eq!(ro.reversed, vec![false, true]);
}

#[test]
fn arborescence_is_kept() {
    let r = request(&["a", "b", "c", "d"], &[("a", "b"), ("a", "c"), ("c", "d")]);
    let ro = reorient_default(&r).unwrap();
    assert_eq!(ro.oriented, r.edges());
    assert!(ro.reversed.iter().all(|f| !f));
    let part = partition(&r, &ro).unwrap();
    assert!(part.cycles.is_empty());
    assert_eq!(part.forest, vec![0, 1, 2]);
}

#[test]
fn triangle_reorientation_and_cycle() {
    let r = triangle_request(&hexagon(1.0), 1.0, false).unwrap();
    let ro = reorient_default(&r).unwrap();
    let (i, j, k) = (r.node("i").unwrap(), r.node("j").unwrap(), r.node("k").unwrap());
    assert_eq!(ro.root, i);
    let ki = edge(&r, "k", "i");
    assert_eq!(ro.oriented[ki], (i, k));
    assert_eq!(ro.reversed, vec![false, false, true]);

    let part = partition(&r, &ro).unwrap();
    assert_eq!(part.cycles.len(), 1);
    assert!(part.forest.is_empty());
    let c = &part.cycles[0];
    assert_eq!((c.source, c.target), (i, k));
    let branches = [c.branch1.clone(), c.branch2.clone()];
    assert!(branches.contains(&vec![edge(&r, "i", "j"), edge(&r, "j", "k")]));
    assert!(branches.contains(&vec![ki]));
    assert_eq!(c.nodes(&ro).len(), 3);
    assert!(c.nodes(&ro).contains(&j));
}

#[test]
fn two_triangles_share_a_node() {
    let r = request(
        &["a", "b", "c", "d", "e"],
        &[("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "e"), ("e", "c")],
    );
    let s = CactusStructure::new(&r).unwrap();
    let p = &s.partition;
    assert_eq!(p.cycles.len(), 2);
    assert!(p.forest.is_empty());
    let mut covered: Vec<usize> = p.cycles.iter().flat_map(|c| c.edges()).collect();
    covered.sort_unstable();
    assert_eq!(covered, (0..6).collect::<Vec<_>>());
}

fn topology_request(seed: u64, max_depth: usize) -> Request {
    let config = GenerationConfig {
        max_depth,
        ..GenerationConfig::default()
    };
    let t = generate_request_topology(&config, &mut ChaCha8Rng::seed_from_u64(seed));
    let names: Vec<String> = (0..t.nodes).map(RequestDraft::node_id).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let edges: Vec<(&str, &str)> = t.edges.iter().map(|&(x, y)| (names[x], names[y])).collect();
    request(&names, &edges)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reorientation_invariants(seed in any::<u64>(), depth in 1usize..=3, root_pick in any::<prop::sample::Index>()) {
        let r = topology_request(seed, depth);
        prop_assert!(is_cactus(&r));
        let root = root_pick.index(r.num_nodes());
        let ro = reorient(&r, root).unwrap();
        prop_assert!(ro.is_acyclic());
        prop_assert_eq!(ro.oriented.len(), r.num_edges());
        prop_assert_eq!(ro.order.len(), r.num_nodes());
        prop_assert_eq!(ro.order[0], root);
        for k in 0..r.num_edges() {
            let (a, b) = r.edge(k);
            let expect = if ro.reversed[k] { (b, a) } else { (a, b) };
            prop_assert_eq!(ro.oriented[k], expect);
        }
        for i in 0..r.num_nodes() {
            prop_assert!(ro.in_degree(i) <= 2);
            prop_assert_eq!(ro.in_degree(i) == 0, i == root);
        }
    }

    #[test]
    fn partition_invariants(seed in any::<u64>(), depth in 1usize..=3) {
        let r = topology_request(seed, depth);
        let s = CactusStructure::new(&r).unwrap();
        let (ro, p) = (&s.reorientation, &s.partition);
        let mut seen = vec![0usize; r.num_edges()];
        for &k in &p.forest {
            seen[k] += 1;
            prop_assert_eq!(p.edge_cycle[k], None);
        }
        for (ci, c) in p.cycles.iter().enumerate() {
            prop_assert!(!c.branch1.is_empty() && !c.branch2.is_empty());
            prop_assert_eq!(ro.in_degree(c.target), 2);
            for branch in [&c.branch1, &c.branch2] {
                prop_assert_eq!(ro.oriented[branch[0]].0, c.source);
                prop_assert_eq!(ro.oriented[*branch.last().unwrap()].1, c.target);
                for w in branch.windows(2) {
                    prop_assert_eq!(ro.oriented[w[0]].1, ro.oriented[w[1]].0);
                }
            }
            for k in c.edges() {
                seen[k] += 1;
                prop_assert_eq!(p.edge_cycle[k], Some(ci));
            }
        }
        prop_assert!(seen.iter().all(|&n| n == 1));
        let targets = (0..r.num_nodes()).filter(|&i| ro.in_degree(i) == 2).count();
        prop_assert_eq!(targets, p.cycles.len());
    }
}
