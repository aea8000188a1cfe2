mod common;

use common::{decomposition_problems, random_instance, SMALL, TINY};

#[test]
fn random_small_instances_decompose() {
    for seed in 0..60 {
        let inst = random_instance(seed, &SMALL);
        let p = decomposition_problems(&inst, false);
        assert!(p.is_empty(), "seed {seed}: {p:?}");
    }
}

#[test]
fn tiny_decompositions_use_enumerated_mappings() {
    for seed in 0..20 {
        let inst = random_instance(1000 + seed, &TINY);
        let p = decomposition_problems(&inst, true);
        assert!(p.is_empty(), "seed {seed}: {p:?}");
    }
}

mod examples {
    use vnep::cactus::reorient_default;
    use vnep::decompose::{
        decompose_cactus, decompose_mcf_solution, decompose_novel_solution, decompose_tree, extract_flow_path,
        DecomposeOptions, FlowDirection,
    };
    use vnep::fixtures::{triangle_half_solution, triangle_instance, unbounded_gap_instance};
    use vnep::formulations::{build_mcf, build_novel, McfModel, McfOptions};
    use vnep::lp::solve_lp;
    use vnep::model::validate_mapping;
    use vnep::oracle::enumerate_valid_mappings;
    use vnep::{Request, SubstrateNetwork};

    fn four_nodes() -> SubstrateNetwork {
        let mut b = SubstrateNetwork::builder();
        for u in ["a", "b", "c", "d"] {
            b.node(u, &[("cpu", 5.0)]);
        }
        b.edge("a", "b", 5.0).edge("c", "d", 5.0).edge("b", "c", 5.0);
        b.build().unwrap()
    }

    fn pair(s: &SubstrateNetwork) -> Request {
        let mut rb = Request::builder("r", 1.0);
        rb.node("i", "cpu", 1.0)
            .node("j", "cpu", 1.0)
            .edge("i", "j", 1.0)
            .allow_nodes("i", &["a", "c"])
            .allow_nodes("j", &["b", "d"]);
        rb.build(s).unwrap()
    }

    /// Sets `x`, the given placements and flows, and the allocation rows.
    fn assign(m: &McfModel, r: &Request, s: &SubstrateNetwork, x: f64, parts: &[(&str, &str, f64)]) -> Vec<f64> {
        let v = &m.requests[0];
        let mut values = vec![0.0; m.lp.num_variables()];
        values[v.x.index()] = x;
        let (i, j) = (r.node("i").unwrap(), r.node("j").unwrap());
        for &(u, w, f) in parts {
            let (u, w) = (s.node(u).unwrap(), s.node(w).unwrap());
            values[v.y[i][u].unwrap().index()] += f;
            values[v.y[j][w].unwrap().index()] += f;
            values[v.z[0][s.edge_between(u, w).unwrap()].unwrap().index()] += f;
        }
        // Allocation variables take whatever the equality rows force.
        for (idx, a) in v.a.iter().enumerate() {
            if let Some(a) = a {
                let res = s.resource(idx);
                let mut load = 0.0;
                match res {
                    vnep::Resource::Node { node, .. } => {
                        for k in [i, j] {
                            if let Some(y) = v.y[k][node] {
                                load += values[y.index()];
                            }
                        }
                    }
                    vnep::Resource::Edge(e) => {
                        if let Some(z) = v.z[0][e] {
                            load += values[z.index()];
                        }
                    }
                }
                values[a.index()] = load;
            }
        }
        assert!(m.lp.max_violation(&values) <= 1e-12);
        values
    }

    #[test]
    fn flow_path_examples() {
        let inst = triangle_instance();
        let s = &inst.substrate;
        let m = build_mcf(&inst.requests, s, &McfOptions::default()).unwrap();
        let values = triangle_half_solution(&m, &inst);
        let r = &inst.requests[0];
        let ij = r.edge_index(r.node("i").unwrap(), r.node("j").unwrap()).unwrap();
        let flow: Vec<f64> = m.requests[0].z[ij].iter().map(|z| z.map_or(0.0, |z| values[z.index()])).collect();
        let (u1, u2) = (s.node("u1").unwrap(), s.node("u2").unwrap());
        let (end, path) = extract_flow_path(s, &flow, FlowDirection::Forward, u1, |u| u == u2, 1e-9).unwrap();
        assert_eq!(end, u2);
        assert_eq!(path, vec![s.edge_by_ids("u1", "u2").unwrap()]);
        let (end, path) = extract_flow_path(s, &flow, FlowDirection::Forward, u1, |u| u == u1, 1e-9).unwrap();
        assert_eq!((end, path.len()), (u1, 0));
        let (end, path) = extract_flow_path(s, &flow, FlowDirection::Reverse, u2, |u| u == u1, 1e-9).unwrap();
        assert_eq!(end, u1);
        assert_eq!(path, vec![s.edge_by_ids("u1", "u2").unwrap()]);
    }

    #[test]
    fn integral_solution_gives_one_entry() {
        let s = four_nodes();
        let r = pair(&s);
        let m = build_mcf(std::slice::from_ref(&r), &s, &McfOptions::default()).unwrap();
        let values = assign(&m, &r, &s, 1.0, &[("c", "d", 1.0)]);
        let ro = reorient_default(&r).unwrap();
        let d = decompose_tree(0, &r, &s, &m.requests[0], &values, &ro, &DecomposeOptions::default()).unwrap();
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries[0].weight, 1.0);
        assert_eq!(d.entries[0].mapping.node_map, vec![s.node("c").unwrap(), s.node("d").unwrap()]);
    }

    #[test]
    fn even_split_gives_two_halves() {
        let s = four_nodes();
        let r = pair(&s);
        let m = build_mcf(std::slice::from_ref(&r), &s, &McfOptions::default()).unwrap();
        let values = assign(&m, &r, &s, 1.0, &[("a", "b", 0.5), ("c", "d", 0.5)]);
        let ro = reorient_default(&r).unwrap();
        let d = decompose_tree(0, &r, &s, &m.requests[0], &values, &ro, &DecomposeOptions::default()).unwrap();
        assert_eq!(d.entries.len(), 2);
        let all = enumerate_valid_mappings(&r, &s, 3).unwrap();
        for e in &d.entries {
            assert!((e.weight - 0.5).abs() < 1e-12);
            assert!(all.contains(&e.mapping));
        }
        assert_ne!(d.entries[0].mapping, d.entries[1].mapping);
    }

    #[test]
    fn zero_embedding_gives_empty_decomposition() {
        let s = four_nodes();
        let r = pair(&s);
        let m = build_mcf(std::slice::from_ref(&r), &s, &McfOptions::default()).unwrap();
        let values = assign(&m, &r, &s, 0.0, &[]);
        let ro = reorient_default(&r).unwrap();
        let d = decompose_tree(0, &r, &s, &m.requests[0], &values, &ro, &DecomposeOptions::default()).unwrap();
        assert!(d.entries.is_empty());

        let inst = unbounded_gap_instance(10.0);
        let nm = build_novel(&inst.requests, &inst.substrate).unwrap();
        let sol = solve_lp(&nm.lp);
        let d = decompose_novel_solution(&nm, &inst.requests, &inst.substrate, &sol, &DecomposeOptions::default())
            .unwrap();
        assert!(d[0].entries.is_empty());
    }

    #[test]
    fn unrestricted_triangle_decomposes_fully() {
        let inst = triangle_instance();
        let (s, reqs) = (&inst.substrate, &inst.requests);
        let nm = build_novel(reqs, s).unwrap();
        let sol = solve_lp(&nm.lp);
        assert!((sol.values[nm.requests[0].global.x.index()] - 1.0).abs() < 1e-9);
        let d = decompose_novel_solution(&nm, reqs, s, &sol, &DecomposeOptions::default()).unwrap();
        assert!((d[0].total_weight() - 1.0).abs() < 1e-9);
        let all = enumerate_valid_mappings(&reqs[0], s, 6).unwrap();
        for e in &d[0].entries {
            assert!(validate_mapping(&reqs[0], s, &e.mapping).unwrap().valid);
            assert!(all.contains(&e.mapping));
        }
    }

    #[test]
    fn trees_decompose_alike_in_both_models() {
        let s = four_nodes();
        let r = pair(&s);
        let reqs = [r];
        let nm = build_novel(&reqs, &s).unwrap();
        let sol = solve_lp(&nm.lp);
        let structure = &nm.structures[0];
        let via_cactus =
            decompose_cactus(0, &reqs[0], &s, &nm.requests[0], &sol.values, structure, &DecomposeOptions::default())
                .unwrap();
        let via_tree = decompose_tree(
            0,
            &reqs[0],
            &s,
            &nm.requests[0].global,
            &sol.values,
            &structure.reorientation,
            &DecomposeOptions::default(),
        )
        .unwrap();
        assert_eq!(via_cactus.entries.len(), via_tree.entries.len());
        for (a, b) in via_cactus.entries.iter().zip(&via_tree.entries) {
            assert_eq!(a.mapping, b.mapping);
            assert_eq!(a.weight, b.weight);
        }

        let m = build_mcf(&reqs, &s, &McfOptions::default()).unwrap();
        let sol = solve_lp(&m.lp);
        let d = decompose_mcf_solution(&m, &reqs, &s, &sol, &DecomposeOptions::default()).unwrap();
        assert!((d[0].total_weight() - 1.0).abs() < 1e-9);
    }
}
