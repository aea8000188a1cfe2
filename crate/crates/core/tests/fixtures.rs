use vnep::cactus::reorient_default;
use vnep::decompose::{decompose_tree, DecomposeError, DecomposeOptions};
use vnep::fixtures::{ring_gap_instance, triangle_half_solution, triangle_instance, unbounded_gap_instance};
use vnep::formulations::{build_mcf, build_novel, McfOptions};
use vnep::lp::{solve_lp, IpOptions, LpStatus};
use vnep::oracle::exact_vnep;

fn lp_value(inst: &vnep::Instance, novel: bool) -> f64 {
    let lp = if novel {
        build_novel(&inst.requests, &inst.substrate).unwrap().lp
    } else {
        build_mcf(&inst.requests, &inst.substrate, &McfOptions::default()).unwrap().lp
    };
    let s = solve_lp(&lp);
    assert_eq!(s.status, LpStatus::Optimal);
    s.objective
}

fn ip_value(inst: &vnep::Instance) -> f64 {
    let opts = McfOptions {
        integral: true,
        ..McfOptions::default()
    };
    let m = build_mcf(&inst.requests, &inst.substrate, &opts).unwrap();
    let ip = m.solve_ip(IpOptions::default().node_budget).unwrap();
    assert!(ip.proven_optimal);
    if ip.solution.status == LpStatus::Infeasible {
        0.0
    } else {
        ip.solution.objective
    }
}

#[test]
fn half_solution_is_feasible_for_flow_model() {
    let inst = triangle_instance();
    let m = build_mcf(&inst.requests, &inst.substrate, &McfOptions::default()).unwrap();
    let values = triangle_half_solution(&m, &inst);
    assert!(m.lp.max_violation(&values) <= 1e-9);
    assert_eq!(m.lp.evaluate(&values), 10.0);
}

#[test]
fn half_solution_has_no_tree_decomposition() {
    let inst = triangle_instance();
    let m = build_mcf(&inst.requests, &inst.substrate, &McfOptions::default()).unwrap();
    let values = triangle_half_solution(&m, &inst);
    let r = &inst.requests[0];
    let ro = reorient_default(r).unwrap();
    let err = decompose_tree(0, r, &inst.substrate, &m.requests[0], &values, &ro, &DecomposeOptions::default())
        .unwrap_err();
    assert!(matches!(err, DecomposeError::DivergentNodeMapping { .. }), "{err}");
}

#[test]
fn restricted_triangle_gap() {
    let b = 10.0;
    let inst = unbounded_gap_instance(b);
    assert!((lp_value(&inst, false) - b).abs() <= 1e-6);
    assert!(lp_value(&inst, true).abs() <= 1e-6);
    assert!(ip_value(&inst).abs() <= 1e-6);
    let exact = exact_vnep(&inst.requests, &inst.substrate, inst.substrate.num_edges()).unwrap();
    assert_eq!(exact.profit, 0.0);
}

#[test]
fn ring_copies_gap() {
    let b = 3.0;
    let inst = ring_gap_instance(8, 4, b);
    assert!((lp_value(&inst, false) - 4.0 * b).abs() <= 1e-6);
    assert!((lp_value(&inst, true) - b).abs() <= 1e-6);
    assert!((ip_value(&inst) - b).abs() <= 1e-6);
}
