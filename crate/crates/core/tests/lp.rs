mod common;

use proptest::prelude::*;
use vnep::formulations::{build_mcf, build_novel, McfOptions};
use vnep::lp::{solve_ip, solve_ip_with, solve_lp, to_lp_string, IpOptions, LinearProgram, LpStatus, Relation, Sense};
use vnep::num::{ratio, Scalar};
use vnep::{ExactLp, Rational};

use common::{random_instance, TINY};

fn int_lp(rows: &[(Vec<i64>, i64)], obj: &[i64]) -> ExactLp {
    let mut lp = ExactLp::new("p");
    let vars: Vec<_> = (0..obj.len()).map(|j| lp.add_nonneg(format!("x{j}")).unwrap()).collect();
    for (k, (coef, rhs)) in rows.iter().enumerate() {
        let terms = vars.iter().zip(coef).map(|(&v, &c)| (v, ratio(c, 1))).collect();
        lp.add_constraint(format!("c{k}"), terms, Relation::Le, ratio(*rhs, 1)).unwrap();
    }
    let terms = vars.iter().zip(obj).map(|(&v, &c)| (v, ratio(c, 1))).collect();
    lp.set_objective(Sense::Maximize, terms).unwrap();
    lp
}

fn lp_strategy() -> impl Strategy<Value = (Vec<(Vec<i64>, i64)>, Vec<i64>)> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec((prop::collection::vec(-3i64..=6, n), 0i64..=10), m),
            prop::collection::vec(-2i64..=5, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn float_simplex_agrees_with_exact((rows, obj) in lp_strategy()) {
        let exact_lp = int_lp(&rows, &obj);
        let exact = solve_lp(&exact_lp);
        let float = solve_lp(&exact_lp.map_scalar(|v| v.to_f64_value()));
        prop_assert_eq!(exact.status, float.status);
        if exact.status == LpStatus::Optimal {
            prop_assert!((exact.objective.to_f64_value() - float.objective).abs() <= 1e-7);
            prop_assert!(float_viol(&exact_lp, &float.values) <= 1e-7);
        }
    }

    #[test]
    fn exact_optimum_is_feasible((rows, obj) in lp_strategy()) {
        let lp = int_lp(&rows, &obj);
        let s = solve_lp(&lp);
        if s.status == LpStatus::Optimal {
            prop_assert_eq!(lp.max_violation(&s.values), Rational::from_integer(0.into()));
            prop_assert_eq!(lp.evaluate(&s.values), s.objective);
        }
    }

    #[test]
    fn branch_and_bound_matches_enumeration(
        items in prop::collection::vec((1i64..=9, 1i64..=9), 1..=7),
        caps in (1i64..=20, 1i64..=20),
        priority in prop::collection::vec(0u32..3, 7),
    ) {
        // Two-constraint binary knapsack; weights are reused reversed for
        // the second row so the relaxation is rarely integral.
        let n = items.len();
        let mut lp = LinearProgram::<f64>::new("k");
        let vars: Vec<_> = (0..n).map(|j| lp.add_unit(format!("b{j}"), true).unwrap()).collect();
        let w1 = vars.iter().zip(&items).map(|(&v, &(w, _))| (v, w as f64)).collect();
        let w2 = vars.iter().zip(items.iter().rev()).map(|(&v, &(w, _))| (v, w as f64)).collect();
        lp.add_constraint("w1", w1, Relation::Le, caps.0 as f64).unwrap();
        lp.add_constraint("w2", w2, Relation::Le, caps.1 as f64).unwrap();
        lp.set_objective(Sense::Maximize, vars.iter().zip(&items).map(|(&v, &(_, p))| (v, p as f64)).collect()).unwrap();

        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let pick = |j: usize| mask >> j & 1 == 1;
            let a: i64 = (0..n).filter(|&j| pick(j)).map(|j| items[j].0).sum();
            let b: i64 = (0..n).filter(|&j| pick(j)).map(|j| items[n - 1 - j].0).sum();
            if a <= caps.0 && b <= caps.1 {
                best = best.max((0..n).filter(|&j| pick(j)).map(|j| items[j].1).sum());
            }
        }

        let opts = IpOptions { priority: priority[..n].to_vec(), ..IpOptions::default() };
        let ip = solve_ip_with(&lp, &vars, &opts).unwrap();
        prop_assert!(ip.proven_optimal);
        prop_assert!((ip.solution.objective - best as f64).abs() <= 1e-6);
    }
}

fn float_viol(lp: &ExactLp, values: &[f64]) -> f64 {
    lp.map_scalar(|v| v.to_f64_value()).max_violation(values)
}

#[test]
fn bounded_single_variable() {
    let mut lp = LinearProgram::<f64>::new("t");
    let x = lp.add_nonneg("x").unwrap();
    lp.add_constraint("c0", vec![(x, 1.0)], Relation::Le, 3.0).unwrap();
    lp.set_objective(Sense::Maximize, vec![(x, 1.0)]).unwrap();
    assert_eq!(solve_lp(&lp).objective, 3.0);
    let text = to_lp_string(&lp);
    for part in ["Maximize", "obj: x", "Subject To", "c0: x <= 3"] {
        assert!(text.contains(part), "{part} missing from\n{text}");
    }
}

#[test]
fn integral_relaxation_is_kept() {
    let mut lp = LinearProgram::<f64>::new("t");
    let x = lp.add_unit("x", true).unwrap();
    let y = lp.add_unit("y", true).unwrap();
    lp.add_constraint("", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0).unwrap();
    lp.set_objective(Sense::Maximize, vec![(x, 2.0), (y, 1.0)]).unwrap();
    let ip = solve_ip(&lp, &[x, y]).unwrap();
    assert_eq!(ip.nodes, 1);
    assert_eq!(ip.gap, 0.0);
    assert_eq!(ip.solution.objective, 2.0);
}

// Degenerate flow LPs were the ones that drove the float simplex into
// round-off cycling; the exact solve is the reference.
#[test]
fn flow_lps_match_exact_solves() {
    for seed in 0..15 {
        let inst = random_instance(9000 + seed, &TINY);
        let (r, s) = (&inst.requests, &inst.substrate);
        for lp in [
            build_mcf(r, s, &McfOptions::default()).unwrap().lp,
            build_novel(r, s).unwrap().lp,
        ] {
            let float = solve_lp(&lp);
            let exact = solve_lp(&lp.map_scalar(|&v| Rational::from_f64_value(v)));
            assert_eq!(float.status, LpStatus::Optimal, "seed {seed}");
            assert_eq!(exact.status, LpStatus::Optimal, "seed {seed}");
            let e = exact.objective.to_f64_value();
            assert!((float.objective - e).abs() <= 1e-7 * e.abs().max(1.0), "seed {seed}: {} vs {e}", float.objective);
        }
    }
}
