//! Branch and bound over binary variables.

use crate::num::Scalar;

use super::model::{LinearProgram, LpSolution, LpStatus, Sense, VarId};
use super::simplex::{solve_lp_with, SolveOptions};
use super::LpError;

#[derive(Clone, Debug)]
pub struct IpOptions {
    /// Maximum number of LP relaxations solved.
    pub node_budget: usize,
    /// Jump to the open node with the best bound after this many nodes.
    pub restart_every: usize,
    /// Branching class per entry of the integer variables; lower classes
    /// are branched on first. Missing entries count as class 0.
    pub priority: Vec<u32>,
    pub lp: SolveOptions,
}

impl Default for IpOptions {
    fn default() -> Self {
        Self {
            node_budget: 200_000,
            restart_every: 256,
            priority: Vec::new(),
            lp: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IpSolution<T> {
    /// Best integral solution found. `Infeasible` if none was found.
    pub solution: LpSolution<T>,
    /// Bound on the optimum, in the model's sense.
    pub best_bound: T,
    /// `|best_bound - incumbent|`; zero when optimality is proven.
    pub gap: T,
    pub nodes: usize,
    pub proven_optimal: bool,
}

impl<T: Scalar> IpSolution<T> {
    pub fn objective(&self) -> &T {
        &self.solution.objective
    }
}

struct Node<T> {
    fixes: Vec<(VarId, bool)>,
    /// Relaxation value of the parent, in maximization orientation.
    bound: T,
}

pub fn solve_ip<T: Scalar>(lp: &LinearProgram<T>, integer_vars: &[VarId]) -> Result<IpSolution<T>, LpError> {
    solve_ip_with(lp, integer_vars, &IpOptions::default())
}

pub fn solve_ip_with<T: Scalar>(
    lp: &LinearProgram<T>,
    integer_vars: &[VarId],
    opts: &IpOptions,
) -> Result<IpSolution<T>, LpError> {
    for &v in integer_vars {
        let var = lp.variable(v);
        let lo_ok = var.lower.as_ref().is_some_and(|l| *l >= T::zero());
        let up_ok = var.upper.as_ref().is_some_and(|u| *u <= T::one());
        if !lo_ok || !up_ok {
            return Err(LpError::NonBinaryInteger(lp.var_name(v).to_string()));
        }
    }
    let orient = |v: &T| -> T {
        match lp.sense() {
            Sense::Maximize => v.clone(),
            Sense::Minimize => -v.clone(),
        }
    };
    let int_tol = if T::is_exact() {
        T::zero()
    } else {
        T::from_f64_value(1e-6)
    };
    let prune_tol = |inc: &T| -> T {
        if T::is_exact() {
            T::zero()
        } else {
            let s = if inc.abs() > T::one() { inc.abs() } else { T::one() };
            T::from_f64_value(1e-9) * s
        }
    };

    let attainable = attainable_objectives(lp, integer_vars, &orient);
    // Largest attainable objective not above `bound`; `None` if there is none.
    let tighten = |bound: T| -> Option<T> {
        let Some(values) = &attainable else { return Some(bound) };
        let slack = if T::is_exact() {
            T::zero()
        } else {
            let s = if bound.abs() > T::one() { bound.abs() } else { T::one() };
            T::from_f64_value(1e-7) * s
        };
        let limit = bound + slack;
        let k = values.partition_point(|v| *v <= limit);
        k.checked_sub(1).map(|k| values[k].clone())
    };

    let mut incumbent: Option<(T, LpSolution<T>)> = None;
    let mut open = vec![Node {
        fixes: Vec::new(),
        bound: T::zero(),
    }];
    let mut root_bound: Option<T> = None;
    let mut nodes = 0usize;
    let mut work = lp.clone();

    while let Some(node) = pop_next(&mut open, nodes, opts.restart_every) {
        if let (Some((inc, _)), Some(_)) = (&incumbent, &root_bound) {
            if node.bound <= inc.clone() + prune_tol(inc) {
                continue;
            }
        }
        if nodes >= opts.node_budget {
            open.push(node);
            break;
        }
        nodes += 1;

        for (v, _, var) in lp.variables() {
            work.set_bounds(v, var.lower.clone(), var.upper.clone());
        }
        for &(v, up) in &node.fixes {
            let val = if up { T::one() } else { T::zero() };
            work.set_bounds(v, Some(val.clone()), Some(val));
        }
        let relax = solve_lp_with(&work, &opts.lp);
        match relax.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded if root_bound.is_none() => {
                return Ok(IpSolution {
                    solution: relax,
                    best_bound: T::zero(),
                    gap: T::zero(),
                    nodes,
                    proven_optimal: false,
                });
            }
            LpStatus::Unbounded | LpStatus::IterationLimit => {
                return Err(LpError::RelaxationFailed(relax.status));
            }
        }
        let Some(value) = tighten(orient(&relax.objective)) else {
            continue;
        };
        if root_bound.is_none() {
            root_bound = Some(value.clone());
        }
        if let Some((inc, _)) = &incumbent {
            if value <= inc.clone() + prune_tol(inc) {
                continue;
            }
        }

        // Most fractional variable of the lowest class; ties to the
        // smallest index.
        let mut branch: Option<(u32, VarId, T)> = None;
        for (k, &v) in integer_vars.iter().enumerate() {
            let f = relax.values[v.index()].fractionality();
            let class = opts.priority.get(k).copied().unwrap_or(0);
            let better = match &branch {
                None => true,
                Some((c, _, bf)) => class < *c || (class == *c && f > *bf),
            };
            if f > int_tol && better {
                branch = Some((class, v, f));
            }
        }
        match branch {
            None => {
                let mut sol = relax;
                for &v in integer_vars {
                    let half = T::one() / (T::one() + T::one());
                    sol.values[v.index()] = if sol.values[v.index()] >= half {
                        T::one()
                    } else {
                        T::zero()
                    };
                }
                sol.objective = lp.evaluate(&sol.values);
                incumbent = Some((orient(&sol.objective), sol));
            }
            Some((_, v, _)) => {
                let half = T::one() / (T::one() + T::one());
                let prefer_up = relax.values[v.index()] >= half;
                for up in [!prefer_up, prefer_up] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((v, up));
                    open.push(Node {
                        fixes,
                        bound: value.clone(),
                    });
                }
            }
        }
    }

    let open_bound = open.iter().map(|n| n.bound.clone()).fold(None::<T>, |acc, b| match acc {
        Some(a) if a >= b => Some(a),
        _ => Some(b),
    });
    let proven = open.is_empty();
    match incumbent {
        Some((inc, sol)) => {
            let bound = match open_bound {
                Some(b) if b > inc => b,
                _ => inc.clone(),
            };
            let gap = bound.clone() - inc;
            Ok(IpSolution {
                best_bound: orient(&bound),
                gap,
                solution: sol,
                nodes,
                proven_optimal: proven,
            })
        }
        None => {
            let status = if proven {
                LpStatus::Infeasible
            } else {
                LpStatus::IterationLimit
            };
            let bound = open_bound.map(|b| orient(&b)).unwrap_or_else(T::zero);
            Ok(IpSolution {
                solution: LpSolution::new(lp, status, T::zero(), vec![T::zero(); lp.num_variables()], 0),
                gap: bound.abs(),
                best_bound: bound,
                nodes,
                proven_optimal: proven,
            })
        }
    }
}

/// Largest objective support for which subset sums are enumerated.
const MAX_SUBSET_TERMS: usize = 16;

/// Sorted distinct objective values, in maximization orientation, when the
/// objective only involves a few binary variables.
fn attainable_objectives<T: Scalar>(
    lp: &LinearProgram<T>,
    integer_vars: &[VarId],
    orient: &impl Fn(&T) -> T,
) -> Option<Vec<T>> {
    let terms: Vec<T> = lp
        .objective()
        .iter()
        .filter(|(_, k)| !k.is_zero())
        .map(|(v, k)| integer_vars.contains(v).then(|| orient(k)))
        .collect::<Option<_>>()?;
    if terms.len() > MAX_SUBSET_TERMS {
        return None;
    }
    let mut values = vec![T::zero()];
    for k in &terms {
        let more: Vec<T> = values.iter().map(|v| v.clone() + k.clone()).collect();
        values.extend(more);
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite objective"));
    values.dedup();
    Some(values)
}

fn pop_next<T: Scalar>(open: &mut Vec<Node<T>>, nodes: usize, every: usize) -> Option<Node<T>> {
    if every > 0 && nodes > 0 && nodes % every == 0 && open.len() > 1 {
        let mut best = open.len() - 1;
        for i in 0..open.len() {
            if open[i].bound > open[best].bound {
                best = i;
            }
        }
        let last = open.len() - 1;
        open.swap(best, last);
    }
    open.pop()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;

    fn knapsack() -> (LinearProgram<f64>, Vec<VarId>) {
        // Weights 5,4,3 under capacity 7, values 10,7,5: optimum 12 (items 2 and 3).
        let mut lp = LinearProgram::new("k");
        let ids: Vec<_> = (0..3).map(|i| lp.add_unit(format!("b{i}"), true).unwrap()).collect();
        lp.add_constraint("cap", vec![(ids[0], 5.0), (ids[1], 4.0), (ids[2], 3.0)], Relation::Le, 7.0)
            .unwrap();
        lp.set_objective(Sense::Maximize, vec![(ids[0], 10.0), (ids[1], 7.0), (ids[2], 5.0)])
            .unwrap();
        (lp, ids)
    }

    #[test]
    fn knapsack_optimum() {
        let (lp, ids) = knapsack();
        let s = solve_ip(&lp, &ids).unwrap();
        assert!(s.proven_optimal);
        assert!((s.objective() - 12.0).abs() < 1e-9);
        assert_eq!(s.gap, 0.0);
    }

    #[test]
    fn integral_relaxation_is_returned() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_unit("x", true).unwrap();
        lp.set_objective(Sense::Maximize, vec![(x, 2.0)]).unwrap();
        let s = solve_ip(&lp, &[x]).unwrap();
        assert_eq!(s.nodes, 1);
        assert_eq!(*s.objective(), 2.0);
    }

    #[test]
    fn minimize_and_infeasible() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_unit("x", true).unwrap();
        let y = lp.add_unit("y", true).unwrap();
        lp.add_constraint("", vec![(x, 2.0), (y, 2.0)], Relation::Ge, 1.0).unwrap();
        lp.set_objective(Sense::Minimize, vec![(x, 3.0), (y, 2.0)]).unwrap();
        let s = solve_ip(&lp, &[x, y]).unwrap();
        assert!((s.objective() - 2.0).abs() < 1e-9);

        lp.add_constraint("", vec![(x, 2.0), (y, 2.0)], Relation::Le, 1.5).unwrap();
        lp.add_constraint("", vec![(x, 1.0), (y, 1.0)], Relation::Ge, 0.5).unwrap();
        let s = solve_ip(&lp, &[x, y]).unwrap();
        assert_eq!(s.solution.status, LpStatus::Infeasible);
    }

    #[test]
    fn budget_reports_gap() {
        let (lp, ids) = knapsack();
        let opts = IpOptions {
            node_budget: 1,
            ..IpOptions::default()
        };
        let s = solve_ip_with(&lp, &ids, &opts).unwrap();
        assert!(!s.proven_optimal);
        assert!(s.gap > 0.0 || s.solution.status != LpStatus::Optimal);
    }

    #[test]
    fn rejects_general_integers() {
        let mut lp = LinearProgram::<f64>::new("t");
        let x = lp.add_nonneg("x").unwrap();
        assert!(matches!(solve_ip(&lp, &[x]), Err(LpError::NonBinaryInteger(_))));
    }
}
