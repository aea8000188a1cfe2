use std::collections::HashMap;
use std::sync::Arc;

use crate::num::Scalar;

use super::LpError;

/// Handle to a variable of one [`LinearProgram`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct Variable<T> {
    /// `None` means unbounded below.
    pub lower: Option<T>,
    /// `None` means unbounded above.
    pub upper: Option<T>,
    pub integer: bool,
}

#[derive(Clone, Debug)]
pub struct Constraint<T> {
    pub name: String,
    pub terms: Vec<(VarId, T)>,
    pub relation: Relation,
    pub rhs: T,
}

/// A linear program over named variables.
///
/// Variables default to `[0, ∞)`. Names are unique; constraint terms
/// referencing the same variable twice are merged.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    name: String,
    sense: Sense,
    names: Arc<Vec<String>>,
    index: Arc<HashMap<String, usize>>,
    variables: Vec<Variable<T>>,
    objective: Vec<(VarId, T)>,
    constraints: Vec<Constraint<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            sense: Sense::Maximize,
            names: Arc::new(Vec::new()),
            index: Arc::new(HashMap::new()),
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Adds a continuous variable with the given bounds.
    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: Option<T>,
        upper: Option<T>,
    ) -> Result<VarId, LpError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(LpError::DuplicateVariable(name));
        }
        let id = VarId(self.variables.len());
        Arc::make_mut(&mut self.index).insert(name.clone(), id.0);
        Arc::make_mut(&mut self.names).push(name);
        self.variables.push(Variable {
            lower,
            upper,
            integer: false,
        });
        Ok(id)
    }

    /// Adds a variable with the default bounds `[0, ∞)`.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> Result<VarId, LpError> {
        self.add_variable(name, Some(T::zero()), None)
    }

    /// Adds a `[0, 1]` variable, marked integer when `integer` is set.
    pub fn add_unit(&mut self, name: impl Into<String>, integer: bool) -> Result<VarId, LpError> {
        let id = self.add_variable(name, Some(T::zero()), Some(T::one()))?;
        self.variables[id.0].integer = integer;
        Ok(id)
    }

    pub fn set_integer(&mut self, var: VarId, integer: bool) {
        self.variables[var.0].integer = integer;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: Option<T>, upper: Option<T>) {
        let v = &mut self.variables[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, T)>,
        relation: Relation,
        rhs: T,
    ) -> Result<(), LpError> {
        let name = name.into();
        let terms = self.normalize_terms(terms, &name)?;
        self.constraints.push(Constraint {
            name,
            terms,
            relation,
            rhs,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(VarId, T)>) -> Result<(), LpError> {
        self.sense = sense;
        self.objective = self.normalize_terms(terms, "objective")?;
        Ok(())
    }

    fn normalize_terms(&self, terms: Vec<(VarId, T)>, owner: &str) -> Result<Vec<(VarId, T)>, LpError> {
        let mut merged: Vec<(VarId, T)> = Vec::with_capacity(terms.len());
        let mut seen: HashMap<VarId, usize> = HashMap::new();
        for (var, coef) in terms {
            if var.0 >= self.variables.len() {
                return Err(LpError::UnknownVariable {
                    owner: owner.to_string(),
                    index: var.0,
                });
            }
            match seen.get(&var) {
                Some(&pos) => {
                    let acc = merged[pos].1.clone() + coef;
                    merged[pos].1 = acc;
                }
                None => {
                    seen.insert(var, merged.len());
                    merged.push((var, coef));
                }
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Ok(merged)
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).map(|&i| VarId(i))
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.names[var.0]
    }

    pub fn variable(&self, var: VarId) -> &Variable<T> {
        &self.variables[var.0]
    }

    pub fn variables(&self) -> impl Iterator<Item = (VarId, &str, &Variable<T>)> {
        self.variables
            .iter()
            .enumerate()
            .map(move |(i, v)| (VarId(i), self.names[i].as_str(), v))
    }

    pub fn integer_variables(&self) -> Vec<VarId> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.integer)
            .map(|(i, _)| VarId(i))
            .collect()
    }

    pub fn objective(&self) -> &[(VarId, T)] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub(crate) fn names(&self) -> Arc<Vec<String>> {
        Arc::clone(&self.names)
    }

    pub(crate) fn index(&self) -> Arc<HashMap<String, usize>> {
        Arc::clone(&self.index)
    }

    /// Objective value of an assignment.
    pub fn evaluate(&self, values: &[T]) -> T {
        self.objective
            .iter()
            .fold(T::zero(), |acc, (v, c)| acc + c.clone() * values[v.0].clone())
    }

    /// Largest violation of any constraint or bound by `values`.
    pub fn max_violation(&self, values: &[T]) -> T {
        let mut worst = T::zero();
        let mut bump = |amount: T| {
            if amount > worst {
                worst = amount;
            }
        };
        for c in &self.constraints {
            let lhs = c
                .terms
                .iter()
                .fold(T::zero(), |acc, (v, k)| acc + k.clone() * values[v.0].clone());
            let diff = lhs - c.rhs.clone();
            match c.relation {
                Relation::Le => bump(diff),
                Relation::Ge => bump(-diff),
                Relation::Eq => bump(diff.abs()),
            }
        }
        for (i, v) in self.variables.iter().enumerate() {
            if let Some(lo) = &v.lower {
                bump(lo.clone() - values[i].clone());
            }
            if let Some(up) = &v.upper {
                bump(values[i].clone() - up.clone());
            }
        }
        worst
    }

    /// Converts every coefficient to another scalar type.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LinearProgram<U> {
        let conv = |terms: &[(VarId, T)]| terms.iter().map(|(v, c)| (*v, f(c))).collect();
        LinearProgram {
            name: self.name.clone(),
            sense: self.sense,
            names: Arc::clone(&self.names),
            index: Arc::clone(&self.index),
            variables: self
                .variables
                .iter()
                .map(|v| Variable {
                    lower: v.lower.as_ref().map(&f),
                    upper: v.upper.as_ref().map(&f),
                    integer: v.integer,
                })
                .collect(),
            objective: conv(&self.objective),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    name: c.name.clone(),
                    terms: conv(&c.terms),
                    relation: c.relation,
                    rhs: f(&c.rhs),
                })
                .collect(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The pivot limit was reached before optimality was proven.
    IterationLimit,
}

/// Primal result of an LP solve.
#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Objective in the model's own sense. Zero unless `Optimal`.
    pub objective: T,
    /// Indexed by [`VarId::index`].
    pub values: Vec<T>,
    pub iterations: usize,
    names: Arc<Vec<String>>,
    index: Arc<HashMap<String, usize>>,
}

impl<T: Scalar> LpSolution<T> {
    pub(crate) fn new(lp: &LinearProgram<T>, status: LpStatus, objective: T, values: Vec<T>, iterations: usize) -> Self {
        Self {
            status,
            objective,
            values,
            iterations,
            names: lp.names(),
            index: lp.index(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, name: &str) -> Option<&T> {
        self.index.get(name).map(|&i| &self.values[i])
    }

    pub fn value_of(&self, var: VarId) -> &T {
        &self.values[var.0]
    }

    /// `(name, value)` pairs in declaration order.
    pub fn assignment(&self) -> impl Iterator<Item = (&str, &T)> {
        self.names.iter().map(String::as_str).zip(self.values.iter())
    }
}
