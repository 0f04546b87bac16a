//! Exact linear programming: extreme-point optimal solves and a
//! separation-driven feasibility loop.

mod separation;
mod simplex;

pub use separation::{feasibility_with_separation, FeasibilityOutcome, SeparationOutcome};
pub use simplex::solve_extreme_point;

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("constraint {constraint} references undeclared variable {var}")]
    DanglingVariable { constraint: usize, var: usize },
    #[error("separator returned a cut the queried point satisfies")]
    SeparatorContradiction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Variable<S> {
    pub name: String,
    pub lo: S,
    pub hi: S,
}

/// Sparse row: sum of coeff * x[var] (relation) rhs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint<S> {
    pub coeffs: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
    pub label: String,
}

impl<S: Scalar> Constraint<S> {
    pub fn new(
        coeffs: Vec<(usize, S)>,
        relation: Relation,
        rhs: S,
        label: impl Into<String>,
    ) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
            label: label.into(),
        }
    }

    pub fn lhs(&self, x: &[S]) -> S {
        self.coeffs
            .iter()
            .fold(S::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone())
    }

    pub fn satisfied(&self, x: &[S]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }

    /// Amount by which the row is violated at x (zero when satisfied).
    pub fn violation(&self, x: &[S]) -> S {
        let lhs = self.lhs(x);
        let v = match self.relation {
            Relation::Le => lhs - self.rhs.clone(),
            Relation::Ge => self.rhs.clone() - lhs,
            Relation::Eq => (lhs - self.rhs.clone()).abs(),
        };
        if v.is_positive() {
            v
        } else {
            S::zero()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearProgram<S> {
    pub variables: Vec<Variable<S>>,
    pub constraints: Vec<Constraint<S>>,
    pub objective: Vec<(usize, S)>,
    pub sense: Sense,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            sense,
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lo: S, hi: S) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lo,
            hi,
        });
        self.variables.len() - 1
    }

    pub fn add_constraint(&mut self, c: Constraint<S>) {
        self.constraints.push(c);
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, S)>) {
        self.objective = coeffs;
    }

    /// Pin a variable to a value by collapsing its box.
    pub fn fix(&mut self, var: usize, value: S) {
        self.variables[var].lo = value.clone();
        self.variables[var].hi = value;
    }

    /// Number of constraints other than the variable boxes.
    pub fn non_box_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.variables.len();
        for (k, c) in self.constraints.iter().enumerate() {
            if let Some(&(var, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(LpError::DanglingVariable { constraint: k, var });
            }
        }
        if let Some(&(var, _)) = self.objective.iter().find(|(j, _)| *j >= n) {
            return Err(LpError::DanglingVariable {
                constraint: usize::MAX,
                var,
            });
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[S]) -> S {
        self.objective
            .iter()
            .fold(S::zero(), |acc, (j, c)| acc + c.clone() * x[*j].clone())
    }

    /// Boxes and every constraint hold exactly at x.
    pub fn is_feasible(&self, x: &[S]) -> bool {
        x.len() == self.variables.len()
            && self
                .variables
                .iter()
                .zip(x)
                .all(|(v, xv)| v.lo <= *xv && *xv <= v.hi)
            && self.constraints.iter().all(|c| c.satisfied(x))
    }
}

fn write_terms<S: Scalar>(
    f: &mut fmt::Formatter<'_>,
    lp: &LinearProgram<S>,
    terms: &[(usize, S)],
) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (k, (j, a)) in terms.iter().enumerate() {
        let name = &lp.variables[*j].name;
        if k == 0 {
            write!(f, "{a} {name}")?;
        } else if a.is_negative() {
            write!(f, " - {} {name}", a.abs())?;
        } else {
            write!(f, " + {a} {name}")?;
        }
    }
    Ok(())
}

/// Text dump, one constraint per line.
impl<S: Scalar> fmt::Display for LinearProgram<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = match self.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        write!(f, "{sense}: ")?;
        write_terms(f, self, &self.objective)?;
        writeln!(f)?;
        writeln!(f, "subject to:")?;
        for c in &self.constraints {
            write!(f, "  [{}] ", c.label)?;
            write_terms(f, self, &c.coeffs)?;
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            writeln!(f, " {rel} {}", c.rhs)?;
        }
        writeln!(f, "bounds:")?;
        for v in &self.variables {
            writeln!(f, "  {} <= {} <= {}", v.lo, v.name, v.hi)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution<S> {
    pub assignment: Vec<S>,
    pub objective_value: S,
    pub is_extreme_point: bool,
    /// Names of the basic columns at the optimum.
    pub basis: Vec<String>,
}

impl<S: Scalar> LpSolution<S> {
    /// Variables among `vars` strictly inside their boxes.
    pub fn fractional_count(&self, lp: &LinearProgram<S>, vars: &[usize]) -> usize {
        vars.iter()
            .filter(|&&j| {
                let v = &lp.variables[j];
                v.lo < self.assignment[j] && self.assignment[j] < v.hi
            })
            .count()
    }

    /// Rank of the constraints and bounds tight at this point equals the
    /// number of variables, i.e. the point is a vertex.
    pub fn active_rank_is_full(&self, lp: &LinearProgram<S>) -> bool {
        let n = lp.variables.len();
        let mut rows: Vec<Vec<S>> = Vec::new();
        for (j, v) in lp.variables.iter().enumerate() {
            if self.assignment[j] == v.lo || self.assignment[j] == v.hi {
                let mut r = vec![S::zero(); n];
                r[j] = S::one();
                rows.push(r);
            }
        }
        for c in &lp.constraints {
            if c.lhs(&self.assignment) == c.rhs {
                let mut r = vec![S::zero(); n];
                for (j, a) in &c.coeffs {
                    r[*j] = r[*j].clone() + a.clone();
                }
                rows.push(r);
            }
        }
        rank(rows, n) == n
    }
}

fn rank<S: Scalar>(mut rows: Vec<Vec<S>>, n: usize) -> usize {
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][col].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone() / pivot.clone();
                for k in col..n {
                    let d = f.clone() * rows[r][k].clone();
                    rows[i][k] = rows[i][k].clone() - d;
                }
            }
        }
        r += 1;
    }
    r
}
