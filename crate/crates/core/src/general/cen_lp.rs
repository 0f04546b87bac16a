//! The single-level LP over small items for a fixed large guess, Θ, per-choice
//! classification and λ guess.

use crate::lp::{solve_extreme_point, Constraint, LinearProgram, LpSolution, Relation, Sense};
use crate::scalar::Scalar;

use super::lambda::{lambda_floor, lambda_top, LambdaGuess};
use super::shapes::ShapeClassification;
use super::{DominantChoiceGeneral, GeneralError};

/// Small items seen by the leader: variable i of the LP is `ids[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallSet<S> {
    pub ids: Vec<usize>,
    pub profits: Vec<S>,
    pub costs: Vec<Vec<S>>,
    pub forbidden: Vec<bool>,
}

impl<S: Scalar> SmallSet<S> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn position(&self, item: usize) -> Result<usize, GeneralError> {
        self.ids
            .binary_search(&item)
            .map_err(|_| GeneralError::DanglingSubgroup)
    }
}

/// Number of (λ, λ̄) pairs a guess must carry: one per subgroup of every
/// usable choice.
pub fn subgroup_count<S>(classes: &[Option<ShapeClassification<S>>]) -> usize {
    classes.iter().flatten().map(|c| c.subgroups.len()).sum()
}

/// Variables: x per small item, then M; minimize M. Rows in order: leader
/// rows, then per choice its objective row followed by the mass rows of its
/// subgroups. A choice without classification (zero residual) only gets
/// P_l <= M.
#[allow(clippy::too_many_arguments)]
pub fn build_cen_lp<S: Scalar>(
    small: &SmallSet<S>,
    a_prime: &[S],
    theta: &[DominantChoiceGeneral<S>],
    classes: &[Option<ShapeClassification<S>>],
    guess: &LambdaGuess<S>,
    eps: &S,
    s_b: usize,
) -> Result<LinearProgram<S>, GeneralError> {
    if classes.len() != theta.len() || guess.pairs.len() != subgroup_count(classes) {
        return Err(GeneralError::DanglingSubgroup);
    }
    let floor = lambda_floor(eps, s_b);
    let top = lambda_top(eps, s_b);
    let mut lp = LinearProgram::new(Sense::Minimize);
    for (i, &id) in small.ids.iter().enumerate() {
        let v = lp.add_variable(format!("x{id}"), S::zero(), S::one());
        if small.forbidden[i] {
            lp.fix(v, S::zero());
        }
    }
    let m_var = lp.add_variable("M", S::zero(), S::zero());
    lp.set_objective(vec![(m_var, S::one())]);
    for (i, spent) in a_prime.iter().enumerate() {
        let coeffs = (0..small.len())
            .filter(|&p| small.costs[p][i].is_positive())
            .map(|p| (p, small.costs[p][i].clone()))
            .collect();
        lp.add_constraint(Constraint::new(
            coeffs,
            Relation::Le,
            S::one() - spent.clone(),
            format!("leader[{i}]"),
        ));
    }

    let mut m_upper = S::zero();
    let mut pairs = guess.pairs.iter();
    for (l, (choice, class)) in theta.iter().zip(classes).enumerate() {
        let Some(class) = class else {
            lp.add_constraint(Constraint::new(
                vec![(m_var, -S::one())],
                Relation::Le,
                -choice.profit.clone(),
                format!("obj[{l}]"),
            ));
            m_upper = m_upper.max(choice.profit.clone());
            continue;
        };
        let mut constant = choice.profit.clone();
        let mut coeffs = Vec::new();
        for e in class.big_items() {
            let pos = small.position(e.item)?;
            constant = constant + small.profits[pos].clone();
            coeffs.push((pos, -small.profits[pos].clone()));
        }
        let mut mass_rows = Vec::new();
        for (h, group) in class.subgroups.iter().enumerate() {
            let (lam, bar) = pairs.next().expect("count checked");
            constant = constant + group.rho.clone() * bar.clone();
            // Σ w (1 - x) = total - Σ w x
            let mut total = S::zero();
            let mut row = Vec::new();
            for &j in &group.members {
                let pos = small.position(j)?;
                let w = class
                    .entry(j)
                    .ok_or(GeneralError::DanglingSubgroup)?
                    .w
                    .clone();
                total = total + w.clone();
                row.push((pos, -w));
            }
            let name = |kind: &str| format!("{kind}[{l},{h}]");
            if lam.is_zero() {
                mass_rows.push(Constraint::new(
                    row,
                    Relation::Le,
                    floor.clone() - total,
                    name("mass_zero"),
                ));
            } else if *lam == top {
                mass_rows.push(Constraint::new(
                    row,
                    Relation::Ge,
                    top.clone() - total,
                    name("mass_top"),
                ));
            } else {
                let upper = lam.clone() * (S::one() + eps.clone());
                mass_rows.push(Constraint::new(
                    row.clone(),
                    Relation::Ge,
                    lam.clone() - total.clone(),
                    name("mass_low"),
                ));
                mass_rows.push(Constraint::new(
                    row,
                    Relation::Le,
                    upper - total,
                    name("mass_high"),
                ));
            }
        }
        coeffs.push((m_var, -S::one()));
        m_upper = m_upper.max(constant.clone());
        lp.add_constraint(Constraint::new(
            coeffs,
            Relation::Le,
            -constant,
            format!("obj[{l}]"),
        ));
        for row in mass_rows {
            lp.add_constraint(row);
        }
    }
    // every objective row is satisfied by M at its constant
    lp.variables[m_var].hi = m_upper;
    Ok(lp)
}

/// Keep exact ones among the first `vars` coordinates.
pub fn round_solution_general<S: Scalar>(
    sol: &LpSolution<S>,
    vars: usize,
) -> Result<Vec<bool>, GeneralError> {
    if !sol.is_extreme_point {
        return Err(GeneralError::NotExtremePoint);
    }
    Ok(sol.assignment[..vars].iter().map(|v| v.is_one()).collect())
}

/// Convenience for tests: solve and return (M, x).
pub fn solve_cen_lp<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>, GeneralError> {
    Ok(solve_extreme_point(lp)?)
}
