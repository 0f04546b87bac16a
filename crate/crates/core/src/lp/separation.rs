use crate::scalar::Scalar;

use super::{solve_extreme_point, Constraint, LinearProgram, LpError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparationOutcome<S> {
    Feasible,
    Violated(Constraint<S>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityOutcome<S> {
    /// A point the separator accepted, with the cuts gathered on the way.
    Feasible {
        point: Vec<S>,
        cuts: Vec<Constraint<S>>,
    },
    /// The base program plus these cuts has no point.
    Infeasible { cuts: Vec<Constraint<S>> },
    RoundLimit {
        cuts: Vec<Constraint<S>>,
        last_point: Vec<S>,
    },
}

/// Cutting-plane loop: solve the working program, ask the separator about the
/// point, add the returned cut, repeat. The base program's objective picks
/// which point of the working program is queried.
pub fn feasibility_with_separation<S, F>(
    base: &LinearProgram<S>,
    mut separator: F,
    max_rounds: usize,
) -> Result<FeasibilityOutcome<S>, LpError>
where
    S: Scalar,
    F: FnMut(&[S]) -> SeparationOutcome<S>,
{
    let mut working = base.clone();
    let mut cuts: Vec<Constraint<S>> = Vec::new();
    let mut last_point = Vec::new();
    for _ in 0..max_rounds.max(1) {
        let point = match solve_extreme_point(&working) {
            Ok(sol) => sol.assignment,
            Err(LpError::Infeasible) => return Ok(FeasibilityOutcome::Infeasible { cuts }),
            Err(e) => return Err(e),
        };
        match separator(&point) {
            SeparationOutcome::Feasible => return Ok(FeasibilityOutcome::Feasible { point, cuts }),
            SeparationOutcome::Violated(cut) => {
                // the point satisfies every earlier cut, so a repeat lands here too
                if cut.satisfied(&point) {
                    return Err(LpError::SeparatorContradiction);
                }
                working.add_constraint(cut.clone());
                cuts.push(cut);
            }
        }
        last_point = point;
    }
    Ok(FeasibilityOutcome::RoundLimit { cuts, last_point })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Relation, Sense};
    use crate::scalar::{int, ratio};
    use crate::Rational;

    fn unit_box(n: usize) -> LinearProgram<Rational> {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let vars: Vec<usize> = (0..n)
            .map(|j| lp.add_variable(format!("x{j}"), int(0), int(1)))
            .collect();
        lp.set_objective(vars.iter().map(|&j| (j, int(1))).collect());
        lp
    }

    #[test]
    fn accepting_separator_returns_first_point() {
        let out =
            feasibility_with_separation(&unit_box(2), |_| SeparationOutcome::Feasible, 5).unwrap();
        assert_eq!(
            out,
            FeasibilityOutcome::Feasible {
                point: vec![int(1), int(1)],
                cuts: vec![]
            }
        );
    }

    #[test]
    fn infeasible_base_gives_certificate() {
        let mut lp = unit_box(1);
        lp.add_constraint(Constraint::new(
            vec![(0, int(1))],
            Relation::Ge,
            int(1),
            "a",
        ));
        lp.add_constraint(Constraint::new(
            vec![(0, int(1))],
            Relation::Le,
            int(0),
            "b",
        ));
        let out = feasibility_with_separation(&lp, |_| SeparationOutcome::Feasible, 5).unwrap();
        assert_eq!(out, FeasibilityOutcome::Infeasible { cuts: vec![] });
    }

    #[test]
    fn cuts_accumulate_until_accepted() {
        // separator wants x0 + x1 <= 1 and then x0 <= 1/3
        let sep = |x: &[Rational]| {
            let c1 = Constraint::new(vec![(0, int(1)), (1, int(1))], Relation::Le, int(1), "c1");
            let c2 = Constraint::new(vec![(0, int(1))], Relation::Le, ratio(1, 3), "c2");
            if !c1.satisfied(x) {
                SeparationOutcome::Violated(c1)
            } else if !c2.satisfied(x) {
                SeparationOutcome::Violated(c2)
            } else {
                SeparationOutcome::Feasible
            }
        };
        match feasibility_with_separation(&unit_box(2), sep, 10).unwrap() {
            FeasibilityOutcome::Feasible { point, cuts } => {
                assert!(cuts.iter().all(|c| c.satisfied(&point)));
                assert!(point[0] <= ratio(1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_limit_and_contradiction() {
        let lp = unit_box(1);
        let mut k = 0;
        let shrinking = |x: &[Rational]| {
            k += 1;
            SeparationOutcome::Violated(Constraint::new(
                vec![(0, int(1))],
                Relation::Le,
                x[0].clone() / int::<Rational>(2),
                "half",
            ))
        };
        assert!(matches!(
            feasibility_with_separation(&lp, shrinking, 3).unwrap(),
            FeasibilityOutcome::RoundLimit { .. }
        ));
        let lazy = |_: &[Rational]| {
            SeparationOutcome::Violated(Constraint::new(
                vec![(0, int(1))],
                Relation::Le,
                int(5),
                "slack",
            ))
        };
        assert_eq!(
            feasibility_with_separation(&lp, lazy, 3),
            Err(LpError::SeparatorContradiction)
        );
    }
}
