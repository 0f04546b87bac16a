//! Dense two-phase tableau simplex with Bland's rule. Variables are shifted
//! to [0, hi - lo]; the upper bounds become explicit rows.

use crate::scalar::Scalar;

use super::{LinearProgram, LpError, LpSolution, Relation, Sense};

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural(usize),
    Slack(usize),
    Artificial,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    basis: Vec<usize>,
    /// Reduced costs; the last entry is minus the objective value.
    d: Vec<S>,
    width: usize,
}

impl<S: Scalar> Tableau<S> {
    fn rhs(&self, i: usize) -> &S {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let p = self.rows[r][e].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.clone() / p.clone();
                }
            }
        }
        let nz: Vec<usize> = (0..=self.width)
            .filter(|&k| !self.rows[r][k].is_zero())
            .collect();
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<S>| {
            let f = row[e].clone();
            if f.is_zero() {
                return;
            }
            for &k in &nz {
                row[k] = row[k].clone() - f.clone() * pivot_row[k].clone();
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.d);
        self.basis[r] = e;
    }

    /// Bland's rule iterations over the allowed columns.
    fn optimize(&mut self, allowed: &[bool]) -> Result<(), LpError> {
        loop {
            let Some(e) = (0..self.width).find(|&j| allowed[j] && self.d[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, e);
        }
    }

    fn reset_costs(&mut self, costs: &[S]) {
        let mut d: Vec<S> = costs.to_vec();
        d.push(S::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (k, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    d[k] = d[k].clone() - cb.clone() * v.clone();
                }
            }
        }
        self.d = d;
    }
}

/// Optimal basic feasible solution, computed exactly. Deterministic for a
/// fixed program.
pub fn solve_extreme_point<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>, LpError> {
    lp.validate()?;
    if lp.variables.iter().any(|v| v.lo > v.hi) {
        return Err(LpError::Infeasible);
    }
    let free: Vec<usize> = (0..lp.variables.len())
        .filter(|&j| lp.variables[j].lo < lp.variables[j].hi)
        .collect();
    let mut col_of = vec![usize::MAX; lp.variables.len()];
    for (k, &j) in free.iter().enumerate() {
        col_of[j] = k;
    }
    let nf = free.len();

    // rows over the shifted free variables: (coefficients, relation, rhs, label)
    let mut raw: Vec<(Vec<S>, Relation, S, String)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![S::zero(); nf];
        let mut rhs = c.rhs.clone();
        for (j, v) in &c.coeffs {
            rhs = rhs - v.clone() * lp.variables[*j].lo.clone();
            if col_of[*j] != usize::MAX {
                a[col_of[*j]] = a[col_of[*j]].clone() + v.clone();
            }
        }
        raw.push((a, c.relation, rhs, c.label.clone()));
    }
    for (k, &j) in free.iter().enumerate() {
        let v = &lp.variables[j];
        let mut a = vec![S::zero(); nf];
        a[k] = S::one();
        raw.push((
            a,
            Relation::Le,
            v.hi.clone() - v.lo.clone(),
            format!("bound[{}]", v.name),
        ));
    }
    for row in raw.iter_mut() {
        if row.2.is_negative() {
            for v in row.0.iter_mut() {
                *v = -v.clone();
            }
            row.2 = -row.2.clone();
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = raw.len();
    let mut kinds: Vec<ColKind> = (0..nf).map(ColKind::Structural).collect();
    let mut slack_col = vec![usize::MAX; m];
    for (i, row) in raw.iter().enumerate() {
        if row.1 != Relation::Eq {
            slack_col[i] = kinds.len();
            kinds.push(ColKind::Slack(i));
        }
    }
    let mut art_col = vec![usize::MAX; m];
    for (i, row) in raw.iter().enumerate() {
        if row.1 != Relation::Le {
            art_col[i] = kinds.len();
            kinds.push(ColKind::Artificial);
        }
    }
    let width = kinds.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for (i, (a, rel, rhs, _)) in raw.iter().enumerate() {
        let mut row = vec![S::zero(); width + 1];
        row[..nf].clone_from_slice(a);
        match rel {
            Relation::Le => {
                row[slack_col[i]] = S::one();
                basis.push(slack_col[i]);
            }
            Relation::Ge => {
                row[slack_col[i]] = -S::one();
                row[art_col[i]] = S::one();
                basis.push(art_col[i]);
            }
            Relation::Eq => {
                row[art_col[i]] = S::one();
                basis.push(art_col[i]);
            }
        }
        row[width] = rhs.clone();
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis,
        d: Vec::new(),
        width,
    };

    let is_art: Vec<bool> = kinds.iter().map(|k| *k == ColKind::Artificial).collect();
    if is_art.iter().any(|&a| a) {
        let costs: Vec<S> = is_art
            .iter()
            .map(|&a| if a { S::one() } else { S::zero() })
            .collect();
        tab.reset_costs(&costs);
        tab.optimize(&vec![true; width])?;
        if tab.d[width].is_negative() {
            return Err(LpError::Infeasible);
        }
        // drive zero-level artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art[tab.basis[i]] {
                match (0..width).find(|&j| !is_art[j] && !tab.rows[i][j].is_zero()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut costs = vec![S::zero(); width];
    for (j, c) in &lp.objective {
        let k = col_of[*j];
        if k != usize::MAX {
            let c = match lp.sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c.clone(),
            };
            costs[k] = costs[k].clone() + c;
        }
    }
    tab.reset_costs(&costs);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    tab.optimize(&allowed)?;

    let mut shifted = vec![S::zero(); nf];
    for (i, &b) in tab.basis.iter().enumerate() {
        if let ColKind::Structural(k) = kinds[b] {
            shifted[k] = tab.rhs(i).clone();
        }
    }
    let assignment: Vec<S> = (0..lp.variables.len())
        .map(|j| {
            let lo = lp.variables[j].lo.clone();
            if col_of[j] == usize::MAX {
                lo
            } else {
                lo + shifted[col_of[j]].clone()
            }
        })
        .collect();
    let basis = tab
        .basis
        .iter()
        .map(|&b| match kinds[b] {
            ColKind::Structural(k) => lp.variables[free[k]].name.clone(),
            ColKind::Slack(i) => format!("slack[{}]", raw[i].3),
            ColKind::Artificial => "artificial".to_string(),
        })
        .collect();
    Ok(LpSolution {
        objective_value: lp.objective_value(&assignment),
        assignment,
        is_extreme_point: true,
        basis,
    })
}
