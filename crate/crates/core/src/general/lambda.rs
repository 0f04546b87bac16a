//! Guesses of the leader-uninterdicted mass λ and the follower's mass λ̄
//! per medium subgroup.

use crate::scalar::{from_usize, int, pow, Scalar};

/// One (λ, λ̄) pair per subgroup, subgroups in flat order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaGuess<S> {
    pub pairs: Vec<(S, S)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaStream<S> {
    pub guesses: Vec<LambdaGuess<S>>,
    pub truncated: bool,
}

/// ε^{s_B+4}, the λ = 0 threshold.
pub fn lambda_floor<S: Scalar>(eps: &S, s_b: usize) -> S {
    pow(eps, s_b as u32 + 4)
}

/// 2s_B/ε, the top grid value.
pub fn lambda_top<S: Scalar>(eps: &S, s_b: usize) -> S {
    int::<S>(2) * from_usize::<S>(s_b) / eps.clone()
}

/// {0} ∪ {ε^{s_B+4}(1+ε)^t < 2s_B/ε} ∪ {2s_B/ε}, ascending.
pub fn lambda_grid<S: Scalar>(eps: &S, s_b: usize) -> Vec<S> {
    let top = lambda_top(eps, s_b);
    let growth = S::one() + eps.clone();
    let mut grid = vec![S::zero()];
    let mut v = lambda_floor(eps, s_b);
    while v < top {
        grid.push(v.clone());
        v = v * growth.clone();
    }
    grid.push(top);
    grid
}

/// Odometer over per-subgroup grids: for each subgroup every λ in its grid
/// paired with every λ̄ <= λ from the same grid, last subgroup fastest.
/// Stops after `budget` guesses and flags truncation.
pub fn enumerate_lambda_guesses<S: Scalar>(
    grids: &[Vec<S>],
    budget: Option<usize>,
) -> LambdaStream<S> {
    let options: Vec<Vec<(S, S)>> = grids
        .iter()
        .map(|g| {
            let mut pairs = Vec::new();
            for (i, lam) in g.iter().enumerate() {
                for bar in &g[..=i] {
                    pairs.push((lam.clone(), bar.clone()));
                }
            }
            pairs
        })
        .collect();
    if options.iter().any(|o| o.is_empty()) {
        return LambdaStream {
            guesses: Vec::new(),
            truncated: false,
        };
    }
    let mut guesses = Vec::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        if budget.is_some_and(|b| guesses.len() >= b) {
            return LambdaStream {
                guesses,
                truncated: true,
            };
        }
        guesses.push(LambdaGuess {
            pairs: idx
                .iter()
                .zip(&options)
                .map(|(&i, o)| o[i].clone())
                .collect(),
        });
        let mut pos = options.len();
        loop {
            if pos == 0 {
                return LambdaStream {
                    guesses,
                    truncated: false,
                };
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// The λ grid restricted to values the subgroup's total mass can reach.
pub fn reachable_grid<S: Scalar>(grid: &[S], total_mass: &S) -> Vec<S> {
    grid.iter().filter(|v| *v <= total_mass).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn grid_for_half() {
        // s_B = 2, ε = 1/2: 1/64 (3/2)^t < 8 for t = 0..=15
        let g = lambda_grid(&r(1, 2), 2);
        assert_eq!(g.len(), 1 + 16 + 1);
        assert_eq!(g[1], r(1, 64));
        assert_eq!(*g.last().unwrap(), r(8, 1));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn stream_counts() {
        let s = enumerate_lambda_guesses::<Rational>(&[], None);
        assert_eq!(s.guesses, vec![LambdaGuess { pairs: vec![] }]);
        let grid = vec![r(0, 1), r(1, 2), r(1, 1)];
        let s = enumerate_lambda_guesses(std::slice::from_ref(&grid), None);
        // λ = 0: 1, λ = 1/2: 2, λ = 1: 3
        assert_eq!(s.guesses.len(), 6);
        assert!(s.guesses.iter().all(|g| g.pairs[0].1 <= g.pairs[0].0));
        let two = enumerate_lambda_guesses(&[grid.clone(), grid.clone()], None);
        assert_eq!(two.guesses.len(), 36);
        let capped = enumerate_lambda_guesses(&[grid.clone(), grid], Some(10));
        assert!(capped.truncated);
        assert_eq!(capped.guesses[..], two.guesses[..10]);
    }

    #[test]
    fn reachable_prunes_top() {
        let g = lambda_grid(&r(1, 2), 2);
        let pruned = reachable_grid(&g, &r(1, 10));
        assert_eq!(pruned.last().unwrap(), &r(81, 1024));
    }
}
