use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::{int, pow, ratio, Scalar};

use super::{Instance, InstanceError, Item};

/// Entries are drawn as k / denominator with k in 1..=max_numerator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValueGrid {
    pub max_numerator: u32,
    pub denominator: u32,
}

impl Default for ValueGrid {
    fn default() -> Self {
        ValueGrid {
            max_numerator: 10,
            denominator: 4,
        }
    }
}

/// Deterministic random instance. Budgets sit between the largest single
/// entry and roughly two fifths of the column total, so both players face
/// real choices.
pub fn gen_random<S: Scalar>(
    n: usize,
    s_a: usize,
    s_b: usize,
    grid: ValueGrid,
    seed: u64,
) -> Instance<S> {
    assert!(
        grid.max_numerator >= 1 && grid.denominator >= 1,
        "grid must be nonempty"
    );
    assert!(s_a >= 1 && s_b >= 1, "dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = grid.denominator as i64;
    let draw = |rng: &mut ChaCha8Rng| rng.gen_range(1..=grid.max_numerator) as i64;

    let mut profits = Vec::with_capacity(n);
    let mut costs = vec![Vec::with_capacity(s_a); n];
    let mut weights = vec![Vec::with_capacity(s_b); n];
    for j in 0..n {
        profits.push(draw(&mut rng));
        for _ in 0..s_a {
            costs[j].push(draw(&mut rng));
        }
        for _ in 0..s_b {
            weights[j].push(draw(&mut rng));
        }
    }
    let budget = |rng: &mut ChaCha8Rng, column: &dyn Fn(usize) -> i64| -> i64 {
        if n == 0 {
            return 1;
        }
        let max = (0..n).map(column).max().unwrap();
        let total: i64 = (0..n).map(column).sum();
        let hi = (total * 2 / 5).max(max);
        rng.gen_range(max..=hi)
    };
    let a: Vec<S> = (0..s_a)
        .map(|i| ratio(budget(&mut rng, &|j| costs[j][i]), den))
        .collect();
    let b: Vec<S> = (0..s_b)
        .map(|i| ratio(budget(&mut rng, &|j| weights[j][i]), den))
        .collect();
    let items = (0..n)
        .map(|j| {
            Item::new(
                ratio(profits[j], den),
                costs[j].iter().map(|&c| ratio(c, den)).collect(),
                weights[j].iter().map(|&w| ratio(w, den)).collect(),
            )
        })
        .collect();
    Instance::new(a, b, items).expect("generated instance is valid")
}

/// A 3-hitting-set instance: pick at most k elements meeting every set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HittingSetInstance {
    pub n_elements: usize,
    /// Elements are 1-based.
    pub sets: Vec<[usize; 3]>,
    pub k: usize,
}

impl HittingSetInstance {
    pub fn new(n_elements: usize, sets: Vec<[usize; 3]>, k: usize) -> Result<Self, InstanceError> {
        let hs = HittingSetInstance {
            n_elements,
            sets,
            k,
        };
        hs.validate()?;
        Ok(hs)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: String| Err(InstanceError::InvalidHittingSet(m));
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        let mut covered = vec![false; self.n_elements + 1];
        for s in &self.sets {
            if s.iter().any(|&e| e == 0 || e > self.n_elements) {
                return bad(format!(
                    "set {s:?} has an element outside 1..={}",
                    self.n_elements
                ));
            }
            if s[0] == s[1] || s[0] == s[2] || s[1] == s[2] {
                return bad(format!("set {s:?} repeats an element"));
            }
            for &e in s {
                covered[e] = true;
            }
        }
        if covered[1..].iter().any(|c| !c) {
            return bad("union of sets is not the ground set".into());
        }
        Ok(())
    }

    /// Exhaustive check for a hitting set of size at most k.
    pub fn has_hitting_set(&self) -> bool {
        let n = self.n_elements;
        (0u64..1 << n).any(|mask| {
            mask.count_ones() as usize <= self.k
                && self
                    .sets
                    .iter()
                    .all(|s| s.iter().any(|&e| mask >> (e - 1) & 1 == 1))
        })
    }

    /// Parse one set per line, three whitespace-separated elements; '#' starts a comment.
    pub fn parse_sets(text: &str) -> Result<Vec<[usize; 3]>, InstanceError> {
        let mut sets = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<usize> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse()
                        .map_err(|_| InstanceError::InvalidHittingSet(format!("bad element {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            if nums.len() != 3 {
                return Err(InstanceError::InvalidHittingSet(format!(
                    "line {line:?} does not have 3 elements"
                )));
            }
            sets.push([nums[0], nums[1], nums[2]]);
        }
        Ok(sets)
    }
}

/// The hardness reduction: element items (cost 1, weight (10^i, Q-10^i)) and
/// un-interdictable set items, with E = 10 * sum 10^i and Q = 10E.
pub fn gen_3hs_reduction<S: Scalar>(hs: &HittingSetInstance) -> Result<Instance<S>, InstanceError> {
    hs.validate()?;
    let ten: S = int(10);
    let p10 = |i: usize| pow(&ten, i as u32);
    let e = (1..=hs.n_elements).fold(S::zero(), |acc, i| acc + p10(i)) * ten.clone();
    let q = e.clone() * ten.clone();
    let mut items = Vec::with_capacity(hs.n_elements + hs.sets.len());
    for i in 1..=hs.n_elements {
        items.push(Item::new(
            S::one(),
            vec![S::one()],
            vec![p10(i), q.clone() - p10(i)],
        ));
    }
    let set_cost: S = int(hs.k as i64 + 1);
    for s in &hs.sets {
        let hit = p10(s[0]) + p10(s[1]) + p10(s[2]);
        items.push(Item::new(
            S::one(),
            vec![set_cost.clone()],
            vec![e.clone() - hit.clone(), q.clone() - e.clone() + hit],
        ));
    }
    let four: S = int(4);
    Instance::new(vec![int(hs.k as i64)], vec![e.clone(), four * q - e], items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn random_is_deterministic() {
        let g = ValueGrid::default();
        assert_eq!(gen_random::<Rational>(0, 1, 1, g, 3).n(), 0);
        assert_eq!(
            gen_random::<Rational>(8, 2, 3, g, 7),
            gen_random::<Rational>(8, 2, 3, g, 7)
        );
        let differ = (0..100u64)
            .filter(|&s| {
                gen_random::<Rational>(6, 1, 1, g, s) != gen_random::<Rational>(6, 1, 1, g, s + 1)
            })
            .count();
        assert!(differ >= 99);
    }

    #[test]
    fn random_budgets_admit_every_single_item() {
        for seed in 0..50 {
            let inst = gen_random::<Rational>(7, 2, 2, ValueGrid::default(), seed);
            for j in 0..inst.n() {
                assert!(inst.leader_fits_alone(j));
                assert!(inst.follower_fits_alone(j));
            }
        }
    }

    #[test]
    fn reduction_example() {
        let hs = HittingSetInstance::new(3, vec![[1, 2, 3]], 1).unwrap();
        let inst = gen_3hs_reduction::<Rational>(&hs).unwrap();
        assert_eq!(inst.follower_budget()[0], int(11100));
        assert_eq!(inst.follower_budget()[1], int(4 * 111000 - 11100));
        assert_eq!(inst.item(0).weight, vec![int(10), int(110990)]);
        assert_eq!(inst.item(3).weight, vec![int(9990), int(101010)]);
        assert_eq!(inst.item(3).cost, vec![int(2)]);
        for it in inst.items() {
            assert_eq!(
                it.weight[0].clone() + it.weight[1].clone(),
                int::<Rational>(111000)
            );
        }
    }

    #[test]
    fn hitting_set_validation() {
        assert!(HittingSetInstance::new(4, vec![[1, 2, 3]], 1).is_err());
        assert!(HittingSetInstance::new(3, vec![[1, 1, 3]], 1).is_err());
        assert!(HittingSetInstance::new(3, vec![[1, 2, 3]], 0).is_err());
        let hs = HittingSetInstance::new(6, vec![[1, 2, 3], [4, 5, 6]], 1).unwrap();
        assert!(!hs.has_hitting_set());
        let hs = HittingSetInstance { k: 2, ..hs };
        assert!(hs.has_hitting_set());
        assert_eq!(
            HittingSetInstance::parse_sets("1 2 3\n# c\n4,5,6\n").unwrap(),
            vec![[1, 2, 3], [4, 5, 6]]
        );
    }
}
