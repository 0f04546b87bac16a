//! Exact ordered-field abstraction used by every solver.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An exact ordered field. Floats do not qualify: they are not `Ord` and
/// the solvers compare values without tolerances.
pub trait Scalar:
    Num
    + Signed
    + Ord
    + Clone
    + Hash
    + Debug
    + Display
    + FromStr
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Ord
        + Clone
        + Hash
        + Debug
        + Display
        + FromStr
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// `num / den` as a scalar. Panics on a zero denominator.
pub fn ratio<S: Scalar>(num: i64, den: i64) -> S {
    assert!(den != 0, "zero denominator");
    S::from_i64(num).expect("i64 fits") / S::from_i64(den).expect("i64 fits")
}

pub fn int<S: Scalar>(v: i64) -> S {
    S::from_i64(v).expect("i64 fits")
}

pub fn from_usize<S: Scalar>(v: usize) -> S {
    S::from_usize(v).expect("usize fits")
}

/// Parse "p/q", an integer, or a plain decimal such as "0.25".
pub fn parse<S: Scalar>(text: &str) -> Option<S> {
    let t = text.trim();
    match t.split_once('/') {
        Some((n, d)) => {
            let n: S = n.trim().parse().ok()?;
            let d: S = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(n / d)
            }
        }
        None => match t.split_once('.') {
            Some((whole, frac)) if !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit()) => {
                let negative = whole.starts_with('-');
                let whole: S = match whole.trim_start_matches(['-', '+']) {
                    "" => S::zero(),
                    w if w.bytes().all(|b| b.is_ascii_digit()) => w.parse().ok()?,
                    _ => return None,
                };
                let scale = pow(&int::<S>(10), frac.len() as u32);
                let value = whole + frac.parse::<S>().ok()? / scale;
                Some(if negative { -value } else { value })
            }
            Some(_) => None,
            None => t.parse().ok(),
        },
    }
}

pub fn pow<S: Scalar>(base: &S, exp: u32) -> S {
    let mut acc = S::one();
    let mut sq = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * sq.clone();
        }
        e >>= 1;
        if e > 0 {
            sq = sq.clone() * sq;
        }
    }
    acc
}

/// Largest h >= 0 with `keep(unit * growth^h)`. `keep` must hold for small
/// h and fail from some point on. A floating-point estimate of the answer is
/// checked and corrected exactly.
fn last_exponent<S: Scalar>(unit: &S, growth: &S, value: &S, keep: impl Fn(&S) -> bool) -> u32 {
    let estimate = match ((value.clone() / unit.clone()).to_f64(), growth.to_f64()) {
        (Some(q), Some(g)) if q.is_finite() && q > 0.0 && g > 1.0 => {
            (q.ln() / g.ln()).floor().max(0.0) as u32
        }
        _ => 0,
    };
    let mut h = estimate;
    let mut cur = unit.clone() * pow(growth, h);
    while h > 0 && !keep(&cur) {
        h -= 1;
        cur = cur / growth.clone();
    }
    loop {
        let next = cur.clone() * growth.clone();
        if !keep(&next) {
            return h;
        }
        cur = next;
        h += 1;
    }
}

/// Largest h >= 0 with `unit * growth^h <= value`. Requires `unit <= value`
/// and `growth > 1`.
pub fn floor_grid_exponent<S: Scalar>(unit: &S, growth: &S, value: &S) -> u32 {
    debug_assert!(unit <= value && *growth > S::one());
    last_exponent(unit, growth, value, |v| v <= value)
}

/// Smallest h >= 0 with `unit * growth^h >= value`.
pub fn ceil_grid_exponent<S: Scalar>(unit: &S, growth: &S, value: &S) -> u32 {
    debug_assert!(*growth > S::one() && unit.is_positive());
    if unit >= value {
        return 0;
    }
    last_exponent(unit, growth, value, |v| v < value) + 1
}

/// Smallest integer >= value, for positive values.
pub fn ceil_to_usize<S: Scalar>(value: &S) -> usize {
    if !value.is_positive() {
        return 0;
    }
    let mut hi = 1usize;
    while from_usize::<S>(hi) < *value {
        hi *= 2;
    }
    // smallest k in (hi/2, hi] with k >= value
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if from_usize::<S>(mid) >= *value {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn sum<'a, S: Scalar + 'a>(values: impl IntoIterator<Item = &'a S>) -> S {
    values.into_iter().fold(S::zero(), |acc, v| acc + v.clone())
}

pub fn max_of<'a, S: Scalar + 'a>(values: impl IntoIterator<Item = &'a S>) -> S {
    values
        .into_iter()
        .fold(S::zero(), |acc, v| if *v > acc { v.clone() } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::{BigRational, Ratio};

    #[test]
    fn parse_forms() {
        let a: BigRational = parse("3/4").unwrap();
        assert_eq!(a, ratio(3, 4));
        let b: BigRational = parse("7").unwrap();
        assert_eq!(b, int(7));
        assert!(parse::<BigRational>("1/0").is_none());
        assert!(parse::<BigRational>("x").is_none());
        let c: Ratio<i64> = parse("6/8").unwrap();
        assert_eq!(parse::<BigRational>("0.25"), parse("1/4"));
        assert_eq!(parse::<BigRational>("-1.5"), parse("-3/2"));
        assert_eq!(parse::<BigRational>(".5"), parse("1/2"));
        assert_eq!(parse::<BigRational>("1."), None);
        assert_eq!(parse::<BigRational>("1.x"), None);
        assert_eq!(c, Ratio::new(3, 4));
    }

    #[test]
    fn grid_exponents() {
        // 1.1^41 <= 50 < 1.1^42
        let h = floor_grid_exponent::<BigRational>(&ratio(1, 100), &ratio(11, 10), &ratio(1, 2));
        assert_eq!(h, 41);
        let h = ceil_grid_exponent::<BigRational>(&ratio(1, 8), &ratio(3, 2), &ratio(1, 5));
        assert_eq!(h, 2);
        assert_eq!(
            ceil_grid_exponent::<BigRational>(&ratio(1, 8), &ratio(3, 2), &ratio(1, 8)),
            0
        );
        assert_eq!(
            ceil_grid_exponent::<BigRational>(&ratio(1, 8), &ratio(3, 2), &ratio(3, 16)),
            1
        );
        assert_eq!(
            floor_grid_exponent::<BigRational>(&ratio(1, 8), &ratio(3, 2), &ratio(1, 8)),
            0
        );
        assert_eq!(pow::<BigRational>(&ratio(3, 2), 5), ratio(243, 32));
        for v in 1..200 {
            let value: BigRational = ratio(v, 7);
            let unit: BigRational = ratio(1, 9);
            let g: BigRational = ratio(5, 4);
            let h = floor_grid_exponent(&unit, &g, &value);
            assert!(unit.clone() * pow(&g, h) <= value && unit.clone() * pow(&g, h + 1) > value);
            let c = ceil_grid_exponent(&unit, &g, &value);
            assert!(unit.clone() * pow(&g, c) >= value);
            assert!(c == 0 || unit.clone() * pow(&g, c - 1) < value);
        }
        assert_eq!(ceil_to_usize::<BigRational>(&ratio(5, 2)), 3);
        assert_eq!(ceil_to_usize::<BigRational>(&int(4)), 4);
        assert_eq!(ceil_to_usize::<BigRational>(&ratio(1, 3)), 1);
        assert_eq!(ceil_to_usize::<BigRational>(&int(0)), 0);
        for v in 1..300 {
            let x: BigRational = ratio(v, 7);
            assert_eq!(ceil_to_usize(&x), ((v + 6) / 7) as usize);
        }
    }
}
