//! Exact rational helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(q: &BigRational) -> f64 {
    // `BigRational::to_f64` loses nothing for the sizes used here but may
    // return None on huge numerators; fall back to a scaled division.
    q.to_f64().unwrap_or_else(|| {
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
        let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// `r! / r^r`, the blowup density of a single edge.
pub fn edge_density(r: usize) -> BigRational {
    let mut num = BigInt::one();
    for i in 2..=r {
        num *= BigInt::from(i);
    }
    let den = BigInt::from(r).pow(r as u32);
    BigRational::new(num, den)
}

/// Rational bounds `lo < e < hi` from the partial sums of `Σ 1/j!`.
pub fn e_bounds(terms: usize) -> (BigRational, BigRational) {
    let terms = terms.max(2);
    let mut sum = BigRational::zero();
    let mut fact = BigInt::one();
    for j in 0..=terms {
        if j > 0 {
            fact *= BigInt::from(j);
        }
        sum += BigRational::new(BigInt::one(), fact.clone());
    }
    // tail after the `terms` term is below 1 / (terms! * terms)
    let tail = BigRational::new(BigInt::one(), fact * BigInt::from(terms));
    let hi = &sum + tail;
    (sum, hi)
}

/// `⌊r / e⌋`, exactly.
pub fn floor_r_over_e(r: usize) -> usize {
    let mut terms = 8;
    loop {
        let (lo, hi) = e_bounds(terms);
        let rr = int(r as i64);
        let a = (&rr / &hi).floor();
        let b = (&rr / &lo).floor();
        if a == b {
            return a.to_integer().to_usize().expect("small quotient");
        }
        terms *= 2;
    }
}

/// `⌈r / e⌉`, exactly. For `r >= 1` this is `⌊r / e⌋ + 1` as `r / e` is irrational.
pub fn ceil_r_over_e(r: usize) -> usize {
    if r == 0 {
        0
    } else {
        floor_r_over_e(r) + 1
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// via the continued fraction convergents and the final semiconvergent.
pub fn rationalize(x: f64, max_den: u64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::Numerical(format!("cannot rationalize {x}")));
    }
    if max_den == 0 {
        return Err(Error::InvalidArgument("max_den must be positive".into()));
    }
    let exact = BigRational::from_float(x).ok_or_else(|| Error::Numerical(format!("cannot rationalize {x}")))?;
    let bound = BigInt::from(max_den);
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    loop {
        let a = rest.floor().to_integer();
        let q2 = &a * &q1 + &q0;
        if q2 > bound {
            // semiconvergent with the largest admissible partial quotient
            let m = (&bound - &q0).div_floor(&q1);
            let ps = &m * &p1 + &p0;
            let qs = &m * &q1 + &q0;
            let semi = BigRational::new(ps, qs);
            let conv = BigRational::new(p1, q1);
            let de_semi = (&semi - &exact).abs();
            let de_conv = (&conv - &exact).abs();
            return Ok(if de_semi < de_conv { semi } else { conv });
        }
        let p2 = &a * &p1 + &p0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return Ok(BigRational::new(p1, q1));
        }
        rest = frac.recip();
    }
}

/// Rounds a nonnegative vector to rationals with bounded denominators and
/// renormalizes so the entries sum to exactly one.
pub fn rationalize_simplex(x: &[f64], max_den: u64) -> Result<Vec<BigRational>> {
    let mut q: Vec<BigRational> = x
        .iter()
        .map(|&v| rationalize(v.max(0.0), max_den))
        .collect::<Result<_>>()?;
    let total: BigRational = q.iter().fold(BigRational::zero(), |a, b| a + b);
    if total.is_zero() {
        return Err(Error::Numerical("vector rounds to zero".into()));
    }
    for v in q.iter_mut() {
        *v = &*v / &total;
    }
    Ok(q)
}
