//! Exact integer and rational helpers, including fraction-free matrix inversion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `base^exp` for a possibly negative exponent.
pub fn pow_rational(base: &BigRational, exp: i64) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..exp.unsigned_abs() {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Lossy conversion used only at comparison boundaries.
pub fn to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Scale numerator and denominator down together when they overflow f64.
    let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
    let num = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let den = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    num / den
}

/// A dense square matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    pub side: usize,
    pub entries: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn identity(side: usize) -> Self {
        let mut entries = vec![BigRational::zero(); side * side];
        for i in 0..side {
            entries[i * side + i] = BigRational::one();
        }
        RationalMatrix { side, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.side + j]
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.side != other.side {
            return Err(Error::SizeMismatch(self.side, other.side));
        }
        let n = self.side;
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(RationalMatrix { side: n, entries })
    }

    pub fn is_identity(&self) -> bool {
        (0..self.side).all(|i| {
            (0..self.side).all(|j| {
                let e = self.get(i, j);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }
}

/// Inverse of an integer matrix by fraction-free Gauss-Jordan elimination.
///
/// Every intermediate entry is a minor of the augmented matrix, so the
/// division by the previous pivot is exact. At the end the left block is
/// `det·I` and the right block is `det·A⁻¹`.
pub fn bareiss_inverse(side: usize, a: &[BigInt]) -> Result<RationalMatrix> {
    if a.len() != side * side {
        return Err(Error::SizeMismatch(a.len(), side * side));
    }
    let width = 2 * side;
    let mut m: Vec<BigInt> = vec![BigInt::zero(); side * width];
    for i in 0..side {
        for j in 0..side {
            m[i * width + j] = a[i * side + j].clone();
        }
        m[i * width + side + i] = BigInt::one();
    }
    let mut prev = BigInt::one();
    for k in 0..side {
        let pivot_row = (k..side)
            .find(|&r| !m[r * width + k].is_zero())
            .ok_or_else(|| Error::Numerical(format!("matrix is singular at column {k}")))?;
        if pivot_row != k {
            for j in 0..width {
                m.swap(k * width + j, pivot_row * width + j);
            }
        }
        let pivot = m[k * width + k].clone();
        for i in 0..side {
            if i == k {
                continue;
            }
            let factor = m[i * width + k].clone();
            for j in 0..width {
                if j == k {
                    continue;
                }
                let val = &pivot * &m[i * width + j] - &factor * &m[k * width + j];
                let (q, r) = val.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division not exact");
                m[i * width + j] = q;
            }
            m[i * width + k] = BigInt::zero();
        }
        prev = pivot;
    }
    // Every diagonal entry now equals det(A).
    let mut entries = Vec::with_capacity(side * side);
    for i in 0..side {
        let diag = m[i * width + i].clone();
        if diag.is_zero() {
            return Err(Error::Numerical("zero diagonal after elimination".into()));
        }
        for j in 0..side {
            entries.push(BigRational::new(m[i * width + side + j].clone(), diag.clone()));
        }
    }
    Ok(RationalMatrix { side, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_and_factorials() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(6), BigInt::from(720));
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(2, 3), BigInt::zero());
        assert_eq!(binomial(40, 20), BigInt::from(137846528820u64));
    }

    #[test]
    fn bareiss_inverts_small_matrix() {
        let a: Vec<BigInt> = [2, 1, 0, 1, 3, 1, 0, 1, 4].iter().map(|&v| BigInt::from(v)).collect();
        let inv = bareiss_inverse(3, &a).unwrap();
        let am = RationalMatrix {
            side: 3,
            entries: a.iter().map(|v| from_int(v.clone())).collect(),
        };
        assert!(am.mul(&inv).unwrap().is_identity());
    }

    #[test]
    fn bareiss_needs_pivoting() {
        let a: Vec<BigInt> = [0, 1, 1, 0].iter().map(|&v| BigInt::from(v)).collect();
        let inv = bareiss_inverse(2, &a).unwrap();
        assert_eq!(*inv.get(0, 1), BigRational::one());
        assert_eq!(*inv.get(1, 0), BigRational::one());
    }

    #[test]
    fn bareiss_reports_singular() {
        let a: Vec<BigInt> = [1, 2, 2, 4].iter().map(|&v| BigInt::from(v)).collect();
        assert!(bareiss_inverse(2, &a).is_err());
    }

    #[test]
    fn negative_powers() {
        let half = rational(1, 2);
        assert_eq!(pow_rational(&half, -3), from_int(8));
        assert_eq!(pow_rational(&half, 0), BigRational::one());
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigRational::new(BigInt::from(3) << 2000, BigInt::from(2) << 2000);
        assert!((to_f64(&big) - 1.5).abs() < 1e-12);
    }
}
