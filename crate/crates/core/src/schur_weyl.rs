//! Integer partitions, Schur-Weyl irrep dimensions and the closed-form
//! spectrum of the permutation Gram matrix.
//!
//! For `λ ⊢ n` with at most `d` rows, the `U_d` irrep `Q_λ^d` and the `S_n`
//! irrep `P_λ` have dimensions given by products over the shifted parts
//! `λ̃_i = λ_i + d − i`. Their ratio `n!·dim Q / dim P` collapses to the
//! product of `d + content` over the cells of `λ`, which is also `dⁿ` times
//! the Gram eigenvalue attached to `λ`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::exact::{binomial, factorial, from_int, rational};
use crate::{Error, Result};

/// A partition `λ_1 ≥ λ_2 ≥ … > 0` of `n`, viewed inside `Par(n, d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegerPartition {
    parts: Vec<usize>,
    d: usize,
}

impl IntegerPartition {
    /// Builds `λ` from its parts (zeros allowed, any order is rejected unless
    /// weakly decreasing); `d` is the row budget.
    pub fn new(parts: &[usize], d: usize) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!("{parts:?} is not weakly decreasing")));
        }
        let parts: Vec<usize> = parts.iter().copied().filter(|&p| p > 0).collect();
        if parts.len() > d {
            return Err(Error::InvalidPartition { parts, d });
        }
        Ok(IntegerPartition { parts, d })
    }

    /// Nonzero parts.
    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    /// Parts padded with zeros to length `d`.
    pub fn padded(&self) -> Vec<usize> {
        let mut p = self.parts.clone();
        p.resize(self.d.max(p.len()), 0);
        p
    }

    /// `λ̃_i = λ_i + d − i`; strictly decreasing.
    pub fn shifted(&self) -> Vec<usize> {
        let padded = self.padded();
        let d = padded.len();
        padded
            .iter()
            .enumerate()
            .map(|(i, &p)| p + d - 1 - i)
            .collect()
    }

    /// Cells `(i, j)` with `1 ≤ j ≤ λ_i`, 1-based, row by row.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &len)| (1..=len).map(move |j| (i + 1, j)))
            .collect()
    }

    /// Contents `j − i` of all cells.
    pub fn contents(&self) -> Vec<i64> {
        self.cells()
            .into_iter()
            .map(|(i, j)| j as i64 - i as i64)
            .collect()
    }
}

impl fmt::Display for IntegerPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All partitions of `n` with at most `d` rows, reverse-lexicographic.
pub fn partitions(n: usize, d: usize) -> Vec<IntegerPartition> {
    fn rec(remaining: usize, max_part: usize, rows_left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        if rows_left == 0 {
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            current.push(part);
            rec(remaining - part, part, rows_left - 1, current, out);
            current.pop();
        }
    }
    let mut raw = Vec::new();
    rec(n, n, d, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|parts| IntegerPartition { parts, d })
        .collect()
}

fn vandermonde(shifted: &[usize]) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..shifted.len() {
        for j in i + 1..shifted.len() {
            acc *= BigInt::from(shifted[i] - shifted[j]);
        }
    }
    acc
}

/// Dimension of the `U_d` irrep `Q_λ^d`.
pub fn dim_q(lambda: &IntegerPartition, d: usize) -> Result<BigInt> {
    if lambda.rows() > d {
        return Err(Error::InvalidPartition {
            parts: lambda.parts.clone(),
            d,
        });
    }
    let at_d = IntegerPartition {
        parts: lambda.parts.clone(),
        d,
    };
    let denom = (1..d).fold(BigInt::one(), |acc, m| acc * factorial(m));
    Ok(vandermonde(&at_d.shifted()) / denom)
}

/// Dimension of the `S_n` irrep `P_λ`.
pub fn dim_p(lambda: &IntegerPartition) -> BigInt {
    let shifted = IntegerPartition {
        parts: lambda.parts.clone(),
        d: lambda.rows(),
    }
    .shifted();
    let denom = shifted
        .iter()
        .fold(BigInt::one(), |acc, &s| acc * factorial(s));
    factorial(lambda.n()) * vandermonde(&shifted) / denom
}

/// `∏_{(i,j)∈λ} (d − i + j)`, which equals `n!·dim Q_λ^d / dim P_λ`.
pub fn dim_ratio(lambda: &IntegerPartition, d: usize) -> Result<BigInt> {
    if lambda.rows() > d {
        return Err(Error::InvalidPartition {
            parts: lambda.parts.clone(),
            d,
        });
    }
    Ok(lambda
        .contents()
        .into_iter()
        .fold(BigInt::one(), |acc, c| acc * BigInt::from(d as i64 + c)))
}

/// `∏_{(i,j)∈λ} (1 + (j − i)/d)`.
pub fn content_product(lambda: &IntegerPartition, d: usize) -> BigRational {
    let d = d as i64;
    lambda
        .contents()
        .into_iter()
        .fold(BigRational::one(), |acc, c| acc * rational(d + c, d))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumEntry {
    pub partition: IntegerPartition,
    pub eigenvalue: BigRational,
    pub multiplicity: BigInt,
}

/// Exact spectrum of `G^(n,d)`: one entry per `λ ∈ Par(n, d)` plus the kernel
/// left by partitions with more than `d` rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSpectrum {
    pub n: usize,
    pub d: usize,
    pub entries: Vec<SpectrumEntry>,
    pub kernel_dimension: BigInt,
}

impl ExactSpectrum {
    pub fn total_multiplicity(&self) -> BigInt {
        self.entries
            .iter()
            .map(|e| e.multiplicity.clone())
            .sum::<BigInt>()
            + &self.kernel_dimension
    }

    /// `Σ eigenvalue · multiplicity`.
    pub fn trace(&self) -> BigRational {
        self.entries
            .iter()
            .map(|e| &e.eigenvalue * from_int(e.multiplicity.clone()))
            .sum()
    }

    pub fn min_nonzero(&self) -> BigRational {
        self.entries
            .iter()
            .map(|e| e.eigenvalue.clone())
            .min()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn max(&self) -> BigRational {
        self.entries
            .iter()
            .map(|e| e.eigenvalue.clone())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// The full multiset (kernel zeros included), ascending, as `f64`.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let kernel: usize = self.kernel_dimension.to_usize().unwrap_or(0);
        out.extend(std::iter::repeat(0.0).take(kernel));
        for e in &self.entries {
            let mult: usize = e.multiplicity.to_usize().unwrap_or(0);
            let v = crate::exact::to_f64(&e.eigenvalue);
            out.extend(std::iter::repeat(v).take(mult));
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

pub fn exact_spectrum(n: usize, d: usize) -> Result<ExactSpectrum> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("n and d must be positive".into()));
    }
    let entries: Vec<SpectrumEntry> = partitions(n, d)
        .into_iter()
        .map(|lambda| {
            let dp = dim_p(&lambda);
            SpectrumEntry {
                eigenvalue: content_product(&lambda, d),
                multiplicity: &dp * &dp,
                partition: lambda,
            }
        })
        .collect();
    let covered: BigInt = entries.iter().map(|e| e.multiplicity.clone()).sum();
    Ok(ExactSpectrum {
        n,
        d,
        kernel_dimension: factorial(n) - covered,
        entries,
    })
}

/// Ratio of the `λ`-block coefficients of `E_ψ[ψ^{⊗n}]` (random pure state on
/// `C^d ⊗ C^d`) and `E_U[φ_U^{⊗n}]` (random maximally entangled state):
/// `∏_{k=1}^{n−1}(1 + k/d²)^{-1} · ∏_{(i,j)∈λ}(1 + (j − i)/d)`.
pub fn moment_ratio(lambda: &IntegerPartition, d: usize) -> BigRational {
    let d2 = (d * d) as i64;
    let rising = (1..lambda.n() as i64).fold(BigRational::one(), |acc, k| acc * rational(d2 + k, d2));
    content_product(lambda, d) / rising
}

/// `[1 − n²/2d, 1 + n²/d]`, the window for [`moment_ratio`] when `n² ≤ d`.
pub fn moment_ratio_window(n: usize, d: usize) -> (BigRational, BigRational) {
    let n2 = (n * n) as i64;
    let d = d as i64;
    (
        BigRational::one() - rational(n2, 2 * d),
        BigRational::one() + rational(n2, d),
    )
}

/// Number of perfectly distinguishable `U^{⊗n}`-invariant states.
#[derive(Clone, Debug, PartialEq)]
pub struct HideableCount {
    /// `N = Σ_λ dim P_λ` over all partitions of `n`.
    pub exact: BigInt,
    /// `⌈√(n!)⌉`, the integer lower bound implied by `Σ dim P_λ² = n!`.
    pub lower: BigInt,
    /// Informational `√(n!)·e^{1.28√n}`; the constant is approximate.
    pub informational_upper: f64,
}

pub fn hideable_state_count(n: usize) -> HideableCount {
    let exact: BigInt = partitions(n, n).iter().map(dim_p).sum();
    let nf = factorial(n);
    let mut lower = nf.sqrt();
    if &lower * &lower < nf {
        lower += 1;
    }
    let informational_upper = crate::exact::to_f64(&from_int(nf)).sqrt() * (1.28 * (n as f64).sqrt()).exp();
    HideableCount {
        exact,
        lower,
        informational_upper,
    }
}

/// `dim Sym^n(C^d) = C(d + n − 1, n)`.
pub fn symmetric_dimension(n: usize, d: usize) -> BigInt {
    binomial(d + n - 1, n)
}
