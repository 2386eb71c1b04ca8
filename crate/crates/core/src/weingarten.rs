//! The Weingarten matrix `Wg = G⁻¹` of the normalized Gram matrix and its
//! leading large-`d` behaviour `Wg(σ)·d^{|σ|} → Moeb(σ)`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::exact::{bareiss_inverse, factorial, from_int, pow_rational, to_f64, RationalMatrix};
use crate::gram::{build_gram, GramMatrix};
use crate::symgroup::{self, CycleType, Permutation};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct WeingartenMatrix {
    n: usize,
    d: usize,
    perms: Vec<Permutation>,
    entries: RationalMatrix,
    class_values: BTreeMap<CycleType, BigRational>,
}

/// Exact inverse of `G^(n,d)`, obtained from the integer matrix `dⁿG`.
pub fn invert_gram(g: &GramMatrix) -> Result<WeingartenMatrix> {
    let (n, d) = (g.n(), g.d());
    if n > d {
        return Err(Error::Singular { n, d });
    }
    let scaled_inverse = bareiss_inverse(g.side(), &g.scaled_integer_matrix())?;
    let dn = from_int(num_traits::pow(BigInt::from(d), n));
    let entries = RationalMatrix {
        side: scaled_inverse.side,
        entries: scaled_inverse.entries.into_iter().map(|q| q * &dn).collect(),
    };
    let perms = g.perms().to_vec();
    // perms[0] is the identity, so row 0 lists Wg(e, τ) = Wg(τ).
    debug_assert!(perms[0].is_identity());
    let mut class_values = BTreeMap::new();
    for (j, tau) in perms.iter().enumerate() {
        class_values
            .entry(symgroup::cycle_type(tau))
            .or_insert_with(|| entries.get(0, j).clone());
    }
    Ok(WeingartenMatrix {
        n,
        d,
        perms,
        entries,
        class_values,
    })
}

impl WeingartenMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn side(&self) -> usize {
        self.perms.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        self.entries.get(i, j)
    }

    pub fn entries(&self) -> &RationalMatrix {
        &self.entries
    }

    pub fn class_values(&self) -> &BTreeMap<CycleType, BigRational> {
        &self.class_values
    }

    pub fn class_value(&self, t: &CycleType) -> Option<&BigRational> {
        self.class_values.get(t)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let s = self.side();
        DMatrix::from_fn(s, s, |i, j| to_f64(self.entries.get(i, j)))
    }

    /// Exact check of `G·Wg = I`.
    pub fn inverts(&self, g: &GramMatrix) -> Result<bool> {
        if g.n() != self.n || g.d() != self.d {
            return Err(Error::SizeMismatch(g.side(), self.side()));
        }
        Ok(g.exact_matrix().mul(&self.entries)?.is_identity())
    }

    /// Number of entries `(σ, τ)` whose value differs from the class value of
    /// `cycle_type(σ⁻¹τ)`. Zero for a genuine class function.
    pub fn class_function_violations(&self) -> usize {
        let inverses: Vec<Permutation> = self.perms.iter().map(Permutation::inverse).collect();
        let mut bad = 0;
        for (i, inv) in inverses.iter().enumerate() {
            for (j, tau) in self.perms.iter().enumerate() {
                let q = symgroup::compose(inv, tau).expect("same n");
                if self.class_values.get(&symgroup::cycle_type(&q)) != Some(self.entries.get(i, j)) {
                    bad += 1;
                }
            }
        }
        bad
    }

    pub fn is_symmetric(&self) -> bool {
        let s = self.side();
        (0..s).all(|i| (i + 1..s).all(|j| self.entries.get(i, j) == self.entries.get(j, i)))
    }
}

/// `C_k = (2k)! / (k!(k+1)!)`.
pub fn catalan(k: usize) -> BigInt {
    factorial(2 * k) / (factorial(k) * factorial(k + 1))
}

/// Candidate sign rules for the contribution of an `ℓ`-cycle to `Moeb`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoebiusSign {
    /// `(−1)^{ℓ−1} C_{ℓ−1}`.
    Alternating,
    /// `(−1)^{ℓ−2} C_{ℓ−1}` for `ℓ ≥ 2`, the other parity.
    Shifted,
}

impl MoebiusSign {
    fn cycle_sign(self, len: usize) -> i32 {
        if len <= 1 {
            return 1;
        }
        let exponent = match self {
            MoebiusSign::Alternating => len - 1,
            MoebiusSign::Shifted => len - 2,
        };
        if exponent % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoebiusValue {
    pub cycle_type: CycleType,
    pub value: BigInt,
}

pub fn moebius_with(t: &CycleType, convention: MoebiusSign) -> BigInt {
    t.parts
        .iter()
        .map(|&len| catalan(len - 1) * BigInt::from(convention.cycle_sign(len)))
        .product()
}

/// Sign rule chosen by the numerical oracle: the sign of `Wg^(3,100)` on the
/// 3-cycle class, computed once by exact inversion.
pub fn resolved_sign_convention() -> MoebiusSign {
    static RESOLVED: OnceLock<MoebiusSign> = OnceLock::new();
    *RESOLVED.get_or_init(|| {
        let g = build_gram(3, 100).expect("S_3 is within every cap");
        let wg = invert_gram(&g).expect("n ≤ d");
        let three_cycle = CycleType { parts: vec![3] };
        let observed = wg.class_value(&three_cycle).expect("S_3 contains 3-cycles").is_positive();
        if (MoebiusSign::Alternating.cycle_sign(3) > 0) == observed {
            MoebiusSign::Alternating
        } else {
            MoebiusSign::Shifted
        }
    })
}

pub fn moebius(t: &CycleType) -> BigInt {
    moebius_with(t, resolved_sign_convention())
}

pub fn moebius_value(t: &CycleType) -> MoebiusValue {
    MoebiusValue {
        cycle_type: t.clone(),
        value: moebius(t),
    }
}

/// `Wg^(n,d)(t)` for a cycle type of size `n`.
pub fn class_value(t: &CycleType, d: usize) -> Result<BigRational> {
    let wg = invert_gram(&build_gram(t.n(), d)?)?;
    Ok(wg.class_value(t).cloned().expect("every cycle type occurs in S_n"))
}

#[derive(Clone, Debug)]
pub struct AsymptoticRow {
    pub d: usize,
    /// `r(d) = Wg(t)·d^{|t|}`.
    pub scaled: BigRational,
    /// `r(d) − Moeb(t)`.
    pub residual: BigRational,
}

#[derive(Clone, Debug)]
pub struct AsymptoticTable {
    pub cycle_type: CycleType,
    pub moebius: BigInt,
    pub rows: Vec<AsymptoticRow>,
    /// For consecutive grid points `d₁ < d₂`: `residual(d₂)/residual(d₁)` and
    /// the `(d₁/d₂)²` it should approach.
    pub decay: Vec<(f64, f64)>,
}

impl AsymptoticTable {
    /// Every observed decay ratio lies within `±tolerance` (relative) of `(d₁/d₂)²`.
    pub fn decays_quadratically(&self, tolerance: f64) -> bool {
        !self.decay.is_empty()
            && self
                .decay
                .iter()
                .all(|&(obs, exp)| obs >= exp * (1.0 - tolerance) && obs <= exp * (1.0 + tolerance))
    }

    pub fn sign_matches(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.scaled.is_positive() == self.moebius.is_positive())
    }
}

pub fn asymptotic_check(t: &CycleType, d_grid: &[usize]) -> Result<AsymptoticTable> {
    let n = t.n();
    let mut grid = d_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() || grid[0] < n {
        return Err(Error::Precondition(format!("d grid {d_grid:?} must be non-empty with every d ≥ n = {n}")));
    }
    let moeb = moebius(t);
    let target = from_int(moeb.clone());
    let distance = t.transposition_distance() as i64;
    let mut rows = Vec::with_capacity(grid.len());
    for &d in &grid {
        let scaled = class_value(t, d)? * pow_rational(&from_int(d), distance);
        let residual = &scaled - &target;
        rows.push(AsymptoticRow { d, scaled, residual });
    }
    let decay = rows
        .windows(2)
        .map(|w| {
            let observed = if w[0].residual.is_zero() {
                f64::NAN
            } else {
                to_f64(&(&w[1].residual / &w[0].residual))
            };
            let expected = (w[0].d as f64 / w[1].d as f64).powi(2);
            (observed, expected)
        })
        .collect();
    Ok(AsymptoticTable {
        cycle_type: t.clone(),
        moebius: moeb,
        rows,
        decay,
    })
}
