//! The Gram matrix `G^(n,d)_{π₁,π₂} = ⟨P_d(π₁), P_d(π₂)⟩ = d^{−|π₁⁻¹π₂|}` and
//! the spectral and norm bounds built on it.
//!
//! Entries are produced exactly on demand from the transposition distance;
//! only the spectral routines materialize a dense `f64` copy.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::dense_ops::{perm_combination_real, DenseOperator};
use crate::exact::{binomial, from_int, pow_rational, rational, to_f64, RationalMatrix};
use crate::limits::{saturating_pow, Limits};
use crate::symgroup::{self, Permutation};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct GramMatrix {
    n: usize,
    d: usize,
    perms: Vec<Permutation>,
    inverses: Vec<Permutation>,
}

pub fn build_gram(n: usize, d: usize) -> Result<GramMatrix> {
    build_gram_with(n, d, &Limits::default())
}

pub fn build_gram_with(n: usize, d: usize, limits: &Limits) -> Result<GramMatrix> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    let perms = symgroup::enumerate_with(n, limits)?;
    let inverses = perms.iter().map(Permutation::inverse).collect();
    Ok(GramMatrix {
        n,
        d,
        perms,
        inverses,
    })
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Row/column labels, lexicographic.
    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn side(&self) -> usize {
        self.perms.len()
    }

    /// `|π_i⁻¹ π_j|`.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let q = symgroup::compose(&self.inverses[i], &self.perms[j]).expect("same n");
        symgroup::transposition_distance(&q)
    }

    /// `d^{−|π_i⁻¹π_j|}`.
    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        rational(1, self.d as i64).pow(self.distance(i, j) as i32)
    }

    /// `dⁿ · G_ij = d^{c(π_i⁻¹π_j)}`.
    pub fn scaled_entry(&self, i: usize, j: usize) -> BigInt {
        num_traits::pow(BigInt::from(self.d), self.n - self.distance(i, j))
    }

    pub fn scaled_integer_matrix(&self) -> Vec<BigInt> {
        let s = self.side();
        let mut out = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                out.push(self.scaled_entry(i, j));
            }
        }
        out
    }

    pub fn exact_matrix(&self) -> RationalMatrix {
        let s = self.side();
        let mut entries = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                entries.push(self.entry(i, j));
            }
        }
        RationalMatrix { side: s, entries }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let s = self.side();
        let inv_d = 1.0 / self.d as f64;
        DMatrix::from_fn(s, s, |i, j| inv_d.powi(self.distance(i, j) as i32))
    }

    /// Literal `Σ_j G_ij`, tallied by distance and then summed exactly.
    pub fn literal_row_sum(&self, i: usize) -> BigRational {
        let mut tally = vec![0usize; self.n];
        for j in 0..self.side() {
            tally[self.distance(i, j)] += 1;
        }
        let base = rational(1, self.d as i64);
        tally
            .iter()
            .enumerate()
            .map(|(k, &count)| from_int(count) * pow_rational(&base, k as i64))
            .sum()
    }

    /// `tr G` in exact arithmetic.
    pub fn trace(&self) -> BigRational {
        (0..self.side()).map(|i| self.entry(i, i)).sum()
    }
}

/// `∏_{j=1}^{n−1} (1 + j/d)`: row sum of `G`, and also `λ_max`.
pub fn row_sum(n: usize, d: usize) -> BigRational {
    let d = d as i64;
    (1..n as i64).fold(BigRational::one(), |acc, j| acc * rational(d + j, d))
}

/// `∏_{j=1}^{n−1} (1 − j/d)`, equal to `λ_min` when `n ≤ d` (and `0` otherwise).
pub fn lambda_min_formula(n: usize, d: usize) -> BigRational {
    let d = d as i64;
    (1..n as i64).fold(BigRational::one(), |acc, j| acc * rational(d - j, d))
}

pub fn lambda_max_formula(n: usize, d: usize) -> BigRational {
    row_sum(n, d)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CayleyBound {
    /// `(1 − C(n,2)/d)^{-1}`.
    Finite(BigRational),
    /// `C(n,2) ≥ d`: the geometric series diverges.
    Divergent,
}

impl CayleyBound {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            CayleyBound::Finite(v) => Some(v),
            CayleyBound::Divergent => None,
        }
    }
}

/// Geometric-series bound on `Σ_π d^{−|π|}` from the degree `C(n,2)` of the
/// transposition Cayley graph.
pub fn cayley_bound(n: usize, d: usize) -> CayleyBound {
    let edges = from_int(binomial(n, 2));
    let d = from_int(d);
    if edges >= d {
        CayleyBound::Divergent
    } else {
        CayleyBound::Finite((BigRational::one() - edges / d).recip())
    }
}

/// `Σ_π sgn(π) d^{c(π)}` by enumeration.
pub fn antisymmetric_witness(n: usize, d: usize) -> Result<BigInt> {
    let d = BigInt::from(d);
    Ok(symgroup::enumerate(n)?
        .iter()
        .map(|p| BigInt::from(symgroup::sign(p)) * num_traits::pow(d.clone(), p.cycle_count()))
        .sum())
}

/// `d(d−1)⋯(d−n+1)`.
pub fn falling_factorial(d: usize, n: usize) -> BigInt {
    (0..n).fold(BigInt::one(), |acc, k| acc * (BigInt::from(d) - BigInt::from(k)))
}

#[derive(Clone, Debug)]
pub struct SpectralReport {
    pub n: usize,
    pub d: usize,
    /// Ascending; `n!` values.
    pub numeric_eigenvalues: Vec<f64>,
    pub lambda_min_formula: BigRational,
    pub lambda_max_formula: BigRational,
    /// `‖G − I‖₁ / n!` from `Σ |λ_i − 1|`.
    pub trace_distance_to_identity: f64,
    /// `‖G − I‖_∞ = max |λ_i − 1|`.
    pub op_norm_distance: f64,
    pub row_sum: BigRational,
    pub cayley_bound: CayleyBound,
    /// Largest `‖Gv − λv‖₂` over the computed eigenpairs.
    pub max_residual: f64,
}

impl SpectralReport {
    pub fn numeric_min(&self) -> f64 {
        self.numeric_eigenvalues[0]
    }

    pub fn numeric_max(&self) -> f64 {
        *self.numeric_eigenvalues.last().expect("non-empty")
    }

    /// `‖G − I‖_{1→1} = row_sum − 1`.
    pub fn one_to_one_distance(&self) -> BigRational {
        &self.row_sum - BigRational::one()
    }
}

pub fn spectral_report(g: &GramMatrix) -> Result<SpectralReport> {
    spectral_report_with(g, &Limits::default())
}

pub fn spectral_report_with(g: &GramMatrix, limits: &Limits) -> Result<SpectralReport> {
    Limits::check("eigensolver side", g.side(), limits.max_eigen_side)?;
    let dense = g.to_f64();
    let eig = SymmetricEigen::try_new(dense.clone(), 1e-15, 100_000).ok_or_else(|| {
        let preview: Vec<f64> = dense.iter().take(16).copied().collect();
        Error::Numerical(format!(
            "symmetric eigensolver did not converge for G^({},{}) ({}x{}); leading entries {preview:?}",
            g.n,
            g.d,
            dense.nrows(),
            dense.ncols()
        ))
    })?;
    let mut max_residual: f64 = 0.0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let r = &dense * v - v * lambda;
        max_residual = max_residual.max(r.norm());
    }
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    let count = values.len() as f64;
    let trace_distance = values.iter().map(|l| (l - 1.0).abs()).sum::<f64>() / count;
    let op_distance = values.iter().map(|l| (l - 1.0).abs()).fold(0.0, f64::max);
    Ok(SpectralReport {
        n: g.n,
        d: g.d,
        numeric_eigenvalues: values,
        lambda_min_formula: lambda_min_formula(g.n, g.d),
        lambda_max_formula: lambda_max_formula(g.n, g.d),
        trace_distance_to_identity: trace_distance,
        op_norm_distance: op_distance,
        row_sum: row_sum(g.n, g.d),
        cayley_bound: cayley_bound(g.n, g.d),
        max_residual,
    })
}

/// Sorted pairwise comparison with mixed tolerance `|a − b| ≤ atol + rtol·max(|a|,|b|)`.
/// Returns the largest normalized excess (`≤ 0` on agreement) or `None` when
/// the lengths differ.
pub fn compare_multisets(a: &[f64], b: &[f64], atol: f64, rtol: f64) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs() - (atol + rtol * x.abs().max(y.abs())))
            .fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Certified windows for norms of `A = Σ a_π P_d(π)` when `ε = n²/d ≤ 1`.
#[derive(Clone, Debug)]
pub struct NormWindow {
    pub epsilon: BigRational,
    pub valid: bool,
    /// `⟨a, Ga⟩ / ‖a‖₂² ∈ [1 − ε/2, e^{ε/2}]`.
    pub two_norm_lower: BigRational,
    pub two_norm_upper: f64,
    /// `‖A‖_∞ ≥ (1 − ε)‖a‖_∞`.
    pub inf_norm_lower: BigRational,
    /// The sharper `(1 − ε/2)` factor, tested empirically only.
    pub inf_norm_lower_sharp: BigRational,
    /// `‖A‖₁ ≥ (1 − ε) dⁿ ‖a‖_∞`.
    pub trace_norm_lower: BigRational,
}

#[derive(Clone, Debug)]
pub struct MeasuredNorms {
    /// `tr(A†A) / dⁿ`.
    pub two_norm_sq: f64,
    pub op_norm: f64,
    pub trace_norm: f64,
}

#[derive(Clone, Debug)]
pub struct NormWindowReport {
    pub window: NormWindow,
    /// `⟨a, Ga⟩`.
    pub quadratic_form: f64,
    pub a_two_sq: f64,
    pub a_inf: f64,
    pub a_one: f64,
    pub measured: Option<MeasuredNorms>,
}

impl NormWindowReport {
    pub fn two_norm_in_window(&self) -> bool {
        let lo = to_f64(&self.window.two_norm_lower) * self.a_two_sq;
        let hi = self.window.two_norm_upper * self.a_two_sq;
        let slack = 1e-12 * (1.0 + self.a_two_sq);
        self.quadratic_form >= lo - slack && self.quadratic_form <= hi + slack
    }

    pub fn inf_norm_certified(&self) -> Option<bool> {
        self.measured
            .as_ref()
            .map(|m| m.op_norm >= to_f64(&self.window.inf_norm_lower) * self.a_inf - 1e-9)
    }

    pub fn inf_norm_sharp_holds(&self) -> Option<bool> {
        self.measured
            .as_ref()
            .map(|m| m.op_norm >= to_f64(&self.window.inf_norm_lower_sharp) * self.a_inf - 1e-9)
    }

    pub fn trace_norm_certified(&self, n: usize, d: usize) -> Option<bool> {
        let dn = (d as f64).powi(n as i32);
        self.measured.as_ref().map(|m| {
            m.trace_norm >= to_f64(&self.window.trace_norm_lower) * dn * self.a_inf - 1e-9 * dn
        })
    }

    /// Trivial `‖A‖_∞ ≤ ‖a‖₁`.
    pub fn inf_norm_upper_holds(&self) -> Option<bool> {
        self.measured.as_ref().map(|m| m.op_norm <= self.a_one + 1e-9)
    }
}

pub fn norm_window(a: &[f64], n: usize, d: usize) -> Result<NormWindowReport> {
    let g = build_gram(n, d)?;
    if a.len() != g.side() {
        return Err(Error::SizeMismatch(a.len(), g.side()));
    }
    let eps = rational((n * n) as i64, d as i64);
    let half = &eps / from_int(2);
    let window = NormWindow {
        valid: eps <= BigRational::one(),
        two_norm_lower: BigRational::one() - &half,
        two_norm_upper: to_f64(&half).exp(),
        inf_norm_lower: BigRational::one() - &eps,
        inf_norm_lower_sharp: BigRational::one() - &half,
        trace_norm_lower: BigRational::one() - &eps,
        epsilon: eps,
    };
    let dense = g.to_f64();
    let av = nalgebra::DVector::from_column_slice(a);
    let quadratic_form = av.dot(&(&dense * &av));
    let measured = if saturating_pow(d, n) <= Limits::default().max_dense_side {
        let op: DenseOperator = perm_combination_real(g.perms(), a, d)?;
        let sv = op.singular_values();
        let side = op.side() as f64;
        Some(MeasuredNorms {
            two_norm_sq: op.frobenius_norm().powi(2) / side,
            op_norm: sv[0],
            trace_norm: sv.iter().sum(),
        })
    } else {
        None
    };
    Ok(NormWindowReport {
        window,
        quadratic_form,
        a_two_sq: a.iter().map(|x| x * x).sum(),
        a_inf: a.iter().map(|x| x.abs()).fold(0.0, f64::max),
        a_one: a.iter().map(|x| x.abs()).sum(),
        measured,
    })
}
