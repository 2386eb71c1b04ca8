//! Explicit operators on `(C^d)^{⊗legs}`.
//!
//! Basis index convention: leg 1 is the most significant digit, so the
//! computational basis state `|i_1, …, i_legs⟩` sits at row
//! `Σ_ℓ i_ℓ · d^{legs − ℓ}`. Permutation operators follow
//! `P_d(π) = Σ |i_1…i_n⟩⟨i_{π(1)}…i_{π(n)}|`, which gives the action
//! `P_d(π)|j_1…j_n⟩ = |j_{π⁻¹(1)}…j_{π⁻¹(n)}⟩` and the representation
//! property `P_d(p)·P_d(q) = P_d(p∘q)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::limits::{saturating_pow, Limits};
use crate::symgroup::{self, Permutation};
use crate::weingarten::WeingartenMatrix;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix acting on `legs` tensor factors of dimension `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    data: DMatrix<Complex64>,
    d: usize,
    legs: usize,
}

impl DenseOperator {
    pub fn new(data: DMatrix<Complex64>, d: usize, legs: usize) -> Result<Self> {
        let side = saturating_pow(d, legs);
        if data.nrows() != side || data.ncols() != side {
            return Err(Error::SizeMismatch(data.nrows().max(data.ncols()), side));
        }
        Ok(DenseOperator { data, d, legs })
    }

    pub fn zeros(d: usize, legs: usize) -> Self {
        let side = saturating_pow(d, legs);
        DenseOperator {
            data: DMatrix::zeros(side, side),
            d,
            legs,
        }
    }

    pub fn identity(d: usize, legs: usize) -> Self {
        let side = saturating_pow(d, legs);
        DenseOperator {
            data: DMatrix::identity(side, side),
            d,
            legs,
        }
    }

    /// Rank-one `|v⟩⟨v|`.
    pub fn projector_onto(v: &DVector<Complex64>, d: usize, legs: usize) -> Result<Self> {
        Self::new(v * v.adjoint(), d, legs)
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn side(&self) -> usize {
        self.data.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        DenseOperator {
            data: &self.data * Complex64::new(factor, 0.0),
            ..*self
        }
    }

    fn same_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.d != other.d || self.legs != other.legs {
            return Err(Error::SizeMismatch(self.side(), other.side()));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DenseOperator {
            data: &self.data + &other.data,
            ..*self
        })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DenseOperator {
            data: &self.data - &other.data,
            ..*self
        })
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<Self> {
        self.same_shape(other)?;
        Ok(DenseOperator {
            data: &self.data * &other.data,
            ..*self
        })
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            data: self.data.adjoint(),
            ..*self
        }
    }

    pub fn transpose(&self) -> Self {
        DenseOperator {
            data: self.data.transpose(),
            ..*self
        }
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.side();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.data.clone().svd(false, false).singular_values.iter().copied().collect();
        if sv.iter().any(|x| !x.is_finite()) {
            // Same failure mode as the eigensolver; fall back to the spectrum of A†A.
            let gram = self.data.adjoint() * &self.data;
            sv = hermitian_eigenvalues(&gram).into_iter().map(|x| x.max(0.0).sqrt()).collect();
        }
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn trace_norm(&self) -> f64 {
        self.singular_values().iter().sum()
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let defect = self.hermiticity_defect();
        if defect > 1e-9 * (1.0 + self.max_abs_entry()) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(hermitian_eigenvalues(&self.data))
    }
}

/// Ascending eigenvalues of a Hermitian matrix (upper triangle is trusted).
///
/// Complex input is handled through the real embedding `[[A, −B], [B, A]]`
/// of `A + iB`, whose eigenvalues are those of `A + iB`, each twice.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.iter().all(|z| z.im == 0.0) {
        return real_symmetric_eigenvalues(m.map(|z| z.re));
    }
    let n = m.nrows();
    let embedded = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    real_symmetric_eigenvalues(embedded).into_iter().step_by(2).collect()
}

/// Ascending eigenvalues of a real symmetric matrix.
///
/// nalgebra's implicit QR can return NaN on large, highly degenerate sparse
/// inputs. The spectrum is shift-covariant, so on failure the solve is
/// retried on `M + σI` for a few shifts of the matrix's scale.
pub fn real_symmetric_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let scale = 1.0 + m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for shift in [0.0, 0.618_034, 1.414_214, -0.732_051] {
        let sigma = shift * scale;
        let shifted = if sigma == 0.0 {
            m.clone()
        } else {
            &m + DMatrix::<f64>::identity(m.nrows(), m.ncols()) * sigma
        };
        let mut ev: Vec<f64> = shifted.symmetric_eigenvalues().iter().map(|x| x - sigma).collect();
        if ev.iter().all(|x| x.is_finite()) {
            ev.sort_by(f64::total_cmp);
            return ev;
        }
    }
    vec![f64::NAN; m.nrows()]
}

/// A subset `S ⊆ {1, …, legs}` of tensor legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegSubset {
    legs: usize,
    mask: u64,
}

impl LegSubset {
    pub fn empty(legs: usize) -> Self {
        LegSubset { legs, mask: 0 }
    }

    pub fn full(legs: usize) -> Self {
        LegSubset {
            legs,
            mask: if legs == 64 { u64::MAX } else { (1u64 << legs) - 1 },
        }
    }

    /// From 1-based leg labels.
    pub fn from_members(legs: usize, members: &[usize]) -> Result<Self> {
        if legs > 63 {
            return Err(Error::InvalidInput("at most 63 legs are supported".into()));
        }
        let mut mask = 0u64;
        for &m in members {
            if m == 0 || m > legs {
                return Err(Error::InvalidInput(format!("leg {m} outside 1..={legs}")));
            }
            mask |= 1 << (m - 1);
        }
        Ok(LegSubset { legs, mask })
    }

    pub fn from_mask(legs: usize, mask: u64) -> Self {
        LegSubset {
            legs,
            mask: mask & Self::full(legs).mask,
        }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn legs(&self) -> usize {
        self.legs
    }

    pub fn contains(&self, leg: usize) -> bool {
        leg >= 1 && leg <= self.legs && self.mask & (1 << (leg - 1)) != 0
    }

    pub fn members(&self) -> Vec<usize> {
        (1..=self.legs).filter(|&l| self.contains(l)).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// `S̄ = {1..legs} \ S`.
    pub fn complement(&self) -> Self {
        LegSubset {
            legs: self.legs,
            mask: !self.mask & Self::full(self.legs).mask,
        }
    }

    /// All `2^legs` subsets, by increasing mask.
    pub fn all(legs: usize) -> impl Iterator<Item = LegSubset> {
        (0..1u64 << legs).map(move |mask| LegSubset { legs, mask })
    }
}

fn check_dense(d: usize, legs: usize, limits: &Limits) -> Result<usize> {
    let side = saturating_pow(d, legs);
    Limits::check("dense side", side, limits.max_dense_side)?;
    Ok(side)
}

/// Digits of `index` in base `d`, leg 1 first.
fn digits(mut index: usize, d: usize, legs: usize) -> Vec<usize> {
    let mut out = vec![0; legs];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn from_digits(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

pub fn perm_operator(pi: &Permutation, d: usize) -> Result<DenseOperator> {
    perm_operator_with(pi, d, &Limits::default())
}

pub fn perm_operator_with(pi: &Permutation, d: usize, limits: &Limits) -> Result<DenseOperator> {
    let n = pi.n();
    let side = check_dense(d, n, limits)?;
    let images = pi.zero_based();
    let mut data = DMatrix::from_element(side, side, ZERO);
    let mut col_digits = vec![0; n];
    for row in 0..side {
        let row_digits = digits(row, d, n);
        for k in 0..n {
            col_digits[k] = row_digits[images[k]];
        }
        data[(row, from_digits(&col_digits, d))] = ONE;
    }
    Ok(DenseOperator { data, d, legs: n })
}

/// `Σ_π c_π P_d(π)` over an explicit list of permutations.
pub fn perm_combination(perms: &[Permutation], coeffs: &[Complex64], d: usize) -> Result<DenseOperator> {
    if perms.len() != coeffs.len() {
        return Err(Error::SizeMismatch(perms.len(), coeffs.len()));
    }
    let n = perms.first().map(Permutation::n).ok_or_else(|| Error::InvalidInput("no permutations".into()))?;
    let side = check_dense(d, n, &Limits::default())?;
    let mut data = DMatrix::from_element(side, side, ZERO);
    let mut col_digits = vec![0; n];
    for (pi, &c) in perms.iter().zip(coeffs) {
        if c == ZERO {
            continue;
        }
        let images = pi.zero_based();
        for row in 0..side {
            let row_digits = digits(row, d, n);
            for k in 0..n {
                col_digits[k] = row_digits[images[k]];
            }
            data[(row, from_digits(&col_digits, d))] += c;
        }
    }
    Ok(DenseOperator { data, d, legs: n })
}

/// Real-coefficient version of [`perm_combination`].
pub fn perm_combination_real(perms: &[Permutation], coeffs: &[f64], d: usize) -> Result<DenseOperator> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    perm_combination(perms, &c, d)
}

/// Normalized Hilbert-Schmidt inner product `tr(A†B) / tr I`.
pub fn hs_inner(a: &DenseOperator, b: &DenseOperator) -> Result<Complex64> {
    a.same_shape(b)?;
    let sum: Complex64 = a.data.iter().zip(b.data.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok(sum / a.side() as f64)
}

/// `A^{Γ_S}`: row and column digits of the legs in `S` exchanged.
pub fn partial_transpose(a: &DenseOperator, s: &LegSubset) -> Result<DenseOperator> {
    if s.legs() != a.legs {
        return Err(Error::SizeMismatch(s.legs(), a.legs));
    }
    let side = a.side();
    let d = a.d;
    let legs = a.legs;
    // Part of each basis index carried by the legs in S.
    let s_part: Vec<usize> = (0..side)
        .map(|idx| {
            let dg = digits(idx, d, legs);
            (0..legs)
                .filter(|&l| s.contains(l + 1))
                .map(|l| dg[l] * saturating_pow(d, legs - 1 - l))
                .sum()
        })
        .collect();
    let mut data = DMatrix::from_element(side, side, ZERO);
    for r in 0..side {
        for c in 0..side {
            let r2 = r - s_part[r] + s_part[c];
            let c2 = c - s_part[c] + s_part[r];
            data[(r2, c2)] = a.data[(r, c)];
        }
    }
    Ok(DenseOperator { data, d, legs })
}

/// Partial-transpose singular-value law for a single permutation operator.
#[derive(Clone, Debug)]
pub struct PtLaw {
    /// `k = |S ∩ π(S̄)|`.
    pub k: usize,
    /// Predicted singular values, descending: `d^{n−2k}` copies of `d^k`, zeros after.
    pub predicted: Vec<f64>,
    pub observed: Vec<f64>,
    pub max_deviation: f64,
    /// `d^{n−k}`.
    pub predicted_trace_norm: u128,
    pub observed_trace_norm: f64,
}

impl PtLaw {
    pub fn holds(&self, atol: f64) -> bool {
        self.max_deviation <= atol
    }
}

/// `k = |S ∩ π(S̄)|`.
pub fn pt_overlap(pi: &Permutation, s: &LegSubset) -> usize {
    let complement = s.complement().members();
    pi.image_of(&complement).into_iter().filter(|&x| s.contains(x)).count()
}

pub fn pt_singular_law(pi: &Permutation, s: &LegSubset, d: usize) -> Result<PtLaw> {
    let n = pi.n();
    let k = pt_overlap(pi, s);
    let side = saturating_pow(d, n);
    let nonzero = saturating_pow(d, n - 2 * k);
    let value = saturating_pow(d, k) as f64;
    let mut predicted = vec![value; nonzero];
    predicted.resize(side, 0.0);
    let op = partial_transpose(&perm_operator(pi, d)?, s)?;
    let observed = op.singular_values();
    let max_deviation = predicted
        .iter()
        .zip(&observed)
        .map(|(p, o)| (p - o).abs())
        .fold(0.0, f64::max);
    Ok(PtLaw {
        k,
        predicted,
        observed_trace_norm: observed.iter().sum(),
        observed,
        max_deviation,
        predicted_trace_norm: (d as u128).pow((n - k) as u32),
    })
}

/// Result of sweeping all partial transposes of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct PptReport {
    pub is_ppt: bool,
    /// Subset with the largest violation (or smallest margin when none is violated).
    pub worst_subset: LegSubset,
    /// The offending eigenvalue of `M^{Γ_S}` for `worst_subset`.
    pub worst_eigenvalue: f64,
    /// Largest amount by which any eigenvalue leaves `[lower, upper]`; `≤ 0` means inside.
    pub worst_violation: f64,
    pub per_subset: Vec<(LegSubset, f64, f64)>,
}

pub const PPT_TOLERANCE: f64 = 1e-9;

/// `0 ⪯ M^{Γ_S} ⪯ I` for every `S`.
pub fn ppt_check(m: &DenseOperator) -> Result<PptReport> {
    spectral_window_check(m, 0.0, 1.0)
}

/// `lower·I ⪯ M^{Γ_S} ⪯ upper·I` for every `S`.
pub fn spectral_window_check(m: &DenseOperator, lower: f64, upper: f64) -> Result<PptReport> {
    let defect = m.hermiticity_defect();
    if defect > 1e-9 * (1.0 + m.max_abs_entry()) {
        return Err(Error::NotHermitian(defect));
    }
    let mut per_subset = Vec::new();
    let mut worst = (LegSubset::empty(m.legs), f64::NAN, f64::NEG_INFINITY);
    for s in LegSubset::all(m.legs) {
        let ev = hermitian_eigenvalues(&partial_transpose(m, &s)?.data);
        let lo = ev[0];
        let hi = ev[ev.len() - 1];
        per_subset.push((s, lo, hi));
        if lower - lo > worst.2 {
            worst = (s, lo, lower - lo);
        }
        if hi - upper > worst.2 {
            worst = (s, hi, hi - upper);
        }
    }
    Ok(PptReport {
        is_ppt: worst.2 <= PPT_TOLERANCE,
        worst_subset: worst.0,
        worst_eigenvalue: worst.1,
        worst_violation: worst.2,
        per_subset,
    })
}

/// Symmetric and antisymmetric projectors on `(C^d)^{⊗n}` and the two-leg
/// maximally entangled vector `Φ_d`.
#[derive(Clone, Debug)]
pub struct Projectors {
    pub symmetric: DenseOperator,
    pub antisymmetric: DenseOperator,
    pub phi: DVector<Complex64>,
}

pub fn projectors_and_states(d: usize, n: usize) -> Result<Projectors> {
    check_dense(d, n, &Limits::default())?;
    let perms = symgroup::enumerate(n)?;
    let inv_count = 1.0 / perms.len() as f64;
    let sym_coeffs = vec![Complex64::new(inv_count, 0.0); perms.len()];
    let anti_coeffs: Vec<Complex64> = perms
        .iter()
        .map(|p| Complex64::new(symgroup::sign(p) as f64 * inv_count, 0.0))
        .collect();
    Ok(Projectors {
        symmetric: perm_combination(&perms, &sym_coeffs, d)?,
        antisymmetric: perm_combination(&perms, &anti_coeffs, d)?,
        phi: max_entangled(d, 1),
    })
}

/// `|Φ_d⟩^{⊗pairs}` on `2·pairs` legs ordered `(A_1…A_pairs, B_1…B_pairs)`,
/// with `A_k` paired to `B_k`.
pub fn max_entangled(d: usize, pairs: usize) -> DVector<Complex64> {
    let half = saturating_pow(d, pairs);
    let mut v = DVector::from_element(half * half, ZERO);
    let amp = Complex64::new((half as f64).sqrt().recip(), 0.0);
    for x in 0..half {
        v[x * half + x] = amp;
    }
    v
}

/// `A ⊗ B` with `A` on the leading legs.
pub fn kron(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    if a.d != b.d {
        return Err(Error::SizeMismatch(a.d, b.d));
    }
    DenseOperator::new(a.data.kronecker(&b.data), a.d, a.legs + b.legs)
}

/// Orthogonal projection of `M` onto `span{P_d(π)}` via the Weingarten matrix.
#[derive(Clone, Debug)]
pub struct SpanProjection {
    /// `m = Wg · v` with `v_π = ⟨P_d(π), M⟩`, indexed like `symgroup::enumerate(n)`.
    pub coefficients: Vec<Complex64>,
    /// `‖M − Σ m_π P_d(π)‖₂ / ‖M‖₂`.
    pub reconstruction_error: f64,
}

pub fn project_to_perm_span(m: &DenseOperator, wg: &WeingartenMatrix) -> Result<SpanProjection> {
    if wg.n() != m.legs || wg.d() != m.d {
        return Err(Error::SizeMismatch(wg.n(), m.legs));
    }
    let perms = wg.perms();
    let overlaps: Vec<Complex64> = perms
        .iter()
        .map(|p| hs_inner(&perm_operator(p, m.d)?, m))
        .collect::<Result<_>>()?;
    let w = wg.to_f64();
    let coefficients: Vec<Complex64> = (0..perms.len())
        .map(|i| (0..perms.len()).map(|j| overlaps[j] * w[(i, j)]).sum())
        .collect();
    let recon = perm_combination(perms, &coefficients, m.d)?;
    let norm = m.frobenius_norm();
    let err = m.sub(&recon)?.frobenius_norm();
    Ok(SpanProjection {
        coefficients,
        reconstruction_error: if norm > 0.0 { err / norm } else { err },
    })
}
