//! Leg subsets that cut many cycles, coefficient bounds for operators in the
//! permutation span whose partial transposes stay bounded, and the bias bound
//! chains for multipartite data hiding and for local product tests.

use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense_ops::{hs_inner, perm_combination_real, projectors_and_states, spectral_window_check, LegSubset, PptReport};
use crate::exact::{binomial, from_int, rational, to_f64};
use crate::symgroup::{self, Permutation};
use crate::{Error, Result};

/// A leg subset `S` together with `Σᵢ |πᵢ(S) ∩ S̄|` and the guaranteed target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutResult {
    pub subset: LegSubset,
    pub achieved: usize,
    pub target: BigRational,
}

impl CutResult {
    pub fn meets_target(&self) -> bool {
        from_int(self.achieved) >= self.target
    }
}

fn check_same_degree(perms: &[Permutation]) -> Result<usize> {
    let n = perms
        .first()
        .map(Permutation::n)
        .ok_or_else(|| Error::InvalidInput("no permutations given".into()))?;
    if let Some(p) = perms.iter().find(|p| p.n() != n) {
        return Err(Error::SizeMismatch(n, p.n()));
    }
    if n > 63 {
        return Err(Error::InvalidInput("at most 63 legs are supported".into()));
    }
    Ok(n)
}

/// `|π(S) ∩ S̄|`.
pub fn cut_value(pi: &Permutation, s: &LegSubset) -> usize {
    pi.image_of(&s.members()).into_iter().filter(|&x| !s.contains(x)).count()
}

/// `|π(S) ∩ S|`.
pub fn same_side_value(pi: &Permutation, s: &LegSubset) -> usize {
    pi.image_of(&s.members()).into_iter().filter(|&x| s.contains(x)).count()
}

fn total_cut(perms: &[Permutation], s: &LegSubset) -> usize {
    perms.iter().map(|p| cut_value(p, s)).sum()
}

/// Puts the 1st, 3rd, 5th, … element of every cycle into `S`. Each cycle of
/// length `j` then contributes `⌊j/2⌋ ≥ (j−1)/2` to `|π(S) ∩ S̄|`.
pub fn deterministic_cut(pi: &Permutation) -> CutResult {
    let n = pi.n();
    let members: Vec<usize> = pi
        .cycles()
        .iter()
        .flat_map(|cycle| cycle.iter().step_by(2).copied().collect::<Vec<_>>())
        .collect();
    let subset = LegSubset::from_members(n, &members).expect("cycle elements are legs");
    CutResult {
        achieved: cut_value(pi, &subset),
        subset,
        target: rational(symgroup::transposition_distance(pi) as i64, 2),
    }
}

/// The best `S` over all `2ⁿ` subsets.
pub fn exhaustive_best_cut(perms: &[Permutation]) -> Result<CutResult> {
    let n = check_same_degree(perms)?;
    let mut best = (LegSubset::empty(n), 0usize);
    for s in LegSubset::all(n) {
        let v = total_cut(perms, &s);
        if v > best.1 {
            best = (s, v);
        }
    }
    Ok(CutResult {
        subset: best.0,
        achieved: best.1,
        target: multi_target(perms),
    })
}

/// `(1/4) Σᵢ |πᵢ|`.
fn multi_target(perms: &[Permutation]) -> BigRational {
    let total: usize = perms.iter().map(symgroup::transposition_distance).sum();
    rational(total as i64, 4)
}

/// Largest degree for which [`randomized_cut`] falls back to exhaustive search.
pub const EXHAUSTIVE_FALLBACK_N: usize = 20;

/// Uniformly random subsets until `Σᵢ |πᵢ(S) ∩ S̄| ≥ (1/4)Σᵢ|πᵢ|`; the
/// expectation of the left side is `(1/4)Σᵢ mᵢ ≥` the target, so some subset
/// meets it. After `trials` misses the search becomes exhaustive for small
/// `n` and keeps sampling otherwise.
pub fn randomized_cut(perms: &[Permutation], trials: usize, seed: u64) -> Result<CutResult> {
    let n = check_same_degree(perms)?;
    let target = multi_target(perms);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = LegSubset::full(n).mask();
    let mut best = CutResult {
        subset: LegSubset::empty(n),
        achieved: total_cut(perms, &LegSubset::empty(n)),
        target: target.clone(),
    };
    let mut attempt = 0usize;
    while !best.meets_target() {
        if attempt >= trials && n <= EXHAUSTIVE_FALLBACK_N {
            return exhaustive_best_cut(perms);
        }
        let s = LegSubset::from_mask(n, rng.gen::<u64>() & full);
        let v = total_cut(perms, &s);
        if v > best.achieved {
            best.subset = s;
            best.achieved = v;
        }
        attempt += 1;
    }
    Ok(best)
}

/// Whether a measurement operator is an effect (`0 ⪯ M^Γ ⪯ I`) or a
/// difference of two effects (`−I ⪯ M^Γ ⪯ I`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Effect,
    Difference,
}

impl OperatorKind {
    fn window(self) -> (f64, f64) {
        match self {
            OperatorKind::Effect => (0.0, 1.0),
            OperatorKind::Difference => (-1.0, 1.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PptCoeffReport {
    pub n: usize,
    pub d: usize,
    /// `n² ≤ √d`, under which the coefficient bound is proven.
    pub hypothesis_holds: bool,
    pub ppt: PptReport,
    /// Per permutation (in `symgroup::enumerate` order):
    /// `(1 + n²/√d) d^{−|π|/2} − |m_π|`. Empty when the operator is not PPT.
    pub margins: Vec<f64>,
}

impl PptCoeffReport {
    pub fn min_margin(&self) -> Option<f64> {
        self.margins.iter().copied().reduce(f64::min)
    }

    /// `true` when the operator fails the window check, so the bound says nothing.
    pub fn not_applicable(&self) -> bool {
        !self.ppt.is_ppt
    }
}

/// `|m_π| ≤ (1 + n²/√d) d^{−|π|/2}` for `M = Σ m_π P_d(π)` with bounded partial transposes.
pub fn coefficient_bound(pi: &Permutation, d: usize) -> f64 {
    let n = pi.n() as f64;
    let sd = (d as f64).sqrt();
    (1.0 + n * n / sd) * sd.powi(-(symgroup::transposition_distance(pi) as i32))
}

pub fn ppt_coeff_check(coeffs: &[f64], n: usize, d: usize, kind: OperatorKind) -> Result<PptCoeffReport> {
    let perms = symgroup::enumerate(n)?;
    if coeffs.len() != perms.len() {
        return Err(Error::SizeMismatch(coeffs.len(), perms.len()));
    }
    let m = perm_combination_real(&perms, coeffs, d)?;
    let (lo, hi) = kind.window();
    let ppt = spectral_window_check(&m, lo, hi)?;
    let margins = if ppt.is_ppt {
        perms
            .iter()
            .zip(coeffs)
            .map(|(p, c)| coefficient_bound(p, d) - c.abs())
            .collect()
    } else {
        Vec::new()
    };
    Ok(PptCoeffReport {
        n,
        d,
        hypothesis_holds: (n * n) as f64 <= (d as f64).sqrt(),
        ppt,
        margins,
    })
}

/// A random real coefficient vector with `c_π = c_{π⁻¹}` (so `Σ c_π P(π)` is
/// Hermitian), scaled by bisection to the largest multiple that keeps
/// `I/2 + s·Σ c_π P(π)` an effect under every partial transpose.
pub fn random_ppt_effect(n: usize, d: usize, seed: u64) -> Result<Vec<f64>> {
    let perms = symgroup::enumerate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = vec![0.0; perms.len()];
    for (i, p) in perms.iter().enumerate() {
        let j = perms.iter().position(|q| *q == p.inverse()).expect("group closed under inverse");
        if j >= i {
            let v: f64 = rng.gen_range(-1.0..1.0);
            raw[i] = v;
            raw[j] = v;
        }
    }
    let with_scale = |s: f64| -> Vec<f64> {
        let mut c: Vec<f64> = raw.iter().map(|x| x * s).collect();
        c[0] += 0.5;
        c
    };
    let feasible = |s: f64| -> Result<bool> {
        let m = perm_combination_real(&perms, &with_scale(s), d)?;
        Ok(spectral_window_check(&m, 0.0, 1.0)?.is_ppt)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while feasible(hi)? {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(with_scale(lo))
}

/// `e^x` enclosed between rationals, for `x ≥ 0`.
pub fn exp_interval(x: &BigRational) -> (BigRational, BigRational) {
    const TERMS: usize = 40;
    let mut term = BigRational::one();
    let mut partial = BigRational::zero();
    for k in 0..TERMS {
        partial += &term;
        term = term * x / from_int(k + 1);
    }
    // Remaining tail is at most term·e^x, so e^x ≤ partial / (1 − term).
    let upper = if term < BigRational::one() {
        &partial / (BigRational::one() - &term)
    } else {
        // Far outside the regime of interest; fall back to a coarse bound.
        let xf = to_f64(x);
        BigRational::from_float(xf.exp() * 1.01 + 1.0).expect("finite")
    };
    (partial, upper)
}

/// One quantity in a chain `q₀ ≤ q₁ ≤ …`, with an optional exact enclosure.
#[derive(Clone, Debug)]
pub struct ChainTerm {
    pub label: &'static str,
    pub value: f64,
    pub exact: Option<(BigRational, BigRational)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundContext {
    Hiding,
    ProductTest,
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub context: BoundContext,
    pub n: usize,
    pub d: usize,
    /// `n⁴ ≤ d` for hiding, `n⁸ ≤ d` for the product test.
    pub valid: bool,
    pub chain: Vec<ChainTerm>,
}

impl BoundReport {
    /// Final (weakest) element of the chain.
    pub fn bound(&self) -> f64 {
        self.chain.last().map(|t| t.value).unwrap_or(0.0)
    }

    /// Tightest element of the chain.
    pub fn tightest(&self) -> f64 {
        self.chain.first().map(|t| t.value).unwrap_or(0.0)
    }

    /// Consecutive ordering in floating point (relative slack `1e−12`).
    pub fn ordered(&self) -> bool {
        self.chain
            .windows(2)
            .all(|w| w[0].value <= w[1].value * (1.0 + 1e-12) + 1e-15)
    }

    /// Consecutive ordering certified in rationals, when every term has an
    /// exact enclosure.
    pub fn ordered_exactly(&self) -> Option<bool> {
        let exact: Option<Vec<&(BigRational, BigRational)>> = self.chain.iter().map(|t| t.exact.as_ref()).collect();
        exact.map(|e| e.windows(2).all(|w| w[0].1 <= w[1].0))
    }
}

/// `r` with `r^k = d`, if `d` is a perfect `k`-th power.
fn exact_root(d: usize, k: u32) -> Option<usize> {
    let r = d.nth_root(k);
    (r.checked_pow(k) == Some(d)).then_some(r)
}

/// Number of permutations of `S_n` at each transposition distance.
fn distance_counts(n: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; n.max(1)];
    for p in symgroup::enumerate(n)? {
        counts[symgroup::transposition_distance(&p)] += 1;
    }
    Ok(counts)
}

/// `Σ_{π ∈ S_n} x^{|π|}` from the distance tally.
fn weighted_sum_f64(counts: &[usize], x: f64) -> f64 {
    counts.iter().enumerate().map(|(k, &c)| c as f64 * x.powi(k as i32)).sum()
}

fn weighted_sum_exact(counts: &[usize], x: &BigRational) -> BigRational {
    let mut power = BigRational::one();
    let mut total = BigRational::zero();
    for &c in counts {
        total += from_int(c) * &power;
        power *= x;
    }
    total
}

fn point(q: BigRational) -> Option<(BigRational, BigRational)> {
    Some((q.clone(), q))
}

/// Largest `n` whose symmetric group is enumerated for the bound chains.
pub const CHAIN_ENUMERATION_N: usize = 8;

/// `2Σ_{π≠e} d^{−|π|/2} ≤ 3(e^{n²/√d} − 1) ≤ 6n²/√d`.
pub fn hiding_bias_bound(n: usize, d: usize) -> Result<BoundReport> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("n and d must be positive".into()));
    }
    let valid = (n as f64).powi(4) <= d as f64;
    let sd = (d as f64).sqrt();
    let y = (n * n) as f64 / sd;
    let root = exact_root(d, 2);
    let first = if n <= CHAIN_ENUMERATION_N {
        let counts = distance_counts(n)?;
        let x = 1.0 / sd;
        ChainTerm {
            label: "2·sum over non-identity permutations of d^(-|pi|/2)",
            value: 2.0 * (weighted_sum_f64(&counts, x) - 1.0),
            exact: root.and_then(|r| {
                let s = weighted_sum_exact(&counts, &rational(1, r as i64));
                point(from_int(2) * (s - BigRational::one()))
            }),
        }
    } else {
        // Σ_π x^{|π|} ≤ (1 − C(n,2)x)^{−1} with x = d^{−1/2}.
        let edges = to_f64(&from_int(binomial(n, 2)));
        let value = if edges < sd { 2.0 * (1.0 / (1.0 - edges / sd) - 1.0) } else { f64::INFINITY };
        ChainTerm {
            label: "Cayley geometric bound on 2·sum over non-identity permutations",
            value,
            exact: None,
        }
    };
    let exp_term = ChainTerm {
        label: "3(exp(n^2/sqrt d) - 1)",
        value: 3.0 * (y.exp() - 1.0),
        exact: root.map(|r| {
            let (lo, hi) = exp_interval(&rational((n * n) as i64, r as i64));
            (from_int(3) * (lo - BigRational::one()), from_int(3) * (hi - BigRational::one()))
        }),
    };
    let linear = ChainTerm {
        label: "6n^2/sqrt d",
        value: 6.0 * y,
        exact: root.and_then(|r| point(rational(6 * (n * n) as i64, r as i64))),
    };
    Ok(BoundReport {
        context: BoundContext::Hiding,
        n,
        d,
        valid,
        chain: vec![first, exp_term, linear],
    })
}

/// `2((Σ_π d^{−|π|/4})² − 1) ≤ 2(e^{n²/d^{1/4}} − 1) ≤ 4n²/d^{1/4}`.
pub fn product_test_bound(n: usize, d: usize) -> Result<BoundReport> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("n and d must be positive".into()));
    }
    let valid = (n as f64).powi(8) <= d as f64;
    let qd = (d as f64).powf(0.25);
    let y = (n * n) as f64 / qd;
    let root = exact_root(d, 4);
    let first = if n <= CHAIN_ENUMERATION_N {
        let counts = distance_counts(n)?;
        let s = weighted_sum_f64(&counts, 1.0 / qd);
        ChainTerm {
            label: "2((sum over permutations of d^(-|pi|/4))^2 - 1)",
            value: 2.0 * (s * s - 1.0),
            exact: root.and_then(|r| {
                let s = weighted_sum_exact(&counts, &rational(1, r as i64));
                point(from_int(2) * (&s * &s - BigRational::one()))
            }),
        }
    } else {
        let edges = to_f64(&from_int(binomial(n, 2)));
        let value = if edges < qd {
            let b = 1.0 / (1.0 - edges / qd);
            2.0 * (b * b - 1.0)
        } else {
            f64::INFINITY
        };
        ChainTerm {
            label: "Cayley geometric bound on 2((sum)^2 - 1)",
            value,
            exact: None,
        }
    };
    let exp_term = ChainTerm {
        label: "2(exp(n^2/d^(1/4)) - 1)",
        value: 2.0 * (y.exp() - 1.0),
        exact: root.map(|r| {
            let (lo, hi) = exp_interval(&rational((n * n) as i64, r as i64));
            (from_int(2) * (lo - BigRational::one()), from_int(2) * (hi - BigRational::one()))
        }),
    };
    let linear = ChainTerm {
        label: "4n^2/d^(1/4)",
        value: 4.0 * y,
        exact: root.and_then(|r| point(rational(4 * (n * n) as i64, r as i64))),
    };
    Ok(BoundReport {
        context: BoundContext::ProductTest,
        n,
        d,
        valid,
        chain: vec![first, exp_term, linear],
    })
}

/// One measurement of the two-copy hiding demonstration, `M = a·I + b·F`.
#[derive(Clone, Debug)]
pub struct HidingMeasurement {
    pub label: String,
    pub kind: OperatorKind,
    pub a: f64,
    pub b: f64,
    /// Whether the operator passed the partial-transpose window check.
    pub feasible: bool,
    /// `tr M(ρ₀ − ρ₁)`.
    pub bias: f64,
    /// Coefficient margins for feasible operators.
    pub coeff_margin: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct HidingDemo {
    pub d: usize,
    pub measurements: Vec<HidingMeasurement>,
    /// `‖ρ₀ − ρ₁‖₁ / 2` for the normalized symmetric and antisymmetric projectors.
    pub global_bias: f64,
    pub bound: BoundReport,
}

impl HidingDemo {
    /// Largest `|bias|` among feasible measurements.
    pub fn best_feasible_bias(&self) -> f64 {
        self.measurements
            .iter()
            .filter(|m| m.feasible)
            .map(|m| m.bias.abs())
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of the partial transposes of `aI + bF` on two qudits:
/// `a ± b` with no transpose (or both legs), `a` and `a + bd` for one leg.
fn two_copy_window_holds(a: f64, b: f64, d: usize, kind: OperatorKind) -> bool {
    let (lo, hi) = kind.window();
    [a + b, a - b, a, a + b * d as f64]
        .iter()
        .all(|&e| e >= lo - 1e-12 && e <= hi + 1e-12)
}

/// Points per coefficient in the hiding grid search over `[−2, 2]`.
pub const HIDING_GRID_POINTS: usize = 200;

pub fn hiding_demo(d: usize) -> Result<HidingDemo> {
    let n = 2;
    let proj = projectors_and_states(d, n)?;
    let sym_dim = proj.symmetric.trace().re;
    let anti_dim = proj.antisymmetric.trace().re;
    if anti_dim <= 0.0 {
        return Err(Error::Precondition("d ≥ 2 is needed for an antisymmetric state".into()));
    }
    let delta = proj
        .symmetric
        .scale(1.0 / sym_dim)
        .sub(&proj.antisymmetric.scale(1.0 / anti_dim))?;
    // tr(IΔ) = 0 and tr(FΔ) = 2, so tr((aI + bF)Δ) = 2b.
    let global_bias = delta.trace_norm() / 2.0;

    let mut candidates: Vec<(String, OperatorKind, f64, f64)> = vec![
        ("trivial I/2".into(), OperatorKind::Effect, 0.5, 0.0),
        ("symmetric projector".into(), OperatorKind::Effect, 0.5, 0.5),
        ("symmetric minus antisymmetric".into(), OperatorKind::Difference, 0.0, 1.0),
        ("vertex effect a=b=1/(d+1)".into(), OperatorKind::Effect, 1.0 / (d as f64 + 1.0), 1.0 / (d as f64 + 1.0)),
        (
            "vertex difference a=(1-d)/(d+1), b=2/(d+1)".into(),
            OperatorKind::Difference,
            (1.0 - d as f64) / (d as f64 + 1.0),
            2.0 / (d as f64 + 1.0),
        ),
    ];
    for kind in [OperatorKind::Effect, OperatorKind::Difference] {
        let step = 4.0 / (HIDING_GRID_POINTS - 1) as f64;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..HIDING_GRID_POINTS {
            for j in 0..HIDING_GRID_POINTS {
                let (a, b) = (-2.0 + i as f64 * step, -2.0 + j as f64 * step);
                if two_copy_window_holds(a, b, d, kind) && best.map_or(true, |(_, bb)| b.abs() > bb.abs()) {
                    best = Some((a, b));
                }
            }
        }
        if let Some((a, b)) = best {
            let label = match kind {
                OperatorKind::Effect => "grid-search effect",
                OperatorKind::Difference => "grid-search difference",
            };
            candidates.push((label.into(), kind, a, b));
        }
    }

    let perms = symgroup::enumerate(n)?;
    let measurements = candidates
        .into_iter()
        .map(|(label, kind, a, b)| {
            let report = ppt_coeff_check(&[a, b], n, d, kind)?;
            let m = perm_combination_real(&perms, &[a, b], d)?;
            let bias = hs_inner(&m, &delta)?.re * m.side() as f64;
            Ok(HidingMeasurement {
                label,
                kind,
                a,
                b,
                feasible: report.ppt.is_ppt,
                bias,
                coeff_margin: report.min_margin(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HidingDemo {
        d,
        measurements,
        global_bias,
        bound: hiding_bias_bound(n, d)?,
    })
}
