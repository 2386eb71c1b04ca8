//! Haar and Ginibre sampling, Monte Carlo tensor moments, and the exact
//! formulas they are compared against.
//!
//! Sample `i` of a sampler with seed `s` is drawn from the ChaCha stream
//! `(s, i)`, so a sample never depends on which worker produced it. Samples
//! are accumulated in fixed blocks that are merged in block order, which keeps
//! every estimate bit-identical across thread counts.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dense_ops::{hermitian_eigenvalues, max_entangled, perm_operator, DenseOperator};
use crate::exact::{binomial, from_int, to_f64};
use crate::gram::build_gram;
use crate::limits::{saturating_pow, Limits};
use crate::schur_weyl::{self, dim_p, dim_q, IntegerPartition};
use crate::symgroup::{self, Permutation};
use crate::weingarten::WeingartenMatrix;
use crate::{Error, Result};

const BLOCK: usize = 1024;
const COMPANION_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// What a [`Sampler`] produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    /// The first `cols` columns of a Haar unitary on `C^rows`.
    HaarIsometry,
    /// I.i.d. complex Gaussian entries with `E|G_ij|² = variance`.
    Ginibre,
    /// A Haar-random unit vector in `C^rows`.
    PureState,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampler {
    pub kind: SamplerKind,
    pub rows: usize,
    pub cols: usize,
    pub variance: f64,
    pub seed: u64,
}

impl Sampler {
    pub fn haar_unitary(d: usize, seed: u64) -> Self {
        Self::haar_isometry(d, d, seed)
    }

    pub fn haar_isometry(rows: usize, cols: usize, seed: u64) -> Self {
        Sampler {
            kind: SamplerKind::HaarIsometry,
            rows,
            cols,
            variance: 1.0 / rows as f64,
            seed,
        }
    }

    /// Square Ginibre matrix with the `1/d` variance convention.
    pub fn ginibre(d: usize, seed: u64) -> Self {
        Self::ginibre_rect(d, d, 1.0 / d as f64, seed)
    }

    pub fn ginibre_rect(rows: usize, cols: usize, variance: f64, seed: u64) -> Self {
        Sampler {
            kind: SamplerKind::Ginibre,
            rows,
            cols,
            variance,
            seed,
        }
    }

    pub fn pure_state(dim: usize, seed: u64) -> Self {
        Sampler {
            kind: SamplerKind::PureState,
            rows: dim,
            cols: 1,
            variance: 1.0 / dim as f64,
            seed,
        }
    }

    /// The generator for sample `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    pub fn sample(&self, index: u64) -> DMatrix<Complex64> {
        let mut rng = self.rng(index);
        match self.kind {
            SamplerKind::Ginibre => gaussian_matrix(&mut rng, self.rows, self.cols, self.variance),
            SamplerKind::HaarIsometry => {
                orthonormalize(gaussian_matrix(&mut rng, self.rows, self.cols, 1.0))
            }
            SamplerKind::PureState => {
                let g = gaussian_matrix(&mut rng, self.rows, 1, 1.0);
                let norm = g.norm();
                g / Complex64::new(norm, 0.0)
            }
        }
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, variance: f64) -> DMatrix<Complex64> {
    let scale = (variance / 2.0).sqrt();
    // Column-major fill, matching nalgebra's storage order.
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    })
}

/// Modified Gram-Schmidt with one reorthogonalization pass. The implied
/// triangular factor has a positive real diagonal, which is the phase
/// normalization that makes the result Haar distributed.
fn orthonormalize(mut a: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let cols = a.ncols();
    for j in 0..cols {
        for _ in 0..2 {
            for k in 0..j {
                let qk = a.column(k).into_owned();
                let proj = qk.dotc(&a.column(j));
                a.column_mut(j).axpy(-proj, &qk, Complex64::new(1.0, 0.0));
            }
        }
        let norm = a.column(j).norm();
        a.column_mut(j).unscale_mut(norm);
    }
    a
}

/// Haar unitary number `index` of the stream with seed `seed`.
pub fn haar_unitary(d: usize, seed: u64, index: u64) -> DMatrix<Complex64> {
    Sampler::haar_unitary(d, seed).sample(index)
}

/// Ginibre matrix with `E|G_ij|² = 1/d`.
pub fn ginibre(d: usize, seed: u64, index: u64) -> DMatrix<Complex64> {
    Sampler::ginibre(d, seed).sample(index)
}

/// Monte Carlo mean of a complex matrix-valued statistic with per-entry
/// standard errors of the real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentEstimate {
    pub mean: DMatrix<Complex64>,
    pub stderr_re: DMatrix<f64>,
    pub stderr_im: DMatrix<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl MomentEstimate {
    pub fn scalar(&self) -> Complex64 {
        self.mean[(0, 0)]
    }

    /// Largest `|Δ| − (k·stderr + atol)` over real and imaginary parts of all
    /// entries; agreement at `k` standard errors means this is `≤ 0`.
    pub fn worst_excess(&self, exact: &DMatrix<Complex64>, k: f64, atol: f64) -> Result<f64> {
        if exact.shape() != self.mean.shape() {
            return Err(Error::SizeMismatch(exact.len(), self.mean.len()));
        }
        let mut worst = f64::NEG_INFINITY;
        for idx in 0..exact.len() {
            let diff = self.mean[idx] - exact[idx];
            worst = worst
                .max(diff.re.abs() - (k * self.stderr_re[idx] + atol))
                .max(diff.im.abs() - (k * self.stderr_im[idx] + atol));
        }
        Ok(worst)
    }

    pub fn agrees_with(&self, exact: &DMatrix<Complex64>, k: f64, atol: f64) -> Result<bool> {
        Ok(self.worst_excess(exact, k, atol)? <= 0.0)
    }

    /// Largest `|Δ|/stderr` over all real and imaginary parts with nonzero
    /// standard error.
    pub fn max_z_score(&self, exact: &DMatrix<Complex64>) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..exact.len() {
            let diff = self.mean[idx] - exact[idx];
            if self.stderr_re[idx] > 0.0 {
                worst = worst.max(diff.re.abs() / self.stderr_re[idx]);
            }
            if self.stderr_im[idx] > 0.0 {
                worst = worst.max(diff.im.abs() / self.stderr_im[idx]);
            }
        }
        worst
    }
}

#[derive(Clone)]
struct Accumulator {
    sum_re: Vec<f64>,
    sum_im: Vec<f64>,
    sq_re: Vec<f64>,
    sq_im: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Accumulator {
            sum_re: vec![0.0; len],
            sum_im: vec![0.0; len],
            sq_re: vec![0.0; len],
            sq_im: vec![0.0; len],
        }
    }

    fn push(&mut self, values: &[Complex64]) {
        for (k, v) in values.iter().enumerate() {
            self.sum_re[k] += v.re;
            self.sum_im[k] += v.im;
            self.sq_re[k] += v.re * v.re;
            self.sq_im[k] += v.im * v.im;
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for k in 0..self.sum_re.len() {
            self.sum_re[k] += other.sum_re[k];
            self.sum_im[k] += other.sum_im[k];
            self.sq_re[k] += other.sq_re[k];
            self.sq_im[k] += other.sq_im[k];
        }
    }
}

/// Estimates `E[f(i, sample_i)]` where `f` writes a `rows × cols` matrix
/// (row-major) into its output buffer. `threads` only changes wall time.
pub fn estimate<F>(sampler: &Sampler, samples: usize, shape: (usize, usize), threads: usize, f: F) -> Result<MomentEstimate>
where
    F: Fn(u64, &DMatrix<Complex64>, &mut [Complex64]) + Sync,
{
    if samples < 2 {
        return Err(Error::Precondition("at least two samples are needed for a standard error".into()));
    }
    let len = shape.0 * shape.1;
    let blocks = samples.div_ceil(BLOCK);
    let threads = threads.max(1);
    let run_block = |b: usize| {
        let mut acc = Accumulator::new(len);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for i in b * BLOCK..((b + 1) * BLOCK).min(samples) {
            let x = sampler.sample(i as u64);
            f(i as u64, &x, &mut buf);
            acc.push(&buf);
        }
        acc
    };
    let mut total = Accumulator::new(len);
    let mut next = 0;
    while next < blocks {
        let round: Vec<usize> = (next..(next + threads).min(blocks)).collect();
        let results: Vec<Accumulator> = if round.len() == 1 {
            vec![run_block(round[0])]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = round.iter().map(|&b| scope.spawn(move || run_block(b))).collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            })
        };
        for acc in &results {
            total.merge(acc);
        }
        next += round.len();
    }
    let n = samples as f64;
    let stderr = |sum: f64, sq: f64| {
        let var = ((sq - sum * sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    };
    // Estimates are stored row-major in the buffers.
    Ok(MomentEstimate {
        mean: DMatrix::from_fn(shape.0, shape.1, |r, c| {
            let k = r * shape.1 + c;
            Complex64::new(total.sum_re[k] / n, total.sum_im[k] / n)
        }),
        stderr_re: DMatrix::from_fn(shape.0, shape.1, |r, c| {
            let k = r * shape.1 + c;
            stderr(total.sum_re[k], total.sq_re[k])
        }),
        stderr_im: DMatrix::from_fn(shape.0, shape.1, |r, c| {
            let k = r * shape.1 + c;
            stderr(total.sum_im[k], total.sq_im[k])
        }),
        samples,
        seed: sampler.seed,
    })
}

/// `X^{⊗n}` for a square matrix.
fn tensor_power(x: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    let mut out = x.clone();
    for _ in 1..n {
        out = out.kronecker(x);
    }
    out
}

/// Writes `V ⊗ conj(V)` row-major into `out`, with `V = X^{⊗n}`.
fn write_moment_sample(x: &DMatrix<Complex64>, n: usize, out: &mut [Complex64]) {
    let v = tensor_power(x, n);
    let s = v.nrows();
    let side = s * s;
    for r1 in 0..s {
        for r2 in 0..s {
            let row = (r1 * s + r2) * side;
            for c1 in 0..s {
                let a = v[(r1, c1)];
                let base = row + c1 * s;
                for c2 in 0..s {
                    out[base + c2] = a * v[(r2, c2)].conj();
                }
            }
        }
    }
}

fn check_moment_side(n: usize, d: usize) -> Result<usize> {
    let side = saturating_pow(d, 2 * n);
    Limits::check("dense side", side, Limits::default().max_dense_side)?;
    Ok(side)
}

/// Monte Carlo `E[U^{⊗n} ⊗ conj(U)^{⊗n}]` over Haar unitaries.
pub fn haar_moment_mc(n: usize, d: usize, samples: usize, seed: u64, threads: usize) -> Result<MomentEstimate> {
    let side = check_moment_side(n, d)?;
    estimate(&Sampler::haar_unitary(d, seed), samples, (side, side), threads, |_, u, out| {
        write_moment_sample(u, n, out)
    })
}

/// Monte Carlo `E[G^{⊗n} ⊗ conj(G)^{⊗n}]` over Ginibre matrices.
pub fn ginibre_moment_mc(n: usize, d: usize, samples: usize, seed: u64, threads: usize) -> Result<MomentEstimate> {
    let side = check_moment_side(n, d)?;
    estimate(&Sampler::ginibre(d, seed), samples, (side, side), threads, |_, g, out| {
        write_moment_sample(g, n, out)
    })
}

/// Column `x` of `P_d(π)` is the basis vector `images[x]`.
fn perm_images(pi: &Permutation, d: usize) -> Result<Vec<usize>> {
    let p = perm_operator(pi, d)?;
    let side = p.side();
    Ok((0..side)
        .map(|x| (0..side).find(|&y| p.data()[(y, x)].re != 0.0).expect("permutation matrix"))
        .collect())
}

/// Which half of the `2n` legs the permutation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Half {
    A,
    B,
}

/// Columns `(P ⊗ I)|Φ⟩^{⊗n}` or `(I ⊗ P)|Φ⟩^{⊗n}` for every `π ∈ S_n`.
fn twisted_states(perms: &[Permutation], d: usize, half: Half) -> Result<DMatrix<Complex64>> {
    let n = perms[0].n();
    let dim = saturating_pow(d, n);
    let phi = max_entangled(d, n);
    let amp = phi[0];
    let mut k = DMatrix::from_element(dim * dim, perms.len(), Complex64::new(0.0, 0.0));
    for (col, pi) in perms.iter().enumerate() {
        let images = perm_images(pi, d)?;
        for x in 0..dim {
            let row = match half {
                Half::A => images[x] * dim + x,
                Half::B => x * dim + images[x],
            };
            k[(row, col)] = amp;
        }
    }
    Ok(k)
}

fn sandwich(k: &DMatrix<Complex64>, w: &DMatrix<f64>, d: usize, legs: usize) -> Result<DenseOperator> {
    let wc = w.map(|x| Complex64::new(x, 0.0));
    DenseOperator::new(k * wc * k.adjoint(), d, legs)
}

/// `Σ_{σ,τ} Wg(σ,τ) (I⊗P(σ))Φ^{⊗n}((I⊗P(τ))Φ^{⊗n})†`, the exact Haar moment.
pub fn cs_unitary_exact(wg: &WeingartenMatrix) -> Result<DenseOperator> {
    let (n, d) = (wg.n(), wg.d());
    check_moment_side(n, d)?;
    let k = twisted_states(wg.perms(), d, Half::B)?;
    sandwich(&k, &wg.to_f64(), d, 2 * n)
}

/// `Σ_π (I⊗P(π))Φ^{⊗n}((I⊗P(π))Φ^{⊗n})†`, the exact Ginibre moment.
pub fn wick_exact(n: usize, d: usize) -> Result<DenseOperator> {
    check_moment_side(n, d)?;
    let perms = symgroup::enumerate(n)?;
    let k = twisted_states(&perms, d, Half::B)?;
    sandwich(&k, &DMatrix::identity(perms.len(), perms.len()), d, 2 * n)
}

/// `‖wick_exact − cs_unitary_exact‖_∞` without building either operator.
///
/// With `K` the matrix of twisted states, `K†K = G` and the difference is
/// `K(I − Wg)K†`, which has the nonzero spectrum of `G^{1/2}(I − G⁻¹)G^{1/2} = G − I`.
pub fn wick_haar_gap(n: usize, d: usize) -> Result<f64> {
    let report = crate::gram::spectral_report(&build_gram(n, d)?)?;
    Ok(report.op_norm_distance)
}

/// Block coefficients of the two `n`-copy state moments on `Q_λ ⊗ Q_λ`.
#[derive(Clone, Debug)]
pub struct StateMomentBlock {
    pub partition: IntegerPartition,
    /// `E_ψ[ψ^{⊗n}]` coefficient `1/C(d²+n−1, n)`.
    pub random_state: BigRational,
    /// `E_U[φ_U^{⊗n}]` coefficient `dim P_λ/(dim Q_λ · dⁿ)`.
    pub max_entangled: BigRational,
    /// `random_state / max_entangled`.
    pub ratio: BigRational,
    /// `(dim Q_λ)²`.
    pub block_dimension: BigInt,
}

pub fn state_moment_operators(n: usize, d: usize) -> Result<Vec<StateMomentBlock>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("n and d must be positive".into()));
    }
    let psi = from_int(binomial(d * d + n - 1, n)).recip();
    let dn = from_int(num_traits::pow(BigInt::from(d), n));
    schur_weyl::partitions(n, d)
        .into_iter()
        .map(|lambda| {
            let q = dim_q(&lambda, d)?;
            let u = from_int(dim_p(&lambda)) / (from_int(q.clone()) * &dn);
            Ok(StateMomentBlock {
                ratio: &psi / &u,
                random_state: psi.clone(),
                max_entangled: u,
                block_dimension: &q * &q,
                partition: lambda,
            })
        })
        .collect()
}

/// Monte Carlo block coefficients at `n = 2`: for λ = (2) and (1,1) the block
/// projectors are `Π_sym^A ⊗ Π_sym^B` and `Π_anti^A ⊗ Π_anti^B` on legs
/// `(A₁, B₁, A₂, B₂)`.
#[derive(Clone, Debug)]
pub struct TwoCopyBlockEstimate {
    /// Rows: λ = (2), (1,1). Columns: random state, random maximally entangled state.
    pub estimate: MomentEstimate,
    pub exact: DMatrix<Complex64>,
}

pub fn two_copy_block_mc(d: usize, samples: usize, seed: u64) -> Result<TwoCopyBlockEstimate> {
    let blocks = state_moment_operators(2, d)?;
    let swap = |a: usize, b: usize| -> Result<DenseOperator> {
        perm_operator(&Permutation::transposition(4, a, b)?, d)
    };
    let id = DenseOperator::identity(d, 4);
    let f13 = swap(1, 3)?;
    let f24 = swap(2, 4)?;
    let sym = id.add(&f13)?.mul(&id.add(&f24)?)?.scale(0.25);
    let anti = id.sub(&f13)?.mul(&id.sub(&f24)?)?.scale(0.25);
    let projectors = [sym, anti];
    let exact = DMatrix::from_fn(2, 2, |r, c| {
        let b = &blocks[r];
        let v = if c == 0 { &b.random_state } else { &b.max_entangled };
        Complex64::new(to_f64(v), 0.0)
    });
    let dims: Vec<f64> = blocks.iter().map(|b| to_f64(&from_int(b.block_dimension.clone()))).collect();
    // Sample i pairs state i of the pure-state stream with unitary i of a
    // companion stream under a derived seed.
    let sampler = Sampler::pure_state(d * d, seed);
    let companion = Sampler::haar_unitary(d, seed.wrapping_add(COMPANION_SEED_OFFSET));
    let phi = max_entangled(d, 1);
    let estimate = estimate(&sampler, samples, (2, 2), 1, |i, psi, out| {
        let psi = psi.column(0).into_owned();
        let u = companion.sample(i);
        let rotated = rotate_a(&u, &phi, d);
        for (r, p) in projectors.iter().enumerate() {
            out[r * 2] = Complex64::new(two_copy_expectation(p, &psi) / dims[r], 0.0);
            out[r * 2 + 1] = Complex64::new(two_copy_expectation(p, &rotated) / dims[r], 0.0);
        }
    })?;
    Ok(TwoCopyBlockEstimate { estimate, exact })
}

/// `(U ⊗ I)|Φ⟩`.
fn rotate_a(u: &DMatrix<Complex64>, phi: &DVector<Complex64>, d: usize) -> DVector<Complex64> {
    let mut out = DVector::from_element(d * d, Complex64::new(0.0, 0.0));
    for a in 0..d {
        for b in 0..d {
            let amp = phi[a * d + b];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..d {
                out[r * d + b] += u[(r, a)] * amp;
            }
        }
    }
    out
}

/// `⟨v⊗v| P |v⊗v⟩` for a vector on `C^{d²}`, with legs `(A₁,B₁,A₂,B₂)`.
fn two_copy_expectation(p: &DenseOperator, v: &DVector<Complex64>) -> f64 {
    let vv = v.kronecker(v);
    (vv.adjoint() * p.data() * &vv)[(0, 0)].re
}

/// Spectral comparison of `ρ = (1/n!) Σ_π |v_π⟩⟨v_π|`,
/// `|v_π⟩ = (P_d(π) ⊗ I)|Φ⟩^{⊗n}`, with the Gram spectrum.
#[derive(Clone, Debug)]
pub struct PsiPiGram {
    /// The `n!` largest eigenvalues of `ρ`, ascending.
    pub top_eigenvalues: Vec<f64>,
    /// Closed-form Gram spectrum divided by `n!`, ascending, kernel included.
    pub expected: Vec<f64>,
    pub trace: f64,
    pub max_deviation: f64,
}

pub fn psi_pi_gram(n: usize, d: usize) -> Result<PsiPiGram> {
    check_moment_side(n, d)?;
    let perms = symgroup::enumerate(n)?;
    let count = perms.len();
    let k = twisted_states(&perms, d, Half::A)?;
    let rho = (&k * k.adjoint()).unscale(count as f64);
    let mut eig = hermitian_eigenvalues(&rho);
    eig.sort_by(f64::total_cmp);
    let top = eig[eig.len() - count..].to_vec();
    let trace: f64 = eig.iter().sum();
    let spectrum = schur_weyl::exact_spectrum(n, d)?;
    let mut expected: Vec<f64> = spectrum.sorted_values().iter().map(|v| v / count as f64).collect();
    expected.sort_by(f64::total_cmp);
    let max_deviation = top
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(PsiPiGram {
        top_eigenvalues: top,
        expected,
        trace,
        max_deviation,
    })
}
