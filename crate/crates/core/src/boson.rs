//! Permanents and the comparison of `|Per|^{2t}` moments between leading
//! `n×n` blocks of Haar unitaries on `C^m` and i.i.d. Gaussian matrices with
//! entry variance `1/m`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exact::{binomial, factorial, from_int};
use crate::limits::Limits;
use crate::random_moments::{estimate, MomentEstimate, Sampler};
use crate::symgroup::{self, Permutation};
use crate::{Error, Result};

const GAUSSIAN_SEED_OFFSET: u64 = 0x5851_f42d_4c95_7f2d;

/// Ryser's formula with Gray-code subset updates, `O(2ⁿ n)`.
pub fn permanent(a: &DMatrix<Complex64>) -> Result<Complex64> {
    permanent_with(a, &Limits::default())
}

pub fn permanent_with(a: &DMatrix<Complex64>, limits: &Limits) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::SizeMismatch(a.nrows(), a.ncols()));
    }
    Limits::check("permanent side", n, limits.max_permanent_side)?;
    if n == 0 {
        return Ok(Complex64::one());
    }
    let mut row_sums = vec![Complex64::zero(); n];
    let mut total = Complex64::zero();
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let flipped = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << flipped) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += a[(i, flipped)];
            } else {
                *s -= a[(i, flipped)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if (n - next.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    Ok(total)
}

/// `Σ_π ∏ a_{i,π(i)}` over all of `S_n`.
pub fn naive_permanent(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::SizeMismatch(a.nrows(), a.ncols()));
    }
    Ok(symgroup::enumerate(n)?
        .iter()
        .map(|p| (0..n).map(|i| a[(i, p.apply(i + 1) - 1)]).product::<Complex64>())
        .sum())
}

/// `w(π) = |π({1..n}) ∩ {n+1..2n}|` for `π ∈ S_{2n}`.
pub fn w_stat(pi: &Permutation) -> Result<usize> {
    if pi.n() % 2 != 0 {
        return Err(Error::InvalidInput(format!("w statistic needs an even degree, got {}", pi.n())));
    }
    let n = pi.n() / 2;
    Ok((1..=n).filter(|&x| pi.apply(x) > n).count())
}

/// `|w⁻¹(ℓ)| = n!² C(n,ℓ)²`.
pub fn w_class_size(n: usize, ell: usize) -> Result<BigInt> {
    if ell > n {
        return Err(Error::InvalidInput(format!("ℓ = {ell} exceeds n = {n}")));
    }
    let f = factorial(n);
    let b = binomial(n, ell);
    Ok(&f * &f * &b * &b)
}

/// Class sizes of `w` over `S_{2n}` by direct enumeration.
pub fn w_class_sizes_enumerated(n: usize) -> Result<Vec<BigInt>> {
    let mut counts = vec![0u64; n + 1];
    for p in symgroup::enumerate(2 * n)? {
        counts[w_stat(&p)?] += 1;
    }
    Ok(counts.into_iter().map(BigInt::from).collect())
}

/// `α_π = 1/(C(n, w(π)) mⁿ)` for the `t = 2` overlap decomposition.
pub fn alpha_overlap(pi: &Permutation, m: usize) -> Result<BigRational> {
    let n = pi.n() / 2;
    let w = w_stat(pi)?;
    let mn = num_traits::pow(BigInt::from(m), n);
    Ok(BigRational::new(BigInt::one(), binomial(n, w) * mn))
}

/// `E|Per(X)|⁴ = (n+1) n!² / m^{2n}`.
pub fn gaussian_fourth_exact(n: usize, m: usize) -> BigRational {
    let f = factorial(n);
    BigRational::new(
        BigInt::from(n + 1) * &f * &f,
        num_traits::pow(BigInt::from(m), 2 * n),
    )
}

/// `E|Per(X)|² = n! / mⁿ`.
pub fn gaussian_second_exact(n: usize, m: usize) -> BigRational {
    BigRational::new(factorial(n), num_traits::pow(BigInt::from(m), n))
}

/// `Σ_ℓ |w⁻¹(ℓ)| · (C(n,ℓ) mⁿ)^{−2}`, the class-size route to the fourth moment.
pub fn gaussian_fourth_by_classes(n: usize, m: usize) -> Result<BigRational> {
    let mn = from_int(num_traits::pow(BigInt::from(m), n));
    (0..=n).try_fold(BigRational::zero(), |acc, ell| {
        let alpha = (from_int(binomial(n, ell)) * &mn).recip();
        Ok(acc + from_int(w_class_size(n, ell)?) * &alpha * &alpha)
    })
}

/// `Σ_{π ∈ S_{2n}} α_π²` by enumeration.
pub fn gaussian_fourth_by_overlaps(n: usize, m: usize) -> Result<BigRational> {
    symgroup::enumerate(2 * n)?
        .iter()
        .try_fold(BigRational::zero(), |acc, p| {
            let a = alpha_overlap(p, m)?;
            Ok(acc + &a * &a)
        })
}

/// Summary of `E|Per|^{2t}` for one ensemble, in units of `m^{−nt}`.
#[derive(Clone, Debug)]
pub struct PermanentMoment {
    /// Columns: `x`, `x²`, `x³` with `x = m^{nt}|Per|^{2t}`.
    pub raw: MomentEstimate,
    pub mean: f64,
    pub stderr: f64,
    pub skewness: f64,
}

impl PermanentMoment {
    fn from_estimate(raw: MomentEstimate) -> Self {
        let m1 = raw.mean[(0, 0)].re;
        let m2 = raw.mean[(0, 1)].re;
        let m3 = raw.mean[(0, 2)].re;
        let var = (m2 - m1 * m1).max(0.0);
        let skewness = if var > 0.0 {
            (m3 - 3.0 * m1 * var - m1 * m1 * m1) / var.powf(1.5)
        } else {
            0.0
        };
        PermanentMoment {
            mean: m1,
            stderr: raw.stderr_re[(0, 0)],
            skewness,
            raw,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MomentExperiment {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub haar: PermanentMoment,
    pub gauss: PermanentMoment,
    /// `E|Per V|^{2t} / E|Per X|^{2t}`.
    pub ratio: f64,
    /// First-order propagated standard error of the ratio.
    pub ratio_stderr: f64,
    /// `n²t²/m`.
    pub bound: f64,
}

impl MomentExperiment {
    /// `[1 − bound − k·σ, 1 + bound + k·σ]`.
    pub fn window(&self, k: f64) -> (f64, f64) {
        (
            1.0 - self.bound - k * self.ratio_stderr,
            1.0 + self.bound + k * self.ratio_stderr,
        )
    }

    pub fn within_window(&self, k: f64) -> bool {
        let (lo, hi) = self.window(k);
        self.ratio >= lo && self.ratio <= hi
    }
}

fn leading_block(v: &DMatrix<Complex64>, n: usize) -> DMatrix<Complex64> {
    v.view((0, 0), (n, n)).into_owned()
}

fn moment_sample(block: &DMatrix<Complex64>, t: usize, scale: f64, out: &mut [Complex64]) {
    let per = permanent(block).expect("side within cap");
    let x = (per.norm_sqr() * scale).powi(t as i32);
    out[0] = Complex64::new(x, 0.0);
    out[1] = Complex64::new(x * x, 0.0);
    out[2] = Complex64::new(x * x * x, 0.0);
}

pub fn moment_experiment(m: usize, n: usize, t: usize, samples: usize, seed: u64) -> Result<MomentExperiment> {
    moment_experiment_with(m, n, t, samples, seed, &Limits::default(), 1)
}

pub fn moment_experiment_with(
    m: usize,
    n: usize,
    t: usize,
    samples: usize,
    seed: u64,
    limits: &Limits,
    threads: usize,
) -> Result<MomentExperiment> {
    if n == 0 || t == 0 || n > m {
        return Err(Error::Precondition(format!("need 1 ≤ n ≤ m and t ≥ 1, got n={n}, m={m}, t={t}")));
    }
    if n * n * t * t > 2 * m {
        return Err(Error::Precondition(format!(
            "n²t² = {} exceeds 2m = {}",
            n * n * t * t,
            2 * m
        )));
    }
    Limits::check("moment order t", t, limits.max_moment_order)?;
    Limits::check("permanent side", n, limits.max_permanent_side)?;
    let scale = (m as f64).powi(n as i32);
    let haar = estimate(&Sampler::haar_isometry(m, n, seed), samples, (1, 3), threads, |_, v, out| {
        moment_sample(&leading_block(v, n), t, scale, out)
    })?;
    let gauss_sampler = Sampler::ginibre_rect(n, n, 1.0 / m as f64, seed.wrapping_add(GAUSSIAN_SEED_OFFSET));
    let gauss = estimate(&gauss_sampler, samples, (1, 3), threads, |_, x, out| {
        moment_sample(x, t, scale, out)
    })?;
    let haar = PermanentMoment::from_estimate(haar);
    let gauss = PermanentMoment::from_estimate(gauss);
    let ratio = haar.mean / gauss.mean;
    let ratio_stderr = ratio.abs() * ((haar.stderr / haar.mean).powi(2) + (gauss.stderr / gauss.mean).powi(2)).sqrt();
    Ok(MomentExperiment {
        m,
        n,
        t,
        ratio,
        ratio_stderr,
        bound: (n * n * t * t) as f64 / m as f64,
        haar,
        gauss,
    })
}

/// Monte Carlo `E[Per V]` for the leading `n×n` block of a Haar unitary on `C^m`.
pub fn haar_permanent_mean(m: usize, n: usize, samples: usize, seed: u64) -> Result<MomentEstimate> {
    if n == 0 || n > m {
        return Err(Error::Precondition(format!("need 1 ≤ n ≤ m, got n={n}, m={m}")));
    }
    Limits::check("permanent side", n, Limits::default().max_permanent_side)?;
    estimate(&Sampler::haar_isometry(m, n, seed), samples, (1, 1), 1, |_, v, out| {
        out[0] = permanent(&leading_block(v, n)).expect("side within cap")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;
    use crate::random_moments::ginibre;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn permanent_examples() {
        let id = DMatrix::<Complex64>::identity(3, 3);
        assert!((permanent(&id).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
        for n in 1..=6 {
            let ones = DMatrix::from_element(n, n, c(1.0, 0.0));
            let f: usize = (1..=n).product();
            assert!((permanent(&ones).unwrap() - c(f as f64, 0.0)).norm() < 1e-9);
        }
        let (a, b, cc, d) = (c(1.0, 2.0), c(-0.5, 0.3), c(2.0, -1.0), c(0.7, 0.1));
        let m = DMatrix::from_row_slice(2, 2, &[a, b, cc, d]);
        assert!((permanent(&m).unwrap() - (a * d + b * cc)).norm() < 1e-14);
        assert!((permanent(&DMatrix::<Complex64>::zeros(0, 0)).unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn ryser_matches_naive() {
        for n in 1..=6 {
            for i in 0..5 {
                let x = ginibre(n, 77, i);
                let r = permanent(&x).unwrap();
                let s = naive_permanent(&x).unwrap();
                assert!((r - s).norm() <= 1e-10 * s.norm().max(1e-300), "n={n}");
            }
        }
    }

    #[test]
    fn permanent_caps_and_shape() {
        assert!(matches!(
            permanent(&DMatrix::<Complex64>::zeros(21, 21)),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(permanent(&DMatrix::<Complex64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn class_sizes() {
        let sizes: Vec<BigInt> = (0..=2).map(|l| w_class_size(2, l).unwrap()).collect();
        assert_eq!(sizes, vec![BigInt::from(4), BigInt::from(16), BigInt::from(4)]);
        for n in 1..=4 {
            let total: BigInt = (0..=n).map(|l| w_class_size(n, l).unwrap()).sum();
            assert_eq!(total, factorial(2 * n));
            let enumerated = w_class_sizes_enumerated(n).unwrap();
            let formula: Vec<BigInt> = (0..=n).map(|l| w_class_size(n, l).unwrap()).collect();
            assert_eq!(enumerated, formula);
        }
        assert!(w_class_size(2, 3).is_err());
    }

    #[test]
    fn fourth_moment_routes_agree() {
        assert_eq!(gaussian_fourth_exact(1, 1), from_int(2));
        assert_eq!(gaussian_fourth_exact(2, 10), rational(12, 10_000));
        for m in [1usize, 3, 7] {
            let m6 = num_traits::pow(BigInt::from(m), 6);
            assert_eq!(gaussian_fourth_exact(3, m), BigRational::new(BigInt::from(144), m6));
        }
        for n in 1..=3 {
            for m in [2usize, 5] {
                let exact = gaussian_fourth_exact(n, m);
                assert_eq!(gaussian_fourth_by_classes(n, m).unwrap(), exact);
                assert_eq!(gaussian_fourth_by_overlaps(n, m).unwrap(), exact);
            }
        }
    }

    #[test]
    fn alpha_examples() {
        let e = Permutation::identity(4);
        assert_eq!(alpha_overlap(&e, 5).unwrap(), rational(1, 25));
        let swap = Permutation::transposition(4, 2, 3).unwrap();
        assert_eq!(w_stat(&swap).unwrap(), 1);
        assert_eq!(alpha_overlap(&swap, 5).unwrap(), rational(1, 50));
        assert!(w_stat(&Permutation::identity(3)).is_err());
    }

    #[test]
    fn hypothesis_and_cap_enforced() {
        assert!(matches!(moment_experiment(8, 3, 2, 10, 0), Err(Error::Precondition(_))));
        assert!(matches!(moment_experiment(2000, 1, 4, 10, 0), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn small_moment_experiment() {
        let r = moment_experiment(64, 2, 1, 20_000, 11).unwrap();
        // Normalized Gaussian second moment is n! = 2.
        assert!((r.gauss.mean - 2.0).abs() <= 5.0 * r.gauss.stderr, "{:?} {:?}", r.gauss.mean, r.gauss.stderr);
        assert!(r.within_window(5.0), "ratio {} ± {}", r.ratio, r.ratio_stderr);
        assert!(r.haar.skewness > 0.0);
    }

    #[test]
    fn deterministic_experiment() {
        let a = moment_experiment(16, 2, 1, 3000, 5).unwrap();
        let b = moment_experiment(16, 2, 1, 3000, 5).unwrap();
        assert_eq!(a.ratio.to_bits(), b.ratio.to_bits());
    }

    #[test]
    fn haar_permanent_has_zero_mean() {
        let e = haar_permanent_mean(16, 2, 20_000, 8).unwrap();
        let zero = DMatrix::from_element(1, 1, c(0.0, 0.0));
        assert!(e.agrees_with(&zero, 5.0, 1e-12).unwrap());
    }
}
