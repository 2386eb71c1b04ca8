use crate::{Error, Result};

/// Resource caps guarding the dense and enumerative routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest `n` for which `S_n` is enumerated.
    pub max_enumeration_n: usize,
    /// Largest side length of an explicit operator on `(C^d)^{⊗n}`.
    pub max_dense_side: usize,
    /// Largest side length handed to the dense symmetric eigensolver for Gram spectra.
    pub max_eigen_side: usize,
    /// Largest number of set partitions enumerated.
    pub max_set_partitions: usize,
    /// Largest permanent side handled by Ryser's formula.
    pub max_permanent_side: usize,
    /// Largest `t` in Monte Carlo estimates of `E|Per|^{2t}`.
    pub max_moment_order: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_enumeration_n: 8,
            max_dense_side: 4096,
            max_eigen_side: 720,
            max_set_partitions: 21147,
            max_permanent_side: 20,
            max_moment_order: 3,
        }
    }
}

impl Limits {
    /// Caps lifted to effectively unbounded values.
    pub fn unbounded() -> Self {
        Limits {
            max_enumeration_n: 12,
            max_dense_side: usize::MAX,
            max_eigen_side: usize::MAX,
            max_set_partitions: usize::MAX,
            max_permanent_side: 30,
            max_moment_order: usize::MAX,
        }
    }

    pub(crate) fn check(what: &'static str, requested: usize, cap: usize) -> Result<()> {
        if requested > cap {
            Err(Error::ResourceLimit {
                what,
                requested,
                cap,
            })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` as `usize`, saturating on overflow.
pub(crate) fn saturating_pow(base: usize, exp: usize) -> usize {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
