//! Set partitions of `{1..n}` and the Gram matrix of the states
//! `|E_Π⟩ = d^{−b(Π)/2} Σ_{x ∈ [d]^Π} |x⟩`, where `[d]^Π` holds the strings
//! constant on every block of `Π`.
//!
//! The string sets intersect in the strings constant on the blocks of the
//! lattice join, so `⟨E_Π₁|E_Π₂⟩ = d^{b(Π₁∨Π₂) − (b(Π₁)+b(Π₂))/2}`. The matrix
//! of these overlaps is the *linear* variant; the *squared* variant holds
//! their squares.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::dense_ops::real_symmetric_eigenvalues;
use crate::exact::{binomial, from_int, pow_rational, rational};
use crate::{Error, Limits, Result};

/// A set partition stored as blocks of 1-based elements, each block sorted
/// and the blocks ordered by their minima.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// From a restricted growth string `a` (0-based, `a₀ = 0`, `aᵢ ≤ 1 + max_{j<i} aⱼ`).
    pub fn from_rgs(rgs: &[usize]) -> Result<Self> {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (i, &label) in rgs.iter().enumerate() {
            match label.cmp(&blocks.len()) {
                std::cmp::Ordering::Less => blocks[label].push(i + 1),
                std::cmp::Ordering::Equal => blocks.push(vec![i + 1]),
                std::cmp::Ordering::Greater => {
                    return Err(Error::InvalidInput(format!("{rgs:?} is not a restricted growth string")))
                }
            }
        }
        Ok(SetPartition { n: rgs.len(), blocks })
    }

    /// From arbitrary blocks; they must be nonempty, disjoint and cover `{1..n}`.
    pub fn from_blocks(n: usize, blocks: &[&[usize]]) -> Result<Self> {
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidInput("empty block".into()));
            }
            for &x in block.iter() {
                if x == 0 || x > n || label[x - 1] != usize::MAX {
                    return Err(Error::InvalidInput(format!("bad or repeated element {x}")));
                }
                label[x - 1] = b;
            }
        }
        if label.contains(&usize::MAX) {
            return Err(Error::InvalidInput("blocks do not cover the ground set".into()));
        }
        Self::from_labels(&label)
    }

    /// Canonicalizes an arbitrary block labelling of `{1..n}`.
    fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut relabel = std::collections::HashMap::new();
        let rgs: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = relabel.len();
                *relabel.entry(*l).or_insert(next)
            })
            .collect();
        Self::from_rgs(&rgs)
    }

    pub fn singletons(n: usize) -> Self {
        SetPartition {
            n,
            blocks: (1..=n).map(|x| vec![x]).collect(),
        }
    }

    pub fn one_block(n: usize) -> Self {
        SetPartition {
            n,
            blocks: if n == 0 { Vec::new() } else { vec![(1..=n).collect()] },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// 0-based block index of every element.
    pub fn rgs(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                out[x - 1] = b;
            }
        }
        out
    }

    /// Whether the string `x` (0-based symbols) is constant on every block.
    pub fn admits(&self, x: &[usize]) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|&i| x[i - 1] == x[b[0] - 1]))
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Bell numbers `B_0..=B_n` from the Bell triangle.
pub fn bell_numbers(n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    let mut row = vec![BigInt::one()];
    for _ in 0..n {
        let mut next = vec![row.last().cloned().unwrap_or_else(BigInt::one)];
        for v in &row {
            let last = next.last().unwrap().clone();
            next.push(last + v);
        }
        out.push(next[0].clone());
        row = next;
    }
    out
}

pub fn bell(n: usize) -> BigInt {
    bell_numbers(n).pop().unwrap()
}

/// `B_{n+1} = Σ_k C(n,k) B_k`, an independent route to the same numbers.
pub fn bell_by_recurrence(n: usize) -> BigInt {
    let mut b = vec![BigInt::one()];
    for m in 0..n {
        let next = (0..=m).map(|k| binomial(m, k) * &b[k]).sum();
        b.push(next);
    }
    b[n].clone()
}

fn check_bell(n: usize, limits: &Limits) -> Result<usize> {
    let count = bell(n).to_usize().unwrap_or(usize::MAX);
    Limits::check("set partitions", count, limits.max_set_partitions)?;
    Ok(count)
}

pub fn enumerate_set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    enumerate_set_partitions_with(n, &Limits::default())
}

/// All partitions in lexicographic order of their restricted growth strings,
/// so the one-block partition comes first and the singletons last.
pub fn enumerate_set_partitions_with(n: usize, limits: &Limits) -> Result<Vec<SetPartition>> {
    let count = check_bell(n, limits)?;
    let mut out = Vec::with_capacity(count);
    if n == 0 {
        out.push(SetPartition::one_block(0));
        return Ok(out);
    }
    let mut rgs = vec![0usize; n];
    // prefix_max[i] = max(rgs[0..=i])
    let mut prefix_max = vec![0usize; n];
    loop {
        out.push(SetPartition::from_rgs(&rgs)?);
        // Rightmost position that can still grow.
        let Some(i) = (1..n).rev().find(|&i| rgs[i] <= prefix_max[i - 1]) else {
            break;
        };
        rgs[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
        for j in i + 1..n {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
    Ok(out)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut root = x;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = x;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Finest partition coarser than both.
pub fn join(a: &SetPartition, b: &SetPartition) -> Result<SetPartition> {
    if a.n != b.n {
        return Err(Error::SizeMismatch(a.n, b.n));
    }
    let mut parent: Vec<usize> = (0..a.n).collect();
    for block in a.blocks.iter().chain(&b.blocks) {
        for &x in &block[1..] {
            let (r1, r2) = (find(&mut parent, block[0] - 1), find(&mut parent, x - 1));
            if r1 != r2 {
                parent[r1.max(r2)] = r1.min(r2);
            }
        }
    }
    let labels: Vec<usize> = (0..a.n).map(|x| find(&mut parent, x)).collect();
    SetPartition::from_labels(&labels)
}

/// Gram matrix of the `|E_Π⟩` over all partitions of `{1..n}`.
#[derive(Clone, Debug)]
pub struct PartitionGram {
    pub d: usize,
    pub partitions: Vec<SetPartition>,
    /// `b(Π_i ∨ Π_j)`, row-major.
    join_blocks: Vec<usize>,
}

impl PartitionGram {
    pub fn n(&self) -> usize {
        self.partitions.first().map_or(0, SetPartition::n)
    }

    pub fn side(&self) -> usize {
        self.partitions.len()
    }

    pub fn join_block_count(&self, i: usize, j: usize) -> usize {
        self.join_blocks[i * self.side() + j]
    }

    /// `2b(Π_i ∨ Π_j) − b(Π_i) − b(Π_j)`, always `≤ 0`; the linear entry is
    /// `d` to half this power and the squared entry `d` to this power.
    pub fn twice_linear_exponent(&self, i: usize, j: usize) -> i64 {
        2 * self.join_block_count(i, j) as i64
            - self.partitions[i].block_count() as i64
            - self.partitions[j].block_count() as i64
    }

    pub fn linear_entry(&self, i: usize, j: usize) -> f64 {
        (self.d as f64).powf(self.twice_linear_exponent(i, j) as f64 / 2.0)
    }

    pub fn squared_entry(&self, i: usize, j: usize) -> BigRational {
        pow_rational(&from_int(self.d), self.twice_linear_exponent(i, j))
    }

    pub fn linear_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.side(), self.side(), |i, j| self.linear_entry(i, j))
    }

    pub fn squared_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.side(), self.side(), |i, j| {
            (self.d as f64).powi(self.twice_linear_exponent(i, j) as i32)
        })
    }

    pub fn index_of(&self, p: &SetPartition) -> Option<usize> {
        self.partitions.iter().position(|q| q == p)
    }
}

pub fn partition_gram(n: usize, d: usize) -> Result<PartitionGram> {
    partition_gram_with(n, d, &Limits::default())
}

pub fn partition_gram_with(n: usize, d: usize, limits: &Limits) -> Result<PartitionGram> {
    if d == 0 {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    let partitions = enumerate_set_partitions_with(n, limits)?;
    let side = partitions.len();
    let mut join_blocks = vec![0; side * side];
    for i in 0..side {
        for j in i..side {
            let b = join(&partitions[i], &partitions[j])?.block_count();
            join_blocks[i * side + j] = b;
            join_blocks[j * side + i] = b;
        }
    }
    Ok(PartitionGram {
        d,
        partitions,
        join_blocks,
    })
}

/// `|[d]^{Π₁} ∩ [d]^{Π₂}|` by walking all `dⁿ` strings.
pub fn brute_force_common_strings(a: &SetPartition, b: &SetPartition, d: usize) -> Result<u64> {
    if a.n != b.n {
        return Err(Error::SizeMismatch(a.n, b.n));
    }
    let total = crate::limits::saturating_pow(d, a.n);
    Limits::check("strings", total, 4096)?;
    let mut x = vec![0usize; a.n];
    let mut count = 0;
    for mut code in 0..total {
        for slot in x.iter_mut().rev() {
            *slot = code % d;
            code /= d;
        }
        if a.admits(&x) && b.admits(&x) {
            count += 1;
        }
    }
    Ok(count)
}

/// Which of the two Gram matrices is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramVariant {
    Linear,
    Squared,
}

#[derive(Clone, Debug)]
pub struct BlowupWitness {
    pub n: usize,
    pub d: usize,
    pub variant: GramVariant,
    /// Number of distinct two-block partitions, `2^{n−1} − 1`.
    pub two_block_count: usize,
    /// Certified rational lower bound on `λ_max` from the uniform test vector.
    pub certified_lower: BigRational,
    /// Floating-point value of the same Rayleigh quotient.
    pub rayleigh: f64,
    /// Largest eigenvalue from a dense eigensolve, when within the cap.
    pub lambda_max: Option<f64>,
}

/// Rayleigh quotient of the Gram matrix on the uniform vector supported on the
/// one-block partition and every two-block partition.
///
/// Pairs of distinct partitions from this family join to the single block, so
/// the quotient is `1 + (2K·x + K(K−1)·x²)/(K+1)` with `x` the entry between
/// one block and two blocks. For the linear variant `x = d^{−1/2}` is replaced
/// by `1/⌈√d⌉` in the certified bound.
pub fn blowup_witness(n: usize, d: usize, variant: GramVariant) -> Result<BlowupWitness> {
    blowup_witness_with(n, d, variant, &Limits::default())
}

pub fn blowup_witness_with(n: usize, d: usize, variant: GramVariant, limits: &Limits) -> Result<BlowupWitness> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("n and d must be positive".into()));
    }
    let gram = partition_gram_with(n, d, limits)?;
    let support: Vec<usize> = (0..gram.side())
        .filter(|&i| matches!(gram.partitions[i].block_count(), 1 | 2))
        .collect();
    let k = support.len() - 1;

    let ceil_sqrt = {
        let r = num_integer::Roots::sqrt(&d);
        if r * r == d {
            r
        } else {
            r + 1
        }
    };
    let x_certified = match variant {
        GramVariant::Linear => rational(1, ceil_sqrt as i64),
        GramVariant::Squared => rational(1, d as i64),
    };
    let kq = from_int(k);
    let certified_lower = BigRational::one()
        + (from_int(2) * &kq * &x_certified + &kq * (&kq - BigRational::one()) * &x_certified * &x_certified)
            / (&kq + BigRational::one());

    let matrix = match variant {
        GramVariant::Linear => gram.linear_matrix(),
        GramVariant::Squared => gram.squared_matrix(),
    };
    let mut quad = 0.0;
    for &i in &support {
        for &j in &support {
            quad += matrix[(i, j)];
        }
    }
    let rayleigh = quad / support.len() as f64;
    let lambda_max = (gram.side() <= limits.max_dense_side)
        .then(|| real_symmetric_eigenvalues(matrix).into_iter().fold(f64::NEG_INFINITY, f64::max));
    Ok(BlowupWitness {
        n,
        d,
        variant,
        two_block_count: k,
        certified_lower,
        rayleigh,
        lambda_max,
    })
}

/// Smallest eigenvalue of a partition Gram matrix, for the PSD checks.
pub fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    real_symmetric_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}
