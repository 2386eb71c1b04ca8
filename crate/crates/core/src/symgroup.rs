//! The symmetric group `S_n`: permutations in one-line notation, cycle
//! structure and the transposition (Cayley) metric.
//!
//! All public interfaces speak 1-based points; storage is 0-based.
//! Composition is `(p∘q)(x) = p(q(x))`, the convention under which
//! `P_d(p)·P_d(q) = P_d(p∘q)` holds for the operators in [`crate::dense_ops`].

use std::fmt;

use crate::limits::Limits;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation from 1-based one-line notation `[π(1), …, π(n)]`.
    pub fn from_one_line(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut zero_based = Vec::with_capacity(n);
        for &v in images {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidInput(format!(
                    "{images:?} is not a permutation of 1..={n}"
                )));
            }
            seen[v - 1] = true;
            zero_based.push(v - 1);
        }
        Ok(Permutation { images: zero_based })
    }

    /// Builds a permutation of `1..=n` from disjoint 1-based cycles; each
    /// cycle `[x1, x2, …, xj]` maps `x1 → x2 → … → xj → x1`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for (pos, &x) in cycle.iter().enumerate() {
                if x == 0 || x > n || used[x - 1] {
                    return Err(Error::InvalidInput(format!(
                        "cycles {cycles:?} are not disjoint cycles on 1..={n}"
                    )));
                }
                used[x - 1] = true;
                let next = cycle[(pos + 1) % cycle.len()];
                images[x - 1] = next - 1;
            }
        }
        Ok(Permutation { images })
    }

    /// The transposition exchanging the 1-based points `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidInput(format!("({a} {b}) is not a transposition")));
        }
        Self::from_cycles(n, &[&[a, b]])
    }

    pub(crate) fn from_zero_based_unchecked(images: Vec<usize>) -> Self {
        Permutation { images }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// 1-based image of the 1-based point `x`.
    pub fn apply(&self, x: usize) -> usize {
        self.images[x - 1] + 1
    }

    /// 1-based one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|&v| v + 1).collect()
    }

    pub(crate) fn zero_based(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { images: inv }
    }

    /// Disjoint cycles in 1-based points, each starting at its smallest
    /// element, ordered by that element; fixed points appear as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x];
            }
        }
        count
    }

    /// Image `{π(x) : x ∈ set}` of a set of 1-based points.
    pub fn image_of(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = set.iter().map(|&x| self.apply(x)).collect();
        out.sort_unstable();
        out
    }

    /// Position of this permutation in the lexicographic enumeration of `S_n`.
    pub fn lex_rank(&self) -> usize {
        let n = self.images.len();
        let mut rank = 0;
        for i in 0..n {
            let smaller_later = self.images[i + 1..]
                .iter()
                .filter(|&&v| v < self.images[i])
                .count();
            rank = rank * (n - i) + smaller_later;
        }
        rank
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.one_line())
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation with fixed points omitted; `e` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "e");
        }
        for cycle in self.cycles().into_iter().filter(|c| c.len() > 1) {
            let parts: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// Cycle lengths of a permutation, weakly decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleType {
    pub parts: Vec<usize>,
}

impl CycleType {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidInput(format!("cycle type {parts:?} has a zero part")));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(CycleType { parts })
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn cycle_count(&self) -> usize {
        self.parts.len()
    }

    pub fn fixed_point_count(&self) -> usize {
        self.count_of_length(1)
    }

    /// `c_k`: number of cycles of length `k`.
    pub fn count_of_length(&self, k: usize) -> usize {
        self.parts.iter().filter(|&&p| p == k).count()
    }

    /// `n − c`, the transposition distance of any permutation of this type.
    pub fn transposition_distance(&self) -> usize {
        self.n() - self.cycle_count()
    }

    /// A representative permutation whose cycles are consecutive blocks.
    pub fn representative(&self) -> Permutation {
        let n = self.n();
        let mut images = Vec::with_capacity(n);
        let mut start = 0;
        for &len in &self.parts {
            for k in 0..len {
                images.push(start + (k + 1) % len);
            }
            start += len;
        }
        Permutation::from_zero_based_unchecked(images)
    }
}

impl fmt::Display for CycleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `p∘q`, i.e. `x ↦ p(q(x))`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch(p.n(), q.n()));
    }
    Ok(Permutation {
        images: q.images.iter().map(|&x| p.images[x]).collect(),
    })
}

pub fn inverse(p: &Permutation) -> Permutation {
    p.inverse()
}

pub fn cycle_type(p: &Permutation) -> CycleType {
    let mut parts: Vec<usize> = p.cycles().iter().map(Vec::len).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    CycleType { parts }
}

/// `|π| = n − c(π)`: the minimum number of transpositions whose product is `π`.
pub fn transposition_distance(p: &Permutation) -> usize {
    p.n() - p.cycle_count()
}

pub fn sign(p: &Permutation) -> i32 {
    if transposition_distance(p) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of points moved by `p`.
pub fn derangement_size(p: &Permutation) -> usize {
    p.images.iter().enumerate().filter(|(i, &v)| *i != v).count()
}

/// All of `S_n` in lexicographic order of one-line notation, under the default caps.
pub fn enumerate(n: usize) -> Result<Vec<Permutation>> {
    enumerate_with(n, &Limits::default())
}

pub fn enumerate_with(n: usize, limits: &Limits) -> Result<Vec<Permutation>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    Limits::check("enumeration n", n, limits.max_enumeration_n)?;
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity((1..=n).product());
    loop {
        out.push(Permutation {
            images: current.clone(),
        });
        if !next_lex(&mut current) {
            break;
        }
    }
    Ok(out)
}

fn next_lex(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
