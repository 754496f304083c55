//! Hadamard matrices and binary codes meeting the Plotkin cap.
//!
//! Bit convention: Hadamard entry `+1` maps to bit `0` and `-1` to bit `1`,
//! so that `(-1)^c` recovers the sign.

use std::collections::HashSet;

use crate::bounds::plotkin_cap;
use crate::error::{Error, Result};

/// A `±1` matrix with `H H^T = order · I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i32>,
}

impl HadamardMatrix {
    /// Validates `H H^T = order · I` in integer arithmetic.
    pub fn new(order: usize, entries: Vec<i32>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a Hadamard matrix of order {order}",
                entries.len()
            )));
        }
        if entries.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidParameter("Hadamard entries must be ±1".into()));
        }
        let h = HadamardMatrix { order, entries };
        if !h.is_orthogonal() {
            return Err(Error::InvalidParameter("rows are not pairwise orthogonal".into()));
        }
        Ok(h)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[i32] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    /// `H H^T` computed exactly.
    pub fn gram(&self) -> Vec<i64> {
        let n = self.order;
        let mut g = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = self
                    .row(i)
                    .iter()
                    .zip(self.row(j))
                    .map(|(a, b)| (*a as i64) * (*b as i64))
                    .sum();
            }
        }
        g
    }

    fn is_orthogonal(&self) -> bool {
        let n = self.order;
        self.gram()
            .iter()
            .enumerate()
            .all(|(k, &v)| v == if k / n == k % n { n as i64 } else { 0 })
    }

    fn kron(&self, rhs: &HadamardMatrix) -> HadamardMatrix {
        let n = self.order * rhs.order;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(i / rhs.order, j / rhs.order) * rhs.get(i % rhs.order, j % rhs.order));
            }
        }
        HadamardMatrix { order: n, entries }
    }

    /// Flip row and column signs so the first row and column are all `+1`.
    fn normalize(mut self) -> Self {
        let n = self.order;
        for i in 0..n {
            if self.entries[i * n] < 0 {
                for j in 0..n {
                    self.entries[i * n + j] = -self.entries[i * n + j];
                }
            }
        }
        for j in 0..n {
            if self.entries[j] < 0 {
                for i in 0..n {
                    self.entries[i * n + j] = -self.entries[i * n + j];
                }
            }
        }
        self
    }
}

/// Hadamard matrix of the given order, first row and column all `+1`.
///
/// Strategies: Sylvester doubling, Paley type I for `q + 1` with `q ≡ 3 (mod 4)`
/// prime, and Kronecker products of constructible factors.
pub fn hadamard(order: usize) -> Result<HadamardMatrix> {
    if order == 0 || (order > 2 && !order.is_multiple_of(4)) {
        return Err(Error::InvalidParameter(format!(
            "no Hadamard matrix of order {order} exists"
        )));
    }
    let h = build_hadamard(order)
        .ok_or_else(|| Error::NoKnownConstruction(format!("Hadamard matrix of order {order}")))?;
    Ok(h.normalize())
}

fn build_hadamard(order: usize) -> Option<HadamardMatrix> {
    match order {
        1 => return Some(HadamardMatrix { order: 1, entries: vec![1] }),
        2 => return Some(HadamardMatrix { order: 2, entries: vec![1, 1, 1, -1] }),
        _ if !order.is_multiple_of(4) => return None,
        _ => {}
    }
    if order.is_power_of_two() {
        return Some(build_hadamard(2)?.kron(&build_hadamard(order / 2)?));
    }
    let q = order - 1;
    if q % 4 == 3 && is_prime(q) {
        return Some(paley_one(q));
    }
    (2..order)
        .filter(|a| order.is_multiple_of(*a) && *a <= order / a)
        .find_map(|a| Some(build_hadamard(a)?.kron(&build_hadamard(order / a)?)))
}

fn is_prime(q: usize) -> bool {
    q >= 2 && (2..).take_while(|p| p * p <= q).all(|p| !q.is_multiple_of(p))
}

/// Paley construction of order `q + 1` from the quadratic character of `GF(q)`.
fn paley_one(q: usize) -> HadamardMatrix {
    let mut residue = vec![false; q];
    for x in 1..q {
        residue[x * x % q] = true;
    }
    let chi = |a: usize| -> i32 {
        if a == 0 {
            0
        } else if residue[a] {
            1
        } else {
            -1
        }
    };
    let n = q + 1;
    let mut entries = vec![0i32; n * n];
    for i in 0..n {
        for j in 0..n {
            let s = match (i, j) {
                (0, 0) => 0,
                (0, _) => 1,
                (_, 0) => -1,
                _ => chi((j + q - i) % q),
            };
            entries[i * n + j] = s + i32::from(i == j);
        }
    }
    HadamardMatrix { order: n, entries }
}

/// Distinct binary words of a common length with cached minimum distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCode {
    length: usize,
    words: Vec<Vec<u8>>,
    min_distance: usize,
}

impl BinaryCode {
    pub fn new(length: usize, words: Vec<Vec<u8>>) -> Result<Self> {
        if words.iter().any(|w| w.len() != length || w.iter().any(|&b| b > 1)) {
            return Err(Error::InvalidParameter(format!(
                "every word must be a 0/1 vector of length {length}"
            )));
        }
        let mut seen = HashSet::new();
        if !words.iter().all(|w| seen.insert(w.clone())) {
            return Err(Error::InvalidParameter("code words must be distinct".into()));
        }
        let min_distance = min_hamming_distance(&words)?;
        Ok(BinaryCode {
            length,
            words,
            min_distance,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn words(&self) -> &[Vec<u8>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_distance(&self) -> usize {
        self.min_distance
    }
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Exact minimum pairwise Hamming distance.
pub fn min_hamming_distance(words: &[Vec<u8>]) -> Result<usize> {
    if words.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "minimum distance needs at least 2 words, got {}",
            words.len()
        )));
    }
    let mut best = usize::MAX;
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            best = best.min(hamming(a, b));
        }
    }
    Ok(best)
}

fn sign_to_bit(s: i32) -> u8 {
    u8::from(s < 0)
}

/// Binary code of length `r`, minimum distance at least `r/2`, and size
/// `plotkin_cap(r)`.
pub fn plotkin_optimal_code(r: usize) -> Result<BinaryCode> {
    let cap = plotkin_cap(r)?;
    let from_hadamard = match r % 4 {
        // rows of ±H_r
        0 => hadamard(r).map(|h| {
            let mut words: Vec<Vec<u8>> = (0..r).map(|i| h.row(i).iter().map(|&s| sign_to_bit(s)).collect()).collect();
            words.extend((0..r).map(|i| h.row(i).iter().map(|&s| sign_to_bit(-s)).collect()));
            words
        }),
        // normalized H_{r+1} without its first column
        3 => hadamard(r + 1).map(|h| {
            (0..=r)
                .map(|i| h.row(i)[1..].iter().map(|&s| sign_to_bit(s)).collect())
                .collect()
        }),
        // normalized H_{r+2} without its first and last columns
        2 => hadamard(r + 2).map(|h| {
            (0..r + 2)
                .map(|i| h.row(i)[1..=r].iter().map(|&s| sign_to_bit(s)).collect())
                .collect()
        }),
        _ => unreachable!("residue 1 rejected by plotkin_cap"),
    };
    let code = match from_hadamard {
        Ok(words) => BinaryCode::new(r, words)?,
        Err(Error::NoKnownConstruction(_)) if r <= 10 => {
            search_code(r, r.div_ceil(2), cap, 50_000_000)?.ok_or_else(|| {
                Error::NoKnownConstruction(format!("binary code of length {r}, size {cap}"))
            })?
        }
        Err(e) => return Err(e),
    };
    debug_assert!(code.len() == cap && 2 * code.min_distance() >= r);
    Ok(code)
}

/// Fixed-width bitset over the `2^length` words.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn and(&self, rhs: &Bits) -> Bits {
        Bits(self.0.iter().zip(&rhs.0).map(|(a, b)| a & b).collect())
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, &w)| k * 64 + w.trailing_zeros() as usize)
    }
}

struct CliqueSearch {
    adjacency: Vec<Bits>,
    nodes: u64,
    budget: u64,
    target: usize,
    best: Vec<usize>,
}

impl CliqueSearch {
    /// Greedy sequential colouring; returns vertices with their colour bound, in
    /// increasing colour order.
    fn colour(&self, candidates: &Bits) -> Vec<(usize, usize)> {
        let mut uncoloured = candidates.clone();
        let mut order = Vec::new();
        let mut colour = 0;
        while !uncoloured.is_empty() {
            colour += 1;
            let mut available = uncoloured.clone();
            while let Some(v) = available.first() {
                available.remove(v);
                uncoloured.remove(v);
                order.push((v, colour));
                for (a, b) in available.0.iter_mut().zip(&self.adjacency[v].0) {
                    *a &= !b;
                }
            }
        }
        order
    }

    fn expand(&mut self, clique: &mut Vec<usize>, mut candidates: Bits) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        let order = self.colour(&candidates);
        for &(v, bound) in order.iter().rev() {
            if clique.len() + bound <= self.best.len() || self.best.len() >= self.target {
                return Ok(());
            }
            clique.push(v);
            let next = candidates.and(&self.adjacency[v]);
            if next.is_empty() {
                if clique.len() > self.best.len() {
                    self.best = clique.clone();
                }
            } else {
                self.expand(clique, next)?;
            }
            clique.pop();
            candidates.remove(v);
        }
        Ok(())
    }
}

fn word_bits(x: usize, length: usize) -> Vec<u8> {
    (0..length).map(|i| ((x >> (length - 1 - i)) & 1) as u8).collect()
}

/// Branch-and-bound clique search over `{0,1}^length` for codes with
/// minimum distance at least `min_distance`.
///
/// Returns the largest code found, stopping early once `target` words are
/// reached. With `target = usize::MAX` the result is a maximum code.
fn clique_code(length: usize, min_distance: usize, target: usize, budget: u64) -> Result<Vec<usize>> {
    if length == 0 || length > 16 {
        return Err(Error::InvalidParameter(format!(
            "exhaustive search supports lengths 1..=16, got {length}"
        )));
    }
    let n = 1usize << length;
    let adjacency: Vec<Bits> = (0..n)
        .map(|x| {
            let mut b = Bits::empty(n);
            for y in 0..n {
                if ((x ^ y).count_ones() as usize) >= min_distance {
                    b.insert(y);
                }
            }
            b
        })
        .collect();
    // The translation x -> x ^ c is an isometry, so some maximum code contains 0.
    let mut search = CliqueSearch {
        adjacency,
        nodes: 0,
        budget,
        target,
        best: vec![0],
    };
    let start = search.adjacency[0].clone();
    let mut clique = vec![0];
    if !start.is_empty() {
        search.expand(&mut clique, start)?;
    }
    Ok(search.best)
}

/// Searches for a code of the given length, distance and size.
///
/// `Ok(None)` means the exhaustive search proved no such code exists.
pub fn search_code(length: usize, min_distance: usize, size: usize, budget: u64) -> Result<Option<BinaryCode>> {
    let found = clique_code(length, min_distance, size, budget)?;
    if found.len() < size || size < 2 {
        return Ok(None);
    }
    let words = found.into_iter().take(size).map(|x| word_bits(x, length)).collect();
    Ok(Some(BinaryCode::new(length, words)?))
}

/// Size of the largest binary code of `length` with minimum distance at least
/// `min_distance`, proved by exhaustive branch and bound.
pub fn max_code_size(length: usize, min_distance: usize, budget: u64) -> Result<usize> {
    Ok(clique_code(length, min_distance, usize::MAX, budget)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &[&str]) -> Vec<Vec<u8>> {
        s.iter().map(|w| w.bytes().map(|b| b - b'0').collect()).collect()
    }

    #[test]
    fn small_hadamard_orders() {
        assert_eq!(hadamard(1).unwrap().row(0), &[1]);
        for order in [2, 4, 8, 12, 20, 24] {
            let h = hadamard(order).unwrap();
            assert!(h.is_orthogonal(), "order {order}");
            assert!(h.row(0).iter().all(|&x| x == 1));
            assert!((0..order).all(|i| h.get(i, 0) == 1));
        }
        assert!(matches!(hadamard(6), Err(Error::InvalidParameter(_))));
        // 28 = 27 + 1 needs Paley over GF(27), which is not prime
        assert!(matches!(hadamard(28), Err(Error::NoKnownConstruction(_))));
    }

    #[test]
    fn hadamard_constructor_validates() {
        assert!(HadamardMatrix::new(2, vec![1, 1, 1, -1]).is_ok());
        assert!(HadamardMatrix::new(2, vec![1, 1, 1, 1]).is_err());
        assert!(HadamardMatrix::new(2, vec![1, 1, 1]).is_err());
    }

    #[test]
    fn min_distance_examples() {
        assert_eq!(min_hamming_distance(&words(&["000", "111"])).unwrap(), 3);
        assert_eq!(min_hamming_distance(&words(&["00", "01", "10", "11"])).unwrap(), 1);
        assert!(min_hamming_distance(&words(&["00"])).is_err());
    }

    #[test]
    fn plotkin_examples() {
        let c2 = plotkin_optimal_code(2).unwrap();
        let mut w = c2.words().to_vec();
        w.sort();
        assert_eq!(w, words(&["00", "01", "10", "11"]));
        assert_eq!(c2.min_distance(), 1);

        let c4 = plotkin_optimal_code(4).unwrap();
        assert_eq!((c4.len(), c4.min_distance()), (8, 2));
        let c3 = plotkin_optimal_code(3).unwrap();
        assert_eq!((c3.len(), c3.min_distance()), (4, 2));
        assert_eq!(plotkin_optimal_code(9), Err(Error::UnsupportedResidue(9)));
        assert!(matches!(plotkin_optimal_code(1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn duplicate_words_rejected() {
        assert!(BinaryCode::new(2, words(&["01", "01"])).is_err());
        assert!(BinaryCode::new(2, words(&["01", "0"])).is_err());
    }

    #[test]
    fn search_finds_and_refutes() {
        let c = search_code(6, 3, 8, 1_000_000).unwrap().unwrap();
        assert_eq!(c.len(), 8);
        assert!(c.min_distance() >= 3);
        assert_eq!(search_code(3, 2, 5, 1_000_000).unwrap(), None);
        assert_eq!(max_code_size(3, 3, 1000).unwrap(), 2);
        assert!(matches!(max_code_size(8, 4, 1), Err(Error::BudgetExceeded(1))));
    }
}
