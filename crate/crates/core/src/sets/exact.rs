use super::IntegerSet;
use crate::error::{Error, Result};

/// Largest `X` accepted by [`max_sdf_exact`].
pub const DEFAULT_EXACT_CAP: u64 = 200;
const HARD_CAP: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactSolution {
    pub size: usize,
    /// Lexicographically smallest maximum set inside `[1, X]`.
    pub witness: IntegerSet,
    /// `s(n)` for `n = 0..=X`.
    pub prefix_maxima: Vec<usize>,
    pub nodes: u64,
}

pub fn max_sdf_exact(x: u64) -> Result<ExactSolution> {
    max_sdf_exact_with_cap(x, DEFAULT_EXACT_CAP)
}

/// Maximum independent set of the square-difference graph on `[1, X]`.
///
/// Vertices `1..=X` are processed as prefixes: `s(n)` is found by asking whether an independent
/// set of size `s(n-1) + 1` contains `n`. Every branch is pruned by the popcount, a greedy clique
/// cover, and the already-known `s(k)` of the prefix still in play (the graph is translation
/// invariant). A final include-first pass in ascending order returns the lexicographically
/// smallest optimum.
pub fn max_sdf_exact_with_cap(x: u64, cap: u64) -> Result<ExactSolution> {
    if x == 0 {
        return Err(Error::InvalidInput("X must be at least 1".into()));
    }
    if x > cap.min(HARD_CAP) {
        return Err(Error::CapExceeded { x, cap: cap.min(HARD_CAP) });
    }
    match (x as usize).div_ceil(64) {
        1 => solve::<1>(x as usize),
        2 => solve::<2>(x as usize),
        3 | 4 => solve::<4>(x as usize),
        5..=8 => solve::<8>(x as usize),
        _ => solve::<16>(x as usize),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Bits<const W: usize>([u64; W]);

impl<const W: usize> Bits<W> {
    const EMPTY: Self = Bits([0; W]);

    fn prefix(n: usize) -> Self {
        let mut b = Self::EMPTY;
        for i in 0..n {
            b.insert(i);
        }
        b
    }

    #[inline]
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    fn highest(&self) -> Option<usize> {
        (0..W).rev().find(|&k| self.0[k] != 0).map(|k| k * 64 + 63 - self.0[k].leading_zeros() as usize)
    }

    #[inline]
    fn lowest(&self) -> Option<usize> {
        (0..W).find(|&k| self.0[k] != 0).map(|k| k * 64 + self.0[k].trailing_zeros() as usize)
    }

    #[inline]
    fn and_not(&self, other: &Self) -> Self {
        let mut out = *self;
        for k in 0..W {
            out.0[k] &= !other.0[k];
        }
        out
    }

    #[inline]
    fn and(&self, other: &Self) -> Self {
        let mut out = *self;
        for k in 0..W {
            out.0[k] &= other.0[k];
        }
        out
    }
}

struct Solver<const W: usize> {
    adj: Vec<Bits<W>>,
    s: Vec<usize>,
    nodes: u64,
}

impl<const W: usize> Solver<W> {
    fn new(x: usize) -> Self {
        let mut adj = vec![Bits::EMPTY; x];
        for (u, row) in adj.iter_mut().enumerate() {
            let mut t = 1;
            while t * t < x {
                if u + t * t < x {
                    row.insert(u + t * t);
                }
                if u >= t * t {
                    row.insert(u - t * t);
                }
                t += 1;
            }
        }
        Solver { adj, s: vec![0], nodes: 0 }
    }

    /// Number of cliques in a greedy cover of `cand`; an upper bound on its independence number.
    fn clique_cover(&self, mut cand: Bits<W>) -> usize {
        let mut cliques = 0;
        while let Some(v) = cand.lowest() {
            cand.remove(v);
            let mut common = cand.and(&self.adj[v]);
            while let Some(u) = common.lowest() {
                cand.remove(u);
                common.remove(u);
                common = common.and(&self.adj[u]);
            }
            cliques += 1;
        }
        cliques
    }

    /// Is there an independent set of size `target - count` inside `cand`?
    fn extend_descending(&mut self, mut cand: Bits<W>, count: usize, target: usize) -> bool {
        self.nodes += 1;
        if count >= target {
            return true;
        }
        if count + self.clique_cover(cand) < target {
            return false;
        }
        let lo = cand.lowest().unwrap_or(0);
        while let Some(v) = cand.highest() {
            if count + cand.count() < target || count + self.s[v + 1 - lo] < target {
                return false;
            }
            cand.remove(v);
            let next = cand.and_not(&self.adj[v]);
            if self.extend_descending(next, count + 1, target) {
                return true;
            }
        }
        false
    }

    fn extend_ascending(&mut self, mut cand: Bits<W>, chosen: &mut Vec<usize>, target: usize) -> bool {
        self.nodes += 1;
        if chosen.len() >= target {
            return true;
        }
        if chosen.len() + self.clique_cover(cand) < target {
            return false;
        }
        let hi = cand.highest().unwrap_or(0);
        while let Some(u) = cand.lowest() {
            let count = chosen.len();
            if count + cand.count() < target || count + self.s[hi + 1 - u] < target {
                return false;
            }
            cand.remove(u);
            chosen.push(u);
            if self.extend_ascending(cand.and_not(&self.adj[u]), chosen, target) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

fn solve<const W: usize>(x: usize) -> Result<ExactSolution> {
    let mut solver = Solver::<W>::new(x);
    for n in 1..=x {
        let v = n - 1;
        let target = solver.s[n - 1] + 1;
        // A set of size s(n-1) + 1 in [1, n] must contain both 1 and n, otherwise it would
        // fit in a translate of [1, n-1].
        let grows = if v == 0 {
            true
        } else if solver.adj[v].0[0] & 1 == 1 {
            false
        } else {
            let mut cand = Bits::<W>::prefix(v).and_not(&solver.adj[v]).and_not(&solver.adj[0]);
            cand.remove(0);
            solver.extend_descending(cand, 2, target)
        };
        let value = if grows { target } else { target - 1 };
        solver.s.push(value);
    }
    let size = solver.s[x];
    let mut chosen = Vec::with_capacity(size);
    let found = solver.extend_ascending(Bits::prefix(x), &mut chosen, size);
    debug_assert!(found);
    let witness = IntegerSet::new(chosen.iter().map(|&v| v as u64 + 1).collect(), x as u64)?;
    Ok(ExactSolution { size, witness, prefix_maxima: solver.s, nodes: solver.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::is_square_difference_free;

    /// Exhaustive maximum over all subsets of `[1, x]`, lexicographically smallest on ties.
    fn brute(x: usize) -> (usize, Vec<u64>) {
        let squares: Vec<usize> = (1..x).map(|t| t * t).take_while(|&d| d < x).collect();
        let mut best = (0usize, Vec::new());
        for mask in 0u32..(1 << x) {
            if squares.iter().any(|&d| mask & (mask >> d) != 0) {
                continue;
            }
            let size = mask.count_ones() as usize;
            let elems: Vec<u64> = (0..x).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).collect();
            if size > best.0 || (size == best.0 && elems < best.1) {
                best = (size, elems);
            }
        }
        best
    }

    #[test]
    fn tiny_cases() {
        let s1 = max_sdf_exact(1).unwrap();
        assert_eq!((s1.size, s1.witness.elements()), (1, &[1u64][..]));
        let s2 = max_sdf_exact(2).unwrap();
        assert_eq!((s2.size, s2.witness.elements()), (1, &[1u64][..]));
        let s3 = max_sdf_exact(3).unwrap();
        assert_eq!((s3.size, s3.witness.elements()), (2, &[1u64, 3][..]));
    }

    #[test]
    fn agrees_with_enumeration() {
        for x in 1..=16 {
            let sol = max_sdf_exact(x as u64).unwrap();
            let (size, elems) = brute(x);
            assert_eq!(sol.size, size, "X = {x}");
            assert_eq!(sol.witness.elements(), elems.as_slice(), "X = {x}");
            assert!(is_square_difference_free(&sol.witness));
        }
    }

    #[test]
    fn prefix_maxima_monotone() {
        let sol = max_sdf_exact(60).unwrap();
        for n in 1..sol.prefix_maxima.len() {
            assert!(sol.prefix_maxima[n] >= sol.prefix_maxima[n - 1]);
            assert!(sol.prefix_maxima[n] <= n);
        }
    }

    #[test]
    fn cap_enforced() {
        assert_eq!(max_sdf_exact(201), Err(Error::CapExceeded { x: 201, cap: 200 }));
        assert_eq!(max_sdf_exact_with_cap(5, 4), Err(Error::CapExceeded { x: 5, cap: 4 }));
    }
}
