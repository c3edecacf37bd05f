//! Square-difference-free sets: membership checks, the greedy sequence, exact maxima and
//! densities on progressions.

mod exact;

pub use exact::{max_sdf_exact, max_sdf_exact_with_cap, ExactSolution, DEFAULT_EXACT_CAP};

use crate::arith::linear_fit;
use crate::error::{Error, Result};
use num::rational::Ratio;
use serde::{Deserialize, Serialize};

/// A finite set of non-negative integers inside `[0, universe]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerSet {
    elements: Vec<u64>,
    universe: u64,
}

impl IntegerSet {
    pub fn new(elements: Vec<u64>, universe: u64) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("elements must be strictly increasing".into()));
        }
        if let Some(&last) = elements.last() {
            if last > universe {
                return Err(Error::InvalidInput(format!("element {last} exceeds universe {universe}")));
            }
        }
        Ok(IntegerSet { elements, universe })
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut elements: Vec<u64>, universe: u64) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        Self::new(elements, universe)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    /// The translate `A + shift` inside `[0, universe + shift]`.
    pub fn shifted(&self, shift: u64) -> IntegerSet {
        IntegerSet { elements: self.elements.iter().map(|&a| a + shift).collect(), universe: self.universe + shift }
    }

    /// Elements `≤ bound`, with the universe cut down to `bound`.
    pub fn truncated(&self, bound: u64) -> IntegerSet {
        IntegerSet {
            elements: self.elements.iter().copied().take_while(|&a| a <= bound).collect(),
            universe: bound.min(self.universe),
        }
    }

    /// Membership table indexed `0..=universe`.
    pub fn indicator(&self) -> Vec<bool> {
        let mut t = vec![false; self.universe as usize + 1];
        for &a in &self.elements {
            t[a as usize] = true;
        }
        t
    }
}

/// Arithmetic progression `start, start + step, …` with `length` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Progression {
    pub start: u64,
    pub step: u64,
    pub length: u64,
}

impl Progression {
    pub fn new(start: u64, step: u64, length: u64) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidInput("progression step must be at least 1".into()));
        }
        Ok(Progression { start, step, length })
    }

    /// The full interval `[1, x]`.
    pub fn interval(x: u64) -> Self {
        Progression { start: 1, step: 1, length: x }
    }

    pub fn last(&self) -> Option<u64> {
        (self.length > 0).then(|| self.start + self.step * (self.length - 1))
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.length).map(move |i| self.start + i * self.step)
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.start && (n - self.start) % self.step == 0 && (n - self.start) / self.step < self.length
    }

    /// True when every term lies in `[lo, hi]`.
    pub fn within(&self, lo: u64, hi: u64) -> bool {
        match self.last() {
            None => true,
            Some(last) => self.start >= lo && last <= hi,
        }
    }
}

/// A pair `a1 - a2 = n²` with `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDifference {
    pub a1: u64,
    pub a2: u64,
    pub n: u64,
}

/// First square difference found scanning the smaller element upwards, then `n` upwards.
pub fn find_square_difference(a: &IntegerSet) -> Option<SquareDifference> {
    let &max = a.elements().last()?;
    let member = a.indicator();
    for &a2 in a.elements() {
        let mut n = 1u64;
        while a2 + n * n <= max {
            if member[(a2 + n * n) as usize] {
                return Some(SquareDifference { a1: a2 + n * n, a2, n });
            }
            n += 1;
        }
    }
    None
}

pub fn is_square_difference_free(a: &IntegerSet) -> bool {
    find_square_difference(a).is_none()
}

/// Where the greedy scan begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GreedyStart {
    /// Scan `0, 1, 2, …`.
    #[default]
    Zero,
    /// Scan `1, 2, 3, …`; the result is the zero-based sequence shifted by one.
    One,
}

/// Lexicographically first square-difference-free set scanning upwards from 0.
pub fn greedy_sequence(limit: u64) -> IntegerSet {
    greedy_sequence_from(GreedyStart::Zero, limit)
}

pub fn greedy_sequence_from(start: GreedyStart, limit: u64) -> IntegerSet {
    let first = match start {
        GreedyStart::Zero => 0,
        GreedyStart::One => 1,
    };
    let mut blocked = vec![false; limit as usize + 1];
    let mut chosen = Vec::new();
    for n in first..=limit {
        if blocked[n as usize] {
            continue;
        }
        chosen.push(n);
        let mut t = 1u64;
        while n + t * t <= limit {
            blocked[(n + t * t) as usize] = true;
            t += 1;
        }
    }
    IntegerSet { elements: chosen, universe: limit }
}

/// Least-squares exponent `β` in `|A ∩ [0, n]| ≈ C n^β` for the greedy sequence, sampled on a
/// geometric grid of `n` between `limit / 1000` and `limit`.
pub fn greedy_growth_exponent(limit: u64) -> f64 {
    let seq = greedy_sequence(limit);
    let lo = (limit / 1000).max(16) as f64;
    let hi = limit as f64;
    let steps = 40;
    let mut xs = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let n = (lo * (hi / lo).powf(i as f64 / steps as f64)).round() as u64;
        let count = seq.elements().partition_point(|&a| a <= n);
        xs.push((n as f64).ln());
        ys.push((count as f64).ln());
    }
    linear_fit(&xs, &ys).0
}

/// `|A ∩ P| / |P|` exactly.
pub fn density_on_progression(a: &IntegerSet, p: &Progression) -> Result<Ratio<u64>> {
    if p.length == 0 {
        return Err(Error::EmptyProgression);
    }
    if !p.within(0, a.universe()) {
        return Err(Error::InvalidInput(format!("progression {p:?} leaves [0, {}]", a.universe())));
    }
    let hits = if p.length as usize > a.len() {
        a.elements().iter().filter(|&&n| p.contains(n)).count() as u64
    } else {
        p.iter().filter(|&n| a.contains(n)).count() as u64
    };
    Ok(Ratio::new(hits, p.length))
}
