//! Exact combinatorics of the ordered prime shift.
//!
//! The ordered prime shift lives on `{0, 1}`. A finite word is admissible
//! exactly when the runs of zeros strictly between consecutive ones have
//! prime lengths that strictly increase from left to right, so every
//! admissible word is one of
//!
//! * `0^k`,
//! * `0^k 1 0^l`,
//! * `0^k 1 0^{p_1} 1 0^{p_2} 1 ... 0^{p_r} 1 0^l` with primes `p_1 < ... < p_r`.
//!
//! Counting words of the third shape only depends on the set `{p_i}`
//! through `t = Σ (p_i + 1)`, the length of the core block minus one. A
//! single 0/1 knapsack over the parts `p + 1` ([`ShiftedPrimeDP`]) therefore
//! gives every `|L_n|` exactly:
//!
//! ```text
//! |L_n| = 1 + n + Σ_{3 <= t <= n-1} (n - t) · V[t]
//! ```

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numeric::{isqrt, ln_big};
use crate::shift::{LanguageTable, Word};

/// Structural parse of a binary word against the three admissible shapes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalForm {
    AllZeros(usize),
    SingleOne {
        leading: usize,
        trailing: usize,
    },
    PrimeBlocks {
        leading: usize,
        trailing: usize,
        primes: Vec<u64>,
    },
    Inadmissible,
}

impl CanonicalForm {
    /// Reassembles the word, or `None` for [`CanonicalForm::Inadmissible`].
    pub fn to_word(&self) -> Option<Word> {
        let mut out = Vec::new();
        match self {
            CanonicalForm::AllZeros(k) => out.resize(*k, 0),
            CanonicalForm::SingleOne { leading, trailing } => {
                out.resize(*leading, 0);
                out.push(1);
                out.resize(out.len() + trailing, 0);
            }
            CanonicalForm::PrimeBlocks {
                leading,
                trailing,
                primes,
            } => {
                out.resize(*leading, 0);
                out.push(1);
                for &p in primes {
                    out.resize(out.len() + p as usize, 0);
                    out.push(1);
                }
                out.resize(out.len() + trailing, 0);
            }
            CanonicalForm::Inadmissible => return None,
        }
        Some(Word::from_vec(out))
    }

    pub fn is_admissible(&self) -> bool {
        !matches!(self, CanonicalForm::Inadmissible)
    }
}

fn is_prime_small(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Parses `w` into one of the admissible shapes.
pub fn canonical_form(w: &Word) -> CanonicalForm {
    let s = w.symbols();
    if s.iter().any(|&c| c > 1) {
        return CanonicalForm::Inadmissible;
    }
    let ones: Vec<usize> = s
        .iter()
        .enumerate()
        .filter_map(|(i, &c)| (c == 1).then_some(i))
        .collect();
    let (first, last) = match (ones.first(), ones.last()) {
        (None, _) | (_, None) => return CanonicalForm::AllZeros(s.len()),
        (Some(&f), Some(&l)) => (f, l),
    };
    let trailing = s.len() - 1 - last;
    if ones.len() == 1 {
        return CanonicalForm::SingleOne {
            leading: first,
            trailing,
        };
    }
    let mut primes = Vec::with_capacity(ones.len() - 1);
    for pair in ones.windows(2) {
        let gap = (pair[1] - pair[0] - 1) as u64;
        if !is_prime_small(gap) || primes.last().is_some_and(|&prev| prev >= gap) {
            return CanonicalForm::Inadmissible;
        }
        primes.push(gap);
    }
    CanonicalForm::PrimeBlocks {
        leading: first,
        trailing,
        primes,
    }
}

/// Admissibility test on raw symbols, without allocating the parsed form.
pub(crate) fn admits_prime_word(s: &[u8]) -> bool {
    let mut last_one: Option<usize> = None;
    let mut last_gap: Option<u64> = None;
    for (i, &c) in s.iter().enumerate() {
        match c {
            0 => {}
            1 => {
                if let Some(prev) = last_one {
                    let gap = (i - prev - 1) as u64;
                    if !is_prime_small(gap) || last_gap.is_some_and(|g| g >= gap) {
                        return false;
                    }
                    last_gap = Some(gap);
                }
                last_one = Some(i);
            }
            _ => return false,
        }
    }
    true
}

/// Sieve of Eratosthenes with a prefix prime-counting table.
#[derive(Clone, Debug)]
pub struct PrimeTables {
    is_prime: Vec<bool>,
    pi: Vec<u64>,
}

impl PrimeTables {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut is_prime = vec![true; n + 1];
        is_prime[0] = false;
        if n >= 1 {
            is_prime[1] = false;
        }
        let mut i = 2;
        while i * i <= n {
            if is_prime[i] {
                let mut j = i * i;
                while j <= n {
                    is_prime[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        let mut pi = Vec::with_capacity(n + 1);
        let mut count = 0;
        for &p in &is_prime {
            count += p as u64;
            pi.push(count);
        }
        PrimeTables { is_prime, pi }
    }

    pub fn limit(&self) -> u64 {
        (self.is_prime.len() - 1) as u64
    }

    fn check(&self, x: u64) -> Result<usize> {
        if x > self.limit() {
            return Err(Error::TableTooShort {
                table: "prime sieve",
                needed: x,
                available: self.limit(),
            });
        }
        Ok(x as usize)
    }

    pub fn is_prime(&self, x: u64) -> Result<bool> {
        Ok(self.is_prime[self.check(x)?])
    }

    /// `π(x)`, the number of primes not exceeding `x`.
    pub fn pi(&self, x: u64) -> Result<u64> {
        Ok(self.pi[self.check(x)?])
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.is_prime
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i as u64))
    }
}

pub fn prime_pi(x: u64, tables: &PrimeTables) -> Result<u64> {
    tables.pi(x)
}

/// Unrestricted partition numbers `p(0..=limit)`, by Euler's pentagonal
/// number recurrence.
#[derive(Clone, Debug)]
pub struct PartitionTables {
    p: Vec<BigUint>,
}

impl PartitionTables {
    pub fn new(limit: usize) -> Self {
        let mut p: Vec<BigUint> = Vec::with_capacity(limit + 1);
        p.push(BigUint::one());
        for n in 1..=limit {
            // p(n) = Σ_{k>=1} (-1)^{k+1} [p(n - k(3k-1)/2) + p(n - k(3k+1)/2)]
            let mut plus = BigUint::zero();
            let mut minus = BigUint::zero();
            for k in 1.. {
                let g1 = k * (3 * k - 1) / 2;
                if g1 > n {
                    break;
                }
                let acc = if k % 2 == 1 { &mut plus } else { &mut minus };
                *acc += &p[n - g1];
                let g2 = k * (3 * k + 1) / 2;
                if g2 <= n {
                    *acc += &p[n - g2];
                }
            }
            p.push(plus - minus);
        }
        PartitionTables { p }
    }

    pub fn limit(&self) -> usize {
        self.p.len() - 1
    }

    pub fn get(&self, n: usize) -> Result<&BigUint> {
        self.p.get(n).ok_or(Error::TableTooShort {
            table: "partition",
            needed: n as u64,
            available: self.limit() as u64,
        })
    }
}

pub fn partition_p(n: usize, tables: &PartitionTables) -> Result<&BigUint> {
    tables.get(n)
}

/// `V[t]` = number of finite sets `P` of distinct primes with
/// `Σ_{p ∈ P} (p + 1) = t`; `V[0] = 1` accounts for the empty set.
#[derive(Clone, Debug)]
pub struct ShiftedPrimeDP {
    v: Vec<BigUint>,
}

impl ShiftedPrimeDP {
    pub fn build(limit: usize) -> Self {
        let mut v = vec![BigUint::zero(); limit + 1];
        v[0] = BigUint::one();
        let sieve = PrimeTables::new(limit as u64);
        for p in sieve.primes() {
            let part = p as usize + 1;
            if part > limit {
                break;
            }
            // Descending sweep keeps each part used at most once.
            for t in (part..=limit).rev() {
                let (lo, hi) = v.split_at_mut(t);
                hi[0] += &lo[t - part];
            }
        }
        ShiftedPrimeDP { v }
    }

    pub fn limit(&self) -> usize {
        self.v.len() - 1
    }

    pub fn values(&self) -> &[BigUint] {
        &self.v
    }

    pub fn get(&self, t: usize) -> Result<&BigUint> {
        self.v.get(t).ok_or(Error::TableTooShort {
            table: "shifted prime DP",
            needed: t as u64,
            available: self.limit() as u64,
        })
    }
}

pub fn build_shifted_prime_dp(limit: usize) -> ShiftedPrimeDP {
    ShiftedPrimeDP::build(limit)
}

fn require_dp(n: usize, dp: &ShiftedPrimeDP) -> Result<()> {
    let needed = n.saturating_sub(1);
    if dp.limit() < needed {
        return Err(Error::TableTooShort {
            table: "shifted prime DP",
            needed: needed as u64,
            available: dp.limit() as u64,
        });
    }
    Ok(())
}

/// `|L_n|` for the ordered prime shift.
pub fn count_words_exact(n: usize, dp: &ShiftedPrimeDP) -> Result<BigUint> {
    require_dp(n, dp)?;
    let mut total = BigUint::from(1u32 + n as u32);
    for t in 3..n {
        let v = &dp.v[t];
        if !v.is_zero() {
            total += v * BigUint::from((n - t) as u64);
        }
    }
    Ok(total)
}

/// Exact language table of the prime shift for lengths `0..=n_max`, in
/// linear time: with `A(n) = Σ_{t<n} V[t]` and `B(n) = Σ_{t<n} t·V[t]`
/// over nonempty sets, `|L_n| = 1 + n + n·A(n) - B(n)`.
pub fn exact_language_table(n_max: usize, dp: &ShiftedPrimeDP) -> Result<LanguageTable> {
    require_dp(n_max, dp)?;
    let mut counts = Vec::with_capacity(n_max + 1);
    counts.push(BigUint::one());
    let mut a = BigUint::zero();
    let mut b = BigUint::zero();
    for n in 1..=n_max {
        // Admit t = n - 1 (only sets with t >= 1 are nonempty).
        let t = n - 1;
        if t >= 1 && !dp.v[t].is_zero() {
            a += &dp.v[t];
            b += &dp.v[t] * BigUint::from(t as u64);
        }
        let nn = BigUint::from(n as u64);
        counts.push(BigUint::one() + &nn + &nn * &a - &b);
    }
    Ok(LanguageTable::from_counts(counts))
}

/// `2^{π(⌊√(n/2)⌋)}`, the number of words built from subsets of the primes
/// not exceeding `√(n/2)`.
pub fn growth_lower_bound(n: u64, tables: &PrimeTables) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::invalid("growth lower bound needs n >= 2"));
    }
    let root = isqrt(n / 2);
    let pi = tables.pi(root)?;
    Ok(BigUint::one() << pi)
}

/// `4 n^3 p(n)`.
pub fn growth_upper_bound(n: u64, partitions: &PartitionTables) -> Result<BigUint> {
    if n < 1 {
        return Err(Error::invalid("growth upper bound needs n >= 1"));
    }
    let p = partitions.get(n as usize)?;
    Ok(BigUint::from(4u32) * BigUint::from(n).pow(3) * p)
}

const WINDOW_SLACK: f64 = 1e-12;

/// First integer `x` in `[2, x_max]` where `c1·x/ln x <= π(x) <= c2·x/ln x`
/// fails, or `None` if it holds throughout.
pub fn chebyshev_violation(x_max: u64, c1: f64, c2: f64, tables: &PrimeTables) -> Result<Option<u64>> {
    if !(c1 > 0.0 && c1 <= c2) {
        return Err(Error::invalid("need 0 < c1 <= c2"));
    }
    for x in 2..=x_max {
        let pi = tables.pi(x)? as f64;
        let base = x as f64 / (x as f64).ln();
        let lo = c1 * base;
        let hi = c2 * base;
        if pi < lo * (1.0 - WINDOW_SLACK) || pi > hi * (1.0 + WINDOW_SLACK) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

pub fn check_chebyshev_window(x_max: u64, c1: f64, c2: f64, tables: &PrimeTables) -> Result<bool> {
    Ok(chebyshev_violation(x_max, c1, c2, tables)?.is_none())
}

/// First `n` in `[n_min, n_max]` where `e^{A√n} <= p(n) <= e^{B√n}` fails.
pub fn hardy_ramanujan_violation(
    n_min: usize,
    n_max: usize,
    a: f64,
    b: f64,
    partitions: &PartitionTables,
) -> Result<Option<usize>> {
    if !(a > 0.0 && a <= b) {
        return Err(Error::invalid("need 0 < A <= B"));
    }
    for n in n_min.max(1)..=n_max {
        let lp = ln_big(partitions.get(n)?);
        let root = (n as f64).sqrt();
        if lp < a * root * (1.0 - WINDOW_SLACK) || lp > b * root * (1.0 + WINDOW_SLACK) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// One row of the exact bounds table.
#[derive(Clone, Debug)]
pub struct BoundsRow {
    pub n: u64,
    pub words: BigUint,
    pub complexity: BigUint,
    pub lower: BigUint,
    pub upper: BigUint,
}

impl BoundsRow {
    pub fn holds(&self) -> bool {
        self.lower <= self.complexity && self.complexity <= self.upper
    }
}

/// Precomputed tables sufficient for lengths up to `n_max`.
#[derive(Clone, Debug)]
pub struct PrimeShiftTables {
    pub primes: PrimeTables,
    pub partitions: PartitionTables,
    pub dp: ShiftedPrimeDP,
    pub language: LanguageTable,
}

impl PrimeShiftTables {
    pub fn new(n_max: usize) -> Result<Self> {
        let dp = ShiftedPrimeDP::build(n_max);
        let language = exact_language_table(n_max, &dp)?;
        Ok(PrimeShiftTables {
            primes: PrimeTables::new(n_max.max(2) as u64),
            partitions: PartitionTables::new(n_max),
            dp,
            language,
        })
    }

    pub fn n_max(&self) -> usize {
        self.language.max_len()
    }

    /// Rows for `n` in `2..=n_max` (the lower bound starts at 2).
    pub fn bounds(&self) -> Result<Vec<BoundsRow>> {
        (2..=self.n_max() as u64)
            .map(|n| {
                Ok(BoundsRow {
                    n,
                    words: self.language.count(n as usize).clone(),
                    complexity: self.language.cumulative(n as usize).clone(),
                    lower: growth_lower_bound(n, &self.primes)?,
                    upper: growth_upper_bound(n, &self.partitions)?,
                })
            })
            .collect()
    }
}

/// Smallest `n0` such that every row with `n >= n0` satisfies the bounds,
/// or `None` if the last row fails.
pub fn bounds_threshold(rows: &[BoundsRow]) -> Option<u64> {
    let mut threshold = None;
    for row in rows.iter().rev() {
        if !row.holds() {
            break;
        }
        threshold = Some(row.n);
    }
    threshold
}

/// `log p_X(n) / log n`.
pub fn effective_degree(complexity: &BigUint, n: u64) -> f64 {
    ln_big(complexity) / (n as f64).ln()
}
