//! The Renault–Deaconu groupoid of a shift space, restricted to the orbit of
//! an eventually periodic base path.
//!
//! Every point `y` tail-equivalent to the base path `x` is written
//! `y = u·σ^t(x)` ([`Point`]), and an arrow is a triple `(y, k, z)` with
//! `σ^m(y) = σ^n(z)` for some `m - n = k` ([`Arrow`]). The generating set is
//! `S = ⋃_a Z(a, ∅) ∪ Z(∅, a)`: multiplying `(y, k, z)` on the left by a
//! generator either prepends a symbol to `y` (degree `k + 1`) or shifts it
//! (degree `k - 1`).
//!
//! Any word in the generators reduces to `n` shifts followed by `m`
//! prepends, because a prepend followed by a shift cancels. So
//!
//! ```text
//! ℓ_S(y, k, z) = min { 2n + k : n >= max(0, -k), σ^{n+k}(y) = σ^n(z) }
//! ```
//!
//! for non-units, which [`Orbit::length`] evaluates directly. Ball
//! enumeration ([`Orbit::ball`]) is a plain breadth-first search and does not
//! use the formula.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::shift::{ShiftSpec, Word};

/// Default cap on states visited by a ball search.
pub const DEFAULT_BALL_BUDGET: u64 = 10_000_000;

/// An eventually periodic path `pre · per^∞`, stored canonically: the period
/// is primitive and the preperiod is as short as possible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasePath {
    pre: Vec<u8>,
    period: Vec<u8>,
}

fn primitive_root(w: &[u8]) -> &[u8] {
    let n = w.len();
    for d in 1..n {
        if n.is_multiple_of(d) && w.chunks(d).all(|c| c == &w[..d]) {
            return &w[..d];
        }
    }
    w
}

impl BasePath {
    pub fn new(preperiod: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::invalid("period of a base path must be nonempty"));
        }
        let mut pre = preperiod.into_inner();
        let mut period = primitive_root(period.symbols()).to_vec();
        while pre.last().is_some_and(|&a| Some(&a) == period.last()) {
            pre.pop();
            period.rotate_right(1);
        }
        Ok(BasePath { pre, period })
    }

    /// Parses `"pre|per"`, e.g. `"|0"` for `0^∞` or `"1|0"` for `10^∞`.
    pub fn parse(text: &str) -> Result<Self> {
        let (pre, per) = text
            .trim()
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("base path {text:?} needs the form pre|period")))?;
        BasePath::new(Word::parse(pre)?, Word::parse(per)?)
    }

    /// `0^∞`.
    pub fn zeros() -> Self {
        BasePath {
            pre: Vec::new(),
            period: vec![0],
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// Number of distinct shifts `σ^t(x)`.
    pub fn orbit_len(&self) -> usize {
        self.pre.len() + self.period.len()
    }

    pub fn symbol_at(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    /// Reduces a shift count to the representative in `0..orbit_len()`.
    pub fn normalize(&self, t: usize) -> usize {
        let l = self.pre.len();
        if t < l {
            t
        } else {
            l + (t - l) % self.period.len()
        }
    }

    /// Checks that every finite prefix of the path is admissible for `spec`.
    pub fn validate(&self, spec: &ShiftSpec) -> Result<()> {
        for &a in self.pre.iter().chain(&self.period) {
            if a >= spec.alphabet_size() {
                return Err(Error::SymbolOutOfRange {
                    symbol: a,
                    alphabet_size: spec.alphabet_size(),
                });
            }
        }
        if !spec.path_admissible(&self.pre, &self.period) {
            return Err(Error::invalid(format!("base path {self} is not in the shift space")));
        }
        Ok(())
    }
}

impl fmt::Display for BasePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", Word::from(&self.pre[..]), Word::from(&self.period[..]))
    }
}

/// The point `u·σ^t(x)` of the orbit, in its unique shortest form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    prefix: Vec<u8>,
    tail: usize,
}

impl Point {
    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail_shift(&self) -> usize {
        self.tail
    }
}

/// An arrow `(range, degree, source)`. Only [`Orbit`] constructs these, so
/// every value is a genuine groupoid element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    range: Point,
    source: Point,
    degree: i64,
}

/// An arrow in the fiber over the base path: `(u·σ^t(x), k, x)`.
pub type GroupoidElement = Arrow;

impl Arrow {
    pub fn range(&self) -> &Point {
        &self.range
    }

    pub fn source(&self) -> &Point {
        &self.source
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_unit(&self) -> bool {
        self.degree == 0 && self.range == self.source
    }

    pub fn inverse(&self) -> Arrow {
        Arrow {
            range: self.source.clone(),
            source: self.range.clone(),
            degree: -self.degree,
        }
    }
}

/// The orbit of a base path inside a shift space, with the groupoid
/// operations that stay inside it.
#[derive(Clone, Debug)]
pub struct Orbit {
    spec: ShiftSpec,
    base: BasePath,
}

impl Orbit {
    pub fn new(spec: ShiftSpec, base: BasePath) -> Result<Self> {
        base.validate(&spec)?;
        Ok(Orbit { spec, base })
    }

    pub fn spec(&self) -> &ShiftSpec {
        &self.spec
    }

    pub fn base(&self) -> &BasePath {
        &self.base
    }

    /// The base path itself, `∅·σ^0(x)`.
    pub fn base_point(&self) -> Point {
        Point {
            prefix: Vec::new(),
            tail: 0,
        }
    }

    /// Shortest `(u', t')` realizing the same path as `u·σ^t(x)`.
    pub fn canonicalize(&self, u: &Word, t: usize) -> Result<(Word, usize)> {
        let p = self.point(u, t)?;
        Ok((Word::from(&p.prefix[..]), p.tail))
    }

    /// Builds the point `u·σ^t(x)`, checking that it lies in the shift space.
    pub fn point(&self, u: &Word, t: usize) -> Result<Point> {
        self.spec.check_symbols(u.symbols())?;
        let p = self.reduce(u.symbols().to_vec(), t);
        if !self.admissible(&p) {
            return Err(Error::invalid(format!(
                "{}·σ^{t}(x) is not in the shift space",
                u
            )));
        }
        Ok(p)
    }

    fn reduce(&self, mut prefix: Vec<u8>, t: usize) -> Point {
        let mut tail = self.base.normalize(t);
        let l = self.base.pre.len();
        let last = self.base.orbit_len() - 1;
        while let Some(&a) = prefix.last() {
            // σ^{t'}(x) = a·σ^t(x) forces σ^{t'+1}(x) = σ^t(x); the canonical
            // base path leaves at most one such t'.
            let next = if tail >= 1 && self.base.symbol_at(tail - 1) == a {
                tail - 1
            } else if tail == l && self.base.symbol_at(last) == a {
                last
            } else {
                break;
            };
            prefix.pop();
            tail = next;
        }
        Point { prefix, tail }
    }

    /// The realized path of `p` as `(finite prefix, period)`.
    pub fn realize(&self, p: &Point) -> (Vec<u8>, Vec<u8>) {
        let l = self.base.pre.len();
        let mut head = p.prefix.clone();
        if p.tail < l {
            head.extend_from_slice(&self.base.pre[p.tail..]);
            (head, self.base.period.clone())
        } else {
            let mut per = self.base.period.clone();
            per.rotate_left(p.tail - l);
            (head, per)
        }
    }

    pub fn describe_point(&self, p: &Point) -> String {
        let (head, per) = self.realize(p);
        match BasePath::new(Word::from(&head[..]), Word::from(&per[..])) {
            Ok(b) => b.to_string(),
            Err(_) => unreachable!("realized periods are nonempty"),
        }
    }

    pub fn describe(&self, g: &Arrow) -> String {
        format!(
            "({}, {:+}, {})",
            self.describe_point(&g.range),
            g.degree,
            self.describe_point(&g.source)
        )
    }

    fn admissible(&self, p: &Point) -> bool {
        let (head, per) = self.realize(p);
        self.spec.path_admissible(&head, &per)
    }

    /// `σ^m(p)`.
    pub fn shift_point(&self, p: &Point, m: usize) -> Point {
        let (prefix, tail) = shifted(&self.base, p, m);
        Point {
            prefix: prefix.to_vec(),
            tail,
        }
    }

    /// `a·p`, if it lies in the shift space.
    pub fn prepend(&self, a: u8, p: &Point) -> Option<Point> {
        if a >= self.spec.alphabet_size() {
            return None;
        }
        let mut prefix = Vec::with_capacity(p.prefix.len() + 1);
        prefix.push(a);
        prefix.extend_from_slice(&p.prefix);
        let q = if p.prefix.is_empty() {
            self.reduce(prefix, p.tail)
        } else {
            Point {
                prefix,
                tail: p.tail,
            }
        };
        self.admissible(&q).then_some(q)
    }

    pub fn unit(&self, p: &Point) -> Arrow {
        Arrow {
            range: p.clone(),
            source: p.clone(),
            degree: 0,
        }
    }

    /// The arrow `(range, degree, source)`, if the two points are related by
    /// that degree.
    pub fn arrow(&self, range: Point, source: Point, degree: i64) -> Result<Arrow> {
        let per = self.base.period.len() as i64;
        let lag = (range.prefix.len() as i64 - range.tail as i64)
            - (source.prefix.len() as i64 - source.tail as i64);
        if (degree - lag).rem_euclid(per) != 0 {
            return Err(Error::invalid(format!(
                "no arrow of degree {degree} between {} and {}",
                self.describe_point(&range),
                self.describe_point(&source)
            )));
        }
        Ok(Arrow {
            range,
            source,
            degree,
        })
    }

    /// All products `s·g` with `s` a generator: prepends in symbol order,
    /// then the shift.
    pub fn neighbors(&self, g: &Arrow) -> Vec<Arrow> {
        let mut out = Vec::with_capacity(self.spec.alphabet_size() as usize + 1);
        for a in 0..self.spec.alphabet_size() {
            if let Some(range) = self.prepend(a, &g.range) {
                out.push(Arrow {
                    range,
                    source: g.source.clone(),
                    degree: g.degree + 1,
                });
            }
        }
        out.push(Arrow {
            range: self.shift_point(&g.range, 1),
            source: g.source.clone(),
            degree: g.degree - 1,
        });
        out
    }

    /// `g·h`, defined when `s(g) = r(h)`.
    pub fn compose(&self, g: &Arrow, h: &Arrow) -> Result<Arrow> {
        if g.source != h.range {
            return Err(Error::NotComposable);
        }
        Ok(Arrow {
            range: g.range.clone(),
            source: h.source.clone(),
            degree: g.degree + h.degree,
        })
    }

    /// Word length `ℓ_S(g)`, evaluated through the reduced-word formula.
    pub fn length(&self, g: &Arrow) -> u64 {
        if g.is_unit() {
            return 0;
        }
        let k = g.degree;
        let lo = (-k).max(0) as u64;
        // Past this point both sides sit in the periodic part, so the
        // condition repeats with period |per|.
        let hi = lo
            + (g.range.prefix.len() + g.source.prefix.len() + self.base.orbit_len()) as u64
            + k.unsigned_abs()
            + 2;
        for n in lo..=hi {
            let m = (n as i64 + k) as usize;
            if shifted(&self.base, &g.range, m) == shifted(&self.base, &g.source, n as usize) {
                return (2 * n as i64 + k) as u64;
            }
        }
        unreachable!("every arrow has a reduced word")
    }

    /// Breadth-first ball of the given radius in the fiber over the base path.
    pub fn ball(&self, radius: usize, budget: u64) -> Result<BallTable> {
        self.ball_at(&self.base_point(), radius, budget)
    }

    /// Breadth-first ball in the source fiber over `source`.
    pub fn ball_at(&self, source: &Point, radius: usize, budget: u64) -> Result<BallTable> {
        let mut table = BallTable::seed(self.unit(source));
        table.extend(self, radius, budget)?;
        Ok(table)
    }

    /// As [`Orbit::ball`], visiting neighbors in a random order at each step.
    pub fn ball_shuffled<R: Rng>(&self, radius: usize, budget: u64, rng: &mut R) -> Result<BallTable> {
        let mut table = BallTable::seed(self.unit(&self.base_point()));
        table.extend_with(self, radius, budget, |v| v.shuffle(rng))?;
        Ok(table)
    }

    /// `KF`, the set of all defined products `kf` with `k ∈ K`, `f ∈ F`.
    pub fn product_set(&self, k: &CompactSet, f: &[Arrow], budget: u64) -> Result<HashSet<Arrow>> {
        match k {
            CompactSet::LengthBall(m) => {
                // K = B(m) over every unit, so KF is everything reachable
                // from F in at most m generator steps.
                let mut seen: HashSet<Arrow> = f.iter().cloned().collect();
                let mut frontier: Vec<Arrow> = seen.iter().cloned().collect();
                for _ in 0..*m {
                    let mut next = Vec::new();
                    for g in &frontier {
                        for h in self.neighbors(g) {
                            if !seen.contains(&h) {
                                seen.insert(h.clone());
                                next.push(h);
                                if seen.len() as u64 > budget {
                                    return Err(Error::BudgetExceeded {
                                        what: "product set",
                                        budget,
                                    });
                                }
                            }
                        }
                    }
                    frontier = next;
                }
                Ok(seen)
            }
            CompactSet::Explicit(ks) => {
                let mut by_source: HashMap<&Point, Vec<&Arrow>> = HashMap::new();
                for a in ks {
                    by_source.entry(&a.source).or_default().push(a);
                }
                let mut out = HashSet::new();
                for g in f {
                    for a in by_source.get(&g.range).into_iter().flatten() {
                        out.insert(self.compose(a, g)?);
                        if out.len() as u64 > budget {
                            return Err(Error::BudgetExceeded {
                                what: "product set",
                                budget,
                            });
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Exact `|KF| / |F|`.
    pub fn folner_ratio(&self, k: &CompactSet, f: &[Arrow], budget: u64) -> Result<Ratio<u64>> {
        let distinct: HashSet<&Arrow> = f.iter().collect();
        if distinct.is_empty() {
            return Err(Error::invalid("Følner ratio needs a nonempty F"));
        }
        let kf = self.product_set(k, f, budget)?;
        Ok(Ratio::new(kf.len() as u64, distinct.len() as u64))
    }

    /// The first ball `F = B(r)`, `r <= max_radius`, with
    /// `|B(r + M)| / |B(r)| <= 1 + ε`, where `M` bounds the lengths in `K`.
    pub fn folner_search(
        &self,
        k: &CompactSet,
        eps: Ratio<u64>,
        max_radius: usize,
        budget: u64,
    ) -> Result<Option<FolnerWitness>> {
        let m = k.max_length(self) as usize;
        let bound = Ratio::from_integer(1) + eps;
        let mut table = BallTable::seed(self.unit(&self.base_point()));
        for r in 0..=max_radius {
            table.extend(self, r + m, budget)?;
            let ball_ratio = Ratio::new(table.size(r + m), table.size(r));
            if ball_ratio <= bound {
                let f = table.ball_elements(r);
                let ratio = self.folner_ratio(k, &f, budget)?;
                return Ok(Some(FolnerWitness {
                    radius: r,
                    f_size: table.size(r),
                    kf_size: *(ratio * table.size(r)).numer(),
                    ball_ratio,
                    ratio,
                }));
            }
        }
        Ok(None)
    }
}

fn shifted<'a>(base: &BasePath, p: &'a Point, m: usize) -> (&'a [u8], usize) {
    let len = p.prefix.len();
    if m <= len {
        (&p.prefix[m..], p.tail)
    } else {
        (&[], base.normalize(p.tail + m - len))
    }
}

/// A compact set of arrows for Følner ratios.
#[derive(Clone, Debug)]
pub enum CompactSet {
    /// Every arrow of length at most `M`, at every unit.
    LengthBall(u64),
    Explicit(Vec<Arrow>),
}

impl CompactSet {
    pub fn max_length(&self, orbit: &Orbit) -> u64 {
        match self {
            CompactSet::LengthBall(m) => *m,
            CompactSet::Explicit(ks) => ks.iter().map(|a| orbit.length(a)).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FolnerWitness {
    /// `F = B(radius)`.
    pub radius: usize,
    pub f_size: u64,
    pub kf_size: u64,
    /// `|B(radius + M)| / |B(radius)|`, the quantity searched on.
    pub ball_ratio: Ratio<u64>,
    /// `|KF| / |F|`.
    pub ratio: Ratio<u64>,
}

/// Breadth-first ball in one source fiber, with each element's length.
#[derive(Clone, Debug)]
pub struct BallTable {
    levels: Vec<Vec<Arrow>>,
    lengths: HashMap<Arrow, u64>,
    states: u64,
}

impl BallTable {
    fn seed(unit: Arrow) -> Self {
        let mut lengths = HashMap::new();
        lengths.insert(unit.clone(), 0);
        BallTable {
            levels: vec![vec![unit]],
            lengths,
            states: 1,
        }
    }

    /// Grows the table to `radius`, counting new states against `budget`.
    pub fn extend(&mut self, orbit: &Orbit, radius: usize, budget: u64) -> Result<()> {
        self.extend_with(orbit, radius, budget, |_| {})
    }

    fn extend_with(
        &mut self,
        orbit: &Orbit,
        radius: usize,
        budget: u64,
        mut reorder: impl FnMut(&mut Vec<Arrow>),
    ) -> Result<()> {
        while self.radius() < radius {
            let depth = self.levels.len() as u64;
            let mut next = Vec::new();
            for g in &self.levels[self.levels.len() - 1] {
                let mut nbrs = orbit.neighbors(g);
                reorder(&mut nbrs);
                for h in nbrs {
                    if self.lengths.contains_key(&h) {
                        continue;
                    }
                    self.states += 1;
                    if self.states > budget {
                        return Err(Error::BallBudgetExceeded {
                            budget,
                            completed_radius: self.radius(),
                            sizes: self.sizes(),
                        });
                    }
                    self.lengths.insert(h.clone(), depth);
                    next.push(h);
                }
            }
            self.levels.push(next);
        }
        Ok(())
    }

    pub fn radius(&self) -> usize {
        self.levels.len() - 1
    }

    /// `|B(r)|` for `r <= radius()`.
    pub fn size(&self, r: usize) -> u64 {
        self.levels[..=r].iter().map(|l| l.len() as u64).sum()
    }

    /// `|B(0)|, ..., |B(radius)|`.
    pub fn sizes(&self) -> Vec<u64> {
        self.levels
            .iter()
            .scan(0u64, |acc, l| {
                *acc += l.len() as u64;
                Some(*acc)
            })
            .collect()
    }

    /// `|W(0)|, ..., |W(radius)|`, the number of elements of each exact length.
    pub fn level_sizes(&self) -> Vec<u64> {
        self.levels.iter().map(|l| l.len() as u64).collect()
    }

    pub fn level(&self, r: usize) -> &[Arrow] {
        &self.levels[r]
    }

    pub fn ball_elements(&self, r: usize) -> Vec<Arrow> {
        self.levels[..=r].iter().flatten().cloned().collect()
    }

    pub fn length_of(&self, g: &Arrow) -> Option<u64> {
        self.lengths.get(g).copied()
    }

    pub fn elements(&self) -> impl Iterator<Item = (&Arrow, u64)> {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(r, l)| l.iter().map(move |g| (g, r as u64)))
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// CSV with header `n,level,ball`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "level", "ball"])?;
        for (n, (level, ball)) in self.level_sizes().iter().zip(self.sizes()).enumerate() {
            w.write_record([n.to_string(), level.to_string(), ball.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
