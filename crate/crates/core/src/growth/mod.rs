//! Growth series, growth certificates and certificate fitting.
//!
//! A certificate is a statement about the computed range only. Polynomial
//! certificates are checked in exact rational arithmetic. Subexponential ones
//! compare against a lower bound for `C exp(α n^β)`, so a pass is rigorous.

mod filtered;
mod metric;

pub use filtered::{BallCheck, FilteredArrow, FilteredGroupoid, FilteredGroupoidSpec, ProperLength};
pub use metric::{graph_ball_growth, FiniteMetricSpace};

use std::io::{Read, Write};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::SubexpBound;
use crate::error::{Error, Result};
use crate::numeric::ln_big;

pub const MAX_POLYNOMIAL_DEGREE: u32 = 20;
/// The β grid is `k / BETA_STEPS` for `k = 1..BETA_STEPS`.
pub const BETA_STEPS: u32 = 20;
pub const ALPHA_RESOLUTION: f64 = 1e-6;

/// Values `b(n)` over a contiguous range `start..=end`, `start ∈ {0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthSeries {
    start: u64,
    values: Vec<BigUint>,
}

impl GrowthSeries {
    pub fn new(start: u64, values: Vec<BigUint>) -> Result<Self> {
        if start > 1 {
            return Err(Error::invalid("growth series start at n = 0 or n = 1"));
        }
        if values.is_empty() {
            return Err(Error::invalid("growth series must be nonempty"));
        }
        if values[0].is_zero() {
            return Err(Error::invalid("growth series values must be at least 1"));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::invalid(format!(
                "growth series decreases at n = {}",
                start + i as u64 + 1
            )));
        }
        Ok(GrowthSeries { start, values })
    }

    pub fn from_u64(start: u64, values: &[u64]) -> Result<Self> {
        GrowthSeries::new(start, values.iter().map(|&v| BigUint::from(v)).collect())
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn end(&self) -> u64 {
        self.start + self.values.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, n: u64) -> Option<&BigUint> {
        n.checked_sub(self.start)
            .and_then(|i| self.values.get(i as usize))
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    /// `(n, b(n))` in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigUint)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.start + i as u64, v))
    }

    /// The series restricted to `n <= end`.
    pub fn truncate(&self, end: u64) -> Result<GrowthSeries> {
        if end < self.start {
            return Err(Error::invalid("truncation would leave an empty series"));
        }
        let keep = ((end - self.start + 1) as usize).min(self.values.len());
        Ok(GrowthSeries {
            start: self.start,
            values: self.values[..keep].to_vec(),
        })
    }

    /// Reads `n,b` rows with a header line.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut start = None;
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("expected 2 columns, found {}", rec.len())));
            }
            let n: u64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad index {:?}", &rec[0])))?;
            let b: BigUint = rec[1]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad value {:?}", &rec[1])))?;
            let expected = *start.get_or_insert(n) + values.len() as u64;
            if n != expected {
                return Err(Error::Parse(format!("expected n = {expected}, found {n}")));
            }
            values.push(b);
        }
        let start = start.ok_or_else(|| Error::Parse("series file has no rows".into()))?;
        GrowthSeries::new(start, values)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "b"])?;
        for (n, b) in self.iter() {
            w.write_record([n.to_string(), b.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GrowthCertificate {
    /// `b(n) <= C (1+n)^d`.
    Polynomial { c: f64, d: u32 },
    /// `b(n) <= C exp(α n^β)` with `0 < β < 1`.
    StrongSubexp { c: f64, alpha: f64, beta: f64 },
    /// `b(n)^{1/n}` for each `n >= 1`. Evidence, not a bound.
    ExponentialEvidence { rates: Vec<f64> },
}

impl GrowthCertificate {
    pub fn polynomial(c: f64, d: u32) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("polynomial certificates need C > 0"));
        }
        Ok(GrowthCertificate::Polynomial { c, d })
    }

    pub fn strong_subexp(c: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid(
                "subexponential certificates need C > 0, α > 0 and 0 < β < 1",
            ));
        }
        Ok(GrowthCertificate::StrongSubexp { c, alpha, beta })
    }

    /// The growth hypothesis consumed by the weighted algebra.
    pub fn to_subexp_bound(&self) -> Option<SubexpBound> {
        match *self {
            GrowthCertificate::StrongSubexp { c, alpha, beta } => SubexpBound::new(c, alpha, beta).ok(),
            _ => None,
        }
    }

    /// A subexponential certificate implied by a polynomial one, using
    /// `ln(1+n) <= n^β / β`.
    pub fn polynomial_as_subexp(&self, beta: f64) -> Result<GrowthCertificate> {
        match *self {
            GrowthCertificate::Polynomial { c, d } => {
                let alpha = if d == 0 { ALPHA_RESOLUTION } else { (d as f64 / beta).next_up() };
                GrowthCertificate::strong_subexp(c, alpha, beta)
            }
            _ => Err(Error::invalid("only polynomial certificates convert")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub holds: bool,
    /// Smallest `n` where the bound fails.
    pub counterexample: Option<u64>,
    pub start: u64,
    pub end: u64,
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// `b <= x` exactly.
fn le_float(b: &BigUint, x: f64) -> bool {
    BigRational::from_integer(b.clone().into()) <= rational(x)
}

/// Smallest float `>= r`.
fn float_up(r: &BigRational) -> Option<f64> {
    let mut x = r.to_f64()?;
    if !x.is_finite() {
        return None;
    }
    while rational(x) < *r {
        x = x.next_up();
    }
    Some(x)
}

fn polynomial_holds(b: &BigUint, n: u64, c: &BigRational, d: u32) -> bool {
    let rhs = c * BigRational::from_integer(num_bigint::BigInt::from(1 + n).pow(d));
    BigRational::from_integer(b.clone().into()) <= rhs
}

/// Rigorous check of `b <= C exp(α n^β)`: compares against a lower bound for
/// the right side, in the log domain once it leaves the float range.
fn subexp_holds(b: &BigUint, n: u64, c: f64, alpha: f64, beta: f64) -> bool {
    if n == 0 {
        return le_float(b, c);
    }
    let y = alpha * (n as f64).powf(beta);
    let x = c.ln() + y;
    let x_lo = x - (x.abs() + y + 8.0) * 4.0 * f64::EPSILON;
    if x_lo < 700.0 {
        let rhs_lo = x_lo.exp() * (1.0 - 4.0 * f64::EPSILON);
        le_float(b, rhs_lo)
    } else {
        let lb = ln_big(b);
        lb + 1e-13 * lb.abs() <= x_lo
    }
}

/// Checks the certificate at every `n` of the series.
pub fn verify_certificate(series: &GrowthSeries, cert: &GrowthCertificate) -> Result<Verification> {
    let counterexample = match *cert {
        GrowthCertificate::Polynomial { c, d } => {
            GrowthCertificate::polynomial(c, d)?;
            let c = rational(c);
            series
                .iter()
                .find(|(n, b)| !polynomial_holds(b, *n, &c, d))
                .map(|(n, _)| n)
        }
        GrowthCertificate::StrongSubexp { c, alpha, beta } => {
            GrowthCertificate::strong_subexp(c, alpha, beta)?;
            series
                .iter()
                .find(|(n, b)| !subexp_holds(b, *n, c, alpha, beta))
                .map(|(n, _)| n)
        }
        GrowthCertificate::ExponentialEvidence { .. } => {
            return Err(Error::invalid("exponential evidence is not a bound"));
        }
    };
    Ok(Verification {
        holds: counterexample.is_none(),
        counterexample,
        start: series.start(),
        end: series.end(),
    })
}

/// `max_n b(n) / (1+n)^d`, exactly.
pub fn min_polynomial_constant(series: &GrowthSeries, d: u32) -> BigRational {
    series
        .iter()
        .map(|(n, b)| {
            BigRational::new(
                b.clone().into(),
                num_bigint::BigInt::from(1 + n).pow(d),
            )
        })
        .max()
        .expect("series is nonempty")
}

fn fit_polynomial(series: &GrowthSeries, d: u32) -> Option<GrowthCertificate> {
    let c = float_up(&min_polynomial_constant(series, d))?;
    GrowthCertificate::polynomial(c, d).ok()
}

/// Smallest float `C` with `C exp(α n^β) >= b(n)` that also verifies.
fn fit_subexp_constant(series: &GrowthSeries, alpha: f64, beta: f64) -> Option<f64> {
    let mut c = series
        .iter()
        .map(|(n, b)| if n == 0 { b.to_f64().unwrap_or(f64::INFINITY) } else { (ln_big(b) - alpha * (n as f64).powf(beta)).exp() })
        .fold(0.0, f64::max);
    if !c.is_finite() {
        return None;
    }
    for _ in 0..64 {
        if series.iter().all(|(n, b)| subexp_holds(b, n, c, alpha, beta)) {
            return Some(c);
        }
        c = (c * (1.0 + 1e-12)).next_up();
    }
    None
}

/// Minimal `α` on the `ALPHA_RESOLUTION` grid with `C = b(start)`, then the
/// minimal `C` for that `α`.
fn fit_subexp(series: &GrowthSeries, beta: f64) -> Option<GrowthCertificate> {
    let c0 = float_up(&BigRational::from_integer(series.values()[0].clone().into()))?;
    let ln_c0 = c0.ln();
    let alpha_star = series
        .iter()
        .filter(|(n, _)| *n >= 1)
        .map(|(n, b)| (ln_big(b) - ln_c0) / (n as f64).powf(beta))
        .fold(0.0, f64::max);
    let mut alpha = ((alpha_star / ALPHA_RESOLUTION).ceil() * ALPHA_RESOLUTION).max(ALPHA_RESOLUTION);
    for _ in 0..1000 {
        if series.iter().all(|(n, b)| subexp_holds(b, n, c0, alpha, beta)) {
            let c = fit_subexp_constant(series, alpha, beta)?;
            return GrowthCertificate::strong_subexp(c, alpha, beta).ok();
        }
        alpha += ALPHA_RESOLUTION;
    }
    None
}

pub fn beta_grid() -> Vec<f64> {
    (1..BETA_STEPS).map(|k| k as f64 / BETA_STEPS as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub start: u64,
    pub end: u64,
    /// One entry per `d` in `0..=MAX_POLYNOMIAL_DEGREE` whose constant fits a float.
    pub polynomial: Vec<GrowthCertificate>,
    /// One entry per grid `β`.
    pub strong_subexp: Vec<GrowthCertificate>,
    pub evidence: GrowthCertificate,
    pub degree_estimate: Option<f64>,
}

impl FitReport {
    /// The fitted polynomial certificate of degree `d`, if any.
    pub fn polynomial_of_degree(&self, d: u32) -> Option<&GrowthCertificate> {
        self.polynomial
            .iter()
            .find(|c| matches!(c, GrowthCertificate::Polynomial { d: e, .. } if *e == d))
    }

    /// The polynomial certificate at the rounded degree estimate.
    pub fn best_polynomial(&self) -> Option<&GrowthCertificate> {
        let d = self.degree_estimate?.round();
        if d < 0.0 || d > MAX_POLYNOMIAL_DEGREE as f64 {
            return None;
        }
        self.polynomial_of_degree(d as u32)
    }
}

/// Fits every grid family. All returned certificates verify on `series`.
pub fn fit_certificate(series: &GrowthSeries) -> FitReport {
    let polynomial = (0..=MAX_POLYNOMIAL_DEGREE)
        .filter_map(|d| fit_polynomial(series, d))
        .collect();
    let strong_subexp = beta_grid()
        .into_iter()
        .filter_map(|beta| fit_subexp(series, beta))
        .collect();
    FitReport {
        start: series.start(),
        end: series.end(),
        polynomial,
        strong_subexp,
        evidence: GrowthCertificate::ExponentialEvidence {
            rates: root_limsup(series),
        },
        degree_estimate: fit_polynomial_degree(series),
    }
}

/// Slope of `ln b(n)` against `ln(1+n)` between the midpoint and the end of
/// the range.
pub fn fit_polynomial_degree(series: &GrowthSeries) -> Option<f64> {
    let end = series.end();
    let mid = series.start() + (end - series.start()) / 2;
    if mid == end {
        return None;
    }
    let lb = |n: u64| ln_big(series.get(n).expect("n in range"));
    Some((lb(end) - lb(mid)) / (((1 + end) as f64).ln() - ((1 + mid) as f64).ln()))
}

/// `b(n)^{1/n}` for every `n >= 1` in the range.
pub fn root_limsup(series: &GrowthSeries) -> Vec<f64> {
    series
        .iter()
        .filter(|(n, _)| *n >= 1)
        .map(|(n, b)| (ln_big(b) / n as f64).exp())
        .collect()
}

/// `r ↦ ⌈M f(r)²⌉`, the ball bound for the coarse groupoid of a space with
/// ball growth `f`.
pub fn coarse_growth_bound(f: &GrowthSeries, m: f64) -> Result<GrowthSeries> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::invalid("the coarse constant M must be at least 1"));
    }
    let m = rational(m);
    let values = f
        .values()
        .iter()
        .map(|b| {
            let sq = BigRational::from_integer((b * b).into());
            let v = (&m * sq).ceil().to_integer();
            v.to_biguint().expect("nonnegative")
        })
        .collect();
    GrowthSeries::new(f.start(), values)
}

/// The certificate for [`coarse_growth_bound`] implied by one for `f`:
/// `C(1+r)^d ↦ MC²(1+r)^{2d}` and `C exp(α r^β) ↦ MC² exp(2α r^β)`. For
/// non-integer `M` the constant grows by 1 to absorb the ceiling.
pub fn transfer_certificate(cert: &GrowthCertificate, m: f64) -> Result<GrowthCertificate> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::invalid("the coarse constant M must be at least 1"));
    }
    let ceil_slack = if m.fract() == 0.0 { 0.0 } else { 1.0 };
    let scale = |c: f64| (((m * c).next_up() * c).next_up() + ceil_slack).next_up();
    match *cert {
        GrowthCertificate::Polynomial { c, d } => GrowthCertificate::polynomial(scale(c), 2 * d),
        GrowthCertificate::StrongSubexp { c, alpha, beta } => {
            GrowthCertificate::strong_subexp(scale(c), (2.0 * alpha).next_up(), beta)
        }
        GrowthCertificate::ExponentialEvidence { .. } => Err(Error::invalid("exponential evidence is not a bound")),
    }
}

impl From<&crate::shift::LanguageTable> for GrowthSeries {
    /// The complexity series `n ↦ p_X(n)` for `n >= 1`.
    fn from(t: &crate::shift::LanguageTable) -> Self {
        let values: Vec<BigUint> = t.cumulatives()[1..].to_vec();
        GrowthSeries::new(1, if values.is_empty() { vec![BigUint::one()] } else { values })
            .expect("complexity is nondecreasing and positive")
    }
}
