//! Numerical verification of the weight and convolution inequalities.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::operator::upper_bound;
use super::weights::{InterpolationParams, WeightParams};
use super::{Region, SupportedFunction};
use crate::error::{Error, Result};
use crate::groupoid::{Arrow, Point};
use crate::numeric::relative_excess;

/// Relative slack allowed on every comparison.
pub const SLACK: f64 = 1e-9;

const HUB_POINTS: usize = 3;
const MAX_SUPPORT: usize = 8;

/// One instance `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
}

impl Comparison {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Comparison { lhs, rhs }
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + SLACK)
    }

    /// `(lhs - rhs) / rhs`; a violation has slack above [`SLACK`].
    pub fn slack(&self) -> f64 {
        relative_excess(self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub cases: u64,
    pub violations: u64,
    /// Largest relative excess of a left side over its right side; negative
    /// when every case holds with room to spare. `None` when no case ran.
    pub worst_slack: Option<f64>,
    pub params: BTreeMap<String, f64>,
}

impl CheckReport {
    fn new(check: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            cases: 0,
            violations: 0,
            worst_slack: None,
            params: BTreeMap::new(),
        }
    }

    fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn weights(self, w: &WeightParams) -> Self {
        self.param("alpha", w.alpha)
            .param("beta", w.beta)
            .param("C", w.cert.c)
            .param("alpha0", w.cert.alpha0)
            .param("beta0", w.cert.beta0)
    }

    /// Records one case made of several comparisons.
    fn record(&mut self, comparisons: &[Comparison]) {
        self.cases += 1;
        if comparisons.iter().any(|c| !c.holds()) {
            self.violations += 1;
        }
        for c in comparisons {
            let s = c.slack();
            self.worst_slack = Some(self.worst_slack.map_or(s, |w| w.max(s)));
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn composable_pairs(region: &Region) -> Vec<(&(Arrow, u64), &(Arrow, u64))> {
    let mut by_range: HashMap<&Point, Vec<&(Arrow, u64)>> = HashMap::new();
    for e in region.arrows() {
        by_range.entry(e.0.range()).or_default().push(e);
    }
    let mut out = Vec::new();
    for x in region.arrows() {
        for y in by_range.get(x.0.source()).into_iter().flatten() {
            out.push((x, *y));
        }
    }
    out
}

fn eq41_pair(region: &Region, params: &WeightParams, x: &(Arrow, u64), y: &(Arrow, u64)) -> Result<[Comparison; 2]> {
    let xy = region.orbit().compose(&x.0, &y.0)?;
    let l = region.length(&xy);
    let (wx, wy, wxy) = (params.omega(x.1), params.omega(y.1), params.omega(l));
    Ok([
        Comparison::new(wxy, wx * wy),
        Comparison::new(wxy / (wx * wy), params.aux_u(x.1) + params.aux_u(y.1)),
    ])
}

/// `ω(xy) <= ω(x) ω(y)` over every composable pair of region arrows.
pub fn check_weight_submult(region: &Region, params: &WeightParams) -> Result<CheckReport> {
    let mut rep = CheckReport::new("submult").weights(params);
    for (x, y) in composable_pairs(region) {
        rep.record(&eq41_pair(region, params, x, y)?[..1]);
    }
    Ok(rep)
}

/// `ω(xy) / (ω(x) ω(y)) <= u(x) + u(y)` over every composable pair of
/// region arrows.
pub fn check_eq41(region: &Region, params: &WeightParams) -> Result<CheckReport> {
    let mut rep = CheckReport::new("eq41").weights(params);
    for (x, y) in composable_pairs(region) {
        rep.record(&eq41_pair(region, params, x, y)?[1..]);
    }
    Ok(rep)
}

/// Random composable pairs; each case checks both submultiplicativity and
/// the `u(x) + u(y)` estimate.
pub fn sweep_eq41(region: &Region, params: &WeightParams, cases: u64, seed: u64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("eq41").weights(params).param("seed", seed as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arrows = region.arrows();
    if arrows.is_empty() {
        return Ok(rep);
    }
    let mut by_range: HashMap<&Point, Vec<&(Arrow, u64)>> = HashMap::new();
    for e in arrows {
        by_range.entry(e.0.range()).or_default().push(e);
    }
    for _ in 0..cases {
        let x = &arrows[rng.gen_range(0..arrows.len())];
        let ys = &by_range[x.0.source()];
        let y = ys[rng.gen_range(0..ys.len())];
        rep.record(&eq41_pair(region, params, x, y)?);
    }
    Ok(rep)
}

/// Exponent triples `(p, q, r)` from `set` with `1 + 1/r = 1/p + 1/q` and
/// `r` finite and itself in `set`.
pub fn young_triples(set: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &p in set {
        for &q in set {
            let inv_r = 1.0 / p + 1.0 / q - 1.0;
            if inv_r <= 0.0 {
                continue;
            }
            if let Some(&r) = set.iter().find(|&&r| (1.0 / r - inv_r).abs() < 1e-12) {
                out.push((p, q, r));
            }
        }
    }
    out
}

/// `‖f ∗ g‖_r <= ‖f‖_p ‖g‖_q`.
pub fn check_young(
    region: &Region,
    f: &SupportedFunction,
    g: &SupportedFunction,
    p: f64,
    q: f64,
    r: f64,
) -> Result<Comparison> {
    if !(p >= 1.0 && q >= 1.0 && r >= 1.0) || (1.0 + 1.0 / r - 1.0 / p - 1.0 / q).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "exponents ({p}, {q}, {r}) violate 1 + 1/r = 1/p + 1/q"
        )));
    }
    let fg = region.convolve(f, g)?;
    Ok(Comparison::new(fg.fiber_norm(r), f.fiber_norm(p) * g.fiber_norm(q)))
}

/// `‖f ∗ g‖_{α,β} <= ‖f‖_{α,β} ‖g σ‖_1 + ‖f σ‖_1 ‖g‖_{α,β}`.
pub fn check_lemma44(
    region: &Region,
    f: &SupportedFunction,
    g: &SupportedFunction,
    params: &WeightParams,
    p: f64,
) -> Result<Comparison> {
    let fg = region.convolve(f, g)?;
    let rhs = f.weighted_norm(params, p) * g.sigma_norm1(params)
        + f.sigma_norm1(params) * g.weighted_norm(params, p);
    Ok(Comparison::new(fg.weighted_norm(params, p), rhs))
}

/// `‖f ∗ f‖_{α,β} <= C ‖f‖_{α,β}^{1+θ} U^{1-θ}`, with `U` the certified
/// upper bound `min(‖f‖_I, K ‖f‖_{α,β})` on the reduced norm.
pub fn check_interpolation(
    region: &Region,
    f: &SupportedFunction,
    params: &WeightParams,
    interp: &InterpolationParams,
    holder_k: f64,
) -> Result<Comparison> {
    let p = interp.p;
    let ff = region.convolve(f, f)?;
    let norm = f.weighted_norm(params, p);
    let u = upper_bound(f, p, Some((params, holder_k)));
    let rhs = interp.c_interp * norm.powf(1.0 + interp.theta) * u.powf(1.0 - interp.theta);
    Ok(Comparison::new(ff.weighted_norm(params, p), rhs))
}

/// Random supports on a few region points, so that most products are
/// defined: both endpoints of every support arrow lie in `hub`.
fn hub_function(region: &Region, rng: &mut ChaCha8Rng, hub: &[Point], max_len: u64) -> SupportedFunction {
    let pool: Vec<&(Arrow, u64)> = region
        .arrows()
        .iter()
        .filter(|(g, l)| *l <= max_len && hub.contains(g.range()) && hub.contains(g.source()))
        .collect();
    let mut f = SupportedFunction::new();
    let n = rng.gen_range(1..=MAX_SUPPORT);
    for _ in 0..n {
        let (g, l) = pool[rng.gen_range(0..pool.len())];
        let c = num_complex::Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        f.insert(g.clone(), *l, c);
    }
    f
}

fn random_hub(region: &Region, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let k = rng.gen_range(1..=HUB_POINTS.min(region.points().len()));
    region.points().choose_multiple(rng, k).cloned().collect()
}

/// Half the region radius, so products stay within it.
fn sample_len(region: &Region) -> u64 {
    (region.radius() as u64).min(region.cap() / 2)
}

/// Young's inequality for every triple in `triples`, on `cases` random
/// pairs `(f, g)`.
pub fn sweep_young(region: &Region, triples: &[(f64, f64, f64)], cases: u64, seed: u64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("young")
        .param("seed", seed as f64)
        .param("triples", triples.len() as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = sample_len(region);
    for _ in 0..cases {
        let hub = random_hub(region, &mut rng);
        let f = hub_function(region, &mut rng, &hub, max_len);
        let g = hub_function(region, &mut rng, &hub, max_len);
        let cmp = triples
            .iter()
            .map(|&(p, q, r)| check_young(region, &f, &g, p, q, r))
            .collect::<Result<Vec<_>>>()?;
        rep.record(&cmp);
    }
    Ok(rep)
}

pub fn sweep_lemma44(region: &Region, params: &WeightParams, p: f64, cases: u64, seed: u64) -> Result<CheckReport> {
    let mut rep = CheckReport::new("lemma44")
        .weights(params)
        .param("p", p)
        .param("seed", seed as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = sample_len(region);
    for _ in 0..cases {
        let hub = random_hub(region, &mut rng);
        let f = hub_function(region, &mut rng, &hub, max_len);
        let g = hub_function(region, &mut rng, &hub, max_len);
        rep.record(&[check_lemma44(region, &f, &g, params, p)?]);
    }
    Ok(rep)
}

pub fn sweep_interpolation(
    region: &Region,
    params: &WeightParams,
    interp: &InterpolationParams,
    holder_k: f64,
    cases: u64,
    seed: u64,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("interp")
        .weights(params)
        .param("p", interp.p)
        .param("theta", interp.theta)
        .param("q", interp.q)
        .param("s", interp.s)
        .param("C_interp", interp.c_interp)
        .param("K", holder_k)
        .param("seed", seed as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = sample_len(region);
    for _ in 0..cases {
        let hub = random_hub(region, &mut rng);
        let f = hub_function(region, &mut rng, &hub, max_len);
        rep.record(&[check_interpolation(region, &f, params, interp, holder_k)?]);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::super::tests::prime_region;
    use super::super::weights::{choose_theta, holder_constant, LevelProfile, SubexpBound};
    use super::*;
    use crate::groupoid::DEFAULT_BALL_BUDGET;
    use num_complex::Complex64;

    fn params(region: &Region) -> (WeightParams, LevelProfile) {
        let profile = region.level_profile(10, DEFAULT_BALL_BUDGET).unwrap();
        let cert = SubexpBound::covering(&profile, 1.0, 0.5).unwrap();
        (WeightParams::new(4.0, 0.5, cert).unwrap(), profile)
    }

    const SET: [f64; 6] = [1.0, 1.25, 1.5, 2.0, 3.0, 4.0];

    #[test]
    fn exponent_triples() {
        let t = young_triples(&SET);
        assert_eq!(t.len(), 12);
        assert!(t.contains(&(1.5, 1.5, 3.0)));
        assert!(t.contains(&(1.0, 1.0, 1.0)));
        assert!(t.contains(&(4.0, 1.0, 4.0)));
        assert!(!t.iter().any(|&(p, q, _)| p == 2.0 && q == 2.0));
    }

    #[test]
    fn exhaustive_weight_checks_pass() {
        let r = prime_region(4, 8);
        let (w, _) = params(&r);
        let s = check_weight_submult(&r, &w).unwrap();
        let e = check_eq41(&r, &w).unwrap();
        assert!(s.cases > 1000 && s.passed(), "{s:?}");
        assert!(e.cases == s.cases && e.passed(), "{e:?}");
    }

    #[test]
    fn inverse_and_unit_pairs() {
        let r = prime_region(3, 6);
        let (w, _) = params(&r);
        for (g, l) in r.arrows() {
            let inv = (g.inverse(), *l);
            let [a, b] = eq41_pair(&r, &w, &(g.clone(), *l), &inv).unwrap();
            assert!(a.holds() && b.holds());
            if g.is_unit() {
                assert_eq!((a.lhs, a.rhs, b.lhs, b.rhs), (1.0, 1.0, 1.0, 2.0));
            }
        }
    }

    #[test]
    fn young_examples() {
        let r = prime_region(3, 6);
        let o = r.orbit();
        let g = o.neighbors(&o.unit(&o.base_point()))[0].clone();
        let d = r.delta(&g, Complex64::new(1.0, 0.0));
        for (p, q, s) in young_triples(&SET) {
            let c = check_young(&r, &d, &d, p, q, s).unwrap();
            assert_eq!((c.lhs, c.rhs), (1.0, 1.0));
        }
        let bad = check_young(&r, &d, &d, 2.0, 2.0, 2.0);
        assert!(matches!(bad, Err(Error::InvalidParameter(_))));
        let rep = sweep_young(&r, &[(1.0, 1.0, 1.0), (1.0, 2.0, 2.0)], 200, 3).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn lemma44_examples() {
        let r = prime_region(3, 6);
        let o = r.orbit();
        let (w, _) = params(&r);
        let u = r.delta(&o.unit(&o.base_point()), Complex64::new(1.0, 0.0));
        let c = check_lemma44(&r, &u, &u, &w, 2.0).unwrap();
        assert_eq!((c.lhs, c.rhs), (1.0, 2.0));
        for x in r.arrows().iter().take(200) {
            for y in r.arrows_from(x.0.source()).take(1) {
                // Point masses at composable arrows g, h: both sides reduce
                // to ω(gh) <= ω(g)σ(h) + σ(g)ω(h).
                let (h, hl) = (y.0.inverse(), y.1);
                let fg = r.delta(&x.0, Complex64::new(1.0, 0.0));
                let fh = r.delta(&h, Complex64::new(1.0, 0.0));
                let c = check_lemma44(&r, &fg, &fh, &w, 1.5).unwrap();
                let expected = w.omega(x.1) * w.sigma(hl) + w.sigma(x.1) * w.omega(hl);
                assert!((c.rhs - expected).abs() <= 1e-12 * expected);
                assert!(c.holds());
            }
        }
    }

    #[test]
    fn interpolation_examples() {
        let r = prime_region(3, 6);
        let o = r.orbit();
        let (w, profile) = params(&r);
        let ip = choose_theta(&w, 2.0, &profile).unwrap();
        let k = holder_constant(&w, 2.0, &profile).unwrap();
        let u = r.delta(&o.unit(&o.base_point()), Complex64::new(1.0, 0.0));
        let c = check_interpolation(&r, &u, &w, &ip, k).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert!(c.rhs >= 2.0);
        let rep = sweep_interpolation(&r, &w, &ip, k, 200, 8).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn sweeps_are_deterministic() {
        let r = prime_region(3, 6);
        let (w, _) = params(&r);
        let a = sweep_lemma44(&r, &w, 2.0, 100, 42).unwrap();
        let b = sweep_lemma44(&r, &w, 2.0, 100, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        let e = sweep_eq41(&r, &w, 300, 1).unwrap();
        assert!(e.passed() && e.cases == 300);
    }
}
