//! Finitely supported functions on an enumerated piece of the groupoid, with
//! convolution, involution and the fiberwise norms used by the weighted
//! algebras.
//!
//! All `ℓ^p` norms here are fiberwise: the larger of the supremum over units
//! `u` of the `ℓ^p(G_u)` norm and that of the `ℓ^p(G^u)` norm. For `p = 1`
//! this is the I-norm.

mod checks;
mod operator;
mod weights;

pub use checks::{
    check_eq41, check_interpolation, check_lemma44, check_weight_submult, check_young,
    sweep_eq41, sweep_interpolation, sweep_lemma44, sweep_young, young_triples, CheckReport,
    Comparison, SLACK,
};
pub use operator::{
    op_norm_bounds, power_norm_sequence, rep_matrix, sweep_norm_bounds, sweep_powers,
    sym_norm_bounds, NormBounds, NormSweep, PowerSequence, PowerStep, PowerSweep,
};
pub use weights::{
    certified_fiber_sum, choose_theta, holder_constant, theta_interval, xi_theta_norm,
    InterpolationParams, LevelProfile, SubexpBound, WeightParams,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{Arrow, Orbit, Point};

/// The local groupoid on the points `P = r(B_x(radius))`: every arrow
/// between two points of `P` of length at most `radius`.
#[derive(Clone, Debug)]
pub struct Region {
    orbit: Orbit,
    radius: usize,
    cap: u64,
    points: Vec<Point>,
    arrows: Vec<(Arrow, u64)>,
    by_source: HashMap<Point, Vec<usize>>,
}

impl Region {
    /// `cap` bounds the length of any product formed later; longer products
    /// are reported as escaping the region.
    pub fn new(orbit: Orbit, radius: usize, cap: u64, budget: u64) -> Result<Self> {
        if cap < radius as u64 {
            return Err(Error::invalid("region cap must be at least its radius"));
        }
        let ball = orbit.ball(radius, budget)?;
        let points: BTreeSet<Point> = ball.elements().map(|(g, _)| g.range().clone()).collect();
        let mut arrows = Vec::new();
        for p in &points {
            let b = orbit.ball_at(p, radius, budget)?;
            arrows.extend(
                b.elements()
                    .filter(|(g, _)| points.contains(g.range()))
                    .map(|(g, l)| (g.clone(), l)),
            );
        }
        arrows.sort();
        let mut by_source: HashMap<Point, Vec<usize>> = HashMap::new();
        for (i, (g, _)) in arrows.iter().enumerate() {
            by_source.entry(g.source().clone()).or_default().push(i);
        }
        Ok(Region {
            orbit,
            radius,
            cap,
            points: points.into_iter().collect(),
            arrows,
            by_source,
        })
    }

    pub fn orbit(&self) -> &Orbit {
        &self.orbit
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Region arrows with their lengths, in a fixed order.
    pub fn arrows(&self) -> &[(Arrow, u64)] {
        &self.arrows
    }

    pub fn arrows_from<'a>(&'a self, u: &Point) -> impl Iterator<Item = &'a (Arrow, u64)> + 'a {
        self.by_source
            .get(u)
            .into_iter()
            .flatten()
            .map(move |&i| &self.arrows[i])
    }

    pub fn length(&self, g: &Arrow) -> u64 {
        self.orbit.length(g)
    }

    /// `max_{u ∈ P} |W_u(k)|` for `k = 0..=n`.
    pub fn level_profile(&self, n: usize, budget: u64) -> Result<LevelProfile> {
        let mut levels = vec![0u64; n + 1];
        for p in &self.points {
            let b = self.orbit.ball_at(p, n, budget)?;
            for (k, w) in b.level_sizes().into_iter().enumerate() {
                levels[k] = levels[k].max(w);
            }
        }
        Ok(LevelProfile::from_levels(levels))
    }

    /// The element `f` at the point mass on `g`, with its length annotated.
    pub fn delta(&self, g: &Arrow, value: Complex64) -> SupportedFunction {
        let mut f = SupportedFunction::new();
        f.insert(g.clone(), self.length(g), value);
        f
    }

    /// A random function with at most `max_support` entries drawn from the
    /// region arrows of length at most `max_len`, coefficients in the
    /// square `[-1, 1]²`.
    pub fn random_function<R: Rng>(&self, rng: &mut R, max_support: usize, max_len: u64) -> SupportedFunction {
        let pool: Vec<&(Arrow, u64)> = self.arrows.iter().filter(|(_, l)| *l <= max_len).collect();
        let mut f = SupportedFunction::new();
        if pool.is_empty() || max_support == 0 {
            return f;
        }
        let n = rng.gen_range(1..=max_support);
        for _ in 0..n {
            let (g, l) = pool[rng.gen_range(0..pool.len())];
            let c = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            f.insert(g.clone(), *l, c);
        }
        f
    }

    /// `(f ∗ g)(x) = Σ_{y ∈ G_{s(x)}} f(x y⁻¹) g(y)`.
    pub fn convolve(&self, f: &SupportedFunction, g: &SupportedFunction) -> Result<SupportedFunction> {
        let mut by_range: HashMap<&Point, Vec<(&Arrow, Complex64)>> = HashMap::new();
        for (b, e) in &g.entries {
            by_range.entry(b.range()).or_default().push((b, e.value));
        }
        let mut acc: BTreeMap<Arrow, Complex64> = BTreeMap::new();
        for (a, ea) in &f.entries {
            for (b, vb) in by_range.get(a.source()).into_iter().flatten() {
                let ab = self.orbit.compose(a, b)?;
                *acc.entry(ab).or_default() += ea.value * vb;
            }
        }
        let mut out = SupportedFunction::new();
        for (x, v) in acc {
            let l = self.length(&x);
            if l > self.cap {
                return Err(Error::RegionEscape {
                    length: l,
                    cap: self.cap,
                });
            }
            out.insert(x, l, v);
        }
        Ok(out)
    }
}

/// Weights, their growth bound and the interpolation constants at one `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedSetup {
    #[serde(skip)]
    pub profile: LevelProfile,
    pub params: WeightParams,
    pub interp: InterpolationParams,
    /// `K_{α,β}` with `‖f‖_I <= K ‖f‖_{α,β}`.
    pub holder_k: f64,
}

impl Region {
    /// Weights `(α, β)` over the growth bound `C exp(α₀ k^{β₀})`, with `C`
    /// the smallest constant covering the level profile up to `profile_len`.
    pub fn weighted_setup(
        &self,
        (alpha, beta): (f64, f64),
        (alpha0, beta0): (f64, f64),
        p: f64,
        profile_len: usize,
        budget: u64,
    ) -> Result<WeightedSetup> {
        let profile = self.level_profile(profile_len, budget)?;
        let cert = SubexpBound::covering(&profile, alpha0, beta0)?;
        let params = WeightParams::new(alpha, beta, cert)?;
        let interp = choose_theta(&params, p, &profile)?;
        let holder_k = holder_constant(&params, p, &profile)?;
        Ok(WeightedSetup {
            profile,
            params,
            interp,
            holder_k,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Entry {
    value: Complex64,
    length: u64,
}

/// A finitely supported function on arrows, each support element annotated
/// with its length. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SupportedFunction {
    entries: BTreeMap<Arrow, Entry>,
}

impl SupportedFunction {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `g`.
    pub fn insert(&mut self, g: Arrow, length: u64, value: Complex64) {
        use std::collections::btree_map::Entry as Slot;
        let zero = Complex64::new(0.0, 0.0);
        match self.entries.entry(g) {
            Slot::Vacant(v) => {
                if value != zero {
                    v.insert(Entry { value, length });
                }
            }
            Slot::Occupied(mut o) => {
                o.get_mut().value += value;
                if o.get().value == zero {
                    o.remove();
                }
            }
        }
    }

    pub fn get(&self, g: &Arrow) -> Complex64 {
        self.entries
            .get(g)
            .map_or(Complex64::new(0.0, 0.0), |e| e.value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(arrow, value, length)` in arrow order.
    pub fn iter(&self) -> impl Iterator<Item = (&Arrow, Complex64, u64)> {
        self.entries.iter().map(|(g, e)| (g, e.value, e.length))
    }

    pub fn max_length(&self) -> u64 {
        self.entries.values().map(|e| e.length).max().unwrap_or(0)
    }

    pub fn scale(&self, c: Complex64) -> SupportedFunction {
        let mut out = SupportedFunction::new();
        for (g, v, l) in self.iter() {
            out.insert(g.clone(), l, v * c);
        }
        out
    }

    pub fn add(&self, other: &SupportedFunction) -> SupportedFunction {
        let mut out = self.clone();
        for (g, v, l) in other.iter() {
            out.insert(g.clone(), l, v);
        }
        out
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> SupportedFunction {
        let mut out = SupportedFunction::new();
        for (g, v, l) in self.iter() {
            out.insert(g.clone(), l, Complex64::new(v.norm(), 0.0));
        }
        out
    }

    /// `f*(x) = conj(f(x⁻¹))`.
    pub fn involution(&self) -> SupportedFunction {
        let mut out = SupportedFunction::new();
        for (g, v, l) in self.iter() {
            out.insert(g.inverse(), l, v.conj());
        }
        out
    }

    /// Multiplies each entry by `w(length)`.
    pub fn weighted(&self, w: impl Fn(u64) -> f64) -> SupportedFunction {
        let mut out = SupportedFunction::new();
        for (g, v, l) in self.iter() {
            out.insert(g.clone(), l, v * w(l));
        }
        out
    }

    /// Fiberwise `ℓ^p` norm, `p ∈ [1, ∞]`.
    pub fn fiber_norm(&self, p: f64) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if p.is_infinite() {
            return self.norm_inf();
        }
        let mut src: HashMap<&Point, f64> = HashMap::new();
        let mut rng: HashMap<&Point, f64> = HashMap::new();
        for (g, v, _) in self.iter() {
            let t = v.norm().powf(p);
            *src.entry(g.source()).or_default() += t;
            *rng.entry(g.range()).or_default() += t;
        }
        let m = src.values().chain(rng.values()).fold(0.0f64, |a, &b| a.max(b));
        m.powf(1.0 / p)
    }

    pub fn i_norm(&self) -> f64 {
        self.fiber_norm(1.0)
    }

    pub fn norm_fiber_q(&self, q: f64) -> f64 {
        self.fiber_norm(q)
    }

    pub fn norm_inf(&self) -> f64 {
        self.iter().map(|(_, v, _)| v.norm()).fold(0.0, f64::max)
    }

    /// `‖f ω‖_p`.
    pub fn weighted_norm(&self, params: &WeightParams, p: f64) -> f64 {
        self.weighted(|l| params.omega(l)).fiber_norm(p)
    }

    /// `‖f σ‖_1`.
    pub fn sigma_norm1(&self, params: &WeightParams) -> f64 {
        self.weighted(|l| params.sigma(l)).fiber_norm(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{BasePath, DEFAULT_BALL_BUDGET};
    use crate::shift::ShiftSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(super) fn prime_region(radius: usize, cap: u64) -> Region {
        let orbit = Orbit::new(ShiftSpec::prime_shift(), BasePath::zeros()).unwrap();
        Region::new(orbit, radius, cap, DEFAULT_BALL_BUDGET).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn close(a: &SupportedFunction, b: &SupportedFunction) -> bool {
        let keys: BTreeSet<&Arrow> = a.iter().chain(b.iter()).map(|(g, _, _)| g).collect();
        keys.into_iter().all(|g| (a.get(g) - b.get(g)).norm() <= 1e-12 * (1.0 + a.get(g).norm()))
    }

    #[test]
    fn region_is_a_local_groupoid() {
        let r = prime_region(3, 12);
        let pts: BTreeSet<&Point> = r.points().iter().collect();
        for (g, l) in r.arrows() {
            assert!(pts.contains(g.range()) && pts.contains(g.source()));
            assert!(*l <= 3);
            assert_eq!(r.length(g), *l);
        }
        for u in r.points() {
            assert!(r.arrows_from(u).any(|(g, _)| g.is_unit() && g.source() == u));
        }
    }

    #[test]
    fn point_masses_convolve_to_products() {
        let r = prime_region(2, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (a, _) = &r.arrows()[rng.gen_range(0..r.arrows().len())];
            let (b, _) = &r.arrows()[rng.gen_range(0..r.arrows().len())];
            let fa = r.delta(a, one());
            let fb = r.delta(b, one());
            let c = r.convolve(&fa, &fb).unwrap();
            match r.orbit().compose(a, b) {
                Ok(ab) => {
                    assert_eq!(c.len(), 1);
                    assert_eq!(c.get(&ab), one());
                }
                Err(_) => assert!(c.is_empty()),
            }
        }
    }

    #[test]
    fn unit_mass_is_a_left_identity() {
        let r = prime_region(3, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = r.orbit().base_point();
        let e = r.delta(&r.orbit().unit(&u), one());
        let mut f = SupportedFunction::new();
        for (g, l) in r.arrows().iter().filter(|(g, _)| g.range() == &u) {
            f.insert(g.clone(), *l, Complex64::new(rng.gen_range(-1.0..1.0), 0.5));
        }
        assert!(!f.is_empty());
        assert_eq!(r.convolve(&e, &f).unwrap(), f);
    }

    #[test]
    fn convolution_is_associative_and_bilinear() {
        let r = prime_region(3, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = r.random_function(&mut rng, 6, 2);
            let g = r.random_function(&mut rng, 6, 2);
            let h = r.random_function(&mut rng, 6, 2);
            let left = r.convolve(&r.convolve(&f, &g).unwrap(), &h).unwrap();
            let right = r.convolve(&f, &r.convolve(&g, &h).unwrap()).unwrap();
            assert!(close(&left, &right));
            let c = Complex64::new(0.3, -1.2);
            let lin = r.convolve(&f.scale(c).add(&h), &g).unwrap();
            let sum = r.convolve(&f, &g).unwrap().scale(c).add(&r.convolve(&h, &g).unwrap());
            assert!(close(&lin, &sum));
        }
    }

    #[test]
    fn involution_reverses_products() {
        let r = prime_region(3, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = r.delta(&r.orbit().unit(&r.orbit().base_point()), one());
        assert_eq!(u.involution(), u);
        for _ in 0..50 {
            let f = r.random_function(&mut rng, 6, 3);
            let g = r.random_function(&mut rng, 6, 3);
            assert_eq!(f.involution().involution(), f);
            let lhs = r.convolve(&f, &g).unwrap().involution();
            let rhs = r.convolve(&g.involution(), &f.involution()).unwrap();
            assert!(close(&lhs, &rhs));
        }
        let (g, _) = r.arrows().iter().find(|(g, _)| !g.is_unit()).unwrap();
        let c = Complex64::new(2.0, 3.0);
        let inv = r.delta(g, c).involution();
        assert_eq!(inv.get(&g.inverse()), c.conj());
    }

    #[test]
    fn escaping_products_are_reported() {
        let r = prime_region(3, 4);
        let (g, _) = r
            .arrows()
            .iter()
            .find(|(g, l)| *l == 3 && g.range() == g.source())
            .unwrap();
        let f = r.delta(g, one());
        match r.convolve(&f, &f) {
            Err(Error::RegionEscape { length: 6, cap: 4 }) => {}
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn norm_examples() {
        let r = prime_region(2, 8);
        let u = r.orbit().base_point();
        let fiber: Vec<&(Arrow, u64)> = r.arrows_from(&u).collect();
        let mut f = SupportedFunction::new();
        for (g, l) in fiber.iter().take(3) {
            f.insert(g.clone(), *l, one());
        }
        assert_eq!(f.i_norm(), 3.0);

        let (g, _) = fiber.iter().find(|(g, _)| !g.is_unit()).unwrap();
        let d = r.delta(g, one());
        for p in [1.0, 1.5, 2.0, f64::INFINITY] {
            assert_eq!(d.fiber_norm(p), 1.0);
        }

        let mut h = SupportedFunction::new();
        h.insert(fiber[0].0.clone(), fiber[0].1, one());
        h.insert(fiber[1].0.clone(), fiber[1].1, Complex64::new(-2.0, 0.0));
        assert!((h.norm_fiber_q(2.0) - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.norm_inf(), 2.0);
    }

    #[test]
    fn weighted_norm_examples() {
        let r = prime_region(2, 8);
        let params = WeightParams::new(1.0, 0.5, SubexpBound::new(1.0, 0.5, 0.25).unwrap()).unwrap();
        let u = r.orbit().base_point();
        let l1 = r.arrows_from(&u).find(|(_, l)| *l == 1).unwrap();
        let l2 = r.arrows_from(&u).find(|(_, l)| *l == 2).unwrap();
        let mut f = SupportedFunction::new();
        f.insert(l1.0.clone(), 1, one());
        f.insert(l2.0.clone(), 2, one());
        let expected = 1f64.exp() + 2f64.sqrt().exp();
        assert!((f.weighted_norm(&params, 1.0) - expected).abs() < 1e-14);
        let d = r.delta(&l2.0, one());
        assert!((d.weighted_norm(&params, 2.0) - params.omega(2)).abs() < 1e-15);
        let e = r.delta(&r.orbit().unit(&u), Complex64::new(0.0, 3.0));
        assert_eq!(e.weighted_norm(&params, 3.0), e.fiber_norm(3.0));
    }
}
