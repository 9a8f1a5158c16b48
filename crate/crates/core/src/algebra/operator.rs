//! Bounds on the reduced `L^p` operator norm.
//!
//! The left regular representation `λ_u(f)` restricted to a finite piece of
//! `G_u` compresses the true operator, so the norm of the truncated matrix
//! bounds `‖f‖_{F^p_λ}` from below. From above, `‖f‖_{F^p_λ} <= ‖f‖_I` and
//! `‖f‖_I <= K_{α,β} ‖f‖_{α,β}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::checks::Comparison;
use super::weights::{InterpolationParams, WeightParams};
use super::{Region, SupportedFunction};
use crate::error::{Error, Result};
use crate::groupoid::{Arrow, Orbit};

const RANDOM_TEST_VECTORS: usize = 200;

/// `M[i][j] = f(a_i a_j⁻¹)` over a list `a` of arrows sharing one source.
pub fn rep_matrix(orbit: &Orbit, f: &SupportedFunction, ball: &[Arrow]) -> Result<DMatrix<Complex64>> {
    let n = ball.len();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (j, aj) in ball.iter().enumerate() {
        let inv = aj.inverse();
        for (i, ai) in ball.iter().enumerate() {
            if ai.source() != aj.source() {
                return Err(Error::invalid("representation ball must lie in one source fiber"));
            }
            m[(i, j)] = f.get(&orbit.compose(ai, &inv)?);
        }
    }
    Ok(m)
}

fn p_norm(v: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    v.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Lower bound for the `ℓ^p` operator norm of `m`: the exact spectral norm
/// for `p = 2`, otherwise the best ratio over all coordinate vectors and a
/// seeded family of random nonnegative vectors.
fn matrix_norm_lower(m: &DMatrix<Complex64>, p: f64, seed: u64) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if p == 2.0 {
        return m.clone().singular_values().max();
    }
    let n = m.ncols();
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        (0..m.nrows())
            .map(|i| (0..n).map(|j| m[(i, j)] * v[j]).sum())
            .collect()
    };
    let mut best: f64 = 0.0;
    for j in 0..n {
        let col: Vec<Complex64> = (0..m.nrows()).map(|i| m[(i, j)]).collect();
        best = best.max(p_norm(&col, p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_TEST_VECTORS {
        let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen::<f64>(), 0.0)).collect();
        let nv = p_norm(&v, p);
        if nv > 0.0 {
            best = best.max(p_norm(&apply(&v), p) / nv);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on `‖f‖_{F^p_λ}`. The lower bound uses `λ_u(f)` on `ball`; the
/// upper bound is `min(‖f‖_I, K ‖f‖_{α,β})` when `weighted = Some((params, K))`.
pub fn op_norm_bounds(
    orbit: &Orbit,
    f: &SupportedFunction,
    p: f64,
    ball: &[Arrow],
    weighted: Option<(&WeightParams, f64)>,
    seed: u64,
) -> Result<NormBounds> {
    if !(p >= 1.0) {
        return Err(Error::invalid("operator norms need p >= 1"));
    }
    let m = rep_matrix(orbit, f, ball)?;
    let lower = matrix_norm_lower(&m, p, seed);
    Ok(NormBounds {
        lower,
        upper: upper_bound(f, p, weighted),
    })
}

pub(crate) fn upper_bound(f: &SupportedFunction, p: f64, weighted: Option<(&WeightParams, f64)>) -> f64 {
    let i = f.i_norm();
    match weighted {
        Some((params, k)) if p.is_finite() => i.min(k * f.weighted_norm(params, p)),
        _ => i,
    }
}

/// Componentwise maximum of the bounds for `f` and `f*`.
pub fn sym_norm_bounds(
    orbit: &Orbit,
    f: &SupportedFunction,
    p: f64,
    ball: &[Arrow],
    weighted: Option<(&WeightParams, f64)>,
    seed: u64,
) -> Result<NormBounds> {
    let a = op_norm_bounds(orbit, f, p, ball, weighted, seed)?;
    let b = op_norm_bounds(orbit, &f.involution(), p, ball, weighted, seed)?;
    Ok(NormBounds {
        lower: a.lower.max(b.lower),
        upper: a.upper.max(b.upper),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerStep {
    /// The step computes `f^{2^{j+1}}` from `f^{2^j}`.
    pub j: usize,
    /// `‖f^{2^j}‖_{α,β}^{2^{-j}}`.
    pub root: f64,
    pub norm: f64,
    /// `C ‖f^{2^j}‖_{α,β}^{1+θ} U^{1-θ}` with `U` the certified upper bound on
    /// `‖f^{2^j}‖_{F^p_λ}`, or `None` on the last entry.
    pub check: Option<Comparison>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSequence {
    pub steps: Vec<PowerStep>,
}

impl PowerSequence {
    pub fn all_hold(&self) -> bool {
        self.steps.iter().filter_map(|s| s.check).all(|c| c.holds())
    }

    pub fn roots(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.root).collect()
    }
}

/// Repeated squaring `f, f², f⁴, ...` up to `f^{2^depth}`, checking the
/// squaring estimate at each step.
pub fn power_norm_sequence(
    region: &Region,
    f: &SupportedFunction,
    params: &WeightParams,
    interp: &InterpolationParams,
    holder_k: f64,
    depth: usize,
) -> Result<PowerSequence> {
    let p = interp.p;
    let mut steps = Vec::with_capacity(depth + 1);
    let mut cur = f.clone();
    for j in 0..=depth {
        let norm = cur.weighted_norm(params, p);
        let root = norm.powf(0.5f64.powi(j as i32));
        if j == depth {
            steps.push(PowerStep {
                j,
                root,
                norm,
                check: None,
            });
            break;
        }
        let next = match region.convolve(&cur, &cur) {
            Ok(n) => n,
            Err(Error::RegionEscape { length, cap }) => {
                return Err(Error::PowerRegionEscape {
                    completed_step: j,
                    length,
                    cap,
                })
            }
            Err(e) => return Err(e),
        };
        let u = upper_bound(&cur, p, Some((params, holder_k)));
        let rhs = interp.c_interp * norm.powf(1.0 + interp.theta) * u.powf(1.0 - interp.theta);
        steps.push(PowerStep {
            j,
            root,
            norm,
            check: Some(Comparison::new(next.weighted_norm(params, p), rhs)),
        });
        cur = next;
    }
    Ok(PowerSequence { steps })
}

/// Outcome of [`sweep_powers`] over seeded random functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSweep {
    pub functions: u64,
    pub depth: usize,
    pub steps_checked: u64,
    pub violations: u64,
    /// Largest relative excess over all steps; `None` when nothing was checked.
    pub worst_slack: Option<f64>,
    /// `‖f^{2^depth}‖^{2^{-depth}}` for each function.
    pub final_roots: Vec<f64>,
}

impl PowerSweep {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// [`power_norm_sequence`] for `functions` random functions with support
/// of length at most `max_len`. The region cap must admit `2^depth max_len`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_powers(
    region: &Region,
    params: &WeightParams,
    interp: &InterpolationParams,
    holder_k: f64,
    depth: usize,
    functions: u64,
    max_len: u64,
    seed: u64,
) -> Result<PowerSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PowerSweep {
        functions,
        depth,
        steps_checked: 0,
        violations: 0,
        worst_slack: None,
        final_roots: Vec::with_capacity(functions as usize),
    };
    for _ in 0..functions {
        let f = region.random_function(&mut rng, 8, max_len);
        let seq = power_norm_sequence(region, &f, params, interp, holder_k, depth)?;
        for c in seq.steps.iter().filter_map(|s| s.check) {
            out.steps_checked += 1;
            if !c.holds() {
                out.violations += 1;
            }
            out.worst_slack = Some(out.worst_slack.map_or(c.slack(), |w| w.max(c.slack())));
        }
        out.final_roots.push(*seq.roots().last().expect("depth + 1 entries"));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormSweep {
    pub functions: u64,
    pub p: f64,
    pub bounds: Vec<NormBounds>,
    /// Functions whose lower bound exceeds the upper one beyond slack.
    pub inconsistent: u64,
}

impl NormSweep {
    pub fn passed(&self) -> bool {
        self.inconsistent == 0
    }
}

/// [`sym_norm_bounds`] for seeded random functions on the base fiber ball
/// of radius `ball_radius`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_norm_bounds(
    region: &Region,
    params: &WeightParams,
    p: f64,
    holder_k: f64,
    ball_radius: usize,
    functions: u64,
    seed: u64,
    budget: u64,
) -> Result<NormSweep> {
    let o = region.orbit();
    let ball = o.ball(ball_radius, budget)?.ball_elements(ball_radius);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = region.radius() as u64;
    let mut bounds = Vec::with_capacity(functions as usize);
    for i in 0..functions {
        let f = region.random_function(&mut rng, 8, max_len);
        bounds.push(sym_norm_bounds(o, &f, p, &ball, Some((params, holder_k)), seed.wrapping_add(i))?);
    }
    let inconsistent = bounds
        .iter()
        .filter(|b| b.lower > b.upper * (1.0 + super::checks::SLACK))
        .count() as u64;
    Ok(NormSweep {
        functions,
        p,
        bounds,
        inconsistent,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::prime_region;
    use super::super::weights::{choose_theta, holder_constant, SubexpBound};
    use super::*;
    use crate::groupoid::DEFAULT_BALL_BUDGET;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn unit_mass_is_the_identity() {
        let r = prime_region(3, 12);
        let o = r.orbit();
        let ball = o.ball(3, DEFAULT_BALL_BUDGET).unwrap().ball_elements(3);
        // The indicator of the unit space, restricted to the points met.
        let points: std::collections::BTreeSet<_> = ball.iter().map(|g| g.range().clone()).collect();
        let mut e = SupportedFunction::new();
        for x in &points {
            e.insert(o.unit(x), 0, one());
        }
        let m = rep_matrix(o, &e, &ball).unwrap();
        assert_eq!(m, DMatrix::identity(ball.len(), ball.len()));
        let at_base = r.delta(&o.unit(&o.base_point()), one());
        let m = rep_matrix(o, &at_base, &ball).unwrap();
        for (i, g) in ball.iter().enumerate() {
            let expected = if g.range() == &o.base_point() { one() } else { Complex64::new(0.0, 0.0) };
            assert_eq!(m[(i, i)], expected);
        }
        for p in [1.0, 1.5, 2.0, 3.0] {
            let b = op_norm_bounds(o, &e, p, &ball, None, 0).unwrap();
            assert!((b.lower - 1.0).abs() < 1e-12 && b.upper == 1.0, "p = {p}: {b:?}");
        }
    }

    #[test]
    fn point_mass_is_a_partial_isometry() {
        let r = prime_region(3, 12);
        let o = r.orbit();
        let ball = o.ball(3, DEFAULT_BALL_BUDGET).unwrap().ball_elements(3);
        let g = o.neighbors(&o.unit(&o.base_point()))[1].clone();
        let d = r.delta(&g, one());
        let m = rep_matrix(o, &d, &ball).unwrap();
        for i in 0..ball.len() {
            let row: usize = (0..ball.len()).filter(|&j| m[(i, j)] != Complex64::new(0.0, 0.0)).count();
            let col: usize = (0..ball.len()).filter(|&j| m[(j, i)] != Complex64::new(0.0, 0.0)).count();
            assert!(row <= 1 && col <= 1);
        }
        for p in [1.0, 2.0, 3.0] {
            let b = op_norm_bounds(o, &d, p, &ball, None, 0).unwrap();
            assert!((b.lower - 1.0).abs() < 1e-12);
            let s = sym_norm_bounds(o, &d, p, &ball, None, 0).unwrap();
            assert_eq!(s, b);
        }
    }

    #[test]
    fn lower_bounds_stay_below_upper_bounds() {
        let r = prime_region(3, 24);
        let o = r.orbit();
        let cert = SubexpBound::covering(&r.level_profile(8, DEFAULT_BALL_BUDGET).unwrap(), 1.0, 0.5).unwrap();
        let params = WeightParams::new(4.0, 0.5, cert).unwrap();
        let profile = r.level_profile(8, DEFAULT_BALL_BUDGET).unwrap();
        let table = o.ball(5, DEFAULT_BALL_BUDGET).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let k = holder_constant(&params, p, &profile).unwrap();
            for _ in 0..20 {
                let f = r.random_function(&mut rng, 8, 3);
                let mut prev = 0.0;
                for radius in 2..=5 {
                    let ball = table.ball_elements(radius);
                    let b = op_norm_bounds(o, &f, p, &ball, Some((&params, k)), 9).unwrap();
                    assert!(b.lower <= b.upper * (1.0 + 1e-9), "{b:?}");
                    assert!(f.norm_inf() <= b.upper * (1.0 + 1e-12));
                    if p == 2.0 {
                        // Compressions of larger truncations have larger norm.
                        assert!(b.lower >= prev * (1.0 - 1e-12));
                        prev = b.lower;
                    }
                }
            }
        }
    }

    #[test]
    fn self_adjoint_functions_have_symmetric_bounds() {
        let r = prime_region(3, 12);
        let o = r.orbit();
        let ball = o.ball(4, DEFAULT_BALL_BUDGET).unwrap().ball_elements(4);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let f = r.random_function(&mut rng, 5, 3);
            let h = f.add(&f.involution());
            assert_eq!(
                sym_norm_bounds(o, &h, 2.0, &ball, None, 1).unwrap(),
                op_norm_bounds(o, &h, 2.0, &ball, None, 1).unwrap()
            );
        }
    }

    /// Convolution powers on ℤ, for masses on the isotropy of `0^∞`.
    fn z_power_norms(coeffs: &[(i64, Complex64)], params: &WeightParams, p: f64, depth: usize) -> Vec<f64> {
        use std::collections::BTreeMap;
        let mut cur: BTreeMap<i64, Complex64> = coeffs.iter().copied().collect();
        let mut out = Vec::new();
        for j in 0..=depth {
            let norm = cur
                .iter()
                .map(|(k, c)| (c.norm() * params.omega(k.unsigned_abs())).powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            out.push(norm.powf(0.5f64.powi(j as i32)));
            let mut next = BTreeMap::new();
            for (a, x) in &cur {
                for (b, y) in &cur {
                    *next.entry(a + b).or_insert(Complex64::new(0.0, 0.0)) += x * y;
                }
            }
            next.retain(|_, v| *v != Complex64::new(0.0, 0.0));
            cur = next;
        }
        out
    }

    #[test]
    fn isotropy_powers_match_integer_convolution() {
        let r = prime_region(2, 64);
        let o = r.orbit();
        let x = o.base_point();
        let unit = o.unit(&x);
        let up = o.neighbors(&unit)[0].clone();
        let down = up.inverse();
        assert_eq!((up.degree(), up.range()), (1, &x));
        let profile = r.level_profile(6, DEFAULT_BALL_BUDGET).unwrap();
        let cert = SubexpBound::covering(&profile, 1.0, 0.5).unwrap();
        let params = WeightParams::new(4.0, 0.5, cert).unwrap();
        let a = Complex64::new(0.7, 0.2);
        let b = Complex64::new(-0.4, 0.9);
        let f = r.delta(&up, a).add(&r.delta(&down, b));
        for p in [1.0, 2.0, 3.0] {
            let ip = choose_theta(&params, p, &profile).unwrap();
            let k = holder_constant(&params, p, &profile).unwrap();
            let seq = power_norm_sequence(&r, &f, &params, &ip, k, 3).unwrap();
            let oracle = z_power_norms(&[(1, a), (-1, b)], &params, p, 3);
            for (got, want) in seq.roots().iter().zip(&oracle) {
                assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
            }
            assert!(seq.all_hold());
        }
        let e = r.delta(&unit, one());
        let ip = choose_theta(&params, 2.0, &profile).unwrap();
        let seq = power_norm_sequence(&r, &e, &params, &ip, 1.0, 3).unwrap();
        assert!(seq.roots().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn power_escape_reports_the_completed_step() {
        let r = prime_region(2, 4);
        let o = r.orbit();
        let up = o.neighbors(&o.unit(&o.base_point()))[0].clone();
        let profile = r.level_profile(4, DEFAULT_BALL_BUDGET).unwrap();
        let cert = SubexpBound::covering(&profile, 1.0, 0.5).unwrap();
        let params = WeightParams::new(4.0, 0.5, cert).unwrap();
        let ip = choose_theta(&params, 2.0, &profile).unwrap();
        match power_norm_sequence(&r, &r.delta(&up, one()), &params, &ip, 1.0, 3) {
            Err(Error::PowerRegionEscape { completed_step: 2, length: 8, cap: 4 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
