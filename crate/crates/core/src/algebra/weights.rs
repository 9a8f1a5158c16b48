//! Subexponential weights and the constants of the interpolation estimate.
//!
//! Upper bounds for fiber sums `sup_u Σ_{x ∈ G_u} exp(-a ℓ(x)^β)` combine
//! exact level counts for short lengths with a strong subexponential growth
//! bound `|B_u(k)| <= C exp(α₀ k^{β₀})` beyond them. The far tail is majorized
//! by an integral and closed with an incomplete-gamma estimate, so the
//! returned value is a rigorous upper bound whenever the growth bound holds.

use serde::Serialize;

use crate::error::{Error, Result};

/// Exact per-length counts `max_u |W_u(k)|` for `k = 0..=N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelProfile {
    levels: Vec<u64>,
}

impl LevelProfile {
    pub fn from_levels(levels: Vec<u64>) -> Self {
        LevelProfile { levels }
    }

    /// Units only: one element of length 0.
    pub fn units() -> Self {
        LevelProfile { levels: vec![1] }
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    /// Largest length covered exactly.
    pub fn truncation(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    /// Shortened to lengths `0..=n`.
    pub fn truncate(&self, n: usize) -> LevelProfile {
        LevelProfile {
            levels: self.levels[..=n.min(self.truncation())].to_vec(),
        }
    }
}

/// Growth hypothesis `|B_u(k)| <= C exp(α₀ k^{β₀})` for all units `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubexpBound {
    pub c: f64,
    pub alpha0: f64,
    pub beta0: f64,
}

impl SubexpBound {
    pub fn new(c: f64, alpha0: f64, beta0: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && alpha0 > 0.0 && beta0 > 0.0 && beta0 < 1.0) {
            return Err(Error::invalid("growth bound needs C > 0, α₀ > 0, 0 < β₀ < 1"));
        }
        Ok(SubexpBound { c, alpha0, beta0 })
    }

    /// Smallest `C` that covers the cumulative counts of `profile`, for the
    /// given exponents.
    pub fn covering(profile: &LevelProfile, alpha0: f64, beta0: f64) -> Result<Self> {
        let mut ball = 0u64;
        let mut c: f64 = 1.0;
        for (k, &w) in profile.levels().iter().enumerate() {
            ball += w;
            c = c.max(ball as f64 / (alpha0 * (k as f64).powf(beta0)).exp());
        }
        SubexpBound::new(c * (1.0 + 1e-12), alpha0, beta0)
    }

    pub fn bound(&self, k: u64) -> f64 {
        self.c * (self.alpha0 * (k as f64).powf(self.beta0)).exp()
    }
}

/// Weight exponents `(α, β)` together with the ambient growth bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightParams {
    pub alpha: f64,
    pub beta: f64,
    pub cert: SubexpBound,
}

impl WeightParams {
    pub fn new(alpha: f64, beta: f64, cert: SubexpBound) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("weights need α > 0 and 0 < β < 1"));
        }
        Ok(WeightParams { alpha, beta, cert })
    }

    /// Membership in `J(α₀, β₀)`: `α >= α₀`, `β >= β₀` and `α(2 - 2^β) > α₀`.
    pub fn in_j(&self) -> bool {
        self.alpha >= self.cert.alpha0
            && self.beta >= self.cert.beta0
            && self.alpha * (2.0 - self.beta.exp2()) > self.cert.alpha0
    }

    fn require_j(&self) -> Result<()> {
        if self.in_j() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "(α, β) = ({}, {}) is outside J({}, {})",
                self.alpha, self.beta, self.cert.alpha0, self.cert.beta0
            )))
        }
    }

    fn len_pow(&self, length: u64) -> f64 {
        (length as f64).powf(self.beta)
    }

    /// `ω(x) = exp(α ℓ(x)^β)`.
    pub fn omega(&self, length: u64) -> f64 {
        (self.alpha * self.len_pow(length)).exp()
    }

    /// `u(x) = exp(-α (2 - 2^β) ℓ(x)^β)`.
    pub fn aux_u(&self, length: u64) -> f64 {
        (-self.alpha * (2.0 - self.beta.exp2()) * self.len_pow(length)).exp()
    }

    /// `σ = ω u`.
    pub fn sigma(&self, length: u64) -> f64 {
        (self.alpha * (self.beta.exp2() - 1.0) * self.len_pow(length)).exp()
    }
}

/// `θ`, the exponents `q` and `s`, and `C_{α,β}` for the interpolation
/// estimate at exponent `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterpolationParams {
    pub theta: f64,
    pub p: f64,
    /// Conjugate of `p`; infinite when `p = 1`.
    pub q: f64,
    /// `(1 - θ)/q + θ/p + 1/s = 1`.
    pub s: f64,
    pub xi_norm_s: f64,
    pub xi_norm_q: f64,
    /// `2 max(‖ξ_θ‖_s, ‖ξ_θ‖_q)`.
    pub c_interp: f64,
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("exponent p = {p} must lie in [1, ∞)")));
    }
    Ok(())
}

/// Open interval of admissible `θ`: `2 + θ > 2^β + 1` and
/// `α(θ - 1 + 2 - 2^β) > α₀`.
pub fn theta_interval(params: &WeightParams) -> (f64, f64) {
    let b = params.beta.exp2();
    let lo = (b - 1.0)
        .max(params.cert.alpha0 / params.alpha - 1.0 + b)
        .max(0.0);
    (lo, 1.0)
}

/// Picks the midpoint of [`theta_interval`] and evaluates the resulting
/// constant with certified fiber sums over `profile`.
pub fn choose_theta(params: &WeightParams, p: f64, profile: &LevelProfile) -> Result<InterpolationParams> {
    check_p(p)?;
    params.require_j()?;
    let (lo, hi) = theta_interval(params);
    if lo >= hi {
        return Err(Error::invalid("no admissible θ for these weights"));
    }
    let theta = 0.5 * (lo + hi);
    let q = conjugate(p);
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let inv_s = 1.0 - (1.0 - theta) * inv_q - theta / p;
    let s = 1.0 / inv_s;
    let xi_norm_s = xi_theta_norm(params, theta, s, profile)?;
    let xi_norm_q = xi_theta_norm(params, theta, q, profile)?;
    Ok(InterpolationParams {
        theta,
        p,
        q,
        s,
        xi_norm_s,
        xi_norm_q,
        c_interp: 2.0 * xi_norm_s.max(xi_norm_q),
    })
}

const TAIL_EXPONENT: f64 = 60.0;
const MAX_EXPLICIT_TERMS: u64 = 50_000_000;

/// Upper bound on `sup_u Σ_{x ∈ G_u} exp(-a ℓ(x)^β)`.
///
/// Lengths up to the profile's truncation use the exact counts. Beyond it,
/// level `k` has at most `C exp(α₀ k^{β₀})` elements; those terms are summed
/// explicitly up to a cutoff `K`, and the rest is bounded by
/// `C ∫_K^∞ exp(-δ t^β) dt` with `δ = a - α₀`.
pub fn certified_fiber_sum(a: f64, beta: f64, profile: &LevelProfile, cert: &SubexpBound) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) || beta < cert.beta0 {
        return Err(Error::invalid("fiber sums need β₀ <= β < 1"));
    }
    let delta = a - cert.alpha0;
    if !(delta > 0.0) {
        return Err(Error::invalid(format!(
            "decay rate {a} does not exceed the growth rate {}; the fiber sum may diverge",
            cert.alpha0
        )));
    }
    let term = |k: u64| (-a * (k as f64).powf(beta)).exp();
    let mut sum: f64 = profile
        .levels()
        .iter()
        .enumerate()
        .map(|(k, &w)| w as f64 * term(k as u64))
        .sum();

    // k^{β₀} <= k^β for k >= 1, so level k contributes at most C e^{-δ k^β}.
    let shape = 1.0 / beta;
    let x_min = TAIL_EXPONENT.max(2.0 * (shape - 1.0));
    let cutoff = ((x_min / delta).powf(shape)).ceil();
    let first = profile.truncation() as u64 + 1;
    if !(cutoff.is_finite()) || cutoff - first as f64 > MAX_EXPLICIT_TERMS as f64 {
        return Err(Error::invalid("fiber-sum tail decays too slowly to certify"));
    }
    let cutoff = (cutoff as u64).max(first);
    for k in first..=cutoff {
        sum += cert.c * (cert.alpha0 * (k as f64).powf(cert.beta0) - a * (k as f64).powf(beta)).exp();
    }
    // Σ_{k > K} e^{-δ k^β} <= ∫_K^∞ e^{-δ t^β} dt = (1/β) δ^{-1/β} Γ(1/β, δ K^β),
    // and Γ(s, x) <= x^{s-1} e^{-x} / (1 - (s-1)/x) for x > s - 1.
    let x = delta * (cutoff as f64).powf(beta);
    let gamma = x.powf(shape - 1.0) * (-x).exp() / (1.0 - (shape - 1.0) / x);
    sum += cert.c * shape * delta.powf(-shape) * gamma;
    Ok(sum * (1.0 + 1e-12))
}

/// Certified upper bound on `‖ξ_θ‖_s`, where
/// `ξ_θ = ω^{1-θ} u = exp(-α(θ + 1 - 2^β) ℓ^β)`.
pub fn xi_theta_norm(params: &WeightParams, theta: f64, s: f64, profile: &LevelProfile) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(Error::invalid("norm exponent must be at least 1"));
    }
    if s.is_infinite() {
        // ξ_θ is nonincreasing in length and equals 1 on units.
        return Ok(1.0);
    }
    let c = params.alpha * (theta + 1.0 - params.beta.exp2());
    let sum = certified_fiber_sum(s * c, params.beta, profile, &params.cert)?;
    Ok(sum.powf(1.0 / s) * (1.0 + 1e-12))
}

/// `K_{α,β}` with `‖f‖_I <= K ‖f‖_{α,β}`: by Hölder,
/// `K = sup_u (Σ_{x ∈ G_u} ω(x)^{-p'})^{1/p'}`, which is 1 for `p = 1`.
pub fn holder_constant(params: &WeightParams, p: f64, profile: &LevelProfile) -> Result<f64> {
    check_p(p)?;
    if p == 1.0 {
        return Ok(1.0);
    }
    let q = conjugate(p);
    let sum = certified_fiber_sum(q * params.alpha, params.beta, profile, &params.cert)?;
    Ok(sum.powf(1.0 / q) * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert() -> SubexpBound {
        SubexpBound::new(3.0, 1.0, 0.5).unwrap()
    }

    #[test]
    fn weight_examples() {
        let w = WeightParams::new(1.0, 0.5, cert()).unwrap();
        assert_eq!((w.omega(0), w.aux_u(0), w.sigma(0)), (1.0, 1.0, 1.0));
        assert!((w.omega(4) - 2f64.exp()).abs() < 1e-15 * 2f64.exp());
        for l in 0..50 {
            let prod = w.omega(l) * w.aux_u(l);
            assert!((w.sigma(l) - prod).abs() <= 1e-14 * prod);
        }
        assert!(WeightParams::new(1.0, 1.0, cert()).is_err());
        assert!(SubexpBound::new(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn j_membership() {
        assert!(WeightParams::new(4.0, 0.5, cert()).unwrap().in_j());
        // 2 - √2 ≈ 0.586, so α = 1.5 gives 0.879 < 1.
        assert!(!WeightParams::new(1.5, 0.5, cert()).unwrap().in_j());
        assert!(!WeightParams::new(4.0, 0.4, cert()).unwrap().in_j());
        assert!(!WeightParams::new(0.9, 0.9, cert()).unwrap().in_j());
    }

    #[test]
    fn theta_examples() {
        let w = WeightParams::new(4.0, 0.5, cert()).unwrap();
        let (lo, hi) = theta_interval(&w);
        assert!((lo - (0.25 - 1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(hi, 1.0);
        let ip = choose_theta(&w, 2.0, &LevelProfile::units()).unwrap();
        assert!((ip.theta - 0.832_106_781_186_547_5).abs() < 1e-12);
        assert_eq!(ip.q, 2.0);
        assert!((ip.s - 2.0).abs() < 1e-12);

        // α(2 - 2^β) just above α₀ pushes θ toward 1.
        let alpha = 1.0 / (2.0 - 2f64.sqrt()) * 1.001;
        let barely = WeightParams::new(alpha, 0.5, cert()).unwrap();
        assert!(choose_theta(&barely, 2.0, &LevelProfile::units()).unwrap().theta > 0.999);

        let ip = choose_theta(&w, 1.0, &LevelProfile::units()).unwrap();
        assert!(ip.q.is_infinite());
        assert!((ip.s - 1.0 / (1.0 - ip.theta)).abs() < 1e-12);
        assert_eq!(ip.xi_norm_q, 1.0);

        for p in [1.0, 1.25, 1.5, 2.0, 3.0, 4.0] {
            let ip = choose_theta(&w, p, &LevelProfile::units()).unwrap();
            let inv_q = if ip.q.is_infinite() { 0.0 } else { 1.0 / ip.q };
            let id = (1.0 - ip.theta) * inv_q + ip.theta / p + 1.0 / ip.s;
            assert!((id - 1.0).abs() < 1e-12);
            assert!(ip.c_interp >= 2.0);
        }
        let outside = WeightParams::new(1.5, 0.5, cert()).unwrap();
        assert!(choose_theta(&outside, 2.0, &LevelProfile::units()).is_err());
    }

    /// Sums the certified majorant directly far past the cutoff.
    fn brute_majorant(a: f64, beta: f64, levels: &[u64], cert: &SubexpBound, n: u64) -> f64 {
        let mut s = 0.0;
        for k in 0..n {
            s += if (k as usize) < levels.len() {
                levels[k as usize] as f64 * (-a * (k as f64).powf(beta)).exp()
            } else {
                cert.c * (cert.alpha0 * (k as f64).powf(cert.beta0) - a * (k as f64).powf(beta)).exp()
            };
        }
        s
    }

    #[test]
    fn certified_sum_dominates_direct_summation() {
        let cert = cert();
        let levels = [1, 3, 5, 7, 10];
        let p = LevelProfile::from_levels(levels.to_vec());
        for (a, beta) in [(2.0, 0.5), (1.5, 0.6), (4.0, 0.9), (1.2, 0.5)] {
            let bound = certified_fiber_sum(a, beta, &p, &cert).unwrap();
            let direct = brute_majorant(a, beta, &levels, &cert, 2_000_000);
            assert!(bound >= direct, "a = {a}, β = {beta}: {bound} < {direct}");
            assert!(bound <= direct * (1.0 + 1e-6) + 1e-12, "too loose: {bound} vs {direct}");
        }
        assert!(certified_fiber_sum(1.0, 0.5, &p, &cert).is_err());
        assert!(certified_fiber_sum(2.0, 0.4, &p, &cert).is_err());
    }

    #[test]
    fn xi_norms() {
        let w = WeightParams::new(4.0, 0.5, cert()).unwrap();
        let units = LevelProfile::units();
        assert!(xi_theta_norm(&w, 0.832, 2.0, &units).unwrap() >= 1.0);
        assert_eq!(xi_theta_norm(&w, 0.832, f64::INFINITY, &units).unwrap(), 1.0);
        // Exact counts below the growth bound tighten the estimate.
        let levels = vec![1, 3, 5, 8, 12, 17, 23];
        let cover = SubexpBound::covering(&LevelProfile::from_levels(levels.clone()), 1.0, 0.5).unwrap();
        let w = WeightParams::new(4.0, 0.5, cover).unwrap();
        let full = LevelProfile::from_levels(levels);
        let mut prev = f64::INFINITY;
        for n in 0..=full.truncation() {
            let b = xi_theta_norm(&w, 0.832, 2.0, &full.truncate(n)).unwrap();
            assert!(b <= prev * (1.0 + 1e-12));
            prev = b;
        }
    }

    #[test]
    fn holder_constants() {
        let w = WeightParams::new(4.0, 0.5, cert()).unwrap();
        assert_eq!(holder_constant(&w, 1.0, &LevelProfile::units()).unwrap(), 1.0);
        let k2 = holder_constant(&w, 2.0, &LevelProfile::units()).unwrap();
        assert!(k2 >= 1.0 && k2.is_finite());
        assert!(holder_constant(&w, 0.5, &LevelProfile::units()).is_err());
    }

    #[test]
    fn covering_bound_covers_profile() {
        let p = LevelProfile::from_levels(vec![1, 3, 5, 7, 10, 15]);
        let c = SubexpBound::covering(&p, 1.0, 0.5).unwrap();
        let mut ball = 0;
        for (k, &w) in p.levels().iter().enumerate() {
            ball += w;
            assert!(ball as f64 <= c.bound(k as u64));
        }
    }
}
