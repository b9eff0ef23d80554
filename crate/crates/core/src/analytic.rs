//! Closed-form laws of the ladder ratios and the multiplicative chain
//! oracle.
//!
//! For skewness `beta` in `(0, 1]` the shrink ratio `W` and growth ratio
//! `V` of the coupled pair have power laws
//!
//! ```text
//! P(W < w) = w^((1-beta)/(2*beta))   for w in (0,1),
//! P(V > v) = v^(-(1+beta)/(2*beta)) for v >= 1,
//! ```
//!
//! which follow from counting excursions taller than the remaining gap:
//! the excursion intensity `(1-beta)/(2(y - beta*u))` integrated along the
//! shrinking gap evaluates to `((1-beta)/(2*beta)) * ln(y/a)`, and
//! exponentiating the Poisson void probability gives `(a/y)` to that
//! power. Consequently `-ln W` and `ln V` are exponential with means
//! `2*beta/(1-beta)` and `2*beta/(1+beta)`, `E[W] E[V] = 1` (the gap at
//! successive lower-walk zeros is a martingale), and the log-chain drifts
//! down at rate `4*beta^2/(1-beta^2)`.
//!
//! [`LawSpec::chain_simulate`] runs the gap chain directly from these
//! laws, independent of any path simulation, so path-level ladder
//! statistics can be cross-validated against a second route.

use crate::error::{Error, Result};
use crate::lattice::UniformStream;

/// Analytic law descriptor for the ladder ratios at a fixed skewness.
///
/// Negative skewness is mapped to its absolute value at construction: by
/// the sign symmetry of the coupled dynamics the reflected pair has the
/// same ratio laws. Quantities that diverge at `beta = 1` are represented
/// as `None` rather than infinities.
#[derive(Debug, Clone, Copy)]
pub struct LawSpec {
    beta: f64,
    w_exponent: f64,
    v_exponent: f64,
    w_mean: f64,
    v_mean: Option<f64>,
    neg_log_w_mean: Option<f64>,
    log_v_mean: f64,
    chain_drift: Option<f64>,
}

/// The mean block of a [`LawSpec`], as one return value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub w_mean: f64,
    pub v_mean: Option<f64>,
    pub neg_log_w_mean: Option<f64>,
    pub log_v_mean: f64,
    pub chain_drift: Option<f64>,
}

impl LawSpec {
    /// Build the law descriptor for skewness `beta`, `0 < |beta| <= 1`.
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta == 0.0 || beta.abs() > 1.0 {
            return Err(Error::invalid(format!(
                "law requires 0 < |beta| <= 1, got {beta}"
            )));
        }
        let b = beta.abs();
        let at_one = b == 1.0;
        Ok(LawSpec {
            beta: b,
            w_exponent: (1.0 - b) / (2.0 * b),
            v_exponent: (1.0 + b) / (2.0 * b),
            w_mean: (1.0 - b) / (1.0 + b),
            v_mean: (!at_one).then(|| (1.0 + b) / (1.0 - b)),
            neg_log_w_mean: (!at_one).then(|| 2.0 * b / (1.0 - b)),
            log_v_mean: 2.0 * b / (1.0 + b),
            chain_drift: (!at_one).then(|| 4.0 * b * b / (1.0 - b * b)),
        })
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn w_exponent(&self) -> f64 {
        self.w_exponent
    }

    #[inline]
    pub fn v_exponent(&self) -> f64 {
        self.v_exponent
    }

    pub fn moments(&self) -> Moments {
        Moments {
            w_mean: self.w_mean,
            v_mean: self.v_mean,
            neg_log_w_mean: self.neg_log_w_mean,
            log_v_mean: self.log_v_mean,
            chain_drift: self.chain_drift,
        }
    }

    /// CDF of the shrink ratio: `0` below `0`, `w^w_exponent` on `(0,1)`,
    /// `1` from `1` on.
    pub fn w_cdf(&self, w: f64) -> f64 {
        if w <= 0.0 {
            0.0
        } else if w >= 1.0 {
            1.0
        } else {
            w.powf(self.w_exponent)
        }
    }

    /// Survival function of the growth ratio: `1` up to `1`, then
    /// `v^(-v_exponent)`.
    pub fn v_survival(&self, v: f64) -> f64 {
        if v <= 1.0 {
            1.0
        } else {
            v.powf(-self.v_exponent)
        }
    }

    /// Inverse-transform sample of `W`: `U^(2 beta / (1 - beta))`.
    ///
    /// Errors at `beta = 1`, where the law is degenerate (all the CDF mass
    /// sits at zero and the exponent diverges).
    pub fn sample_w(&self, stream: &mut UniformStream) -> Result<f64> {
        if self.beta == 1.0 {
            return Err(Error::DegenerateLaw(
                "W is degenerate at beta = 1; no nondegenerate sampler exists".into(),
            ));
        }
        let u = stream.next_open_uniform();
        Ok(u.powf(2.0 * self.beta / (1.0 - self.beta)))
    }

    /// Inverse-transform sample of `V`: `U^(-2 beta / (1 + beta))`.
    pub fn sample_v(&self, stream: &mut UniformStream) -> f64 {
        let u = stream.next_open_uniform();
        u.powf(-2.0 * self.beta / (1.0 + self.beta))
    }

    /// Simulate the multiplicative gap chain `M_k = M_{k-1} W_k V_k`
    /// directly from the closed-form laws.
    ///
    /// Stops at `k_max` or as soon as `M_k <= epsilon`. Requires
    /// `0 < epsilon < y` and `k_max >= 1`.
    pub fn chain_simulate(
        &self,
        y: f64,
        stream: &mut UniformStream,
        k_max: usize,
        epsilon: f64,
    ) -> Result<ChainResult> {
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::invalid(format!("chain requires y > 0, got {y}")));
        }
        if !(epsilon > 0.0 && epsilon < y) {
            return Err(Error::invalid(format!(
                "chain requires 0 < epsilon < y, got epsilon={epsilon}, y={y}"
            )));
        }
        if k_max == 0 {
            return Err(Error::invalid("chain requires k_max >= 1"));
        }
        let mut m_values = Vec::with_capacity(k_max.min(4096) + 1);
        m_values.push(y);
        let mut m = y;
        let mut sum_m = 0.0;
        let mut steps_to_epsilon = None;
        for k in 1..=k_max {
            m *= self.sample_w(stream)? * self.sample_v(stream);
            m_values.push(m);
            sum_m += m;
            if m <= epsilon {
                steps_to_epsilon = Some(k);
                break;
            }
        }
        let final_k = m_values.len() - 1;
        let decay_estimate = (m / y).ln() / final_k as f64;
        Ok(ChainResult {
            m_values,
            sum_m,
            steps_to_epsilon,
            decay_estimate,
            final_k,
        })
    }
}

/// One realization of the multiplicative gap chain.
#[derive(Debug, Clone)]
pub struct ChainResult {
    /// `M_0 = y` through the last generated `M_k`.
    pub m_values: Vec<f64>,
    /// Sum of `M_k` over `k >= 1` among generated terms.
    pub sum_m: f64,
    /// First `k` with `M_k <= epsilon`, if reached before `k_max`.
    pub steps_to_epsilon: Option<usize>,
    /// `ln(M_K / y) / K` at the final index `K`.
    pub decay_estimate: f64,
    /// Final index `K`.
    pub final_k: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::derive_stream;

    #[test]
    fn construction_domain() {
        assert!(LawSpec::new(0.0).is_err());
        assert!(LawSpec::new(1.5).is_err());
        assert!(LawSpec::new(f64::NAN).is_err());
        assert!(LawSpec::new(1.0).is_ok());
        // Negative skewness maps to its reflection.
        let l = LawSpec::new(-0.5).unwrap();
        assert_eq!(l.beta(), 0.5);
    }

    #[test]
    fn w_cdf_point_values() {
        // beta = 1/3 gives exponent 1: the uniform law.
        let l = LawSpec::new(1.0 / 3.0).unwrap();
        assert!((l.w_cdf(0.25) - 0.25).abs() < 1e-12);
        let l = LawSpec::new(0.5).unwrap();
        assert!((l.w_cdf(0.25) - 0.5).abs() < 1e-12);
        assert_eq!(l.w_cdf(1.0), 1.0);
        assert_eq!(l.w_cdf(-0.1), 0.0);
        assert_eq!(l.w_cdf(0.0), 0.0);
        assert_eq!(l.w_cdf(2.0), 1.0);
    }

    #[test]
    fn v_survival_point_values() {
        let l = LawSpec::new(1.0 / 3.0).unwrap();
        assert!((l.v_survival(4.0) - 1.0 / 16.0).abs() < 1e-12);
        let l = LawSpec::new(0.5).unwrap();
        assert!((l.v_survival(4.0) - 0.125).abs() < 1e-12);
        assert_eq!(l.v_survival(1.0), 1.0);
        assert_eq!(l.v_survival(0.5), 1.0);
    }

    #[test]
    fn moments_frozen_values() {
        let m = LawSpec::new(1.0 / 3.0).unwrap().moments();
        assert!((m.w_mean - 0.5).abs() < 1e-12);
        assert!((m.v_mean.unwrap() - 2.0).abs() < 1e-12);
        assert!((m.neg_log_w_mean.unwrap() - 1.0).abs() < 1e-12);
        assert!((m.log_v_mean - 0.5).abs() < 1e-12);
        assert!((m.chain_drift.unwrap() - 0.5).abs() < 1e-12);

        let m = LawSpec::new(0.5).unwrap().moments();
        assert!((m.w_mean - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.v_mean.unwrap() - 3.0).abs() < 1e-12);
        assert!((m.neg_log_w_mean.unwrap() - 2.0).abs() < 1e-12);
        assert!((m.log_v_mean - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.chain_drift.unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn law_identities_across_beta() {
        for k in 1..100 {
            let beta = k as f64 / 100.0;
            let m = LawSpec::new(beta).unwrap().moments();
            assert!((m.w_mean * m.v_mean.unwrap() - 1.0).abs() < 1e-12);
            let drift = m.neg_log_w_mean.unwrap() - m.log_v_mean;
            assert!((m.chain_drift.unwrap() - drift).abs() < 1e-12);
            assert!(m.w_mean > 0.0 && m.log_v_mean > 0.0);
        }
    }

    #[test]
    fn beta_one_flags() {
        let l = LawSpec::new(1.0).unwrap();
        let m = l.moments();
        assert_eq!(m.w_mean, 0.0);
        assert!(m.v_mean.is_none());
        assert!(m.neg_log_w_mean.is_none());
        assert!(m.chain_drift.is_none());
        assert!((m.log_v_mean - 1.0).abs() < 1e-12);
        // W CDF is identically 1 inside (0,1) and the sampler refuses.
        assert_eq!(l.w_cdf(0.5), 1.0);
        let mut s = derive_stream(1, 0);
        assert!(l.sample_w(&mut s).is_err());
        // V is still samplable (Pareto with unit exponent).
        let v = l.sample_v(&mut s);
        assert!(v >= 1.0);
    }

    #[test]
    fn sampler_matches_inversion_algebra() {
        // At beta = 1/3 the W sampler is the identity on uniforms.
        let l = LawSpec::new(1.0 / 3.0).unwrap();
        let u = 0.7_f64;
        let w = u.powf(2.0 * l.beta() / (1.0 - l.beta()));
        assert!((w - 0.7).abs() < 1e-12);
        // V at u = 0.25 is 2, and the survival at 2 recovers u.
        let v = 0.25_f64.powf(-2.0 * l.beta() / (1.0 + l.beta()));
        assert!((v - 2.0).abs() < 1e-12);
        assert!((l.v_survival(v) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn chain_rejects_bad_arguments() {
        let l = LawSpec::new(0.5).unwrap();
        let mut s = derive_stream(5, 0);
        assert!(l.chain_simulate(0.0, &mut s, 10, 1e-6).is_err());
        assert!(l.chain_simulate(1.0, &mut s, 10, 1.5).is_err());
        assert!(l.chain_simulate(1.0, &mut s, 0, 1e-6).is_err());
    }

    #[test]
    fn chain_starts_at_y_and_is_positive() {
        let l = LawSpec::new(0.5).unwrap();
        let mut s = derive_stream(5, 1);
        let c = l.chain_simulate(2.0, &mut s, 50, 1e-12).unwrap();
        assert_eq!(c.m_values[0], 2.0);
        assert!(c.m_values.iter().all(|&m| m > 0.0));
        assert_eq!(c.final_k + 1, c.m_values.len());
        let manual: f64 = c.m_values[1..].iter().sum();
        assert!((c.sum_m - manual).abs() < 1e-12);
    }

    #[test]
    fn chain_reaches_epsilon_for_all_beta() {
        // Negative drift pushes every chain below epsilon in finite time.
        for k in [1usize, 10, 25, 50, 75, 90, 99] {
            let l = LawSpec::new(k as f64 / 100.0).unwrap();
            let mut s = derive_stream(77, k as u64);
            let c = l.chain_simulate(1.0, &mut s, 2_000_000, 1e-6).unwrap();
            assert!(
                c.steps_to_epsilon.is_some(),
                "beta={} did not reach epsilon",
                l.beta()
            );
        }
    }
}
