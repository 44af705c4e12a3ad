//! Acceptance test, order selection and step-size proposals.
//!
//! An estimate passes when it is strictly below `tol`. Among passing
//! orders the one proposing the largest next step wins, ties going to
//! order 2. When nothing passes the step is retried with the largest of
//! the (more conservative) reject proposals.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub tol: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub max_consecutive_rejects: u32,
    pub safety_accept: f64,
    pub safety_reject: f64,
}

impl ControllerConfig {
    /// Defaults scaled to the integration interval `[t0, t_end]`.
    pub fn for_span(tol: f64, t0: f64, t_end: f64) -> Self {
        let span = (t_end - t0).abs();
        Self {
            tol,
            dt_min: 1e-14 * span,
            dt_max: 0.5 * span,
            ratio_min: 0.1,
            ratio_max: 5.0,
            max_consecutive_rejects: 20,
            safety_accept: 0.9,
            safety_reject: 0.7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max && self.dt_max.is_finite()) {
            return bad(format!(
                "need 0 < dt_min < dt_max, got dt_min={} dt_max={}",
                self.dt_min, self.dt_max
            ));
        }
        if !(self.ratio_min > 0.0 && self.ratio_min < 1.0 && self.ratio_max > 1.0 && self.ratio_max.is_finite()) {
            return bad(format!(
                "need 0 < ratio_min < 1 < ratio_max, got {} and {}",
                self.ratio_min, self.ratio_max
            ));
        }
        for (name, s) in [
            ("safety_accept", self.safety_accept),
            ("safety_reject", self.safety_reject),
        ] {
            if !(s > 0.0 && s <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {s}"));
            }
        }
        Ok(())
    }

    /// Clamp a proposed next step to the ratio and absolute bounds.
    pub fn clamp(&self, dt: f64, proposed: f64) -> f64 {
        proposed
            .clamp(self.ratio_min * dt, self.ratio_max * dt)
            .clamp(self.dt_min, self.dt_max)
    }

    /// [`raw_proposal`] followed by [`ControllerConfig::clamp`].
    pub fn propose_dt(&self, dt: f64, est: f64, order: u8, safety: f64) -> f64 {
        self.clamp(dt, raw_proposal(dt, est, self.tol, order, safety))
    }
}

/// `safety · dt · (tol / est)^(1 / (order + 1))`, unclamped. A zero
/// estimate gives `+inf`.
pub fn raw_proposal(dt: f64, est: f64, tol: f64, order: u8, safety: f64) -> f64 {
    if est <= 0.0 {
        return f64::INFINITY;
    }
    safety * dt * (tol / est).powf(1.0 / (f64::from(order) + 1.0))
}

/// Norms of the embedded estimates for one attempted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateNorms {
    pub est1: f64,
    pub est2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    Accept { order: u8 },
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerDecision {
    pub verdict: Verdict,
    pub next_dt: f64,
}

impl ControllerDecision {
    pub fn is_accept(&self) -> bool {
        matches!(self.verdict, Verdict::Accept { .. })
    }
}

/// Decide the fate of a step of size `dt`. `rejects_so_far` counts the
/// consecutive rejections preceding this attempt.
pub fn decide(est: EstimateNorms, cfg: &ControllerConfig, dt: f64, rejects_so_far: u32) -> Result<ControllerDecision> {
    let candidates: Vec<(u8, f64)> = std::iter::once((1u8, est.est1))
        .chain(est.est2.map(|e| (2u8, e)))
        .collect();

    let passing: Vec<(u8, f64)> = candidates.iter().copied().filter(|&(_, e)| e < cfg.tol).collect();
    if !passing.is_empty() {
        let mut best: Option<(u8, f64)> = None;
        for (order, e) in passing {
            let prop = raw_proposal(dt, e, cfg.tol, order, cfg.safety_accept);
            best = match best {
                Some((o, p)) if p > prop || (p == prop && o > order) => Some((o, p)),
                _ => Some((order, prop)),
            };
        }
        let (order, prop) = best.expect("nonempty");
        return Ok(ControllerDecision {
            verdict: Verdict::Accept { order },
            next_dt: cfg.clamp(dt, prop),
        });
    }

    if rejects_so_far + 1 > cfg.max_consecutive_rejects {
        return Err(Error::RejectStorm(rejects_so_far + 1));
    }
    let retry = candidates
        .iter()
        .map(|&(order, e)| raw_proposal(dt, e, cfg.tol, order, cfg.safety_reject))
        .fold(f64::NEG_INFINITY, f64::max);
    let retry = retry.clamp(cfg.ratio_min * dt, dt);
    if retry < cfg.dt_min {
        return Err(Error::StepUnderflow {
            dt: retry,
            dt_min: cfg.dt_min,
        });
    }
    Ok(ControllerDecision {
        verdict: Verdict::Reject,
        next_dt: retry.min(cfg.dt_max),
    })
}
