//! Physical parameters of the third-order model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relaxation time `tau`, diffusivity `delta` and the nonlinearity ratio `B/A`.
///
/// The sound speed is normalised to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    tau: f64,
    delta: f64,
    b_over_a: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    tau: f64,
    delta: f64,
    #[serde(default)]
    b_over_a: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        Ok(Params::new(raw.tau, raw.delta)?.with_b_over_a(raw.b_over_a))
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams { tau: p.tau, delta: p.delta, b_over_a: p.b_over_a }
    }
}

/// Qualitative behaviour selected by the sign of `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Dissipative,
    Conservative,
    Chaotic,
}

impl Params {
    /// Accepts any finite `delta`; `tau` must be positive.
    pub fn new(tau: f64, delta: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParams(format!("tau must be positive and finite, got {tau}")));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParams(format!("delta must be finite, got {delta}")));
        }
        Ok(Params { tau, delta, b_over_a: 0.0 })
    }

    /// Parameters inside the dissipative range `0 < tau < delta`.
    pub fn dissipative(tau: f64, delta: f64) -> Result<Self> {
        let p = Self::new(tau, delta)?;
        p.ensure_dissipative()?;
        Ok(p)
    }

    pub fn with_b_over_a(mut self, b_over_a: f64) -> Self {
        self.b_over_a = b_over_a;
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn b_over_a(&self) -> f64 {
        self.b_over_a
    }

    pub fn regime(&self) -> Regime {
        if self.delta > 0.0 {
            Regime::Dissipative
        } else if self.delta == 0.0 {
            Regime::Conservative
        } else {
            Regime::Chaotic
        }
    }

    pub fn ensure_dissipative(&self) -> Result<()> {
        if self.delta > 0.0 && self.tau < self.delta {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "requires 0 < tau < delta, got tau = {}, delta = {}",
                self.tau, self.delta
            )))
        }
    }

    /// Same diffusivity, different relaxation time.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Ok(Self::new(tau, self.delta)?.with_b_over_a(self.b_over_a))
    }
}
