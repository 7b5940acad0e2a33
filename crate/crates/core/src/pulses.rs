//! Gaussian pulse envelopes and STIRAP mixing angles.
//!
//! Times are in units of the STIRAP pulse width `T`; Rabi frequencies are
//! in units of `1/T`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Envelopes below this value are treated as switched off. The closed-form
/// mixing angle never needs it; kept so callers comparing envelope ratios
/// have a common cutoff.
pub const ENVELOPE_FLOOR: f64 = 1e-300;

/// `√(π/2)`, the area of a unit-peak, unit-width Gaussian divided by two.
pub fn sqrt_half_pi() -> f64 {
    FRAC_PI_2.sqrt()
}

/// One Gaussian pulse `peak · exp(−(t − center)² / (2 width²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub peak: f64,
    pub center: f64,
    pub width: f64,
}

impl PulseParams {
    pub fn new(peak: f64, center: f64, width: f64) -> Result<Self> {
        if !(peak >= 0.0) || !peak.is_finite() {
            return Err(Error::param("peak", format!("must be finite and >= 0, got {peak}")));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::param("width", format!("must be finite and > 0, got {width}")));
        }
        if !center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(Self { peak, center, width })
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.width;
        self.peak * (-0.5 * x * x).exp()
    }

    /// Pulse area `Θ = ∫ Ω(t)/2 dt = peak · width · √(π/2)`.
    pub fn area(&self) -> f64 {
        self.peak * self.width * sqrt_half_pi()
    }
}

/// Peak Rabi frequency of a Gaussian of the given width whose area is
/// `(2p + 1)π/2`, i.e. a complete resonant `|0⟩ → |R⟩` transfer.
pub fn pi_pulse_peak(width: f64, p: u32) -> Result<f64> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::param("width", format!("must be finite and > 0, got {width}")));
    }
    Ok((2 * p + 1) as f64 * sqrt_half_pi() / width)
}

/// Counter-intuitive STIRAP pulse pair of unit width: the Stokes pulse
/// `Ω_s` peaks at `−τ/2`, the pump pulse `Ω_g` at `+τ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StirapPair {
    pub omega: f64,
    pub tau: f64,
}

impl StirapPair {
    pub fn new(omega: f64, tau: f64) -> Result<Self> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::param("omega", format!("must be finite and >= 0, got {omega}")));
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::param("tau", format!("must be finite and >= 0, got {tau}")));
        }
        Ok(Self { omega, tau })
    }

    pub fn pump(&self) -> PulseParams {
        PulseParams {
            peak: self.omega,
            center: 0.5 * self.tau,
            width: 1.0,
        }
    }

    pub fn stokes(&self) -> PulseParams {
        PulseParams {
            peak: self.omega,
            center: -0.5 * self.tau,
            width: 1.0,
        }
    }

    /// `Ω_g(t)`
    pub fn omega_g(&self, t: f64) -> f64 {
        self.pump().amplitude(t)
    }

    /// `Ω_s(t)`
    pub fn omega_s(&self, t: f64) -> f64 {
        self.stokes().amplitude(t)
    }

    /// Mixing angle `θ` with `tan θ = Ω_g/Ω_s`, evaluated as
    /// `arctan(exp(t·τ))` so it stays defined where both envelopes vanish.
    pub fn theta(&self, t: f64) -> f64 {
        (t * self.tau).exp().atan()
    }

    /// `dθ/dt = (τ/2) / cosh(t·τ)`
    pub fn theta_dot(&self, t: f64) -> f64 {
        0.5 * self.tau / (t * self.tau).cosh()
    }

    /// RMS Rabi frequency `Ω₀ = √(Ω_g² + Ω_s²)`, evaluated in log space to
    /// avoid `cosh` overflow far from the pulses.
    pub fn rms_rabi(&self, t: f64) -> f64 {
        if self.omega == 0.0 {
            return 0.0;
        }
        let x = (t * self.tau).abs();
        let ln_two_cosh = x + (-2.0 * x).exp().ln_1p();
        self.omega * (-0.5 * (t * t + 0.25 * self.tau * self.tau) + 0.5 * ln_two_cosh).exp()
    }
}

/// Mixing angle `φ` with `tan φ = Ω₀/δ`, in `[0, π)`.
///
/// `φ = π/2` when `δ = 0`, including the degenerate `Ω₀ = δ = 0` case, which
/// keeps `f(φ)` finite at `1/√2`.
pub fn mixing_angle_phi(omega0: f64, delta: f64) -> f64 {
    if omega0 == 0.0 && delta == 0.0 {
        return FRAC_PI_2;
    }
    omega0.atan2(delta).clamp(0.0, PI)
}
