//! Analytic eigenstructure of the target Hamiltonian and adiabaticity
//! analysis of the dark-state transfer.
//!
//! With `tan θ = Ω_g/Ω_s`, `Ω₀ = √(Ω_g² + Ω_s²)` and `tan φ = Ω₀/δ`, the
//! target Hamiltonian has a zero-energy dark state
//! `|O⟩ = Σ_n (−1)^{N−n} √C(N,n) cos^{N−n}θ sin^nθ |g^{N−n};s^n;r⁰⟩`
//! and `2N` bright eigenstates with energies
//! `E_{±n} = (Ω₀/2)[cot φ ± √(n + cot²φ)]`, `n = 1..N`.
//!
//! `|Ȯ⟩ = θ̇ ∂_θ|O⟩` has norm `√N θ̇` and overlaps only the `λ_{±1}`
//! eigenstates: `|⟨λ₊₁|Ȯ⟩| = √N θ̇ sin(φ/2)` and `|⟨λ₋₁|Ȯ⟩| = √N θ̇ cos(φ/2)`,
//! with `E₊₁ = (Ω₀/2) cot(φ/2)` and `E₋₁ = −(Ω₀/2) tan(φ/2)`. The
//! adiabaticity sum therefore collapses to `2√N θ̇ / (Ω₀ f(φ))`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::pulses::{mixing_angle_phi, StirapPair};
use crate::{Error, Result};

/// Default dominance factor for the `≫`/`≪` inequalities.
pub const DEFAULT_DOMINANCE: f64 = 10.0;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Zero-energy eigenvalue plus `E_{±n}`, `n = 1..N`, sorted ascending.
pub fn eigenenergies_analytic(n_atoms: usize, omega0: f64, phi: f64) -> Result<Vec<f64>> {
    if n_atoms == 0 {
        return Err(Error::invalid("ensemble must contain at least one atom"));
    }
    if !(omega0 >= 0.0) {
        return Err(Error::param("omega0", "must be >= 0"));
    }
    if !(phi > 0.0 && phi < std::f64::consts::PI) {
        return Err(Error::param(
            "phi",
            format!("cot φ diverges at φ = {phi}; use the large-detuning limit"),
        ));
    }
    let cot = 1.0 / phi.tan();
    let half = 0.5 * omega0;
    let mut e = vec![0.0];
    for n in 1..=n_atoms {
        let root = (n as f64 + cot * cot).sqrt();
        e.push(half * (cot + root));
        e.push(half * (cot - root));
    }
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// The instantaneous dark state `|O(θ)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkState {
    pub n_atoms: usize,
    pub theta: f64,
    /// Amplitudes in canonical Fock order; the `r¹` block is zero.
    pub amplitudes: DVector<f64>,
}

impl DarkState {
    pub fn new(n_atoms: usize, theta: f64) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::invalid("ensemble must contain at least one atom"));
        }
        let n = n_atoms;
        let (s, c) = theta.sin_cos();
        let mut amplitudes = DVector::zeros(2 * n + 1);
        for k in 0..=n {
            let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            amplitudes[k] = sign * binomial(n, k).sqrt() * c.powi((n - k) as i32) * s.powi(k as i32);
        }
        Ok(Self {
            n_atoms,
            theta,
            amplitudes,
        })
    }

    /// `∂_θ |O(θ)⟩`
    pub fn theta_derivative(&self) -> DVector<f64> {
        let n = self.n_atoms;
        let (s, c) = self.theta.sin_cos();
        let mut d = DVector::zeros(2 * n + 1);
        for k in 0..=n {
            let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            let b = binomial(n, k).sqrt();
            let mut v = 0.0;
            if k > 0 {
                v += k as f64 * c.powi((n - k + 1) as i32) * s.powi(k as i32 - 1);
            }
            if k < n {
                v -= (n - k) as f64 * c.powi((n - k - 1) as i32) * s.powi((k + 1) as i32);
            }
            d[k] = sign * b * v;
        }
        d
    }
}

/// `f(φ) = sin(φ/2)cos(φ/2) / (sin³(φ/2) + cos³(φ/2))`
pub fn f_of_phi(phi: f64) -> f64 {
    let (s, c) = (0.5 * phi).sin_cos();
    s * c / (s.powi(3) + c.powi(3))
}

/// The two surviving terms of the adiabaticity sum at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrightCouplings {
    pub overlap_plus: f64,
    pub overlap_minus: f64,
    pub energy_plus: f64,
    pub energy_minus: f64,
}

impl BrightCouplings {
    pub fn sum(&self) -> f64 {
        (self.overlap_plus / self.energy_plus).abs() + (self.overlap_minus / self.energy_minus).abs()
    }
}

pub fn bright_couplings(s: &StirapPair, delta: f64, n_atoms: usize, t: f64) -> Result<BrightCouplings> {
    if n_atoms == 0 {
        return Err(Error::invalid("ensemble must contain at least one atom"));
    }
    let omega0 = s.rms_rabi(t);
    if !(omega0 > 0.0) {
        return Err(Error::invalid(format!(
            "Ω₀({t}) = 0: outside the pulse support, adiabaticity undefined"
        )));
    }
    let phi = mixing_angle_phi(omega0, delta);
    let (sh, ch) = (0.5 * phi).sin_cos();
    let amp = s.theta_dot(t) * (n_atoms as f64).sqrt();
    Ok(BrightCouplings {
        overlap_plus: amp * sh,
        overlap_minus: amp * ch,
        energy_plus: 0.5 * omega0 * ch / sh,
        energy_minus: -0.5 * omega0 * sh / ch,
    })
}

/// Adiabaticity sum `Σ_{m≠0} |⟨m|Ȯ⟩ / (E₀ − E_m)|` from the closed form.
pub fn adiabaticity_lhs(s: &StirapPair, delta: f64, n_atoms: usize, t: f64) -> Result<f64> {
    Ok(bright_couplings(s, delta, n_atoms, t)?.sum())
}

/// Right-hand side of `1 ≪ √(2/N) (Ω/τ) e^{−(t² + τ²/4)/2} cosh^{3/2}(tτ) f(φ)`.
pub fn adiabaticity_rhs(s: &StirapPair, delta: f64, n_atoms: usize, t: f64) -> f64 {
    if s.tau == 0.0 {
        return f64::INFINITY;
    }
    let phi = mixing_angle_phi(s.rms_rabi(t), delta);
    let x = t * s.tau;
    // cosh^{3/2} combined with the Gaussian in log space
    let ln_cosh = x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2;
    let envelope = (-0.5 * (t * t + 0.25 * s.tau * s.tau) + 1.5 * ln_cosh).exp();
    (2.0 / n_atoms as f64).sqrt() * s.omega / s.tau * envelope * f_of_phi(phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Transfer,
    Blocked,
    Indeterminate,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Transfer => "transfer",
            Regime::Blocked => "blocked",
            Regime::Indeterminate => "indeterminate",
        })
    }
}

/// Classification plus the raw ratios it was based on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `Ω²/(√N δ)`; infinite at `δ = 0`.
    pub transfer_detuned: f64,
    /// `Ω/√N`
    pub transfer_resonant: f64,
    /// `δ/(√N Ω²)`; infinite at `Ω = 0`.
    pub blocked: f64,
    pub dominance: f64,
}

/// Applies the transfer (`δ ≪ Ω²/√N`, and `1 ≪ Ω/√N` unless `δ ≫ Ω`) and
/// blocking (`δ ≫ √N Ω²`) conditions with `≫` read as "at least `kappa`
/// times".
pub fn regime_classify(omega: f64, delta: f64, n_atoms: usize, kappa: f64) -> RegimeReport {
    let root_n = (n_atoms.max(1) as f64).sqrt();
    let delta = delta.abs();
    let omega_sq = omega * omega;
    let transfer_detuned = if delta == 0.0 {
        f64::INFINITY
    } else {
        omega_sq / (root_n * delta)
    };
    let transfer_resonant = omega / root_n;
    let blocked = if omega_sq == 0.0 {
        f64::INFINITY
    } else {
        delta / (root_n * omega_sq)
    };

    let transfer = omega_sq / root_n >= kappa * delta && (delta > omega || transfer_resonant >= kappa);
    let is_blocked = delta >= kappa * root_n * omega_sq;
    let regime = if is_blocked {
        Regime::Blocked
    } else if transfer {
        Regime::Transfer
    } else {
        Regime::Indeterminate
    };
    RegimeReport {
        regime,
        transfer_detuned,
        transfer_resonant,
        blocked,
        dominance: kappa,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticityReport {
    /// Largest adiabaticity sum over the transfer window.
    pub lhs_max: f64,
    /// Closed-form margin at `t = 0`: the large-detuning form when `δ ≥ Ω`,
    /// the resonant form otherwise.
    pub margin_transfer: f64,
    /// Exact right-hand side of the adiabaticity condition at `t = 0`.
    pub margin_exact: f64,
    pub regime: RegimeReport,
}

/// `|t| τ` bound of the window over which `lhs_max` is taken: the mixing
/// angle runs from `π/20` to `9π/20` inside it.
pub fn transfer_window(tau: f64) -> f64 {
    let edge = (9.0 * FRAC_PI_2 / 10.0).tan().ln();
    if tau > 0.0 {
        edge / tau
    } else {
        0.0
    }
}

const WINDOW_SAMPLES: usize = 401;

pub fn adiabaticity_margin(s: &StirapPair, delta: f64, n_atoms: usize) -> Result<AdiabaticityReport> {
    adiabaticity_margin_with(s, delta, n_atoms, DEFAULT_DOMINANCE)
}

pub fn adiabaticity_margin_with(s: &StirapPair, delta: f64, n_atoms: usize, kappa: f64) -> Result<AdiabaticityReport> {
    if n_atoms == 0 {
        return Err(Error::invalid("ensemble must contain at least one atom"));
    }
    if !(s.omega > 0.0) {
        return Err(Error::param("omega", "adiabaticity margin needs Ω > 0"));
    }
    if !(s.tau > 0.0) {
        return Err(Error::param("tau", "degenerate pulse pair (τ = 0): no STIRAP sequence"));
    }
    let root_n = (n_atoms as f64).sqrt();
    let delta_abs = delta.abs();
    let margin_transfer = if delta_abs >= s.omega {
        s.omega * s.omega / (root_n * s.tau * delta_abs) * (-0.25 * s.tau * s.tau).exp()
    } else {
        s.omega / (root_n * s.tau) * (-0.125 * s.tau * s.tau).exp()
    };
    let w = transfer_window(s.tau);
    let mut lhs_max: f64 = 0.0;
    for i in 0..WINDOW_SAMPLES {
        let t = -w + 2.0 * w * i as f64 / (WINDOW_SAMPLES - 1) as f64;
        lhs_max = lhs_max.max(adiabaticity_lhs(s, delta, n_atoms, t)?);
    }
    Ok(AdiabaticityReport {
        lhs_max,
        margin_transfer,
        margin_exact: adiabaticity_rhs(s, delta, n_atoms, 0.0),
        regime: regime_classify(s.omega, delta, n_atoms, kappa),
    })
}
