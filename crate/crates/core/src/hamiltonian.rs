//! Control, target and total Hamiltonians (in units of `ħ/T`) and the
//! Lindblad jump operators.
//!
//! The joint space is `{|0⟩, |1⟩, |R⟩} ⊗ FockBasis` with the control index
//! major: joint index = `3`-level index × `(2N + 1)` + Fock index.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::SolverOptions;
use crate::fock::{Channel, FockBasis};
use crate::pulses::{PulseParams, StirapPair};
use crate::{CMatrix, Error, Result, C64};

/// Control-atom level indices.
pub const CONTROL_0: usize = 0;
pub const CONTROL_1: usize = 1;
pub const CONTROL_R: usize = 2;
pub const CONTROL_DIM: usize = 3;

/// Control π pulses: two identical Gaussians of width `t_c` centred at
/// `−tau_c` and `+tau_c`, driving `|0⟩ ↔ |R⟩` with detuning `delta_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub omega_c0: f64,
    pub delta_r: f64,
    pub t_c: f64,
    pub tau_c: f64,
}

impl ControlParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_c > 0.0) || !self.t_c.is_finite() {
            return Err(Error::param("t_c", format!("must be finite and > 0, got {}", self.t_c)));
        }
        if !(self.omega_c0 >= 0.0) || !self.omega_c0.is_finite() {
            return Err(Error::param(
                "omega_c0",
                format!("must be finite and >= 0, got {}", self.omega_c0),
            ));
        }
        if !self.delta_r.is_finite() {
            return Err(Error::param("delta_r", "must be finite"));
        }
        if !self.tau_c.is_finite() {
            return Err(Error::param("tau_c", "must be finite"));
        }
        Ok(())
    }

    pub fn pulses(&self) -> [PulseParams; 2] {
        [
            PulseParams {
                peak: self.omega_c0,
                center: -self.tau_c,
                width: self.t_c,
            },
            PulseParams {
                peak: self.omega_c0,
                center: self.tau_c,
                width: self.t_c,
            },
        ]
    }

    /// `Ω_c(t)`, the sum of both π-pulse envelopes.
    pub fn omega_c(&self, t: f64) -> f64 {
        self.pulses().iter().map(|p| p.amplitude(t)).sum()
    }

    /// Area of one control pulse.
    pub fn pulse_area(&self) -> f64 {
        self.pulses()[0].area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetParams {
    pub n_atoms: usize,
    pub stirap: StirapPair,
    /// One-photon detuning `δ` at two-photon resonance.
    pub delta: f64,
}

impl TargetParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::param("n_atoms", "must be >= 1"));
        }
        StirapPair::new(self.stirap.omega, self.stirap.tau)?;
        if !self.delta.is_finite() {
            return Err(Error::param("delta", "must be finite"));
        }
        Ok(())
    }

    fn check_basis(&self, basis: &FockBasis) -> Result<()> {
        if basis.n_atoms() != self.n_atoms {
            return Err(Error::invalid(format!(
                "basis built for N = {} but parameters specify N = {}",
                basis.n_atoms(),
                self.n_atoms
            )));
        }
        Ok(())
    }
}

/// Complete dimensionless parameter set of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub control: ControlParams,
    pub target: TargetParams,
    /// Blockade shift `Δ` of the ensemble Rydberg levels when the control
    /// atom is in `|R⟩`.
    pub blockade: f64,
    /// Control decay rate `Γ_R` (`|R⟩ → |0⟩`).
    pub gamma_control: f64,
    /// Target decay rate `Γ_r`, used for both `r → g` and `r → s`.
    pub gamma_target: f64,
    pub t_span: (f64, f64),
    pub solver: SolverOptions,
}

impl ProtocolConfig {
    /// Half-width of the default time window: every Gaussian is below
    /// `e^{-12.5}` at the edges.
    pub fn default_half_span(control: &ControlParams, target: &TargetParams) -> f64 {
        let stirap_edge = 0.5 * target.stirap.tau + 5.0;
        let control_edge = control.tau_c.abs() + 5.0 * control.t_c;
        stirap_edge.max(control_edge) + 1.0
    }

    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        self.target.validate()?;
        if !self.blockade.is_finite() {
            return Err(Error::param("blockade", "must be finite"));
        }
        if !(self.gamma_control >= 0.0) || !self.gamma_control.is_finite() {
            return Err(Error::param(
                "gamma_R",
                format!("must be finite and >= 0, got {}", self.gamma_control),
            ));
        }
        if !(self.gamma_target >= 0.0) || !self.gamma_target.is_finite() {
            return Err(Error::param(
                "gamma_r",
                format!("must be finite and >= 0, got {}", self.gamma_target),
            ));
        }
        let (t0, t1) = self.t_span;
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::param(
                "t_span",
                format!("need finite start < end, got ({t0}, {t1})"),
            ));
        }
        let mut pulses = self.control.pulses().to_vec();
        pulses.push(self.target.stirap.pump());
        pulses.push(self.target.stirap.stokes());
        for p in pulses.iter().filter(|p| p.peak > 0.0) {
            if p.center - 5.0 * p.width < t0 || p.center + 5.0 * p.width > t1 {
                return Err(Error::param(
                    "t_span",
                    format!("({t0}, {t1}) does not cover ±5σ of the pulse centred at {}", p.center),
                ));
            }
        }
        self.solver.validate()
    }

    pub fn is_closed(&self) -> bool {
        self.gamma_control == 0.0 && self.gamma_target == 0.0
    }

    pub fn joint_dim(&self) -> usize {
        CONTROL_DIM * (2 * self.target.n_atoms + 1)
    }
}

/// A Hamiltonian of the form `H₀ + Σ_k f_k(t) · H_k`, where each `f_k` is a
/// sum of Gaussian envelopes. Static parts are assembled once; evaluation
/// only rescales them.
#[derive(Debug, Clone)]
pub struct PulsedHamiltonian {
    constant: CMatrix,
    terms: Vec<(Vec<PulseParams>, CMatrix)>,
}

impl PulsedHamiltonian {
    pub fn new(constant: CMatrix) -> Self {
        assert!(constant.is_square());
        Self {
            constant,
            terms: Vec::new(),
        }
    }

    pub fn with_term(mut self, envelopes: Vec<PulseParams>, operator: CMatrix) -> Self {
        assert_eq!(operator.shape(), self.constant.shape());
        if envelopes.iter().any(|p| p.peak != 0.0) {
            self.terms.push((envelopes, operator));
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    /// Writes `H(t)` into `out`, which must already have the right shape.
    pub fn eval_into(&self, t: f64, out: &mut CMatrix) {
        out.copy_from(&self.constant);
        for (envelopes, op) in &self.terms {
            let f: f64 = envelopes.iter().map(|p| p.amplitude(t)).sum();
            if f != 0.0 {
                out.zip_apply(op, |o, h| *o += h * f);
            }
        }
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let mut h = self.constant.clone();
        self.eval_into(t, &mut h);
        h
    }
}

fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

fn control_coupling() -> CMatrix {
    let mut m = CMatrix::zeros(CONTROL_DIM, CONTROL_DIM);
    m[(CONTROL_0, CONTROL_R)] = C64::new(0.5, 0.0);
    m[(CONTROL_R, CONTROL_0)] = C64::new(0.5, 0.0);
    m
}

fn control_projector_r() -> CMatrix {
    let mut m = CMatrix::zeros(CONTROL_DIM, CONTROL_DIM);
    m[(CONTROL_R, CONTROL_R)] = C64::new(1.0, 0.0);
    m
}

/// `H_C = δ_R |R⟩⟨R| + (Ω_c(t)/2)(|0⟩⟨R| + |R⟩⟨0|)`; `|1⟩` is isolated.
pub fn control_generator(c: &ControlParams) -> PulsedHamiltonian {
    PulsedHamiltonian::new(control_projector_r() * C64::new(c.delta_r, 0.0))
        .with_term(c.pulses().to_vec(), control_coupling())
}

/// One Gaussian control pulse centred at `t = 0` on the bare control atom.
pub fn single_pulse_generator(peak: f64, width: f64, delta_r: f64) -> Result<PulsedHamiltonian> {
    let pulse = PulseParams::new(peak, 0.0, width)?;
    if !delta_r.is_finite() {
        return Err(Error::param("delta_r", "must be finite"));
    }
    Ok(PulsedHamiltonian::new(control_projector_r() * C64::new(delta_r, 0.0))
        .with_term(vec![pulse], control_coupling()))
}

pub fn control_hamiltonian(c: &ControlParams, t: f64) -> CMatrix {
    control_generator(c).at(t)
}

/// Unit-peak pump and Stokes couplings, `(A + A†)/2`.
fn stirap_terms(basis: &FockBasis) -> (DMatrix<f64>, DMatrix<f64>) {
    let hc = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    (
        hc(basis.coupling_matrix(Channel::G)),
        hc(basis.coupling_matrix(Channel::S)),
    )
}

/// `H_T = δ σ_r⁺σ_r⁻ + (Ω_g/2)(a_g†σ_r⁻ + h.c.) + (Ω_s/2)(a_s†σ_r⁻ + h.c.)`
pub fn target_generator(p: &TargetParams, basis: &FockBasis) -> Result<PulsedHamiltonian> {
    p.check_basis(basis)?;
    let (g, s) = stirap_terms(basis);
    Ok(
        PulsedHamiltonian::new(complexify(&(basis.rydberg_number_matrix() * p.delta)))
            .with_term(vec![p.stirap.pump()], complexify(&g))
            .with_term(vec![p.stirap.stokes()], complexify(&s)),
    )
}

/// Real symmetric target Hamiltonian at time `t`.
pub fn target_hamiltonian(p: &TargetParams, basis: &FockBasis, t: f64) -> Result<DMatrix<f64>> {
    p.check_basis(basis)?;
    let (g, s) = stirap_terms(basis);
    Ok(basis.rydberg_number_matrix() * p.delta + g * p.stirap.omega_g(t) + s * p.stirap.omega_s(t))
}

/// `H = H_C ⊗ 1 + 1 ⊗ H_T + Δ |R⟩⟨R| ⊗ σ_r⁺σ_r⁻`
pub fn total_generator(cfg: &ProtocolConfig, basis: &FockBasis) -> Result<PulsedHamiltonian> {
    cfg.target.check_basis(basis)?;
    let d = basis.dim();
    let id_c = CMatrix::identity(CONTROL_DIM, CONTROL_DIM);
    let id_t = CMatrix::identity(d, d);
    let number = complexify(&basis.rydberg_number_matrix());
    let (g, s) = stirap_terms(basis);

    let constant = (control_projector_r() * C64::new(cfg.control.delta_r, 0.0)).kronecker(&id_t)
        + id_c.kronecker(&(&number * C64::new(cfg.target.delta, 0.0)))
        + control_projector_r().kronecker(&number) * C64::new(cfg.blockade, 0.0);

    Ok(PulsedHamiltonian::new(constant)
        .with_term(cfg.control.pulses().to_vec(), control_coupling().kronecker(&id_t))
        .with_term(vec![cfg.target.stirap.pump()], id_c.kronecker(&complexify(&g)))
        .with_term(vec![cfg.target.stirap.stokes()], id_c.kronecker(&complexify(&s))))
}

pub fn total_hamiltonian(cfg: &ProtocolConfig, basis: &FockBasis, t: f64) -> Result<CMatrix> {
    Ok(total_generator(cfg, basis)?.at(t))
}

fn check_rate(key: &str, rate: f64) -> Result<()> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::param(
            key,
            format!("decay rate must be finite and >= 0, got {rate}"),
        ));
    }
    Ok(())
}

/// Target decay channels on the bare ensemble: `√Γ_r L_g`, `√Γ_r L_s`.
/// The excitation decays into the neighbouring symmetric `r⁰` state with
/// unit amplitude, so each channel carries the full single-excitation rate.
pub fn target_jump_operators(basis: &FockBasis, gamma_r: f64) -> Result<Vec<CMatrix>> {
    check_rate("gamma_r", gamma_r)?;
    let amp = gamma_r.sqrt();
    Ok([Channel::G, Channel::S]
        .iter()
        .map(|ch| complexify(&(basis.decay_matrix(*ch) * amp)))
        .collect())
}

/// `[C_0R, C_gr, C_sr]` on the joint space.
pub fn jump_operators(cfg: &ProtocolConfig, basis: &FockBasis) -> Result<Vec<CMatrix>> {
    cfg.target.check_basis(basis)?;
    check_rate("gamma_R", cfg.gamma_control)?;
    let d = basis.dim();
    let mut lower = CMatrix::zeros(CONTROL_DIM, CONTROL_DIM);
    lower[(CONTROL_0, CONTROL_R)] = C64::new(cfg.gamma_control.sqrt(), 0.0);
    let mut ops = vec![lower.kronecker(&CMatrix::identity(d, d))];
    let id_c = CMatrix::identity(CONTROL_DIM, CONTROL_DIM);
    for l in target_jump_operators(basis, cfg.gamma_target)? {
        ops.push(id_c.kronecker(&l));
    }
    Ok(ops)
}
