//! The GHZ sequence: control π pulse, STIRAP on the ensemble, second control
//! π pulse, then a measurement of the control atom in the `|±⟩` basis.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    propagate_lindblad, propagate_schrodinger, DensityMatrix, Probe, QuantumState, SolverOptions, Trajectory,
};
use crate::fock::FockBasis;
use crate::hamiltonian::{
    jump_operators, single_pulse_generator, target_generator, target_jump_operators, total_generator, ProtocolConfig,
    TargetParams, CONTROL_0, CONTROL_1, CONTROL_DIM, CONTROL_R,
};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Below this the `|+⟩` outcome is treated as impossible.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-12;

/// Names of the four tracked joint populations, in probe order.
pub const TRACK_NAMES: [&str; 4] = ["p0g", "p0s", "p1g", "p1s"];

#[derive(Debug, Clone, PartialEq)]
pub struct GhzOutcome {
    /// Ensemble state after a `|+⟩` result on the control atom.
    pub ensemble_state: DensityMatrix,
    pub success_probability: f64,
    /// `⟨φ|ρ|φ⟩` with `|φ⟩ = (|g^N⟩ + |s^N⟩)/√2`.
    pub fidelity_raw: f64,
    /// `max_χ ⟨φ_χ|ρ|φ_χ⟩` with `|φ_χ⟩ = (|g^N⟩ + e^{iχ}|s^N⟩)/√2`.
    pub fidelity_phase_optimized: f64,
    pub optimal_phase: f64,
}

impl GhzOutcome {
    /// `√⟨φ|ρ|φ⟩`, the overlap-magnitude convention.
    pub fn fidelity_root(&self) -> f64 {
        self.fidelity_raw.max(0.0).sqrt()
    }
}

/// Result of `ghz_fidelity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzFidelity {
    pub raw: f64,
    pub phase_optimized: f64,
    pub optimal_phase: f64,
}

/// Joint-space index of control level `c` and ensemble Fock index `k`.
pub fn joint_index(control: usize, k: usize, ensemble_dim: usize) -> usize {
    control * ensemble_dim + k
}

fn ensemble_dim_of(joint_dim: usize) -> Result<usize> {
    if !joint_dim.is_multiple_of(CONTROL_DIM) || (joint_dim / CONTROL_DIM).is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "dimension {joint_dim} is not 3·(2N+1) for any N"
        )));
    }
    Ok(joint_dim / CONTROL_DIM)
}

fn ensemble_block(rho: &CMatrix, a: usize, b: usize, d: usize) -> CMatrix {
    rho.view((a * d, b * d), (d, d)).into_owned()
}

/// Unnormalised ensemble operator `⟨±|ρ|±⟩` for `sign = ±1`.
fn branch_operator(rho: &CMatrix, sign: f64, d: usize) -> CMatrix {
    let b00 = ensemble_block(rho, CONTROL_0, CONTROL_0, d);
    let b01 = ensemble_block(rho, CONTROL_0, CONTROL_1, d);
    let b10 = ensemble_block(rho, CONTROL_1, CONTROL_0, d);
    let b11 = ensemble_block(rho, CONTROL_1, CONTROL_1, d);
    (b00 + b11 + (b01 + b10) * C64::new(sign, 0.0)) * C64::new(0.5, 0.0)
}

/// Probabilities of the three control outcomes `(|+⟩, |−⟩, |R⟩)`.
pub fn control_outcome_probabilities(rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
    let d = ensemble_dim_of(rho.dim())?;
    let plus = branch_operator(&rho.matrix, 1.0, d).trace().re;
    let minus = branch_operator(&rho.matrix, -1.0, d).trace().re;
    let rydberg = ensemble_block(&rho.matrix, CONTROL_R, CONTROL_R, d).trace().re;
    Ok((plus, minus, rydberg))
}

fn project_control(rho: &DensityMatrix, sign: f64) -> Result<(DensityMatrix, f64)> {
    let d = ensemble_dim_of(rho.dim())?;
    let op = branch_operator(&rho.matrix, sign, d);
    let p = op.trace().re;
    if !(p >= MIN_SUCCESS_PROBABILITY) {
        return Err(Error::DegenerateProjection { probability: p });
    }
    let mut out = DensityMatrix {
        matrix: op / C64::new(p, 0.0),
        time: rho.time,
    };
    out.symmetrize();
    Ok((out, p))
}

/// Applies `|+⟩⟨+| ⊗ 1`, renormalises and traces out the control atom.
pub fn project_control_plus(rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    project_control(rho, 1.0)
}

/// Same for the `|−⟩` outcome.
pub fn project_control_minus(rho: &DensityMatrix) -> Result<(DensityMatrix, f64)> {
    project_control(rho, -1.0)
}

/// Pure-state version of [`project_control_plus`].
pub fn project_control_plus_pure(psi: &QuantumState) -> Result<(DensityMatrix, f64)> {
    let d = ensemble_dim_of(psi.dim())?;
    let a = &psi.amplitudes;
    let branch = CVector::from_fn(d, |k, _| {
        (a[joint_index(CONTROL_0, k, d)] + a[joint_index(CONTROL_1, k, d)])
            * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
    });
    let p = branch.norm_squared();
    if !(p >= MIN_SUCCESS_PROBABILITY) {
        return Err(Error::DegenerateProjection { probability: p });
    }
    let chi = branch / C64::new(p.sqrt(), 0.0);
    Ok((
        DensityMatrix {
            matrix: &chi * chi.adjoint(),
            time: psi.time,
        },
        p,
    ))
}

/// Raw and phase-optimised overlap of an ensemble state with the GHZ state.
pub fn ghz_fidelity(rho: &DensityMatrix, n_atoms: usize) -> Result<GhzFidelity> {
    let basis = FockBasis::new(n_atoms)?;
    if rho.dim() != basis.dim() {
        return Err(Error::invalid(format!(
            "ensemble state has dimension {}, expected {} for N = {n_atoms}",
            rho.dim(),
            basis.dim()
        )));
    }
    let (g, s) = (basis.all_g(), basis.all_s());
    let m = &rho.matrix;
    let diag = 0.5 * (m[(g, g)].re + m[(s, s)].re);
    let coherence = m[(g, s)];
    let optimal_phase = if coherence.norm() > 0.0 {
        (-coherence.arg()).rem_euclid(std::f64::consts::TAU)
    } else {
        0.0
    };
    Ok(GhzFidelity {
        raw: diag + coherence.re,
        phase_optimized: diag + coherence.norm(),
        optimal_phase,
    })
}

/// `(|0⟩ + |1⟩) ⊗ |g^N⟩ / √2`
pub fn initial_state(basis: &FockBasis, time: f64) -> QuantumState {
    let d = basis.dim();
    let mut a = CVector::zeros(CONTROL_DIM * d);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    a[joint_index(CONTROL_0, basis.all_g(), d)] = h;
    a[joint_index(CONTROL_1, basis.all_g(), d)] = h;
    QuantumState { amplitudes: a, time }
}

fn probes(basis: &FockBasis) -> Vec<Probe> {
    let d = basis.dim();
    let idx = [
        joint_index(CONTROL_0, basis.all_g(), d),
        joint_index(CONTROL_0, basis.all_s(), d),
        joint_index(CONTROL_1, basis.all_g(), d),
        joint_index(CONTROL_1, basis.all_s(), d),
    ];
    TRACK_NAMES.iter().zip(idx).map(|(n, i)| Probe::new(*n, i)).collect()
}

/// Propagates the joint system through the whole pulse sequence from
/// [`initial_state`]. Closed systems are integrated as state vectors; the
/// trajectory always ends in a density matrix.
pub fn propagate_protocol(cfg: &ProtocolConfig) -> Result<Trajectory<DensityMatrix>> {
    cfg.validate()?;
    let basis = FockBasis::new(cfg.target.n_atoms)?;
    let h = total_generator(cfg, &basis)?;
    let psi0 = initial_state(&basis, cfg.t_span.0);
    let probes = probes(&basis);
    if cfg.is_closed() {
        let t = propagate_schrodinger(&h, &psi0, cfg.t_span, &cfg.solver, &probes)?;
        Ok(Trajectory {
            times: t.times,
            tracks: t.tracks,
            final_state: t.final_state.to_density_matrix(),
            diagnostics: t.diagnostics,
        })
    } else {
        let jumps = jump_operators(cfg, &basis)?;
        propagate_lindblad(&h, &jumps, &psi0.to_density_matrix(), cfg.t_span, &cfg.solver, &probes)
    }
}

/// Runs the sequence, measures the control atom in `|+⟩` and scores the
/// ensemble against the GHZ state.
pub fn run_ghz_protocol(cfg: &ProtocolConfig) -> Result<(Trajectory<DensityMatrix>, GhzOutcome)> {
    let traj = propagate_protocol(cfg)?;
    let (ensemble_state, success_probability) = project_control_plus(&traj.final_state)?;
    let f = ghz_fidelity(&ensemble_state, cfg.target.n_atoms)?;
    Ok((
        traj,
        GhzOutcome {
            ensemble_state,
            success_probability,
            fidelity_raw: f.raw,
            fidelity_phase_optimized: f.phase_optimized,
            optimal_phase: f.optimal_phase,
        },
    ))
}

/// Final `(|c_{g^N}|², |c_{s^N}|²)` of the bare ensemble after the STIRAP
/// pair, starting from `|g^N⟩`.
pub fn stirap_transfer_populations(
    p: &TargetParams,
    gamma_r: f64,
    t_span: (f64, f64),
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    p.validate()?;
    let basis = FockBasis::new(p.n_atoms)?;
    let h = target_generator(p, &basis)?;
    let psi0 = QuantumState::basis(basis.dim(), basis.all_g(), t_span.0);
    let (g, s) = (basis.all_g(), basis.all_s());
    if gamma_r == 0.0 {
        let t = propagate_schrodinger(&h, &psi0, t_span, opts, &[])?;
        Ok((t.final_state.population(g), t.final_state.population(s)))
    } else {
        let jumps = target_jump_operators(&basis, gamma_r)?;
        let t = propagate_lindblad(&h, &jumps, &psi0.to_density_matrix(), t_span, opts, &[])?;
        Ok((t.final_state.population(g), t.final_state.population(s)))
    }
}

/// Final `|c_R|²` of the bare control atom after one Gaussian pulse centred
/// at zero, integrated over `±half_span`.
pub fn single_pulse_excitation(
    peak: f64,
    width: f64,
    delta_r: f64,
    half_span: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let h = single_pulse_generator(peak, width, delta_r)?;
    let psi0 = QuantumState::basis(CONTROL_DIM, CONTROL_0, -half_span);
    let t = propagate_schrodinger(&h, &psi0, (-half_span, half_span), opts, &[])?;
    Ok(t.final_state.population(CONTROL_R))
}
