//! Closed (Schrödinger) and open (Lindblad) time propagation.

mod integrator;

pub use integrator::{integrate, StepStats};

use nalgebra::{DVectorView, DVectorViewMut, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::hamiltonian::PulsedHamiltonian;
use crate::pulses::PulseParams;
use crate::{CMatrix, CVector, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Adaptive Dormand–Prince 5(4).
    DormandPrince45,
    /// Classical fixed-step RK4; each output interval is split into equal
    /// steps no longer than `max_step`.
    Rk4 { max_step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Number of points of the uniform output grid, endpoints included.
    pub samples: usize,
    pub method: Method,
    pub max_steps: usize,
    /// Track the minimum eigenvalue of `ρ` at every output sample (open
    /// systems only; costs one Hermitian eigensolve per sample).
    pub check_positivity: bool,
    /// Fill output samples from the continuous extension instead of landing
    /// steps on them. Cheaper for dense grids, but the interpolant is only
    /// fourth order, so sampled norms drift about ten times more.
    #[serde(default)]
    pub dense_output: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            samples: 2000,
            method: Method::DormandPrince45,
            max_steps: 10_000_000,
            check_positivity: false,
            dense_output: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::param("rtol", "tolerances must be > 0"));
        }
        if self.samples < 2 {
            return Err(Error::param("samples", "need at least 2 output samples"));
        }
        if let Method::Rk4 { max_step } = self.method {
            if !(max_step > 0.0) {
                return Err(Error::param("max_step", "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn output_grid(&self, (t0, t1): (f64, f64)) -> Vec<f64> {
        let n = self.samples.max(2);
        let dt = (t1 - t0) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { t1 } else { t0 + dt * i as f64 })
            .collect()
    }
}

/// Anything that can produce `H(t)` as a dense matrix.
pub trait Hamiltonian {
    fn dim(&self) -> usize;
    fn eval_into(&self, t: f64, out: &mut CMatrix);
}

impl Hamiltonian for PulsedHamiltonian {
    fn dim(&self) -> usize {
        PulsedHamiltonian::dim(self)
    }

    fn eval_into(&self, t: f64, out: &mut CMatrix) {
        PulsedHamiltonian::eval_into(self, t, out)
    }
}

/// Adapts a closure `t ↦ H(t)` into a [`Hamiltonian`].
pub struct FnHamiltonian<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64) -> CMatrix> FnHamiltonian<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64) -> CMatrix> Hamiltonian for FnHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, t: f64, out: &mut CMatrix) {
        out.copy_from(&(self.f)(t));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: CVector,
    pub time: f64,
}

impl QuantumState {
    pub fn new(amplitudes: CVector, time: f64) -> Result<Self> {
        let norm = amplitudes.norm();
        if !((norm - 1.0).abs() < 1e-10) {
            return Err(Error::invalid(format!("state is not normalised (norm {norm})")));
        }
        Ok(Self { amplitudes, time })
    }

    /// Basis state `|index⟩` of a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize, time: f64) -> Self {
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes, time }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn to_density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
            time: self.time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: CMatrix,
    pub time: f64,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, time: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("density matrix must be square"));
        }
        let rho = Self { matrix, time };
        if rho.hermiticity_error() > 1e-10 {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        if (rho.trace() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("density matrix trace is {}", rho.trace())));
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn symmetrize(&mut self) {
        self.matrix = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.min()
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn expectation(&self, psi: &CVector) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }
}

/// Population of one basis state, recorded as a named track.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub name: String,
    pub index: usize,
}

impl Probe {
    pub fn new(name: impl Into<String>, index: usize) -> Self {
        Self {
            name: name.into(),
            index,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Largest `|‖ψ‖² − 1|` (closed) or `|Tr ρ − 1|` (open) over the samples.
    pub max_norm_drift: f64,
    /// Smallest eigenvalue of `ρ` over the samples, when requested.
    pub min_eigenvalue: Option<f64>,
    pub max_hermiticity_error: f64,
    pub steps: StepStats,
}

#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub tracks: Vec<Track>,
    pub final_state: S,
    pub diagnostics: Diagnostics,
}

impl<S> Trajectory<S> {
    pub fn track(&self, name: &str) -> Option<&[f64]> {
        self.tracks.iter().find(|t| t.name == name).map(|t| t.values.as_slice())
    }
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let v = m[(r, c)];
            if v.re != 0.0 || v.im != 0.0 {
                out.push((r, c, v));
            }
        }
    }
    out
}

fn check_probes(probes: &[Probe], dim: usize) -> Result<()> {
    match probes.iter().find(|p| p.index >= dim) {
        Some(p) => Err(Error::invalid(format!(
            "probe `{}` index {} out of range for dimension {dim}",
            p.name, p.index
        ))),
        None => Ok(()),
    }
}

fn check_span((t0, t1): (f64, f64)) -> Result<()> {
    if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::param(
            "t_span",
            format!("need finite start < end, got ({t0}, {t1})"),
        ));
    }
    Ok(())
}

/// Integrates `i dψ/dt = H(t) ψ` over `t_span`, sampling the probes on the
/// uniform output grid.
pub fn propagate_schrodinger<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &QuantumState,
    t_span: (f64, f64),
    opts: &SolverOptions,
    probes: &[Probe],
) -> Result<Trajectory<QuantumState>> {
    let n = h.dim();
    if psi0.dim() != n {
        return Err(Error::invalid(format!(
            "state dimension {} does not match Hamiltonian dimension {n}",
            psi0.dim()
        )));
    }
    check_span(t_span)?;
    opts.validate()?;
    check_probes(probes, n)?;

    let grid = opts.output_grid(t_span);
    let mut tracks: Vec<Track> = probes
        .iter()
        .map(|p| Track {
            name: p.name.clone(),
            values: Vec::with_capacity(grid.len()),
        })
        .collect();
    let norm0 = psi0.norm_sqr();
    let mut drift: f64 = 0.0;
    let mut hbuf = CMatrix::zeros(n, n);
    let minus_i = C64::new(0.0, -1.0);

    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        h.eval_into(t, &mut hbuf);
        let x = DVectorView::from_slice(y, n);
        let mut out = DVectorViewMut::from_slice(dy, n);
        out.gemv(minus_i, &hbuf, &x, C64::new(0.0, 0.0));
    };
    let observe = |_: usize, _: f64, y: &[C64]| {
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        drift = drift.max((norm - norm0).abs());
        for (track, probe) in tracks.iter_mut().zip(probes) {
            track.values.push(y[probe.index].norm_sqr());
        }
        Ok(())
    };
    let (y, steps) = integrate(rhs, psi0.amplitudes.as_slice(), &grid, opts, observe)?;

    Ok(Trajectory {
        final_state: QuantumState {
            amplitudes: CVector::from_vec(y),
            time: t_span.1,
        },
        times: grid,
        tracks,
        diagnostics: Diagnostics {
            max_norm_drift: drift,
            min_eigenvalue: None,
            max_hermiticity_error: 0.0,
            steps,
        },
    })
}

/// Integrates `dρ/dt = −i[H, ρ] + Σ_m (C_m ρ C_m† − ½{C_m†C_m, ρ})` with
/// time-independent jump operators.
pub fn propagate_lindblad<H: Hamiltonian + ?Sized>(
    h: &H,
    jumps: &[CMatrix],
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    opts: &SolverOptions,
    probes: &[Probe],
) -> Result<Trajectory<DensityMatrix>> {
    let n = h.dim();
    if rho0.dim() != n {
        return Err(Error::invalid(format!(
            "density matrix dimension {} does not match Hamiltonian dimension {n}",
            rho0.dim()
        )));
    }
    if let Some(c) = jumps.iter().find(|c| c.shape() != (n, n)) {
        return Err(Error::invalid(format!(
            "jump operator has shape {:?}, expected ({n}, {n})",
            c.shape()
        )));
    }
    check_span(t_span)?;
    opts.validate()?;
    check_probes(probes, n)?;

    let jumps: Vec<Vec<(usize, usize, C64)>> = jumps.iter().map(nonzeros).filter(|c| !c.is_empty()).collect();
    let half_rate = jumps.iter().fold(CMatrix::zeros(n, n), |mut acc, c| {
        // ½ C†C
        for &(i, k, a) in c {
            for &(j, l, b) in c {
                if i == j {
                    acc[(k, l)] += a.conj() * b * 0.5;
                }
            }
        }
        acc
    });

    let grid = opts.output_grid(t_span);
    let mut tracks: Vec<Track> = probes
        .iter()
        .map(|p| Track {
            name: p.name.clone(),
            values: Vec::with_capacity(grid.len()),
        })
        .collect();
    let trace0 = rho0.trace();
    let mut drift: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut min_eig: Option<f64> = None;

    let mut hbuf = CMatrix::zeros(n, n);
    let mut k_entries: Vec<(usize, usize, C64)> = Vec::with_capacity(n * n);
    let mut k_rho = vec![C64::new(0.0, 0.0); n * n];
    let minus_i = C64::new(0.0, -1.0);

    // dρ/dt = K ρ + (K ρ)† + Σ C ρ C†, with K = −iH − ½ Σ C†C; ρ K† = (K ρ)†
    // because the flow preserves hermiticity. All operators here are sparse.
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        h.eval_into(t, &mut hbuf);
        k_entries.clear();
        for c in 0..n {
            for r in 0..n {
                let v = minus_i * hbuf[(r, c)] - half_rate[(r, c)];
                if v.re != 0.0 || v.im != 0.0 {
                    k_entries.push((r, c, v));
                }
            }
        }
        k_rho.fill(C64::new(0.0, 0.0));
        for &(i, k, v) in &k_entries {
            for j in 0..n {
                k_rho[i + j * n] += v * y[k + j * n];
            }
        }
        for j in 0..n {
            for i in 0..n {
                dy[i + j * n] = k_rho[i + j * n] + k_rho[j + i * n].conj();
            }
        }
        for c in &jumps {
            for &(i, k, a) in c {
                for &(j, l, b) in c {
                    dy[i + j * n] += a * y[k + l * n] * b.conj();
                }
            }
        }
    };
    let observe = |_: usize, t: f64, y: &[C64]| {
        let mut rho = DensityMatrix {
            matrix: CMatrix::from_column_slice(n, n, y),
            time: t,
        };
        herm = herm.max(rho.hermiticity_error());
        rho.symmetrize();
        drift = drift.max((rho.trace() - trace0).abs());
        if opts.check_positivity {
            let e = rho.min_eigenvalue();
            min_eig = Some(min_eig.map_or(e, |m: f64| m.min(e)));
        }
        for (track, probe) in tracks.iter_mut().zip(probes) {
            track.values.push(rho.population(probe.index));
        }
        Ok(())
    };
    let (y, steps) = integrate(rhs, rho0.matrix.as_slice(), &grid, opts, observe)?;
    let mut final_state = DensityMatrix {
        matrix: CMatrix::from_column_slice(n, n, &y),
        time: t_span.1,
    };
    final_state.symmetrize();

    Ok(Trajectory {
        final_state,
        times: grid,
        tracks,
        diagnostics: Diagnostics {
            max_norm_drift: drift,
            min_eigenvalue: min_eig,
            max_hermiticity_error: herm,
            steps,
        },
    })
}

/// Resonant two-level response to a single Gaussian pulse:
/// `(|c₀(∞)|², |c_R(∞)|²) = (cos²Θ, sin²Θ)` with `Θ = peak·width·√(π/2)`.
pub fn rabi_two_level_analytic(peak: f64, width: f64) -> Result<(f64, f64)> {
    let area = PulseParams::new(peak, 0.0, width)?.area();
    Ok((area.cos().powi(2), area.sin().powi(2)))
}
