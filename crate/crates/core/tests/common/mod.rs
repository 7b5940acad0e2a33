//! Independent numerical oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rydberg_ghz::fock::FockBasis;
use rydberg_ghz::hamiltonian::{target_hamiltonian, TargetParams};
use rydberg_ghz::pulses::StirapPair;

pub fn target(n: usize, omega: f64, tau: f64, delta: f64) -> TargetParams {
    TargetParams {
        n_atoms: n,
        stirap: StirapPair::new(omega, tau).unwrap(),
        delta,
    }
}

/// Eigenvalues ascending with matching eigenvector columns.
pub fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// Null vector of `H_T(t)` by diagonalisation, sign fixed against `reference`.
pub fn numerical_dark_state(p: &TargetParams, t: f64, reference: &DVector<f64>) -> DVector<f64> {
    let basis = FockBasis::new(p.n_atoms).unwrap();
    let (values, vectors) = sorted_eigen(target_hamiltonian(p, &basis, t).unwrap());
    let k = (0..values.len())
        .min_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))
        .unwrap();
    let v: DVector<f64> = vectors.column(k).into_owned();
    if v.dot(reference) < 0.0 {
        -v
    } else {
        v
    }
}

/// Terms of `Σ_{m≠0} |⟨m|Ȯ⟩/(E₀ − E_m)|` from a full diagonalisation and a
/// Richardson-extrapolated central-difference `Ȯ`. Returns `(|E_m|, term_m)` for every bright state.
pub fn numerical_adiabaticity_terms(p: &TargetParams, t: f64, h: f64) -> Vec<(f64, f64)> {
    let basis = FockBasis::new(p.n_atoms).unwrap();
    let (values, vectors) = sorted_eigen(target_hamiltonian(p, &basis, t).unwrap());
    let zero = (0..values.len())
        .min_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))
        .unwrap();
    let o = vectors.column(zero).into_owned();
    let diff = |step: f64| {
        let plus = numerical_dark_state(p, t + step, &o);
        let minus = numerical_dark_state(p, t - step, &o);
        (plus - minus) / (2.0 * step)
    };
    let o_dot = (diff(h / 2.0) * 4.0 - diff(h)) / 3.0;
    (0..values.len())
        .filter(|&m| m != zero)
        .map(|m| {
            let overlap = vectors.column(m).dot(&o_dot);
            (values[m].abs(), (overlap / (values[zero] - values[m])).abs())
        })
        .collect()
}
