//! Symmetric Fock basis of an N-atom Λ ensemble with at most one Rydberg
//! excitation.
//!
//! Each atom has two ground states `g`, `s` and one Rydberg level `r`.
//! Permutation-symmetric states are labelled by occupation numbers
//! `(n_g, n_s, n_r)` with `n_r ∈ {0, 1}`. There are `2N + 1` of them.
//!
//! Canonical ordering: the `r⁰` block by ascending `n_s` (indices `0..=N`),
//! then the `r¹` block by ascending `n_s` (indices `N+1..=2N`). Hence
//! `|g^N⟩` has index 0 and `|s^N⟩` has index `N`.

use std::fmt;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Occupation numbers of one symmetric basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockState {
    pub n_g: usize,
    pub n_s: usize,
    pub n_r: usize,
}

impl FockState {
    pub fn atoms(&self) -> usize {
        self.n_g + self.n_s + self.n_r
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|g{};s{};r{}>", self.n_g, self.n_s, self.n_r)
    }
}

/// Ground-state channel of a collective `|μ⟩⟨r|` operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    G,
    S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_atoms: usize,
    states: Vec<FockState>,
}

impl FockBasis {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::invalid("ensemble must contain at least one atom"));
        }
        let n = n_atoms;
        let ground = (0..=n).map(|k| FockState {
            n_g: n - k,
            n_s: k,
            n_r: 0,
        });
        let excited = (0..n).map(|k| FockState {
            n_g: n - k - 1,
            n_s: k,
            n_r: 1,
        });
        Ok(Self {
            n_atoms,
            states: ground.chain(excited).collect(),
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> Option<FockState> {
        self.states.get(index).copied()
    }

    pub fn index_of(&self, state: FockState) -> Option<usize> {
        if state.atoms() != self.n_atoms {
            return None;
        }
        match state.n_r {
            0 => Some(state.n_s),
            1 if state.n_s < self.n_atoms => Some(self.n_atoms + 1 + state.n_s),
            _ => None,
        }
    }

    /// Index of `|g^{N−n};s^n;r⁰⟩`.
    pub fn ground_index(&self, n_s: usize) -> usize {
        debug_assert!(n_s <= self.n_atoms);
        n_s
    }

    /// Index of `|g^{N−n−1};s^n;r¹⟩`.
    pub fn excited_index(&self, n_s: usize) -> usize {
        debug_assert!(n_s < self.n_atoms);
        self.n_atoms + 1 + n_s
    }

    /// `|g^N⟩`
    pub fn all_g(&self) -> usize {
        0
    }

    /// `|s^N⟩`
    pub fn all_s(&self) -> usize {
        self.n_atoms
    }

    pub fn is_excited(&self, index: usize) -> bool {
        index > self.n_atoms
    }

    /// Matrix of `a_μ† σ_r⁻`, which moves the Rydberg excitation into the
    /// ground state `μ` with the bosonic factor of the destination.
    pub fn coupling_matrix(&self, channel: Channel) -> DMatrix<f64> {
        let n = self.n_atoms;
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for k in 0..n {
            let from = self.excited_index(k);
            match channel {
                Channel::G => m[(self.ground_index(k), from)] = ((n - k) as f64).sqrt(),
                Channel::S => m[(self.ground_index(k + 1), from)] = ((k + 1) as f64).sqrt(),
            }
        }
        m
    }

    /// Projector `σ_r⁺σ_r⁻` onto the `r¹` block.
    pub fn rydberg_number_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j && self.is_excited(i) {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Unit-amplitude transfer of the Rydberg excitation into the ground
    /// state `μ`, staying inside the symmetric subspace. Used to build the
    /// target decay channels.
    pub fn decay_matrix(&self, channel: Channel) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for k in 0..self.n_atoms {
            let to = match channel {
                Channel::G => self.ground_index(k),
                Channel::S => self.ground_index(k + 1),
            };
            m[(to, self.excited_index(k))] = 1.0;
        }
        m
    }
}

/// Collective matrices obtained by brute force from the full `3^N`-dimensional
/// tensor-product space.
#[derive(Debug, Clone)]
pub struct TensorOracle {
    pub coupling_g: DMatrix<f64>,
    pub coupling_s: DMatrix<f64>,
    pub number: DMatrix<f64>,
}

const MAX_ORACLE_ATOMS: usize = 3;

/// Per-atom level labels in the tensor-product space.
const LEVEL_G: usize = 0;
const LEVEL_S: usize = 1;
const LEVEL_R: usize = 2;

/// Builds `Σ_{μ,ν} = Σ_j |μ⟩_j⟨ν|` on the full product space, constructs the
/// symmetric states by repeated application of the collective raising
/// operators to `|g^N⟩`, and projects `Σ_{g,r}`, `Σ_{s,r}` and `Σ_{r,r}` onto
/// them. Independent of the closed-form bosonic factors in [`FockBasis`].
pub fn tensor_oracle(n_atoms: usize) -> Result<TensorOracle> {
    if n_atoms == 0 {
        return Err(Error::invalid("ensemble must contain at least one atom"));
    }
    if n_atoms > MAX_ORACLE_ATOMS {
        return Err(Error::invalid(format!(
            "tensor oracle limited to N <= {MAX_ORACLE_ATOMS}, got {n_atoms}"
        )));
    }
    let full = 3usize.pow(n_atoms as u32);
    let digit = |index: usize, atom: usize| (index / 3usize.pow(atom as u32)) % 3;

    let sigma = |mu: usize, nu: usize| {
        let mut m = DMatrix::<f64>::zeros(full, full);
        for col in 0..full {
            for atom in 0..n_atoms {
                if digit(col, atom) == nu {
                    let row = col - nu * 3usize.pow(atom as u32) + mu * 3usize.pow(atom as u32);
                    m[(row, col)] += 1.0;
                }
            }
        }
        m
    };
    let s_from_g = sigma(LEVEL_S, LEVEL_G);
    let r_from_g = sigma(LEVEL_R, LEVEL_G);

    let mut all_g = nalgebra::DVector::<f64>::zeros(full);
    all_g[0] = 1.0;

    let fact = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    let n = n_atoms;
    let mut vectors = Vec::with_capacity(2 * n + 1);
    let mut raised = all_g.clone();
    for k in 0..=n {
        let norm = (fact(n - k) / (fact(n) * fact(k))).sqrt();
        vectors.push(&raised * norm);
        raised = &s_from_g * raised;
    }
    let mut raised = &r_from_g * all_g;
    for k in 0..n {
        let norm = (fact(n - k - 1) / (fact(n) * fact(k))).sqrt();
        vectors.push(&raised * norm);
        raised = &s_from_g * raised;
    }

    let project =
        |op: &DMatrix<f64>| DMatrix::from_fn(vectors.len(), vectors.len(), |i, j| vectors[i].dot(&(op * &vectors[j])));
    Ok(TensorOracle {
        coupling_g: project(&sigma(LEVEL_G, LEVEL_R)),
        coupling_s: project(&sigma(LEVEL_S, LEVEL_R)),
        number: project(&sigma(LEVEL_R, LEVEL_R)),
    })
}
