//! Restricted many-body basis of the register and the operators acting on it.
//!
//! Basis order (full layout, dimension `1 + 4(n−1)`):
//!
//! ```text
//! 0            |T⟩
//! 1 + 4b + 0   |S_j^+⟩   pair on site j,   hole on site j+1
//! 1 + 4b + 1   |S_j^−⟩   pair on site j+1, hole on site j
//! 1 + 4b + 2   |M_j^+⟩   molecule on site j
//! 1 + 4b + 3   |M_j^−⟩   molecule on site j+1
//! ```
//!
//! with bond index `b = j + (n−1)/2` running over `0..n−1`. The pair-only
//! layout (dimension `1 + 2(n−1)`) drops the molecular states and keeps
//! `|T⟩, S_j^+, S_j^−, ...` in the same relative order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{domain, Error, Result};
use crate::sparse::SparseOperator;
use crate::units::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Plus,
    Minus,
}

impl Orientation {
    pub const BOTH: [Orientation; 2] = [Orientation::Plus, Orientation::Minus];

    fn offset(self) -> usize {
        match self {
            Orientation::Plus => 0,
            Orientation::Minus => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// T, S and M states.
    Full,
    /// T and S states only.
    PairOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedBasis {
    n: usize,
}

impl RestrictedBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bond_count(&self) -> usize {
        self.n - 1
    }

    pub fn dim(&self) -> usize {
        1 + 4 * self.bond_count()
    }

    pub fn pair_dim(&self) -> usize {
        1 + 2 * self.bond_count()
    }

    pub fn layout_dim(&self, layout: Layout) -> usize {
        match layout {
            Layout::Full => self.dim(),
            Layout::PairOnly => self.pair_dim(),
        }
    }

    /// Leftmost site label, `−(n−1)/2`.
    pub fn first_site(&self) -> i64 {
        -((self.n as i64 - 1) / 2)
    }

    /// Bond labels `j`, each joining sites `j` and `j+1`.
    pub fn bonds(&self) -> impl Iterator<Item = i64> {
        let first = self.first_site();
        (0..self.bond_count() as i64).map(move |b| first + b)
    }

    fn bond_slot(&self, j: i64) -> usize {
        let b = j - self.first_site();
        assert!(
            b >= 0 && (b as usize) < self.bond_count(),
            "bond {j} outside register of {} sites",
            self.n
        );
        b as usize
    }

    pub fn pair_index(&self, j: i64, o: Orientation) -> usize {
        1 + 4 * self.bond_slot(j) + o.offset()
    }

    pub fn molecule_index(&self, j: i64, o: Orientation) -> usize {
        3 + 4 * self.bond_slot(j) + o.offset()
    }

    pub fn reduced_pair_index(&self, j: i64, o: Orientation) -> usize {
        1 + 2 * self.bond_slot(j) + o.offset()
    }

    pub fn is_molecule(&self, index: usize) -> bool {
        index > 0 && (index - 1) % 4 >= 2
    }

    /// All pair states as `(bond, orientation)` in basis order.
    pub fn pair_states(&self) -> impl Iterator<Item = (i64, Orientation)> {
        self.bonds()
            .flat_map(|j| Orientation::BOTH.into_iter().map(move |o| (j, o)))
    }
}

pub fn build_basis(n: usize) -> Result<RestrictedBasis> {
    if n < 3 || n % 2 == 0 {
        return domain(format!("register size must be odd and at least 3, got {n}"));
    }
    Ok(RestrictedBasis { n })
}

/// Energy of a pair-hole state relative to `|T⟩` with ε(j) = δ j².
pub fn pair_state_energy(j: i64, o: Orientation, u: f64, delta: f64) -> f64 {
    let shift = delta * (2 * j + 1) as f64;
    match o {
        Orientation::Plus => u - shift,
        Orientation::Minus => u + shift,
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn tunneling_couplings(
    basis: &RestrictedBasis,
    p: &DerivedParams,
    index: impl Fn(i64, Orientation) -> usize,
    out: &mut Vec<(usize, usize, Complex64)>,
) {
    if p.j == 0.0 {
        return;
    }
    let g = re(-SQRT_2 * p.j);
    for (j, o) in basis.pair_states() {
        let s = index(j, o);
        out.push((0, s, g));
        out.push((s, 0, g));
    }
}

/// H_I in the rotating frame with the atomic excited states eliminated.
pub fn build_interaction_hamiltonian(basis: &RestrictedBasis, p: &DerivedParams) -> SparseOperator {
    let mut t = vec![(0, 0, re(0.0))];
    for (j, o) in basis.pair_states() {
        let e = pair_state_energy(j, o, 1.0, p.delta);
        let s = basis.pair_index(j, o);
        let m = basis.molecule_index(j, o);
        t.push((s, s, re(p.vc_abs + e)));
        t.push((m, m, re(p.vc_abs + e - 1.0)));
        if p.omega_m != 0.0 {
            t.push((s, m, re(0.5 * p.omega_m)));
            t.push((m, s, re(0.5 * p.omega_m)));
        }
    }
    tunneling_couplings(basis, p, |j, o| basis.pair_index(j, o), &mut t);
    SparseOperator::from_triplets(basis.dim(), t, true)
}

/// Null-result Hamiltonian `H_I − iγ_M/2 Σ |M⟩⟨M|`.
pub fn build_effective_hamiltonian(basis: &RestrictedBasis, p: &DerivedParams) -> SparseOperator {
    let h = build_interaction_hamiltonian(basis, p);
    if p.gamma_m == 0.0 {
        return h;
    }
    let decay = basis
        .pair_states()
        .map(|(j, o)| {
            let m = basis.molecule_index(j, o);
            (m, m, Complex64::new(0.0, -0.5 * p.gamma_m))
        })
        .collect();
    h.add(&SparseOperator::from_triplets(basis.dim(), decay, false))
}

/// Bose-Hubbard Hamiltonian restricted to T and S (full layout, M rows empty).
pub fn build_free_hamiltonian(basis: &RestrictedBasis, p: &DerivedParams) -> SparseOperator {
    let mut t = vec![(0, 0, re(0.0))];
    for (j, o) in basis.pair_states() {
        let s = basis.pair_index(j, o);
        t.push((s, s, re(pair_state_energy(j, o, 1.0, p.delta))));
    }
    tunneling_couplings(basis, p, |j, o| basis.pair_index(j, o), &mut t);
    SparseOperator::from_triplets(basis.dim(), t, true)
}

/// Damping rate of the coherence between `S_j^±` and `T` once the molecular
/// state is adiabatically eliminated.
pub fn coherence_damping(p: &DerivedParams, pair_energy: f64) -> f64 {
    let detuning = p.vc_abs + pair_energy - 1.0;
    let half_gamma = 0.5 * p.gamma_m;
    let denom = detuning * detuning + half_gamma * half_gamma;
    if denom == 0.0 {
        return 0.0;
    }
    p.omega_m * p.omega_m * p.gamma_m / 8.0 / denom
}

#[derive(Debug, Clone)]
pub struct EliminatedHamiltonian {
    /// Operator on the pair-only layout.
    pub op: SparseOperator,
    /// Set when Ω_M/γ_M ≥ 0.1 and the elimination is not trustworthy.
    pub regime_warning: bool,
}

/// T⊕S Hamiltonian with each `S_j^±` shifted by |V_c| and damped at κ_j.
pub fn build_eliminated_hamiltonian(
    basis: &RestrictedBasis,
    p: &DerivedParams,
) -> EliminatedHamiltonian {
    let mut t = vec![(0, 0, re(0.0))];
    let mut damped = false;
    for (j, o) in basis.pair_states() {
        let e = pair_state_energy(j, o, 1.0, p.delta);
        let s = basis.reduced_pair_index(j, o);
        let kappa_j = coherence_damping(p, e);
        damped |= kappa_j != 0.0;
        t.push((s, s, Complex64::new(p.vc_abs + e, -kappa_j)));
    }
    tunneling_couplings(basis, p, |j, o| basis.reduced_pair_index(j, o), &mut t);
    let regime_warning = !(p.gamma_m > 0.0 && p.omega_m / p.gamma_m < 0.1) && p.omega_m != 0.0;
    EliminatedHamiltonian {
        op: SparseOperator::from_triplets(basis.pair_dim(), t, !damped),
        regime_warning,
    }
}

/// Complex amplitudes over either layout of a restricted basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateVectorRepr", into = "StateVectorRepr")]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct StateVectorRepr {
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl From<StateVector> for StateVectorRepr {
    fn from(s: StateVector) -> Self {
        Self {
            n: s.n,
            amplitudes: s.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<StateVectorRepr> for StateVector {
    type Error = Error;
    fn try_from(r: StateVectorRepr) -> Result<Self> {
        let basis = build_basis(r.n)?;
        StateVector::new(
            &basis,
            r.amplitudes
                .into_iter()
                .map(|[a, b]| Complex64::new(a, b))
                .collect(),
        )
    }
}

impl StateVector {
    /// Accepts amplitudes in either layout; the length decides which.
    pub fn new(basis: &RestrictedBasis, amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len != basis.dim() && len != basis.pair_dim() {
            return domain(format!(
                "{len} amplitudes fit neither layout ({} or {})",
                basis.dim(),
                basis.pair_dim()
            ));
        }
        if amplitudes
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return domain("state amplitudes must be finite");
        }
        Ok(Self {
            n: basis.n,
            amplitudes,
        })
    }

    pub fn target(basis: &RestrictedBasis, layout: Layout) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.layout_dim(layout)];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            n: basis.n,
            amplitudes,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> Layout {
        if self.amplitudes.len() == 1 + 4 * (self.n - 1) {
            Layout::Full
        } else {
            Layout::PairOnly
        }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for c in &mut self.amplitudes {
                *c /= norm;
            }
        }
        self
    }

    /// Drops the molecular amplitudes. Pair-only states are returned as is.
    pub fn to_pair_only(&self) -> Self {
        if self.layout() == Layout::PairOnly {
            return self.clone();
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i == 0 || (i - 1) % 4 < 2)
            .map(|(_, &c)| c)
            .collect();
        Self {
            n: self.n,
            amplitudes,
        }
    }

    /// Embeds into the full layout with zero molecular amplitudes.
    pub fn to_full(&self) -> Self {
        if self.layout() == Layout::Full {
            return self.clone();
        }
        let bonds = self.n - 1;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 + 4 * bonds];
        amplitudes[0] = self.amplitudes[0];
        for b in 0..bonds {
            amplitudes[1 + 4 * b] = self.amplitudes[1 + 2 * b];
            amplitudes[2 + 4 * b] = self.amplitudes[2 + 2 * b];
        }
        Self {
            n: self.n,
            amplitudes,
        }
    }
}

/// First-order ground state of the free register: `c_T = 1`,
/// `c_S = √2 J / E(S)`, normalized, molecular amplitudes zero.
pub fn perturbative_ground_state(
    basis: &RestrictedBasis,
    p: &DerivedParams,
) -> Result<StateVector> {
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    amps[0] = re(1.0);
    for (j, o) in basis.pair_states() {
        let e = pair_state_energy(j, o, 1.0, p.delta);
        if !(e > 0.0) {
            return domain(format!(
                "pair state energy {e} at bond {j} is not positive; perturbation theory fails"
            ));
        }
        amps[basis.pair_index(j, o)] = re(SQRT_2 * p.j / e);
    }
    Ok(StateVector::new(basis, amps)?.normalized())
}

/// Conditioned target fidelity `|c_T|² / ‖ψ‖²`.
pub fn fidelity(psi: &StateVector) -> Result<f64> {
    amplitude_fidelity(psi.amplitudes())
}

pub(crate) fn amplitude_fidelity(amps: &[Complex64]) -> Result<f64> {
    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    if !(norm > 0.0) {
        return domain("fidelity of a zero-norm state");
    }
    Ok(amps[0].norm_sqr() / norm)
}
