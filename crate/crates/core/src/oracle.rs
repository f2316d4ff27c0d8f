//! Brute-force Bose-Hubbard reference on small lattices.
//!
//! Sites are labeled `i − (M−1)/2` so that the trap offset `δ x²` is centered
//! on the chain, matching the register convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::SQRT_2;

use crate::dynamics::integrator::{self, propagate, TrajectorySeries};
use crate::error::{domain, Error, Result};
use crate::sparse::SparseOperator;

/// Largest Fock space the oracle will enumerate.
pub const FOCK_CAP: usize = 20_000;
/// Largest single-double-occupancy basis.
pub const DOUBLE_OCCUPANCY_CAP: usize = 100_000;
/// Dense diagonalization up to this dimension, Lanczos above.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "open" => Ok(Boundary::Open),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(format!(
                "unknown boundary `{other}` (expected open or periodic)"
            )),
        }
    }
}

/// Occupation-number basis over a fixed list of configurations.
#[derive(Debug, Clone)]
pub struct FockBasis {
    atoms: usize,
    sites: usize,
    boundary: Boundary,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl FockBasis {
    fn from_states(atoms: usize, sites: usize, boundary: Boundary, states: Vec<Vec<u8>>) -> Self {
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            atoms,
            sites,
            boundary,
            states,
            index,
        }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Index of the one-atom-per-site state, when `N = M`.
    pub fn unit_filled_index(&self) -> Option<usize> {
        self.index_of(&vec![1; self.sites])
    }

    pub fn site_label(&self, i: usize) -> f64 {
        i as f64 - 0.5 * (self.sites as f64 - 1.0)
    }

    /// Bonds `(i, i+1)`, plus the wrap-around bond on a periodic ring of
    /// more than two sites.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.sites.saturating_sub(1))
            .map(|i| (i, i + 1))
            .collect();
        if self.boundary == Boundary::Periodic && self.sites > 2 {
            b.push((self.sites - 1, 0));
        }
        b
    }
}

/// `C(N+M−1, M−1)`, saturating.
pub fn fock_dimension(atoms: usize, sites: usize) -> usize {
    if sites == 0 {
        return usize::from(atoms == 0);
    }
    let (n, k) = (atoms + sites - 1, sites - 1);
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

/// All occupations of `sites` wells by `atoms` bosons, in descending
/// lexicographic order.
pub fn fock_basis(atoms: usize, sites: usize, boundary: Boundary) -> Result<FockBasis> {
    if sites == 0 {
        return domain("a lattice needs at least one site");
    }
    let dim = fock_dimension(atoms, sites);
    if dim > FOCK_CAP {
        return Err(Error::SizeCap { dim, cap: FOCK_CAP });
    }
    if atoms > u8::MAX as usize {
        return domain("too many atoms per site to represent");
    }
    let mut states = Vec::with_capacity(dim);
    let mut current = vec![0u8; sites];
    fn fill(site: usize, left: usize, current: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if site + 1 == current.len() {
            current[site] = left as u8;
            out.push(current.clone());
            return;
        }
        for k in (0..=left).rev() {
            current[site] = k as u8;
            fill(site + 1, left - k, current, out);
        }
    }
    fill(0, atoms, &mut current, &mut states);
    Ok(FockBasis::from_states(atoms, sites, boundary, states))
}

fn diagonal_energy(basis: &FockBasis, occ: &[u8], u: f64, delta: f64) -> f64 {
    occ.iter()
        .enumerate()
        .map(|(i, &n)| {
            let n = n as f64;
            let x = basis.site_label(i);
            0.5 * u * n * (n - 1.0) + delta * x * x * n
        })
        .sum()
}

/// Hopping images `(new occupation, amplitude)` of `occ` under
/// `−J Σ (a_i† a_k + a_k† a_i)`.
fn hops(basis: &FockBasis, occ: &[u8], j: f64) -> Vec<(Vec<u8>, f64)> {
    let mut out = Vec::new();
    for (a, b) in basis.bonds() {
        for (to, from) in [(a, b), (b, a)] {
            if occ[from] == 0 {
                continue;
            }
            let amp = -j * (occ[from] as f64).sqrt() * (occ[to] as f64 + 1.0).sqrt();
            let mut next = occ.to_vec();
            next[from] -= 1;
            next[to] += 1;
            out.push((next, amp));
        }
    }
    out
}

fn build_on(basis: &FockBasis, j: f64, u: f64, delta: f64, offset: f64) -> SparseOperator {
    let mut t = Vec::new();
    for (col, occ) in basis.states.iter().enumerate() {
        t.push((
            col,
            col,
            Complex64::new(diagonal_energy(basis, occ, u, delta) - offset, 0.0),
        ));
        if j != 0.0 {
            for (next, amp) in hops(basis, occ, j) {
                if let Some(row) = basis.index_of(&next) {
                    t.push((row, col, Complex64::new(amp, 0.0)));
                }
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), t, true)
}

/// Bose-Hubbard Hamiltonian with trap offsets `δ x²` on `basis`.
pub fn build_bose_hubbard(basis: &FockBasis, j: f64, u: f64, delta: f64) -> SparseOperator {
    build_on(basis, j, u, delta, 0.0)
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

fn residual(h: &SparseOperator, e: f64, v: &[Complex64]) -> f64 {
    let hv = h.mul_vec(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - b * e).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Lowest eigenpair of a Hermitian operator. Dense below [`DENSE_LIMIT`],
/// restarted Lanczos with full reorthogonalization above.
pub fn exact_ground_state(h: &SparseOperator) -> Result<GroundState> {
    if h.dim() == 0 {
        return domain("empty operator");
    }
    if h.dim() > FOCK_CAP {
        return Err(Error::SizeCap {
            dim: h.dim(),
            cap: FOCK_CAP,
        });
    }
    let scale = h.omega_max().max(f64::MIN_POSITIVE);
    let (energy, vector) = if h.dim() <= DENSE_LIMIT {
        dense_ground(h)
    } else {
        lanczos_ground(h, scale)?
    };
    let res = residual(h, energy, &vector);
    if res > 1e-8 * scale {
        return Err(Error::NoConvergence { residual: res });
    }
    Ok(GroundState {
        energy,
        vector,
        residual: res,
    })
}

fn dense_ground(h: &SparseOperator) -> (f64, Vec<Complex64>) {
    let eig = h.to_dense().symmetric_eigen();
    let (k, e) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    (e, eig.eigenvectors.column(k).iter().copied().collect())
}

fn lanczos_ground(h: &SparseOperator, scale: f64) -> Result<(f64, Vec<Complex64>)> {
    let dim = h.dim();
    let krylov = 120.min(dim);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|i| Complex64::new(1.0 + 0.1 * (i as f64).sin(), 0.0))
        .collect();
    let mut last_res = f64::INFINITY;
    for _restart in 0..40 {
        normalize(&mut start);
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for k in 0..krylov {
            let mut w = h.mul_vec(&basis[k]);
            alpha.push(dot(&basis[k], &w).re);
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
            // second pass keeps the basis orthogonal to rounding
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
            let b = norm(&w);
            if k + 1 == krylov || b < 1e-14 * scale {
                break;
            }
            beta.push(b);
            for x in &mut w {
                *x /= b;
            }
            basis.push(w);
        }
        let m = alpha.len();
        let tri = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let eig = tri.symmetric_eigen();
        let (k, e) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let y: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        let mut ritz = vec![Complex64::new(0.0, 0.0); dim];
        for (i, q) in basis.iter().take(m).enumerate() {
            axpy(Complex64::new(y[i], 0.0), q, &mut ritz);
        }
        normalize(&mut ritz);
        last_res = residual(h, e, &ritz);
        if last_res <= 1e-9 * scale {
            return Ok((e, ritz));
        }
        start = ritz;
    }
    Err(Error::NoConvergence { residual: last_res })
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(c: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = norm(v);
    for x in v {
        *x /= n;
    }
}

/// Default step for oracle evolution: a fifth of the stability cap.
pub fn default_oracle_dt(h: &SparseOperator) -> f64 {
    0.2 * integrator::max_step(h)
}

fn evolve_unit_filled(
    basis: &FockBasis,
    h: &SparseOperator,
    t_end: f64,
    dt: Option<f64>,
) -> Result<TrajectorySeries> {
    let target = basis
        .unit_filled_index()
        .ok_or_else(|| Error::Domain("unit filling needs N = M".into()))?;
    let mut psi = vec![Complex64::new(0.0, 0.0); basis.dim()];
    psi[target] = Complex64::new(1.0, 0.0);
    let dt = dt.unwrap_or_else(|| default_oracle_dt(h));
    propagate(h, &mut psi, target, t_end, dt)
}

/// Evolves the unit-filled state under the full Bose-Hubbard Hamiltonian and
/// records `|⟨unit-filled|ψ(t)⟩|²`.
pub fn exact_evolve_fidelity(
    basis: &FockBasis,
    j: f64,
    u: f64,
    delta: f64,
    t_end: f64,
    dt: Option<f64>,
) -> Result<TrajectorySeries> {
    if basis.atoms() != basis.sites() {
        return domain("exact fidelity evolution needs N = M");
    }
    let h = build_bose_hubbard(basis, j, u, delta);
    evolve_unit_filled(basis, &h, t_end, dt)
}

/// Unit-filled state plus every state with exactly one doubly occupied site
/// and one hole, on an open chain of `n` sites; `n(n−1) + 1` states with the
/// unit-filled state first.
pub fn double_occupancy_basis(n: usize) -> Result<FockBasis> {
    if n < 3 || n % 2 == 0 {
        return domain("single-double-occupancy basis needs odd N >= 3");
    }
    let dim = n * (n - 1) + 1;
    if dim > DOUBLE_OCCUPANCY_CAP {
        return Err(Error::SizeCap {
            dim,
            cap: DOUBLE_OCCUPANCY_CAP,
        });
    }
    let mut states = vec![vec![1u8; n]];
    for pair in 0..n {
        for hole in 0..n {
            if pair != hole {
                let mut occ = vec![1u8; n];
                occ[pair] = 2;
                occ[hole] = 0;
                states.push(occ);
            }
        }
    }
    Ok(FockBasis::from_states(n, n, Boundary::Open, states))
}

/// Bose-Hubbard Hamiltonian projected on [`double_occupancy_basis`], with
/// the unit-filled state as the zero of energy.
pub fn build_double_occupancy_hamiltonian(
    basis: &FockBasis,
    j: f64,
    u: f64,
    delta: f64,
) -> SparseOperator {
    let target = diagonal_energy(basis, &vec![1; basis.sites()], u, delta);
    build_on(basis, j, u, delta, target)
}

pub fn double_occupancy_evolve(
    n: usize,
    j: f64,
    u: f64,
    delta: f64,
    t_end: f64,
    dt: Option<f64>,
) -> Result<TrajectorySeries> {
    let basis = double_occupancy_basis(n)?;
    let h = build_double_occupancy_hamiltonian(&basis, j, u, delta);
    evolve_unit_filled(&basis, &h, t_end, dt)
}

/// First-order perturbative ground state written in the Fock basis of an
/// `N = M` chain: unit filling plus `√2 J / E` on every nearest-neighbor
/// pair-hole state, normalized.
pub fn perturbative_fock_state(
    basis: &FockBasis,
    j: f64,
    u: f64,
    delta: f64,
) -> Result<Vec<Complex64>> {
    let target = basis
        .unit_filled_index()
        .ok_or_else(|| Error::Domain("unit filling needs N = M".into()))?;
    let mut v = vec![Complex64::new(0.0, 0.0); basis.dim()];
    v[target] = Complex64::new(1.0, 0.0);
    for (a, b) in basis.bonds() {
        for (pair, hole) in [(a, b), (b, a)] {
            let mut occ = vec![1u8; basis.sites()];
            occ[pair] = 2;
            occ[hole] = 0;
            let (xp, xh) = (basis.site_label(pair), basis.site_label(hole));
            let e = u + delta * (xp * xp - xh * xh);
            if !(e > 0.0) {
                return domain("pair state energy is not positive");
            }
            if let Some(i) = basis.index_of(&occ) {
                v[i] += Complex64::new(SQRT_2 * j / e, 0.0);
            }
        }
    }
    normalize(&mut v);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        let b = fock_basis(2, 2, Boundary::Open).unwrap();
        assert_eq!(b.states(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(fock_basis(5, 5, Boundary::Open).unwrap().dim(), 126);
        assert_eq!(fock_basis(7, 7, Boundary::Open).unwrap().dim(), 1716);
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
    }

    #[test]
    fn size_cap_reports_count() {
        match fock_basis(12, 12, Boundary::Open) {
            Err(Error::SizeCap { dim, .. }) => assert_eq!(dim, 1_352_078),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn two_site_matrix() {
        let b = fock_basis(2, 2, Boundary::Open).unwrap();
        let (j, u) = (0.1, 1.0);
        let h = build_bose_hubbard(&b, j, u, 0.0).to_dense();
        let s = SQRT_2 * j;
        let expected = [[u, -s, 0.0], [-s, 0.0, -s], [0.0, -s, u]];
        for r in 0..3 {
            for c in 0..3 {
                assert!((h[(r, c)].re - expected[r][c]).abs() < 1e-15);
                assert_eq!(h[(r, c)].im, 0.0);
            }
        }
    }

    #[test]
    fn no_tunneling_is_diagonal() {
        let b = fock_basis(3, 3, Boundary::Open).unwrap();
        let (u, d) = (1.0, 0.01);
        let h = build_bose_hubbard(&b, 0.0, u, d);
        for (r, c, v) in h.entries() {
            assert_eq!(r, c);
            let occ = &b.states()[r];
            let expected: f64 = occ
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    let (n, x) = (n as f64, i as f64 - 1.0);
                    0.5 * u * n * (n - 1.0) + d * x * x * n
                })
                .sum();
            assert!((v.re - expected).abs() < 1e-15);
        }
        let g = exact_ground_state(&h).unwrap();
        assert!((g.energy - 2.0 * d).abs() < 1e-12);
        let unit = b.unit_filled_index().unwrap();
        assert!((g.vector[unit].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_and_periodic_bonds() {
        let b = fock_basis(4, 4, Boundary::Periodic).unwrap();
        assert_eq!(b.bonds().len(), 4);
        let h = build_bose_hubbard(&b, 0.03, 1.0, 0.0);
        assert!(h.hermiticity_defect() < 1e-12);
        assert_eq!(
            fock_basis(2, 2, Boundary::Periodic).unwrap().bonds().len(),
            1
        );
    }

    #[test]
    fn two_site_ground_energy() {
        let (j, u) = (0.1, 1.0);
        let b = fock_basis(2, 2, Boundary::Open).unwrap();
        let g = exact_ground_state(&build_bose_hubbard(&b, j, u, 0.0)).unwrap();
        let exact = (u - (u * u + 16.0 * j * j).sqrt()) / 2.0;
        assert!((g.energy / exact - 1.0).abs() < 1e-10);
        let j = u / 500.0;
        let g = exact_ground_state(&build_bose_hubbard(&b, j, u, 0.0)).unwrap();
        assert!((g.energy / (-4.0 * j * j / u) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        // 2002 states: just above the dense limit
        let b = fock_basis(5, 10, Boundary::Open).unwrap();
        assert!(b.dim() > DENSE_LIMIT);
        let h = build_bose_hubbard(&b, 0.2, 1.0, 0.01);
        let g = exact_ground_state(&h).unwrap();
        let (e, _) = dense_ground(&h);
        assert!((g.energy - e).abs() < 1e-9, "{} {e}", g.energy);
    }

    #[test]
    fn unit_filling_frozen_without_tunneling() {
        let b = fock_basis(3, 3, Boundary::Open).unwrap();
        let s = exact_evolve_fidelity(&b, 0.0, 1.0, 0.01, 10.0, Some(0.01)).unwrap();
        assert!(s.fidelity.iter().all(|&f| (f - 1.0).abs() < 1e-15));
    }

    #[test]
    fn double_occupancy_basis_shape() {
        let b = double_occupancy_basis(5).unwrap();
        assert_eq!(b.dim(), 21);
        assert_eq!(b.unit_filled_index(), Some(0));
        assert!(double_occupancy_basis(4).is_err());
        let h = build_double_occupancy_hamiltonian(&b, 0.01, 1.0, 1e-3);
        assert!(h.hermiticity_defect() < 1e-15);
        assert_eq!(h.get(0, 0).re, 0.0);
    }

    #[test]
    fn perturbative_state_is_normalized() {
        let b = fock_basis(4, 4, Boundary::Open).unwrap();
        let v = perturbative_fock_state(&b, 0.01, 1.0, 0.0).unwrap();
        assert!((norm(&v) - 1.0).abs() < 1e-14);
        let nonzero = v.iter().filter(|c| c.norm() > 0.0).count();
        assert_eq!(nonzero, 1 + 2 * 3);
    }
    #[test]
    fn nearest_neighbor_block_matches_register() {
        use crate::register::{build_basis, build_free_hamiltonian, Orientation};
        use crate::units::DerivedParams;
        let n = 7;
        let (j, delta) = (0.013, 2e-3);
        let fock = double_occupancy_basis(n).unwrap();
        let h = build_double_occupancy_hamiltonian(&fock, j, 1.0, delta);
        let reg = build_basis(n).unwrap();
        let p = DerivedParams {
            u_hz: 1.0,
            e_r_hz: 1.0,
            j,
            delta,
            kappa: 0.0,
            omega_m: 0.0,
            gamma_m: 0.0,
            vc_abs: 0.0,
            s_a: 0.0,
        };
        let free = build_free_hamiltonian(&reg, &p);
        // register index -> Fock index for T and every S state
        let mut map = vec![(0usize, 0usize)];
        for (bond, o) in reg.pair_states() {
            let left = (bond - reg.first_site()) as usize;
            let (pair, hole) = match o {
                Orientation::Plus => (left, left + 1),
                Orientation::Minus => (left + 1, left),
            };
            let mut occ = vec![1u8; n];
            occ[pair] = 2;
            occ[hole] = 0;
            map.push((reg.pair_index(bond, o), fock.index_of(&occ).unwrap()));
        }
        for &(ra, fa) in &map {
            for &(rb, fb) in &map {
                let d = (free.get(ra, rb) - h.get(fa, fb)).norm();
                assert!(d < 1e-12, "({ra},{rb}) vs ({fa},{fb}): {d}");
            }
        }
    }
}
