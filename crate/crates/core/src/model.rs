//! Tavis-Cummings Hamiltonians, the sensing generator and propagators.
//!
//! Joint states live on `fock ⊗ dicke` with the photon number as the slow
//! index: `|n, p⟩ ↦ n (N + 1) + p`, where `p` labels `m = N/2 - p`.

use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, c64, DiagonalOperator, DickeSpace, FockSpace, OperatorMatrix, Space};

/// System parameters in angular units (rad/s) and seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega0: f64,
    pub omega_a: f64,
    pub g: f64,
    pub h: f64,
    pub t: f64,
}

impl SystemParams {
    pub fn new(omega0: f64, omega_a: f64, g: f64, h: f64, t: f64) -> Result<Self> {
        if [omega0, omega_a, g, h, t].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("system parameters must be finite".into()));
        }
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("negative evolution time {t}")));
        }
        Ok(Self { omega0, omega_a, g, h, t })
    }

    /// Frequencies given as `ν = ω/2π` in Hz.
    pub fn from_hz(nu0: f64, nu_a: f64, g_hz: f64, h_hz: f64, t: f64) -> Result<Self> {
        let w = 2.0 * PI;
        Self::new(w * nu0, w * nu_a, w * g_hz, w * h_hz, t)
    }

    /// `ω0/2π = 6.9 GHz`, `ωa/2π = 6.89 GHz`, `g/2π = 1.05 MHz`,
    /// `h/2π = 0.1 mHz` at the given time.
    pub fn fig2(t: f64) -> Self {
        Self::from_hz(6.9e9, 6.89e9, 1.05e6, 1e-4, t).expect("constant parameters are valid")
    }

    pub fn with_t(self, t: f64) -> Self {
        Self { t, ..self }
    }

    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }

    /// Moves `ωa` so that `Δ / (g√N) = ratio` with `Δ > 0`.
    pub fn with_detuning_ratio(self, ratio: f64, n_atoms: usize) -> Self {
        let delta = ratio * self.g * (n_atoms as f64).sqrt();
        Self { omega_a: self.omega0 + self.h - delta, ..self }
    }

    /// `Δ = ω0 - ωa + h`.
    pub fn delta(&self) -> f64 {
        self.omega0 - self.omega_a + self.h
    }

    /// `ω = ω0 + h`.
    pub fn omega(&self) -> f64 {
        self.omega0 + self.h
    }

    pub fn large_detuning_ratio(&self, n_atoms: usize) -> f64 {
        self.delta().abs() / (self.g * (n_atoms as f64).sqrt())
    }

    /// `2g²/Δ²`; multiplied by `n̄` this is the x-axis of the sensing curves.
    pub fn dispersive_ratio(&self) -> Result<f64> {
        let d = self.checked_delta()?;
        Ok(2.0 * self.g * self.g / (d * d))
    }

    /// `g⁴/Δ⁴`.
    pub fn g4_over_delta4(&self) -> Result<f64> {
        let d = self.checked_delta()?;
        Ok((self.g / d).powi(4))
    }

    pub fn checked_delta(&self) -> Result<f64> {
        let d = self.delta();
        if d == 0.0 {
            return Err(Error::ZeroDetuning);
        }
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// `(h+ω0)Jz + ωa a†a + g(a†J- + aJ+)`.
    FullTC,
    /// `ωJz + ωa a†a + (g²/Δ)(2 Jz a†a + J+J-)`.
    EffectiveS,
    /// `ωJz + ωa a†a + (2g²/Δ) Jz a†a`.
    Effective,
}

fn joint_index(n: usize, p: usize, dicke: DickeSpace) -> usize {
    n * dicke.dim() + p
}

/// `⟨j, m-1| J- |j, m⟩`.
fn lowering(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m - 1.0)).max(0.0).sqrt()
}

/// Diagonal of an effective model, optionally without the frame energy
/// `ωa (a†a + Jz)` which both models conserve.
fn effective_diagonal(kind: ModelKind, params: &SystemParams, fock: FockSpace, dicke: DickeSpace, rotating: bool) -> Result<Vec<f64>> {
    let delta = params.checked_delta()?;
    let j = dicke.j();
    let k = params.g * params.g / delta;
    let (w_spin, w_field) = if rotating { (params.omega() - params.omega_a, 0.0) } else { (params.omega(), params.omega_a) };
    let mut diag = Vec::with_capacity(fock.dim() * dicke.dim());
    for n in 0..fock.dim() {
        for p in 0..dicke.dim() {
            let m = dicke.m(p);
            let nf = n as f64;
            let mut e = w_spin * m + w_field * nf + 2.0 * k * m * nf;
            if kind == ModelKind::EffectiveS {
                // J+J- = j(j+1) - m² + m
                e += k * (j * (j + 1.0) - m * m + m);
            }
            diag.push(e);
        }
    }
    Ok(diag)
}

/// Model Hamiltonian on `fock ⊗ dicke`.
pub fn hamiltonian(kind: ModelKind, params: &SystemParams, fock: FockSpace, dicke: DickeSpace) -> Result<OperatorMatrix> {
    let space = Space::joint(fock, dicke);
    match kind {
        ModelKind::FullTC => {
            let dim = space.dim();
            let mut h = Mat::<c64>::zeros(dim, dim);
            let j = dicke.j();
            for n in 0..fock.dim() {
                for p in 0..dicke.dim() {
                    let m = dicke.m(p);
                    let i = joint_index(n, p, dicke);
                    h[(i, i)] = c64::new(params.omega() * m + params.omega_a * n as f64, 0.0);
                    // a†J- : |n, m⟩ → |n+1, m-1⟩
                    if n < fock.cutoff() && p < dicke.n_atoms() {
                        let v = params.g * ((n + 1) as f64).sqrt() * lowering(j, m);
                        let k = joint_index(n + 1, p + 1, dicke);
                        h[(k, i)] = c64::new(v, 0.0);
                        h[(i, k)] = c64::new(v, 0.0);
                    }
                }
            }
            OperatorMatrix::hermitian(space, h)
        }
        _ => OperatorMatrix::from_real_diagonal(space, &effective_diagonal(kind, params, fock, dicke, false)?),
    }
}

/// Sensing generator `H_h = (2g² a†a/Δ² - 1) t Jz`, diagonal in the product basis.
pub fn generator_diagonal(params: &SystemParams, fock: FockSpace, dicke: DickeSpace) -> Result<DiagonalOperator> {
    let x = params.dispersive_ratio()?;
    let mut diag = Vec::with_capacity(fock.dim() * dicke.dim());
    for n in 0..fock.dim() {
        for p in 0..dicke.dim() {
            diag.push((x * n as f64 - 1.0) * params.t * dicke.m(p));
        }
    }
    DiagonalOperator::new(Space::joint(fock, dicke), diag)
}

pub fn generator(params: &SystemParams, fock: FockSpace, dicke: DickeSpace) -> Result<OperatorMatrix> {
    Ok(generator_diagonal(params, fock, dicke)?.to_dense())
}

/// `i [∂_h U†(h)] U(h)` for `U = exp(-i H_eff(h) t)`, by central differences
/// with step `step` and one Richardson extrapolation.
pub fn generator_finite_difference(params: &SystemParams, fock: FockSpace, dicke: DickeSpace, step: f64) -> Result<Mat<c64>> {
    let u = |h: f64| -> Result<OperatorMatrix> {
        let ham = hamiltonian(ModelKind::Effective, &params.with_h(h), fock, dicke)?;
        hilbert::expm_i(&ham, params.t)
    };
    let central = |d: f64| -> Result<Mat<c64>> {
        let plus = u(params.h + d)?.into_elements();
        let minus = u(params.h - d)?.into_elements();
        let k = 1.0 / (2.0 * d);
        Ok(Mat::from_fn(plus.nrows(), plus.ncols(), |r, c| (plus[(r, c)] - minus[(r, c)]) * k))
    };
    let coarse = central(step)?;
    let fine = central(step / 2.0)?;
    let du = Mat::from_fn(fine.nrows(), fine.ncols(), |r, c| (fine[(r, c)] * 4.0 - coarse[(r, c)]) / 3.0);
    let u0 = u(params.h)?.into_elements();
    let prod = du.adjoint() * &u0;
    Ok(Mat::from_fn(prod.nrows(), prod.ncols(), |r, c| prod[(r, c)] * c64::new(0.0, 1.0)))
}

/// Invariant subspace of the full model with `n + m + N/2 = n_ex`.
#[derive(Clone, Debug)]
pub struct ExcitationBlock {
    pub n_ex: usize,
    /// Joint-space indices spanned by the block, increasing `p`.
    pub indices: Vec<usize>,
    pub matrix: OperatorMatrix,
}

/// Full TC split into excitation-number blocks. With `rotating` the frame
/// energy `ωa (a†a + Jz)` is dropped, which changes every block by a
/// multiple of the identity only.
pub fn excitation_blocks_in_frame(params: &SystemParams, fock: FockSpace, dicke: DickeSpace, rotating: bool) -> Vec<ExcitationBlock> {
    let big_n = dicke.n_atoms();
    let j = dicke.j();
    let (w_spin, w_field) = if rotating { (params.omega() - params.omega_a, 0.0) } else { (params.omega(), params.omega_a) };
    (0..=fock.cutoff() + big_n)
        .map(|n_ex| {
            // members (n, p) with n = n_ex - N + p
            let members: Vec<(usize, usize)> = (0..=big_n)
                .filter_map(|p| (n_ex + p).checked_sub(big_n).filter(|&n| n <= fock.cutoff()).map(|n| (n, p)))
                .collect();
            let d = members.len();
            let mut h = Mat::<c64>::zeros(d, d);
            for (a, &(n, p)) in members.iter().enumerate() {
                let m = dicke.m(p);
                h[(a, a)] = c64::new(w_spin * m + w_field * n as f64, 0.0);
                if a + 1 < d {
                    let v = params.g * ((n + 1) as f64).sqrt() * lowering(j, m);
                    h[(a + 1, a)] = c64::new(v, 0.0);
                    h[(a, a + 1)] = c64::new(v, 0.0);
                }
            }
            let indices = members.iter().map(|&(n, p)| joint_index(n, p, dicke)).collect();
            let matrix = OperatorMatrix::hermitian(Space::Plain(d), h).expect("block is Hermitian by construction");
            ExcitationBlock { n_ex, indices, matrix }
        })
        .filter(|b| !b.indices.is_empty())
        .collect()
}

pub fn excitation_blocks(params: &SystemParams, fock: FockSpace, dicke: DickeSpace) -> Vec<ExcitationBlock> {
    excitation_blocks_in_frame(params, fock, dicke, false)
}

/// Eigenvalues of every block, concatenated and sorted.
pub fn block_spectrum(blocks: &[ExcitationBlock]) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for b in blocks {
        all.extend(hilbert::eigh(&b.matrix)?.values);
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Exact block propagator of the full model.
pub struct BlockPropagator {
    dim: usize,
    blocks: Vec<(Vec<usize>, f64, hilbert::Eigh)>,
}

impl BlockPropagator {
    pub fn new(blocks: &[ExcitationBlock], dim: usize) -> Result<Self> {
        let blocks = blocks
            .par_iter()
            .map(|b| {
                // diagonalize around the block mean so the large common
                // energy never mixes with the splittings
                let d = b.indices.len();
                let shift = (0..d).map(|i| b.matrix.get(i, i).re).sum::<f64>() / d as f64;
                let centered = Mat::from_fn(d, d, |i, k| b.matrix.get(i, k) - if i == k { c64::new(shift, 0.0) } else { c64::new(0.0, 0.0) });
                let centered = OperatorMatrix::hermitian(Space::Plain(d), centered)?;
                Ok((b.indices.clone(), shift, hilbert::eigh(&centered)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, blocks })
    }

    pub fn evolve(&self, psi: &[c64], t: f64) -> Result<Vec<c64>> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: psi.len() });
        }
        let mut out = vec![c64::new(0.0, 0.0); self.dim];
        for (idx, shift, eig) in &self.blocks {
            let u = hilbert::phase_evolve(eig, t);
            let global = c64::from_polar(1.0, -shift * t);
            for (a, &ia) in idx.iter().enumerate() {
                let mut acc = c64::new(0.0, 0.0);
                for (b, &ib) in idx.iter().enumerate() {
                    acc += u[(a, b)] * psi[ib];
                }
                out[ia] = acc * global;
            }
        }
        Ok(out)
    }
}

/// `exp(-i diag t) ψ`.
pub fn evolve_diagonal(diagonal: &[f64], psi: &[c64], t: f64) -> Result<Vec<c64>> {
    if psi.len() != diagonal.len() {
        return Err(Error::DimensionMismatch { expected: diagonal.len(), found: psi.len() });
    }
    Ok(diagonal.iter().zip(psi).map(|(&e, &z)| z * c64::from_polar(1.0, -e * t)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelitySeries {
    pub times: Vec<f64>,
    pub effective_s: Vec<f64>,
    pub effective: Vec<f64>,
}

impl FidelitySeries {
    pub fn worst_infidelity(&self, kind: ModelKind) -> f64 {
        let series = match kind {
            ModelKind::EffectiveS => &self.effective_s,
            _ => &self.effective,
        };
        series.iter().map(|f| 1.0 - f).fold(0.0, f64::max)
    }
}

/// `F(t) = |⟨ψ_full(t)|ψ_eff(t)⟩|²` for both effective models.
///
/// All three Hamiltonians commute with `a†a + Jz`, so every propagation is
/// done in the frame rotating at `ωa`, which leaves the overlaps unchanged.
pub fn validate_effective(params: &SystemParams, initial: &[c64], fock: FockSpace, dicke: DickeSpace, t_grid: &[f64]) -> Result<FidelitySeries> {
    let dim = fock.dim() * dicke.dim();
    if initial.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: initial.len() });
    }
    let norm: f64 = initial.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("initial state has norm² {norm}")));
    }
    let full = BlockPropagator::new(&excitation_blocks_in_frame(params, fock, dicke, true), dim)?;
    let diag_s = effective_diagonal(ModelKind::EffectiveS, params, fock, dicke, true)?;
    let diag_e = effective_diagonal(ModelKind::Effective, params, fock, dicke, true)?;
    let overlap = |a: &[c64], b: &[c64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<c64>().norm_sqr();
    let rows = t_grid
        .par_iter()
        .map(|&t| {
            let psi = full.evolve(initial, t)?;
            let fs = overlap(&psi, &evolve_diagonal(&diag_s, initial, t)?);
            let fe = overlap(&psi, &evolve_diagonal(&diag_e, initial, t)?);
            Ok((fs, fe))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelitySeries {
        times: t_grid.to_vec(),
        effective_s: rows.iter().map(|r| r.0).collect(),
        effective: rows.iter().map(|r| r.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{commutator, fock_operators, max_abs, spin_operators, tensor};

    fn toy() -> SystemParams {
        SystemParams::new(1.0, 0.8, 0.03, 0.01, 1.0).unwrap()
    }

    fn spaces(c: usize, n: usize) -> (FockSpace, DickeSpace) {
        (FockSpace::new(c).unwrap(), DickeSpace::new(n).unwrap())
    }

    #[test]
    fn derived_frequencies() {
        let p = SystemParams::fig2(1e-6);
        assert!((p.delta() / (2.0 * PI) - 1.0e7).abs() < 1e-2);
        assert_eq!(p.omega(), p.omega0 + p.h);
        let r = p.large_detuning_ratio(4);
        assert!((r - 1e7 / (1.05e6 * 2.0)).abs() < 1e-6);
        let q = p.with_detuning_ratio(10.0, 4);
        assert!((q.large_detuning_ratio(4) - 10.0).abs() < 1e-6);
    }

    #[test]
    fn zero_detuning_rejected() {
        let p = SystemParams::new(1.0, 1.0, 0.1, 0.0, 1.0).unwrap();
        let (f, d) = spaces(2, 2);
        assert_eq!(hamiltonian(ModelKind::Effective, &p, f, d).unwrap_err(), Error::ZeroDetuning);
        assert_eq!(generator(&p, f, d).unwrap_err(), Error::ZeroDetuning);
        assert!(hamiltonian(ModelKind::FullTC, &p, f, d).is_ok());
    }

    #[test]
    fn decoupled_full_model_is_diagonal() {
        let p = SystemParams { g: 0.0, ..toy() };
        let (f, d) = spaces(3, 2);
        let h = hamiltonian(ModelKind::FullTC, &p, f, d).unwrap();
        for n in 0..4 {
            for q in 0..3 {
                let i = n * 3 + q;
                assert_eq!(h.get(i, i).re, p.omega() * d.m(q) + p.omega_a * n as f64);
            }
        }
        let off: f64 = (0..12).flat_map(|i| (0..12).map(move |k| (i, k))).filter(|(i, k)| i != k).map(|(i, k)| h.get(i, k).norm()).sum();
        assert_eq!(off, 0.0);
    }

    #[test]
    fn jaynes_cummings_element() {
        let p = toy();
        let (f, d) = spaces(1, 1);
        let h = hamiltonian(ModelKind::FullTC, &p, f, d).unwrap();
        // |n=0, ↑⟩ is index 0, |n=1, ↓⟩ is index 3
        assert!((h.get(0, 3).re - p.g).abs() < 1e-15);
    }

    fn joint_ops(f: FockSpace, d: DickeSpace) -> (OperatorMatrix, OperatorMatrix) {
        let num = tensor(&fock_operators(f).number, &OperatorMatrix::identity(Space::Dicke(d))).unwrap();
        let jz = tensor(&OperatorMatrix::identity(Space::Fock(f)), &spin_operators(d).jz).unwrap();
        (num, jz)
    }

    #[test]
    fn full_model_conserves_excitations() {
        let (f, d) = spaces(6, 3);
        let h = hamiltonian(ModelKind::FullTC, &toy(), f, d).unwrap();
        let (num, jz) = joint_ops(f, d);
        let c = commutator(&h, &num.add(&jz).unwrap()).unwrap();
        assert!(max_abs(c.as_ref()) <= 1e-12);
    }

    #[test]
    fn effective_models_commute_with_number_and_jz() {
        let (f, d) = spaces(6, 3);
        let (num, jz) = joint_ops(f, d);
        for kind in [ModelKind::Effective, ModelKind::EffectiveS] {
            let h = hamiltonian(kind, &toy(), f, d).unwrap();
            assert!(max_abs(commutator(&h, &num).unwrap().as_ref()) <= 1e-12);
            assert!(max_abs(commutator(&h, &jz).unwrap().as_ref()) <= 1e-12);
        }
    }

    #[test]
    fn effective_s_matches_operator_form() {
        let (f, d) = spaces(4, 3);
        let p = toy();
        let ops = spin_operators(d);
        let (num, jz) = joint_ops(f, d);
        let id_f = OperatorMatrix::identity(Space::Fock(f));
        let jpjm = tensor(&id_f, &ops.jp.matmul(&ops.jm).unwrap()).unwrap();
        let k = p.g * p.g / p.delta();
        let expected = jz
            .scale(p.omega())
            .add(&num.scale(p.omega_a))
            .unwrap()
            .add(&jz.matmul(&num).unwrap().scale(2.0 * k))
            .unwrap()
            .add(&jpjm.scale(k))
            .unwrap();
        let h = hamiltonian(ModelKind::EffectiveS, &p, f, d).unwrap();
        assert!(hilbert::max_abs_diff(h.elements(), expected.elements()) < 1e-12);
    }

    #[test]
    fn generator_elements() {
        let p = SystemParams::fig2(1e-6);
        let (f, d) = spaces(5, 4);
        let g = generator_diagonal(&p, f, d).unwrap();
        let x = p.dispersive_ratio().unwrap();
        for n in 0..6 {
            for q in 0..5 {
                let want = (x * n as f64 - 1.0) * p.t * d.m(q);
                assert_eq!(g.diagonal()[n * 5 + q], want);
            }
        }
        let zero = generator(&p.with_t(0.0), f, d).unwrap();
        assert_eq!(max_abs(zero.elements()), 0.0);
    }

    #[test]
    fn generator_matches_finite_difference() {
        let p = SystemParams::fig2(1e-6);
        let (f, d) = spaces(8, 3);
        let step = 1e-6 * p.delta().abs().max(p.omega0);
        let fd = generator_finite_difference(&p, f, d, step).unwrap();
        let exact = generator(&p, f, d).unwrap();
        let err = hilbert::max_abs_diff(fd.as_ref(), exact.elements());
        assert!(err <= 1e-6 * max_abs(exact.elements()), "{err}");
    }

    #[test]
    fn block_shapes() {
        let (f, d) = spaces(5, 1);
        let blocks = excitation_blocks(&toy(), f, d);
        let b1 = blocks.iter().find(|b| b.n_ex == 1).unwrap();
        assert_eq!(b1.matrix.dim(), 2);
        let (f, d) = spaces(10, 4);
        for b in excitation_blocks(&toy(), f, d) {
            if b.n_ex >= 4 && b.n_ex <= 10 {
                assert_eq!(b.matrix.dim(), 5);
            }
        }
    }

    #[test]
    fn block_spectrum_matches_full() {
        let (f, d) = spaces(7, 3);
        let p = toy();
        let full = hilbert::eigh(&hamiltonian(ModelKind::FullTC, &p, f, d).unwrap()).unwrap().values;
        let blocks = block_spectrum(&excitation_blocks(&p, f, d)).unwrap();
        assert_eq!(full.len(), blocks.len());
        for (a, b) in full.iter().zip(&blocks) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn block_propagator_matches_dense() {
        let (f, d) = spaces(5, 2);
        let p = toy();
        let h = hamiltonian(ModelKind::FullTC, &p, f, d).unwrap();
        let u = hilbert::expm_i(&h, 7.0).unwrap();
        let dim = f.dim() * d.dim();
        let psi: Vec<c64> = (0..dim).map(|i| c64::new(1.0 + i as f64, -(i as f64) * 0.5)).collect();
        let prop = BlockPropagator::new(&excitation_blocks(&p, f, d), dim).unwrap();
        let a = prop.evolve(&psi, 7.0).unwrap();
        let b = u.apply(&psi).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn decoupled_fidelity_is_one() {
        let p = SystemParams { g: 0.0, ..toy() };
        let (f, d) = spaces(6, 2);
        let dim = f.dim() * d.dim();
        let psi: Vec<c64> = (0..dim).map(|i| c64::new(1.0, i as f64) / (dim as f64 * (1.0 + (dim as f64 - 1.0) * (2.0 * dim as f64 - 1.0) / 6.0)).sqrt()).collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let psi: Vec<c64> = psi.iter().map(|z| z / norm.sqrt()).collect();
        let s = validate_effective(&p, &psi, f, d, &[0.0, 1.0, 50.0]).unwrap();
        for v in s.effective.iter().chain(&s.effective_s) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }
}
