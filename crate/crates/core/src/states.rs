//! Probe states: single-mode Gaussian light and collective spin states.
//!
//! The optical probe is the displaced squeezed thermal state
//! `D(α) S(ξ) ρ_th S(ξ)† D(α)†` with `α = |α| e^{iζ}` and `ξ = r e^{iϑ}`.
//! Its eigenvectors are `D(α)S(ξ)|n⟩` with thermal weights
//! `p_n = n_th^n / (1 + n_th)^{n+1}`, which is what [`dsts_eigen`] returns.
//!
//! `D` and `S` are built as matrix exponentials of their truncated
//! generators, so they are exactly unitary on the retained space; any
//! truncation damage shows up as population near the cutoff edge and is
//! checked against [`TAIL_TOL`].

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{self, c64, fock_operators, spin_operators, DickeSpace, FockSpace, OperatorMatrix, Space};

/// Default threshold below which a thermal weight is treated as outside the
/// support of the state.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

/// Largest population allowed in the top band of retained Fock levels.
pub const TAIL_TOL: f64 = 1e-10;

/// Slack on `Σ p_i ≤ 1` and on orthonormality checks of eigenvectors.
pub const WEIGHT_SLACK: f64 = 1e-9;
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Automatic cutoff search never goes beyond this.
pub const MAX_AUTO_CUTOFF: usize = 4096;

/// Parameters `(|α|, ζ, r, ϑ, n_th)` of a displaced squeezed thermal state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub alpha_mag: f64,
    /// Displacement angle, radians.
    pub zeta: f64,
    pub r: f64,
    /// Squeezing angle, radians.
    pub theta_sq: f64,
    pub n_th: f64,
}

impl GaussianSpec {
    pub fn new(alpha_mag: f64, zeta: f64, r: f64, theta_sq: f64, n_th: f64) -> Result<Self> {
        let all = [alpha_mag, zeta, r, theta_sq, n_th];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("Gaussian state parameters must be finite".into()));
        }
        if alpha_mag < 0.0 || r < 0.0 || n_th < 0.0 {
            return Err(Error::InvalidParameter("|α|, r and n_th must be non-negative".into()));
        }
        Ok(Self { alpha_mag, zeta, r, theta_sq, n_th })
    }

    pub fn coherent(alpha_mag: f64) -> Result<Self> {
        Self::new(alpha_mag, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn squeezed_vacuum(r: f64) -> Result<Self> {
        Self::new(0.0, 0.0, r, 0.0, 0.0)
    }

    /// Pure displaced squeezed vacuum with `|α|² = alpha_sq`,
    /// `sinh²r = sinh_sq_r` and phase condition `τ = cos(2ζ - ϑ) = tau`
    /// (realized with `ϑ = 0`).
    pub fn displaced_squeezed(alpha_sq: f64, sinh_sq_r: f64, tau: f64) -> Result<Self> {
        if alpha_sq < 0.0 || sinh_sq_r < 0.0 {
            return Err(Error::InvalidParameter("|α|² and sinh²r must be non-negative".into()));
        }
        if !(-1.0..=1.0).contains(&tau) {
            return Err(Error::InvalidParameter(format!("τ = {tau} outside [-1, 1]")));
        }
        Self::new(alpha_sq.sqrt(), tau.acos() / 2.0, sinh_sq_r.sqrt().asinh(), 0.0, 0.0)
    }

    pub fn alpha(&self) -> c64 {
        c64::from_polar(self.alpha_mag, self.zeta)
    }

    pub fn xi(&self) -> c64 {
        c64::from_polar(self.r, self.theta_sq)
    }

    pub fn sinh_sq_r(&self) -> f64 {
        self.r.sinh().powi(2)
    }

    /// `⟨a†a⟩ = |α|² + sinh²r + n_th(1 + 2 sinh²r)`.
    pub fn mean_photons(&self) -> f64 {
        let s = self.sinh_sq_r();
        self.alpha_mag.powi(2) + s + self.n_th * (1.0 + 2.0 * s)
    }

    /// Phase condition `τ = cos(2ζ - ϑ)`; derived, never stored.
    pub fn tau(&self) -> f64 {
        (2.0 * self.zeta - self.theta_sq).cos()
    }

    /// Squeezing-to-displacement ratio `sinh²r / |α|²`, undefined for `|α| = 0`.
    pub fn beta(&self) -> Option<f64> {
        (self.alpha_mag > 0.0).then(|| self.sinh_sq_r() / self.alpha_mag.powi(2))
    }

    pub fn is_pure(&self) -> bool {
        self.n_th == 0.0
    }

    /// Thermal weight `p_n`.
    pub fn thermal_weight(&self, n: usize) -> f64 {
        if self.n_th == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let q = self.n_th / (1.0 + self.n_th);
        q.powi(n as i32) / (1.0 + self.n_th)
    }

    /// Smallest cutoff keeping `1 - TAIL_TOL` of the thermal mass.
    pub fn thermal_cutoff(&self) -> usize {
        if self.n_th == 0.0 {
            return 0;
        }
        let q = self.n_th / (1.0 + self.n_th);
        // retained mass is 1 - q^{c+1}
        let c = (TAIL_TOL.ln() / q.ln()).ceil() - 1.0;
        c.max(0.0) as usize
    }
}

/// Atomic probe state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpinStateSpec {
    /// Spin-coherent state `|θ, φ⟩`.
    Coherent { theta: f64, phi: f64 },
    /// One-axis-twisted state `exp(-i χ/2 Jx²)|j, -j⟩`.
    Oat { chi: f64 },
    /// Dicke state `|j, j - p⟩`.
    Dicke { p: usize },
}

/// Eigen-decomposition `ρ = Σ p_i |Ψ_i⟩⟨Ψ_i|` restricted to a support.
#[derive(Clone, Debug)]
pub struct MixedStateEigen {
    space: Space,
    weights: Vec<f64>,
    /// One eigenvector per column.
    vectors: Mat<c64>,
}

impl MixedStateEigen {
    pub fn new(space: Space, weights: Vec<f64>, vectors: Mat<c64>) -> Result<Self> {
        if vectors.nrows() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: vectors.nrows() });
        }
        if vectors.ncols() != weights.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), found: vectors.ncols() });
        }
        if weights.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidParameter("weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + WEIGHT_SLACK {
            return Err(Error::NonNormalizedSupport { total });
        }
        let gram = vectors.adjoint() * &vectors;
        let k = weights.len();
        let dev = hilbert::max_abs_diff(gram.as_ref(), Mat::<c64>::identity(k, k).as_ref());
        if dev > ORTHONORMAL_TOL {
            return Err(Error::InvalidParameter(format!("eigenvectors not orthonormal (deviation {dev:e})")));
        }
        Ok(Self { space, weights, vectors })
    }

    pub fn pure(space: Space, vector: &[c64]) -> Result<Self> {
        let v = Mat::from_fn(vector.len(), 1, |i, _| vector[i]);
        Self::new(space, vec![1.0], v)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &Mat<c64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `ρ ⊗ |s⟩⟨s|` with this state as the slow (outer) factor.
    pub fn tensor_pure(&self, inner: &[c64], inner_space: Space) -> Result<Self> {
        if inner.len() != inner_space.dim() {
            return Err(Error::DimensionMismatch { expected: inner_space.dim(), found: inner.len() });
        }
        let d_in = inner.len();
        let rows = self.vectors.nrows() * d_in;
        let vectors = Mat::from_fn(rows, self.len(), |r, k| self.vectors[(r / d_in, k)] * inner[r % d_in]);
        Ok(Self {
            space: Space::Tensor(Box::new(self.space.clone()), Box::new(inner_space)),
            weights: self.weights.clone(),
            vectors,
        })
    }

    /// Diagonal of `ρ` in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        let n = self.vectors.nrows();
        let mut out = vec![0.0; n];
        for (k, &p) in self.weights.iter().enumerate() {
            let col = self.vectors.col(k);
            for (i, o) in out.iter_mut().enumerate() {
                *o += p * col[i].norm_sqr();
            }
        }
        out
    }
}

/// Number of top Fock levels watched for truncation damage.
fn edge_band(space: FockSpace) -> usize {
    (space.dim() / 10).max(2).min(space.dim())
}

fn edge_mass(populations: &[f64]) -> f64 {
    let dim = populations.len();
    let band = (dim / 10).max(2).min(dim);
    populations[dim - band..].iter().sum()
}

fn check_vacuum_image(op: &OperatorMatrix, space: FockSpace) -> Result<()> {
    let band = edge_band(space);
    let dim = space.dim();
    let col = op.elements().col(0);
    let mass: f64 = (dim - band..dim).map(|i| col[i].norm_sqr()).sum();
    if mass > TAIL_TOL {
        return Err(Error::Truncation { tail_mass: mass, required_cutoff: grow(space.cutoff()) });
    }
    Ok(())
}

fn grow(cutoff: usize) -> usize {
    (cutoff * 3).div_ceil(2).max(cutoff + 8)
}

/// Displacement `D(α) = exp(α a† - α* a)` on a truncated mode.
pub fn displacement_op(alpha: c64, space: FockSpace) -> Result<OperatorMatrix> {
    let ops = fock_operators(space);
    // D = exp(-i K) with K = i(α a† - α* a) Hermitian.
    let k = ops
        .a_dagger
        .scale_complex(alpha * c64::new(0.0, 1.0))
        .add(&ops.a.scale_complex(-alpha.conj() * c64::new(0.0, 1.0)))?;
    let k = OperatorMatrix::hermitian(Space::Fock(space), k.into_elements())?;
    let d = hilbert::expm_i(&k, 1.0)?;
    check_vacuum_image(&d, space)?;
    Ok(d)
}

/// Squeezing `S(ξ) = exp(-ξ a†²/2 + ξ* a²/2)` on a truncated mode.
pub fn squeeze_op(xi: c64, space: FockSpace) -> Result<OperatorMatrix> {
    let ops = fock_operators(space);
    let a2 = ops.a.matmul(&ops.a)?;
    let ad2 = ops.a_dagger.matmul(&ops.a_dagger)?;
    let i = c64::new(0.0, 1.0);
    let k = ad2.scale_complex(-xi * 0.5 * i).add(&a2.scale_complex(xi.conj() * 0.5 * i))?;
    let k = OperatorMatrix::hermitian(Space::Fock(space), k.into_elements())?;
    let s = hilbert::expm_i(&k, 1.0)?;
    check_vacuum_image(&s, space)?;
    Ok(s)
}

/// Eigenpairs `(p_n, D(α)S(ξ)|n⟩)` of the displaced squeezed thermal state,
/// keeping the `n` with `p_n > support_tol`.
pub fn dsts_eigen(spec: &GaussianSpec, space: FockSpace, support_tol: f64) -> Result<MixedStateEigen> {
    let needed = spec.thermal_cutoff();
    if space.cutoff() < needed {
        return Err(Error::InsufficientCutoff { required_cutoff: needed });
    }
    let d = displacement_op(spec.alpha(), space)?;
    let s = squeeze_op(spec.xi(), space)?;
    let ds = d.matmul(&s)?;
    let support: Vec<usize> = (0..space.dim()).filter(|&n| spec.thermal_weight(n) > support_tol).collect();
    let weights: Vec<f64> = support.iter().map(|&n| spec.thermal_weight(n)).collect();
    let vectors = Mat::from_fn(space.dim(), support.len(), |i, k| ds.get(i, support[k]));
    let state = MixedStateEigen::new(Space::Fock(space), weights, vectors)?;
    let mass = edge_mass(&state.populations());
    if mass > TAIL_TOL {
        return Err(Error::Truncation { tail_mass: mass, required_cutoff: grow(space.cutoff()) });
    }
    Ok(state)
}

/// Initial cutoff guess: `n̄ + 8√Var(n) + 10`, raised to cover the thermal
/// mass and the geometric tail of the most anti-squeezed quadrature.
pub fn estimate_cutoff(spec: &GaussianSpec) -> usize {
    let m = optical_moments(spec);
    let gaussian = m.n_bar + 8.0 * m.var_n.sqrt() + 10.0;
    let thermal = spec.thermal_cutoff() as f64 + 10.0;
    // the photon tail decays like q^n with q = (V - 1/2)/(V + 1/2) for the
    // largest quadrature variance V (vacuum = 1/2)
    let v = (2.0 * spec.n_th + 1.0) * (2.0 * spec.r).exp() / 2.0;
    let q = (v - 0.5) / (v + 0.5);
    let geometric = if q > 1e-12 {
        let n_tail = TAIL_TOL.ln() / q.ln();
        (spec.alpha_mag + n_tail.sqrt()).powi(2) * 1.15 + 10.0
    } else {
        0.0
    };
    gaussian.max(thermal).max(geometric).ceil().max(2.0) as usize
}

/// [`dsts_eigen`] on a cutoff found automatically: start from
/// [`estimate_cutoff`] and grow until the edge population is below
/// [`TAIL_TOL`].
pub fn dsts_eigen_auto(spec: &GaussianSpec, support_tol: f64) -> Result<MixedStateEigen> {
    dsts_eigen_auto_capped(spec, support_tol, MAX_AUTO_CUTOFF)
}

/// [`dsts_eigen_auto`] that fails once the cutoff would exceed `max_cutoff`.
pub fn dsts_eigen_auto_capped(spec: &GaussianSpec, support_tol: f64, max_cutoff: usize) -> Result<MixedStateEigen> {
    let mut cutoff = estimate_cutoff(spec);
    loop {
        if cutoff > max_cutoff {
            return Err(Error::CutoffLimit { required_cutoff: cutoff, max: max_cutoff });
        }
        match dsts_eigen(spec, FockSpace::new(cutoff)?, support_tol) {
            Err(Error::Truncation { required_cutoff, .. }) => cutoff = required_cutoff.max(grow(cutoff)),
            Err(Error::InsufficientCutoff { required_cutoff }) => cutoff = required_cutoff,
            other => return other,
        }
    }
}

/// Fock cutoff of a state produced by [`dsts_eigen`] or [`dsts_eigen_auto`].
pub fn fock_cutoff_of(state: &MixedStateEigen) -> Option<usize> {
    match state.space() {
        Space::Fock(f) => Some(f.cutoff()),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OpticalMoments {
    pub n_bar: f64,
    pub var_n: f64,
}

/// Closed-form photon-number mean and variance of a displaced squeezed
/// thermal state.
pub fn optical_moments(spec: &GaussianSpec) -> OpticalMoments {
    let (r, nth) = (spec.r, spec.n_th);
    let a2 = spec.alpha_mag.powi(2);
    let sh2 = (2.0 * r).sinh();
    let ch2 = (2.0 * r).cosh();
    let var_n = sh2 * sh2 / 2.0 * (2.0 * nth * nth + 2.0 * nth + 1.0)
        + a2 * (2.0 * nth + 1.0) * (ch2 - sh2 * spec.tau())
        + (1.0 + 2.0 * spec.sinh_sq_r()).powi(2) * nth * (nth + 1.0);
    OpticalMoments { n_bar: spec.mean_photons(), var_n }
}

/// Photon-number distribution of a pure optical state, stored from `offset`.
#[derive(Clone, Debug)]
pub struct PhotonDistribution {
    pub offset: usize,
    pub probs: Vec<f64>,
}

impl PhotonDistribution {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(k, &p)| (self.offset + k, p))
    }

    pub fn max_n(&self) -> usize {
        self.offset + self.probs.len().saturating_sub(1)
    }
}

/// `P(n)` of a pure Gaussian state.
///
/// Coherent states use their Fock amplitudes `|⟨n|α⟩|²` directly, which
/// reaches photon numbers far beyond what a dense truncated operator can
/// hold; squeezed states go through [`dsts_eigen_auto`].
pub fn photon_distribution(spec: &GaussianSpec) -> Result<PhotonDistribution> {
    if !spec.is_pure() {
        return Err(Error::InvalidParameter("photon distribution requires n_th = 0".into()));
    }
    if spec.r == 0.0 {
        return Ok(poisson(spec.alpha_mag.powi(2)));
    }
    let state = dsts_eigen_auto(spec, DEFAULT_SUPPORT_TOL)?;
    Ok(PhotonDistribution { offset: 0, probs: state.populations() })
}

fn poisson(mean: f64) -> PhotonDistribution {
    if mean == 0.0 {
        return PhotonDistribution { offset: 0, probs: vec![1.0] };
    }
    let width = 12.0 * mean.sqrt() + 30.0;
    let lo = (mean - width).floor().max(0.0) as usize;
    let hi = (mean + width).ceil() as usize;
    let ln_mean = mean.ln();
    let mut probs: Vec<f64> =
        (lo..=hi).map(|n| (-mean + n as f64 * ln_mean - ln_factorial(n)).exp()).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    PhotonDistribution { offset: lo, probs }
}

/// `ln n!`, exact summation below 20 and a Stirling series above.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 20 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    // ln Γ(x)
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
        - 1.0 / (1680.0 * x.powi(7))
}

/// Spin-coherent state `⊗_i (cos θ/2 |↑⟩ + e^{iφ} sin θ/2 |↓⟩)` in the
/// Dicke basis: amplitude of `|p⟩ = |j, j-p⟩` is
/// `√C(N,p) cos^{N-p}(θ/2) (e^{iφ} sin θ/2)^p`.
pub fn spin_coherent(theta: f64, phi: f64, space: DickeSpace) -> Vec<c64> {
    let n = space.n_atoms();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let mut binom = 1.0f64;
    (0..=n)
        .map(|p| {
            if p > 0 {
                binom *= (n - p + 1) as f64 / p as f64;
            }
            let mag = binom.sqrt() * c.powi((n - p) as i32) * s.powi(p as i32);
            c64::from_polar(mag, phi * p as f64)
        })
        .collect()
}

/// One-axis-twisted state `exp(-i (χ/2) Jx²)|j, -j⟩`.
pub fn oat_state(chi: f64, space: DickeSpace) -> Result<Vec<c64>> {
    let ops = spin_operators(space);
    let jx2 = ops.jx.matmul(&ops.jx)?;
    let jx2 = OperatorMatrix::hermitian(Space::Dicke(space), jx2.into_elements())?;
    let u = hilbert::expm_i(&jx2, chi / 2.0)?;
    let mut ground = vec![c64::new(0.0, 0.0); space.dim()];
    ground[space.n_atoms()] = c64::new(1.0, 0.0);
    let mut psi = u.apply(&ground)?;
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    Ok(psi)
}

pub fn dicke_state(p: usize, space: DickeSpace) -> Result<Vec<c64>> {
    if p > space.n_atoms() {
        return Err(Error::InvalidParameter(format!("Dicke index {p} exceeds N = {}", space.n_atoms())));
    }
    let mut v = vec![c64::new(0.0, 0.0); space.dim()];
    v[p] = c64::new(1.0, 0.0);
    Ok(v)
}

pub fn spin_state(spec: &SpinStateSpec, space: DickeSpace) -> Result<Vec<c64>> {
    match *spec {
        SpinStateSpec::Coherent { theta, phi } => Ok(spin_coherent(theta, phi, space)),
        SpinStateSpec::Oat { chi } => oat_state(chi, space),
        SpinStateSpec::Dicke { p } => dicke_state(p, space),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpinMoments {
    pub jz_mean: f64,
    pub jz2_mean: f64,
    pub var_jz: f64,
}

/// Closed-form `⟨Jz⟩`, `⟨Jz²⟩`, `Var(Jz)`.
///
/// For the twisted state `⟨Jz⟩ = -(N/2) cos^{N-1}(χ/2)`, so that
/// `⟨Jz²⟩ = (N/8)[(N+1) + (N-1) cos^{N-2} χ]`.
pub fn spin_moments(spec: &SpinStateSpec, n_atoms: usize) -> SpinMoments {
    let n = n_atoms as f64;
    let (jz_mean, var_jz) = match *spec {
        SpinStateSpec::Coherent { theta, .. } => (n / 2.0 * theta.cos(), n / 4.0 * theta.sin().powi(2)),
        SpinStateSpec::Oat { chi } => {
            // (N-1)cos^{N-2}χ vanishes identically for a single spin
            let twist = if n_atoms >= 2 { (n - 1.0) * chi.cos().powi(n_atoms as i32 - 2) } else { 0.0 };
            let half = (chi / 2.0).cos();
            let var = n / 8.0 * (twist - 2.0 * n * half.powi(2 * n_atoms as i32 - 2) + n + 1.0);
            (-n / 2.0 * half.powi(n_atoms as i32 - 1), var)
        }
        SpinStateSpec::Dicke { p } => (n / 2.0 - p as f64, 0.0),
    };
    SpinMoments { jz_mean, jz2_mean: var_jz + jz_mean * jz_mean, var_jz }
}
