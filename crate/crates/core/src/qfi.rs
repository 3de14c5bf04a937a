//! Quantum Fisher information for the field-strength parameter `h`.
//!
//! [`qfi_spectral`] evaluates the general eigen-decomposition formula for
//! any mixed state and Hermitian generator and serves as the oracle for the
//! closed forms below.

use faer::Mat;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hilbert::{c64, LinearOperator};
use crate::model::SystemParams;
use crate::states::{optical_moments, spin_moments, GaussianSpec, MixedStateEigen, SpinStateSpec, WEIGHT_SLACK};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "name", rename_all = "snake_case")]
pub enum QfiMethod {
    SpectralOracle,
    DstsClosedForm,
    ScenarioClosedForm(String),
}

/// A reference value reported next to a QFI, e.g. a scaling bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reference {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QfiReport {
    /// QFI in s² (units of 1/h² with h in rad/s).
    pub value: f64,
    pub method: QfiMethod,
    pub inputs: Value,
    pub cutoff_used: Option<usize>,
    pub references: Vec<Reference>,
}

impl QfiReport {
    fn closed(value: f64, method: QfiMethod, inputs: Value) -> Self {
        Self { value, method, inputs, cutoff_used: None, references: Vec::new() }
    }

    fn with_reference(mut self, name: &str, value: f64) -> Self {
        self.references.push(Reference { name: name.to_string(), value });
        self
    }

    /// Single-shot Cramér-Rao bound `1/√F`.
    pub fn qcrb(&self) -> f64 {
        1.0 / self.value.sqrt()
    }

    pub fn reference(&self, name: &str) -> Option<f64> {
        self.references.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

/// `F = Σ 4 p_i ⟨Ψ_i|H²|Ψ_i⟩ - Σ 8 p_i p_j/(p_i + p_j) |⟨Ψ_i|H|Ψ_j⟩|²`
/// over the eigenpairs with `p_i > support_tol`.
///
/// The generator is shifted by the state mean of `H` first; the formula is
/// invariant under `H → H - c` but the shifted sums cancel far less.
pub fn qfi_spectral<G: LinearOperator + ?Sized>(state: &MixedStateEigen, generator: &G, support_tol: f64) -> Result<QfiReport> {
    let dim = state.vectors().nrows();
    if generator.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: generator.dim() });
    }
    let total = state.total_weight();
    if (total - 1.0).abs() > WEIGHT_SLACK {
        return Err(Error::NonNormalizedSupport { total });
    }
    let support: Vec<usize> = (0..state.len()).filter(|&k| state.weights()[k] > support_tol).collect();
    let p: Vec<f64> = support.iter().map(|&k| state.weights()[k]).collect();
    let v = Mat::from_fn(dim, support.len(), |i, k| state.vectors()[(i, support[k])]);
    let hv = generator.apply_columns(v.as_ref());
    let m = v.adjoint() * &hv;
    let k = p.len();
    let psum: f64 = p.iter().sum();
    let shift = (0..k).map(|i| p[i] * m[(i, i)].re).sum::<f64>() / psum;

    let mut first = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        let norm2: f64 = (0..dim).map(|r| (hv[(r, i)] - v[(r, i)] * shift).norm_sqr()).sum();
        first += 4.0 * pi * norm2;
    }
    let mut second = 0.0;
    for i in 0..k {
        for j in 0..k {
            let mut mij = m[(i, j)];
            if i == j {
                mij -= c64::new(shift, 0.0);
            }
            second += 8.0 * p[i] * p[j] / (p[i] + p[j]) * mij.norm_sqr();
        }
    }
    let value = (first - second).max(0.0);
    Ok(QfiReport {
        value,
        method: QfiMethod::SpectralOracle,
        inputs: json!({ "dim": dim, "support": k, "support_tol": support_tol, "total_weight": total }),
        cutoff_used: None,
        references: Vec::new(),
    })
}

/// Closed-form QFI of a displaced squeezed thermal state times a spin
/// state under the dispersive model.
pub fn qfi_dsts_closed_form(gauss: &GaussianSpec, spin: &SpinStateSpec, n_atoms: usize, params: &SystemParams) -> Result<QfiReport> {
    let x = params.dispersive_ratio()?;
    let g4 = params.g4_over_delta4()?;
    let optics = optical_moments(gauss);
    let sm = spin_moments(spin, n_atoms);
    let (r, nth) = (gauss.r, gauss.n_th);
    let a2 = gauss.alpha_mag.powi(2);
    let t2 = params.t * params.t;
    let bracket = ((4.0 * r).cosh() * (2.0 * nth + 1.0).powi(2) + 1.0) / (4.0 * nth * (nth + 1.0) + 2.0)
        + 4.0 * a2 / (2.0 * nth + 1.0) * (1.0 + 2.0 * gauss.sinh_sq_r() - (2.0 * r).sinh() * gauss.tau());
    let value = 4.0
        * t2
        * ((1.0 - x * optics.n_bar).powi(2) * sm.var_jz + 4.0 * g4 * optics.var_n * sm.jz2_mean
            - 4.0 * g4 * nth * (nth + 1.0) * sm.jz_mean.powi(2) * bracket);
    let inputs = json!({ "gauss": gauss, "spin": spin, "n_atoms": n_atoms, "params": params });
    Ok(QfiReport::closed(value, QfiMethod::DstsClosedForm, inputs))
}

/// Coherent light with `|α|² = n̄` and a spin-coherent state at polar angle
/// `θ`. Carries the large-`n̄` asymptote `4(g⁴/Δ⁴)t²N n̄² sin²θ`.
pub fn qfi_cs(theta: f64, n_bar: f64, n_atoms: usize, params: &SystemParams) -> Result<QfiReport> {
    if !(n_bar >= 0.0) {
        return Err(Error::InvalidParameter(format!("n̄ = {n_bar} must be non-negative")));
    }
    let x = params.dispersive_ratio()?;
    let g4 = params.g4_over_delta4()?;
    let (n, t2) = (n_atoms as f64, params.t * params.t);
    let (s2, c2) = (theta.sin().powi(2), theta.cos().powi(2));
    let value = 4.0 * t2 * ((1.0 - x * n_bar).powi(2) * n / 4.0 * s2 + g4 * n_bar * n * (s2 + n * c2));
    let asymptote = 4.0 * g4 * t2 * n * n_bar * n_bar * s2;
    let inputs = json!({ "theta": theta, "n_bar": n_bar, "n_atoms": n_atoms, "params": params });
    Ok(QfiReport::closed(value, QfiMethod::ScenarioClosedForm("cs".into()), inputs).with_reference("asymptote", asymptote))
}

/// Squeezed vacuum with spins polarized along `+z`. Carries the bound
/// `8(g⁴/Δ⁴)t²N²n̄²` with `n̄ = sinh²r`.
pub fn qfi_svs(r: f64, n_atoms: usize, params: &SystemParams) -> Result<QfiReport> {
    let g4 = params.g4_over_delta4()?;
    let (n, t2) = (n_atoms as f64, params.t * params.t);
    let value = 2.0 * t2 * g4 * n * n * (2.0 * r).sinh().powi(2);
    let n_bar = r.sinh().powi(2);
    let bound = 8.0 * g4 * t2 * n * n * n_bar * n_bar;
    let inputs = json!({ "r": r, "n_bar": n_bar, "n_atoms": n_atoms, "params": params });
    Ok(QfiReport::closed(value, QfiMethod::ScenarioClosedForm("svs".into()), inputs).with_reference("bound", bound))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DsvsBounds {
    pub var_plus: f64,
    pub var_minus: f64,
    pub asymptotic: f64,
}

/// Lower bounds on `Var(a†a)` of a displaced squeezed vacuum in terms of
/// `β = sinh²r/|α|²`, `τ` and `n̄`. `β = ∞` is pure squeezing.
pub fn dsvs_var_bounds(beta: f64, tau: f64, n_bar: f64) -> Result<DsvsBounds> {
    if !(beta >= 0.0) || !(-1.0..=1.0).contains(&tau) || !(n_bar > 0.0) {
        return Err(Error::InvalidParameter(format!("bounds need β ≥ 0, τ ∈ [-1, 1], n̄ > 0; got ({beta}, {tau}, {n_bar})")));
    }
    if beta.is_infinite() {
        let v = 2.0 * n_bar * n_bar;
        return Ok(DsvsBounds { var_plus: v, var_minus: v, asymptotic: v });
    }
    let a = n_bar / (1.0 + beta);
    let s = 2.0 * beta * n_bar / (1.0 + beta);
    Ok(DsvsBounds {
        var_plus: a * (s * (beta + 1.0 - tau) + 1.0 - tau),
        var_minus: a * (s * (beta + 1.0 - tau) + 1.0),
        asymptotic: 2.0 * beta * beta * n_bar * n_bar / (1.0 + beta).powi(2),
    })
}

/// `Var(a†a)` of the pure displaced squeezed state with `n̄` fixed and
/// `s = sinh²r ∈ [0, n̄]`.
pub fn dsvs_variance(s: f64, tau: f64, n_bar: f64) -> f64 {
    2.0 * s * (s + 1.0) + (n_bar - s) * (1.0 + 2.0 * s - 2.0 * tau * (s * (s + 1.0)).sqrt())
}

/// `∂ Var(a†a) / ∂ sinh²r` at fixed `n̄`; singular at `s = 0` unless `τ = 0`.
pub fn dsvs_variance_derivative(s: f64, tau: f64, n_bar: f64) -> f64 {
    let root = (s * (s + 1.0)).sqrt();
    2.0 * s + 1.0 + 2.0 * tau * root + (n_bar - s) * (2.0 - tau * (2.0 * s + 1.0) / root)
}

fn dsvs_prefactor(n_atoms: usize, params: &SystemParams) -> Result<f64> {
    let n = n_atoms as f64;
    Ok(4.0 * params.g4_over_delta4()? * params.t * params.t * n * n)
}

/// Displaced squeezed vacuum with spins polarized along `+z`:
/// `F = 4(g⁴/Δ⁴)t²N² Var(a†a)`. For `β ≥ 10/(2n̄)` the report carries the
/// bound `8(g⁴/Δ⁴)(β/(1+β))²t²N²n̄²`.
pub fn qfi_dsvs(gauss: &GaussianSpec, n_atoms: usize, params: &SystemParams) -> Result<QfiReport> {
    if !gauss.is_pure() {
        return Err(Error::InvalidParameter("displaced squeezed vacuum requires n_th = 0".into()));
    }
    let pre = dsvs_prefactor(n_atoms, params)?;
    let m = optical_moments(gauss);
    let beta = gauss.beta().unwrap_or(f64::INFINITY);
    let inputs = json!({ "gauss": gauss, "beta": gauss.beta(), "tau": gauss.tau(), "n_bar": m.n_bar, "n_atoms": n_atoms, "params": params });
    let mut report = QfiReport::closed(pre * m.var_n, QfiMethod::ScenarioClosedForm("dsvs".into()), inputs);
    if m.n_bar > 0.0 && beta >= 10.0 / (2.0 * m.n_bar) {
        let frac = if beta.is_infinite() { 1.0 } else { beta / (1.0 + beta) };
        report = report.with_reference("bound", 2.0 * pre * frac * frac * m.n_bar * m.n_bar);
    }
    Ok(report)
}

/// `∂F/∂ sinh²r` of [`qfi_dsvs`] along fixed `n̄`.
pub fn qfi_dsvs_derivative(s: f64, tau: f64, n_bar: f64, n_atoms: usize, params: &SystemParams) -> Result<f64> {
    Ok(dsvs_prefactor(n_atoms, params)? * dsvs_variance_derivative(s, tau, n_bar))
}

/// [`qfi_dsvs`] parameterized by `(s = sinh²r, τ, n̄)`.
pub fn qfi_dsvs_at(s: f64, tau: f64, n_bar: f64, n_atoms: usize, params: &SystemParams) -> Result<f64> {
    Ok(dsvs_prefactor(n_atoms, params)? * dsvs_variance(s, tau, n_bar))
}

/// Coherent light with `|α|² = n̄` and a one-axis-twisted spin state.
/// Carries the bound `4(g⁴/Δ⁴)t²N²n̄²` expected at `χ = π` for even `N`.
pub fn qfi_oat_cs(chi: f64, n_atoms: usize, n_bar: f64, params: &SystemParams) -> Result<QfiReport> {
    let x = params.dispersive_ratio()?;
    let g4 = params.g4_over_delta4()?;
    let sm = spin_moments(&SpinStateSpec::Oat { chi }, n_atoms);
    let (n, t2) = (n_atoms as f64, params.t * params.t);
    let value = 4.0 * t2 * ((1.0 - x * n_bar).powi(2) * sm.var_jz + 4.0 * g4 * n_bar * sm.jz2_mean);
    let bound = 4.0 * g4 * t2 * n * n * n_bar * n_bar;
    let inputs = json!({ "chi": chi, "n_bar": n_bar, "n_atoms": n_atoms, "params": params });
    Ok(QfiReport::closed(value, QfiMethod::ScenarioClosedForm("oat".into()), inputs).with_reference("bound", bound))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceLines {
    pub sql: f64,
    pub hl: f64,
}

/// Linear and quadratic photon-number references sharing the prefactor
/// `4(g⁴/Δ⁴)t²N` of the coherent-state asymptote, equal at `n̄ = 1`.
pub fn reference_lines(n_bar: f64, n_atoms: usize, params: &SystemParams) -> Result<ReferenceLines> {
    let pre = 4.0 * params.g4_over_delta4()? * params.t * params.t * n_atoms as f64;
    Ok(ReferenceLines { sql: pre * n_bar, hl: pre * n_bar * n_bar })
}
