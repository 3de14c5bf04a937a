//! Error-propagation precision for the spin quadrature
//! `M = Jx cos φ_M + Jy sin φ_M`, probe spin-coherent `|θ, φ⟩` times light.
//!
//! Under the dispersive model each photon number `n` rotates the spins at
//! `ν(n) = ω0 + h + 2g²n/Δ`. The analytic route replaces `n` by `n̄`; the
//! numeric route averages over the photon-number distribution through the
//! characteristic sums `C_k = Σ P(n) exp(i k ν(n) t)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::c64;
use crate::model::SystemParams;
use crate::numerics::golden_section_min;
use crate::qfi::{qfi_cs, qfi_dsts_closed_form};
use crate::states::{photon_distribution, GaussianSpec, PhotonDistribution, SpinStateSpec};

/// Number of analyzer phases scanned before golden-section refinement.
pub const QUADRATURE_SCAN_POINTS: usize = 720;

/// Relative spread below which the `δh` scan counts as flat in the
/// analyzer phase; the optimizer then maximizes the signal slope instead.
pub const FLAT_SCAN_TOL: f64 = 1e-9;

/// Phase change produced by the finite-difference step in `h`.
pub const FD_PHASE_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    /// Analyzer phase of `M`, radians in `[0, 2π)`.
    pub varphi: f64,
    pub theta: f64,
    pub phi: f64,
    pub use_numeric_oracle: bool,
}

impl MeasurementSpec {
    pub fn new(varphi: f64, theta: f64, phi: f64, use_numeric_oracle: bool) -> Result<Self> {
        if !(0.0..2.0 * PI).contains(&varphi) {
            return Err(Error::InvalidParameter(format!("analyzer phase {varphi} outside [0, 2π)")));
        }
        Ok(Self { varphi, theta, phi, use_numeric_oracle })
    }

    pub fn with_varphi(self, varphi: f64) -> Self {
        Self { varphi: varphi.rem_euclid(2.0 * PI), ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub m1: f64,
    pub m2: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.m2 - self.m1 * self.m1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrecisionMethod {
    Analytic,
    NumericOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrecisionReport {
    /// Precision in rad/s.
    pub delta_h: f64,
    pub method: PrecisionMethod,
    /// `1/√F` of the matched probe.
    pub qcrb: f64,
}

fn first_moment(n: f64, theta: f64, c1: c64) -> f64 {
    n / 2.0 * theta.sin() * c1.re
}

fn second_moment(n: f64, theta: f64, c2: c64) -> f64 {
    n / 16.0 * (n + 3.0 + (1.0 - n) * (2.0 * theta).cos() + 2.0 * (n - 1.0) * theta.sin().powi(2) * c2.re)
}

/// `⟨M⟩` and `⟨M²⟩` with the photon number replaced by its mean.
pub fn expectations_analytic(spec: &MeasurementSpec, n_atoms: usize, n_bar: f64, params: &SystemParams) -> Result<Moments> {
    let psi = analytic_phase(spec, n_bar, params)?;
    let n = n_atoms as f64;
    Ok(Moments {
        m1: first_moment(n, spec.theta, c64::from_polar(1.0, psi)),
        m2: second_moment(n, spec.theta, c64::from_polar(1.0, 2.0 * psi)),
    })
}

/// `νt + φ - φ_M` with `ν = ω0 + h + 2g²n̄/Δ`.
pub fn analytic_phase(spec: &MeasurementSpec, n_bar: f64, params: &SystemParams) -> Result<f64> {
    let d = params.checked_delta()?;
    let nu = params.omega() + 2.0 * params.g * params.g * n_bar / d;
    Ok(nu * params.t + spec.phi - spec.varphi)
}

/// Characteristic sums of a photon-number distribution at `h` and their
/// `h`-derivatives.
#[derive(Clone, Debug)]
pub struct NumericProbe {
    n_atoms: usize,
    theta: f64,
    phi: f64,
    /// `C1`, `C2` at the working point.
    c1: c64,
    c2: c64,
    /// `∂C1/∂h`, Richardson-extrapolated central difference.
    dc1: c64,
    step: f64,
}

impl NumericProbe {
    pub fn new(theta: f64, phi: f64, n_atoms: usize, dist: &PhotonDistribution, params: &SystemParams) -> Result<Self> {
        let d = params.checked_delta()?;
        let x = params.dispersive_ratio()?;
        let t = params.t;
        let k = 2.0 * params.g * params.g;
        // ν(n)t = ωt + k n t/Δ; the common ωt phase is applied once
        let lo = dist.offset as f64;
        let hi = dist.max_n() as f64;
        let rate = (1.0 - x * lo).abs().max((1.0 - x * hi).abs()).max(f64::MIN_POSITIVE);
        let step = if t > 0.0 { FD_PHASE_STEP / (t * rate) } else { 1.0 };
        let common = c64::from_polar(1.0, params.omega() * t);
        let mut s1 = c64::new(0.0, 0.0);
        let mut s2 = c64::new(0.0, 0.0);
        let mut diff = [c64::new(0.0, 0.0); 2];
        for (n, p) in dist.iter() {
            if p == 0.0 {
                continue;
            }
            let nf = n as f64;
            let base = c64::from_polar(1.0, k * nf * t / d);
            s1 += base * p;
            s2 += base * base * p;
            // phase increment at h ± δ relative to h, kept small and exact
            let inc = |dh: f64| dh * t - k * nf * t * dh / (d * (d + dh));
            for (slot, dh) in [step, step / 2.0].into_iter().enumerate() {
                let up = c64::from_polar(1.0, inc(dh));
                let down = c64::from_polar(1.0, inc(-dh));
                diff[slot] += base * (up - down) * (p / (2.0 * dh));
            }
        }
        let ds1 = (diff[1] * 4.0 - diff[0]) / 3.0;
        Ok(Self { n_atoms, theta, phi, c1: common * s1, c2: common * common * s2, dc1: common * ds1, step })
    }

    /// Finite-difference step in `h` (rad/s).
    pub fn step(&self) -> f64 {
        self.step
    }

    fn rotation(&self, varphi: f64) -> c64 {
        c64::from_polar(1.0, self.phi - varphi)
    }

    pub fn moments(&self, varphi: f64) -> Moments {
        let n = self.n_atoms as f64;
        let r = self.rotation(varphi);
        Moments { m1: first_moment(n, self.theta, self.c1 * r), m2: second_moment(n, self.theta, self.c2 * r * r) }
    }

    /// `∂⟨M⟩/∂h`.
    pub fn slope(&self, varphi: f64) -> f64 {
        first_moment(self.n_atoms as f64, self.theta, self.dc1 * self.rotation(varphi))
    }

    pub fn delta_h(&self, varphi: f64) -> Result<f64> {
        let slope = self.slope(varphi);
        let scale = self.n_atoms as f64 * self.dc1.norm().max(f64::MIN_POSITIVE);
        if slope.abs() <= 1e-12 * scale || slope == 0.0 {
            return Err(Error::UninformativeQuadrature);
        }
        Ok(self.moments(varphi).variance().max(0.0).sqrt() / slope.abs())
    }
}

fn probe_for(theta: f64, phi: f64, n_atoms: usize, gauss: &GaussianSpec, params: &SystemParams) -> Result<NumericProbe> {
    NumericProbe::new(theta, phi, n_atoms, &photon_distribution(gauss)?, params)
}

/// Exact `⟨M⟩`, `⟨M²⟩` under the dispersive model for any pure Gaussian light.
pub fn expectations_numeric(spec: &MeasurementSpec, n_atoms: usize, gauss: &GaussianSpec, params: &SystemParams) -> Result<Moments> {
    Ok(probe_for(spec.theta, spec.phi, n_atoms, gauss, params)?.moments(spec.varphi))
}

fn analytic_delta_h(spec: &MeasurementSpec, n_atoms: usize, n_bar: f64, params: &SystemParams) -> Result<f64> {
    let x = params.dispersive_ratio()?;
    let psi = analytic_phase(spec, n_bar, params)?;
    let (s_theta, s_psi) = (spec.theta.sin(), psi.sin());
    let lever = (x * n_bar - 1.0) * params.t;
    if s_theta.abs() < 1e-12 || s_psi.abs() < 1e-12 || lever == 0.0 {
        return Err(Error::UninformativeQuadrature);
    }
    // csc²θ csc²ψ - cot²ψ, rearranged to avoid cancellation near sin ψ = 0
    let num = (s_psi * s_psi + (spec.theta.cos() * psi.cos()).powi(2)) / (s_theta * s_theta * s_psi * s_psi);
    Ok((num / (n_atoms as f64 * lever * lever)).sqrt())
}

/// Precision for coherent light of mean photon number `n̄`.
pub fn delta_h(spec: &MeasurementSpec, n_atoms: usize, n_bar: f64, params: &SystemParams) -> Result<PrecisionReport> {
    let qcrb = qfi_cs(spec.theta, n_bar, n_atoms, params)?.qcrb();
    if spec.use_numeric_oracle {
        let probe = probe_for(spec.theta, spec.phi, n_atoms, &GaussianSpec::coherent(n_bar.sqrt())?, params)?;
        Ok(PrecisionReport { delta_h: probe.delta_h(spec.varphi)?, method: PrecisionMethod::NumericOracle, qcrb })
    } else {
        Ok(PrecisionReport { delta_h: analytic_delta_h(spec, n_atoms, n_bar, params)?, method: PrecisionMethod::Analytic, qcrb })
    }
}

/// Numeric precision for arbitrary pure Gaussian light.
pub fn delta_h_with_light(spec: &MeasurementSpec, n_atoms: usize, gauss: &GaussianSpec, params: &SystemParams) -> Result<PrecisionReport> {
    let spin = SpinStateSpec::Coherent { theta: spec.theta, phi: spec.phi };
    let qcrb = qfi_dsts_closed_form(gauss, &spin, n_atoms, params)?.qcrb();
    let probe = probe_for(spec.theta, spec.phi, n_atoms, gauss, params)?;
    Ok(PrecisionReport { delta_h: probe.delta_h(spec.varphi)?, method: PrecisionMethod::NumericOracle, qcrb })
}

/// Minimizes `δh` over `varphi ∈ [0, π)` by scan and golden section.
/// `delta` maps a phase to `δh` (or an error), `slope` to `|∂⟨M⟩/∂h|`.
fn optimize_phase<D, S>(delta: D, slope: S) -> f64
where
    D: Fn(f64) -> Result<f64>,
    S: Fn(f64) -> f64,
{
    let step = PI / QUADRATURE_SCAN_POINTS as f64;
    let grid: Vec<f64> = (0..QUADRATURE_SCAN_POINTS).map(|i| i as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&v| delta(v).unwrap_or(f64::INFINITY)).collect();
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let flat = !finite.is_empty() && (hi - lo) <= FLAT_SCAN_TOL * lo;
    let objective = |v: f64| -> f64 {
        if flat {
            -slope(v)
        } else {
            delta(v).unwrap_or(f64::INFINITY)
        }
    };
    let best = (0..grid.len())
        .min_by(|&a, &b| objective(grid[a]).total_cmp(&objective(grid[b])))
        .unwrap_or(0);
    let centre = grid[best];
    let x = golden_section_min(objective, centre - step, centre + step, 1e-12, 200);
    x.rem_euclid(PI)
}

/// Analyzer phase in `[0, π)` minimizing the mean-field `δh` at fixed
/// `θ`, `φ` and `t`; `use_numeric_oracle` is ignored.
///
/// Where `δh` does not depend on the analyzer phase (`θ = π/2`) the phase
/// with the steepest signal is returned, which is the phase condition
/// `νt + φ - φ_M = π/2 mod π`.
pub fn optimize_quadrature(template: &MeasurementSpec, n_atoms: usize, n_bar: f64, params: &SystemParams) -> Result<f64> {
    let base = analytic_phase(template, n_bar, params)? + template.varphi;
    let x = params.dispersive_ratio()?;
    let lever = ((x * n_bar - 1.0) * params.t).abs();
    let n = n_atoms as f64;
    Ok(optimize_phase(
        |v| analytic_delta_h(&template.with_varphi(v), n_atoms, n_bar, params),
        |v| n / 2.0 * template.theta.sin().abs() * (base - v).sin().abs() * lever,
    ))
}

/// Analyzer phase minimizing the exact numeric `δh`.
///
/// Away from the mean-field phase condition the signal also picks up the
/// correlation between photon number and spin phase, so this optimum can
/// beat the mean-field closed form and sit closer to the Cramér-Rao bound.
pub fn optimize_numeric(probe: &NumericProbe) -> f64 {
    optimize_phase(|v| probe.delta_h(v), |v| probe.slope(v).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Parameters where `ν t` is easy to control: `g = 0` leaves `ν = ω0 + h`.
    fn free(nu_t: f64) -> SystemParams {
        SystemParams::new(nu_t, -1.0, 0.0, 0.0, 1.0).unwrap()
    }

    fn spec(varphi: f64, theta: f64, phi: f64) -> MeasurementSpec {
        MeasurementSpec::new(varphi, theta, phi, false).unwrap()
    }

    #[test]
    fn polar_probe_moments() {
        let p = SystemParams::fig2(1e-6);
        let m = expectations_analytic(&spec(0.4, 0.0, 0.0), 6, 100.0, &p).unwrap();
        assert!(m.m1.abs() < 1e-15);
        assert!((m.m2 - 1.5).abs() < 1e-14);
    }

    #[test]
    fn quarter_turn_moments() {
        let p = free(0.0);
        let m = expectations_analytic(&spec(0.0, PI / 2.0, PI / 2.0), 4, 10.0, &p).unwrap();
        assert!(m.m1.abs() < 1e-15);
        // (N/16)(N + 3 + (N - 1) - 2(N - 1))
        assert!((m.m2 - 4.0 / 16.0 * (4.0 + 3.0 + 3.0 - 6.0)).abs() < 1e-14);
    }

    #[test]
    fn decoupled_numeric_matches_analytic() {
        let p = free(0.7);
        let s = spec(1.1, 1.2, 0.4);
        let a = expectations_analytic(&s, 5, 9.0, &p).unwrap();
        let n = expectations_numeric(&s, 5, &GaussianSpec::coherent(3.0).unwrap(), &p).unwrap();
        assert!((a.m1 - n.m1).abs() < 1e-13 && (a.m2 - n.m2).abs() < 1e-13);
    }

    #[test]
    fn optimal_point_closed_form() {
        let p = SystemParams::fig2(1e-9);
        let n_bar = 500.0;
        let x = p.dispersive_ratio().unwrap();
        let base = analytic_phase(&spec(0.0, PI / 2.0, 0.0), n_bar, &p).unwrap();
        let varphi = (base - PI / 2.0).rem_euclid(PI);
        let r = delta_h(&spec(varphi, PI / 2.0, 0.0), 4, n_bar, &p).unwrap();
        let want = 1.0 / (4.0 * p.t * p.t * (x * n_bar - 1.0).powi(2));
        assert!((r.delta_h.powi(2) / want - 1.0).abs() < 1e-9);
        assert!(r.delta_h >= r.qcrb);
    }

    #[test]
    fn analytic_is_pi_periodic() {
        let p = SystemParams::fig2(1e-9);
        let s = spec(0.3, 1.0, 0.2);
        let a = delta_h(&s, 4, 50.0, &p).unwrap().delta_h;
        let b = delta_h(&s.with_varphi(0.3 + PI), 4, 50.0, &p).unwrap().delta_h;
        assert!((a / b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dark_quadrature_is_uninformative() {
        let p = free(0.0);
        let err = delta_h(&spec(0.0, PI / 2.0, 0.0), 4, 10.0, &p).unwrap_err();
        assert_eq!(err, Error::UninformativeQuadrature);
    }

    #[test]
    fn optimizer_phase_condition() {
        let t = spec(0.0, PI / 2.0, 0.0);
        let v = optimize_quadrature(&t, 4, 10.0, &free(0.0)).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-6, "{v}");
        let t = spec(0.0, PI / 2.0, 0.3);
        let v = optimize_quadrature(&t, 4, 10.0, &free(1.0)).unwrap();
        assert!((v - (1.3 - PI / 2.0).rem_euclid(PI)).abs() < 1e-6, "{v}");
    }

    #[test]
    fn optimizer_beats_other_phases() {
        let p = SystemParams::fig2(1e-9);
        let t = spec(0.0, 1.0, 0.5);
        let best = optimize_quadrature(&t, 4, 300.0, &p).unwrap();
        let d_best = delta_h(&t.with_varphi(best), 4, 300.0, &p).unwrap().delta_h;
        for k in 0..100 {
            let v = 0.0628 * k as f64 + 0.01;
            if let Ok(d) = delta_h(&t.with_varphi(v), 4, 300.0, &p) {
                assert!(d_best <= d.delta_h * (1.0 + 1e-12));
            }
        }
    }
}
