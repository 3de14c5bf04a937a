//! Oracle-equivalence suite at desk scale: closed forms against brute-force
//! linear algebra, effective against full propagation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use tavis_core::hilbert::{self, c64, kron_vec, max_abs, max_abs_diff, spin_operators, DickeSpace, FockSpace};
use tavis_core::model::{
    block_spectrum, excitation_blocks, generator, generator_finite_difference, generator_diagonal, hamiltonian,
    validate_effective, FidelitySeries, ModelKind,
};
use tavis_core::qfi::{qfi_dsts_closed_form, qfi_spectral};
use tavis_core::states::{
    displacement_op, dsts_eigen_auto_capped, fock_cutoff_of, optical_moments, spin_coherent, spin_moments, spin_state,
    GaussianSpec, SpinStateSpec, DEFAULT_SUPPORT_TOL,
};
use tavis_core::SystemParams;

use crate::config::{ScanConfig, ValidationConfig, VALIDATE_MAX_ATOMS, VALIDATE_MAX_CUTOFF};
use crate::error::{CliError, Result};
use crate::table::metadata;
use crate::Command;

/// Frozen tolerances.
pub const QFI_TOL: f64 = 1e-6;
pub const QFI_PURE_TOL: f64 = 1e-8;
pub const PHOTON_MEAN_TOL: f64 = 1e-8;
pub const PHOTON_VAR_TOL: f64 = 1e-6;
pub const SPIN_TOL: f64 = 1e-10;
pub const GENERATOR_TOL: f64 = 1e-6;
pub const SPECTRUM_TOL: f64 = 1e-9;
pub const UNCOUPLED_FIDELITY_TOL: f64 = 1e-12;
const GENERATOR_CUTOFF: usize = 12;

/// Worst EffectiveS infidelity allowed at a detuning ratio; ratios below 10
/// are reported without a bound.
pub fn infidelity_tolerance(ratio: f64) -> f64 {
    if ratio >= 40.0 {
        0.02
    } else if ratio >= 10.0 {
        0.25
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, passed: residual <= tolerance }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn random_spin(rng: &mut ChaCha8Rng) -> SpinStateSpec {
    if rng.gen_bool(0.5) {
        SpinStateSpec::Coherent { theta: rng.gen_range(0.0..PI), phi: rng.gen_range(0.0..2.0 * PI) }
    } else {
        SpinStateSpec::Oat { chi: rng.gen_range(0.0..2.0 * PI) }
    }
}

struct Sample {
    light: GaussianSpec,
    spin: SpinStateSpec,
    n_atoms: usize,
}

fn samples(rng: &mut ChaCha8Rng, v: &ValidationConfig, thermal: bool) -> Result<Vec<Sample>> {
    (0..v.random_specs)
        .map(|_| {
            let alpha_sq = rng.gen_range(0.0..=v.alpha_sq_max);
            let r = rng.gen_range(0.0..=v.r_max);
            let n_th = if thermal { rng.gen_range(0.0..=v.n_th_max) } else { 0.0 };
            let light = GaussianSpec::new(alpha_sq.sqrt(), rng.gen_range(0.0..2.0 * PI), r, rng.gen_range(0.0..2.0 * PI), n_th)
                .map_err(CliError::core("validation sample"))?;
            let n_atoms = rng.gen_range(1..=v.max_atoms);
            Ok(Sample { light, spin: random_spin(rng), n_atoms })
        })
        .collect()
}

struct SampleResult {
    qfi_gap: f64,
    mean_gap: f64,
    var_gap: f64,
}

fn evaluate(s: &Sample, p: &SystemParams, max_cutoff: usize) -> Result<SampleResult> {
    let context = || format!("validation sample {:?}", s.light);
    let optical = dsts_eigen_auto_capped(&s.light, DEFAULT_SUPPORT_TOL, max_cutoff).map_err(CliError::core(context()))?;
    let cutoff = fock_cutoff_of(&optical).ok_or_else(|| CliError::Internal("optical state without Fock space".into()))?;
    let fock = FockSpace::new(cutoff).map_err(CliError::core(context()))?;
    let dicke = DickeSpace::new(s.n_atoms).map_err(CliError::core(context()))?;

    let pops = optical.populations();
    let mean: f64 = pops.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
    let second: f64 = pops.iter().enumerate().map(|(n, q)| (n * n) as f64 * q).sum();
    let m = optical_moments(&s.light);

    let spin_vec = spin_state(&s.spin, dicke).map_err(CliError::core(context()))?;
    let joint = optical.tensor_pure(&spin_vec, dicke.into()).map_err(CliError::core(context()))?;
    let gen = generator_diagonal(p, fock, dicke).map_err(CliError::core(context()))?;
    let spectral = qfi_spectral(&joint, &gen, DEFAULT_SUPPORT_TOL).map_err(CliError::core(context()))?.value;
    let closed = qfi_dsts_closed_form(&s.light, &s.spin, s.n_atoms, p).map_err(CliError::core(context()))?.value;
    // exact zeros occur for Jz eigenstates at g = 0; compare those on the
    // scale of the largest spin-only QFI
    let floor = 1e-12 * p.t * p.t * (s.n_atoms * s.n_atoms) as f64;
    Ok(SampleResult {
        qfi_gap: (spectral - closed).abs() / closed.abs().max(floor).max(f64::MIN_POSITIVE),
        mean_gap: rel(mean, m.n_bar),
        var_gap: rel(second - mean * mean, m.var_n),
    })
}

fn spin_check(rng: &mut ChaCha8Rng, v: &ValidationConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for n_atoms in 1..=v.max_atoms {
        let dicke = DickeSpace::new(n_atoms).map_err(CliError::core("spin check"))?;
        let jz = spin_operators(dicke).jz;
        let jz2 = jz.matmul(&jz).map_err(CliError::core("spin check"))?;
        for _ in 0..4 {
            let spec = random_spin(rng);
            let psi = spin_state(&spec, dicke).map_err(CliError::core("spin check"))?;
            let m1 = jz.expectation(&psi).map_err(CliError::core("spin check"))?.re;
            let m2 = jz2.expectation(&psi).map_err(CliError::core("spin check"))?.re;
            let f = spin_moments(&spec, n_atoms);
            worst = worst.max((m1 - f.jz_mean).abs()).max((m2 - f.jz2_mean).abs());
        }
    }
    Ok(worst)
}

/// `Var(Jz)` at `χ = π` against `N²/4` (even `N`) or `N/4` (odd), by formula
/// and by matrix. A single spin is left untouched by the twist, so `N ≥ 2`.
pub fn oat_parity_residual(n_atoms: usize) -> Result<f64> {
    let n = n_atoms as f64;
    let expected = if n_atoms % 2 == 0 { n * n / 4.0 } else { n / 4.0 };
    let formula = spin_moments(&SpinStateSpec::Oat { chi: PI }, n_atoms).var_jz;
    let dicke = DickeSpace::new(n_atoms).map_err(CliError::core("oat parity"))?;
    let psi = spin_state(&SpinStateSpec::Oat { chi: PI }, dicke).map_err(CliError::core("oat parity"))?;
    let jz = spin_operators(dicke).jz;
    let m1 = jz.expectation(&psi).map_err(CliError::core("oat parity"))?.re;
    let m2 = jz.matmul(&jz).and_then(|j2| j2.expectation(&psi)).map_err(CliError::core("oat parity"))?.re;
    Ok((formula - expected).abs().max((m2 - m1 * m1 - expected).abs()))
}

/// Fidelity series for coherent `α = 2` light and a spin-coherent
/// `θ = π/2` probe over the configured number of detuning periods.
pub fn fidelity_run(p: &SystemParams, n_atoms: usize, cutoff: usize, steps: usize, periods: f64) -> Result<FidelitySeries> {
    let fock = FockSpace::new(cutoff).map_err(CliError::core("fidelity"))?;
    let dicke = DickeSpace::new(n_atoms).map_err(CliError::core("fidelity"))?;
    let d = displacement_op(c64::new(2.0, 0.0), fock).map_err(CliError::core("fidelity"))?;
    let mut vac = vec![c64::new(0.0, 0.0); fock.dim()];
    vac[0] = c64::new(1.0, 0.0);
    let light = d.apply(&vac).map_err(CliError::core("fidelity"))?;
    let psi = kron_vec(&light, &spin_coherent(PI / 2.0, 0.0, dicke));
    let end = periods * 2.0 * PI / p.delta().abs();
    let grid: Vec<f64> = (0..=steps).map(|k| end * k as f64 / steps as f64).collect();
    validate_effective(p, &psi, fock, dicke, &grid).map_err(CliError::core("fidelity"))
}

fn fidelity_checks(p: &SystemParams, n_atoms: usize, v: &ValidationConfig) -> Result<Vec<Check>> {
    if p.g == 0.0 {
        let s = fidelity_run(p, n_atoms, v.fidelity_cutoff, v.fidelity_steps, v.fidelity_periods)?;
        let worst = s.worst_infidelity(ModelKind::EffectiveS).max(s.worst_infidelity(ModelKind::Effective));
        let worst = worst.max(s.effective_s.iter().chain(&s.effective).map(|f| (f - 1.0).abs()).fold(0.0, f64::max));
        return Ok(vec![Check::new("fidelity_uncoupled", worst, UNCOUPLED_FIDELITY_TOL)]);
    }
    let runs: Vec<FidelitySeries> = v
        .detuning_ratios
        .iter()
        .map(|&ratio| {
            let q = p.with_detuning_ratio(ratio, n_atoms);
            fidelity_run(&q, n_atoms, v.fidelity_cutoff, v.fidelity_steps, v.fidelity_periods)
        })
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for (ratio, s) in v.detuning_ratios.iter().zip(&runs) {
        checks.push(Check::new(
            format!("effective_s_infidelity_ratio_{ratio}"),
            s.worst_infidelity(ModelKind::EffectiveS),
            infidelity_tolerance(*ratio),
        ));
    }
    let end = |s: &FidelitySeries| 1.0 - s.effective_s.last().copied().unwrap_or(1.0);
    let mut order: Vec<usize> = (0..runs.len()).collect();
    order.sort_by(|&a, &b| v.detuning_ratios[a].total_cmp(&v.detuning_ratios[b]));
    let rise = order.windows(2).map(|w| end(&runs[w[1]]) - end(&runs[w[0]])).fold(0.0, f64::max);
    checks.push(Check::new("effective_s_infidelity_monotone", rise, 0.0));
    Ok(checks)
}

fn generator_check(p: &SystemParams, n_atoms: usize) -> Result<f64> {
    let fock = FockSpace::new(GENERATOR_CUTOFF).map_err(CliError::core("generator"))?;
    let dicke = DickeSpace::new(n_atoms).map_err(CliError::core("generator"))?;
    let step = 1e-6 * p.delta().abs().max(p.omega0.abs());
    let fd = generator_finite_difference(p, fock, dicke, step).map_err(CliError::core("generator"))?;
    let exact = generator(p, fock, dicke).map_err(CliError::core("generator"))?;
    Ok(max_abs_diff(fd.as_ref(), exact.elements()) / max_abs(exact.elements()).max(f64::MIN_POSITIVE))
}

fn spectrum_check(p: &SystemParams, n_atoms: usize) -> Result<f64> {
    let fock = FockSpace::new(GENERATOR_CUTOFF).map_err(CliError::core("spectrum"))?;
    let dicke = DickeSpace::new(n_atoms).map_err(CliError::core("spectrum"))?;
    let blocks = block_spectrum(&excitation_blocks(p, fock, dicke)).map_err(CliError::core("spectrum"))?;
    let full = hamiltonian(ModelKind::FullTC, p, fock, dicke).map_err(CliError::core("spectrum"))?;
    let mut direct = hilbert::eigh(&full).map_err(CliError::core("spectrum"))?.values;
    direct.sort_by(f64::total_cmp);
    if direct.len() != blocks.len() {
        return Ok(f64::INFINITY);
    }
    let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    Ok(direct.iter().zip(&blocks).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale)
}

/// Runs every check. The report is a pure function of the config.
pub fn run(cfg: &ScanConfig) -> Result<Value> {
    let v = &cfg.validation;
    if cfg.n_atoms > v.max_atoms || v.max_atoms > VALIDATE_MAX_ATOMS || v.max_atoms == 0 {
        return Err(CliError::Config(format!(
            "validate runs at desk scale: need 1 <= n_atoms <= validation.max_atoms <= {VALIDATE_MAX_ATOMS}"
        )));
    }
    if v.max_cutoff > VALIDATE_MAX_CUTOFF || v.fidelity_cutoff > VALIDATE_MAX_CUTOFF || v.fidelity_cutoff == 0 {
        return Err(CliError::Config(format!("validate runs at desk scale: cutoffs must lie in [1, {VALIDATE_MAX_CUTOFF}]")));
    }
    if v.random_specs == 0 || v.fidelity_steps == 0 || !(v.fidelity_periods > 0.0) {
        return Err(CliError::Config("validation needs random_specs, fidelity_steps and fidelity_periods > 0".into()));
    }
    let ranges = [v.alpha_sq_max, v.r_max, v.n_th_max];
    if ranges.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(CliError::Config("validation sampling ranges must be finite and non-negative".into()));
    }
    if v.detuning_ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(CliError::Config("validation.detuning_ratios must be positive".into()));
    }
    let p = cfg.system()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let thermal = samples(&mut rng, v, true)?;
    let pure = samples(&mut rng, v, false)?;
    let eval_all = |set: &[Sample]| -> Result<Vec<SampleResult>> {
        set.par_iter().map(|s| evaluate(s, &p, v.max_cutoff)).collect()
    };
    let thermal_res = eval_all(&thermal)?;
    let pure_res = eval_all(&pure)?;
    let worst = |rs: &[SampleResult], f: fn(&SampleResult) -> f64| rs.iter().map(f).fold(0.0, f64::max);
    let all: Vec<&SampleResult> = thermal_res.iter().chain(&pure_res).collect();
    let worst_all = |f: fn(&SampleResult) -> f64| all.iter().map(|r| f(r)).fold(0.0, f64::max);

    let mut checks = vec![
        Check::new("qfi_closed_form_vs_spectral", worst(&thermal_res, |r| r.qfi_gap), QFI_TOL),
        Check::new("qfi_closed_form_vs_spectral_pure", worst(&pure_res, |r| r.qfi_gap), QFI_PURE_TOL),
        Check::new("photon_mean_vs_trace", worst_all(|r| r.mean_gap), PHOTON_MEAN_TOL),
        Check::new("photon_variance_vs_trace", worst_all(|r| r.var_gap), PHOTON_VAR_TOL),
        Check::new("spin_moments_vs_matrix", spin_check(&mut rng, v)?, SPIN_TOL),
    ];
    let parity = (2..=v.max_atoms.max(2)).map(oat_parity_residual).collect::<Result<Vec<_>>>()?;
    checks.push(Check::new("oat_parity_variance", parity.into_iter().fold(0.0, f64::max), SPIN_TOL));
    checks.extend(fidelity_checks(&p, cfg.n_atoms, v)?);
    checks.push(Check::new("generator_finite_difference", generator_check(&p, cfg.n_atoms)?, GENERATOR_TOL));
    checks.push(Check::new("block_spectrum_vs_full", spectrum_check(&p, cfg.n_atoms)?, SPECTRUM_TOL));

    let passed = checks.iter().all(|c| c.passed);
    Ok(json!({
        "metadata": metadata(Command::Validate, cfg),
        "passed": passed,
        "checks": checks,
    }))
}
