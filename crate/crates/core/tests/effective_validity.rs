use std::f64::consts::PI;
use tavis_core::hilbert::{c64, kron_vec, max_abs, max_abs_diff, DickeSpace, FockSpace};
use tavis_core::model::*;
use tavis_core::states::{displacement_op, spin_coherent};

/// Calibrated worst-case EffectiveS infidelity over 50 detuning periods.
const INFIDELITY_AT_RATIO_10: f64 = 0.25;
const INFIDELITY_AT_RATIO_40: f64 = 0.02;

fn probe(fock: FockSpace, dicke: DickeSpace) -> Vec<c64> {
    let d = displacement_op(c64::new(2.0, 0.0), fock).unwrap();
    let mut vac = vec![c64::new(0.0, 0.0); fock.dim()];
    vac[0] = c64::new(1.0, 0.0);
    kron_vec(&d.apply(&vac).unwrap(), &spin_coherent(PI / 2.0, 0.0, dicke))
}

fn series(ratio: f64) -> FidelitySeries {
    let p = SystemParams::fig2(0.0).with_detuning_ratio(ratio, 4);
    let fock = FockSpace::new(64).unwrap();
    let dicke = DickeSpace::new(4).unwrap();
    let end = 50.0 * 2.0 * PI / p.delta().abs();
    let grid: Vec<f64> = (0..=100).map(|k| end * k as f64 / 100.0).collect();
    validate_effective(&p, &probe(fock, dicke), fock, dicke, &grid).unwrap()
}

#[test]
fn infidelity_falls_with_detuning() {
    let runs: Vec<FidelitySeries> = [5.0, 10.0, 20.0, 40.0].iter().map(|&r| series(r)).collect();
    for kind in [ModelKind::EffectiveS, ModelKind::Effective] {
        let end: Vec<f64> = runs
            .iter()
            .map(|s| 1.0 - if kind == ModelKind::EffectiveS { s.effective_s[100] } else { s.effective[100] })
            .collect();
        assert!(end.windows(2).all(|w| w[1] < w[0]), "{kind:?}: {end:?}");
    }
    assert!(runs[1].worst_infidelity(ModelKind::EffectiveS) <= INFIDELITY_AT_RATIO_10);
    assert!(runs[3].worst_infidelity(ModelKind::EffectiveS) <= INFIDELITY_AT_RATIO_40);
}

#[test]
fn collective_term_matters_when_photons_are_few() {
    let s = series(10.0);
    let mean_s: f64 = s.effective_s.iter().sum::<f64>() / s.times.len() as f64;
    let mean_e: f64 = s.effective.iter().sum::<f64>() / s.times.len() as f64;
    assert!(mean_s >= mean_e, "{mean_s} < {mean_e}");
}

#[test]
fn generator_from_propagator_derivative() {
    for t in [1e-9, 1e-6] {
        let p = SystemParams::fig2(t);
        let fock = FockSpace::new(12).unwrap();
        let dicke = DickeSpace::new(4).unwrap();
        let step = 1e-6 * p.delta().abs().max(p.omega0);
        let fd = generator_finite_difference(&p, fock, dicke, step).unwrap();
        let exact = generator(&p, fock, dicke).unwrap();
        let err = max_abs_diff(fd.as_ref(), exact.elements());
        assert!(err <= 1e-6 * max_abs(exact.elements()), "t={t}: {err:e}");
    }
}

#[test]
fn zero_detuning_is_guarded() {
    let p = SystemParams::from_hz(6.9e9, 6.9e9, 1.05e6, 0.0, 1e-6).unwrap();
    assert!(p.dispersive_ratio().unwrap_err().to_string().contains("zero detuning"));
}
