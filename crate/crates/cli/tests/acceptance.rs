//! Acceptance criteria 1-10, one PASS/FAIL line each. Exits nonzero when
//! any criterion fails.

use std::f64::consts::PI;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tavis_cli::config::{resolve, Globals};
use tavis_cli::validate::{fidelity_run, oat_parity_residual};
use tavis_cli::{compute, Command};
use tavis_core::hilbert::{DickeSpace, FockSpace};
use tavis_core::model::{generator_diagonal, SystemParams};
use tavis_core::numerics::{log_log_slope, logspace};
use tavis_core::qfi::{dsvs_var_bounds, qfi_cs, qfi_dsts_closed_form, qfi_oat_cs, qfi_spectral, qfi_svs};
use tavis_core::states::{
    dsts_eigen_auto, fock_cutoff_of, optical_moments, spin_state, GaussianSpec, SpinStateSpec,
    DEFAULT_SUPPORT_TOL,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_light(rng: &mut ChaCha8Rng, thermal: bool) -> GaussianSpec {
    let alpha_sq: f64 = rng.gen_range(0.0..=4.0);
    let r = rng.gen_range(0.0..=1.5);
    let n_th = if thermal { rng.gen_range(0.0..=1.0) } else { 0.0 };
    GaussianSpec::new(alpha_sq.sqrt(), rng.gen_range(0.0..2.0 * PI), r, rng.gen_range(0.0..2.0 * PI), n_th).unwrap()
}

fn random_spin(rng: &mut ChaCha8Rng) -> SpinStateSpec {
    if rng.gen_bool(0.5) {
        SpinStateSpec::Coherent { theta: rng.gen_range(0.0..PI), phi: rng.gen_range(0.0..2.0 * PI) }
    } else {
        SpinStateSpec::Oat { chi: rng.gen_range(0.0..2.0 * PI) }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let p = SystemParams::fig2(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let specs: Vec<(GaussianSpec, SpinStateSpec, usize)> = (0..60)
        .map(|k| (random_light(&mut rng, k % 2 == 0), random_spin(&mut rng), rng.gen_range(1..=6)))
        .collect();
    let gaps: Vec<(bool, f64)> = specs
        .par_iter()
        .map(|(g, spin, n)| {
            let optical = dsts_eigen_auto(g, DEFAULT_SUPPORT_TOL).unwrap();
            let fock = FockSpace::new(fock_cutoff_of(&optical).unwrap()).unwrap();
            let dicke = DickeSpace::new(*n).unwrap();
            let joint = optical.tensor_pure(&spin_state(spin, dicke).unwrap(), dicke.into()).unwrap();
            let gen = generator_diagonal(&p, fock, dicke).unwrap();
            let spectral = qfi_spectral(&joint, &gen, DEFAULT_SUPPORT_TOL).unwrap().value;
            let closed = qfi_dsts_closed_form(g, spin, *n, &p).unwrap().value;
            (g.is_pure(), rel(spectral, closed))
        })
        .collect();
    let worst = |pure: bool| gaps.iter().filter(|g| g.0 == pure).map(|g| g.1).fold(0.0, f64::max);
    let (thermal, pure) = (worst(false), worst(true));
    let elapsed = start.elapsed();
    let passed = thermal <= 1e-6 && pure <= 1e-8 && elapsed <= Duration::from_secs(120);
    outcome(
        passed,
        format!("{} specs; worst rel gap n_th>0 {thermal:.2e} (tol 1e-6), n_th=0 {pure:.2e} (tol 1e-8); {elapsed:.1?}", gaps.len()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let specs: Vec<GaussianSpec> = (0..200).map(|_| random_light(&mut rng, true)).collect();
    let worst = specs
        .par_iter()
        .map(|g| {
            let pops = dsts_eigen_auto(g, DEFAULT_SUPPORT_TOL).unwrap().populations();
            let mean: f64 = pops.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
            let second: f64 = pops.iter().enumerate().map(|(n, q)| (n * n) as f64 * q).sum();
            rel(optical_moments(g).var_n, second - mean * mean)
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && elapsed <= Duration::from_secs(30),
        format!("200 specs; worst rel gap {worst:.2e} (tol 1e-6); {elapsed:.1?}"),
    )
}

fn criterion_3() -> Outcome {
    let p = SystemParams::fig2(1e-6);
    let c = p.dispersive_ratio().unwrap();
    let xs = logspace(1e2, 1e4, 41).unwrap();
    let n_bars: Vec<f64> = xs.iter().map(|x| x / c).collect();
    let reports: Vec<_> = n_bars.iter().map(|&n| qfi_cs(PI / 2.0, n, 4, &p).unwrap()).collect();
    let ratios: Vec<f64> = reports.iter().map(|r| r.value / r.reference("asymptote").unwrap()).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let slope = log_log_slope(&n_bars, &values).unwrap();
    let ratio_ok = lo >= 0.95 && hi <= 1.05;
    let slope_ok = (1.95..=2.0).contains(&slope);
    outcome(
        ratio_ok && slope_ok,
        format!(
            "ratio to asymptote in [{lo:.4}, {hi:.4}] ({}); log-log slope {slope:.5} vs [1.95, 2.0] ({})",
            if ratio_ok { "ok" } else { "out of range" },
            if slope_ok { "ok" } else { "out of range" }
        ),
    )
}

fn criterion_4() -> Outcome {
    let cfg = resolve(Command::Fig2, &Globals::default(), &[]).unwrap();
    let r = compute(Command::Fig2, &cfg).unwrap();
    let col = |n: &str| r.main.column(n).unwrap();
    let (numeric, analytic, qcrb, window) =
        (col("delta_h_numeric_per_t"), col("delta_h_analytic_per_t"), col("qcrb_per_t"), col("mean_field_param"));
    let qcrb_ok = numeric.iter().zip(&qcrb).all(|(d, q)| d / q >= 1.0 - 1e-12);
    let inside: Vec<usize> = (0..window.len()).filter(|&i| window[i] <= 0.01).collect();
    let worst = inside.iter().map(|&i| rel(numeric[i], analytic[i])).fold(0.0, f64::max);
    outcome(
        qcrb_ok && !inside.is_empty() && worst <= 1e-3,
        format!(
            "{} points, QCRB {}; {} points in the mean-field window, worst numeric/analytic rel gap {worst:.2e} (tol 1e-3)",
            numeric.len(),
            if qcrb_ok { "respected" } else { "violated" },
            inside.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let p = SystemParams::fig2(1e-6);
    let g4 = p.g4_over_delta4().unwrap();
    let t2 = p.t * p.t;
    let mut identity: f64 = 0.0;
    let mut bound_ok = true;
    for r in tavis_core::numerics::linspace(0.1, 4.0, 400) {
        for n in 1..=6 {
            let q = qfi_svs(r, n, &p).unwrap();
            let s = r.sinh().powi(2);
            let nn = (n * n) as f64;
            // sinh²2r = 4 sinh²r cosh²r
            identity = identity.max(rel(q.value, 8.0 * g4 * t2 * nn * s * (s + 1.0)));
            bound_ok &= q.value >= 8.0 * g4 * t2 * nn * s * s;
        }
    }
    outcome(
        identity <= 1e-12 && bound_ok,
        format!("identity worst rel {identity:.2e} (tol 1e-12); double-HS bound {} on r in [0.1, 4]", if bound_ok { "holds" } else { "violated" }),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut strict, mut weak, mut asym, mut asym_cases) = (true, true, true, 0);
    for _ in 0..200 {
        let alpha_sq: f64 = rng.gen_range(1e-3..=1e3);
        let s: f64 = rng.gen_range(0.0..=1e3);
        let tau: f64 = rng.gen_range(-1.0..=1.0);
        let g = GaussianSpec::displaced_squeezed(alpha_sq, s, tau).unwrap();
        let m = optical_moments(&g);
        let beta = g.beta().unwrap();
        let b = dsvs_var_bounds(beta, g.tau(), m.n_bar).unwrap();
        if g.tau() >= 0.0 {
            strict &= m.var_n > b.var_plus;
        } else {
            weak &= m.var_n >= b.var_minus;
        }
        if beta >= 10.0 / (2.0 * m.n_bar) {
            asym_cases += 1;
            asym &= b.asymptotic <= m.var_n * 1.05;
        }
    }
    outcome(
        strict && weak && asym,
        format!(
            "200 specs; Var > Var+ (τ≥0) {}, Var ≥ Var- (τ<0) {}, asymptotic bound {} on {asym_cases} specs",
            if strict { "holds" } else { "violated" },
            if weak { "holds" } else { "violated" },
            if asym { "holds" } else { "violated" }
        ),
    )
}

fn criterion_7() -> Outcome {
    let cfg = resolve(Command::Fig4a, &Globals::default(), &[]).unwrap();
    let r = compute(Command::Fig4a, &cfg).unwrap();
    let negative_ok = r.main.rows.iter().filter(|row| row[1] < 0.0).all(|row| row[3] > 0.0);
    let boundary = r.companion("boundary").unwrap();
    let single = boundary.rows.iter().all(|row| row[1] <= 1.0);
    let residual = boundary.rows.iter().map(|row| row[3]).fold(0.0, f64::max);
    let exists = boundary.rows.iter().any(|row| row[0] >= 0.0);
    let s_min = r.summary.get("sinh2r_min_tau_1").and_then(|v| v.as_f64());
    outcome(
        negative_ok && exists && single && residual <= 1e-8,
        format!(
            "τ<0 derivative {}; zero contour on {} τ rows, {}, worst root residual {residual:.1e}·F/n̄; sinh²r_min(τ=1) = {}",
            if negative_ok { "positive everywhere" } else { "not positive everywhere" },
            boundary.rows.len(),
            if single { "single-valued" } else { "multi-valued" },
            s_min.map_or("none".to_string(), |v| format!("{v:.4}"))
        ),
    )
}

fn criterion_8() -> Outcome {
    let parity = (2..=12).map(|n| oat_parity_residual(n).unwrap()).fold(0.0, f64::max);
    let p = SystemParams::fig2(1e-6);
    let c = p.dispersive_ratio().unwrap();
    let n_bar = 100.0 / c;
    let mut worst_margin = f64::INFINITY;
    for n in (2..=12).step_by(2) {
        let q = qfi_oat_cs(PI, n, n_bar, &p).unwrap();
        worst_margin = worst_margin.min(q.value / q.reference("bound").unwrap());
    }
    let parity_ok = parity <= 1e-10;
    let bound_ok = worst_margin >= 1.0;
    outcome(
        parity_ok && bound_ok,
        format!(
            "parity Var(Jz)(π) worst residual {parity:.1e} over N=2..12 ({}); F/bound at χ=π, 2g²n̄/Δ²=100: {worst_margin:.4} ({})",
            if parity_ok { "ok" } else { "fail" },
            if bound_ok { "ok" } else { "below 1" }
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let base = SystemParams::fig2(0.0);
    let ratios = [5.0, 10.0, 20.0, 40.0];
    let end: Vec<(f64, f64)> = ratios
        .iter()
        .map(|&r| {
            let s = fidelity_run(&base.with_detuning_ratio(r, 4), 4, 64, 50, 50.0).unwrap();
            (1.0 - s.effective_s[50], 1.0 - s.effective[50])
        })
        .collect();
    let monotone = end.windows(2).all(|w| w[1].0 < w[0].0);
    let elapsed = start.elapsed();
    let fmt: Vec<String> = end.iter().map(|e| format!("{:.3e}", e.0)).collect();
    outcome(
        monotone && elapsed <= Duration::from_secs(120),
        format!("1-F(t_end) at ratios 5/10/20/40: [{}] ({}); cutoff 64; {elapsed:.1?}", fmt.join(", "), if monotone { "decreasing" } else { "not decreasing" }),
    )
}

fn criterion_10() -> Outcome {
    let run = || Process::new(env!("CARGO_BIN_EXE_tavis")).args(["validate", "--seed", "10"]).output().unwrap();
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        same && a.status.success(),
        format!("two validate runs with seed 10: {} bytes, {}; exit {:?}", a.stdout.len(), if same { "identical" } else { "different" }, a.status.code()),
    )
}

fn main() {
    faer::set_global_parallelism(faer::Par::Seq);
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", criterion_1),
        ("photon variance", criterion_2),
        ("CS Heisenberg scaling", criterion_3),
        ("Fig. 2 reproduction", criterion_4),
        ("SVS double-HS", criterion_5),
        ("DSVS bounds", criterion_6),
        ("Fig. 4a monotonicity", criterion_7),
        ("OAT parity", criterion_8),
        ("effective-model validity", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.passed { "PASS" } else { "FAIL" }, name, o.detail);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
