//! Figure data: fig2 (coherent-state precision), fig3 (displaced squeezed
//! QFI map), fig4a (monotonic regions) and fig4b (photon-number variance).

use rayon::prelude::*;
use serde_json::json;
use tavis_core::measurement::{delta_h, optimize_numeric, optimize_quadrature, MeasurementSpec, NumericProbe};
use tavis_core::numerics::{bisect, golden_section_min, logspace, Root};
use tavis_core::qfi::{dsvs_var_bounds, dsvs_variance, qfi_cs, qfi_dsvs_at, qfi_dsvs_derivative, reference_lines};
use tavis_core::states::{photon_distribution, GaussianSpec};
use tavis_core::SystemParams;

use crate::config::{ScanConfig, Scenario, Var};
use crate::error::{CliError, Result};
use crate::table::{Report, ResultTable};

/// Bisection cap for boundary extraction.
pub const BISECT_ITERATIONS: usize = 60;
/// Root condition `|∂F/∂sinh²r| ≤ BOUNDARY_TOL · F/n̄`.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Points of the brute-force argmin grid behind the fig3 minimum curve.
pub const DENSE_POINTS: usize = 200_001;
const COARSE_POINTS: usize = 401;
/// Lower end of the minimum search, relative to `n̄`.
const MIN_SEARCH_FLOOR: f64 = 1e-9;

fn expect_scenario(cfg: &ScanConfig, want: Scenario, command: &str) -> Result<()> {
    if cfg.scenario != want {
        return Err(CliError::Config(format!("{command} requires scenario {want}, got {}", cfg.scenario)));
    }
    Ok(())
}

fn expect_axes(cfg: &ScanConfig, axes: &[Var], fixed: &[Var], command: &str) -> Result<()> {
    let names = |v: &[Var]| v.iter().map(|x| x.name()).collect::<Vec<_>>().join(", ");
    if cfg.grid_vars() != axes {
        return Err(CliError::Config(format!("{command} needs exactly the grid axes [{}]", names(axes))));
    }
    if let Some(extra) = cfg.fixed.keys().find(|k| !fixed.contains(k)) {
        return Err(CliError::Config(format!("{command} accepts fixed values for [{}] only, got {}", names(fixed), extra.name())));
    }
    Ok(())
}

fn ctx(what: impl std::fmt::Display) -> String {
    format!("at {what}")
}

/// Precision and QFI of coherent light versus `n̄`, in units of `1/t`.
pub fn fig2(cfg: &ScanConfig) -> Result<Report> {
    expect_scenario(cfg, Scenario::Cs, "fig2")?;
    expect_axes(cfg, &[Var::NBar], &[Var::Theta, Var::Phi], "fig2")?;
    let p = cfg.system()?;
    let n = cfg.n_atoms;
    let theta = cfg.fixed_or(Var::Theta, std::f64::consts::FRAC_PI_2);
    let phi = cfg.fixed_or(Var::Phi, 0.0);
    let x = p.dispersive_ratio().map_err(CliError::core("params"))?;
    let t = p.t;
    let n_bars = cfg.grid[&Var::NBar].values();
    let rows: Vec<Vec<f64>> = n_bars
        .par_iter()
        .map(|&n_bar| {
            let c = || ctx(format!("n_bar={n_bar}"));
            let template = MeasurementSpec::new(0.0, theta, phi, true).map_err(CliError::core(c()))?;
            let varphi = optimize_quadrature(&template, n, n_bar, &p).map_err(CliError::core(c()))?;
            let numeric = template.with_varphi(varphi);
            let analytic = MeasurementSpec { use_numeric_oracle: false, ..numeric };
            let a = delta_h(&analytic, n, n_bar, &p).map_err(CliError::core(c()))?;
            let dist = photon_distribution(&GaussianSpec::coherent(n_bar.sqrt()).map_err(CliError::core(c()))?)
                .map_err(CliError::core(c()))?;
            let probe = NumericProbe::new(theta, phi, n, &dist, &p).map_err(CliError::core(c()))?;
            let at_optimum = probe.delta_h(varphi).map_err(CliError::core(c()))?;
            let free = probe.delta_h(optimize_numeric(&probe)).map_err(CliError::core(c()))?;
            let q = qfi_cs(theta, n_bar, n, &p).map_err(CliError::core(c()))?;
            let lines = reference_lines(n_bar, n, &p).map_err(CliError::core(c()))?;
            let window = 2.0 * p.g * p.g * t * n_bar.sqrt() / p.delta().abs();
            Ok(vec![
                n_bar,
                x * n_bar,
                q.value,
                at_optimum * t,
                a.delta_h * t,
                free * t,
                q.qcrb() * t,
                lines.sql,
                lines.hl,
                window,
            ])
        })
        .collect::<Result<_>>()?;
    let mut table = ResultTable::new(
        "main",
        &[
            "n_bar",
            "x_dispersive",
            "qfi_cs_s2",
            "delta_h_numeric_per_t",
            "delta_h_analytic_per_t",
            "delta_h_numeric_free_per_t",
            "qcrb_per_t",
            "sql_s2",
            "hl_s2",
            "mean_field_param",
        ],
        1,
    );
    for row in rows {
        table.push(row)?;
    }
    Ok(Report::new(table))
}

/// Location of the minimum of `F(sinh²r)` at fixed `n̄` and `τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimumCurvePoint {
    pub n_bar: f64,
    /// Coarse log grid refined by golden section.
    pub golden: f64,
    /// Argmin over [`DENSE_POINTS`] log-spaced values.
    pub dense: f64,
}

pub fn dsvs_minimum(n_bar: f64, tau: f64) -> Result<MinimumCurvePoint> {
    let lo = n_bar * MIN_SEARCH_FLOOR;
    let f = |u: f64| dsvs_variance(u.exp(), tau, n_bar);
    let argmin = |grid: &[f64]| -> usize {
        (0..grid.len()).min_by(|&a, &b| f(grid[a].ln()).total_cmp(&f(grid[b].ln()))).unwrap_or(0)
    };
    let log_err = |e| CliError::core(ctx(format!("n_bar={n_bar}")))(e);
    let coarse = logspace(lo, n_bar, COARSE_POINTS).map_err(log_err)?;
    let k = argmin(&coarse);
    let (a, b) = (coarse[k.saturating_sub(1)].ln(), coarse[(k + 1).min(coarse.len() - 1)].ln());
    let golden = golden_section_min(f, a, b, 1e-12, 200).exp();
    let dense_grid = logspace(lo, n_bar, DENSE_POINTS).map_err(log_err)?;
    let dense = dense_grid[argmin(&dense_grid)];
    Ok(MinimumCurvePoint { n_bar, golden, dense })
}

/// `ln(F/t²)` of displaced squeezed vacuum over `|α|²` and `sinh²r`, with
/// the minimum-QFI curve along each listed `n̄` as companion `minimum`.
pub fn fig3(cfg: &ScanConfig) -> Result<Report> {
    expect_scenario(cfg, Scenario::Dsvs, "fig3")?;
    expect_axes(cfg, &[Var::AlphaSq, Var::Sinh2r], &[Var::Tau], "fig3")?;
    let p = cfg.system()?;
    let n = cfg.n_atoms;
    let tau = cfg.fixed_or(Var::Tau, 1.0);
    if !(-1.0..=1.0).contains(&tau) {
        return Err(CliError::Config(format!("tau = {tau} outside [-1, 1]")));
    }
    let t2 = p.t * p.t;
    let points = cfg.points();
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|pt| {
            let (a2, s) = (pt.get(Var::AlphaSq).unwrap_or(0.0), pt.get(Var::Sinh2r).unwrap_or(0.0));
            if a2 < 0.0 || s < 0.0 {
                return Err(CliError::Config(format!("negative |α|² or sinh²r at {pt}")));
            }
            let f = qfi_dsvs_at(s, tau, a2 + s, n, &p).map_err(CliError::core(ctx(pt)))?;
            Ok(vec![a2, s, (f / t2).ln()])
        })
        .collect::<Result<_>>()?;
    let mut table = ResultTable::new("main", &["alpha_sq", "sinh2r", "ln_qfi_over_t2"], 2);
    for row in rows {
        table.push(row)?;
    }
    let mut report = Report::new(table);
    if !cfg.levels.is_empty() {
        let curve: Vec<MinimumCurvePoint> =
            cfg.levels.par_iter().map(|&nb| dsvs_minimum(nb, tau)).collect::<Result<_>>()?;
        let mut minimum = ResultTable::new(
            "minimum",
            &["n_bar", "sinh2r_min", "alpha_sq_min", "sinh2r_min_dense", "relative_gap", "ln_qfi_over_t2_min"],
            1,
        );
        for c in curve {
            let f = qfi_dsvs_at(c.golden, tau, c.n_bar, n, &p).map_err(CliError::core(ctx(format!("n_bar={}", c.n_bar))))?;
            minimum.push(vec![
                c.n_bar,
                c.golden,
                c.n_bar - c.golden,
                c.dense,
                (c.golden - c.dense).abs() / c.dense,
                (f / t2).ln(),
            ])?;
        }
        report.companions.push(minimum);
    }
    Ok(report)
}

/// Sign changes of `∂F/∂sinh²r` along ascending `s` values at fixed `τ`,
/// as bracketing index pairs.
pub fn sign_changes(s: &[f64], tau: f64, n_bar: f64) -> Vec<usize> {
    let signs: Vec<f64> = s.iter().map(|&x| tavis_core::qfi::dsvs_variance_derivative(x, tau, n_bar).signum()).collect();
    (0..s.len().saturating_sub(1)).filter(|&i| signs[i] != signs[i + 1]).collect()
}

/// Zero of `∂F/∂sinh²r` in `[a, b]` by bisection.
pub fn boundary_root(a: f64, b: f64, tau: f64, n_bar: f64, n_atoms: usize, p: &SystemParams) -> Result<(Root, f64)> {
    let c = || ctx(format!("tau={tau}"));
    let d = |s: f64| qfi_dsvs_derivative(s, tau, n_bar, n_atoms, p).unwrap_or(f64::NAN);
    let scale = qfi_dsvs_at(0.5 * (a + b), tau, n_bar, n_atoms, p).map_err(CliError::core(c()))? / n_bar;
    // stop well inside the threshold so it holds at the root's own F
    let root = bisect(d, a, b, 0.1 * BOUNDARY_TOL * scale, BISECT_ITERATIONS).map_err(CliError::core(c()))?;
    let f = qfi_dsvs_at(root.x, tau, n_bar, n_atoms, p).map_err(CliError::core(c()))?;
    Ok((root, root.residual * n_bar / f))
}

fn fixed_photons(cfg: &ScanConfig, command: &str) -> Result<f64> {
    let n_bar = cfg.fixed_or(Var::NBar, 1000.0);
    if !(n_bar > 0.0) {
        return Err(CliError::Config(format!("{command}: n_bar must be positive")));
    }
    if let Some(axis) = cfg.grid.get(&Var::Sinh2r) {
        if axis.min < 0.0 || axis.max > n_bar {
            return Err(CliError::Config(format!("{command}: sinh2r axis must lie in [0, n_bar = {n_bar}]")));
        }
    }
    Ok(n_bar)
}

/// Sign of `∂F/∂sinh²r` over `(sinh²r, τ)` at fixed `n̄`; companion
/// `boundary` holds the zero contour per `τ` row.
pub fn fig4a(cfg: &ScanConfig) -> Result<Report> {
    expect_scenario(cfg, Scenario::Dsvs, "fig4a")?;
    expect_axes(cfg, &[Var::Sinh2r, Var::Tau], &[Var::NBar], "fig4a")?;
    let n_bar = fixed_photons(cfg, "fig4a")?;
    let tau_axis = cfg.grid[&Var::Tau];
    if tau_axis.min < -1.0 || tau_axis.max > 1.0 {
        return Err(CliError::Config("fig4a: tau axis must lie in [-1, 1]".into()));
    }
    let p = cfg.system()?;
    let n = cfg.n_atoms;
    let points = cfg.points();
    let rows: Vec<Vec<f64>> = points
        .par_iter()
        .map(|pt| {
            let (s, tau) = (pt.get(Var::Sinh2r).unwrap_or(0.0), pt.get(Var::Tau).unwrap_or(0.0));
            let d = qfi_dsvs_derivative(s, tau, n_bar, n, &p).map_err(CliError::core(ctx(pt)))?;
            Ok(vec![s, tau, d.signum(), d])
        })
        .collect::<Result<_>>()?;
    let mut table = ResultTable::new("main", &["sinh2r", "tau", "sign_df_dsinh2r", "df_dsinh2r_s2"], 2);
    for row in rows {
        table.push(row)?;
    }

    let s_values = cfg.grid[&Var::Sinh2r].values();
    let taus = tau_axis.values();
    let per_row: Vec<Vec<Vec<f64>>> = taus
        .par_iter()
        .map(|&tau| {
            let changes = sign_changes(&s_values, tau, n_bar);
            changes
                .iter()
                .map(|&i| {
                    let (root, rel) = boundary_root(s_values[i], s_values[i + 1], tau, n_bar, n, &p)?;
                    Ok(vec![tau, changes.len() as f64, root.x, rel, root.iterations as f64])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut boundary =
        ResultTable::new("boundary", &["tau", "sign_changes", "sinh2r_zero", "residual_rel", "iterations"], 1);
    for row in per_row.into_iter().flatten() {
        boundary.push(row)?;
    }
    let mut report = Report::new(table);
    report.summary.insert("n_bar".into(), json!(n_bar));
    let (lo, hi) = (s_values[0], s_values[s_values.len() - 1]);
    if !sign_changes(&[lo, hi], 1.0, n_bar).is_empty() {
        let (root, _) = boundary_root(lo, hi, 1.0, n_bar, n, &p)?;
        report.summary.insert("sinh2r_min_tau_1".into(), json!(root.x));
    }
    report.companions.push(boundary);
    Ok(report)
}

/// `Var(a†a)` at `τ ∈ {-1, 0, 1}` and its lower bounds at fixed `n̄`.
pub fn fig4b(cfg: &ScanConfig) -> Result<Report> {
    expect_scenario(cfg, Scenario::Dsvs, "fig4b")?;
    expect_axes(cfg, &[Var::Sinh2r], &[Var::NBar], "fig4b")?;
    let n_bar = fixed_photons(cfg, "fig4b")?;
    let mut table = ResultTable::new(
        "main",
        &["sinh2r", "var_n_tau_m1", "var_n_tau_0", "var_n_tau_p1", "var_minus_tau_m1", "var_plus_tau_p1", "two_nbar_sq"],
        1,
    );
    for s in cfg.grid[&Var::Sinh2r].values() {
        let beta = if s >= n_bar { f64::INFINITY } else { s / (n_bar - s) };
        let c = || ctx(format!("sinh2r={s}"));
        let minus = dsvs_var_bounds(beta, -1.0, n_bar).map_err(CliError::core(c()))?;
        let plus = dsvs_var_bounds(beta, 1.0, n_bar).map_err(CliError::core(c()))?;
        table.push(vec![
            s,
            dsvs_variance(s, -1.0, n_bar),
            dsvs_variance(s, 0.0, n_bar),
            dsvs_variance(s, 1.0, n_bar),
            minus.var_minus,
            plus.var_plus,
            2.0 * n_bar * n_bar,
        ])?;
    }
    Ok(Report::new(table))
}
