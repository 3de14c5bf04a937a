//! `qfi`, `precision` and `scan`: scenario evaluation over a config grid.

use std::f64::consts::PI;

use rayon::prelude::*;
use tavis_core::measurement::{delta_h, optimize_numeric, optimize_quadrature, MeasurementSpec, NumericProbe};
use tavis_core::qfi::{qfi_cs, qfi_dsts_closed_form, qfi_dsvs, qfi_oat_cs, qfi_svs, reference_lines};
use tavis_core::states::{optical_moments, photon_distribution, spin_moments, GaussianSpec, SpinStateSpec};
use tavis_core::SystemParams;

use crate::config::{Point, ScanConfig, Scenario, Var};
use crate::error::{CliError, Result};
use crate::table::{Report, ResultTable};
use crate::Command;

fn allowed(scenario: Scenario) -> &'static [Var] {
    use Var::*;
    match scenario {
        Scenario::Cs => &[NBar, Theta, Phi, T, Varphi],
        Scenario::Svs => &[Sinh2r, Theta, Phi, T, Varphi],
        Scenario::Dsvs => &[NBar, AlphaSq, Sinh2r, Tau, Theta, Phi, T, Varphi],
        Scenario::Oat => &[Chi, NBar, T],
        Scenario::DstsGeneral => &[AlphaSq, Sinh2r, Tau, NTh, Theta, Phi, T, Varphi],
    }
}

/// Per-point view of config values: grid first, then fixed, then default.
struct At<'a> {
    cfg: &'a ScanConfig,
    point: &'a Point,
}

impl At<'_> {
    fn get(&self, var: Var, default: f64) -> f64 {
        self.point.get(var).unwrap_or_else(|| self.cfg.fixed_or(var, default))
    }

    fn has(&self, var: Var) -> bool {
        self.point.get(var).is_some() || self.cfg.fixed.contains_key(&var)
    }

    fn params(&self, base: &SystemParams) -> SystemParams {
        base.with_t(self.get(Var::T, base.t))
    }

    fn context(&self) -> String {
        format!("at {}", self.point)
    }

    fn config_error(&self, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("{msg} at {}", self.point))
    }

    /// Light of the scenario as a Gaussian spec.
    fn light(&self) -> Result<GaussianSpec> {
        let ctx = self.context();
        match self.cfg.scenario {
            Scenario::Cs | Scenario::Oat => GaussianSpec::coherent(self.get(Var::NBar, 100.0).max(0.0).sqrt()),
            Scenario::Svs => GaussianSpec::squeezed_vacuum(self.get(Var::Sinh2r, 1.0).sqrt().asinh()),
            Scenario::Dsvs => {
                let s = self.get(Var::Sinh2r, 1.0);
                let tau = self.get(Var::Tau, 1.0);
                let alpha_sq = if self.has(Var::AlphaSq) {
                    self.get(Var::AlphaSq, 0.0)
                } else {
                    let n_bar = self.get(Var::NBar, 100.0);
                    if s > n_bar {
                        return Err(self.config_error(format!("sinh2r = {s} exceeds n_bar = {n_bar}")));
                    }
                    n_bar - s
                };
                GaussianSpec::displaced_squeezed(alpha_sq, s, tau)
            }
            Scenario::DstsGeneral => {
                let tau = self.get(Var::Tau, 1.0);
                if !(-1.0..=1.0).contains(&tau) {
                    return Err(self.config_error(format!("tau = {tau} outside [-1, 1]")));
                }
                GaussianSpec::new(
                    self.get(Var::AlphaSq, 0.0).max(0.0).sqrt(),
                    tau.acos() / 2.0,
                    self.get(Var::Sinh2r, 0.0).max(0.0).sqrt().asinh(),
                    0.0,
                    self.get(Var::NTh, 0.0),
                )
            }
        }
        .map_err(CliError::core(ctx))
    }
}

/// Named outputs of one point, in column order.
type Cells = Vec<(&'static str, f64)>;

fn qfi_cells(at: &At, base: &SystemParams) -> Result<Cells> {
    let p = at.params(base);
    let n = at.cfg.n_atoms;
    let ctx = || at.context();
    let t = p.t;
    Ok(match at.cfg.scenario {
        Scenario::Cs => {
            let n_bar = at.get(Var::NBar, 100.0);
            let r = qfi_cs(at.get(Var::Theta, PI / 2.0), n_bar, n, &p).map_err(CliError::core(ctx()))?;
            let lines = reference_lines(n_bar, n, &p).map_err(CliError::core(ctx()))?;
            let x = p.dispersive_ratio().map_err(CliError::core(ctx()))?;
            vec![
                ("x_dispersive", x * n_bar),
                ("qfi_s2", r.value),
                ("qcrb_per_t", r.qcrb() * t),
                ("asymptote_s2", r.reference("asymptote").unwrap_or(0.0)),
                ("sql_s2", lines.sql),
                ("hl_s2", lines.hl),
            ]
        }
        Scenario::Svs => {
            let s = at.get(Var::Sinh2r, 1.0);
            let r = qfi_svs(s.sqrt().asinh(), n, &p).map_err(CliError::core(ctx()))?;
            vec![
                ("n_bar", s),
                ("qfi_s2", r.value),
                ("qcrb_per_t", r.qcrb() * t),
                ("bound_s2", r.reference("bound").unwrap_or(0.0)),
            ]
        }
        Scenario::Dsvs => {
            let g = at.light()?;
            let r = qfi_dsvs(&g, n, &p).map_err(CliError::core(ctx()))?;
            let m = optical_moments(&g);
            vec![
                ("n_bar", m.n_bar),
                ("alpha_sq", g.alpha_mag.powi(2)),
                ("var_n", m.var_n),
                ("qfi_s2", r.value),
                ("qcrb_per_t", r.qcrb() * t),
            ]
        }
        Scenario::Oat => {
            let chi = at.get(Var::Chi, PI);
            let r = qfi_oat_cs(chi, n, at.get(Var::NBar, 100.0), &p).map_err(CliError::core(ctx()))?;
            vec![
                ("var_jz", spin_moments(&SpinStateSpec::Oat { chi }, n).var_jz),
                ("qfi_s2", r.value),
                ("qcrb_per_t", r.qcrb() * t),
                ("bound_s2", r.reference("bound").unwrap_or(0.0)),
            ]
        }
        Scenario::DstsGeneral => {
            let g = at.light()?;
            let spin = SpinStateSpec::Coherent { theta: at.get(Var::Theta, PI / 2.0), phi: at.get(Var::Phi, 0.0) };
            let r = qfi_dsts_closed_form(&g, &spin, n, &p).map_err(CliError::core(ctx()))?;
            let m = optical_moments(&g);
            vec![("n_bar", m.n_bar), ("var_n", m.var_n), ("qfi_s2", r.value), ("qcrb_per_t", r.qcrb() * t)]
        }
    })
}

fn precision_cells(at: &At, base: &SystemParams) -> Result<Cells> {
    let p = at.params(base);
    let n = at.cfg.n_atoms;
    let ctx = || at.context();
    let t = p.t;
    let (theta, phi) = (at.get(Var::Theta, PI / 2.0), at.get(Var::Phi, 0.0));
    let given = at.has(Var::Varphi).then(|| at.get(Var::Varphi, 0.0).rem_euclid(2.0 * PI));
    match at.cfg.scenario {
        Scenario::Oat => Err(CliError::Config("precision needs a spin-coherent probe; scenario oat has none".into())),
        Scenario::Cs => {
            let n_bar = at.get(Var::NBar, 100.0);
            let template = MeasurementSpec::new(0.0, theta, phi, true).map_err(CliError::core(ctx()))?;
            let varphi = match given {
                Some(v) => v,
                None => optimize_quadrature(&template, n, n_bar, &p).map_err(CliError::core(ctx()))?,
            };
            let numeric = template.with_varphi(varphi);
            let analytic = MeasurementSpec { use_numeric_oracle: false, ..numeric };
            let a = delta_h(&analytic, n, n_bar, &p).map_err(CliError::core(ctx()))?;
            let b = delta_h(&numeric, n, n_bar, &p).map_err(CliError::core(ctx()))?;
            Ok(vec![
                ("varphi", varphi),
                ("delta_h_analytic_per_t", a.delta_h * t),
                ("delta_h_numeric_per_t", b.delta_h * t),
                ("qcrb_probe_per_t", b.qcrb * t),
            ])
        }
        _ => {
            let g = at.light()?;
            if !g.is_pure() {
                return Err(at.config_error("precision needs pure light (n_th = 0)"));
            }
            let dist = photon_distribution(&g).map_err(CliError::core(ctx()))?;
            let probe = NumericProbe::new(theta, phi, n, &dist, &p).map_err(CliError::core(ctx()))?;
            let varphi = given.unwrap_or_else(|| optimize_numeric(&probe));
            let dh = probe.delta_h(varphi).map_err(CliError::core(ctx()))?;
            let spin = SpinStateSpec::Coherent { theta, phi };
            let qcrb = qfi_dsts_closed_form(&g, &spin, n, &p).map_err(CliError::core(ctx()))?.qcrb();
            Ok(vec![("varphi", varphi), ("delta_h_numeric_per_t", dh * t), ("qcrb_probe_per_t", qcrb * t)])
        }
    }
}

/// Runs `qfi`, `precision` or `scan` (both) over the configured grid.
pub fn run(command: Command, cfg: &ScanConfig) -> Result<Report> {
    let scenario = cfg.scenario;
    let ok = allowed(scenario);
    for var in cfg.grid.keys().chain(cfg.fixed.keys()) {
        if !ok.contains(var) {
            return Err(CliError::Config(format!("`{}` has no meaning for scenario {scenario}", var.name())));
        }
    }
    let given = |v: Var| cfg.grid.contains_key(&v) || cfg.fixed.contains_key(&v);
    if scenario == Scenario::Dsvs && given(Var::NBar) && given(Var::AlphaSq) {
        return Err(CliError::Config("dsvs takes either n_bar or alpha_sq, not both".into()));
    }
    let base = cfg.system()?;
    let (want_qfi, want_precision) = match command {
        Command::Qfi => (true, false),
        Command::Precision => (false, true),
        _ => (true, scenario != Scenario::Oat),
    };
    let points = cfg.points();
    let rows: Vec<Cells> = points
        .par_iter()
        .map(|point| {
            let at = At { cfg, point };
            let mut cells = Vec::new();
            if want_qfi {
                cells.extend(qfi_cells(&at, &base)?);
            }
            if want_precision {
                cells.extend(precision_cells(&at, &base)?);
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;

    let grid_vars = cfg.grid_vars();
    let keep = |name: &str| !grid_vars.iter().any(|v| v.name() == name);
    let mut columns: Vec<&str> = grid_vars.iter().map(|v| v.name()).collect();
    if let Some(first) = rows.first() {
        columns.extend(first.iter().map(|c| c.0).filter(|c| keep(c)));
    }
    let mut table = ResultTable::new("main", &columns, grid_vars.len());
    for (point, cells) in points.iter().zip(rows) {
        let mut row: Vec<f64> = point.values.iter().map(|v| v.1).collect();
        row.extend(cells.into_iter().filter(|c| keep(c.0)).map(|c| c.1));
        table.push(row)?;
    }
    Ok(Report::new(table))
}
