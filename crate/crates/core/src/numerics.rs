//! Small scalar routines shared by sweeps: grids, 1-D minimization, root
//! bracketing and log-log regression.

use crate::error::{Error, Result};

/// `points` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![min],
        _ => (0..points)
            .map(|i| if i == points - 1 { max } else { min + (max - min) * i as f64 / (points - 1) as f64 })
            .collect(),
    }
}

/// `points` log-spaced values from `min` to `max` inclusive (both > 0).
pub fn logspace(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > 0.0) {
        return Err(Error::InvalidParameter(format!("log grid needs positive bounds, got [{min}, {max}]")));
    }
    let mut out: Vec<f64> = linspace(min.ln(), max.ln(), points).into_iter().map(f64::exp).collect();
    if let Some(first) = out.first_mut() {
        *first = min;
    }
    if let Some(last) = out.last_mut() {
        *last = max;
    }
    Ok(out)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Outcome of [`bisect`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on a sign change of `f` over `[a, b]`, stopping after
/// `max_iter` halvings or once `|f| ≤ residual_tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, residual_tol: f64, max_iter: usize) -> Result<Root> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidParameter(format!("no sign change on [{a}, {b}]")));
    }
    let mut best = Root { x: a, residual: fa.abs(), iterations: 0 };
    for it in 1..=max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m);
        best = Root { x: m, residual: fm.abs(), iterations: it };
        if fm.abs() <= residual_tol || m == a || m == b {
            break;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(best)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("slope needs at least two matching points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("log-log slope needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_endpoints() {
        let l = linspace(0.0, 1.0, 5);
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = logspace(0.1, 1e4, 7).unwrap();
        assert_eq!((g[0], g[6]), (0.1, 1e4));
        assert!((g[1] / g[0] - g[2] / g[1]).abs() < 1e-12);
        assert!(logspace(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        let x = golden_section_min(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-6);
    }

    #[test]
    fn bisection_converges() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 0.0, 60).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0, 0.0, 60).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs = logspace(1.0, 1e3, 10).unwrap();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.7)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 1.7).abs() < 1e-12);
    }
}
