//! Stationarity detection, diffusion density and the emergence condition.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::machines::OmegaEstimate;

pub const DEFAULT_WINDOW: usize = 100;
pub const DEFAULT_TOLERANCE: f64 = 0.002;
pub const DEFAULT_C: f64 = 0.5;
pub const DEFAULT_T0: usize = 1;

/// Mean-field stationary prevalence `2 exp(-1 / (m lambda))`.
///
/// Not clamped: the asymptotic form exceeds 1 once `m lambda > 1/ln 2`.
pub fn theoretical_prevalence(m: usize, lambda: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain("m must be at least 1"));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain("lambda must be positive"));
    }
    Ok(2.0 * libm::exp(-1.0 / (m as f64 * lambda)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityResult {
    /// First step at which the detector fired.
    pub t_s: Option<usize>,
    /// Mean of the series over `[t_s, end)`.
    pub rho_hat: Option<f64>,
    pub window: usize,
}

impl StationarityResult {
    /// Start of the earlier of the two windows that agreed, i.e. the first
    /// step already inside the plateau the detector confirmed.
    pub fn onset(&self) -> Option<usize> {
        self.t_s.map(|t| t - 2 * self.window)
    }
}

/// Two-window plateau detector: fires at the first `t >= 2W` (with at least
/// one sample left after it) where the means of `series[t-W..t]` and
/// `series[t-2W..t-W]` differ by at most `tol`.
pub fn detect_stationarity(series: &[f64], window: usize, tol: f64) -> Result<StationarityResult> {
    if window < 2 {
        return Err(Error::Param("stationarity window must be at least 2"));
    }
    if !(tol > 0.0) {
        return Err(Error::Param("stationarity tolerance must be positive"));
    }
    let mut prefix = alloc::vec::Vec::with_capacity(series.len() + 1);
    prefix.push(0.0);
    for &x in series {
        prefix.push(prefix.last().unwrap() + x);
    }
    let mean = |a: usize, b: usize| (prefix[b] - prefix[a]) / (b - a) as f64;
    let t_s = (2 * window..series.len()).find(|&t| {
        let recent = mean(t - window, t);
        let earlier = mean(t - 2 * window, t - window);
        libm::fabs(recent - earlier) <= tol
    });
    Ok(StationarityResult {
        t_s,
        rho_hat: t_s.map(|t| mean(t, series.len())),
        window,
    })
}

/// `ceil(N^C)`, with results within `1e-9` relative of an integer snapped
/// to it before rounding up.
pub fn c_of_n(n: usize, c: f64) -> Result<usize> {
    if n < 1 {
        return Err(Error::Param("N must be at least 1"));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Param("C must be in (0, 1]"));
    }
    let raw = libm::pow(n as f64, c);
    let nearest = libm::round(raw);
    let value = if libm::fabs(raw - nearest) <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        libm::ceil(raw)
    };
    Ok(value as usize)
}

fn check_window(traj: &Trajectory, t0: usize, cn: usize) -> Result<()> {
    if t0 >= cn {
        return Err(Error::Param("t0 must precede c(N)"));
    }
    if traj.is_empty() || cn > traj.last_step() {
        return Err(Error::Range {
            requested: cn,
            last: traj.last_step(),
        });
    }
    Ok(())
}

/// Average diffusion density: mean infected density over steps
/// `t0..=cn`.
pub fn measure_tau_e(traj: &Trajectory, t0: usize, cn: usize) -> Result<f64> {
    check_window(traj, t0, cn)?;
    let sum: f64 = traj.points[t0..=cn].iter().map(|p| p.infected_density).sum();
    Ok(sum / (cn - t0 + 1) as f64)
}

/// Same window average over the best-value carrier density.
pub fn measure_best_carrier_density(traj: &Trajectory, t0: usize, cn: usize) -> Result<f64> {
    check_window(traj, t0, cn)?;
    let sum: f64 = traj.points[t0..=cn].iter().map(|p| p.best_carrier_density).sum();
    Ok(sum / (cn - t0 + 1) as f64)
}

/// Bit length of `x`; a computable stand-in for the algorithmic complexity
/// of an integer output.
pub fn complexity_proxy(x: u64) -> u32 {
    u64::BITS - x.leading_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportParams {
    pub m: usize,
    pub lambda: f64,
    pub n: usize,
    pub c_exponent: f64,
    pub t0: usize,
    pub window: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergenceReport {
    pub tau_e: f64,
    /// Window mean of the best-value carrier density.
    pub tau_best: f64,
    pub omega_hat: f64,
    pub condition_met: bool,
    pub c_of_n: usize,
    /// `2 exp(-1/(m lambda))` unclamped; 0 in the `lambda = 0` limit.
    pub rho_theory: f64,
    pub rho_theory_clamped: f64,
    pub stationarity: StationarityResult,
    /// Whether the plateau began by step `c(N)`.
    pub stationary_within_c: bool,
    /// Bits of the largest displayed value at step `c(N)`.
    pub c_best: u32,
    /// Mean bits of the nodes' own fitness.
    pub c_bar_isolated: f64,
    /// `tau_e * (c_best - c_bar_isolated)`; a bit-length proxy.
    pub eeac_proxy: f64,
}

/// Assembles the emergence condition `tau_E > Omega` and the complexity
/// proxy for one run.
///
/// `condition_met` also requires the infected-density plateau to have
/// started no later than `c(N)`.
pub fn emergence_report(
    traj: &Trajectory,
    omega: &OmegaEstimate,
    own_fitness: &[u64],
    params: &ReportParams,
) -> Result<EmergenceReport> {
    if own_fitness.is_empty() {
        return Err(Error::Param("empty population"));
    }
    let cn = c_of_n(params.n, params.c_exponent)?;
    let tau_e = measure_tau_e(traj, params.t0, cn)?;
    let tau_best = measure_best_carrier_density(traj, params.t0, cn)?;
    let stationarity = detect_stationarity(&traj.infected_series(), params.window, params.tol)?;
    let stationary_within_c = stationarity.onset().is_some_and(|t| t <= cn);
    let rho_theory = if params.lambda == 0.0 {
        0.0
    } else {
        theoretical_prevalence(params.m, params.lambda)?
    };
    let c_best = complexity_proxy(traj.points[cn].max_displayed);
    let c_bar_isolated =
        own_fitness.iter().map(|&x| complexity_proxy(x) as f64).sum::<f64>() / own_fitness.len() as f64;
    Ok(EmergenceReport {
        tau_e,
        tau_best,
        omega_hat: omega.value,
        condition_met: tau_e > omega.value && stationary_within_c,
        c_of_n: cn,
        rho_theory,
        rho_theory_clamped: rho_theory.min(1.0),
        stationarity,
        stationary_within_c,
        c_best,
        c_bar_isolated,
        eeac_proxy: tau_e * (c_best as f64 - c_bar_isolated),
    })
}

/// Least-squares slope of `ln rho` against `1 / lambda`. Points with
/// non-positive `rho` or `lambda` are rejected.
pub fn prevalence_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Param("need at least two (lambda, rho) points"));
    }
    if points.iter().any(|&(l, r)| !(l > 0.0) || !(r > 0.0)) {
        return Err(Error::Domain("lambda and rho must be positive"));
    }
    let len = points.len() as f64;
    let xs = points.iter().map(|&(l, _)| 1.0 / l);
    let ys = points.iter().map(|&(_, r)| libm::log(r));
    let mx = xs.clone().sum::<f64>() / len;
    let my = ys.clone().sum::<f64>() / len;
    let sxx: f64 = xs.clone().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all lambda values coincide"));
    }
    Ok(sxy / sxx)
}
