//! The solve, estimate, mark, refine loop.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::estimator::{estimate, EstimatorReport};
use crate::mesh::{quality_report, CellId, Mesh, MeshQualityReport};
use crate::problem::Problem;
use crate::refine::{refine, RefineError, RefinementParams};
use crate::vem::{assemble_and_solve, build_dof_layout, energy_error, Discretization, LinearSolver, VemError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    /// Marking fraction in `[0, 1]`.
    pub theta: f64,
    pub k: usize,
    pub params: RefinementParams,
    /// The loop stops once the number of DOFs reaches this value.
    pub dof_budget: usize,
    /// Number of previous iterations used for the convergence rate.
    pub rate_window: usize,
    pub solver: LinearSolver,
    /// Hard cap on the number of iterations.
    pub max_iterations: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            theta: 0.5,
            k: 1,
            params: RefinementParams::default(),
            dof_budget: 10_000,
            rate_window: 5,
            solver: LinearSolver::Cholesky,
            max_iterations: 10_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("marking fraction must lie in [0, 1], got {0}")]
    BadTheta(f64),
    #[error("rate window must be at least 2")]
    BadWindow,
    #[error("iteration {iteration}: {source}")]
    Solve {
        iteration: usize,
        #[source]
        source: VemError,
    },
    #[error("iteration {iteration}: {source}")]
    Refine {
        iteration: usize,
        #[source]
        source: RefineError,
    },
}

/// Wall-clock seconds spent in each phase of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PhaseTimes {
    pub solve: f64,
    pub estimate: f64,
    pub mark: f64,
    pub refine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub m: usize,
    pub dofs: usize,
    pub cells: usize,
    pub eta: f64,
    pub eta_rel: f64,
    /// Relative energy error, when the exact solution is known.
    pub energy_error: Option<f64>,
    /// `energy_error / eta_rel`.
    pub effectivity: Option<f64>,
    /// Slope of `log eta_rel` against `log dofs` over the previous
    /// `rate_window` iterations; NaN before enough iterations exist.
    pub alpha: f64,
    pub quality: MeshQualityReport,
    pub n_marked: usize,
    pub n_refined: usize,
    pub n_extended: usize,
    pub times: PhaseTimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    /// Every local indicator is zero.
    Converged,
    /// Refinement did not split any cell.
    NoProgress,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
}

/// Everything an observer can see after an iteration has been estimated,
/// before the mesh is refined.
pub struct IterationView<'a> {
    pub mesh: &'a Mesh,
    pub record: &'a IterationRecord,
    pub disc: &'a Discretization,
    pub estimate: &'a EstimatorReport,
}

/// Least-squares slope of `log y` against `log x`. NaN for fewer than two
/// points or non-positive data.
pub fn log_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// Dörfler marking: cells sorted by decreasing indicator (ties by id), the
/// shortest prefix whose sum reaches `theta` times the total.
pub fn doerfler_mark(indicators: &[(CellId, f64)], theta: f64) -> Vec<CellId> {
    let total: f64 = indicators.iter().map(|&(_, e)| e).sum();
    if !(total > 0.0) || theta <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<(CellId, f64)> = indicators.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let target = theta.min(1.0) * total;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for (c, e) in order {
        if acc >= target || e <= 0.0 {
            break;
        }
        acc += e;
        out.push(c);
    }
    out
}

/// Run the adaptive loop on `mesh`, which is refined in place.
/// `observe` is called once per iteration after estimation.
pub fn run_adaptive<F>(
    mesh: &mut Mesh,
    problem: &Problem,
    config: &AdaptiveConfig,
    mut observe: F,
) -> Result<AdaptiveRun, (AdaptError, Vec<IterationRecord>)>
where
    F: FnMut(&IterationView<'_>),
{
    let mut records: Vec<IterationRecord> = Vec::new();
    if !(0.0..=1.0).contains(&config.theta) {
        return Err((AdaptError::BadTheta(config.theta), records));
    }
    if config.rate_window < 2 {
        return Err((AdaptError::BadWindow, records));
    }
    for m in 0.. {
        let t0 = Instant::now();
        let solved = build_dof_layout(mesh, config.k)
            .and_then(|layout| assemble_and_solve(mesh, layout, problem, config.solver));
        let disc = match solved {
            Ok(d) => d,
            Err(source) => return Err((AdaptError::Solve { iteration: m, source }, records)),
        };
        let t_solve = t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let est = estimate(mesh, &disc, problem);
        let energy = energy_error(mesh, &disc, problem).map(|e| e.0);
        let t_estimate = t0.elapsed().as_secs_f64();

        let dofs = disc.layout.n_dofs();
        let alpha = if records.len() >= config.rate_window {
            let pts: Vec<(f64, f64)> = records[records.len() - config.rate_window..]
                .iter()
                .map(|r| (r.dofs as f64, r.eta_rel))
                .collect();
            log_slope(&pts)
        } else {
            f64::NAN
        };
        let mut record = IterationRecord {
            m,
            dofs,
            cells: mesh.n_active_cells(),
            eta: est.eta(),
            eta_rel: est.eta_rel,
            energy_error: energy,
            effectivity: energy.map(|e| e / est.eta_rel),
            alpha,
            quality: quality_report(mesh, dofs),
            n_marked: 0,
            n_refined: 0,
            n_extended: 0,
            times: PhaseTimes {
                solve: t_solve,
                estimate: t_estimate,
                ..PhaseTimes::default()
            },
        };

        let stop = if dofs >= config.dof_budget {
            Some(StopReason::Budget)
        } else if m + 1 >= config.max_iterations {
            Some(StopReason::IterationLimit)
        } else {
            None
        };
        if let Some(stop) = stop {
            observe(&IterationView { mesh, record: &record, disc: &disc, estimate: &est });
            records.push(record);
            return Ok(AdaptiveRun { records, stop });
        }

        let t0 = Instant::now();
        let indicators: Vec<(CellId, f64)> = est.cells.iter().map(|c| (c.cell, c.total())).collect();
        let marked = doerfler_mark(&indicators, config.theta);
        record.times.mark = t0.elapsed().as_secs_f64();
        record.n_marked = marked.len();
        observe(&IterationView { mesh, record: &record, disc: &disc, estimate: &est });
        if marked.is_empty() {
            records.push(record);
            return Ok(AdaptiveRun { records, stop: StopReason::Converged });
        }

        let t0 = Instant::now();
        let outcome = match refine(mesh, &marked, &config.params) {
            Ok(o) => o,
            Err(source) => {
                records.push(record);
                return Err((AdaptError::Refine { iteration: m, source }, records));
            }
        };
        record.times.refine = t0.elapsed().as_secs_f64();
        record.n_refined = outcome.refined.len();
        record.n_extended = outcome.extended.len();
        records.push(record);
        if outcome.refined.is_empty() {
            return Ok(AdaptiveRun { records, stop: StopReason::NoProgress });
        }
    }
    unreachable!("the loop only exits through return")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks_minimal_prefix() {
        let ind = [(0, 1.0), (1, 4.0), (2, 2.0), (3, 3.0)];
        assert_eq!(doerfler_mark(&ind, 0.5), vec![1, 3]);
        assert_eq!(doerfler_mark(&ind, 0.0), Vec::<CellId>::new());
        assert_eq!(doerfler_mark(&ind, 1.0), vec![1, 3, 2, 0]);
        assert!(doerfler_mark(&[(0, 0.0), (1, 0.0)], 0.5).is_empty());
    }

    #[test]
    fn theta_one_skips_zero_cells() {
        let ind = [(0, 1.0), (1, 0.0), (2, 2.0)];
        assert_eq!(doerfler_mark(&ind, 1.0), vec![2, 0]);
    }

    #[test]
    fn ties_broken_by_id() {
        let a = [(5, 1.0), (2, 1.0), (9, 1.0), (1, 0.5)];
        let mut b = a;
        b.reverse();
        assert_eq!(doerfler_mark(&a, 0.5), vec![2, 5]);
        assert_eq!(doerfler_mark(&b, 0.5), vec![2, 5]);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (10f64.powi(i), 3.0 * 10f64.powf(-0.75 * i as f64))).collect();
        assert!((log_slope(&pts) + 0.75).abs() < 1e-12);
        assert!(log_slope(&pts[..1]).is_nan());
        assert!(log_slope(&[(1.0, 1.0), (1.0, 2.0)]).is_nan());
    }
}
