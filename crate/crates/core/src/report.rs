//! Run artifacts: per-iteration CSV rows, run summary and mesh snapshots.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adapt::{log_slope, AdaptiveRun, IterationRecord, IterationView, StopReason};
use crate::mesh::export::{write_svg, write_vtk};

/// One line of `iterations.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub m: usize,
    pub dofs: usize,
    pub cells: usize,
    pub eta_rel: f64,
    pub energy_err: Option<f64>,
    pub effectivity: Option<f64>,
    pub alpha: f64,
    #[serde(rename = "R_tri")]
    pub r_tri: f64,
    #[serde(rename = "R_quad")]
    pub r_quad: f64,
    #[serde(rename = "R_poly")]
    pub r_poly: f64,
    #[serde(rename = "R_tri_al")]
    pub r_tri_al: f64,
    #[serde(rename = "R_quad_al")]
    pub r_quad_al: f64,
    #[serde(rename = "Ef_inv")]
    pub ef_inv: f64,
    #[serde(rename = "ar_Rr_min")]
    pub ar_rr_min: f64,
    #[serde(rename = "ar_Rr_q1")]
    pub ar_rr_q1: f64,
    #[serde(rename = "ar_Rr_med")]
    pub ar_rr_med: f64,
    #[serde(rename = "ar_Rr_q3")]
    pub ar_rr_q3: f64,
    #[serde(rename = "ar_Rr_max")]
    pub ar_rr_max: f64,
    #[serde(rename = "ar_Rr_avg")]
    pub ar_rr_avg: f64,
    #[serde(rename = "ar_Rh_min")]
    pub ar_rh_min: f64,
    #[serde(rename = "ar_Rh_q1")]
    pub ar_rh_q1: f64,
    #[serde(rename = "ar_Rh_med")]
    pub ar_rh_med: f64,
    #[serde(rename = "ar_Rh_q3")]
    pub ar_rh_q3: f64,
    #[serde(rename = "ar_Rh_max")]
    pub ar_rh_max: f64,
    #[serde(rename = "ar_Rh_avg")]
    pub ar_rh_avg: f64,
    #[serde(rename = "rho_E_avg")]
    pub rho_e_avg: f64,
    #[serde(rename = "h_E_avg")]
    pub h_e_avg: f64,
    #[serde(rename = "r_E_avg")]
    pub r_e_avg: f64,
    pub n_marked: usize,
    pub n_refined: usize,
    pub n_extended: usize,
    pub t_solve: f64,
    pub t_mark: f64,
    pub t_refine: f64,
}

/// Columns holding wall-clock times; everything else is deterministic.
pub const TIMING_COLUMNS: [&str; 3] = ["t_solve", "t_mark", "t_refine"];

impl From<&IterationRecord> for CsvRow {
    fn from(r: &IterationRecord) -> Self {
        let q = &r.quality;
        Self {
            m: r.m,
            dofs: r.dofs,
            cells: r.cells,
            eta_rel: r.eta_rel,
            energy_err: r.energy_error,
            effectivity: r.effectivity,
            alpha: r.alpha,
            r_tri: q.r_tri,
            r_quad: q.r_quad,
            r_poly: q.r_poly,
            r_tri_al: q.r_tri_al,
            r_quad_al: q.r_quad_al,
            ef_inv: q.efficiency_inv(),
            ar_rr_min: q.ar_rr.min,
            ar_rr_q1: q.ar_rr.q1,
            ar_rr_med: q.ar_rr.median,
            ar_rr_q3: q.ar_rr.q3,
            ar_rr_max: q.ar_rr.max,
            ar_rr_avg: q.ar_rr.mean,
            ar_rh_min: q.ar_rh.min,
            ar_rh_q1: q.ar_rh.q1,
            ar_rh_med: q.ar_rh.median,
            ar_rh_q3: q.ar_rh.q3,
            ar_rh_max: q.ar_rh.max,
            ar_rh_avg: q.ar_rh.mean,
            rho_e_avg: q.rho.mean,
            h_e_avg: q.h.mean,
            r_e_avg: q.r.mean,
            n_marked: r.n_marked,
            n_refined: r.n_refined,
            n_extended: r.n_extended,
            t_solve: r.times.solve,
            t_mark: r.times.mark,
            t_refine: r.times.refine,
        }
    }
}

/// Streams rows to `iterations.csv`, flushing after each one so a run that
/// dies midway still leaves its history behind.
pub struct CsvLog<W: Write> {
    inner: csv::Writer<W>,
}

impl CsvLog<File> {
    pub fn create(path: &Path) -> io::Result<Self> {
        Ok(Self::new(File::create(path)?))
    }
}

impl<W: Write> CsvLog<W> {
    pub fn new(w: W) -> Self {
        Self { inner: csv::Writer::from_writer(w) }
    }

    pub fn push(&mut self, record: &IterationRecord) -> io::Result<()> {
        self.inner.serialize(CsvRow::from(record)).map_err(io::Error::other)?;
        self.inner.flush()
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.inner.into_inner().map_err(|e| e.into_error())
    }
}

pub fn read_csv<R: io::Read>(r: R) -> Result<Vec<CsvRow>, csv::Error> {
    csv::Reader::from_reader(r).deserialize().collect()
}

/// Final figures of a run, written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub case: String,
    pub k: usize,
    pub theta: f64,
    pub c_rho: f64,
    pub c_al: f64,
    pub dof_budget: usize,
    pub stop: String,
    pub iterations: usize,
    pub dofs: usize,
    pub cells: usize,
    pub eta_rel: f64,
    pub energy_error: Option<f64>,
    /// Slope of `eta_rel` over the last `window` iterations; absent for
    /// runs too short to fit one.
    pub rate_eta: Option<f64>,
    /// Slope of the energy error over the same iterations.
    pub rate_error: Option<f64>,
    pub window: usize,
    pub effectivity_min: Option<f64>,
    pub effectivity_max: Option<f64>,
    pub ef_inv: f64,
    pub time_solve: f64,
    pub time_estimate: f64,
    pub time_mark: f64,
    pub time_refine: f64,
}

/// Run parameters echoed into the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLabel {
    pub case: String,
    pub k: usize,
    pub theta: f64,
    pub c_rho: f64,
    pub c_al: f64,
    pub dof_budget: usize,
}

/// Slope of `value` against DOFs over the last `window` records.
pub fn final_rate(records: &[IterationRecord], window: usize, value: impl Fn(&IterationRecord) -> Option<f64>) -> Option<f64> {
    let tail = &records[records.len().saturating_sub(window)..];
    let pts: Option<Vec<(f64, f64)>> = tail.iter().map(|r| value(r).map(|v| (r.dofs as f64, v))).collect();
    pts.map(|p| log_slope(&p))
}

pub fn summarize(label: &RunLabel, run: &AdaptiveRun, window: usize) -> RunSummary {
    let recs = &run.records;
    let last = recs.last().expect("an adaptive run has at least one iteration");
    let eff_tail: Option<Vec<f64>> = recs[recs.len().saturating_sub(window)..].iter().map(|r| r.effectivity).collect();
    let stop = match run.stop {
        StopReason::Budget => "budget",
        StopReason::Converged => "converged",
        StopReason::NoProgress => "no_progress",
        StopReason::IterationLimit => "iteration_limit",
    };
    RunSummary {
        case: label.case.clone(),
        k: label.k,
        theta: label.theta,
        c_rho: label.c_rho,
        c_al: label.c_al,
        dof_budget: label.dof_budget,
        stop: stop.to_string(),
        iterations: recs.len(),
        dofs: last.dofs,
        cells: last.cells,
        eta_rel: last.eta_rel,
        energy_error: last.energy_error,
        rate_eta: final_rate(recs, window, |r| Some(r.eta_rel)).filter(|a| a.is_finite()),
        rate_error: final_rate(recs, window, |r| r.energy_error).filter(|a| a.is_finite()),
        window,
        effectivity_min: eff_tail.as_ref().map(|v| v.iter().copied().fold(f64::INFINITY, f64::min)),
        effectivity_max: eff_tail.as_ref().map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        ef_inv: last.quality.efficiency_inv(),
        time_solve: recs.iter().map(|r| r.times.solve).sum(),
        time_estimate: recs.iter().map(|r| r.times.estimate).sum(),
        time_mark: recs.iter().map(|r| r.times.mark).sum(),
        time_refine: recs.iter().map(|r| r.times.refine).sum(),
    }
}

/// Squared local indicators in active cell order.
fn cell_indicators(view: &IterationView<'_>) -> Vec<f64> {
    let mut by_id: Vec<(usize, f64)> = view.estimate.cells.iter().map(|c| (c.cell, c.total())).collect();
    by_id.sort_by_key(|&(c, _)| c);
    by_id.into_iter().map(|(_, e)| e).collect()
}

/// Write `mesh_<m>.vtk` and `mesh_<m>.svg` into `dir`.
pub fn write_snapshot(dir: &Path, view: &IterationView<'_>) -> io::Result<()> {
    let m = view.record.m;
    let eta2 = cell_indicators(view);
    let fracture: Vec<f64> = view.mesh.active_cells().map(|c| view.mesh.cells[c].fracture as f64).collect();
    let vtk = BufWriter::new(File::create(dir.join(format!("mesh_{m}.vtk")))?);
    write_vtk(vtk, view.mesh, &[("eta2", &eta2), ("fracture", &fracture)])?;
    let svg = BufWriter::new(File::create(dir.join(format!("mesh_{m}.svg")))?);
    write_svg(svg, view.mesh, Some(&eta2), "log10 eta_E^2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::{run_adaptive, AdaptiveConfig};
    use crate::cases::{lshape_mesh, lshape_problem};

    fn short_run() -> AdaptiveRun {
        let mut mesh = lshape_mesh();
        let cfg = AdaptiveConfig { dof_budget: 60, ..Default::default() };
        run_adaptive(&mut mesh, &lshape_problem(), &cfg, |_| {}).map_err(|e| e.0).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let run = short_run();
        let mut log = CsvLog::new(Vec::new());
        for r in &run.records {
            log.push(r).unwrap();
        }
        let bytes = log.into_inner().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("m,dofs,cells,eta_rel,energy_err,effectivity,alpha,R_tri,R_quad,R_poly,R_tri_al,R_quad_al,Ef_inv,ar_Rr_min"));
        assert!(header.ends_with("n_marked,n_refined,n_extended,t_solve,t_mark,t_refine"));
        let rows = read_csv(&bytes[..]).unwrap();
        assert_eq!(rows.len(), run.records.len());
        // alpha is NaN, so compare the debug forms
        assert_eq!(format!("{:?}", rows[0]), format!("{:?}", CsvRow::from(&run.records[0])));
        assert!(rows[0].alpha.is_nan());
    }

    #[test]
    fn summary_uses_last_window() {
        let run = short_run();
        let label = RunLabel { case: "lshape".into(), k: 1, theta: 0.5, c_rho: 1.5, c_al: 1.0, dof_budget: 60 };
        let s = summarize(&label, &run, 5);
        assert_eq!(s.iterations, run.records.len());
        assert_eq!(s.stop, "budget");
        assert!(s.dofs >= 60);
        assert!(s.rate_eta.unwrap() < 0.0);
        assert!(s.effectivity_min.unwrap() <= s.effectivity_max.unwrap());
    }
}
