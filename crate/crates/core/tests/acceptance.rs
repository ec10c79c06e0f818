//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if a required criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use common::*;
use polyvem::adapt::{doerfler_mark, run_adaptive, AdaptiveConfig, IterationRecord};
use polyvem::cases::{lshape_mesh, lshape_problem};
use polyvem::dfn::{build_minimal_dfn_mesh, check_conformity, FractureNetwork, NetworkDescription, THREE_FRACTURES};
use polyvem::estimator::estimate;
use polyvem::mesh::Mesh;
use polyvem::problem::Problem;
use polyvem::refine::{refine, RefinementParams};
use polyvem::report::{final_rate, CsvLog, TIMING_COLUMNS};
use polyvem::vem::{assemble_and_solve, build_dof_layout, energy_error, LinearSolver};

const WINDOW: usize = 5;
const PATCH_TOL: f64 = 1e-9;
const RATE_TOL: f64 = 0.20;
const SUBOPTIMAL_MARGIN: f64 = 0.15;
const EFFECTIVITY_RANGE: (f64, f64) = (0.01, 100.0);
const EFFECTIVITY_SPREAD: f64 = 3.0;
const TRI_SHARE: f64 = 0.85;
const AR_TOL: f64 = 0.30;
const EF_TOL: f64 = 0.15;
const EF_TARGET: [f64; 3] = [0.5, 3.0, 6.5];
const EXTENSION_MAX: f64 = 0.25;
const LSHAPE_BUDGET: usize = 10_000;
const DFN_BUDGET: usize = 100_000;
const SCALING_MAX: f64 = 2.8;

/// Criteria that are reported but do not fail the run; see the README.
const REPORT_ONLY: [usize; 1] = [3];

struct Outcome {
    id: usize,
    pass: bool,
}

fn report(out: &mut Vec<Outcome>, id: usize, pass: bool, msg: String) {
    println!("{} C{id:<2} {msg}", if pass { "PASS" } else { "FAIL" });
    out.push(Outcome { id, pass });
}

struct LshapeRun {
    k: usize,
    c_rho: f64,
    c_al: f64,
    records: Vec<IterationRecord>,
}

fn lshape_run(k: usize, c_rho: f64, c_al: f64) -> LshapeRun {
    let mut mesh = lshape_mesh();
    let cfg = AdaptiveConfig {
        k,
        params: RefinementParams::new(c_rho, c_al).unwrap(),
        dof_budget: LSHAPE_BUDGET,
        ..Default::default()
    };
    let run = run_adaptive(&mut mesh, &lshape_problem(), &cfg, |_| {}).map_err(|e| e.0).unwrap();
    LshapeRun { k, c_rho, c_al, records: run.records }
}

fn rate_ok(alpha: f64, k: usize) -> bool {
    let target = -(k as f64) / 2.0;
    (alpha - target).abs() <= RATE_TOL * target.abs()
}

fn eta_rate(records: &[IterationRecord]) -> f64 {
    final_rate(records, WINDOW, |r| Some(r.eta_rel)).unwrap()
}

fn err_rate(records: &[IterationRecord]) -> f64 {
    final_rate(records, WINDOW, |r| r.energy_error).unwrap()
}

fn patch_errors() -> (f64, f64) {
    let mut worst_err: f64 = 0.0;
    let mut worst_eta: f64 = 0.0;
    for mesh in [square(), voronoi(5), aligned()] {
        for k in 1..=3 {
            for deg in 1..=k {
                let problem = planar_problem(polynomial(deg), 1.0);
                let layout = build_dof_layout(&mesh, k).unwrap();
                let disc = assemble_and_solve(&mesh, layout, &problem, LinearSolver::Cholesky).unwrap();
                worst_err = worst_err.max(energy_error(&mesh, &disc, &problem).unwrap().0);
                worst_eta = worst_eta.max(estimate(&mesh, &disc, &problem).eta());
            }
        }
    }
    (worst_err, worst_eta)
}

/// Adaptive loop spelled out so that every refinement outcome can be checked.
/// Returns a description of the first violated property, if any.
fn structural_check(mut mesh: Mesh, problem: &Problem, k: usize, params: RefinementParams, budget: usize) -> Result<usize, String> {
    let area = mesh.active_area();
    let mut splits = 0;
    loop {
        let layout = build_dof_layout(&mesh, k).map_err(|e| e.to_string())?;
        let dofs = layout.n_dofs();
        let disc = assemble_and_solve(&mesh, layout, problem, LinearSolver::Cholesky).map_err(|e| e.to_string())?;
        if dofs >= budget {
            return Ok(splits);
        }
        let est = estimate(&mesh, &disc, problem);
        let ind: Vec<(usize, f64)> = est.cells.iter().map(|c| (c.cell, c.total())).collect();
        let marked = doerfler_mark(&ind, 0.5);
        let out = refine(&mut mesh, &marked, &params).map_err(|e| e.to_string())?;
        for s in &out.splits {
            if !s.children_convex {
                return Err(format!("non-convex child of cell {}", s.parent));
            }
            if s.child_vertices.iter().any(|&n| n > s.parent_vertices + 1) {
                return Err(format!("cell {} split into {:?} from {} vertices", s.parent, s.child_vertices, s.parent_vertices));
            }
        }
        splits += out.splits.len();
        if let Some(c) = mesh.active_cells().find(|&c| !mesh.is_cell_convex(c)) {
            return Err(format!("active cell {c} is not convex"));
        }
        let a = mesh.active_area();
        if (a - area).abs() > 1e-9 * area {
            return Err(format!("active area {a} differs from {area}"));
        }
        mesh.check_incidence()?;
    }
}

/// CSV of an L-shape run with the timing columns removed.
fn numeric_csv(k: usize) -> Vec<Vec<String>> {
    let mut mesh = lshape_mesh();
    let cfg = AdaptiveConfig { k, dof_budget: 3_000, ..Default::default() };
    let run = run_adaptive(&mut mesh, &lshape_problem(), &cfg, |_| {}).map_err(|e| e.0).unwrap();
    let mut log = CsvLog::new(Vec::new());
    for r in &run.records {
        log.push(r).unwrap();
    }
    let bytes = log.into_inner().unwrap();
    let mut rdr = csv::Reader::from_reader(&bytes[..]);
    let header = rdr.headers().unwrap().clone();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !TIMING_COLUMNS.contains(&&header[i])).collect();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            keep.iter().map(|&i| r[i].to_string()).collect()
        })
        .collect()
}

fn three_fractures() -> FractureNetwork {
    FractureNetwork::new(&NetworkDescription::from_json(THREE_FRACTURES).unwrap()).unwrap()
}

fn dfn_fixtures() -> Vec<(String, String)> {
    let mut out = vec![("three_fracture.json".to_string(), THREE_FRACTURES.to_string())];
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut paths: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for p in paths.into_iter().filter(|p| p.extension().is_some_and(|e| e == "json")) {
        out.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()));
    }
    out
}

/// Seconds spent marking and refining half the estimator mass of a mesh,
/// best of three.
fn mark_refine_time(mesh: &Mesh) -> f64 {
    let ind: Vec<(usize, f64)> = mesh
        .active_cells()
        .map(|c| (c, 1.0 + ((c as f64) * 0.618).fract()))
        .collect();
    (0..3)
        .map(|_| {
            let mut m = mesh.clone();
            let t = Instant::now();
            let marked = doerfler_mark(&ind, 0.5);
            refine(&mut m, &marked, &RefinementParams::default()).unwrap();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn main() {
    let started = Instant::now();
    let mut out = Vec::new();

    // 1. patch tests
    let (patch_err, patch_eta) = patch_errors();
    report(
        &mut out,
        1,
        patch_err <= PATCH_TOL,
        format!("patch tests k = 1..3 on square, Voronoi and aligned meshes: max relative energy error {patch_err:.2e} (<= {PATCH_TOL:e})"),
    );

    // 2. L-shape rates
    let mut runs = Vec::new();
    for c_rho in [0.5, 1.5] {
        for k in 1..=3 {
            runs.push(lshape_run(k, c_rho, 1.0));
        }
    }
    for r in &runs {
        let a = eta_rate(&r.records);
        report(
            &mut out,
            2,
            rate_ok(a, r.k),
            format!(
                "L-shape k = {}, c_rho = {}, c_al = {}: final slope {a:.3} vs {:.1} +- {:.0}% ({} dofs)",
                r.k,
                r.c_rho,
                r.c_al,
                -(r.k as f64) / 2.0,
                RATE_TOL * 100.0,
                r.records.last().unwrap().dofs
            ),
        );
    }

    // 3. c_al = 0 is worse
    let base = runs.iter().find(|r| r.k == 3 && r.c_rho == 0.5).unwrap();
    let plain = lshape_run(3, 0.5, 0.0);
    let (a1, a0) = (eta_rate(&base.records), eta_rate(&plain.records));
    report(
        &mut out,
        3,
        a0 >= a1 * (1.0 - SUBOPTIMAL_MARGIN),
        format!(
            "L-shape k = 3, c_rho = 0.5: slope {a0:.3} with c_al = 0 vs {a1:.3} with c_al = 1 (need >= {:.3})",
            a1 * (1.0 - SUBOPTIMAL_MARGIN)
        ),
    );

    // 4. estimator exactness and effectivity
    report(&mut out, 4, patch_eta <= PATCH_TOL, format!("estimator on polynomial solutions: max eta {patch_eta:.2e} (<= {PATCH_TOL:e})"));
    for r in &runs {
        let tail = &r.records[r.records.len() - WINDOW..];
        let all: Vec<f64> = r.records.iter().map(|x| x.effectivity.unwrap()).collect();
        let tl: Vec<f64> = tail.iter().map(|x| x.effectivity.unwrap()).collect();
        let (lo, hi) = (all.iter().copied().fold(f64::INFINITY, f64::min), all.iter().copied().fold(0.0, f64::max));
        let spread = tl.iter().copied().fold(0.0, f64::max) / tl.iter().copied().fold(f64::INFINITY, f64::min);
        report(
            &mut out,
            4,
            lo >= EFFECTIVITY_RANGE.0 && hi <= EFFECTIVITY_RANGE.1 && spread < EFFECTIVITY_SPREAD,
            format!(
                "effectivity k = {}, c_rho = {}: range [{lo:.3}, {hi:.3}], final spread {spread:.3} (< {EFFECTIVITY_SPREAD})",
                r.k, r.c_rho
            ),
        );
    }

    // 5. shape after 10 steps
    for r in runs.iter().filter(|r| r.c_rho == 1.5) {
        let q = &r.records[10].quality;
        let tri = q.r_tri + q.r_tri_al;
        let med = q.ar_rr.median;
        let sqrt10 = 10f64.sqrt();
        report(
            &mut out,
            5,
            tri >= TRI_SHARE && (med - sqrt10).abs() <= AR_TOL * sqrt10,
            format!(
                "L-shape k = {}, c_rho = 1.5, step 10: triangle share {tri:.3} (>= {TRI_SHARE}), median R/r {med:.3} (sqrt 10 +- {:.0}%)",
                r.k,
                AR_TOL * 100.0
            ),
        );
    }

    // 6. efficiency
    for r in runs.iter().filter(|r| r.c_rho == 1.5) {
        let ef = r.records.last().unwrap().quality.efficiency_inv();
        let target = EF_TARGET[r.k - 1];
        report(
            &mut out,
            6,
            (ef - target).abs() <= EF_TOL * target,
            format!("DOFs per cell k = {}: {ef:.3} vs {target} +- {:.0}%", r.k, EF_TOL * 100.0),
        );
    }

    // 7. structural properties and determinism
    let lshape = structural_check(lshape_mesh(), &lshape_problem(), 2, RefinementParams::new(0.5, 1.0).unwrap(), LSHAPE_BUDGET);
    let net = three_fractures();
    let dfn = structural_check(build_minimal_dfn_mesh(&net).unwrap(), &net.problem(), 1, RefinementParams::default(), 5_000);
    for (name, res) in [("L-shape", lshape), ("DFN", dfn)] {
        let pass = res.is_ok();
        let msg = match res {
            Ok(n) => format!("{name} adaptive run: {n} splits, children convex, <= parent + 1 vertices, areas tile"),
            Err(e) => format!("{name} adaptive run: {e}"),
        };
        report(&mut out, 7, pass, msg);
    }
    let (c1, c2) = (numeric_csv(2), numeric_csv(2));
    report(&mut out, 7, c1 == c2, format!("rerun reproduces numeric CSV columns ({} rows)", c1.len()));

    // 8. extension overhead
    for r in &runs {
        let late: Vec<f64> = r
            .records
            .iter()
            .filter(|x| x.m >= 10 && x.n_marked > 0)
            .map(|x| (x.n_refined as f64 - x.n_marked as f64) / x.n_marked as f64)
            .collect();
        let avg = late.iter().sum::<f64>() / late.len() as f64;
        report(
            &mut out,
            8,
            avg < EXTENSION_MAX,
            format!("extension overhead k = {}, c_rho = {}: {avg:.4} (< {EXTENSION_MAX})", r.k, r.c_rho),
        );
    }

    // 9. DFN rates
    for k in 1..=2 {
        let net = three_fractures();
        let mut mesh = build_minimal_dfn_mesh(&net).unwrap();
        let cfg = AdaptiveConfig { k, dof_budget: DFN_BUDGET, ..Default::default() };
        let run = run_adaptive(&mut mesh, &net.problem(), &cfg, |_| {}).map_err(|e| e.0).unwrap();
        let (ae, ar) = (eta_rate(&run.records), err_rate(&run.records));
        report(
            &mut out,
            9,
            rate_ok(ae, k) && rate_ok(ar, k),
            format!(
                "three fractures k = {k}: slopes eta {ae:.3}, error {ar:.3} vs {:.1} +- {:.0}% ({} dofs)",
                -(k as f64) / 2.0,
                RATE_TOL * 100.0,
                run.records.last().unwrap().dofs
            ),
        );
    }

    // 10. conformity
    for (name, text) in dfn_fixtures() {
        let t = Instant::now();
        let res = NetworkDescription::from_json(&text)
            .and_then(|d| FractureNetwork::new(&d))
            .and_then(|net| {
                let mesh = build_minimal_dfn_mesh(&net)?;
                check_conformity(&mesh, &net).map(|r| (net.traces.len(), r))
            });
        let ms = t.elapsed().as_secs_f64() * 1e3;
        match res {
            Ok((n, r)) => report(
                &mut out,
                10,
                true,
                format!("{name}: {n} traces conforming, nodes per trace {:?} ({ms:.1} ms)", r.nodes_per_trace),
            ),
            Err(e) => report(&mut out, 10, false, format!("{name}: {e}")),
        }
    }

    // refine + mark scaling
    let mut mesh = lshape_mesh();
    while mesh.n_active_cells() < 4_000 {
        let all: Vec<usize> = mesh.active_cells().collect();
        refine(&mut mesh, &all, &RefinementParams::default()).unwrap();
    }
    let mut sizes = Vec::new();
    for _ in 0..4 {
        sizes.push((mesh.n_active_cells(), mark_refine_time(&mesh)));
        let all: Vec<usize> = mesh.active_cells().collect();
        refine(&mut mesh, &all, &RefinementParams::default()).unwrap();
    }
    let worst = sizes
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).powf(1.0 / (w[1].0 as f64 / w[0].0 as f64).log2()))
        .fold(0.0, f64::max);
    let detail: Vec<String> = sizes.iter().map(|(n, t)| format!("{n}: {:.1} ms", t * 1e3)).collect();
    report(
        &mut out,
        11,
        worst <= SCALING_MAX,
        format!("mark + refine time per cell doubling: worst factor {worst:.2} (<= {SCALING_MAX}) [{}]", detail.join(", ")),
    );

    let required_failures: Vec<usize> = out.iter().filter(|o| !o.pass && !REPORT_ONLY.contains(&o.id)).map(|o| o.id).collect();
    let known: Vec<usize> = out.iter().filter(|o| !o.pass && REPORT_ONLY.contains(&o.id)).map(|o| o.id).collect();
    println!(
        "acceptance: {} checks, {} failed ({} report-only), {:.1} s",
        out.len(),
        required_failures.len() + known.len(),
        known.len(),
        started.elapsed().as_secs_f64()
    );
    if !required_failures.is_empty() {
        eprintln!("failed criteria: {required_failures:?}");
        std::process::exit(1);
    }
}
