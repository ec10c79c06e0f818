use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use polyvem::adapt::{run_adaptive, AdaptiveConfig};
use polyvem::cases::{lshape_mesh, lshape_problem};
use polyvem::dfn::{build_minimal_dfn_mesh, check_conformity, FractureNetwork, NetworkDescription, THREE_FRACTURES};
use polyvem::mesh::Mesh;
use polyvem::problem::Problem;
use polyvem::refine::RefinementParams;
use polyvem::report::{summarize, write_snapshot, CsvLog, RunLabel};
use polyvem::vem::LinearSolver;

/// Overrides the output directory of `run`.
const OUT_ENV: &str = "POLYVEM_OUT";

#[derive(Parser)]
#[command(name = "polyvem", version, about = "Adaptive virtual elements on polygonal meshes and fracture networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive loop and write iterations.csv, summary.json and mesh snapshots.
    Run(RunArgs),
    /// Check a network file: planarity, traces and conformity of the minimal mesh.
    Validate {
        network: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Case {
    Lshape,
    Dfn,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Solver {
    Cholesky,
    Cg,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "lshape")]
    case: Case,
    /// Polynomial degree (1 to 3).
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    c_rho: f64,
    #[arg(long, default_value_t = 1.0)]
    c_al: f64,
    /// DOF budget; defaults to 1e4 for lshape and custom, 5e5 for dfn.
    #[arg(long)]
    max_dofs: Option<usize>,
    /// Iterations at which to write mesh snapshots, comma separated.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Network description (JSON); the dfn case defaults to the built-in three-fracture network.
    #[arg(long)]
    network: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cholesky")]
    solver: Solver,
    /// TOML file whose entries override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    case: Option<Case>,
    k: Option<usize>,
    theta: Option<f64>,
    c_rho: Option<f64>,
    c_al: Option<f64>,
    max_dofs: Option<usize>,
    snapshots: Option<Vec<usize>>,
    out: Option<PathBuf>,
    network: Option<PathBuf>,
    solver: Option<Solver>,
}

#[derive(Debug)]
struct RunConfig {
    case: Case,
    k: usize,
    theta: f64,
    c_rho: f64,
    c_al: f64,
    dof_budget: usize,
    snapshots: Vec<usize>,
    out: PathBuf,
    network: Option<PathBuf>,
    solver: Solver,
}

impl RunConfig {
    fn resolve(args: RunArgs, env_out: Option<PathBuf>) -> Result<Self> {
        let file = match &args.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
                toml::from_str::<ConfigFile>(&text).with_context(|| format!("invalid config {}", p.display()))?
            }
            None => ConfigFile::default(),
        };
        let case = file.case.unwrap_or(args.case);
        let default_budget = match case {
            Case::Dfn => 500_000,
            Case::Lshape | Case::Custom => 10_000,
        };
        let cfg = Self {
            case,
            k: file.k.unwrap_or(args.k),
            theta: file.theta.unwrap_or(args.theta),
            c_rho: file.c_rho.unwrap_or(args.c_rho),
            c_al: file.c_al.unwrap_or(args.c_al),
            dof_budget: file.max_dofs.or(args.max_dofs).unwrap_or(default_budget),
            snapshots: file.snapshots.unwrap_or(args.snapshots),
            out: env_out.or(file.out).unwrap_or(args.out),
            network: file.network.or(args.network),
            solver: file.solver.unwrap_or(args.solver),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        ensure!((1..=3).contains(&self.k), "k must be 1, 2 or 3, got {}", self.k);
        ensure!(self.theta > 0.0 && self.theta <= 1.0, "theta must lie in (0, 1], got {}", self.theta);
        ensure!(self.c_rho.is_finite() && self.c_rho >= 0.0, "c_rho must be non-negative, got {}", self.c_rho);
        ensure!(self.c_al.is_finite() && self.c_al >= 0.0, "c_al must be non-negative, got {}", self.c_al);
        ensure!(self.dof_budget > 0, "the DOF budget must be positive");
        if self.case == Case::Custom && self.network.is_none() {
            bail!("the custom case needs --network");
        }
        if self.case == Case::Lshape && self.network.is_some() {
            bail!("--network is only used by the dfn and custom cases");
        }
        Ok(())
    }

    fn case_name(&self) -> &'static str {
        match self.case {
            Case::Lshape => "lshape",
            Case::Dfn => "dfn",
            Case::Custom => "custom",
        }
    }
}

fn load_network(path: Option<&Path>) -> Result<FractureNetwork> {
    let desc = match path {
        Some(p) => NetworkDescription::from_file(p)?,
        None => NetworkDescription::from_json(THREE_FRACTURES)?,
    };
    Ok(FractureNetwork::new(&desc)?)
}

fn setup(cfg: &RunConfig) -> Result<(Mesh, Problem)> {
    match cfg.case {
        Case::Lshape => Ok((lshape_mesh(), lshape_problem())),
        Case::Dfn | Case::Custom => {
            let net = load_network(cfg.network.as_deref())?;
            let mesh = build_minimal_dfn_mesh(&net)?;
            Ok((mesh, net.problem()))
        }
    }
}

fn cmd_run(cfg: RunConfig) -> Result<()> {
    let (mut mesh, problem) = setup(&cfg)?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display()))?;
    let config = AdaptiveConfig {
        theta: cfg.theta,
        k: cfg.k,
        params: RefinementParams::new(cfg.c_rho, cfg.c_al)?,
        dof_budget: cfg.dof_budget,
        solver: match cfg.solver {
            Solver::Cholesky => LinearSolver::Cholesky,
            Solver::Cg => LinearSolver::Cg { rel_tol: 1e-12, max_iter: 100_000 },
        },
        ..AdaptiveConfig::default()
    };
    let mut csv = CsvLog::create(&cfg.out.join("iterations.csv")).context("cannot create iterations.csv")?;
    let mut io_error = None;
    let result = run_adaptive(&mut mesh, &problem, &config, |view| {
        let r = view.record;
        eprintln!(
            "m {:3}  dofs {:8}  cells {:8}  eta_rel {:.4e}  marked {}",
            r.m, r.dofs, r.cells, r.eta_rel, r.n_marked
        );
        if io_error.is_none() && cfg.snapshots.contains(&r.m) {
            io_error = write_snapshot(&cfg.out, view).err();
        }
    });
    let run = match result {
        Ok(run) => run,
        Err((err, records)) => {
            for r in &records {
                csv.push(r)?;
            }
            return Err(err).context(format!("adaptive run failed after {} iterations", records.len()));
        }
    };
    if let Some(e) = io_error {
        return Err(e).context("cannot write mesh snapshot");
    }
    for r in &run.records {
        csv.push(r).context("cannot write iterations.csv")?;
    }
    let label = RunLabel {
        case: cfg.case_name().to_string(),
        k: cfg.k,
        theta: cfg.theta,
        c_rho: cfg.c_rho,
        c_al: cfg.c_al,
        dof_budget: cfg.dof_budget,
    };
    let summary = summarize(&label, &run, config.rate_window);
    fs::write(cfg.out.join("summary.json"), serde_json::to_string_pretty(&summary)?).context("cannot write summary.json")?;
    let rate = summary.rate_eta.map_or("n/a".to_string(), |a| format!("{a:.3}"));
    println!(
        "{} iterations, {} dofs, eta_rel {:.4e}, rate {rate} (stopped: {})",
        summary.iterations, summary.dofs, summary.eta_rel, summary.stop
    );
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<()> {
    let net = load_network(Some(path))?;
    let mesh = build_minimal_dfn_mesh(&net)?;
    check_conformity(&mesh, &net)?;
    println!(
        "{} fractures, {} traces, {} cells",
        net.fractures.len(),
        net.traces.len(),
        mesh.n_active_cells()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => {
            RunConfig::resolve(args, std::env::var_os(OUT_ENV).map(PathBuf::from)).and_then(cmd_run)
        }
        Command::Validate { network } => cmd_validate(&network),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
