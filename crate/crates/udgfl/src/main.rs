use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use udgfl::format::{self, load_instance};
use udgfl::report::{audits_from_json, ratio_csv};
use udgfl::{generate, run, Family, GeneratorParams, RunConfig};
use udgfl_core::pipeline::{Routing, SolverKind};

/// Exit codes: 0 success with every audit passing, 2 solved but some audit
/// failed, 1 error.
#[derive(Parser)]
#[command(name = "udgfl", version, about = "Facility location on unit disk graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance file.
    Gen(GenArgs),
    /// Solve an instance and write a JSON report.
    Solve(SolveArgs),
    /// Print the audits of a report; exit 2 when any failed.
    Audit {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Square side or corridor length.
    #[arg(long)]
    side: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    p_client: Option<f64>,
    #[arg(long)]
    p_facility: Option<f64>,
    #[arg(long)]
    cost_min: Option<f64>,
    #[arg(long)]
    cost_max: Option<f64>,
    /// Keep every component instead of only the largest.
    #[arg(long)]
    keep_all: bool,
    /// Write the JSON mirror instead of the line format.
    #[arg(long)]
    json: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Exact,
    Baseline,
    Qptas,
    Boxptas,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoutingArg {
    Auto,
    Layered,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    eps_prime: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Box side for the bounded-region solver.
    #[arg(long = "L")]
    box_side: Option<f64>,
    #[arg(long)]
    grid_trials: Option<usize>,
    #[arg(long)]
    oracle_cap: Option<usize>,
    #[arg(long)]
    vector_cap: Option<usize>,
    #[arg(long)]
    net_enum_cap: Option<usize>,
    #[arg(long)]
    sample_nets: Option<usize>,
    #[arg(long)]
    detour_samples: Option<usize>,
    #[arg(long, value_enum)]
    routing: Option<RoutingArg>,
    /// Skip the exact comparison run.
    #[arg(long)]
    no_oracle: bool,
    /// Merge coincident sites.
    #[arg(long)]
    merge: bool,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a one-row CSV ratio table.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn write_out(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn gen(a: &GenArgs) -> anyhow::Result<ExitCode> {
    let d = GeneratorParams::default();
    let params = GeneratorParams {
        family: a.family,
        n: a.n,
        side: a.side.unwrap_or(d.side),
        width: a.width.unwrap_or(d.width),
        clusters: a.clusters.unwrap_or(d.clusters),
        sigma: a.sigma.unwrap_or(d.sigma),
        p_client: a.p_client.unwrap_or(d.p_client),
        p_facility: a.p_facility.unwrap_or(d.p_facility),
        cost_min: a.cost_min.unwrap_or(d.cost_min),
        cost_max: a.cost_max.unwrap_or(d.cost_max),
        largest_component: !a.keep_all,
    };
    let recs = generate(&params, a.seed)?;
    let text = if a.json { format::to_json(&recs) } else { format::to_text(&recs) };
    write_out(a.out.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn solve(a: &SolveArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => RunConfig::default(),
    };
    let s = &mut cfg.solve;
    if let Some(v) = a.solver {
        s.solver = match v {
            SolverArg::Exact => SolverKind::Exact,
            SolverArg::Baseline => SolverKind::Baseline,
            SolverArg::Qptas => SolverKind::Qptas,
            SolverArg::Boxptas => SolverKind::Boxptas,
        };
    }
    if let Some(v) = a.routing {
        s.routing = match v {
            RoutingArg::Auto => Routing::Auto,
            RoutingArg::Layered => Routing::Layered,
        };
    }
    s.eps = a.eps.unwrap_or(s.eps);
    s.eps_prime = a.eps_prime.or(s.eps_prime);
    s.seed = a.seed.unwrap_or(s.seed);
    s.box_side = a.box_side.or(s.box_side);
    s.grid_trials = a.grid_trials.unwrap_or(s.grid_trials);
    s.oracle_cap = a.oracle_cap.unwrap_or(s.oracle_cap);
    s.vector_cap = a.vector_cap.unwrap_or(s.vector_cap);
    s.net_enum_cap = a.net_enum_cap.unwrap_or(s.net_enum_cap);
    s.sample_nets = a.sample_nets.unwrap_or(s.sample_nets);
    s.detour_samples = a.detour_samples.unwrap_or(s.detour_samples);
    s.compare_oracle &= !a.no_oracle;
    cfg.merge |= a.merge;
    cfg.validate()?;

    let inst = load_instance(&a.input, cfg.merge).with_context(|| format!("loading {}", a.input.display()))?;
    let label = a.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let report = run(&inst, &cfg, &label)?;
    write_out(a.out.as_ref(), &report.to_json())?;
    if let Some(p) = &a.csv {
        std::fs::write(p, ratio_csv(std::slice::from_ref(&report))?).with_context(|| format!("writing {}", p.display()))?;
    }
    let sol = &report.outcome.solution;
    eprintln!(
        "{}: cost {:.6} (open {:.6}, connection {:.6}), {} open{}",
        report.outcome.solver.name(),
        sol.total_cost,
        sol.open_cost,
        sol.conn_cost,
        sol.open.len(),
        report.outcome.diagnostics.ratio.map(|r| format!(", ratio {:.6}", r)).unwrap_or_default()
    );
    for f in &report.audit.failed {
        eprintln!("audit failed: {}", f);
    }
    Ok(if report.audit.ok() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn audit(path: &PathBuf) -> anyhow::Result<ExitCode> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let audits = audits_from_json(&text)?;
    let mut ok = true;
    for a in &audits {
        ok &= a.passed;
        let status = if a.passed { "PASS" } else { "FAIL" };
        match &a.witness {
            Some(w) if !a.passed => println!("{} {} ({} checked): {}", status, a.name, a.checked, w),
            _ => println!("{} {} ({} checked)", status, a.name, a.checked),
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Audit { report } => audit(report),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
    }
}
