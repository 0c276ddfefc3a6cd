use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use scl_core::baselines::{run_method, Method};
use scl_core::config::{GenerateConfig, LearnConfig, SweepSpec};
use scl_core::eval::{evaluate, EvalReport};
use scl_core::greedy::Problem;
use scl_core::io::{
    matrix_to_csv, parse_complex_json, parse_learn_result, Bundle, BundleMeta, ComplexJson,
    LearnResult, COMPLEX_FILE,
};
use scl_core::plot::{line_plot_svg, summary_series};
use scl_core::sweep::{rows_to_csv, run_sweep, summarize, summary_to_csv, SummaryRow};
use scl_core::synth::generate_instance;
use scl_core::ComplexSkeleton;

#[derive(Parser)]
#[command(name = "scl", version, about = "Learn simplicial complexes from node and edge signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset bundle.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Learn a complex from a dataset bundle.
    Learn {
        dataset: PathBuf,
        #[arg(long, default_value = "GreedySCL")]
        method: Method,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Result JSON path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict_lemma: bool,
        #[arg(long)]
        no_prune_closure: bool,
        /// Also write the estimated full edge-signal matrix as CSV.
        #[arg(long)]
        write_x1: Option<PathBuf>,
    },
    /// Score a learn result against a ground-truth complex.
    Eval {
        result: PathBuf,
        /// Dataset directory or complex JSON file.
        truth: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep and write CSVs and SVG plots.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "SCL_JOBS")]
        jobs: Option<usize>,
        /// Write 0 in the seconds column so output is byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
}

/// Bad invocation discovered after argument parsing; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn generate(config: Option<&Path>, out: &Path, seed: Option<u64>) -> Result<()> {
    let mut cfg = match config {
        Some(p) => GenerateConfig::parse(&read_text(p)?, &p.display().to_string())?,
        None => GenerateConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let skeleton = ComplexSkeleton::new(cfg.instance.n_nodes)?;
    let (truth, signals) = generate_instance(&skeleton, &cfg.instance, cfg.seed)?;
    let bundle = Bundle {
        n_nodes: skeleton.n_nodes(),
        truth: Some(ComplexJson::from_selection(&skeleton, &truth.selection)),
        x0: signals.x0,
        x1_obs: signals.x1_obs,
        observed_edges: signals.observed_edges,
        meta: Some(BundleMeta { seed: cfg.seed, instance: cfg.instance }),
    };
    bundle.write(out)?;
    println!(
        "wrote {}: {} nodes, {} edges, {} triangles, {} observed edges",
        out.display(),
        skeleton.n_nodes(),
        truth.selection.n_active_edges(),
        truth.selection.n_active_triangles(),
        bundle.observed_edges.len()
    );
    Ok(())
}

fn summary_line(report: &EvalReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into());
    format!(
        "nerr_l0={} nerr_lu={} edge_f1={:.4} triangle_f1={:.4} closure_violations={}",
        opt(report.nerr_l0),
        opt(report.nerr_lu),
        report.edge_f1,
        report.triangle_f1,
        report.closure_violations
    )
}

struct LearnArgs<'a> {
    dataset: &'a Path,
    method: Method,
    config: Option<&'a Path>,
    out: Option<&'a Path>,
    strict_lemma: bool,
    no_prune_closure: bool,
    write_x1: Option<&'a Path>,
}

fn learn(args: LearnArgs<'_>) -> Result<()> {
    let bundle = Bundle::read(args.dataset)?;
    let cfg = match args.config {
        Some(p) => LearnConfig::parse(&read_text(p)?, &p.display().to_string())?,
        None => LearnConfig::default(),
    };
    let skeleton = ComplexSkeleton::new(bundle.n_nodes)?;
    let truth = bundle.truth.as_ref().map(|t| t.to_selection(&skeleton)).transpose()?;
    let (e_min, t_min) = match &truth {
        Some(t) => (t.n_active_edges(), t.n_active_triangles()),
        None => match (cfg.params.e_min, cfg.params.t_min) {
            (Some(e), Some(t)) => (e, t),
            _ => {
                return Err(UsageError(format!(
                    "{} has no {COMPLEX_FILE}; set e_min and t_min under [params] in --config",
                    args.dataset.display()
                ))
                .into())
            }
        },
    };
    let mut params = cfg.params.resolve(e_min, t_min);
    params.strict_lemma_mode |= args.strict_lemma;
    params.prune_closure &= !args.no_prune_closure;

    let problem = Problem::new(&skeleton, &bundle.x0, &bundle.x1_obs, &bundle.observed_edges)?;
    let baseline = cfg.baseline.to_config(args.method, &params);
    let state = run_method(args.method, &problem, &params, &baseline)?;

    let mut result = LearnResult::new(args.method, &skeleton, &state);
    if let Some(t) = &truth {
        result.eval = Some(evaluate(&skeleton, &state.selection, t)?);
    }
    if let Some(p) = args.write_x1 {
        write_text(p, &matrix_to_csv(&state.x1_est))?;
    }
    let summary = format!(
        "{}: {} edges, {} triangles, {} iterations{}",
        args.method,
        state.selection.n_active_edges(),
        state.selection.n_active_triangles(),
        state.iterations_run,
        if state.converged { "" } else { " (not converged)" }
    );
    match args.out {
        Some(p) => {
            write_text(p, &result.to_json())?;
            println!("{summary}");
            if let Some(e) = &result.eval {
                println!("{}", summary_line(e));
            }
        }
        None => {
            print!("{}", result.to_json());
            eprintln!("{summary}");
            if let Some(e) = &result.eval {
                eprintln!("{}", summary_line(e));
            }
        }
    }
    Ok(())
}

fn eval(result: &Path, truth: &Path, out: Option<&Path>) -> Result<()> {
    let result = parse_learn_result(&read_text(result)?, &result.display().to_string())?;
    let truth_path = if truth.is_dir() { truth.join(COMPLEX_FILE) } else { truth.to_path_buf() };
    let truth = parse_complex_json(&read_text(&truth_path)?, &truth_path.display().to_string())?;
    if truth.n_nodes != result.complex.n_nodes {
        bail!(
            "result has {} nodes but the ground truth has {}",
            result.complex.n_nodes,
            truth.n_nodes
        );
    }
    let skeleton = ComplexSkeleton::new(truth.n_nodes)?;
    let report = evaluate(
        &skeleton,
        &result.complex.to_selection(&skeleton)?,
        &truth.to_selection(&skeleton)?,
    )?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    match out {
        Some(p) => {
            write_text(p, &json)?;
            println!("{}", summary_line(&report));
        }
        None => print!("{json}"),
    }
    Ok(())
}

type Metric = fn(&SummaryRow) -> Option<(f64, f64)>;

fn sweep(config: &Path, out: &Path, jobs: Option<usize>, no_timing: bool) -> Result<()> {
    let spec = SweepSpec::parse(&read_text(config)?, &config.display().to_string())?;
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if jobs == 0 {
        return Err(UsageError("--jobs must be at least 1".into()).into());
    }
    let rows = run_sweep(&spec, jobs)?;
    let summary = summarize(&rows, &spec.methods);
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    write_text(&out.join("results.csv"), &rows_to_csv(&rows, !no_timing))?;
    write_text(&out.join("summary.csv"), &summary_to_csv(&summary))?;
    let x_label = spec.variable.name();
    let metrics: [(&str, &str, Metric); 2] = [
        ("nerr_l0.svg", "NErr(L0)", |s| s.nerr_l0),
        ("nerr_lu.svg", "NErr(LU)", |s| s.nerr_lu),
    ];
    for (file, title, metric) in metrics {
        let svg = line_plot_svg(title, x_label, title, &summary_series(&summary, metric));
        write_text(&out.join(file), &svg)?;
    }
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    println!(
        "wrote {} rows ({} failed) to {}",
        rows.len(),
        failed,
        out.join("results.csv").display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, out, seed } => generate(config.as_deref(), &out, seed),
        Command::Learn { dataset, method, config, out, strict_lemma, no_prune_closure, write_x1 } => learn(LearnArgs {
            dataset: &dataset,
            method,
            config: config.as_deref(),
            out: out.as_deref(),
            strict_lemma,
            no_prune_closure,
            write_x1: write_x1.as_deref(),
        }),
        Command::Eval { result, truth, out } => eval(&result, &truth, out.as_deref()),
        Command::Sweep { config, out, jobs, no_timing } => sweep(&config, &out, jobs, no_timing),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
