use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use dickman::discretize::{discretize_angular, DiscretizationGrid, Representative};
use dickman::harness::{
    cell_index, emit_plot_data, generate_draws, md_cell_sampler, run_experiment_with_workers, verify, write_csv,
    DiscretizeStep, ExperimentConfig, GroupBy,
};
use dickman::measures::{MeasureDoc, SpectralMeasure};
use dickman::moments::md_moments;
use dickman::samplers::{Method, DEFAULT_GD_TOL};
use dickman::{fmt_sig15, Error, Result};

#[derive(Parser)]
#[command(name = "dickman", version, about = "Simulate multivariate Dickman laws and check their moments")]
struct Cli {
    /// JSON config or model document.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a batch from one method and write it as CSV.
    Sample {
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the analytic mean and covariance of MD(sigma) as JSON.
    Moments,
    /// Replace an angular density by a finite-support measure.
    Discretize {
        #[arg(long)]
        k: usize,
        /// Put atoms at cell midpoints instead of left endpoints.
        #[arg(long)]
        midpoint: bool,
    },
    /// Run a (method, k) sweep and write the E_k CSV.
    Experiment {
        #[arg(long)]
        workers: Option<usize>,
        /// Also write one `k e_k` file per method here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Run the built-in self-checks.
    Verify {
        /// Monte Carlo draws per check.
        #[arg(long, default_value_t = 200_000)]
        n: usize,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleConfig {
    model: MeasureDoc,
    method: Method,
    k: usize,
    n_reps: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_gd_tol")]
    gd_tol: f64,
    #[serde(default)]
    discretize: Option<DiscretizeStep>,
}

fn default_gd_tol() -> f64 {
    DEFAULT_GD_TOL
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Wrapped { model: MeasureDoc },
    Bare(MeasureDoc),
}

fn read_config(cli: &Cli) -> Result<String> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("this subcommand needs --config PATH".into()))?;
    Ok(fs::read_to_string(path)?)
}

fn read_model(cli: &Cli) -> Result<SpectralMeasure> {
    let text = read_config(cli)?;
    let doc = match serde_json::from_str::<ModelFile>(&text)
        .map_err(|e| Error::Config(format!("not a model document: {e}")))?
    {
        ModelFile::Wrapped { model } | ModelFile::Bare(model) => model,
    };
    SpectralMeasure::from_doc(&doc)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Sample { workers } => {
            let cfg: SampleConfig = serde_json::from_str(&read_config(cli)?)
                .map_err(|e| Error::Config(format!("bad sample config: {e}")))?;
            if cfg.n_reps == 0 {
                return Err(Error::Config("n_reps must be >= 1".into()));
            }
            let sigma = SpectralMeasure::from_doc(&cfg.model)?;
            let seed = cli.seed.unwrap_or(cfg.seed);
            let sampler = md_cell_sampler(&sigma, cfg.method, cfg.k, cfg.gd_tol, cfg.discretize).map_err(|e| match e {
                Error::Unsupported(m) => Error::Config(format!("{m}; add a `discretize` step to the config")),
                other => other,
            })?;
            let data = pool(workers.unwrap_or(1))?
                .install(|| generate_draws(sampler.as_ref(), cfg.n_reps, seed, cell_index(cfg.method, cfg.k)));
            let d = sigma.dim();
            let mut text = String::new();
            text.push_str(&format!(
                "# model={} method={} k={} n_reps={} seed={} gd_tol={}\n",
                sigma.to_json_string()?,
                cfg.method,
                cfg.k,
                cfg.n_reps,
                seed,
                cfg.gd_tol
            ));
            text.push_str(&(1..=d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(","));
            text.push('\n');
            for row in data.chunks_exact(d) {
                text.push_str(&row.iter().map(|&x| fmt_sig15(x)).collect::<Vec<_>>().join(","));
                text.push('\n');
            }
            write_output(cli.out.as_deref(), &text)?;
            Ok(true)
        }
        Command::Moments => {
            let sigma = read_model(cli)?;
            let mut text = md_moments(&sigma)?.to_json_string();
            text.push('\n');
            write_output(cli.out.as_deref(), &text)?;
            Ok(true)
        }
        Command::Discretize { k, midpoint } => {
            let sigma = read_model(cli)?;
            let rep = if *midpoint { Representative::Midpoint } else { Representative::Left };
            let grid = DiscretizationGrid::evenly_spaced(*k, rep)?;
            let mut text = discretize_angular(&sigma, &grid)?.to_json_string()?;
            text.push('\n');
            write_output(cli.out.as_deref(), &text)?;
            Ok(true)
        }
        Command::Experiment { workers, plot_dir } => {
            let mut cfg = ExperimentConfig::from_json_str(&read_config(cli)?)?;
            if let Some(seed) = cli.seed {
                cfg.base_seed = seed;
            }
            let workers = workers.or(cfg.workers).unwrap_or(1);
            let rows = run_experiment_with_workers(&cfg, workers)?;
            match cli.out.as_deref().or(cfg.output.as_deref()) {
                Some(path) => write_csv(&rows, io::BufWriter::new(fs::File::create(path)?))?,
                None => write_csv(&rows, io::stdout().lock())?,
            }
            if let Some(dir) = plot_dir {
                for path in emit_plot_data(&rows, GroupBy::Method, dir)? {
                    log::info!("wrote {}", path.display());
                }
            }
            Ok(true)
        }
        Command::Verify { n } => {
            let checks = verify::run_all(*n, cli.seed.unwrap_or(20_240_601));
            let mut text = String::new();
            for c in &checks {
                text.push_str(&format!("{c}\n"));
            }
            write_output(cli.out.as_deref(), &text)?;
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
