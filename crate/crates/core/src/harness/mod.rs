//! Experiment configuration, RNG substreams, the `(method, k)` sweep and its
//! CSV / plot-data output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{discretize_angular, DiscretizationGrid, Representative};
use crate::measures::{md_from_spectral, BaseLaw, MeasureDoc, SpectralMeasure, SpectralVariant};
use crate::moments::{md_moments, MomentSummary};
use crate::samplers::{DsSampler, Method, SampleBatch, Sampler, SnSampler, TaSampler, DEFAULT_GD_TOL};
use crate::stats::error_report;
use crate::{fmt_sig15, rng_from_seed, Error, Result};

pub mod verify;

/// Draws generated from one RNG substream.
pub const BLOCK_SIZE: usize = 4096;

/// `k` values used when a config does not list its own.
pub const DEFAULT_K_GRID: [usize; 9] = [1, 2, 5, 10, 20, 50, 100, 150, 200];

pub const CSV_HEADER: &str =
    "model,method,k,n_reps,seed,e_k,xbar1,xbar2,s1sq,s2sq,s12,m1,m2,var1,var2,cov12,runtime_ms";

/// The splitmix64 output function (Steele, Lea and Flood 2014).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of the RNG substream for `(cell, rep)` under `base`.
///
/// `mix64(mix64(mix64(base + G) ^ cell) + G ^ rep)` with `G` the 64-bit
/// golden-ratio constant. Each stage is a bijection of its running state, so
/// for fixed `(base, cell)` distinct `rep` always give distinct seeds, and for
/// fixed `base` distinct `cell` give distinct intermediate states.
pub fn substream_seed(base: u64, cell: u64, rep: u64) -> u64 {
    let h = mix64(base.wrapping_add(GOLDEN));
    let h = mix64(h ^ cell);
    mix64(h.wrapping_add(GOLDEN) ^ rep)
}

/// `(method code << 32) | k`.
pub fn cell_index(method: Method, k: usize) -> u64 {
    (method.code() << 32) | (k as u64 & 0xFFFF_FFFF)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiscretizeStep {
    #[serde(default)]
    pub representative: Representative,
}

/// A single JSON experiment document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: MeasureDoc,
    pub methods: Vec<Method>,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<usize>,
    pub n_reps: usize,
    pub base_seed: u64,
    #[serde(default = "default_gd_tol")]
    pub gd_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Needed for DS on a model with an angular density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretize: Option<DiscretizeStep>,
    /// Independent replicate sweeps; sweep `s` uses `base_seed + s`.
    #[serde(default = "one")]
    pub seeds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Write wall-clock times; off by default so output is byte-stable.
    #[serde(default)]
    pub record_runtime: bool,
}

fn default_k_grid() -> Vec<usize> {
    DEFAULT_K_GRID.to_vec()
}

fn default_gd_tol() -> f64 {
    DEFAULT_GD_TOL
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(model: MeasureDoc, methods: Vec<Method>, k_grid: Vec<usize>, n_reps: usize, base_seed: u64) -> Self {
        Self {
            model,
            methods,
            k_grid,
            n_reps,
            base_seed,
            gd_tol: DEFAULT_GD_TOL,
            output: None,
            discretize: None,
            seeds: 1,
            workers: None,
            record_runtime: false,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(format!("bad experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_grid.is_empty() {
            return Err(Error::Config("k_grid must not be empty".into()));
        }
        if self.k_grid.contains(&0) {
            return Err(Error::Config("k_grid entries must be positive".into()));
        }
        if self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("k_grid must be strictly increasing".into()));
        }
        if self.n_reps < 2 {
            return Err(Error::Config(format!("n_reps must be >= 2, got {}", self.n_reps)));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        if (1..self.methods.len()).any(|i| self.methods[..i].contains(&self.methods[i])) {
            return Err(Error::Config("methods must not repeat".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if !(self.gd_tol.is_finite() && self.gd_tol > 0.0) {
            return Err(Error::Config(format!("gd_tol must be finite and > 0, got {}", self.gd_tol)));
        }
        let sigma = self.spectral()?;
        if sigma.dim() != 2 {
            return Err(Error::Config(format!("experiments need a bivariate model, got dimension {}", sigma.dim())));
        }
        if self.methods.contains(&Method::DS)
            && sigma.variant() != SpectralVariant::FiniteSupport
            && self.discretize.is_none()
        {
            return Err(Error::Config(
                "DS needs a finite-support model; add a `discretize` step to the config \
                 (e.g. \"discretize\": {\"representative\": \"left\"}) or run the `discretize` subcommand first"
                    .into(),
            ));
        }
        Ok(())
    }

    pub fn spectral(&self) -> Result<SpectralMeasure> {
        SpectralMeasure::from_doc(&self.model)
    }
}

/// One line of the experiment CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub model: String,
    pub method: Method,
    pub k: usize,
    pub n_reps: usize,
    pub seed: u64,
    pub e_k: f64,
    pub empirical: [f64; 5],
    pub truth: [f64; 5],
    pub runtime_ms: u64,
    /// Not written to the CSV.
    pub mc_floor: f64,
}

impl CsvRow {
    pub fn to_csv_line(&self) -> String {
        let mut fields = vec![
            self.model.clone(),
            self.method.to_string(),
            self.k.to_string(),
            self.n_reps.to_string(),
            self.seed.to_string(),
            fmt_sig15(self.e_k),
        ];
        fields.extend(self.empirical.iter().chain(&self.truth).map(|&x| fmt_sig15(x)));
        fields.push(self.runtime_ms.to_string());
        fields.join(",")
    }
}

/// Header plus one LF-terminated line per row.
pub fn write_csv<W: Write>(rows: &[CsvRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line())?;
    }
    out.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Draw `n` samples as `ceil(n / BLOCK_SIZE)` blocks, block `b` from the
/// substream `substream_seed(seed, cell, b)`. The result does not depend on
/// how many threads run the blocks.
pub fn generate_draws(sampler: &dyn Sampler, n: usize, seed: u64, cell: u64) -> Vec<f64> {
    let d = sampler.dim();
    let blocks = n.div_ceil(BLOCK_SIZE);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_SIZE.min(n - b * BLOCK_SIZE);
            let mut rng = rng_from_seed(substream_seed(seed, cell, b as u64));
            let mut out = vec![0.0; len * d];
            for row in out.chunks_exact_mut(d) {
                sampler.draw_into(&mut rng, row);
            }
            out
        })
        .collect();
    parts.concat()
}

/// Build the sampler for one `(method, k)` cell of an MD experiment.
///
/// `SN`: `k` shot-noise terms. `TA`: `alpha = 1`, `c = theta`, `n = k` over
/// `sigma_1`. `DS`: the model itself if finite, otherwise its discretization on
/// `k` evenly spaced cells.
pub fn md_cell_sampler(
    sigma: &SpectralMeasure,
    method: Method,
    k: usize,
    gd_tol: f64,
    discretize: Option<DiscretizeStep>,
) -> Result<Box<dyn Sampler>> {
    Ok(match method {
        Method::SN => Box::new(SnSampler::new(md_from_spectral(sigma), k)),
        Method::TA => Box::new(TaSampler::new(1.0, BaseLaw::Sphere(sigma.clone()), sigma.mass(), k)?),
        Method::DS => {
            if sigma.variant() == SpectralVariant::FiniteSupport {
                Box::new(DsSampler::new(sigma, gd_tol)?)
            } else {
                let step = discretize.ok_or_else(|| {
                    Error::Config("DS on a non-finite model needs a `discretize` step".into())
                })?;
                let grid = DiscretizationGrid::evenly_spaced(k, step.representative)?;
                Box::new(DsSampler::new(&discretize_angular(sigma, &grid)?, gd_tol)?)
            }
        }
    })
}

struct Cell {
    sweep: usize,
    method: Method,
    k: usize,
}

/// Run every `(seed, method, k)` cell on a pool of `workers` threads
/// (default: the config's `workers`, else 1).
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    run_experiment_with_workers(config, config.workers.unwrap_or(1))
}

pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<Vec<CsvRow>> {
    config.validate()?;
    if workers == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    let sigma = config.spectral()?;
    let truth = md_moments(&sigma)?;
    let finite = sigma.variant() == SpectralVariant::FiniteSupport;

    let mut cells = Vec::new();
    for sweep in 0..config.seeds {
        for &method in &config.methods {
            if method == Method::DS && finite {
                cells.push(Cell { sweep, method, k: 0 });
            } else {
                cells.extend(config.k_grid.iter().map(|&k| Cell { sweep, method, k }));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| cells.iter().map(|c| run_cell(config, &sigma, &truth, c)).collect())
}

fn run_cell(config: &ExperimentConfig, sigma: &SpectralMeasure, truth: &MomentSummary, cell: &Cell) -> Result<CsvRow> {
    let start = Instant::now();
    let seed = config.base_seed.wrapping_add(cell.sweep as u64);
    let sampler = md_cell_sampler(sigma, cell.method, cell.k, config.gd_tol, config.discretize)?;
    let data = generate_draws(sampler.as_ref(), config.n_reps, seed, cell_index(cell.method, cell.k));
    let batch = SampleBatch::new(data, 2, cell.method, cell.k, seed, sigma.label())?;
    let (emp, report) = error_report(&batch, truth)?;
    let runtime_ms = if config.record_runtime { start.elapsed().as_millis() as u64 } else { 0 };
    log::info!(
        "{} {} k={} seed={} E_k={:.4e} (MC floor {:.2e})",
        sigma.label(),
        cell.method,
        cell.k,
        seed,
        report.e_k,
        report.mc_floor.unwrap_or(f64::NAN)
    );
    Ok(CsvRow {
        model: sigma.label(),
        method: cell.method,
        k: cell.k,
        n_reps: config.n_reps,
        seed,
        e_k: report.e_k,
        empirical: emp.bivariate().expect("bivariate model"),
        truth: truth.bivariate().expect("bivariate model"),
        runtime_ms,
        mc_floor: report.mc_floor.unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    /// One file per method; rows must share a model.
    Method,
    /// One file per model (e.g. the number of directions `r`); rows must share a method.
    Model,
}

/// Write `k e_k` column files, one per group, lines ordered by `(k, seed)`.
///
/// Files are named `<model>_<method>.dat`. Returns the paths written.
pub fn emit_plot_data(rows: &[CsvRow], group_by: GroupBy, dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        log::warn!("no rows to write plot data for");
        return Ok(Vec::new());
    }
    let shared_ok = match group_by {
        GroupBy::Method => rows.iter().all(|r| r.model == rows[0].model),
        GroupBy::Model => rows.iter().all(|r| r.method == rows[0].method),
    };
    if !shared_ok {
        let what = match group_by {
            GroupBy::Method => "a model",
            GroupBy::Model => "a method",
        };
        return Err(Error::Config(format!("plot data rows must share {what}")));
    }
    let mut groups: BTreeMap<String, Vec<&CsvRow>> = BTreeMap::new();
    for row in rows {
        groups.entry(format!("{}_{}", row.model, row.method)).or_default().push(row);
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, mut group) in groups {
        group.sort_by_key(|r| (r.k, r.seed));
        let mut text = String::new();
        for r in group {
            text.push_str(&format!("{} {}\n", r.k, fmt_sig15(r.e_k)));
        }
        let path = dir.join(format!("{name}.dat"));
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
