//! Empirical moments, the `E_k` error metric and the distributional
//! fixed-point check `X =_d U^{1/theta} (X + W)`.

use rand::distr::Open01;
use rand::Rng;
use serde::Serialize;

use crate::measures::SpectralMeasure;
use crate::moments::MomentSummary;
use crate::rng_from_seed;
use crate::samplers::{fixed_point_map, DsSampler, Method, SampleBatch, Sampler, DEFAULT_GD_TOL};
use crate::{Error, Result};

/// Sample mean and unbiased (`N - 1`) covariance.
pub fn empirical_moments(batch: &SampleBatch) -> Result<MomentSummary> {
    let n = batch.n_reps();
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 draws, got {n}")));
    }
    let d = batch.dim();
    let mut mean = vec![0.0; d];
    for row in batch.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![vec![0.0; d]; d];
    for row in batch.rows() {
        for i in 0..d {
            let di = row[i] - mean[i];
            for j in i..d {
                cov[i][j] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }
    Ok(MomentSummary::new(mean, cov))
}

/// Delta-method standard errors of the entries of [`empirical_moments`],
/// in the same layout.
///
/// `se(mean_i) = sqrt(s_ii / N)` and
/// `se(s_ij) = sqrt((m_{iijj} - s_ij^2) / N)` with the centered fourth-order
/// product moment `m_{iijj}`.
pub fn moment_standard_errors(batch: &SampleBatch) -> Result<MomentSummary> {
    let emp = empirical_moments(batch)?;
    let n = batch.n_reps() as f64;
    let d = batch.dim();
    let mut fourth = vec![vec![0.0; d]; d];
    for row in batch.rows() {
        for i in 0..d {
            let di = row[i] - emp.mean[i];
            for j in i..d {
                let dj = row[j] - emp.mean[j];
                fourth[i][j] += di * di * dj * dj;
            }
        }
    }
    let mean_se = (0..d).map(|i| (emp.cov[i][i].max(0.0) / n).sqrt()).collect();
    let mut cov_se = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i..d {
            let v = (fourth[i][j] / n - emp.cov[i][j].powi(2)).max(0.0) / n;
            cov_se[i][j] = v.sqrt();
            cov_se[j][i] = cov_se[i][j];
        }
    }
    Ok(MomentSummary::new(mean_se, cov_se))
}

/// `E_k` and its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub e_k: f64,
    /// Squared deviations of `xbar1, xbar2, s1^2, s2^2, s12`.
    pub components: [f64; 5],
    /// Root of the summed squared standard errors of the five estimates, the
    /// size of `E_k` expected from Monte Carlo noise alone.
    pub mc_floor: Option<f64>,
}

/// `E_k = sqrt((x1-m1)^2 + (x2-m2)^2 + (s1^2-var1)^2 + (s2^2-var2)^2 + (s12-cov12)^2)`.
pub fn error_metric(emp: &MomentSummary, truth: &MomentSummary) -> Result<ErrorReport> {
    let (Some(e), Some(t)) = (emp.bivariate(), truth.bivariate()) else {
        return Err(Error::Domain(format!(
            "error metric needs bivariate summaries, got dimensions {} and {}",
            emp.dim(),
            truth.dim()
        )));
    };
    let mut components = [0.0; 5];
    for ((c, a), b) in components.iter_mut().zip(e).zip(t) {
        *c = (a - b) * (a - b);
    }
    let e_k = components.iter().sum::<f64>().sqrt();
    Ok(ErrorReport { e_k, components, mc_floor: None })
}

/// [`error_metric`] of a batch against `truth`, with the Monte Carlo floor filled in.
pub fn error_report(batch: &SampleBatch, truth: &MomentSummary) -> Result<(MomentSummary, ErrorReport)> {
    let emp = empirical_moments(batch)?;
    let mut report = error_metric(&emp, truth)?;
    let se = moment_standard_errors(batch)?;
    let [a, b, c, d, e] = se.bivariate().expect("bivariate after error_metric");
    report.mc_floor = Some((a * a + b * b + c * c + d * d + e * e).sqrt());
    Ok((emp, report))
}

/// Settings for [`fixed_point_test_with`].
#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    pub n: usize,
    pub seed: u64,
    pub tol_sigmas: f64,
    pub gd_tol: f64,
    /// Use this `theta` in the map instead of `sigma(S^{d-1})`.
    pub theta_override: Option<f64>,
}

impl FixedPointConfig {
    pub fn new(n: usize, seed: u64, tol_sigmas: f64) -> Self {
        Self { n, seed, tol_sigmas, gd_tol: DEFAULT_GD_TOL, theta_override: None }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub passed: bool,
    /// Largest `|moment(Y) - moment(X)| / combined SE`.
    pub max_z: f64,
    /// `(name, z)` for every mean and upper-triangular covariance entry.
    pub z_scores: Vec<(String, f64)>,
    pub x: MomentSummary,
    pub y: MomentSummary,
    pub theta_used: f64,
}

/// Draw `X ~ MD(sigma)` by DS, `W ~ sigma_1`, `U ~ U(0,1)` and compare the
/// moments of `Y = U^{1/theta} (X + W)` with those of `X`.
pub fn fixed_point_test(sigma: &SpectralMeasure, n: usize, seed: u64, tol_sigmas: f64) -> Result<FixedPointReport> {
    fixed_point_test_with(sigma, &FixedPointConfig::new(n, seed, tol_sigmas))
}

pub fn fixed_point_test_with(sigma: &SpectralMeasure, cfg: &FixedPointConfig) -> Result<FixedPointReport> {
    if cfg.n < 2 {
        return Err(Error::Domain(format!("need at least 2 draws, got {}", cfg.n)));
    }
    if !(cfg.tol_sigmas > 0.0) {
        return Err(Error::Domain("tolerance in standard errors must be > 0".into()));
    }
    let ds = DsSampler::new(sigma, cfg.gd_tol)?;
    let theta = cfg.theta_override.unwrap_or(sigma.mass());
    let d = sigma.dim();
    let mut rng = rng_from_seed(cfg.seed);
    let mut xs = Vec::with_capacity(cfg.n * d);
    let mut ys = Vec::with_capacity(cfg.n * d);
    let mut x = vec![0.0; d];
    let mut w = vec![0.0; d];
    for _ in 0..cfg.n {
        ds.draw_into(&mut rng, &mut x);
        sigma.sample_direction(&mut rng, &mut w);
        let u: f64 = rng.sample(Open01);
        let y = fixed_point_map(&x, &w, u, theta)?;
        xs.extend_from_slice(&x);
        ys.extend_from_slice(&y);
    }
    let label = sigma.label();
    let bx = SampleBatch::new(xs, d, Method::DS, 0, cfg.seed, label.clone())?;
    let by = SampleBatch::new(ys, d, Method::DS, 0, cfg.seed, label)?;
    let (mx, sx) = (empirical_moments(&bx)?, moment_standard_errors(&bx)?);
    let (my, sy) = (empirical_moments(&by)?, moment_standard_errors(&by)?);

    let z = |a: f64, b: f64, sa: f64, sb: f64| {
        let se = (sa * sa + sb * sb).sqrt();
        let diff = (a - b).abs();
        if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let mut z_scores = Vec::new();
    for i in 0..d {
        z_scores.push((format!("mean[{i}]"), z(mx.mean[i], my.mean[i], sx.mean[i], sy.mean[i])));
    }
    for i in 0..d {
        for j in i..d {
            z_scores.push((
                format!("cov[{i}][{j}]"),
                z(mx.cov[i][j], my.cov[i][j], sx.cov[i][j], sy.cov[i][j]),
            ));
        }
    }
    let max_z = z_scores.iter().map(|(_, z)| *z).fold(0.0, f64::max);
    Ok(FixedPointReport {
        passed: max_z <= cfg.tol_sigmas,
        max_z,
        z_scores,
        x: mx,
        y: my,
        theta_used: theta,
    })
}
