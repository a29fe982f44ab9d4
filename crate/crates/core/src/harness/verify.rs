//! Quick self-checks behind the `verify` subcommand.

use rand::Rng;

use crate::measures::{md_from_spectral, Atom, Bdlm, LStarParams, Region, SpectralMeasure};
use crate::moments::{lstar_moments, malpha_radial_moment, malpha_tail_mass, md_moments};
use crate::quadrature::integrate;
use crate::samplers::{GdSampler, Method, SampleBatch, DEFAULT_GD_TOL};
use crate::stats::{empirical_moments, fixed_point_test, fixed_point_test_with, moment_standard_errors, FixedPointConfig};
use crate::{rng_from_seed, Result};

use super::{csv_string, generate_draws, run_experiment_with_workers, ExperimentConfig};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Run every check with `n` Monte Carlo draws where draws are needed.
pub fn run_all(n: usize, seed: u64) -> Vec<Check> {
    vec![
        check("gd-moments", gd_moments(n, seed)),
        check("md-lstar-consistency", md_lstar_consistency(seed)),
        check("fixed-point", fixed_point(n, seed)),
        check("radial-moment-quadrature", radial_moment_quadrature()),
        check("determinism", determinism(seed)),
    ]
}

fn gd_moments(n: usize, seed: u64) -> Result<(bool, String)> {
    let gd = GdSampler::new(1.0, DEFAULT_GD_TOL)?;
    let data = generate_draws(&gd, n, seed, 0);
    let batch = SampleBatch::new(data, 1, Method::DS, 0, seed, "gd_1".into())?;
    let (m, se) = (empirical_moments(&batch)?, moment_standard_errors(&batch)?);
    let zm = (m.mean[0] - 1.0).abs() / se.mean[0];
    let zv = (m.cov[0][0] - 0.5).abs() / se.cov[0][0];
    Ok((
        zm <= 4.0 && zv <= 4.0,
        format!("mean {:.5} (z {zm:.2}), var {:.5} (z {zv:.2})", m.mean[0], m.cov[0][0]),
    ))
}

fn md_lstar_consistency(seed: u64) -> Result<(bool, String)> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let r = rng.random_range(1..=8);
        let atoms = (0..r)
            .map(|_| Atom::from_angle(rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.05..3.0)))
            .collect();
        let sigma = SpectralMeasure::finite(2, atoms)?;
        let a = md_moments(&sigma)?;
        let b = lstar_moments(&md_from_spectral(&sigma))?;
        worst = worst.max(a.max_abs_diff(&b));
    }
    Ok((worst <= 1e-12, format!("max difference {worst:.2e} over 20 measures")))
}

fn fixed_point(n: usize, seed: u64) -> Result<(bool, String)> {
    let point = SpectralMeasure::point_mass(vec![1.0, 0.0], 1.0)?;
    let pair = SpectralMeasure::evenly_spaced(2, 1.0)?;
    let a = fixed_point_test(&point, n, seed, 4.0)?;
    let b = fixed_point_test(&pair, n, seed.wrapping_add(1), 4.0)?;
    let mut cfg = FixedPointConfig::new(n, seed, 4.0);
    cfg.theta_override = Some(point.mass() + 1.0);
    let c = fixed_point_test_with(&point, &cfg)?;
    Ok((
        a.passed && b.passed && !c.passed,
        format!("point z {:.2}, pair z {:.2}, wrong theta z {:.1}", a.max_z, b.max_z, c.max_z),
    ))
}

fn radial_moment_quadrature() -> Result<(bool, String)> {
    // nu = delta_2 on the real line, alpha = p = 1: int_1^2 1 ds = 1
    let bdlm = Bdlm::from_points(vec![(vec![2.0], 1.0)])?;
    let params = LStarParams::centered(1.0, bdlm)?;
    let v = malpha_radial_moment(&params, 1.0, Region::OutsideUnitBall)?;
    let sigma = SpectralMeasure::evenly_spaced(3, 2.0)?;
    let md = md_from_spectral(&sigma);
    let eps = 1e-3;
    let closed = malpha_tail_mass(&md, eps)?;
    // M_1 tail mass of a sphere-supported nu: theta * int_eps^1 ds / s
    let quad = 2.0 * integrate(|s: f64| 1.0 / s, eps, 1.0, 1e-12)?.value;
    let ok = (v - 1.0).abs() <= 1e-8 && (closed - quad).abs() <= 1e-8;
    Ok((ok, format!("delta_2 moment {v:.12}, tail mass {closed:.10} vs {quad:.10}")))
}

fn determinism(seed: u64) -> Result<(bool, String)> {
    let sigma = SpectralMeasure::beta(2.0, 5.0, 1.0)?;
    let cfg = ExperimentConfig::new(sigma.to_doc()?, vec![Method::SN, Method::TA], vec![1, 10], 5000, seed);
    let a = csv_string(&run_experiment_with_workers(&cfg, 1)?);
    let b = csv_string(&run_experiment_with_workers(&cfg, 4)?);
    Ok((a == b, format!("{} bytes, 1 vs 4 workers", a.len())))
}
