mod common;

use dickman::harness::generate_draws;
use dickman::measures::{md_from_spectral, BaseLaw, Bdlm, LStarParams, SpectralMeasure};
use dickman::moments::md_moments;
use dickman::rng_from_seed;
use dickman::samplers::{sample_gd, sample_levy_path, GdSampler, Method, SampleBatch, SnSampler, TaSampler};
use dickman::stats::{empirical_moments, moment_standard_errors};
use statrs::function::gamma::gamma;

use common::{mean_and_se, var_and_se};

#[test]
fn gd_theta_two() {
    let mut rng = rng_from_seed(11);
    let xs: Vec<f64> = (0..400_000).map(|_| sample_gd(2.0, 1e-12, &mut rng).unwrap()).collect();
    let (m, sm) = mean_and_se(&xs);
    let (v, sv) = var_and_se(&xs);
    assert!((m - 2.0).abs() < 4.0 * sm, "mean {m}");
    assert!((v - 1.0).abs() < 4.0 * sv, "var {v}");
}

#[test]
fn sn_truncation_bias_is_within_geometric_bound() {
    let theta = 1.5;
    let sigma = SpectralMeasure::beta(2.0, 5.0, theta).unwrap();
    let truth = md_moments(&sigma).unwrap();
    let n = 100_000;
    for k in [1, 3, 8] {
        let sn = SnSampler::new(md_from_spectral(&sigma), k);
        let batch = SampleBatch::new(generate_draws(&sn, n, 12, k as u64), 2, Method::SN, k, 12, String::new()).unwrap();
        let (emp, se) = (empirical_moments(&batch).unwrap(), moment_standard_errors(&batch).unwrap());
        let err = ((emp.m1() - truth.m1()).powi(2) + (emp.m2() - truth.m2()).powi(2)).sqrt();
        let se = (se.mean[0].powi(2) + se.mean[1].powi(2)).sqrt();
        assert!(err <= GdSampler::tail_bound(theta, k) + 4.0 * se, "k={k}: {err}");
    }
}

#[test]
fn ta_uniform_model_matches_md_moments() {
    let sigma = SpectralMeasure::beta(1.0, 1.0, 1.0).unwrap();
    let ta = TaSampler::new(1.0, BaseLaw::Sphere(sigma.clone()), 1.0, 200).unwrap();
    let batch = SampleBatch::new(generate_draws(&ta, 160_000, 13, 0), 2, Method::TA, 200, 13, String::new()).unwrap();
    let (emp, se) = (empirical_moments(&batch).unwrap(), moment_standard_errors(&batch).unwrap());
    let truth = md_moments(&sigma).unwrap();
    for ((e, t), s) in emp.bivariate().unwrap().iter().zip(truth.bivariate().unwrap()).zip(se.bivariate().unwrap()) {
        // O(1/n) bias on the variances: 1/4 - n/(2(2n+1)) ~ 6e-4
        assert!((e - t).abs() < 5.0 * s + 1e-3, "{e} vs {t}");
    }
}

#[test]
fn levy_path_mean_is_linear_and_increments_uncorrelated() {
    let (alpha, theta, gamma_drift) = (1.5, 0.8, 0.5);
    let bdlm = Bdlm::from_points(vec![(vec![1.0], theta)]).unwrap();
    let params = LStarParams::new(alpha, bdlm, vec![gamma_drift]).unwrap();
    let horizon = 2.0;
    let n = 20_000;
    let mut rng = rng_from_seed(14);
    let (mut a, mut b, mut end) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let path = sample_levy_path(&params, horizon, 400, &mut rng).unwrap();
        assert_eq!(path.value_at(0.0).unwrap(), vec![0.0]);
        let (x1, x2, x3) = (path.value_at(0.5).unwrap()[0], path.value_at(1.0).unwrap()[0], path.value_at(2.0).unwrap()[0]);
        a.push(x1);
        b.push(x3 - x2);
        end.push(x3);
    }
    let per_unit = gamma_drift + gamma(alpha) * theta;
    for (xs, t) in [(&a, 0.5), (&b, 1.0), (&end, 2.0)] {
        let (m, se) = mean_and_se(xs);
        assert!((m - t * per_unit).abs() < 4.0 * se, "t={t}: {m} vs {}", t * per_unit);
    }
    let (ma, mb) = (mean_and_se(&a).0, mean_and_se(&b).0);
    let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n as f64 - 1.0);
    let corr = cov / (var_and_se(&a).0 * var_and_se(&b).0).sqrt();
    assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr {corr}");
}

#[test]
fn levy_path_terminal_value_matches_sn_with_scaled_mass() {
    let sigma = SpectralMeasure::point_mass(vec![1.0], 1.0).unwrap();
    let params = md_from_spectral(&sigma);
    let n = 40_000;
    let mut rng = rng_from_seed(15);
    let xs: Vec<f64> = (0..n).map(|_| sample_levy_path(&params, 2.0, 200, &mut rng).unwrap().value_at(2.0).unwrap()[0]).collect();
    let scaled = LStarParams::centered(1.0, params.bdlm().scaled(2.0).unwrap()).unwrap();
    let ys = generate_draws(&SnSampler::new(scaled, 200), n, 16, 0);
    let ((mx, sx), (my, sy)) = (mean_and_se(&xs), mean_and_se(&ys));
    assert!((mx - my).abs() < 4.0 * (sx * sx + sy * sy).sqrt());
    let ((vx, svx), (vy, svy)) = (var_and_se(&xs), var_and_se(&ys));
    assert!((vx - vy).abs() < 4.0 * (svx * svx + svy * svy).sqrt());
    assert!((my - 2.0).abs() < 4.0 * sy);
}
