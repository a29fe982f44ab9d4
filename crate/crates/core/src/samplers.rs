//! The three simulation methods for `L*_alpha` and multivariate Dickman laws.
//!
//! * **SN** (shot noise): `X = gamma + sum_i exp(-(alpha Gamma_i / theta)^{1/alpha}) Y_i`
//!   with unit-rate Poisson arrival times `Gamma_i` and `Y_i ~ nu_1`, truncated
//!   after `k` terms. With the factor `alpha` the series has Lévy measure
//!   exactly `M_alpha`; without it the limit would be `L*_alpha(alpha nu, gamma)`.
//!   For `alpha = 1` the weights are written as products of uniforms
//!   `(U_1 ... U_i)^{1/theta}`.
//! * **TA** (triangular array): `A_n = sum_{i <= N_n} T_i X_i^n` with
//!   `P(X > x) = (1 - x)^alpha` and `T_i ~ nu_0`.
//! * **DS** (discretize and simulate): for `sigma = sum a_i delta_{s_i}`,
//!   `sum_i s_i Y_i` with independent `Y_i ~ GD(a_i)`.
//!
//! The stochastic-integral representation of `L*_alpha` needs no separate
//! sampler: with a finite BDLM the driving Lévy process is compound Poisson
//! plus drift, and the integral over its jumps is exactly the SN series.
//!
//! Atoms of `nu_1` at the origin are allowed in SN. Such a series has the law
//! `L*_alpha(theta 1_{|y|>0} nu_1, gamma)`; see
//! [`crate::measures::Bdlm::without_zero_atom`].

use rand::distr::Open01;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::measures::{BaseLaw, LStarParams, SpectralMeasure};
use crate::{Error, Result, SimRng};

/// Default expected truncation error of a generalized Dickman draw.
pub const DEFAULT_GD_TOL: f64 = 1e-12;

/// Simulation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    SN,
    TA,
    DS,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::SN => "SN",
            Method::TA => "TA",
            Method::DS => "DS",
        }
    }

    /// Stable numeric code used when deriving RNG substreams.
    pub fn code(self) -> u64 {
        match self {
            Method::SN => 0,
            Method::TA => 1,
            Method::DS => 2,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SN" => Ok(Method::SN),
            "TA" => Ok(Method::TA),
            "DS" => Ok(Method::DS),
            other => Err(Error::Config(format!("unknown method `{other}` (expected SN, TA or DS)"))),
        }
    }
}

/// Anything that produces iid draws in `R^d`.
pub trait Sampler: Send + Sync {
    fn dim(&self) -> usize;

    fn draw_into(&self, rng: &mut SimRng, out: &mut [f64]);

    fn draw(&self, rng: &mut SimRng) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.draw_into(rng, &mut out);
        out
    }
}

#[inline]
fn open01(rng: &mut SimRng) -> f64 {
    rng.sample(Open01)
}

#[inline]
fn axpy(out: &mut [f64], w: f64, y: &[f64]) {
    for (o, v) in out.iter_mut().zip(y) {
        *o += w * v;
    }
}

/// Truncated series sampler for `GD(theta)`.
///
/// Returns `sum_{i <= k} (U_1 ... U_i)^{1/theta}` where `k` is the smallest
/// integer with `(theta + 1) (theta / (theta + 1))^{k+1} <= tol`, which bounds
/// the expected discarded tail. The products are generated as
/// `exp(-(E_1 + ... + E_i) / theta)` with `E_j ~ Exp(1)`, the same law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdSampler {
    theta: f64,
    inv_theta: f64,
    terms: usize,
}

impl GdSampler {
    pub fn new(theta: f64, tol: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::Domain(format!("GD parameter must be finite and > 0, got {theta}")));
        }
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::Domain(format!("GD tolerance must be finite and > 0, got {tol}")));
        }
        Ok(Self { theta, inv_theta: 1.0 / theta, terms: Self::terms_for(theta, tol) })
    }

    /// Upper bound on the expected tail `E sum_{i > k} (U_1...U_i)^{1/theta}`.
    pub fn tail_bound(theta: f64, k: usize) -> f64 {
        let rho = theta / (theta + 1.0);
        (theta + 1.0) * rho.powf(k as f64 + 1.0)
    }

    /// Smallest `k` with `tail_bound(theta, k) <= tol`.
    pub fn terms_for(theta: f64, tol: f64) -> usize {
        let rho = theta / (theta + 1.0);
        let guess = ((tol / (theta + 1.0)).ln() / rho.ln()).ceil() - 1.0;
        let mut k = if guess.is_finite() && guess > 0.0 { guess as usize } else { 0 };
        while Self::tail_bound(theta, k) > tol {
            k += 1;
        }
        while k > 0 && Self::tail_bound(theta, k - 1) <= tol {
            k -= 1;
        }
        k
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    #[inline]
    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        let mut arrival = 0.0;
        let mut sum = 0.0;
        for _ in 0..self.terms {
            let e: f64 = rng.sample(Exp1);
            arrival += e;
            sum += (-arrival * self.inv_theta).exp();
        }
        sum
    }
}

impl Sampler for GdSampler {
    fn dim(&self) -> usize {
        1
    }

    fn draw_into(&self, rng: &mut SimRng, out: &mut [f64]) {
        out[0] = self.sample(rng);
    }
}

/// One draw from `GD(theta)` with expected truncation error at most `tol`.
pub fn sample_gd(theta: f64, tol: f64, rng: &mut SimRng) -> Result<f64> {
    Ok(GdSampler::new(theta, tol)?.sample(rng))
}

// Weight generator shared by the SN draw and the Lévy path.
#[derive(Debug, Clone, Copy)]
struct ShotNoiseWeights {
    alpha_one: bool,
    inv_alpha: f64,
    inv_rate: f64,
}

impl ShotNoiseWeights {
    // weights exp(-(alpha Gamma_i / rate)^{1/alpha}); for alpha = 1 these are
    // (U_1 ... U_i)^{1/rate}
    fn new(alpha: f64, rate: f64) -> Self {
        let alpha_one = alpha == 1.0;
        let inv_rate = if alpha_one { 1.0 / rate } else { alpha / rate };
        Self { alpha_one, inv_alpha: 1.0 / alpha, inv_rate }
    }

    // `state` is the running product of uniforms (alpha = 1) or the arrival time.
    #[inline]
    fn next(&self, state: &mut f64, rng: &mut SimRng) -> f64 {
        if self.alpha_one {
            *state *= open01(rng);
            if self.inv_rate == 1.0 {
                *state
            } else {
                state.powf(self.inv_rate)
            }
        } else {
            let e: f64 = rng.sample(Exp1);
            *state += e;
            (-(*state * self.inv_rate).powf(self.inv_alpha)).exp()
        }
    }

    fn initial(&self) -> f64 {
        if self.alpha_one {
            1.0
        } else {
            0.0
        }
    }
}

/// Shot-noise sampler truncated after `k` terms.
#[derive(Debug, Clone)]
pub struct SnSampler {
    params: LStarParams,
    k: usize,
    weights: ShotNoiseWeights,
}

impl SnSampler {
    /// `k = 0` is allowed and yields the drift `gamma`.
    pub fn new(params: LStarParams, k: usize) -> Self {
        let weights = ShotNoiseWeights::new(params.alpha(), params.bdlm().theta());
        Self { params, k, weights }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn params(&self) -> &LStarParams {
        &self.params
    }
}

impl Sampler for SnSampler {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn draw_into(&self, rng: &mut SimRng, out: &mut [f64]) {
        out.copy_from_slice(self.params.gamma());
        let law = self.params.bdlm().law();
        let mut y = vec![0.0; out.len()];
        let mut state = self.weights.initial();
        for _ in 0..self.k {
            let w = self.weights.next(&mut state, rng);
            if w == 0.0 {
                // weights are non-increasing; the remaining terms are exactly zero
                break;
            }
            law.sample_into(rng, &mut y);
            axpy(out, w, &y);
        }
    }
}

/// One SN draw of `L*_alpha(nu, gamma)` truncated after `k` terms.
pub fn sample_sn(params: &LStarParams, k: usize, rng: &mut SimRng) -> Vec<f64> {
    SnSampler::new(params.clone(), k).draw(rng)
}

/// Jump skeleton of the Lévy process `X_t ~ L*_alpha(t nu, t gamma)` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPathSkeleton {
    horizon: f64,
    drift: Vec<f64>,
    times: Vec<f64>,
    jumps: Vec<f64>,
}

impl LevyPathSkeleton {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t_i, J_i)` in increasing time order.
    pub fn events(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.jumps.chunks_exact(self.dim().max(1)))
    }

    /// `sum_i |J_i|`.
    pub fn jump_norm_sum(&self) -> f64 {
        self.jumps
            .chunks_exact(self.dim().max(1))
            .map(|j| j.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum()
    }

    /// `X_t = t gamma + sum_{t_i <= t} J_i`.
    pub fn value_at(&self, t: f64) -> Result<Vec<f64>> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        let mut x: Vec<f64> = self.drift.iter().map(|g| t * g).collect();
        let upto = self.times.partition_point(|&s| s <= t);
        for j in self.jumps.chunks_exact(self.dim().max(1)).take(upto) {
            axpy(&mut x, 1.0, j);
        }
        Ok(x)
    }
}

/// First `k` events of the shot-noise series of a Lévy process on `[0, horizon]`:
/// times `T V_i` and jumps `exp(-(alpha Gamma_i / (T theta))^{1/alpha}) Y_i`.
pub fn sample_levy_path(
    params: &LStarParams,
    horizon: f64,
    k: usize,
    rng: &mut SimRng,
) -> Result<LevyPathSkeleton> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Domain(format!("horizon must be finite and > 0, got {horizon}")));
    }
    let d = params.dim();
    let law = params.bdlm().law();
    let weights = ShotNoiseWeights::new(params.alpha(), horizon * params.bdlm().theta());
    let mut state = weights.initial();
    let mut events: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    let mut y = vec![0.0; d];
    for _ in 0..k {
        let w = weights.next(&mut state, rng);
        let v: f64 = rng.random();
        law.sample_into(rng, &mut y);
        events.push((horizon * v, y.iter().map(|c| w * c).collect()));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let times = events.iter().map(|e| e.0).collect();
    let jumps = events.into_iter().flat_map(|e| e.1).collect();
    let path = LevyPathSkeleton { horizon, drift: params.gamma().to_vec(), times, jumps };
    debug_assert!(path.jump_norm_sum().is_finite());
    Ok(path)
}

/// Triangular-array sampler `A_n = sum_{i <= N_n} T_i X_i^n`, `X = 1 - V^{1/alpha}`.
///
/// The slowly varying factor is fixed to 1. The number of terms is
/// `N_n = floor(c n^alpha / alpha)`, for which `A_n` converges in law to
/// `L*_alpha(c 1_{|x|>0} nu_0, 0)`: with `P(X > x) = (1 - x)^alpha` we have
/// `N_n P(T X^n > s) -> (c / alpha) int (log(|y|/s))_+^alpha nu_0(dy)`, which
/// is the `M_alpha` tail of `c nu_0`. For `alpha = 1` this is the familiar
/// `floor(c n)`.
#[derive(Debug, Clone)]
pub struct TaSampler {
    alpha: f64,
    inv_alpha: f64,
    law: BaseLaw,
    n: usize,
    terms: usize,
}

impl TaSampler {
    pub fn new(alpha: f64, nu0: BaseLaw, c: f64, n: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be finite and > 0, got {alpha}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("c must be finite and > 0, got {c}")));
        }
        if n == 0 {
            return Err(Error::Domain("triangular array index n must be >= 1".into()));
        }
        let terms = Self::terms_for(alpha, c, n);
        Ok(Self { alpha, inv_alpha: 1.0 / alpha, law: nu0, n, terms })
    }

    /// `floor(c n^alpha / alpha)`.
    pub fn terms_for(alpha: f64, c: f64, n: usize) -> usize {
        (c * (n as f64).powf(alpha) / alpha).floor() as usize
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Sampler for TaSampler {
    fn dim(&self) -> usize {
        self.law.dim()
    }

    fn draw_into(&self, rng: &mut SimRng, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut t = vec![0.0; out.len()];
        let small_n = i32::try_from(self.n).ok();
        for _ in 0..self.terms {
            let v = open01(rng);
            let x = if self.alpha == 1.0 { 1.0 - v } else { 1.0 - v.powf(self.inv_alpha) };
            let w = match small_n {
                Some(n) => x.powi(n),
                None => x.powf(self.n as f64),
            };
            if w == 0.0 {
                continue;
            }
            self.law.sample_into(rng, &mut t);
            axpy(out, w, &t);
        }
    }
}

/// One TA draw.
pub fn sample_ta(alpha: f64, nu0: &BaseLaw, c: f64, n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
    Ok(TaSampler::new(alpha, nu0.clone(), c, n)?.draw(rng))
}

/// Exact (up to GD truncation) sampler of `MD(sigma_k)` for finite-support `sigma_k`.
#[derive(Debug, Clone)]
pub struct DsSampler {
    dim: usize,
    directions: Vec<f64>,
    gd: Vec<GdSampler>,
}

impl DsSampler {
    pub fn new(sigma_k: &SpectralMeasure, gd_tol: f64) -> Result<Self> {
        let atoms = sigma_k.atoms().ok_or_else(|| {
            Error::Unsupported(format!(
                "DS needs a finite-support spectral measure, got {:?}; discretize it first",
                sigma_k.variant()
            ))
        })?;
        let gd = atoms.iter().map(|a| GdSampler::new(a.mass(), gd_tol)).collect::<Result<_>>()?;
        let directions = atoms.iter().flat_map(|a| a.direction().iter().copied()).collect();
        Ok(Self { dim: sigma_k.dim(), directions, gd })
    }

    pub fn atoms(&self) -> usize {
        self.gd.len()
    }
}

impl Sampler for DsSampler {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_into(&self, rng: &mut SimRng, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (gd, s) in self.gd.iter().zip(self.directions.chunks_exact(self.dim)) {
            let y = gd.sample(rng);
            axpy(out, y, s);
        }
    }
}

/// One DS draw of `MD(sigma_k)`.
pub fn sample_ds(sigma_k: &SpectralMeasure, gd_tol: f64, rng: &mut SimRng) -> Result<Vec<f64>> {
    Ok(DsSampler::new(sigma_k, gd_tol)?.draw(rng))
}

/// `u^{1/theta} (x + w)`.
pub fn fixed_point_map(x: &[f64], w: &[f64], u: f64, theta: f64) -> Result<Vec<f64>> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u must lie in (0, 1), got {u}")));
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::Domain(format!("theta must be finite and > 0, got {theta}")));
    }
    if x.len() != w.len() {
        return Err(Error::Domain(format!("length mismatch: {} vs {}", x.len(), w.len())));
    }
    let scale = u.powf(1.0 / theta);
    Ok(x.iter().zip(w).map(|(a, b)| scale * (a + b)).collect())
}

/// `n_reps` draws in `R^d` with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    data: Vec<f64>,
    dim: usize,
    pub method: Method,
    pub k: usize,
    pub seed: u64,
    /// Serialized model description.
    pub params: String,
}

impl SampleBatch {
    /// `data` is row-major with `dim` columns; every entry must be finite.
    pub fn new(data: Vec<f64>, dim: usize, method: Method, k: usize, seed: u64, params: String) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::Validation(format!(
                "batch of {} values is not a whole number of rows of width {dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("non-finite value in row {}", i / dim)));
        }
        Ok(Self { data, dim, method, k, seed, params })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_reps(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{md_from_spectral, Bdlm, PointLaw};
    use crate::rng_from_seed;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn gd_term_count_is_minimal() {
        for &(theta, tol) in &[(1.0, 1e-10), (1.0, 1e-12), (0.02, 1e-12), (5.0, 1e-6), (1.0, 10.0)] {
            let k = GdSampler::terms_for(theta, tol);
            assert!(GdSampler::tail_bound(theta, k) <= tol);
            if k > 0 {
                assert!(GdSampler::tail_bound(theta, k - 1) > tol);
            }
        }
        // 2 * 2^{-(k+1)} <= 1e-12  <=>  k >= 39.86
        assert_eq!(GdSampler::terms_for(1.0, 1e-12), 40);
    }

    #[test]
    fn gd_rejects_bad_parameters() {
        let mut rng = rng_from_seed(1);
        assert!(sample_gd(0.0, 1e-10, &mut rng).is_err());
        assert!(sample_gd(1.0, 0.0, &mut rng).is_err());
        assert!(sample_gd(f64::NAN, 1e-3, &mut rng).is_err());
    }

    #[test]
    fn gd2_moments() {
        let gd = GdSampler::new(2.0, 1e-12).unwrap();
        let mut rng = rng_from_seed(11);
        let xs: Vec<f64> = (0..200_000).map(|_| gd.sample(&mut rng)).collect();
        let (m, v) = mean_var(&xs);
        // mean theta = 2, var theta / 2 = 1; SE(mean) = sqrt(1/2e5) ~ 0.0022
        assert!((m - 2.0).abs() < 0.01, "mean {m}");
        assert!((v - 1.0).abs() < 0.03, "var {v}");
        assert!(xs.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn sn_with_zero_terms_returns_drift() {
        let b = Bdlm::from_points(vec![(vec![1.0, 0.0], 1.0)]).unwrap();
        let p = LStarParams::new(1.0, b, vec![0.5, -2.0]).unwrap();
        assert_eq!(sample_sn(&p, 0, &mut rng_from_seed(3)), vec![0.5, -2.0]);
    }

    #[test]
    fn sn_alpha_one_uses_uniform_products() {
        // with theta = 1 and a single atom the draw is sum of running products of Open01 draws
        let p = LStarParams::centered(1.0, Bdlm::from_points(vec![(vec![1.0], 1.0)]).unwrap()).unwrap();
        let got = sample_sn(&p, 5, &mut rng_from_seed(9))[0];
        let mut rng = rng_from_seed(9);
        let mut prod = 1.0;
        let mut want = 0.0;
        for _ in 0..5 {
            prod *= rng.sample::<f64, _>(Open01);
            want += prod;
        }
        assert_eq!(got, want);
    }

    #[test]
    fn sn_point_direction_mean() {
        let sigma = SpectralMeasure::point_mass(vec![1.0, 0.0], 1.0).unwrap();
        let s = SnSampler::new(md_from_spectral(&sigma), 200);
        let mut rng = rng_from_seed(5);
        let n = 160_000;
        let draws: Vec<Vec<f64>> = (0..n).map(|_| s.draw(&mut rng)).collect();
        let xs: Vec<f64> = draws.iter().map(|d| d[0]).collect();
        let (m, v) = mean_var(&xs);
        let se = (v / n as f64).sqrt();
        assert!((m - 1.0).abs() < 4.0 * se, "mean {m} se {se}");
        assert!(draws.iter().all(|d| d[1] == 0.0));
    }

    #[test]
    fn sn_alpha_two() {
        let p = LStarParams::centered(2.0, Bdlm::from_points(vec![(vec![1.0], 1.0)]).unwrap()).unwrap();
        let s = SnSampler::new(p, 400);
        let mut rng = rng_from_seed(21);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.draw(&mut rng)[0]).collect();
        let (m, v) = mean_var(&xs);
        // Gamma(2) = 1, Gamma(2)/4 = 0.25
        let se = (v / n as f64).sqrt();
        assert!((m - 1.0).abs() < 4.0 * se, "mean {m}");
        assert!((v - 0.25).abs() < 0.01, "var {v}");
    }

    #[test]
    fn levy_path_endpoints() {
        let p = LStarParams::new(
            1.0,
            Bdlm::from_points(vec![(vec![1.0], 1.0)]).unwrap(),
            vec![0.3],
        )
        .unwrap();
        let path = sample_levy_path(&p, 2.0, 50, &mut rng_from_seed(4)).unwrap();
        assert_eq!(path.len(), 50);
        assert_eq!(path.value_at(0.0).unwrap(), vec![0.0]);
        assert!(path.value_at(2.5).is_err());
        let times: Vec<f64> = path.events().map(|(t, _)| t).collect();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!(times.iter().all(|t| (0.0..=2.0).contains(t)));
        let end = path.value_at(2.0).unwrap()[0];
        let total: f64 = path.events().map(|(_, j)| j[0]).sum();
        assert!((end - (0.6 + total)).abs() < 1e-12);
        assert!(path.jump_norm_sum().is_finite());
        assert!(sample_levy_path(&p, 0.0, 5, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn levy_path_terminal_mean() {
        // X_T ~ L*_1(T nu, 0), mean T theta Gamma(1) = 2
        let p = LStarParams::centered(1.0, Bdlm::from_points(vec![(vec![1.0], 1.0)]).unwrap()).unwrap();
        let mut rng = rng_from_seed(17);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_levy_path(&p, 2.0, 400, &mut rng).unwrap().value_at(2.0).unwrap()[0])
            .collect();
        let (m, v) = mean_var(&xs);
        // variance T theta / 2 = 1
        assert!((m - 2.0).abs() < 4.0 * (v / n as f64).sqrt(), "mean {m}");
        assert!((v - 1.0).abs() < 0.05, "var {v}");
    }

    #[test]
    fn ta_term_count() {
        assert_eq!(TaSampler::terms_for(1.0, 1.0, 200), 200);
        assert_eq!(TaSampler::terms_for(1.0, 0.5, 7), 3);
        assert_eq!(TaSampler::terms_for(2.0, 1.0, 100), 5000);
        let law = BaseLaw::Points(PointLaw::new(vec![vec![1.0]], vec![1.0]).unwrap());
        assert!(matches!(TaSampler::new(1.0, law.clone(), 1.0, 0), Err(Error::Domain(_))));
        assert!(TaSampler::new(1.0, law, -1.0, 3).is_err());
    }

    #[test]
    fn ta_alpha_one_converges_to_dickman() {
        let law = BaseLaw::Points(PointLaw::new(vec![vec![1.0]], vec![1.0]).unwrap());
        let ta = TaSampler::new(1.0, law, 1.0, 200).unwrap();
        let mut rng = rng_from_seed(8);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| ta.draw(&mut rng)[0]).collect();
        let (m, v) = mean_var(&xs);
        // exact finite-n moments: mean n/(n+1), var = n/(2n+1) - n/(n+1)^2
        let nf = 200.0;
        let mean_n = nf / (nf + 1.0);
        let var_n = nf / (2.0 * nf + 1.0) - nf / ((nf + 1.0) * (nf + 1.0));
        let se = (v / n as f64).sqrt();
        assert!((m - mean_n).abs() < 5.0 * se, "mean {m} vs {mean_n}");
        assert!((v - var_n).abs() < 0.01, "var {v} vs {var_n}");
        assert!((mean_n - 1.0).abs() < 0.01 && (var_n - 0.5).abs() < 0.01);
    }

    #[test]
    fn ta_with_unscaled_term_count_overshoots_by_alpha() {
        // With floor(c n^alpha) terms the mean would be c n^alpha E[X^n]
        // = c n^alpha * n B(n, alpha + 1) -> c Gamma(alpha + 1), i.e. alpha
        // times the L*_alpha(c nu_0) mean c Gamma(alpha). Check the exact
        // finite-n value used by the sampler instead.
        let (alpha, c, n) = (2.0f64, 1.0, 100usize);
        let nf = n as f64;
        let ex_n = 2.0 / ((nf + 1.0) * (nf + 2.0)); // n B(n, 3)
        let unscaled = c * nf.powf(alpha) * ex_n;
        let scaled = TaSampler::terms_for(alpha, c, n) as f64 * ex_n;
        assert!((unscaled - 1.9414).abs() < 1e-3);
        assert!((scaled - 0.9707).abs() < 1e-3);
    }

    #[test]
    fn ds_single_direction() {
        let sigma = SpectralMeasure::point_mass(vec![0.0, 1.0], 1.0).unwrap();
        let mut rng = rng_from_seed(2);
        for _ in 0..100 {
            let x = sample_ds(&sigma, 1e-12, &mut rng).unwrap();
            assert_eq!(x[0], 0.0);
            assert!(x[1] > 0.0);
        }
    }

    #[test]
    fn ds_rejects_non_finite_support() {
        let beta = SpectralMeasure::beta(2.0, 2.0, 1.0).unwrap();
        assert!(matches!(sample_ds(&beta, 1e-12, &mut rng_from_seed(1)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn ds_symmetric_pair() {
        let sigma = SpectralMeasure::evenly_spaced(2, 1.0).unwrap();
        let ds = DsSampler::new(&sigma, 1e-12).unwrap();
        let mut rng = rng_from_seed(6);
        let n = 200_000;
        let draws: Vec<Vec<f64>> = (0..n).map(|_| ds.draw(&mut rng)).collect();
        let x1: Vec<f64> = draws.iter().map(|d| d[0]).collect();
        let (m, v) = mean_var(&x1);
        assert!(m.abs() < 4.0 * (v / n as f64).sqrt());
        assert!((v - 0.5).abs() < 0.01);
        // second coordinate is sin(pi) * GD draw
        assert!(draws.iter().all(|d| d[1].abs() < 1e-12));
    }

    #[test]
    fn fixed_point_map_examples() {
        let y = fixed_point_map(&[0.0, 0.0], &[1.0, 0.0], 1.0 - f64::EPSILON, 1.0).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && y[1] == 0.0);
        let y = fixed_point_map(&[1.0, 1.0], &[1.0, 0.0], (-1.0f64).exp(), 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((y[0] - 2.0 * e).abs() < 1e-15 && (y[1] - e).abs() < 1e-15);
        let y = fixed_point_map(&[0.0, 0.0], &[0.0, 1.0], 0.25, 2.0).unwrap();
        assert_eq!(y, vec![0.0, 0.5]);
        assert!(fixed_point_map(&[0.0], &[1.0], 0.0, 1.0).is_err());
        assert!(fixed_point_map(&[0.0], &[1.0], 1.0, 1.0).is_err());
        assert!(fixed_point_map(&[0.0], &[1.0, 0.0], 0.5, 1.0).is_err());
    }

    #[test]
    fn batch_validation() {
        assert!(SampleBatch::new(vec![1.0, 2.0, 3.0], 2, Method::SN, 1, 0, String::new()).is_err());
        assert!(SampleBatch::new(vec![1.0, f64::NAN], 2, Method::SN, 1, 0, String::new()).is_err());
        let b = SampleBatch::new(vec![1.0, 2.0, 3.0, 4.0], 2, Method::DS, 0, 7, "m".into()).unwrap();
        assert_eq!(b.n_reps(), 2);
        assert_eq!(b.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("sn".parse::<Method>().unwrap(), Method::SN);
        assert!("XX".parse::<Method>().is_err());
    }
}
