//! Analytic moments of `L*_alpha` and multivariate Dickman laws, and the
//! `M_alpha` tail-mass and radial-moment integrals.
//!
//! For `X ~ L*_alpha(nu, gamma)`:
//!
//! ```text
//! E[X]   = gamma + Gamma(alpha) * int y nu(dy)
//! cov(X) = Gamma(alpha) / 2^alpha * int y y^T nu(dy)
//! ```
//!
//! and for `X ~ MD(sigma)` this reduces to `E[X] = int s sigma(ds)`,
//! `cov(X) = 1/2 int s s^T sigma(ds)`.

use std::f64::consts::TAU;

use serde_json::{Map, Value};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

use crate::measures::{BaseLaw, LStarParams, SpectralMeasure, SphereMoments};
use crate::{fmt_sig15, Error, Result};

pub use crate::measures::Region;

/// Absolute tolerance for quadrature-backed moments.
pub const MOMENT_ABS_TOL: f64 = 1e-10;

/// Mean vector and covariance matrix of a `d`-dimensional law.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl MomentSummary {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Self {
        debug_assert!(cov.len() == mean.len() && cov.iter().all(|r| r.len() == mean.len()));
        Self { mean, cov }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn m1(&self) -> f64 {
        self.mean[0]
    }

    pub fn m2(&self) -> f64 {
        self.mean[1]
    }

    pub fn var1(&self) -> f64 {
        self.cov[0][0]
    }

    pub fn var2(&self) -> f64 {
        self.cov[1][1]
    }

    pub fn cov12(&self) -> f64 {
        self.cov[0][1]
    }

    /// The five scalars `(m1, m2, var1, var2, cov12)` of a bivariate summary.
    pub fn bivariate(&self) -> Option<[f64; 5]> {
        (self.dim() == 2).then(|| [self.m1(), self.m2(), self.var1(), self.var2(), self.cov12()])
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &MomentSummary) -> f64 {
        let m = self.mean.iter().zip(&other.mean).map(|(a, b)| (a - b).abs());
        let c = self
            .cov
            .iter()
            .flatten()
            .zip(other.cov.iter().flatten())
            .map(|(a, b)| (a - b).abs());
        m.chain(c).fold(0.0, f64::max)
    }

    /// JSON object: `m1,m2,var1,var2,cov12` when `d = 2`, else `mean`/`cov`.
    /// Numbers carry 15 significant digits.
    pub fn to_json_value(&self) -> Value {
        let num = |x: f64| -> Value {
            serde_json::from_str(&fmt_sig15(x)).unwrap_or(Value::Null)
        };
        let mut obj = Map::new();
        if let Some([m1, m2, v1, v2, c12]) = self.bivariate() {
            obj.insert("m1".into(), num(m1));
            obj.insert("m2".into(), num(m2));
            obj.insert("var1".into(), num(v1));
            obj.insert("var2".into(), num(v2));
            obj.insert("cov12".into(), num(c12));
        } else {
            obj.insert("mean".into(), Value::Array(self.mean.iter().map(|&x| num(x)).collect()));
            obj.insert(
                "cov".into(),
                Value::Array(
                    self.cov
                        .iter()
                        .map(|r| Value::Array(r.iter().map(|&x| num(x)).collect()))
                        .collect(),
                ),
            );
        }
        Value::Object(obj)
    }

    /// Compact JSON text with numbers in `d.dddddddddddddde±x` form.
    pub fn to_json_string(&self) -> String {
        // serde_json would reprint floats in shortest form; write the numbers ourselves.
        let f = |x: f64| fmt_sig15(x);
        if let Some([m1, m2, v1, v2, c12]) = self.bivariate() {
            format!(
                "{{\"m1\":{},\"m2\":{},\"var1\":{},\"var2\":{},\"cov12\":{}}}",
                f(m1),
                f(m2),
                f(v1),
                f(v2),
                f(c12)
            )
        } else {
            let mean: Vec<String> = self.mean.iter().map(|&x| f(x)).collect();
            let cov: Vec<String> = self
                .cov
                .iter()
                .map(|r| format!("[{}]", r.iter().map(|&x| f(x)).collect::<Vec<_>>().join(",")))
                .collect();
            format!("{{\"mean\":[{}],\"cov\":[{}]}}", mean.join(","), cov.join(","))
        }
    }
}

fn symmetrize(m: &mut [Vec<f64>]) {
    let d = m.len();
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
}

/// `(int s sigma(ds), int s s^T sigma(ds))`, unnormalized.
pub fn sphere_integrals(sigma: &SpectralMeasure) -> Result<SphereMoments> {
    let d = sigma.dim();
    if let Some(atoms) = sigma.atoms() {
        let mut first = vec![0.0; d];
        let mut second = vec![vec![0.0; d]; d];
        for atom in atoms {
            let s = atom.direction();
            for i in 0..d {
                first[i] += atom.mass() * s[i];
                for j in 0..d {
                    second[i][j] += atom.mass() * s[i] * s[j];
                }
            }
        }
        return Ok(SphereMoments { first, second });
    }
    if let Some(law) = sigma.angular_law() {
        let theta = sigma.mass();
        // each of the five integrals is scaled by theta (and later by 1/2)
        let tol = 0.1 * MOMENT_ABS_TOL / theta.max(1.0);
        let q = |g: &dyn Fn(f64) -> f64| law.integrate(g, 0.0, TAU, tol).map(|v| theta * v);
        let c = q(&|x: f64| x.cos())?;
        let s = q(&|x: f64| x.sin())?;
        let cc = q(&|x: f64| x.cos().powi(2))?;
        let ss = q(&|x: f64| x.sin().powi(2))?;
        let cs = q(&|x: f64| x.cos() * x.sin())?;
        return Ok(SphereMoments { first: vec![c, s], second: vec![vec![cc, cs], vec![cs, ss]] });
    }
    match sigma.sampler_moments() {
        Some(m) => {
            let theta = sigma.mass();
            Ok(SphereMoments {
                first: m.first.iter().map(|x| theta * x).collect(),
                second: m.second.iter().map(|r| r.iter().map(|x| theta * x).collect()).collect(),
            })
        }
        None => Err(Error::Unsupported(
            "sampler-backed spectral measure has no moment rule".into(),
        )),
    }
}

/// Mean and covariance of `MD(sigma)`.
pub fn md_moments(sigma: &SpectralMeasure) -> Result<MomentSummary> {
    let SphereMoments { first, mut second } = sphere_integrals(sigma)?;
    second.iter_mut().flatten().for_each(|x| *x *= 0.5);
    symmetrize(&mut second);
    Ok(MomentSummary::new(first, second))
}

/// Moments of `MD(sigma^{a,b})` for the unit-mass beta angular model.
pub fn beta_spectral_moments(a: f64, b: f64) -> Result<MomentSummary> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("beta shapes must be > 0, got ({a}, {b})")));
    }
    md_moments(&SpectralMeasure::beta(a, b, 1.0)?)
}

/// `(int y nu_1(dy), int y y^T nu_1(dy))` of a base law.
fn base_law_moments(law: &BaseLaw) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    match law {
        BaseLaw::Points(p) => {
            let d = p.dim();
            let mut first = vec![0.0; d];
            let mut second = vec![vec![0.0; d]; d];
            for (y, w) in p.iter() {
                for i in 0..d {
                    first[i] += w * y[i];
                    for j in 0..d {
                        second[i][j] += w * y[i] * y[j];
                    }
                }
            }
            Ok((first, second))
        }
        BaseLaw::Sphere(sigma) => {
            let SphereMoments { first, second } = sphere_integrals(sigma)?;
            let inv = 1.0 / sigma.mass();
            Ok((
                first.into_iter().map(|x| x * inv).collect(),
                second.into_iter().map(|r| r.into_iter().map(|x| x * inv).collect()).collect(),
            ))
        }
        BaseLaw::Custom(c) => c
            .moments()
            .ok_or_else(|| Error::Unsupported("custom BDLM has no moment evaluator".into())),
    }
}

/// Mean and covariance of `L*_alpha(nu, gamma)`.
pub fn lstar_moments(params: &LStarParams) -> Result<MomentSummary> {
    let alpha = params.alpha();
    let theta = params.bdlm().theta();
    let (first, second) = base_law_moments(params.bdlm().law())?;
    let g = gamma(alpha);
    let mean = params
        .gamma()
        .iter()
        .zip(&first)
        .map(|(drift, m)| drift + g * theta * m)
        .collect();
    let scale = g / 2f64.powf(alpha) * theta;
    let mut cov: Vec<Vec<f64>> =
        second.into_iter().map(|r| r.into_iter().map(|x| scale * x).collect()).collect();
    symmetrize(&mut cov);
    Ok(MomentSummary::new(mean, cov))
}

/// `M_alpha({|x| > eps})`.
///
/// For a sphere-supported BDLM this is `theta (-log eps)^alpha / alpha`; in
/// general it is `int (log(|y| / eps))_+^alpha / alpha nu(dy)`.
pub fn malpha_tail_mass(params: &LStarParams, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    let alpha = params.alpha();
    let theta = params.bdlm().theta();
    let law = params.bdlm().law();
    if matches!(law, BaseLaw::Sphere(_)) {
        return Ok(theta * (-eps.ln()).powf(alpha) / alpha);
    }
    let g = |r: f64| {
        if r > eps {
            (r / eps).ln().powf(alpha) / alpha
        } else {
            0.0
        }
    };
    law.radial_integral(&g)
        .map(|v| theta * v)
        .ok_or_else(|| Error::Unsupported("BDLM has no radial integration rule".into()))
}

/// `int_region |x|^p M_alpha(dx)`, or `f64::INFINITY` when it diverges.
///
/// Uses the inner-integral forms
///
/// ```text
/// |x| <= 1 :  int |y|^p int_{(log|y|)_+}^inf r^{alpha-1} e^{-pr} dr nu(dy)
/// |x| >  1 :  int_{|y|>1} |y|^p int_0^{log|y|} r^{alpha-1} e^{-pr} dr nu(dy)
/// ```
///
/// evaluated with regularized incomplete gamma functions. Divergence is
/// decided from the matching `nu`-moment `int_region |y|^p nu(dy)`.
pub fn malpha_radial_moment(params: &LStarParams, p: f64, region: Region) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must be finite and > 0, got {p}")));
    }
    let alpha = params.alpha();
    let theta = params.bdlm().theta();
    let law = params.bdlm().law();
    let unsupported = || Error::Unsupported("BDLM has no radial integration rule".into());

    let nu_moment = law.radial_moment(p, region).ok_or_else(unsupported)?;
    if nu_moment.is_infinite() {
        return Ok(f64::INFINITY);
    }

    // int_0^inf r^{alpha-1} e^{-pr} dr
    let full = gamma(alpha) / p.powf(alpha);
    let inner = |rho: f64| -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        match region {
            Region::InsideUnitBall => {
                let lower = p * rho.ln().max(0.0);
                let tail = if lower == 0.0 { 1.0 } else { gamma_ur(alpha, lower) };
                rho.powf(p) * full * tail
            }
            Region::OutsideUnitBall => {
                if rho <= 1.0 {
                    0.0
                } else {
                    rho.powf(p) * full * gamma_lr(alpha, p * rho.ln())
                }
            }
        }
    };
    let v = law.radial_integral(&inner).ok_or_else(unsupported)?;
    Ok(if v.is_finite() { theta * v } else { f64::INFINITY })
}
