//! Spectral measures, background driving Lévy measures (BDLMs) and
//! `L*_alpha` parameter bundles.
//!
//! A [`SpectralMeasure`] `sigma` is a finite measure on the unit sphere with
//! total mass `theta = sigma(S^{d-1})` and normalized direction law
//! `sigma_1 = sigma / theta`. It parameterizes the multivariate Dickman law
//! `MD(sigma)`, which coincides with `L*_1(sigma, 0)`.
//!
//! A [`Bdlm`] stores a finite measure `nu` on `R^d` as its total mass `theta`
//! and the normalized law `nu_1 = nu / theta` (a [`BaseLaw`]).

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::quadrature;
use crate::{Error, Result, SimRng};

/// Allowed deviation of a direction's Euclidean norm from 1.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Tolerance for the normalization check of an angular density.
pub const DENSITY_MASS_TOL: f64 = 1e-8;

/// Map an angle to the point `(cos phi, sin phi)` of the unit circle.
///
/// Angles outside `[0, 2pi)` are reduced modulo `2pi` first.
pub fn angle_to_direction(phi: f64) -> [f64; 2] {
    let (s, c) = reduce_angle(phi).sin_cos();
    [c, s]
}

/// Reduce an angle into `[0, 2pi)`.
pub fn reduce_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Validation(format!("{name} must be finite and > 0, got {value}")));
    }
    Ok(())
}

/// Which of the three spectral-measure representations is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpectralVariant {
    FiniteSupport,
    AngularDensity2D,
    SamplerBacked,
}

/// A point mass `mass * delta_direction` on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    direction: Vec<f64>,
    mass: f64,
    angle: Option<f64>,
}

impl Atom {
    pub fn new(direction: Vec<f64>, mass: f64) -> Self {
        Self { direction, mass, angle: None }
    }

    /// Atom at `(cos phi, sin phi)`; the reduced angle is kept for serialization.
    pub fn from_angle(phi: f64, mass: f64) -> Self {
        let phi = reduce_angle(phi);
        Self { direction: angle_to_direction(phi).to_vec(), mass, angle: Some(phi) }
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Angle in `[0, 2pi)` for bivariate atoms.
    pub fn angle(&self) -> Option<f64> {
        self.angle.or_else(|| {
            (self.direction.len() == 2)
                .then(|| reduce_angle(self.direction[1].atan2(self.direction[0])))
        })
    }
}

/// A probability law for the angle `phi` of a bivariate spectral measure.
pub trait AngularLaw: Send + Sync + fmt::Debug {
    /// Probability density of `phi` on `[0, 2pi)`.
    fn density(&self, phi: f64) -> f64;

    /// Draw one angle in `[0, 2pi)`.
    fn sample_angle(&self, rng: &mut SimRng) -> f64;

    /// `int_lo^hi g(phi) f(phi) dphi` to absolute tolerance `abs_tol`.
    fn integrate(&self, g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, abs_tol: f64) -> Result<f64> {
        let q = quadrature::integrate(|x| g(x) * self.density(x), lo, hi, abs_tol)?;
        Ok(q.value)
    }

    /// Beta shape parameters, when the law is the beta angular law.
    fn beta_params(&self) -> Option<(f64, f64)> {
        None
    }
}

/// `phi = 2 pi B` with `B ~ Beta(a, b)`:
/// `f(x) = (2pi)^{1-a-b} / B(a,b) * x^{a-1} (2pi - x)^{b-1}` on `[0, 2pi)`.
#[derive(Debug, Clone)]
pub struct BetaAngular {
    a: f64,
    b: f64,
    log_norm: f64,
    dist: Beta<f64>,
}

impl BetaAngular {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_positive("beta shape alpha", a)?;
        check_positive("beta shape beta", b)?;
        let dist = Beta::new(a, b).map_err(|e| Error::Validation(format!("beta law: {e}")))?;
        let log_norm = (1.0 - a - b) * TAU.ln() - ln_beta(a, b);
        Ok(Self { a, b, log_norm, dist })
    }

    pub fn shape(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn is_uniform(&self) -> bool {
        self.a == 1.0 && self.b == 1.0
    }

    // f(x) with the singular factor x^{a-1} removed; used on the left half.
    fn left_regular(&self, x: f64) -> f64 {
        (self.log_norm + (self.b - 1.0) * (TAU - x).ln()).exp()
    }

    // f(x) with (2pi - x)^{b-1} removed; used on the right half.
    fn right_regular(&self, x: f64) -> f64 {
        (self.log_norm + (self.a - 1.0) * x.ln()).exp()
    }

    fn integrate_left(&self, g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
        if self.a < 1.0 {
            // x = u^{1/a}: x^{a-1} dx = du / a
            let inv = 1.0 / self.a;
            let q = quadrature::integrate(
                |u| {
                    let x = u.powf(inv);
                    g(x) * self.left_regular(x) * inv
                },
                lo.powf(self.a),
                hi.powf(self.a),
                tol,
            )?;
            Ok(q.value)
        } else {
            Ok(quadrature::integrate(|x| g(x) * self.density(x), lo, hi, tol)?.value)
        }
    }

    fn integrate_right(&self, g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
        if self.b < 1.0 {
            // 2pi - x = v^{1/b}
            let inv = 1.0 / self.b;
            let q = quadrature::integrate(
                |v| {
                    let x = TAU - v.powf(inv);
                    g(x) * self.right_regular(x) * inv
                },
                (TAU - hi).powf(self.b),
                (TAU - lo).powf(self.b),
                tol,
            )?;
            Ok(q.value)
        } else {
            Ok(quadrature::integrate(|x| g(x) * self.density(x), lo, hi, tol)?.value)
        }
    }
}

impl AngularLaw for BetaAngular {
    fn density(&self, phi: f64) -> f64 {
        if !(0.0..TAU).contains(&phi) {
            return 0.0;
        }
        if self.is_uniform() {
            return 1.0 / TAU;
        }
        (self.log_norm + (self.a - 1.0) * phi.ln() + (self.b - 1.0) * (TAU - phi).ln()).exp()
    }

    fn sample_angle(&self, rng: &mut SimRng) -> f64 {
        let u = if self.is_uniform() { rng.random::<f64>() } else { self.dist.sample(rng) };
        // guard against B == 1.0 rounding onto the excluded endpoint
        reduce_angle(TAU * u)
    }

    /// Splits at `pi` and removes the endpoint singularities `x^{a-1}` (when
    /// `a < 1`) and `(2pi - x)^{b-1}` (when `b < 1`) by a power substitution.
    fn integrate(&self, g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, abs_tol: f64) -> Result<f64> {
        let lo = lo.max(0.0);
        let hi = hi.min(TAU);
        if hi <= lo {
            return Ok(0.0);
        }
        let mut total = 0.0;
        if lo < PI {
            total += self.integrate_left(g, lo, hi.min(PI), 0.5 * abs_tol)?;
        }
        if hi > PI {
            total += self.integrate_right(g, lo.max(PI), hi, 0.5 * abs_tol)?;
        }
        Ok(total)
    }

    fn beta_params(&self) -> Option<(f64, f64)> {
        Some((self.a, self.b))
    }
}

/// User-supplied sampler of unit vectors distributed as `sigma_1`.
pub trait DirectionSampler: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Write one direction into `out` (length `dim`).
    fn sample_direction(&self, rng: &mut SimRng, out: &mut [f64]);
}

/// First and second moments of a direction law: `int s sigma_1(ds)` and
/// `int s s^T sigma_1(ds)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMoments {
    pub first: Vec<f64>,
    pub second: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
enum SpectralKind {
    Finite {
        atoms: Vec<Atom>,
        picker: Option<WeightedAliasIndex<f64>>,
    },
    Angular(Arc<dyn AngularLaw>),
    Sampler {
        sampler: Arc<dyn DirectionSampler>,
        moments: Option<SphereMoments>,
    },
}

/// A finite, nonzero Borel measure on the unit sphere `S^{d-1}`.
///
/// Instances are validated on construction and immutable afterwards.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    dim: usize,
    mass: f64,
    kind: SpectralKind,
}

impl SpectralMeasure {
    /// `sum_i a_i delta_{s_i}`.
    pub fn finite(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dimension must be >= 1".into()));
        }
        if atoms.is_empty() {
            return Err(Error::Validation("finite-support measure needs at least one atom".into()));
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.direction.len() != dim {
                return Err(Error::Validation(format!(
                    "atom {i} has dimension {}, expected {dim}",
                    atom.direction.len()
                )));
            }
            let n = norm(&atom.direction);
            if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Validation(format!(
                    "atom {i} direction is not a unit vector (| |s| - 1 | = {:e} > {UNIT_NORM_TOL:e})",
                    (n - 1.0).abs()
                )));
            }
            check_positive(&format!("atom {i} mass"), atom.mass)?;
        }
        let mass: f64 = atoms.iter().map(|a| a.mass).sum();
        check_positive("total mass", mass)?;
        let picker = if atoms.len() > 1 {
            let w = atoms.iter().map(|a| a.mass).collect();
            Some(
                WeightedAliasIndex::new(w)
                    .map_err(|e| Error::Validation(format!("atom weights: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { dim, mass, kind: SpectralKind::Finite { atoms, picker } })
    }

    /// Bivariate finite-support measure from `(angle, mass)` pairs.
    pub fn from_angles(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::finite(2, atoms.iter().map(|&(phi, m)| Atom::from_angle(phi, m)).collect())
    }

    /// `r` evenly spaced directions `2 pi i / r`, each carrying `mass / r`.
    pub fn evenly_spaced(r: usize, mass: f64) -> Result<Self> {
        if r == 0 {
            return Err(Error::Validation("need at least one direction".into()));
        }
        let atoms: Vec<(f64, f64)> =
            (0..r).map(|i| (TAU * i as f64 / r as f64, mass / r as f64)).collect();
        Self::from_angles(&atoms)
    }

    pub fn point_mass(direction: Vec<f64>, mass: f64) -> Result<Self> {
        let dim = direction.len();
        Self::finite(dim, vec![Atom::new(direction, mass)])
    }

    /// Bivariate measure `sigma'(dphi) = mass * law.density(phi) dphi`.
    pub fn angular(law: Arc<dyn AngularLaw>, mass: f64) -> Result<Self> {
        check_positive("total mass", mass)?;
        let total = law.integrate(&|_| 1.0, 0.0, TAU, 1e-10)?;
        if (total - 1.0).abs() > DENSITY_MASS_TOL {
            return Err(Error::Validation(format!(
                "angular density integrates to {total}, expected 1 within {DENSITY_MASS_TOL:e}"
            )));
        }
        Ok(Self { dim: 2, mass, kind: SpectralKind::Angular(law) })
    }

    /// The beta angular model with shapes `(a, b)` scaled to total mass `mass`.
    pub fn beta(a: f64, b: f64, mass: f64) -> Result<Self> {
        Self::angular(Arc::new(BetaAngular::new(a, b)?), mass)
    }

    /// Measure known only through a direction sampler and, optionally, its moments.
    pub fn sampler_backed(
        dim: usize,
        mass: f64,
        sampler: Arc<dyn DirectionSampler>,
        moments: Option<SphereMoments>,
    ) -> Result<Self> {
        check_positive("total mass", mass)?;
        if dim == 0 || sampler.dim() != dim {
            return Err(Error::Validation(format!(
                "sampler dimension {} does not match declared dimension {dim}",
                sampler.dim()
            )));
        }
        if let Some(m) = &moments {
            if m.first.len() != dim || m.second.len() != dim || m.second.iter().any(|r| r.len() != dim)
            {
                return Err(Error::Validation("moment rule has wrong shape".into()));
            }
        }
        Ok(Self { dim, mass, kind: SpectralKind::Sampler { sampler, moments } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total mass `theta = sigma(S^{d-1})`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn variant(&self) -> SpectralVariant {
        match self.kind {
            SpectralKind::Finite { .. } => SpectralVariant::FiniteSupport,
            SpectralKind::Angular(_) => SpectralVariant::AngularDensity2D,
            SpectralKind::Sampler { .. } => SpectralVariant::SamplerBacked,
        }
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            SpectralKind::Finite { atoms, .. } => Some(atoms),
            _ => None,
        }
    }

    pub fn angular_law(&self) -> Option<&dyn AngularLaw> {
        match &self.kind {
            SpectralKind::Angular(law) => Some(law.as_ref()),
            _ => None,
        }
    }

    /// Moment rule attached to a sampler-backed measure.
    pub fn sampler_moments(&self) -> Option<&SphereMoments> {
        match &self.kind {
            SpectralKind::Sampler { moments, .. } => moments.as_ref(),
            _ => None,
        }
    }

    /// Draw a direction from `sigma_1 = sigma / theta` into `out`.
    #[inline]
    pub fn sample_direction(&self, rng: &mut SimRng, out: &mut [f64]) {
        match &self.kind {
            SpectralKind::Finite { atoms, picker } => {
                let i = picker.as_ref().map_or(0, |p| p.sample(rng));
                out.copy_from_slice(&atoms[i].direction);
            }
            SpectralKind::Angular(law) => {
                let (s, c) = law.sample_angle(rng).sin_cos();
                out[0] = c;
                out[1] = s;
            }
            SpectralKind::Sampler { sampler, .. } => {
                sampler.sample_direction(rng, out);
                let n = norm(out);
                if n > 0.0 && (n - 1.0).abs() > f64::EPSILON {
                    out.iter_mut().for_each(|x| *x /= n);
                }
            }
        }
    }

    /// Short, filesystem-safe model label.
    pub fn label(&self) -> String {
        let suffix = if self.mass == 1.0 { String::new() } else { format!("_m{}", self.mass) };
        match &self.kind {
            SpectralKind::Finite { atoms, .. } => format!("finite_r{}{suffix}", atoms.len()),
            SpectralKind::Angular(law) => match law.beta_params() {
                Some((a, b)) => format!("beta_{a}_{b}{suffix}"),
                None => format!("angular{suffix}"),
            },
            SpectralKind::Sampler { .. } => format!("sampler_d{}{suffix}", self.dim),
        }
    }

    pub fn to_doc(&self) -> Result<MeasureDoc> {
        match &self.kind {
            SpectralKind::Finite { atoms, .. } => Ok(MeasureDoc::Finite {
                dim: self.dim,
                atoms: atoms
                    .iter()
                    .map(|a| {
                        if self.dim == 2 {
                            AtomDoc { angle: a.angle(), direction: None, mass: a.mass }
                        } else {
                            AtomDoc { angle: None, direction: Some(a.direction.clone()), mass: a.mass }
                        }
                    })
                    .collect(),
            }),
            SpectralKind::Angular(law) => match law.beta_params() {
                Some((alpha, beta)) => Ok(MeasureDoc::Beta { alpha, beta, mass: self.mass }),
                None => Err(Error::Unsupported("custom angular densities have no JSON form".into())),
            },
            SpectralKind::Sampler { .. } => {
                Err(Error::Unsupported("sampler-backed measures have no JSON form".into()))
            }
        }
    }

    pub fn from_doc(doc: &MeasureDoc) -> Result<Self> {
        match doc {
            MeasureDoc::Beta { alpha, beta, mass } => Self::beta(*alpha, *beta, *mass),
            MeasureDoc::Finite { dim, atoms } => {
                let atoms = atoms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| match (&a.angle, &a.direction) {
                        (Some(phi), None) if *dim == 2 => Ok(Atom::from_angle(*phi, a.mass)),
                        (Some(_), None) => Err(Error::Validation(format!(
                            "atom {i}: angles are only meaningful for dim 2"
                        ))),
                        (None, Some(dir)) => Ok(Atom::new(dir.clone(), a.mass)),
                        _ => Err(Error::Validation(format!(
                            "atom {i}: give exactly one of `angle` or `direction`"
                        ))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::finite(*dim, atoms)
            }
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc()?)?)
    }
}

/// JSON document form of a spectral measure.
///
/// `{"variant":"finite","dim":2,"atoms":[{"angle":0.0,"mass":0.02}, ...]}` or
/// `{"variant":"beta","alpha":2.0,"beta":5.0,"mass":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum MeasureDoc {
    Finite {
        dim: usize,
        atoms: Vec<AtomDoc>,
    },
    Beta {
        alpha: f64,
        beta: f64,
        #[serde(default = "unit_mass")]
        mass: f64,
    },
}

fn unit_mass() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    pub mass: f64,
}

/// Region of `R^d` for radial moment integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `|x| <= 1`
    InsideUnitBall,
    /// `|x| > 1`
    OutsideUnitBall,
}

impl Region {
    pub fn contains_radius(self, r: f64) -> bool {
        match self {
            Region::InsideUnitBall => r <= 1.0,
            Region::OutsideUnitBall => r > 1.0,
        }
    }
}

/// A probability law on `R^d` supplied by the caller.
///
/// Only `sample_into` is required. The optional rules feed the analytic
/// operations in [`crate::moments`]; returning `None` makes those operations
/// report an unsupported-measure error.
pub trait CustomLaw: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn sample_into(&self, rng: &mut SimRng, out: &mut [f64]);

    /// `(int y nu_1(dy), int y y^T nu_1(dy))`.
    fn moments(&self) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        None
    }

    /// `int g(|y|) nu_1(dy)`.
    fn radial_integral(&self, _g: &dyn Fn(f64) -> f64) -> Option<f64> {
        None
    }

    /// `int_region |y|^p nu_1(dy)`, `+inf` when divergent.
    fn radial_moment(&self, p: f64, region: Region) -> Option<f64> {
        self.radial_integral(&|r| if region.contains_radius(r) { r.powf(p) } else { 0.0 })
    }
}

/// Discrete law `sum_j w_j delta_{y_j}` on `R^d`; points may include the origin.
#[derive(Debug, Clone)]
pub struct PointLaw {
    dim: usize,
    points: Vec<f64>,
    probs: Vec<f64>,
    picker: Option<WeightedAliasIndex<f64>>,
}

impl PointLaw {
    /// Points with nonnegative weights; weights are normalized to sum to one.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::Validation("need one weight per point and at least one point".into()));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Validation("points must share a dimension >= 1 and be finite".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation("point weights must be finite and >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        check_positive("total point weight", total)?;
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let picker = if probs.len() > 1 {
            Some(
                WeightedAliasIndex::new(probs.clone())
                    .map_err(|e| Error::Validation(format!("point weights: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { dim, points: points.concat(), probs, picker })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks_exact(self.dim).zip(self.probs.iter().copied())
    }

    /// Probability of the origin.
    pub fn zero_mass(&self) -> f64 {
        self.iter().filter(|(y, _)| y.iter().all(|&x| x == 0.0)).map(|(_, w)| w).sum()
    }

    #[inline]
    fn sample_into(&self, rng: &mut SimRng, out: &mut [f64]) {
        let i = self.picker.as_ref().map_or(0, |p| p.sample(rng));
        out.copy_from_slice(self.point(i));
    }
}

/// The normalized BDLM `nu_1 = nu / theta`.
#[derive(Debug, Clone)]
pub enum BaseLaw {
    /// Finite support in `R^d`.
    Points(PointLaw),
    /// Concentrated on the unit sphere: `nu_1 = sigma_1`.
    Sphere(SpectralMeasure),
    Custom(Arc<dyn CustomLaw>),
}

impl BaseLaw {
    pub fn dim(&self) -> usize {
        match self {
            BaseLaw::Points(p) => p.dim(),
            BaseLaw::Sphere(s) => s.dim(),
            BaseLaw::Custom(c) => c.dim(),
        }
    }

    /// Draw `Y ~ nu_1` into `out`.
    #[inline]
    pub fn sample_into(&self, rng: &mut SimRng, out: &mut [f64]) {
        match self {
            BaseLaw::Points(p) => p.sample_into(rng, out),
            BaseLaw::Sphere(s) => s.sample_direction(rng, out),
            BaseLaw::Custom(c) => c.sample_into(rng, out),
        }
    }

    pub fn is_sphere_supported(&self) -> bool {
        match self {
            BaseLaw::Sphere(_) => true,
            BaseLaw::Points(p) => p.iter().all(|(y, _)| (norm(y) - 1.0).abs() <= UNIT_NORM_TOL),
            BaseLaw::Custom(_) => false,
        }
    }

    /// `nu_1({0})`; zero for sphere-supported and custom laws.
    pub fn zero_mass(&self) -> f64 {
        match self {
            BaseLaw::Points(p) => p.zero_mass(),
            _ => 0.0,
        }
    }

    /// `int g(|y|) nu_1(dy)` when a rule is available.
    pub fn radial_integral(&self, g: &dyn Fn(f64) -> f64) -> Option<f64> {
        match self {
            BaseLaw::Points(p) => Some(p.iter().map(|(y, w)| w * g(norm(y))).sum()),
            BaseLaw::Sphere(_) => Some(g(1.0)),
            BaseLaw::Custom(c) => c.radial_integral(g),
        }
    }

    /// `int_region |y|^p nu_1(dy)`, possibly `+inf`.
    pub fn radial_moment(&self, p: f64, region: Region) -> Option<f64> {
        match self {
            BaseLaw::Custom(c) => c.radial_moment(p, region),
            _ => self.radial_integral(&|r| if region.contains_radius(r) { r.powf(p) } else { 0.0 }),
        }
    }
}

/// A finite background driving Lévy measure `nu = theta * nu_1`.
///
/// The log-moment condition `int_{|x|>2} (log|x|)^alpha nu(dx) < inf` is the
/// caller's responsibility; [`Bdlm::log_moment_alpha`] records the `alpha`
/// for which it was asserted.
#[derive(Debug, Clone)]
pub struct Bdlm {
    theta: f64,
    law: BaseLaw,
    log_moment_alpha: Option<f64>,
}

impl Bdlm {
    pub fn new(theta: f64, law: BaseLaw) -> Result<Self> {
        check_positive("BDLM total mass theta", theta)?;
        Ok(Self { theta, law, log_moment_alpha: None })
    }

    /// `nu = sum_j c_j delta_{y_j}` with `theta = sum_j c_j`.
    pub fn from_points(points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let theta: f64 = points.iter().map(|(_, c)| *c).sum();
        let (pts, w): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        Self::new(theta, BaseLaw::Points(PointLaw::new(pts, w)?))
    }

    /// `nu = sigma`, a sphere-supported BDLM.
    pub fn from_spectral(sigma: &SpectralMeasure) -> Self {
        Self { theta: sigma.mass(), law: BaseLaw::Sphere(sigma.clone()), log_moment_alpha: None }
    }

    pub fn with_log_moment_alpha(mut self, alpha: f64) -> Self {
        self.log_moment_alpha = Some(alpha);
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn law(&self) -> &BaseLaw {
        &self.law
    }

    pub fn dim(&self) -> usize {
        self.law.dim()
    }

    pub fn log_moment_alpha(&self) -> Option<f64> {
        self.log_moment_alpha
    }

    /// Same measure scaled by `t` (`t nu`).
    pub fn scaled(&self, t: f64) -> Result<Self> {
        check_positive("scale", t)?;
        Ok(Self { theta: self.theta * t, ..self.clone() })
    }

    /// Drop the atom at the origin: `nu' = theta 1_{|y|>0} nu_1`.
    ///
    /// A shot-noise series driven by `(theta, nu_1)` with `nu_1({0}) = u > 0`
    /// has the law `L*_alpha(nu', gamma)`; this returns that `nu'`.
    pub fn without_zero_atom(&self) -> Result<Self> {
        let u = self.law.zero_mass();
        if u == 0.0 {
            return Ok(self.clone());
        }
        let BaseLaw::Points(p) = &self.law else { unreachable!("only point laws carry atoms at 0") };
        let (pts, w): (Vec<Vec<f64>>, Vec<f64>) = p
            .iter()
            .filter(|(y, _)| y.iter().any(|&x| x != 0.0))
            .map(|(y, w)| (y.to_vec(), w))
            .unzip();
        if pts.is_empty() {
            return Err(Error::Validation("BDLM is concentrated at the origin".into()));
        }
        Ok(Self {
            theta: self.theta * (1.0 - u),
            law: BaseLaw::Points(PointLaw::new(pts, w)?),
            log_moment_alpha: self.log_moment_alpha,
        })
    }
}

/// Parameters of `L*_alpha(nu, gamma)`.
#[derive(Debug, Clone)]
pub struct LStarParams {
    alpha: f64,
    bdlm: Bdlm,
    gamma: Vec<f64>,
}

impl LStarParams {
    pub fn new(alpha: f64, bdlm: Bdlm, gamma: Vec<f64>) -> Result<Self> {
        check_positive("alpha", alpha)?;
        if gamma.len() != bdlm.dim() {
            return Err(Error::Validation(format!(
                "drift has dimension {}, BDLM has dimension {}",
                gamma.len(),
                bdlm.dim()
            )));
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::Validation("drift must be finite".into()));
        }
        Ok(Self { alpha, bdlm, gamma })
    }

    /// Zero drift.
    pub fn centered(alpha: f64, bdlm: Bdlm) -> Result<Self> {
        let d = bdlm.dim();
        Self::new(alpha, bdlm, vec![0.0; d])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bdlm(&self) -> &Bdlm {
        &self.bdlm
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }
}

/// `MD(sigma) = L*_1(sigma, 0)`.
pub fn md_from_spectral(sigma: &SpectralMeasure) -> LStarParams {
    let bdlm = Bdlm::from_spectral(sigma).with_log_moment_alpha(1.0);
    LStarParams { alpha: 1.0, gamma: vec![0.0; sigma.dim()], bdlm }
}
