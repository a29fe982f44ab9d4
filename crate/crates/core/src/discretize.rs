//! Finite-support approximation of a bivariate spectral measure.
//!
//! Given cut points `0 = d_0 < d_1 < ... < d_k = 2pi` and representatives
//! `d_{i-1} <= phi_i < d_i`, the measure `sigma'` on angles is replaced by
//! `sigma_k' = sum_i a_i delta_{phi_i}` with `a_i = sigma'([d_{i-1}, d_i))`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::measures::{Atom, SpectralMeasure};
use crate::{Error, Result};

/// Absolute tolerance of the total mass of the discretized measure.
pub const CELL_MASS_TOL: f64 = 1e-10;

/// Where inside each cell the atom is placed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representative {
    /// `phi_i = d_{i-1}`.
    #[default]
    Left,
    /// `phi_i = (d_{i-1} + d_i) / 2`.
    Midpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationGrid {
    cuts: Vec<f64>,
    angles: Vec<f64>,
}

impl DiscretizationGrid {
    pub fn new(cuts: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if cuts.len() < 2 || angles.len() + 1 != cuts.len() {
            return Err(Error::Validation(format!(
                "need k + 1 cut points for k representatives, got {} and {}",
                cuts.len(),
                angles.len()
            )));
        }
        if cuts[0] != 0.0 || cuts[cuts.len() - 1] != TAU {
            return Err(Error::Validation("cut points must start at 0 and end at 2pi".into()));
        }
        if cuts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Validation("cut points must be strictly increasing".into()));
        }
        for (i, &phi) in angles.iter().enumerate() {
            if !(cuts[i] <= phi && phi < cuts[i + 1]) {
                return Err(Error::Validation(format!(
                    "representative {phi} is not inside cell [{}, {})",
                    cuts[i],
                    cuts[i + 1]
                )));
            }
        }
        Ok(Self { cuts, angles })
    }

    /// Evenly spaced cells `d_i = 2 pi i / k`.
    pub fn evenly_spaced(k: usize, rep: Representative) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("grid needs k >= 1 cells".into()));
        }
        let cuts: Vec<f64> = (0..=k)
            .map(|i| if i == k { TAU } else { TAU * i as f64 / k as f64 })
            .collect();
        let angles = cuts
            .windows(2)
            .map(|w| match rep {
                Representative::Left => w[0],
                Representative::Midpoint => 0.5 * (w[0] + w[1]),
            })
            .collect();
        Self::new(cuts, angles)
    }

    pub fn k(&self) -> usize {
        self.angles.len()
    }

    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.cuts.windows(2).zip(&self.angles).map(|(w, &phi)| (w[0], w[1], phi))
    }
}

/// `d_i = 2 pi i / k`, `phi_i = d_{i-1}`.
pub fn default_grid(k: usize) -> Result<DiscretizationGrid> {
    DiscretizationGrid::evenly_spaced(k, Representative::Left)
}

/// Replace an angular-density measure by `sum_i a_i delta_{(cos phi_i, sin phi_i)}`.
///
/// Cells of zero mass are dropped.
pub fn discretize_angular(sigma: &SpectralMeasure, grid: &DiscretizationGrid) -> Result<SpectralMeasure> {
    let law = sigma.angular_law().ok_or_else(|| {
        Error::Unsupported(format!("discretization needs an angular density, got {:?}", sigma.variant()))
    })?;
    let theta = sigma.mass();
    let cell_tol = CELL_MASS_TOL / (grid.k() as f64 * theta.max(1.0));
    let mut atoms = Vec::with_capacity(grid.k());
    for (lo, hi, phi) in grid.cells() {
        let a = theta * law.integrate(&|_| 1.0, lo, hi, cell_tol)?;
        if a > 0.0 {
            atoms.push(Atom::from_angle(phi, a));
        }
    }
    if atoms.is_empty() {
        return Err(Error::Validation("discretization produced no atoms of positive mass".into()));
    }
    SpectralMeasure::finite(2, atoms)
}
