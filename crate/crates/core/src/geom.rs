//! Planar geometry and radio reception models.
//!
//! Positions are meters in a flat 2-D plane. The free-space model with a
//! system loss factor is the link metric used for forwarder ranking; the
//! two-ray ground model is available for callers that want the propagation
//! model of the reference scenario.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in m/s, used for propagation delay.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadioError {
    #[error("distance must be strictly positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("invalid radio parameter `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// A point in the simulation plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2D) -> f64 {
        euclid_distance(self, other)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.3}, {:.3})", self.x, self.y)
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Which reception-power law to evaluate for a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerModel {
    #[default]
    Friis,
    TwoRay,
}

/// Transmitter/receiver parameters shared by every node.
///
/// Gains and loss are linear (dimensionless) factors, not decibels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub tx_power_watts: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub wavelength_m: f64,
    pub system_loss: f64,
    pub range_m: f64,
    pub antenna_height_m: f64,
}

impl Default for RadioParams {
    /// 0.28 W, unit gains, no system loss, 914 MHz carrier, 225 m range,
    /// 1.5 m antennas.
    fn default() -> Self {
        Self {
            tx_power_watts: 0.28,
            tx_gain: 1.0,
            rx_gain: 1.0,
            wavelength_m: 0.328,
            system_loss: 1.0,
            range_m: 225.0,
            antenna_height_m: 1.5,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), RadioError> {
        let checks = [
            ("tx_power_watts", self.tx_power_watts),
            ("tx_gain", self.tx_gain),
            ("rx_gain", self.rx_gain),
            ("wavelength_m", self.wavelength_m),
            ("range_m", self.range_m),
            ("antenna_height_m", self.antenna_height_m),
        ];
        for (name, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(RadioError::InvalidParameter { name, value });
            }
        }
        if !(self.system_loss.is_finite() && self.system_loss >= 1.0) {
            return Err(RadioError::InvalidParameter {
                name: "system_loss",
                value: self.system_loss,
            });
        }
        Ok(())
    }

    /// Distance beyond which the two-ray ground model applies.
    pub fn crossover_distance(&self) -> f64 {
        4.0 * PI * self.antenna_height_m * self.antenna_height_m / self.wavelength_m
    }

    pub fn received_power(&self, model: PowerModel, d: f64) -> Result<f64, RadioError> {
        match model {
            PowerModel::Friis => friis_power(self, d),
            PowerModel::TwoRay => two_ray_power(self, d),
        }
    }
}

pub fn euclid_distance(a: Point2D, b: Point2D) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Free-space received power with system loss: `Pt·Gt·Gr·λ² / ((4πd)²·L)`.
pub fn friis_power(rp: &RadioParams, d: f64) -> Result<f64, RadioError> {
    if d.is_nan() || d <= 0.0 {
        return Err(RadioError::NonPositiveDistance(d));
    }
    let lambda = rp.wavelength_m;
    let denom = (4.0 * PI * d).powi(2) * rp.system_loss;
    Ok(rp.tx_power_watts * rp.tx_gain * rp.rx_gain * lambda * lambda / denom)
}

/// Two-ray ground received power, `Pt·Gt·Gr·ht²·hr²/(d⁴·L)`, falling back to
/// the free-space law below the crossover distance.
pub fn two_ray_power(rp: &RadioParams, d: f64) -> Result<f64, RadioError> {
    if d.is_nan() || d <= 0.0 {
        return Err(RadioError::NonPositiveDistance(d));
    }
    if d < rp.crossover_distance() {
        return friis_power(rp, d);
    }
    let h2 = rp.antenna_height_m * rp.antenna_height_m;
    Ok(rp.tx_power_watts * rp.tx_gain * rp.rx_gain * h2 * h2 / (d.powi(4) * rp.system_loss))
}

/// Unit-disk reachability. The boundary `d == range` is inside.
pub fn in_range(a: Point2D, b: Point2D, range: f64) -> bool {
    euclid_distance(a, b) <= range
}

/// True when `candidate` is strictly closer to `dest` than `current` is.
pub fn positive_progress(candidate: Point2D, current: Point2D, dest: Point2D) -> bool {
    euclid_distance(candidate, dest) < euclid_distance(current, dest)
}
