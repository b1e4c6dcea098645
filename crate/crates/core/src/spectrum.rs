//! Wavelength channel plan of the broadband source and the per-channel
//! average pair-generation rates.
//!
//! Channels are indexed `1..=m` from short to long wavelength, so channel 1
//! carries the highest optical frequency. Rates follow a single Gaussian in
//! wavelength, sampled at each channel center.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light expressed in nm·THz, so that `f[THz] = C / λ[nm]`.
pub const SPEED_OF_LIGHT_NM_THZ: f64 = 299_792.458;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelGrid {
    pub channel_count: usize,
    /// Optical width of one channel, nm.
    pub channel_width_nm: f64,
    /// Center-to-center spacing, nm. Includes the guard band.
    pub channel_pitch_nm: f64,
    pub center_wavelength_nm: f64,
}

impl Default for ChannelGrid {
    fn default() -> Self {
        Self {
            channel_count: 200,
            channel_width_nm: 0.1,
            channel_pitch_nm: 0.2,
            center_wavelength_nm: 1550.0,
        }
    }
}

impl ChannelGrid {
    pub fn new(
        channel_count: usize,
        channel_width_nm: f64,
        channel_pitch_nm: f64,
        center_wavelength_nm: f64,
    ) -> Result<Self> {
        let grid = Self {
            channel_count,
            channel_width_nm,
            channel_pitch_nm,
            center_wavelength_nm,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel_count == 0 {
            return Err(Error::InvalidParameter("channel_count must be >= 1".into()));
        }
        if !(self.channel_width_nm > 0.0) {
            return Err(Error::InvalidParameter("channel_width_nm must be > 0".into()));
        }
        if !(self.channel_pitch_nm >= self.channel_width_nm) {
            return Err(Error::InvalidParameter(
                "channel_pitch_nm must be >= channel_width_nm".into(),
            ));
        }
        if !(self.center_wavelength_nm > 0.0) {
            return Err(Error::InvalidParameter(
                "center_wavelength_nm must be > 0".into(),
            ));
        }
        Ok(())
    }

    fn check_index(&self, x: usize) -> Result<()> {
        if x == 0 || x > self.channel_count {
            return Err(Error::ChannelIndex {
                index: x,
                count: self.channel_count,
            });
        }
        Ok(())
    }

    /// Offset of channel `x` from the grid center, nm. Exact zero for the
    /// middle channel of an odd grid.
    fn offset_nm(&self, x: usize) -> f64 {
        // (2x - m - 1) / 2 keeps the offset exactly antisymmetric in x.
        let twice = 2.0 * x as f64 - self.channel_count as f64 - 1.0;
        0.5 * twice * self.channel_pitch_nm
    }

    pub fn center_wavelength(&self, x: usize) -> Result<f64> {
        self.check_index(x)?;
        Ok(self.center_wavelength_nm + self.offset_nm(x))
    }

    /// Center frequency of channel `x`, THz.
    pub fn center_frequency(&self, x: usize) -> Result<f64> {
        Ok(SPEED_OF_LIGHT_NM_THZ / self.center_wavelength(x)?)
    }

    /// Optical bandwidth of channel `x`, GHz (`c·Δλ/λ²`).
    pub fn bandwidth(&self, x: usize) -> Result<f64> {
        let lambda = self.center_wavelength(x)?;
        Ok(SPEED_OF_LIGHT_NM_THZ * self.channel_width_nm / (lambda * lambda) * 1e3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumProfile {
    pub fwhm_nm: f64,
    /// Rate at the Gaussian peak, pairs/s (arbitrary units).
    pub peak_rate: f64,
}

impl Default for SpectrumProfile {
    fn default() -> Self {
        Self {
            fwhm_nm: 9.0,
            peak_rate: 1.0,
        }
    }
}

impl SpectrumProfile {
    pub fn new(fwhm_nm: f64, peak_rate: f64) -> Result<Self> {
        let profile = Self { fwhm_nm, peak_rate };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_nm > 0.0) {
            return Err(Error::InvalidParameter("fwhm_nm must be > 0".into()));
        }
        if !(self.peak_rate > 0.0) {
            return Err(Error::InvalidParameter("peak_rate must be > 0".into()));
        }
        Ok(())
    }

    /// Rate at a signed offset from the peak wavelength.
    pub fn rate_at_offset(&self, offset_nm: f64) -> f64 {
        let r = offset_nm / self.fwhm_nm;
        self.peak_rate * (-4.0 * std::f64::consts::LN_2 * r * r).exp()
    }
}

/// Average pair-generation rate per channel, index 0 holding channel 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some((i, r)) = rates.iter().enumerate().find(|(_, r)| !(**r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rate of channel {} is {r}; rates must be finite and >= 0",
                i + 1
            )));
        }
        Ok(Self(rates))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Channel positions (0-based) sorted by descending rate, ties to the
    /// lower index.
    pub fn descending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.0.len()).collect();
        order.sort_by(|&a, &b| self.0[b].total_cmp(&self.0[a]).then(a.cmp(&b)));
        order
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|r| r * factor).collect())
    }
}

impl std::ops::Index<usize> for RateVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn generation_rates(grid: &ChannelGrid, profile: &SpectrumProfile) -> RateVector {
    RateVector(
        (1..=grid.channel_count)
            .map(|x| profile.rate_at_offset(grid.offset_nm(x)))
            .collect(),
    )
}
