use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpectralError;

/// Vertical basis family of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    /// `cos(mπx₃)`, `0 ≤ m < n_v`.
    Even,
    /// `sin(mπx₃)`, `1 ≤ m ≤ n_v`.
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Parity::Even),
            1 => Some(Parity::Odd),
            _ => None,
        }
    }
}

/// Resolution and geometry of the slab.
///
/// Spectral storage uses `n_v + 1` vertical slots indexed by `m` for both
/// families; slot `n_v` of the cosine family and slot `0` of the sine family
/// are identically zero. The horizontal Nyquist row/column and the sine mode
/// `m = n_v` are resolvable on the grid but are excluded from admissible
/// fields: every dealiasing pass zeroes them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabGrid {
    pub n_h: usize,
    pub n_v: usize,
    pub l_h: f64,
    pub dealias_fraction: f64,
}

impl SlabGrid {
    pub fn new(n_h: usize, n_v: usize, l_h: f64, dealias_fraction: f64) -> Result<Self, SpectralError> {
        if !n_h.is_power_of_two() || n_h < 8 {
            return Err(SpectralError::InvalidGrid(format!("n_h = {n_h} must be a power of two ≥ 8")));
        }
        if !n_v.is_power_of_two() || n_v < 4 {
            return Err(SpectralError::InvalidGrid(format!("n_v = {n_v} must be a power of two ≥ 4")));
        }
        if !(l_h > 0.0 && l_h.is_finite()) {
            return Err(SpectralError::InvalidGrid(format!("l_h = {l_h} must be positive")));
        }
        if !(dealias_fraction > 0.5 && dealias_fraction <= 1.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "dealias_fraction = {dealias_fraction} must lie in (1/2, 1]"
            )));
        }
        Ok(Self { n_h, n_v, l_h, dealias_fraction })
    }

    /// Unit period scale with the 2/3 rule.
    pub fn with_resolution(n_h: usize, n_v: usize) -> Result<Self, SpectralError> {
        Self::new(n_h, n_v, 1.0, 2.0 / 3.0)
    }

    pub fn plane_len(&self) -> usize {
        self.n_h * self.n_h
    }

    pub fn slots(&self) -> usize {
        self.n_v + 1
    }

    pub fn spectral_len(&self) -> usize {
        self.slots() * self.plane_len()
    }

    pub fn physical_len(&self) -> usize {
        self.n_v * self.plane_len()
    }

    #[inline]
    pub fn spectral_index(&self, m: usize, i1: usize, i2: usize) -> usize {
        (m * self.n_h + i1) * self.n_h + i2
    }

    #[inline]
    pub fn physical_index(&self, j3: usize, p1: usize, p2: usize) -> usize {
        (j3 * self.n_h + p1) * self.n_h + p2
    }

    /// Signed integer wavenumber of FFT slot `i`.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        if i <= self.n_h / 2 {
            i as i64
        } else {
            i as i64 - self.n_h as i64
        }
    }

    /// FFT slot of signed wavenumber `j`.
    #[inline]
    pub fn slot(&self, j: i64) -> usize {
        j.rem_euclid(self.n_h as i64) as usize
    }

    /// Horizontal wavenumber `j / L` of slot `i`.
    #[inline]
    pub fn xi(&self, i: usize) -> f64 {
        self.signed(i) as f64 / self.l_h
    }

    /// Vertical wavenumber `mπ`.
    #[inline]
    pub fn k(&self, m: usize) -> f64 {
        m as f64 * PI
    }

    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n_h / 2
    }

    pub fn x_h(&self, p: usize) -> f64 {
        2.0 * PI * self.l_h * p as f64 / self.n_h as f64
    }

    pub fn x_v(&self, j: usize) -> f64 {
        (j as f64 + 0.5) / self.n_v as f64
    }

    pub fn side(&self) -> f64 {
        2.0 * PI * self.l_h
    }

    /// Volume of `Ω_L`.
    pub fn volume(&self) -> f64 {
        self.side() * self.side()
    }

    /// Smallest grid spacing, used by the advective CFL condition.
    pub fn min_spacing(&self) -> f64 {
        (self.side() / self.n_h as f64).min(1.0 / self.n_v as f64)
    }

    /// Largest retained horizontal index `|j|`.
    pub fn keep_h(&self) -> i64 {
        let k = (self.dealias_fraction * (self.n_h / 2) as f64 + 1e-9).floor() as i64;
        k.min(self.n_h as i64 / 2 - 1)
    }

    /// Largest retained vertical index `m`.
    pub fn keep_v(&self) -> usize {
        let k = (self.dealias_fraction * self.n_v as f64 + 1e-9).floor() as usize;
        k.min(self.n_v - 1)
    }

    /// Whether mode `(i1, i2, m)` survives dealiasing.
    #[inline]
    pub fn retained(&self, i1: usize, i2: usize, m: usize) -> bool {
        let kh = self.keep_h();
        self.signed(i1).abs() <= kh && self.signed(i2).abs() <= kh && m <= self.keep_v()
    }

    /// Same resolution with a different dealiasing fraction.
    pub fn with_dealias(&self, fraction: f64) -> Result<Self, SpectralError> {
        Self::new(self.n_h, self.n_v, self.l_h, fraction)
    }

    pub fn check_same(&self, other: &SlabGrid) -> Result<(), SpectralError> {
        if self == other {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_resolutions() {
        assert!(SlabGrid::with_resolution(12, 8).is_err());
        assert!(SlabGrid::with_resolution(4, 8).is_err());
        assert!(SlabGrid::with_resolution(16, 2).is_err());
        assert!(SlabGrid::new(16, 4, 1.0, 0.5).is_err());
        assert!(SlabGrid::new(16, 4, -1.0, 0.7).is_err());
        assert!(SlabGrid::new(16, 4, 1.0, 1.0).is_ok());
    }

    #[test]
    fn two_thirds_rule_cutoffs() {
        let g = SlabGrid::with_resolution(64, 8).unwrap();
        assert_eq!(g.keep_h(), 21);
        assert_eq!(g.keep_v(), 5);
        let full = g.with_dealias(1.0).unwrap();
        assert_eq!(full.keep_h(), 31);
        assert_eq!(full.keep_v(), 7);
    }

    #[test]
    fn signed_slots_roundtrip() {
        let g = SlabGrid::with_resolution(16, 4).unwrap();
        for i in 0..16 {
            assert_eq!(g.slot(g.signed(i)), i);
        }
        assert_eq!(g.signed(15), -1);
        assert_eq!(g.signed(8), 8);
    }
}
