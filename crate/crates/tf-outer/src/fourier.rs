//! Periodic sampling model shared by the DFT-based operators.
//!
//! Convention: `f̂(ξ) = ∫ f(z) e^{-iξz} dz`, `f(z) = (2π)^{-1} ∫ f̂(ξ) e^{iξz} dξ`.
//! On a period of length `L` the frequencies are `ξ_m = 2πm/L` and the
//! inversion integral becomes `L^{-1} Σ_m`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ZGrid {
    pub z0: f64,
    pub dz: f64,
    pub n: usize,
}

impl ZGrid {
    pub fn new(z0: f64, length: f64, n: usize) -> Result<Self> {
        if n < 2 || !(length > 0.0) || !z0.is_finite() {
            return Err(Error::Argument(format!("z-grid needs n >= 2 and positive length, got n={n}, L={length}")));
        }
        Ok(Self { z0, dz: length / n as f64, n })
    }

    pub fn length(&self) -> f64 {
        self.dz * self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.z0 + j as f64 * self.dz
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Signed frequency index of DFT bin `m`; the Nyquist bin counts as positive.
    pub fn signed_index(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    pub fn freq(&self, m: usize) -> f64 {
        2.0 * PI * self.signed_index(m) as f64 / self.length()
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.freq(m)).collect()
    }

    pub fn freq_step(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// Index of the lattice point nearest to `z` modulo the period.
    pub fn wrap_index(&self, z: f64) -> usize {
        let k = ((z - self.z0) / self.dz).round() as i64;
        k.rem_euclid(self.n as i64) as usize
    }
}

/// Cached forward/inverse transforms for one `ZGrid`.
#[derive(Clone)]
pub struct Spectral {
    pub grid: ZGrid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    phase: Vec<Complex64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: ZGrid) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let phase = (0..grid.n).map(|m| Complex64::from_polar(1.0, -grid.freq(m) * grid.z0)).collect();
        Self { grid, fwd, inv, phase }
    }

    /// Samples of `f̂(ξ_m)` from samples of `f`.
    pub fn forward(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.grid.n);
        let mut buf = f.to_vec();
        self.fwd.process(&mut buf);
        for (b, p) in buf.iter_mut().zip(&self.phase) {
            *b *= p * self.grid.dz;
        }
        buf
    }

    pub fn forward_real(&self, f: &[f64]) -> Vec<Complex64> {
        let c: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&c)
    }

    /// Samples of `f` from samples of `f̂(ξ_m)`.
    pub fn inverse(&self, fh: &[Complex64]) -> Vec<Complex64> {
        let mut buf = Vec::with_capacity(self.grid.n);
        self.inverse_into(fh, &mut buf);
        buf
    }

    pub fn inverse_into(&self, fh: &[Complex64], out: &mut Vec<Complex64>) {
        assert_eq!(fh.len(), self.grid.n);
        let scale = 1.0 / self.grid.length();
        out.clear();
        out.extend(fh.iter().zip(&self.phase).map(|(v, p)| v * p.conj() * scale));
        self.inv.process(out);
    }

    /// Slow inversion at an arbitrary point, used as an oracle.
    pub fn eval_at(&self, fh: &[Complex64], z: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, v) in fh.iter().enumerate() {
            acc += v * Complex64::from_polar(1.0, self.grid.freq(m) * z);
        }
        acc / self.grid.length()
    }
}
