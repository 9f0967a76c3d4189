//! Slab transforms: 2D FFT per horizontal level, direct cosine/sine
//! synthesis and analysis along `x₃` on the midpoint grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Parity, SlabGrid};
use crate::exec;

pub(crate) struct SlabTransform {
    n_h: usize,
    n_v: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // [j * slots + m]
    cos_synth: Vec<f64>,
    sin_synth: Vec<f64>,
    // [m * n_v + j], includes the discrete orthogonality weights
    cos_analysis: Vec<f64>,
    sin_analysis: Vec<f64>,
}

type Key = (usize, usize);

fn cache() -> &'static Mutex<HashMap<Key, Arc<SlabTransform>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<SlabTransform>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared transform for the grid resolution (plans are reused across calls).
pub(crate) fn for_grid(grid: &SlabGrid) -> Arc<SlabTransform> {
    let key = (grid.n_h, grid.n_v);
    let mut map = cache().lock().expect("transform cache poisoned");
    map.entry(key).or_insert_with(|| Arc::new(SlabTransform::new(grid.n_h, grid.n_v))).clone()
}

impl SlabTransform {
    fn new(n_h: usize, n_v: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_h);
        let inverse = planner.plan_fft_inverse(n_h);
        let slots = n_v + 1;
        let mut cos_synth = vec![0.0; n_v * slots];
        let mut sin_synth = vec![0.0; n_v * slots];
        let mut cos_analysis = vec![0.0; slots * n_v];
        let mut sin_analysis = vec![0.0; slots * n_v];
        for j in 0..n_v {
            let x = (j as f64 + 0.5) / n_v as f64;
            for m in 0..slots {
                let (s, c) = (m as f64 * PI * x).sin_cos();
                if m < n_v {
                    cos_synth[j * slots + m] = c;
                    let w = if m == 0 { 1.0 } else { 2.0 };
                    cos_analysis[m * n_v + j] = w * c / n_v as f64;
                }
                if m >= 1 {
                    sin_synth[j * slots + m] = s;
                    let w = if m == n_v { 1.0 } else { 2.0 };
                    sin_analysis[m * n_v + j] = w * s / n_v as f64;
                }
            }
        }
        Self { n_h, n_v, forward, inverse, cos_synth, sin_synth, cos_analysis, sin_analysis }
    }

    fn fft2(&self, plane: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n_h;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(plane, &mut scratch);
        transpose(plane, n);
        fft.process_with_scratch(plane, &mut scratch);
        transpose(plane, n);
    }

    /// Spectral coefficients (`(n_v + 1)` slots) to real grid values.
    pub(crate) fn synthesize(&self, coeffs: &[Complex64], parity: Parity) -> Vec<f64> {
        let plane = self.n_h * self.n_h;
        let slots = self.n_v + 1;
        let synth = match parity {
            Parity::Even => &self.cos_synth,
            Parity::Odd => &self.sin_synth,
        };
        let mut levels = vec![Complex64::new(0.0, 0.0); self.n_v * plane];
        exec::for_each_chunk_mut(&mut levels, plane, |j, out| {
            for m in 0..slots {
                let w = synth[j * slots + m];
                if w == 0.0 {
                    continue;
                }
                let src = &coeffs[m * plane..(m + 1) * plane];
                for (o, c) in out.iter_mut().zip(src) {
                    *o += c * w;
                }
            }
            self.fft2(out, &self.inverse);
        });
        levels.into_iter().map(|z| z.re).collect()
    }

    /// Real grid values to spectral coefficients.
    pub(crate) fn analyze(&self, values: &[f64], parity: Parity) -> Vec<Complex64> {
        let plane = self.n_h * self.n_h;
        let slots = self.n_v + 1;
        let scale = 1.0 / plane as f64;
        let mut levels: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        exec::for_each_chunk_mut(&mut levels, plane, |_, lvl| self.fft2(lvl, &self.forward));
        let analysis = match parity {
            Parity::Even => &self.cos_analysis,
            Parity::Odd => &self.sin_analysis,
        };
        let mut coeffs = vec![Complex64::new(0.0, 0.0); slots * plane];
        exec::for_each_chunk_mut(&mut coeffs, plane, |m, out| {
            for j in 0..self.n_v {
                let w = analysis[m * self.n_v + j];
                if w == 0.0 {
                    continue;
                }
                let src = &levels[j * plane..(j + 1) * plane];
                for (o, c) in out.iter_mut().zip(src) {
                    *o += c * w;
                }
            }
        });
        coeffs
    }
}

fn transpose(a: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            a.swap(i * n + j, j * n + i);
        }
    }
}

/// 2D periodic FFT helpers shared with the horizontal-only limit models.
pub(crate) struct PlaneFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

pub(crate) fn plane_fft(n: usize) -> Arc<PlaneFft> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PlaneFft>>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().expect("plane cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(PlaneFft {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl PlaneFft {
    fn run(&self, plane: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // rows in parallel chunks, then columns via transpose
        exec::for_each_chunk_mut(plane, n, |_, row| {
            let mut s = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(row, &mut s);
        });
        transpose(plane, n);
        fft.process_with_scratch(plane, &mut scratch);
        transpose(plane, n);
    }

    pub(crate) fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.run(&mut buf, &self.inverse);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub(crate) fn analyze(&self, values: &[f64]) -> Vec<Complex64> {
        let scale = 1.0 / (self.n * self.n) as f64;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        self.run(&mut buf, &self.forward);
        buf
    }
}
