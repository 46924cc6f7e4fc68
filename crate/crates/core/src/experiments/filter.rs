//! Second-order Butterworth high-pass, applied forward and backward for zero
//! phase with odd-reflection padding at both ends.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Biquad coefficients, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

/// Order-2 high-pass via the bilinear transform with frequency prewarping.
pub fn butter2_highpass(cutoff: f64, fs: f64) -> Result<Biquad> {
    if !(cutoff > 0.0 && cutoff < fs / 2.0) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff} Hz must lie strictly between 0 and Nyquist ({} Hz)",
            fs / 2.0
        )));
    }
    let k = (PI * cutoff / fs).tan();
    let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
    Ok(Biquad {
        b: [norm, -2.0 * norm, norm],
        a: [1.0, 2.0 * (k * k - 1.0) * norm, (1.0 - SQRT_2 * k + k * k) * norm],
    })
}

impl Biquad {
    /// Transposed direct form II from state `z`.
    pub fn run(&self, x: &[f64], mut z: [f64; 2]) -> Vec<f64> {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        x.iter()
            .map(|&xi| {
                let y = b0 * xi + z[0];
                z[0] = b1 * xi - a1 * y + z[1];
                z[1] = b2 * xi - a2 * y;
                y
            })
            .collect()
    }

    /// Steady-state initial condition for a unit step input.
    pub fn step_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        // (I - Cᵀ) z = b[1..] - a[1..] b0 with C the companion matrix of a
        let r0 = b1 - a1 * b0;
        let r1 = b2 - a2 * b0;
        let det = (1.0 + a1) + a2;
        let z0 = (r0 + r1) / det;
        let z1 = r1 - a2 * z0;
        [z0, z1]
    }

    /// Zero-phase filtering; pads each end with `3 * 3` odd-reflected samples.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        const PAD: usize = 9;
        let n = x.len();
        if n <= PAD {
            return Err(Error::InsufficientData(format!(
                "zero-phase filtering needs more than {PAD} samples, got {n}"
            )));
        }
        let mut ext = Vec::with_capacity(n + 2 * PAD);
        ext.extend((1..=PAD).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=PAD).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        let zi = self.step_state();
        let scaled = |s: f64| [zi[0] * s, zi[1] * s];
        let mut y = self.run(&ext, scaled(ext[0]));
        y.reverse();
        let mut y = self.run(&y, scaled(y[0]));
        y.reverse();
        Ok(y[PAD..PAD + n].to_vec())
    }
}
