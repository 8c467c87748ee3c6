//! Gaussian signal and control envelopes.

use std::f64::consts::PI;

use serde::Serialize;

/// Gaussian pulse whose intensity falls to 1/e of its peak at
/// `center ± width` and whose amplitude has unit L² norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseShape {
    pub center: f64,
    pub width: f64,
    norm: f64,
    inv_two_width_sq: f64,
}

pub fn gaussian_pulse(width: f64, center: f64) -> PulseShape {
    assert!(width > 0.0, "pulse width must be positive");
    PulseShape {
        center,
        width,
        norm: (1.0 / (PI * width * width)).powf(0.25),
        inv_two_width_sq: 0.5 / (width * width),
    }
}

impl PulseShape {
    /// Peak-normalized envelope exp(-(t - t0)² / (2τ²)).
    #[inline]
    pub fn envelope(&self, t: f64) -> f64 {
        let x = t - self.center;
        (-x * x * self.inv_two_width_sq).exp()
    }

    /// Unit-norm amplitude, s^(-1/2).
    #[inline]
    pub fn amplitude(&self, t: f64) -> f64 {
        self.norm * self.envelope(t)
    }

    #[inline]
    pub(crate) fn amplitude_from_envelope(&self, envelope: f64) -> f64 {
        self.norm * envelope
    }

    pub fn intensity(&self, t: f64) -> f64 {
        self.amplitude(t).powi(2)
    }

    /// Full width in Hz at which the spectral intensity of the envelope
    /// drops to 1/e of its peak, from a direct discrete Fourier transform
    /// over `center ± span·width` with `samples` points.
    pub fn numerical_bandwidth(&self, span: f64, samples: usize) -> f64 {
        let samples = samples.max(16);
        let t0 = self.center - span * self.width;
        let h = 2.0 * span * self.width / (samples - 1) as f64;
        let values: Vec<(f64, f64)> = (0..samples)
            .map(|i| {
                let t = t0 + i as f64 * h;
                (t - self.center, self.amplitude(t))
            })
            .collect();
        let spectrum = |f: f64| {
            let w = 2.0 * PI * f;
            let (mut re, mut im) = (0.0, 0.0);
            for &(x, a) in &values {
                let (s, c) = (w * x).sin_cos();
                re += a * c;
                im -= a * s;
            }
            (re * re + im * im) * h * h
        };
        let target = spectrum(0.0) / std::f64::consts::E;
        let mut hi = 1.0 / self.width;
        while spectrum(hi) > target {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if spectrum(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        2.0 * 0.5 * (lo + hi)
    }
}
