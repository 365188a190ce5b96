//! Sliding Z transform.
//!
//! For a window of `win` samples starting at `n`, the transform evaluated at
//! a real point `z` is
//!
//! ```text
//! S(z, n) = Σ_{m=0}^{win-1} s(n+m) z^{-m}
//! ```
//!
//! Sliding the window by one sample gives the comb identity
//!
//! ```text
//! S(z, n) − z^{-1} S(z, n+1) = s(n) − s(n+win) z^{-win}
//! ```
//!
//! whose right-hand side is the per-sample signal [`comb_forward`] produces.
//! [`comb_inverse`] runs the recursion `s(n+win) = (s(n) − S'(n)) z^{win}`
//! backwards to a time-domain signal. With `0 < z < 1` the recursion is
//! contractive, so an unknown initial window decays by `z^{win}` every `win`
//! samples.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::signal::Signal;

/// Largest admissible `−win·ln z`, keeping `z^{-win}` well inside `f64` range.
pub const MAX_LOG_GAIN: f64 = 690.0;
/// Upper end of the range [`sample_z`] draws from.
pub const Z_MAX: f64 = 0.999;
/// `z^{-win}` budget used by [`sample_z`] (`e^45 ≈ 3.5e19`).
pub const SAMPLED_LOG_GAIN: f64 = 45.0;

/// Window length, transform point and step of a sliding Z transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SztParams {
    win: usize,
    z: f64,
    step: usize,
}

impl SztParams {
    /// Validated parameters; `win` must be a power of two.
    pub fn new(win: usize, z: f64) -> Result<Self> {
        if !win.is_power_of_two() {
            return Err(Error::invalid(format!(
                "window length {win} is not a power of two"
            )));
        }
        SztParams::with_any_window(win, z)
    }

    /// Like [`SztParams::new`] but accepts any window length ≥ 1.
    pub fn with_any_window(win: usize, z: f64) -> Result<Self> {
        let p = SztParams { win, z, step: 1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.win == 0 {
            return Err(Error::invalid("window length must be at least 1"));
        }
        if !(self.z > 0.0 && self.z < 1.0) {
            return Err(Error::invalid(format!(
                "transform point z = {} outside (0, 1)",
                self.z
            )));
        }
        let gain = -(self.win as f64) * self.z.ln();
        if gain >= MAX_LOG_GAIN {
            return Err(Error::invalid(format!(
                "z^-win overflows for z = {}, win = {} (log gain {gain:.1})",
                self.z, self.win
            )));
        }
        if self.step != 1 {
            return Err(Error::invalid(format!(
                "only single-step sliding is supported, got step {}",
                self.step
            )));
        }
        Ok(())
    }

    pub fn win(&self) -> usize {
        self.win
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// `z^{-win}`, the comb gain.
    pub fn comb_gain(&self) -> f64 {
        (-(self.win as f64) * self.z.ln()).exp()
    }

    /// `z^{win}`, the per-block decay of the inverse recursion.
    pub fn decay(&self) -> f64 {
        self.z.powf(self.win as f64)
    }
}

/// Lower end of the range [`sample_z`] draws from for a window length.
pub fn z_min(win: usize) -> f64 {
    0.5f64.max((-SAMPLED_LOG_GAIN / win.max(1) as f64).exp())
}

/// Draws `z` uniformly from `(z_min(win), 0.999)`.
///
/// The lower bound keeps `z^{-win} ≤ e^45`, so the comb signal stays far from
/// overflow even for long windows.
pub fn sample_z(win: usize, seed: Seed) -> f64 {
    let lo = z_min(win);
    let mut rng = seed.rng();
    loop {
        let z = rng.gen_range(lo..Z_MAX);
        if z > lo {
            return z;
        }
    }
}

/// Direct evaluation of `S(z, n)` by Horner's scheme in `z^{-1}`.
pub fn windowed_z(s: &[f64], p: &SztParams, n: usize) -> Result<f64> {
    let win = p.win();
    if s.len() < win || n > s.len() - win {
        return Err(Error::invalid(format!(
            "window start {n} outside 0..={} for {} samples and window {win}",
            s.len().saturating_sub(win),
            s.len()
        )));
    }
    let inv = 1.0 / p.z();
    Ok(s[n..n + win]
        .iter()
        .rev()
        .fold(0.0, |acc, &v| acc * inv + v))
}

/// Comb signal `S'(n) = s(n) − s(n+win)·z^{-win}` for `n = 0 .. N−win−1`.
pub fn comb_forward(s: &Signal, p: &SztParams) -> Result<Signal> {
    let win = p.win();
    if s.len() <= win {
        return Err(Error::invalid(format!(
            "comb transform needs more than {win} samples, got {}",
            s.len()
        )));
    }
    let gain = p.comb_gain();
    let x = s.samples();
    Signal::new(x.iter().zip(&x[win..]).map(|(a, b)| a - b * gain).collect())
}

/// Inverse recursion `ŝ(n+win) = (ŝ(n) − S'(n))·z^{win}` seeded with `init`
/// as the first `win` output samples. Output length is `len(S') + win`.
pub fn comb_inverse(sprime: &Signal, p: &SztParams, init: &[f64]) -> Result<Signal> {
    let win = p.win();
    if init.len() != win {
        return Err(Error::dims(format!(
            "initial window has {} values, expected {win}",
            init.len()
        )));
    }
    if sprime.is_empty() {
        return Err(Error::invalid("comb signal is empty"));
    }
    let decay = p.decay();
    let m = sprime.len();
    let mut out = Vec::with_capacity(m + win);
    out.extend_from_slice(init);
    for (n, &c) in sprime.samples().iter().enumerate() {
        let v = (out[n] - c) * decay;
        out.push(v);
    }
    Signal::new(out)
}

/// Zero-initialised [`comb_inverse`].
pub fn comb_inverse_zero(sprime: &Signal, p: &SztParams) -> Result<Signal> {
    comb_inverse(sprime, p, &vec![0.0; p.win()])
}

/// Smallest multiple of `win` after which the zero-init transient has decayed
/// to `tol` relative, capped at `n_total / 4`.
pub fn burn_in_length(p: &SztParams, tol: f64, n_total: usize) -> Result<usize> {
    if !(tol > 0.0 && tol <= 1.0) {
        return Err(Error::invalid(format!("tolerance {tol} outside (0, 1]")));
    }
    let cap = n_total / 4;
    let decay = p.decay();
    let mut blocks = if tol >= 1.0 {
        0.0
    } else {
        (tol.ln() / decay.ln()).ceil().max(0.0)
    };
    // fix up rounding in the logarithm ratio
    while blocks > 0.0 && decay.powf(blocks - 1.0) <= tol {
        blocks -= 1.0;
    }
    while decay.powf(blocks) > tol {
        blocks += 1.0;
    }
    let b = blocks * p.win() as f64;
    Ok(if b >= cap as f64 { cap } else { b as usize })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(v: &[f64]) -> Signal {
        Signal::new(v.to_vec()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SztParams::new(8, 0.5).is_ok());
        assert!(SztParams::new(1, 0.9).is_ok());
        assert!(SztParams::new(6, 0.5).is_err());
        assert!(SztParams::with_any_window(6, 0.5).is_ok());
        assert!(SztParams::new(0, 0.5).is_err());
        assert!(SztParams::new(8, 0.0).is_err());
        assert!(SztParams::new(8, 1.0).is_err());
        assert!(SztParams::new(8, f64::NAN).is_err());
        // 512·ln(2) ≈ 355 is fine, 1024·ln(2) ≈ 710 overflows the budget
        assert!(SztParams::new(512, 0.5).is_ok());
        assert!(SztParams::new(1024, 0.5).is_err());
        let mut p = SztParams::new(4, 0.5).unwrap();
        p.step = 2;
        assert!(p.validate().is_err());
    }

    #[test]
    fn sample_z_ranges() {
        assert_eq!(z_min(8), 0.5);
        assert!((z_min(512) - (-45.0f64 / 512.0).exp()).abs() < 1e-15);
        assert!((z_min(512) - 0.9159).abs() < 1e-3);
        for seed in 0..200 {
            for win in [1, 8, 64, 512, 4096] {
                let z = sample_z(win, Seed(seed));
                assert!(z > z_min(win) && z < Z_MAX);
                let p = SztParams::new(win, z).unwrap();
                assert!(p.comb_gain() <= 45f64.exp() * (1.0 + 1e-12));
            }
        }
        assert_eq!(sample_z(64, Seed(3)), sample_z(64, Seed(3)));
    }

    #[test]
    fn windowed_z_hand_example() {
        let p = SztParams::new(4, 0.5).unwrap();
        assert_eq!(windowed_z(&[1.0, 2.0, 3.0, 4.0], &p, 0).unwrap(), 49.0);
        assert!(windowed_z(&[1.0, 2.0, 3.0, 4.0], &p, 1).is_err());
        assert_eq!(windowed_z(&[0.0; 10], &p, 6).unwrap(), 0.0);
        let p1 = SztParams::new(1, 0.7).unwrap();
        assert_eq!(windowed_z(&[3.0, -2.0], &p1, 1).unwrap(), -2.0);
    }

    #[test]
    fn comb_forward_examples() {
        let p = SztParams::new(2, 0.5).unwrap();
        let c = comb_forward(&sig(&[1.0; 6]), &p).unwrap();
        assert_eq!(c.samples(), &[-3.0; 4]);
        let c = comb_forward(&sig(&[1.0, 0.0, 0.0, 0.0, 0.0]), &p).unwrap();
        assert_eq!(c.samples(), &[1.0, 0.0, 0.0]);
        assert!(comb_forward(&sig(&[1.0, 2.0]), &p).is_err());
    }

    #[test]
    fn comb_inverse_hand_recursion() {
        let p = SztParams::new(2, 0.5).unwrap();
        let s = comb_inverse(&sig(&[1.0, 0.0, 0.0]), &p, &[0.0, 0.0]).unwrap();
        assert_eq!(s.samples(), &[0.0, 0.0, -0.25, 0.0, -0.0625]);
        assert!(comb_inverse(&sig(&[1.0]), &p, &[0.0]).is_err());
        assert!(comb_inverse(&Signal::default(), &p, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn round_trip_with_true_init() {
        let p = SztParams::new(4, 0.8).unwrap();
        let s: Vec<f64> = (0..40).map(|k| ((k * 7 % 11) as f64 - 5.0) * 0.3).collect();
        let c = comb_forward(&sig(&s), &p).unwrap();
        let back = comb_inverse(&c, &p, &s[..4]).unwrap();
        for (a, b) in s.iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1e-12 * 1.5);
        }
    }

    #[test]
    fn burn_in_examples() {
        let p = SztParams::new(2, 0.5).unwrap();
        assert_eq!(burn_in_length(&p, 1e-6, 10_000).unwrap(), 20);
        assert_eq!(burn_in_length(&p, 1.0, 10_000).unwrap(), 0);
        let slow = SztParams::new(2, 0.99).unwrap();
        assert_eq!(burn_in_length(&slow, 1e-6, 40).unwrap(), 10);
        assert!(burn_in_length(&p, 0.0, 100).is_err());
        // exact power: 0.25^3 = 1/64 exactly, so three blocks suffice
        assert_eq!(burn_in_length(&p, 1.0 / 64.0, 10_000).unwrap(), 6);
    }
}
