//! Seeded source generators: QPSK carriers, sparse Gaussian-derivative pulse
//! trains, white Gaussian noise, the AWGN channel and an audio-like noise
//! burst generator used when no recordings are supplied.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::signal::Signal;

/// Real QPSK: `cos(2π·carrier·k + φ_m)` with `φ_m ∈ {π/4, 3π/4, 5π/4, 7π/4}`
/// held for `sps` samples per symbol (rectangular pulses, unit amplitude).
///
/// `carrier` is in cycles per sample and must lie in (0, 0.5).
pub fn gen_qpsk(n: usize, sps: usize, carrier: f64, seed: Seed) -> Result<Signal> {
    if sps < 1 {
        return Err(Error::invalid("samples per symbol must be at least 1"));
    }
    if !(carrier > 0.0 && carrier < 0.5) {
        return Err(Error::invalid(format!(
            "carrier {carrier} outside (0, 0.5) cycles/sample"
        )));
    }
    if n < sps {
        return Err(Error::invalid(format!(
            "{n} samples cannot hold one {sps}-sample symbol"
        )));
    }
    let mut rng = seed.rng();
    let phases: Vec<f64> = (0..n.div_ceil(sps))
        .map(|_| FRAC_PI_4 + FRAC_PI_2 * f64::from(rng.gen_range(0u8..4)))
        .collect();
    Ok(qpsk_with_phases(n, sps, carrier, &phases))
}

pub(crate) fn qpsk_with_phases(n: usize, sps: usize, carrier: f64, phases: &[f64]) -> Signal {
    let w = 2.0 * PI * carrier;
    Signal::from_finite(
        (0..n)
            .map(|k| (w * k as f64 + phases[k / sps]).cos())
            .collect(),
    )
}

/// Order of a Gaussian-derivative pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseOrder {
    /// `-t·exp((1-t²)/2)`: odd, zero at the centre, peak +1 at t = -1.
    First,
    /// `(1-t²)·exp(-t²/2)`: even, peak +1 at the centre.
    Second,
}

impl PulseOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            1 => Ok(PulseOrder::First),
            2 => Ok(PulseOrder::Second),
            o => Err(Error::invalid(format!(
                "pulse order must be 1 or 2, got {o}"
            ))),
        }
    }

    pub fn eval(self, t: f64) -> f64 {
        match self {
            PulseOrder::First => -t * (0.5 * (1.0 - t * t)).exp(),
            PulseOrder::Second => (1.0 - t * t) * (-0.5 * t * t).exp(),
        }
    }
}

// Pulses are evaluated out to |t| = 8, where the envelope is below 1e-13.
const PULSE_EVAL_HALF_WIDTH: f64 = 8.0;
// Each pulse owns a slot of 6·width samples (±3 widths around its centre).
const PULSE_SLOT_WIDTHS: f64 = 6.0;

/// Sparse train of `n_pulses` unit-peak pulses at seeded, non-overlapping
/// centres. Returns the signal and the integer centre of each pulse.
pub fn gen_gauss_pulse_train_with_centers(
    n: usize,
    order: PulseOrder,
    n_pulses: usize,
    width: f64,
    seed: Seed,
) -> Result<(Signal, Vec<usize>)> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::invalid(format!(
            "pulse width must be positive, got {width}"
        )));
    }
    let slot = PULSE_SLOT_WIDTHS * width;
    let used = slot * n_pulses as f64;
    if used > n as f64 {
        return Err(Error::PulsesDoNotFit {
            pulses: n_pulses,
            width,
            n,
        });
    }
    // Distribute the free space uniformly: sorted random offsets in
    // [0, slack] added to back-to-back slots never overlap.
    let slack = (n as f64 - used).floor() as usize;
    let mut rng = seed.rng();
    let mut offsets: Vec<usize> = (0..n_pulses).map(|_| rng.gen_range(0..=slack)).collect();
    offsets.sort_unstable();
    let centers: Vec<usize> = offsets
        .iter()
        .enumerate()
        .map(|(j, &off)| {
            let c = (off as f64 + (j as f64 + 0.5) * slot).round() as usize;
            c.min(n.saturating_sub(1))
        })
        .collect();

    let mut samples = vec![0.0; n];
    let reach = (PULSE_EVAL_HALF_WIDTH * width).ceil() as usize;
    for &c in &centers {
        let lo = c.saturating_sub(reach);
        let hi = (c + reach + 1).min(n);
        for (k, v) in samples.iter_mut().enumerate().take(hi).skip(lo) {
            *v += order.eval((k as f64 - c as f64) / width);
        }
    }
    Ok((Signal::from_finite(samples), centers))
}

pub fn gen_gauss_pulse_train(
    n: usize,
    order: PulseOrder,
    n_pulses: usize,
    width: f64,
    seed: Seed,
) -> Result<Signal> {
    gen_gauss_pulse_train_with_centers(n, order, n_pulses, width, seed).map(|(s, _)| s)
}

/// i.i.d. zero-mean Gaussian samples with the given variance.
pub fn gen_wgn(n: usize, variance: f64, seed: Seed) -> Result<Signal> {
    if n == 0 {
        return Err(Error::invalid("white noise needs at least one sample"));
    }
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::invalid(format!(
            "variance must be positive, got {variance}"
        )));
    }
    let dist = Normal::new(0.0, variance.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = seed.rng();
    Ok(Signal::from_finite(
        (0..n).map(|_| dist.sample(&mut rng)).collect(),
    ))
}

/// Noise variance that puts white noise `snr_db` below a signal of `power`.
pub fn noise_variance_for_snr(power: f64, snr_db: f64) -> f64 {
    power / 10f64.powf(snr_db / 10.0)
}

/// Adds white Gaussian noise at `snr_db` relative to the measured power of `x`.
pub fn awgn(x: &Signal, snr_db: f64, seed: Seed) -> Result<Signal> {
    if x.is_empty() {
        return Err(Error::invalid("cannot add noise to an empty signal"));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
    }
    let power = x.power();
    if power == 0.0 {
        return Err(Error::ZeroPower);
    }
    let sigma = noise_variance_for_snr(power, snr_db).sqrt();
    let mut rng = seed.rng();
    let noisy: Vec<f64> = x
        .samples()
        .iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let out = Signal::new(noisy)?;
    match x.sample_rate_hz() {
        Some(hz) => out.with_sample_rate(hz),
        None => Ok(out),
    }
}

/// Parameters of the audio-like noise burst generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstParams {
    /// Resonator centre frequency, cycles per sample.
    pub center: f64,
    /// Resonator pole radius in (0, 1); closer to 1 is narrower.
    pub radius: f64,
    /// Mean burst (and gap) length in samples.
    pub mean_burst: usize,
}

/// Band-limited noise switched on and off in random bursts with raised-cosine
/// ramps. A stand-in for natural sound recordings: narrowband, intermittent
/// and strongly super-Gaussian. Output is scaled to unit peak.
pub fn gen_noise_bursts(n: usize, params: BurstParams, seed: Seed) -> Result<Signal> {
    let BurstParams {
        center,
        radius,
        mean_burst,
    } = params;
    if n == 0 {
        return Err(Error::invalid("noise bursts need at least one sample"));
    }
    if !(center > 0.0 && center < 0.5) {
        return Err(Error::invalid(format!("centre {center} outside (0, 0.5)")));
    }
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::invalid(format!(
            "pole radius {radius} outside (0, 1)"
        )));
    }
    if mean_burst < 4 {
        return Err(Error::invalid(
            "mean burst length must be at least 4 samples",
        ));
    }
    let mut rng = seed.rng();

    // two-pole resonator driven by white noise
    let a1 = 2.0 * radius * (2.0 * PI * center).cos();
    let a2 = -radius * radius;
    let (mut y1, mut y2) = (0.0, 0.0);
    let mut band = Vec::with_capacity(n);
    for _ in 0..n {
        let e: f64 = rng.sample(StandardNormal);
        let y = e + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        band.push(y);
    }

    let mut envelope = vec![0.0; n];
    let mut k = rng.gen_range(0..mean_burst);
    while k < n {
        let len = rng.gen_range(mean_burst / 2..=mean_burst * 3 / 2);
        let ramp = (len / 8).max(1);
        for i in 0..len.min(n - k) {
            let edge = i.min(len - 1 - i);
            envelope[k + i] = if edge >= ramp {
                1.0
            } else {
                0.5 - 0.5 * (PI * edge as f64 / ramp as f64).cos()
            };
        }
        k += len + rng.gen_range(mean_burst / 2..=mean_burst * 3 / 2);
    }

    let mut out: Vec<f64> = band.iter().zip(&envelope).map(|(b, e)| b * e).collect();
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v /= peak);
    }
    Ok(Signal::from_finite(out))
}
