use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real sample sequence with an optional sample rate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: Option<f64>,
}

impl Signal {
    /// Wraps `samples`, rejecting NaN and infinities.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Signal {
            samples,
            sample_rate_hz: None,
        })
    }

    pub fn with_sample_rate(mut self, hz: f64) -> Result<Self> {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(Error::invalid(format!(
                "sample rate must be positive, got {hz}"
            )));
        }
        self.sample_rate_hz = Some(hz);
        Ok(self)
    }

    pub(crate) fn from_finite(samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        Signal {
            samples,
            sample_rate_hz: None,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> Option<f64> {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of the squared samples; zero for an empty signal.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy of `samples[start..]`, keeping the sample rate.
    pub fn tail(&self, start: usize) -> Signal {
        Signal {
            samples: self.samples[start.min(self.len())..].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn truncated(&self, len: usize) -> Signal {
        Signal {
            samples: self.samples[..len.min(self.len())].to_vec(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn scaled(&self, c: f64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|v| v * c).collect(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }
}

impl TryFrom<Vec<f64>> for Signal {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Signal::new(v)
    }
}

/// K ≥ 1 equal-length channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSignal {
    channels: Vec<Signal>,
}

impl MultiSignal {
    pub fn new(channels: Vec<Signal>) -> Result<Self> {
        let Some(first) = channels.first() else {
            return Err(Error::invalid(
                "a multi-channel signal needs at least one channel",
            ));
        };
        let n = first.len();
        if let Some((i, c)) = channels.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::dims(format!(
                "channel {i} has {} samples, channel 0 has {n}",
                c.len()
            )));
        }
        Ok(MultiSignal { channels })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        MultiSignal::new(rows.into_iter().map(Signal::new).collect::<Result<_>>()?)
    }

    pub fn channels(&self) -> &[Signal] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Signal> {
        self.channels
    }

    pub fn channel(&self, i: usize) -> &Signal {
        &self.channels[i]
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tail(&self, start: usize) -> MultiSignal {
        MultiSignal {
            channels: self.channels.iter().map(|c| c.tail(start)).collect(),
        }
    }

    pub fn truncated(&self, len: usize) -> MultiSignal {
        MultiSignal {
            channels: self.channels.iter().map(|c| c.truncated(len)).collect(),
        }
    }
}
