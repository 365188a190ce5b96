//! FIR convolutive mixing of K sources through L paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::rng::Seed;
use crate::signal::{MultiSignal, Signal};

/// Path matrices `A⁽⁰⁾ … A⁽ᴸ⁻¹⁾`, each K×K.
///
/// Mixture channel `i` is `x_i(n) = Σ_j Σ_l A⁽ˡ⁾[i][j] · s_j(n − l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixerRecord", into = "MixerRecord")]
pub struct ConvolutiveMixer {
    paths: Vec<Mat>,
}

/// Serialized form: counts plus row-major coefficient arrays per path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixerRecord {
    pub paths: usize,
    pub channels: usize,
    /// One row-major K·K array per path.
    pub coefficients: Vec<Vec<f64>>,
}

impl ConvolutiveMixer {
    pub fn new(paths: Vec<Mat>) -> Result<Self> {
        let Some(first) = paths.first() else {
            return Err(Error::invalid("a mixer needs at least one path"));
        };
        let k = first.rows();
        if k == 0 {
            return Err(Error::invalid("a mixer needs at least one channel"));
        }
        for (l, m) in paths.iter().enumerate() {
            if m.rows() != k || m.cols() != k {
                return Err(Error::dims(format!(
                    "path {l} is {}x{}, expected {k}x{k}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_finite() {
                return Err(Error::invalid(format!(
                    "path {l} has non-finite coefficients"
                )));
            }
        }
        Ok(ConvolutiveMixer { paths })
    }

    /// Memoryless mixer (L = 1).
    pub fn instantaneous(a: Mat) -> Result<Self> {
        ConvolutiveMixer::new(vec![a])
    }

    pub fn paths(&self) -> &[Mat] {
        &self.paths
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn num_channels(&self) -> usize {
        self.paths[0].rows()
    }

    pub fn to_record(&self) -> MixerRecord {
        MixerRecord {
            paths: self.num_paths(),
            channels: self.num_channels(),
            coefficients: self.paths.iter().map(|m| m.as_slice().to_vec()).collect(),
        }
    }
}

impl From<ConvolutiveMixer> for MixerRecord {
    fn from(m: ConvolutiveMixer) -> Self {
        m.to_record()
    }
}

impl TryFrom<MixerRecord> for ConvolutiveMixer {
    type Error = Error;

    fn try_from(r: MixerRecord) -> Result<Self> {
        if r.coefficients.len() != r.paths {
            return Err(Error::dims(format!(
                "{} coefficient arrays for {} paths",
                r.coefficients.len(),
                r.paths
            )));
        }
        let k = r.channels;
        let paths = r
            .coefficients
            .iter()
            .map(|c| {
                if c.len() != k * k {
                    return Err(Error::dims(format!(
                        "{} coefficients, expected {}",
                        c.len(),
                        k * k
                    )));
                }
                Mat::from_rows(&c.chunks(k.max(1)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        ConvolutiveMixer::new(paths)
    }
}

/// Mixer with every coefficient drawn i.i.d. uniform on the open interval (0, 1).
pub fn random_mixer(channels: usize, paths: usize, seed: Seed) -> Result<ConvolutiveMixer> {
    if channels == 0 || paths == 0 {
        return Err(Error::invalid(format!(
            "mixer needs K ≥ 1 and L ≥ 1, got K={channels}, L={paths}"
        )));
    }
    let mut rng = seed.rng();
    let mut open_unit = || loop {
        let v: f64 = rng.gen();
        if v > 0.0 {
            break v;
        }
    };
    let mats = (0..paths)
        .map(|_| Mat::from_fn(channels, channels, |_, _| open_unit()))
        .collect();
    ConvolutiveMixer::new(mats)
}

/// Applies the mixer with zero prehistory (`s_j(m) = 0` for `m < 0`).
/// Output has the same length as the input.
pub fn mix(mixer: &ConvolutiveMixer, sources: &MultiSignal) -> Result<MultiSignal> {
    let k = mixer.num_channels();
    if sources.num_channels() != k {
        return Err(Error::dims(format!(
            "mixer has {k} channels, sources have {}",
            sources.num_channels()
        )));
    }
    let n = sources.len();
    let mut out = vec![vec![0.0; n]; k];
    for (l, a) in mixer.paths().iter().enumerate() {
        if l >= n {
            break;
        }
        for (i, x) in out.iter_mut().enumerate() {
            for (j, src) in sources.channels().iter().enumerate() {
                let c = a[(i, j)];
                if c == 0.0 {
                    continue;
                }
                for (xn, sv) in x[l..].iter_mut().zip(src.samples()) {
                    *xn += c * sv;
                }
            }
        }
    }
    MultiSignal::new(out.into_iter().map(Signal::from_finite).collect())
}

/// System matrix `A(z) = Σ_l A⁽ˡ⁾ z^{−l}` evaluated at a real point.
pub fn mixer_at_z(mixer: &ConvolutiveMixer, z: f64) -> Result<Mat> {
    if z == 0.0 || !z.is_finite() {
        return Err(Error::invalid(format!("A(z) is undefined at z = {z}")));
    }
    let k = mixer.num_channels();
    let inv = 1.0 / z;
    let mut acc = Mat::zeros(k, k);
    let mut w = 1.0;
    for a in mixer.paths() {
        acc = acc.add(&a.scale(w));
        w *= inv;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(rows: Vec<Vec<f64>>) -> MultiSignal {
        MultiSignal::from_rows(rows).unwrap()
    }

    #[test]
    fn random_mixer_shape_support_and_determinism() {
        let m = random_mixer(2, 2, Seed(3)).unwrap();
        let rec = m.to_record();
        let all: Vec<f64> = rec.coefficients.concat();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(m, random_mixer(2, 2, Seed(3)).unwrap());
        assert_ne!(m, random_mixer(2, 2, Seed(4)).unwrap());
        assert!(random_mixer(0, 2, Seed(0)).is_err());
        assert!(random_mixer(2, 0, Seed(0)).is_err());
    }

    #[test]
    fn identity_mixing_is_exact() {
        let s = ms(vec![vec![1.0, -2.0, 3.5], vec![0.25, 0.0, -1.0]]);
        let m = ConvolutiveMixer::instantaneous(Mat::identity(2)).unwrap();
        assert_eq!(mix(&m, &s).unwrap(), s);
    }

    #[test]
    fn impulse_through_two_taps() {
        let m = ConvolutiveMixer::new(vec![
            Mat::from_rows(&[[1.0]]).unwrap(),
            Mat::from_rows(&[[0.5]]).unwrap(),
        ])
        .unwrap();
        let x = mix(&m, &ms(vec![vec![1.0, 0.0, 0.0]])).unwrap();
        assert_eq!(x.channel(0).samples(), &[1.0, 0.5, 0.0]);
    }

    #[test]
    fn channel_count_mismatch() {
        let m = random_mixer(3, 1, Seed(0)).unwrap();
        assert!(mix(&m, &ms(vec![vec![1.0], vec![2.0]])).is_err());
    }

    #[test]
    fn mixer_at_z_values() {
        let m = random_mixer(2, 1, Seed(1)).unwrap();
        assert_eq!(mixer_at_z(&m, 0.3).unwrap(), m.paths()[0]);
        let m2 = random_mixer(2, 2, Seed(2)).unwrap();
        let expected = m2.paths()[0].add(&m2.paths()[1].scale(2.0));
        assert!(mixer_at_z(&m2, 0.5).unwrap().sub(&expected).frobenius() < 1e-15);
        assert!(mixer_at_z(&m2, 0.0).is_err());
    }

    #[test]
    fn record_round_trip_and_validation() {
        let m = random_mixer(2, 3, Seed(8)).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"paths\":3"));
        let back: ConvolutiveMixer = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"paths":1,"channels":2,"coefficients":[[1.0,2.0,3.0]]}"#;
        assert!(serde_json::from_str::<ConvolutiveMixer>(bad).is_err());
    }
}
