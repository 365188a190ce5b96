//! WAV input and the waveform CSV format.
//!
//! CSV layout: UTF-8, header `n,ch0,ch1,...`, one row per sample index, LF
//! line endings. Values are written in scientific notation with 17
//! significant digits, which round-trips every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader};

use crate::error::{Error, Result};
use crate::signal::{MultiSignal, Signal};

/// Reads the first channel of a 16-bit PCM or 32-bit float WAV file.
///
/// Integer samples are divided by 2^15, so full scale maps to [-1, 1).
pub fn load_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let bad = |detail: String| Error::UnsupportedWav {
        path: path.to_path_buf(),
        detail,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(std::io::BufReader::new(file)).map_err(|e| bad(e.to_string()))?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels.max(1));
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .step_by(channels)
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .step_by(channels)
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| bad(e.to_string()))?,
        (fmt, bits) => {
            return Err(bad(format!(
                "{bits}-bit {fmt:?} samples (supported: 16-bit PCM, 32-bit float)"
            )))
        }
    };
    Signal::new(samples)
        .map_err(|e| bad(e.to_string()))?
        .with_sample_rate(f64::from(spec.sample_rate))
}

/// Renders a multi-channel signal in the waveform CSV format.
pub fn to_csv_string(ms: &MultiSignal) -> String {
    let k = ms.num_channels();
    let mut out = String::with_capacity(ms.len() * k * 26 + 16);
    out.push('n');
    for c in 0..k {
        let _ = write!(out, ",ch{c}");
    }
    out.push('\n');
    for n in 0..ms.len() {
        let _ = write!(out, "{n}");
        for ch in ms.channels() {
            let _ = write!(out, ",{:.16e}", ch.samples()[n]);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(ms: &MultiSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(to_csv_string(ms).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<MultiSignal> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

/// Parses the waveform CSV format. `origin` only labels error messages.
pub fn parse_csv(text: &str, origin: &Path) -> Result<MultiSignal> {
    let err = |line: usize, detail: String| Error::MalformedCsv {
        path: origin.to_path_buf(),
        line,
        detail,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let cols: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    if cols.first() != Some(&"n") || cols.len() < 2 {
        return Err(err(
            1,
            format!("expected header `n,ch0,...`, got `{header}`"),
        ));
    }
    for (i, c) in cols[1..].iter().enumerate() {
        if *c != format!("ch{i}") {
            return Err(err(
                1,
                format!("column {} should be `ch{i}`, got `{c}`", i + 1),
            ));
        }
    }
    let k = cols.len() - 1;
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let n: usize = fields
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e| err(lineno, format!("bad sample index: {e}")))?;
        if n != idx {
            return Err(err(lineno, format!("sample index {n}, expected {idx}")));
        }
        let mut count = 0;
        for (c, f) in fields.enumerate() {
            if c >= k {
                return Err(err(lineno, format!("more than {k} channel values")));
            }
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|e| err(lineno, format!("bad value `{f}`: {e}")))?;
            rows[c].push(v);
            count += 1;
        }
        if count != k {
            return Err(err(lineno, format!("{count} channel values, expected {k}")));
        }
    }
    MultiSignal::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn ms(rows: Vec<Vec<f64>>) -> MultiSignal {
        MultiSignal::from_rows(rows).unwrap()
    }

    #[test]
    fn csv_header_and_row_count() {
        let s = to_csv_string(&ms(vec![vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 0.25]]));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "n,ch0,ch1");
        assert!(lines[1].starts_with("0,1.0000000000000000e0,"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn csv_empty_signal_is_header_only() {
        let s = to_csv_string(&ms(vec![vec![], vec![]]));
        assert_eq!(s, "n,ch0,ch1\n");
        let back = parse_csv(&s, Path::new("mem")).unwrap();
        assert_eq!(back.num_channels(), 2);
        assert_eq!(back.len(), 0);
    }

    #[test]
    fn csv_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let original = ms(vec![
            vec![0.1, -2.5e-12, 1.0 / 3.0, 123456.789],
            vec![std::f64::consts::PI, 0.0, -0.0, 1e300],
        ]);
        write_csv(&original, &path).unwrap();
        let back = read_csv(&path).unwrap();
        for (a, b) in original.channels().iter().zip(back.channels()) {
            for (x, y) in a.samples().iter().zip(b.samples()) {
                assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn csv_rejects_malformed() {
        let p = PathBuf::from("bad.csv");
        assert!(parse_csv("", &p).is_err());
        assert!(parse_csv("x,ch0\n", &p).is_err());
        assert!(parse_csv("n,ch0\n0,1.0,2.0\n", &p).is_err());
        assert!(parse_csv("n,ch0\n0,abc\n", &p).is_err());
        assert!(parse_csv("n,ch0\n1,1.0\n", &p).is_err());
        match parse_csv("n,ch0,ch1\n0,1.0\n", &p) {
            Err(Error::MalformedCsv { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    fn write_pcm16(path: &Path, rate: u32, channels: u16, samples: &[i16]) {
        let spec = hound::WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn wav_pcm16_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        write_pcm16(&path, 44100, 1, &[0, 16384, -16384]);
        let s = load_wav(&path).unwrap();
        assert_eq!(s.samples(), &[0.0, 0.5, -0.5]);
        assert_eq!(s.sample_rate_hz(), Some(44100.0));
    }

    #[test]
    fn wav_takes_first_channel() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("st.wav");
        write_pcm16(&path, 8000, 2, &[16384, -1, -16384, -1, 0, -1]);
        let s = load_wav(&path).unwrap();
        assert_eq!(s.samples(), &[0.5, -0.5, 0.0]);
    }

    #[test]
    fn wav_float32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 22050,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for v in [0.25f32, -0.75] {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
        let s = load_wav(&path).unwrap();
        assert_eq!(s.samples(), &[0.25, -0.75]);
        assert_eq!(s.sample_rate_hz(), Some(22050.0));
    }

    #[test]
    fn wav_truncated_header_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        write_pcm16(&path, 44100, 1, &[1, 2, 3]);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..20]).unwrap();
        let e = load_wav(&path).unwrap_err();
        assert!(matches!(e, Error::UnsupportedWav { .. }), "{e:?}");
        assert!(e
            .to_string()
            .contains("unsupported encoding/corrupt header"));
    }

    #[test]
    fn wav_unsupported_bit_depth() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p24.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 24,
            sample_format: SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        w.write_sample(5i32).unwrap();
        w.finalize().unwrap();
        let e = load_wav(&path).unwrap_err();
        assert!(e.to_string().contains("24-bit"), "{e}");
    }

    #[test]
    fn wav_missing_file_is_io_error() {
        let e = load_wav("/nonexistent/definitely.wav").unwrap_err();
        assert!(matches!(e, Error::Io { .. }), "{e:?}");
    }
}
