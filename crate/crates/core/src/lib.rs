//! Blind separation of convolutive mixtures with the sliding Z transform.
//!
//! Mixture channels are passed through the comb operator
//! `x(n) − x(n+win)·z^{-win}` of a single-step sliding Z transform, the
//! resulting signals are separated as an instantaneous mixture by a
//! real-valued JADE, and each separated channel is mapped back to the time
//! domain by the inverse recursion. Separation quality is scored with the
//! Pearson correlation against the known sources.
//!
//! ```
//! use szt_core::{ExperimentConfig, simulate};
//!
//! let cfg = ExperimentConfig::preset(2, 7).unwrap();
//! let outcome = simulate(&cfg).unwrap();
//! assert_eq!(outcome.report.matched_abs_corr.len(), 2);
//! ```

pub mod error;
pub mod io;
pub mod jade;
pub mod linalg;
pub mod metrics;
pub mod mixing;
pub mod pipeline;
pub mod rng;
pub mod signal;
pub mod sources;
pub mod szt;

pub use error::{Error, Result};
pub use io::{load_wav, read_csv, write_csv};
pub use jade::{
    center_whiten, cumulant_matrices, jade_separate, joint_diagonalize, DataMatrix, JadeModel,
    JadeOptions, JointDiagonalization, WhiteningResult,
};
pub use linalg::{jacobi_eigen, Mat, SymmetricEigen};
pub use metrics::{correlation, match_and_score, CorrelationReport};
pub use mixing::{mix, mixer_at_z, random_mixer, ConvolutiveMixer, MixerRecord};
pub use pipeline::{
    run_experiment, simulate, szt_bss_separate, ExperimentConfig, ExperimentOutcome, RunReport,
    Separation, SeparationMeta, SourceSpec,
};
pub use rng::Seed;
pub use signal::{MultiSignal, Signal};
pub use sources::{awgn, gen_gauss_pulse_train, gen_noise_bursts, gen_qpsk, gen_wgn, PulseOrder};
pub use szt::{
    burn_in_length, comb_forward, comb_inverse, comb_inverse_zero, sample_z, windowed_z, SztParams,
};
