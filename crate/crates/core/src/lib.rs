//! Physical-layer secret key generation over long-range links.
//!
//! The crate simulates RSSI channel probing between two legitimate parties
//! (Alice and Bob) while a ring of eavesdroppers around Alice listens to Bob's
//! probes. It covers the full pipeline: trace simulation or ingestion, the
//! colluding power-averaging estimator, information-theoretic security
//! metrics, moving-window averaging, DCT high-pass filtering with
//! conditional-entropy filter sizing, mean quantization, key disagreement and
//! a subset of the SP 800-22 randomness tests.
//!
//! Signal processing and estimators are generic over the floating point type
//! (see [`Scalar`]); the aliases below fix the common `f64` instantiations.

pub mod attack;
pub mod channel_sim;
pub mod dsp;
pub mod error;
pub mod keygen;
pub mod metrics;
pub mod randomness;
pub mod runner;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// DCT-domain sequence in double precision.
pub type Spectrum = dsp::SpectralSeq<f64>;
/// DCT-domain sequence in single precision.
pub type Spectrum32 = dsp::SpectralSeq<f32>;
/// Filter-size estimate in double precision.
pub type Filter = dsp::FilterChoice<f64>;
/// Filter-size estimate in single precision.
pub type Filter32 = dsp::FilterChoice<f32>;
/// Cached forward/inverse DCT plan in double precision.
pub type DctPlan = dsp::Dct<f64>;
/// Cached forward/inverse DCT plan in single precision.
pub type DctPlan32 = dsp::Dct<f32>;
/// Histogram estimator in double precision.
pub type HistEstimator = metrics::Estimator;
