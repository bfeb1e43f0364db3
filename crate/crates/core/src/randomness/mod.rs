//! The nine SP 800-22 tests used to validate 256-bit keys: frequency, block
//! frequency, runs, longest run of ones, spectral, serial (two p-values),
//! approximate entropy and cumulative sums in both directions.

pub mod nist;
mod special;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use nist::Direction;
pub use special::{erfc, igamc, normal_cdf};

use crate::error::{Error, Result};

/// Significance level; a test passes when its p-value exceeds it.
pub const ALPHA: f64 = 0.01;

/// Shortest sequence the suite accepts.
pub const MIN_SUITE_BITS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomnessParams {
    /// Block length of the block frequency test.
    pub block_len: usize,
    /// Pattern length of the serial test.
    pub serial_m: usize,
    /// Pattern length of the approximate entropy test.
    pub apen_m: usize,
}

impl Default for RandomnessParams {
    fn default() -> Self {
        RandomnessParams {
            block_len: 16,
            serial_m: 3,
            apen_m: 2,
        }
    }
}

impl RandomnessParams {
    fn validate(&self, n: usize) -> Result<()> {
        if self.block_len < 2 || self.block_len > n {
            return Err(Error::Parameter(format!(
                "block frequency length {} invalid for {n} bits",
                self.block_len
            )));
        }
        if self.serial_m < 2 || (1usize << self.serial_m.min(24)) > n {
            return Err(Error::Parameter(format!(
                "serial pattern length {} invalid for {n} bits",
                self.serial_m
            )));
        }
        if self.apen_m < 1 || (1usize << (self.apen_m + 1).min(24)) > n {
            return Err(Error::Parameter(format!(
                "approximate entropy pattern length {} invalid for {n} bits",
                self.apen_m
            )));
        }
        let log2n = usize::BITS - 1 - n.leading_zeros();
        if self.serial_m as u32 + 2 >= log2n {
            log::warn!("serial m = {} exceeds the recommended bound for {n} bits", self.serial_m);
        }
        if self.apen_m as u32 + 5 >= log2n {
            log::warn!("approximate entropy m = {} exceeds the recommended bound for {n} bits", self.apen_m);
        }
        Ok(())
    }
}

/// p-values of one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub sequence_length: usize,
    pub frequency: f64,
    pub block_frequency: f64,
    pub runs: f64,
    pub longest_run: f64,
    pub fft: f64,
    pub serial: [f64; 2],
    pub approximate_entropy: f64,
    pub cusum_reverse: f64,
    pub cusum_forward: f64,
}

impl RandomnessReport {
    /// Named p-values in table order; the serial test contributes two.
    pub fn p_values(&self) -> [(&'static str, f64); 10] {
        [
            ("Frequency", self.frequency),
            ("Block Frequency", self.block_frequency),
            ("Runs", self.runs),
            ("Longest Run of 1s", self.longest_run),
            ("FFT", self.fft),
            ("Serial 1", self.serial[0]),
            ("Serial 2", self.serial[1]),
            ("Appro. Entropy", self.approximate_entropy),
            ("Cum. Sums (rev)", self.cusum_reverse),
            ("Cum. Sums (fwd)", self.cusum_forward),
        ]
    }

    /// Names of the tests that failed at [`ALPHA`].
    pub fn failures(&self) -> Vec<&'static str> {
        self.p_values()
            .into_iter()
            .filter(|&(_, p)| !passes(p))
            .map(|(name, _)| name)
            .collect()
    }

    pub fn all_pass(&self) -> bool {
        self.failures().is_empty()
    }

    /// JSON keyed by test name, with the serial test as a two-element array.
    pub fn to_json(&self) -> Value {
        let pass = |p: f64| json!(passes(p));
        json!({
            "sequence_length": self.sequence_length,
            "alpha": ALPHA,
            "p_values": {
                "Frequency": self.frequency,
                "Block Frequency": self.block_frequency,
                "Runs": self.runs,
                "Longest Run of 1s": self.longest_run,
                "FFT": self.fft,
                "Serial": self.serial,
                "Appro. Entropy": self.approximate_entropy,
                "Cum. Sums (rev)": self.cusum_reverse,
                "Cum. Sums (fwd)": self.cusum_forward,
            },
            "pass": {
                "Frequency": pass(self.frequency),
                "Block Frequency": pass(self.block_frequency),
                "Runs": pass(self.runs),
                "Longest Run of 1s": pass(self.longest_run),
                "FFT": pass(self.fft),
                "Serial": passes(self.serial[0]) && passes(self.serial[1]),
                "Appro. Entropy": pass(self.approximate_entropy),
                "Cum. Sums (rev)": pass(self.cusum_reverse),
                "Cum. Sums (fwd)": pass(self.cusum_forward),
            },
        })
    }
}

pub fn passes(p: f64) -> bool {
    p > ALPHA
}

/// Runs all nine tests on one bit sequence.
pub fn run_suite(bits: &[u8], params: &RandomnessParams) -> Result<RandomnessReport> {
    if bits.len() < MIN_SUITE_BITS {
        return Err(Error::Length {
            test: "suite",
            needed: MIN_SUITE_BITS,
            got: bits.len(),
        });
    }
    if let Some(b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::Parameter(format!("bit value {b} is not 0 or 1")));
    }
    params.validate(bits.len())?;
    Ok(RandomnessReport {
        sequence_length: bits.len(),
        frequency: nist::frequency(bits)?,
        block_frequency: nist::block_frequency(bits, params.block_len)?,
        runs: nist::runs(bits)?,
        longest_run: nist::longest_run_of_ones(bits)?,
        fft: nist::spectral(bits)?,
        serial: nist::serial(bits, params.serial_m)?,
        approximate_entropy: nist::approximate_entropy(bits, params.apen_m)?,
        cusum_reverse: nist::cumulative_sums(bits, Direction::Reverse)?,
        cusum_forward: nist::cumulative_sums(bits, Direction::Forward)?,
    })
}
