//! Downsampling, mean quantization and key disagreement.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_aligned, Error, Result};
use crate::scalar::{mean, Scalar};

/// Correction capacity of the reconciliation stage.
pub const CORRECTION_CAPACITY: f64 = 0.2;

/// Key bits of one party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyBits {
    bits: Vec<u8>,
    pub source_party: String,
    pub downsample_step: usize,
    /// Quantizer threshold, dBm.
    pub mu: f64,
    /// Set when every sample sat at or below the mean (constant input).
    pub degenerate: bool,
}

impl KeyBits {
    pub fn from_bits(bits: Vec<u8>, source_party: impl Into<String>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Parameter("a key needs at least one bit".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Parameter(format!("bit value {b} is not 0 or 1")));
        }
        Ok(KeyBits {
            degenerate: bits.iter().all(|&b| b == 0),
            bits,
            source_party: source_party.into(),
            downsample_step: 1,
            mu: 0.0,
        })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// ASCII `0`/`1` string.
    pub fn to_ascii(&self) -> String {
        self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }

    /// Lower-case hex, most significant bit first; a trailing partial byte is
    /// zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.bits.len().div_ceil(4));
        for chunk in self.bits.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)));
            write!(s, "{byte:02x}").expect("write to String");
        }
        s
    }

    /// Parses an ASCII `0`/`1` line; whitespace is ignored.
    pub fn parse_ascii(line: &str, source_party: impl Into<String>) -> Result<Self> {
        let bits = line
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parameter(format!("`{other}` is not a key bit"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        KeyBits::from_bits(bits, source_party)
    }
}

/// Keeps samples at `floor(j·N/target_len)` for `j = 0..target_len`.
pub fn downsample<T: Clone>(seq: &[T], target_len: usize) -> Result<Vec<T>> {
    let n = seq.len();
    if target_len == 0 || target_len > n {
        return Err(Error::Parameter(format!(
            "cannot downsample {n} samples to {target_len}"
        )));
    }
    Ok((0..target_len).map(|j| seq[j * n / target_len].clone()).collect())
}

/// Bit 1 where a sample is strictly above the sequence mean, else 0.
pub fn quantize_mean<T: Scalar>(seq: &[T]) -> Result<KeyBits> {
    if seq.is_empty() {
        return Err(Error::Parameter("cannot quantize an empty sequence".into()));
    }
    let mu = mean(seq);
    let bits: Vec<u8> = seq.iter().map(|&x| u8::from(x > mu)).collect();
    let degenerate = bits.iter().all(|&b| b == 0);
    if degenerate {
        log::warn!("constant sequence quantized to an all-zero key");
    }
    Ok(KeyBits {
        bits,
        source_party: String::new(),
        downsample_step: 1,
        mu: mu.as_f64(),
        degenerate,
    })
}

/// Downsamples to `key_len` and quantizes; records the party and stride.
pub fn derive_key<T: Scalar>(seq: &[T], key_len: usize, party: impl Into<String>) -> Result<KeyBits> {
    let mut key = quantize_mean(&downsample(seq, key_len)?)?;
    key.source_party = party.into();
    key.downsample_step = seq.len() / key_len;
    Ok(key)
}

/// Fraction of positions where the two keys differ.
pub fn kdr(a: &KeyBits, b: &KeyBits) -> Result<f64> {
    check_aligned(a.len(), b.len())?;
    let diff = a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

/// Whether reconciliation can absorb a disagreement rate.
pub fn reconcilable(rate: f64) -> bool {
    rate <= CORRECTION_CAPACITY
}
