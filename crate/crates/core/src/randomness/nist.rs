//! Individual SP 800-22 tests. Each takes bits as `0`/`1` bytes and returns
//! the p-value(s).

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::special::{erfc, igamc, normal_cdf};
use crate::error::{Error, Result};

fn signed_sum(bits: &[u8]) -> i64 {
    bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).sum()
}

fn require(test: &'static str, bits: &[u8], needed: usize) -> Result<()> {
    if bits.len() < needed {
        return Err(Error::Length {
            test,
            needed,
            got: bits.len(),
        });
    }
    Ok(())
}

/// Frequency (monobit) test.
pub fn frequency(bits: &[u8]) -> Result<f64> {
    require("Frequency", bits, 1)?;
    let s_obs = signed_sum(bits).unsigned_abs() as f64 / (bits.len() as f64).sqrt();
    Ok(erfc(s_obs / std::f64::consts::SQRT_2))
}

/// Frequency test within blocks of `m` bits.
pub fn block_frequency(bits: &[u8], m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Parameter("block frequency block length must be positive".into()));
    }
    require("Block Frequency", bits, m)?;
    let blocks = bits.len() / m;
    let chi2: f64 = bits
        .chunks_exact(m)
        .map(|b| {
            let pi = b.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
            (pi - 0.5) * (pi - 0.5)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    Ok(igamc(blocks as f64 / 2.0, chi2 / 2.0))
}

/// Runs test. Fails outright (p = 0) when the monobit prerequisite fails.
pub fn runs(bits: &[u8]) -> Result<f64> {
    require("Runs", bits, 2)?;
    let n = bits.len() as f64;
    let pi = bits.iter().map(|&b| b as f64).sum::<f64>() / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(0.0);
    }
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let num = (v_obs as f64 - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    Ok(erfc(num / den))
}

/// Longest run of ones within blocks; block size follows the sequence length.
pub fn longest_run_of_ones(bits: &[u8]) -> Result<f64> {
    require("Longest Run of Ones", bits, 128)?;
    let n = bits.len();
    // (block size, lowest class, class probabilities)
    let (m, lo, probs): (usize, usize, &[f64]) = if n < 6272 {
        (8, 1, &[0.2148, 0.3672, 0.2305, 0.1875])
    } else if n < 750_000 {
        (128, 4, &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124])
    } else {
        (10_000, 10, &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727])
    };
    let k = probs.len() - 1;
    let blocks = n / m;
    let mut nu = vec![0usize; k + 1];
    for block in bits.chunks_exact(m) {
        let (mut run, mut longest) = (0usize, 0usize);
        for &b in block {
            run = if b == 1 { run + 1 } else { 0 };
            longest = longest.max(run);
        }
        nu[longest.clamp(lo, lo + k) - lo] += 1;
    }
    let chi2: f64 = nu
        .iter()
        .zip(probs)
        .map(|(&v, &p)| {
            let expect = blocks as f64 * p;
            (v as f64 - expect).powi(2) / expect
        })
        .sum();
    Ok(igamc(k as f64 / 2.0, chi2 / 2.0))
}

/// Discrete Fourier transform (spectral) test.
pub fn spectral(bits: &[u8]) -> Result<f64> {
    require("FFT", bits, 2)?;
    let n = bits.len();
    let mut buf: Vec<Complex<f64>> = bits
        .iter()
        .map(|&b| Complex::new(if b == 1 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let nf = n as f64;
    let threshold = ((1.0f64 / 0.05).ln() * nf).sqrt();
    let n0 = 0.95 * nf / 2.0;
    let n1 = buf[..n / 2].iter().filter(|c| c.norm() < threshold).count() as f64;
    let d = (n1 - n0) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    Ok(erfc(d.abs() / std::f64::consts::SQRT_2))
}

/// Frequencies of every overlapping `m`-bit pattern, wrapping around.
fn pattern_counts(bits: &[u8], m: usize) -> Vec<usize> {
    let n = bits.len();
    let mut counts = vec![0usize; 1 << m];
    for i in 0..n {
        let idx = (0..m).fold(0usize, |acc, j| (acc << 1) | bits[(i + j) % n] as usize);
        counts[idx] += 1;
    }
    counts
}

fn psi_sq(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum: f64 = pattern_counts(bits, m).iter().map(|&c| (c * c) as f64).sum();
    (1u64 << m) as f64 / n * sum - n
}

/// Serial test; returns both p-values.
pub fn serial(bits: &[u8], m: usize) -> Result<[f64; 2]> {
    if m < 2 || m > 24 {
        return Err(Error::Parameter(format!("serial block length {m} must be in 2..=24")));
    }
    require("Serial", bits, m)?;
    let (p0, p1, p2) = (psi_sq(bits, m), psi_sq(bits, m - 1), psi_sq(bits, m - 2));
    let del1 = p0 - p1;
    let del2 = p0 - 2.0 * p1 + p2;
    let a = (1u64 << m) as f64;
    Ok([igamc(a / 4.0, del1 / 2.0), igamc(a / 8.0, del2 / 2.0)])
}

fn phi(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    pattern_counts(bits, m)
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

/// Approximate entropy test with block length `m`.
pub fn approximate_entropy(bits: &[u8], m: usize) -> Result<f64> {
    if m == 0 || m > 24 {
        return Err(Error::Parameter(format!("approximate entropy block length {m} must be in 1..=24")));
    }
    require("Approximate Entropy", bits, m + 1)?;
    let n = bits.len() as f64;
    let ap_en = phi(bits, m) - phi(bits, m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - ap_en);
    Ok(igamc((1u64 << (m - 1)) as f64, chi2 / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

/// Cumulative sums test.
pub fn cumulative_sums(bits: &[u8], direction: Direction) -> Result<f64> {
    require("Cumulative Sums", bits, 1)?;
    let n = bits.len() as i64;
    let step = |b: &u8| if *b == 1 { 1i64 } else { -1 };
    let mut s = 0i64;
    let mut z = 0i64;
    let mut visit = |b: &u8| {
        s += step(b);
        z = z.max(s.abs());
    };
    match direction {
        Direction::Forward => bits.iter().for_each(&mut visit),
        Direction::Reverse => bits.iter().rev().for_each(&mut visit),
    }
    let zf = z as f64;
    let sqrt_n = (n as f64).sqrt();
    // integer division truncates toward zero, as in the reference code
    let mut sum1 = 0.0;
    for k in ((-n / z + 1) / 4)..=((n / z - 1) / 4) {
        let k = k as f64;
        sum1 += normal_cdf((4.0 * k + 1.0) * zf / sqrt_n) - normal_cdf((4.0 * k - 1.0) * zf / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in ((-n / z - 3) / 4)..=((n / z - 1) / 4) {
        let k = k as f64;
        sum2 += normal_cdf((4.0 * k + 3.0) * zf / sqrt_n) - normal_cdf((4.0 * k + 1.0) * zf / sqrt_n);
    }
    Ok((1.0 - sum1 + sum2).clamp(0.0, 1.0))
}
