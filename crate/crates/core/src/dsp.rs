//! Moving-window averaging, the DCT-II pair, low-frequency suppression, and
//! conditional-entropy filter sizing.

use std::sync::Arc;

use num_traits::Zero;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{check_aligned, Error, Result};
use crate::metrics::conditional_entropy;
use crate::scalar::Scalar;

/// Centered moving average with windows that shrink at the edges.
///
/// `window` 0 or 1 returns the input unchanged; other windows must be odd.
pub fn mwa<T: Scalar>(seq: &[T], window: usize) -> Result<Vec<T>> {
    if window <= 1 {
        return Ok(seq.to_vec());
    }
    if window % 2 == 0 {
        return Err(Error::Parameter(format!("MWA window {window} is even; centering is undefined")));
    }
    if window > seq.len() {
        return Err(Error::Parameter(format!(
            "MWA window {window} exceeds sequence length {}",
            seq.len()
        )));
    }
    let half = window / 2;
    let mut prefix = Vec::with_capacity(seq.len() + 1);
    prefix.push(T::zero());
    for &x in seq {
        let last = *prefix.last().expect("non-empty");
        prefix.push(last + x);
    }
    Ok((0..seq.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(seq.len());
            (prefix[hi] - prefix[lo]) / T::of_usize(hi - lo)
        })
        .collect())
}

/// DCT-II coefficients `Y(z) = Σ x(n)·cos(π/N·(n + ½)·z)`, unnormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSeq<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> SpectralSeq<T> {
    pub fn from_coeffs(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("empty spectrum".into()));
        }
        Ok(SpectralSeq { coeffs })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn n_samples(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient `z` under the orthonormal scaling, where the transform
    /// preserves energy.
    pub fn orthonormal(&self, z: usize) -> T {
        let n = T::of_usize(self.coeffs.len());
        let w = if z == 0 { T::one() / n } else { T::of(2.0) / n };
        self.coeffs[z] * w.sqrt()
    }
}

/// FFT-backed DCT-II and its inverse for one length.
pub struct Dct<T: Scalar> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    // e^{-iπk/(2N)}
    twiddles: Vec<Complex<T>>,
}

impl<T: Scalar> Dct<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("transform length must be at least 1".into()));
        }
        let mut planner = FftPlanner::new();
        let scale = T::PI() / T::of_usize(2 * n);
        let twiddles = (0..n)
            .map(|k| {
                let a = scale * T::of_usize(k);
                Complex::new(a.cos(), -a.sin())
            })
            .collect();
        Ok(Dct {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            twiddles,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Forward transform by even/odd reordering and one complex FFT.
    pub fn forward(&self, x: &[T]) -> Result<SpectralSeq<T>> {
        check_aligned(self.n, x.len())?;
        let n = self.n;
        let mut v = vec![Complex::zero(); n];
        for i in 0..n.div_ceil(2) {
            v[i] = Complex::new(x[2 * i], T::zero());
        }
        for i in 0..n / 2 {
            v[n - 1 - i] = Complex::new(x[2 * i + 1], T::zero());
        }
        self.forward.process(&mut v);
        let coeffs = v.iter().zip(&self.twiddles).map(|(c, w)| (c * w).re).collect();
        Ok(SpectralSeq { coeffs })
    }

    /// Exact inverse of [`Dct::forward`].
    pub fn inverse(&self, spec: &SpectralSeq<T>) -> Result<Vec<T>> {
        check_aligned(self.n, spec.coeffs.len())?;
        let n = self.n;
        let y = &spec.coeffs;
        let mut v: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let mirror = if k == 0 { T::zero() } else { y[n - k] };
                Complex::new(y[k], -mirror) * self.twiddles[k].conj()
            })
            .collect();
        self.inverse.process(&mut v);
        let scale = T::of_usize(n);
        let mut x = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            x[2 * i] = v[i].re / scale;
        }
        for i in 0..n / 2 {
            x[2 * i + 1] = v[n - 1 - i].re / scale;
        }
        Ok(x)
    }

    /// Zeroes coefficients `1..=z_cut` and transforms back. The DC term is kept.
    pub fn suppress_low(&self, spec: &SpectralSeq<T>, z_cut: usize) -> Result<Vec<T>> {
        if z_cut >= self.n {
            return Err(Error::Parameter(format!(
                "cannot suppress {z_cut} components of a length-{} sequence",
                self.n
            )));
        }
        let mut cut = spec.clone();
        cut.coeffs[1..=z_cut].iter_mut().for_each(|c| *c = T::zero());
        self.inverse(&cut)
    }
}

pub fn dct2<T: Scalar>(seq: &[T]) -> Result<SpectralSeq<T>> {
    Dct::new(seq.len())?.forward(seq)
}

pub fn idct<T: Scalar>(spec: &SpectralSeq<T>) -> Result<Vec<T>> {
    Dct::new(spec.n_samples())?.inverse(spec)
}

/// High-pass filter: removes DCT components `1..=z_cut`, keeping the mean.
pub fn suppress_low<T: Scalar>(seq: &[T], z_cut: usize) -> Result<Vec<T>> {
    let plan = Dct::new(seq.len())?;
    let spec = plan.forward(seq)?;
    plan.suppress_low(&spec, z_cut)
}

/// Result of the conditional-entropy filter-size search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterChoice<T> {
    /// Number of suppressed low-frequency components, DC excluded.
    pub z0: usize,
    /// `H(X | X^f_z)` in bits for `z = 1..=z_max`.
    pub entropy_curve: Vec<T>,
    /// `H(z+1) - H(z)`, attributed to the midpoint `z + ½`.
    pub gradient_curve: Vec<T>,
}

impl<T: Scalar> FilterChoice<T> {
    pub fn z_max(&self) -> usize {
        self.entropy_curve.len()
    }
}

/// Picks the number of low-frequency components to suppress from one
/// party's own sequence.
///
/// For each `z` in `1..=z_max` the sequence is high-pass filtered with
/// components `1..=z` removed, and `H(X | X^f_z)` is estimated on a
/// `bin_db` grid. The answer is one past the lower end of the steepest rise
/// of that curve. Ties resolve to the smallest `z`.
pub fn estimate_filter_size<T: Scalar>(seq: &[T], z_max: usize, bin_db: T) -> Result<FilterChoice<T>> {
    if z_max < 2 {
        return Err(Error::Parameter(format!("z_max must be at least 2, got {z_max}")));
    }
    if z_max >= seq.len() {
        return Err(Error::Parameter(format!(
            "z_max {z_max} must be below the sequence length {}",
            seq.len()
        )));
    }
    if seq.iter().all(|&v| v == seq[0]) {
        return Err(Error::DegenerateEntropy);
    }
    let plan = Dct::new(seq.len())?;
    let mut spec = plan.forward(seq)?;
    let mut entropy_curve = Vec::with_capacity(z_max);
    for z in 1..=z_max {
        spec.coeffs[z] = T::zero();
        let filtered = plan.inverse(&spec)?;
        entropy_curve.push(conditional_entropy(seq, &filtered, bin_db)?);
    }
    let gradient_curve: Vec<T> = entropy_curve.windows(2).map(|w| w[1] - w[0]).collect();
    let mut best = 0;
    for (j, &g) in gradient_curve.iter().enumerate() {
        if g > gradient_curve[best] {
            best = j;
        }
    }
    // gradient j spans z = j+1 → j+2
    let z0 = best + 2;
    Ok(FilterChoice {
        z0,
        entropy_curve,
        gradient_curve,
    })
}

/// Bob sizes the filter from his own sequence; both sides then apply it.
pub fn negotiate_filter<T: Scalar>(
    seq_alice: &[T],
    seq_bob: &[T],
    z_max: usize,
    bin_db: T,
) -> Result<(Vec<T>, Vec<T>, FilterChoice<T>)> {
    check_aligned(seq_alice.len(), seq_bob.len())?;
    let choice = estimate_filter_size(seq_bob, z_max, bin_db)?;
    let plan = Dct::new(seq_bob.len())?;
    let alice = plan.suppress_low(&plan.forward(seq_alice)?, choice.z0)?;
    let bob = plan.suppress_low(&plan.forward(seq_bob)?, choice.z0)?;
    Ok((alice, bob, choice))
}
