//! Correlation and histogram information measures, secret key capacity and
//! the intact key information ratio.
//!
//! Information measures use plug-in estimates on a fixed grid: each sample
//! maps to bin `round(x / bin_db)`. All values are in bits.

use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::attack::{Averaging, CollusionEstimate};
use crate::channel_sim::ProbeTrace;
use crate::error::{check_aligned, Error, Result};
use crate::scalar::Scalar;

/// Pearson correlation coefficient.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    check_aligned(x.len(), y.len())?;
    if x.len() < 2 {
        return Err(Error::Domain(format!("correlation needs at least 2 samples, got {}", x.len())));
    }
    let n = T::of_usize(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() {
        return Err(Error::UndefinedCorrelation("x"));
    }
    if syy == T::zero() {
        return Err(Error::UndefinedCorrelation("y"));
    }
    let rho = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(rho.max(-T::one()).min(T::one()))
}

/// Bias correction applied to every entropy term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Correction {
    #[default]
    PlugIn,
    /// Adds `(k - 1) / (2N)` nats for `k` occupied bins.
    MillerMadow,
}

/// Histogram estimator on a fixed dB grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub bin_db: f64,
    pub correction: Correction,
}

impl Estimator {
    pub fn new(bin_db: f64) -> Self {
        Estimator {
            bin_db,
            correction: Correction::PlugIn,
        }
    }

    pub fn with_correction(mut self, correction: Correction) -> Self {
        self.correction = correction;
        self
    }

    fn bins<T: Scalar>(&self, x: &[T]) -> Vec<i64> {
        bin_indices(x, T::of(self.bin_db))
    }

    pub fn entropy<T: Scalar>(&self, x: &[T]) -> f64 {
        self.entropy_of(self.bins(x))
    }

    pub fn mutual_info<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<f64> {
        check_aligned(x.len(), y.len())?;
        let (bx, by) = (self.bins(x), self.bins(y));
        let hx = self.entropy_of(bx.clone());
        let hy = self.entropy_of(by.clone());
        let hxy = self.entropy_of(zip2(&bx, &by));
        Ok(clamp_info("I(X;Y)", hx + hy - hxy))
    }

    pub fn cond_mutual_info<T: Scalar>(&self, x: &[T], y: &[T], z: &[T]) -> Result<f64> {
        check_aligned(x.len(), y.len())?;
        check_aligned(x.len(), z.len())?;
        let (bx, by, bz) = (self.bins(x), self.bins(y), self.bins(z));
        let xyz: Vec<[i64; 3]> = bx.iter().zip(&by).zip(&bz).map(|((&a, &b), &c)| [a, b, c]).collect();
        let occupied = distinct(xyz.clone());
        if occupied > 0 && (x.len() as f64) / (occupied as f64) < 5.0 {
            // once per process; sweeps would otherwise repeat it for every cell
            static WARNED: AtomicBool = AtomicBool::new(false);
            let level = if WARNED.swap(true, Ordering::Relaxed) { log::Level::Debug } else { log::Level::Warn };
            log::log!(
                level,
                "sparse conditioning histogram: {} samples over {occupied} occupied cells",
                x.len()
            );
        }
        let hxz = self.entropy_of(zip2(&bx, &bz));
        let hyz = self.entropy_of(zip2(&by, &bz));
        let hz = self.entropy_of(bz);
        let hxyz = self.entropy_of(xyz);
        Ok(clamp_info("I(X;Y|Z)", hxz + hyz - hz - hxyz))
    }

    /// `H(X | Y) = H(X,Y) - H(Y)`.
    pub fn conditional_entropy<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<f64> {
        check_aligned(x.len(), y.len())?;
        let (bx, by) = (self.bins(x), self.bins(y));
        let hxy = self.entropy_of(zip2(&bx, &by));
        let hy = self.entropy_of(by);
        Ok((hxy - hy).max(0.0))
    }

    fn entropy_of<K: Ord>(&self, keys: Vec<K>) -> f64 {
        let n = keys.len();
        if n == 0 {
            return 0.0;
        }
        let counts = sorted_counts(keys);
        let nf = n as f64;
        let weighted: f64 = counts.iter().map(|&c| c as f64 * (c as f64).log2()).sum();
        let h = (nf.log2() - weighted / nf).max(0.0);
        match self.correction {
            Correction::PlugIn => h,
            Correction::MillerMadow => h + (counts.len() as f64 - 1.0) / (2.0 * nf * std::f64::consts::LN_2),
        }
    }
}

fn bin_indices<T: Scalar>(x: &[T], bin: T) -> Vec<i64> {
    x.iter()
        .map(|&v| (v / bin).round().to_i64().expect("finite sample"))
        .collect()
}

fn zip2(a: &[i64], b: &[i64]) -> Vec<[i64; 2]> {
    a.iter().zip(b).map(|(&p, &q)| [p, q]).collect()
}

/// Occupancy counts in ascending order, so sums do not depend on key order.
fn sorted_counts<K: Ord>(mut keys: Vec<K>) -> Vec<usize> {
    keys.sort_unstable();
    let mut counts = Vec::new();
    let mut run = 0;
    for i in 0..keys.len() {
        run += 1;
        if i + 1 == keys.len() || keys[i + 1] != keys[i] {
            counts.push(run);
            run = 0;
        }
    }
    counts.sort_unstable();
    counts
}

fn distinct<K: Ord>(mut keys: Vec<K>) -> usize {
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn clamp_info(what: &str, raw: f64) -> f64 {
    if raw < 0.0 {
        log::debug!("{what} estimate {raw} clamped to 0");
        0.0
    } else {
        raw
    }
}

/// Plug-in Shannon entropy of the binned samples.
pub fn entropy<T: Scalar>(x: &[T], bin_db: T) -> T {
    T::of(Estimator::new(bin_db.as_f64()).entropy(x))
}

/// `H(X) + H(Y) - H(X,Y)`, clamped at zero.
pub fn mutual_info<T: Scalar>(x: &[T], y: &[T], bin_db: T) -> Result<T> {
    Estimator::new(bin_db.as_f64()).mutual_info(x, y).map(T::of)
}

/// `H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z)`, clamped at zero.
pub fn cond_mutual_info<T: Scalar>(x: &[T], y: &[T], z: &[T], bin_db: T) -> Result<T> {
    Estimator::new(bin_db.as_f64()).cond_mutual_info(x, y, z).map(T::of)
}

/// `H(X | Y)` on the shared grid.
pub fn conditional_entropy<T: Scalar>(x: &[T], y: &[T], bin_db: T) -> Result<T> {
    Estimator::new(bin_db.as_f64()).conditional_entropy(x, y).map(T::of)
}

/// Security metrics of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` where a row is constant and correlation is undefined.
    pub rho_ab: Option<f64>,
    pub rho_a_ec: Option<f64>,
    pub rho_a_em: Vec<Option<f64>>,
    pub mi_ab: f64,
    pub cmi_em: Vec<f64>,
    pub cmi_ec: f64,
    pub c_k: f64,
    /// `None` when `mi_ab` is zero.
    pub r_ck: Option<f64>,
    pub bin_db: f64,
    pub averaging: Averaging,
    pub correction: Correction,
}

impl MetricsReport {
    /// Whether the collusion term is strictly below every other candidate.
    pub fn collusion_is_strict_min(&self) -> bool {
        self.cmi_ec < self.mi_ab && self.cmi_em.iter().all(|&c| self.cmi_ec < c)
    }

    pub fn csv_header(eves: usize) -> String {
        let mut cols = vec!["rho_ab".to_string(), "rho_a_ec".to_string()];
        cols.extend((1..=eves).map(|m| format!("rho_a_e{m}")));
        cols.push("mi_ab".into());
        cols.extend((1..=eves).map(|m| format!("cmi_e{m}")));
        cols.extend(["cmi_ec", "c_k", "r_ck", "bin_db"].map(String::from));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut cols = vec![opt(self.rho_ab), opt(self.rho_a_ec)];
        cols.extend(self.rho_a_em.iter().map(|&v| opt(v)));
        cols.push(self.mi_ab.to_string());
        cols.extend(self.cmi_em.iter().map(f64::to_string));
        cols.extend([
            self.cmi_ec.to_string(),
            self.c_k.to_string(),
            opt(self.r_ck),
            self.bin_db.to_string(),
        ]);
        cols.join(",")
    }
}

fn optional_rho(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    match pearson(x, y) {
        Ok(r) => Ok(Some(r)),
        Err(Error::UndefinedCorrelation(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Fills a [`MetricsReport`] with the plug-in estimator.
pub fn secret_key_capacity(trace: &ProbeTrace, collusion: &CollusionEstimate, bin_db: f64) -> Result<MetricsReport> {
    secret_key_capacity_with(trace, collusion, &Estimator::new(bin_db))
}

/// Fills a [`MetricsReport`]; `c_k` is the minimum of `I(A;B)`, every
/// `I(A;B|E_m)` and `I(A;B|E_c)`.
pub fn secret_key_capacity_with(
    trace: &ProbeTrace,
    collusion: &CollusionEstimate,
    est: &Estimator,
) -> Result<MetricsReport> {
    check_aligned(trace.len(), collusion.x_ec.len())?;
    let (a, b) = (trace.alice(), trace.bob());
    let mi_ab = est.mutual_info(a, b)?;
    let cmi_em = trace
        .eves()
        .iter()
        .map(|e| est.cond_mutual_info(a, b, e))
        .collect::<Result<Vec<_>>>()?;
    let cmi_ec = est.cond_mutual_info(a, b, &collusion.x_ec)?;
    let c_k = cmi_em.iter().copied().fold(mi_ab.min(cmi_ec), f64::min);
    let r_ck = (mi_ab > 0.0).then(|| c_k / mi_ab);
    Ok(MetricsReport {
        rho_ab: optional_rho(a, b)?,
        rho_a_ec: optional_rho(a, &collusion.x_ec)?,
        rho_a_em: trace.eves().iter().map(|e| optional_rho(a, e)).collect::<Result<_>>()?,
        mi_ab,
        cmi_em,
        cmi_ec,
        c_k,
        r_ck,
        bin_db: est.bin_db,
        averaging: collusion.domain,
        correction: est.correction,
    })
}
