//! Colluding-eavesdropper estimation of Alice's RSSI and the best single
//! eavesdropper baseline.

use serde::{Deserialize, Serialize};

use crate::channel_sim::ProbeTrace;
use crate::error::{Error, Result};
use crate::metrics::pearson;

/// How the eavesdroppers combine their dBm readings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Averaging {
    /// Average received powers in mW, report in dBm.
    #[default]
    LinearAverage,
    /// Average the dBm values directly.
    DbAverage,
}

/// The colluders' per-round estimate of Alice's RSSI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollusionEstimate {
    pub x_ec: Vec<f64>,
    pub m_used: usize,
    pub domain: Averaging,
}

/// Averages the Eve rows round by round.
pub fn collude_estimate(trace: &ProbeTrace, domain: Averaging) -> Result<CollusionEstimate> {
    let eves = trace.eves();
    if eves.is_empty() {
        return Err(Error::AttackUndefined);
    }
    let m = eves.len() as f64;
    let x_ec = (0..trace.len())
        .map(|n| match domain {
            Averaging::DbAverage => eves.iter().map(|row| row[n]).sum::<f64>() / m,
            Averaging::LinearAverage => {
                // factor out the strongest reading so 10^(x/10) cannot underflow
                let peak = eves.iter().map(|row| row[n]).fold(f64::NEG_INFINITY, f64::max);
                let rel: f64 = eves.iter().map(|row| 10f64.powf((row[n] - peak) / 10.0)).sum();
                peak + 10.0 * (rel / m).log10()
            }
        })
        .collect();
    Ok(CollusionEstimate {
        x_ec,
        m_used: eves.len(),
        domain,
    })
}

/// The eavesdropper whose row is most correlated with Alice's, as
/// `(1-based index, |ρ|)`. Ties go to the smaller index.
pub fn best_single_eve(trace: &ProbeTrace) -> Result<(usize, f64)> {
    if trace.eve_count() == 0 {
        return Err(Error::AttackUndefined);
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, row) in trace.eves().iter().enumerate() {
        let rho = match pearson(trace.alice(), row) {
            Ok(r) => r.abs(),
            Err(Error::UndefinedCorrelation("x")) => return Err(Error::UndefinedCorrelation("alice")),
            // a constant Eve row carries no information
            Err(Error::UndefinedCorrelation(_)) => 0.0,
            Err(e) => return Err(e),
        };
        if best.is_none_or(|(_, b)| rho > b) {
            best = Some((k + 1, rho));
        }
    }
    Ok(best.expect("at least one eve"))
}
