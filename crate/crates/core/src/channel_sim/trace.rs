use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Geometry, LargeScaleParams, RadioParams, ScenarioSpec};
use crate::error::{Error, Result};

/// A participant in a probing campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
    /// Eavesdropper, 1-based.
    Eve(usize),
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => f.write_str("alice"),
            Party::Bob => f.write_str("bob"),
            Party::Eve(m) => write!(f, "eve{m}"),
        }
    }
}

/// Where a trace came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TraceSource {
    Simulated {
        scenario: ScenarioSpec,
        geometry: Geometry,
        large_scale: LargeScaleParams,
        radio: RadioParams,
    },
    Ingested {
        path: String,
        dropped_rounds: usize,
    },
    /// Produced from another trace by a preprocessing step.
    Derived(String),
}

/// Synchronised per-round RSSI for Alice, Bob and the eavesdroppers.
///
/// Row 0 holds Bob→Alice measurements, row 1 Alice→Bob, and row `1 + m`
/// the Bob→Eve `m` measurements of the packet Alice measured.
#[derive(Debug, Clone)]
pub struct ProbeTrace {
    rssi: Vec<Vec<f64>>,
    timestamps: Vec<f64>,
    source: TraceSource,
}

/// Data equality: RSSI rows and timestamps. The source tag is ignored.
impl PartialEq for ProbeTrace {
    fn eq(&self, other: &Self) -> bool {
        self.rssi == other.rssi && self.timestamps == other.timestamps
    }
}

impl ProbeTrace {
    pub fn new(rssi: Vec<Vec<f64>>, timestamps: Vec<f64>, source: TraceSource) -> Result<Self> {
        if rssi.len() < 2 {
            return Err(Error::Schema(format!(
                "a trace needs Alice and Bob rows, got {} row(s)",
                rssi.len()
            )));
        }
        let n = timestamps.len();
        for (i, row) in rssi.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Alignment {
                    left: n,
                    right: row.len(),
                });
            }
            if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!(
                    "non-finite RSSI in row {} at round {bad}",
                    party_of(i)
                )));
            }
        }
        Ok(ProbeTrace {
            rssi,
            timestamps,
            source,
        })
    }

    /// Same timestamps, new rows; the source becomes [`TraceSource::Derived`].
    pub fn derive(&self, rssi: Vec<Vec<f64>>, note: impl Into<String>) -> Result<Self> {
        ProbeTrace::new(rssi, self.timestamps.clone(), TraceSource::Derived(note.into()))
    }

    /// Number of probing rounds.
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn eve_count(&self) -> usize {
        self.rssi.len() - 2
    }

    pub fn parties(&self) -> Vec<Party> {
        (0..self.rssi.len()).map(party_of).collect()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rssi
    }

    pub fn alice(&self) -> &[f64] {
        &self.rssi[0]
    }

    pub fn bob(&self) -> &[f64] {
        &self.rssi[1]
    }

    /// Eve rows, in order.
    pub fn eves(&self) -> &[Vec<f64>] {
        &self.rssi[2..]
    }

    /// Eve `m`, 1-based.
    pub fn eve(&self, m: usize) -> Result<&[f64]> {
        if m == 0 || m > self.eve_count() {
            return Err(Error::Index {
                what: "eavesdropper",
                index: m,
                max: self.eve_count(),
            });
        }
        Ok(&self.rssi[m + 1])
    }

    pub fn row(&self, party: Party) -> Result<&[f64]> {
        match party {
            Party::Alice => Ok(self.alice()),
            Party::Bob => Ok(self.bob()),
            Party::Eve(m) => self.eve(m),
        }
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn source(&self) -> &TraceSource {
        &self.source
    }

    /// Rounds dropped at ingestion because a party's cell was missing.
    pub fn dropped_rounds(&self) -> usize {
        match self.source {
            TraceSource::Ingested { dropped_rounds, .. } => dropped_rounds,
            _ => 0,
        }
    }
}

fn party_of(row: usize) -> Party {
    match row {
        0 => Party::Alice,
        1 => Party::Bob,
        m => Party::Eve(m - 1),
    }
}

/// Column names used when reading a trace CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub round: Option<String>,
    pub timestamp: Option<String>,
    pub alice: String,
    pub bob: String,
    /// Explicit Eve columns; `None` picks up `eve1_dbm`, `eve2_dbm`, … in
    /// order until one is absent.
    pub eves: Option<Vec<String>>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            round: Some("round".into()),
            timestamp: Some("timestamp_s".into()),
            alice: "alice_dbm".into(),
            bob: "bob_dbm".into(),
            eves: None,
        }
    }
}

/// Writes the canonical CSV layout:
/// `round,timestamp_s,alice_dbm,bob_dbm,eve1_dbm,...` with LF endings.
pub fn write_trace<W: Write>(trace: &ProbeTrace, mut out: W) -> std::io::Result<()> {
    let mut header = String::from("round,timestamp_s,alice_dbm,bob_dbm");
    for m in 1..=trace.eve_count() {
        header.push_str(&format!(",eve{m}_dbm"));
    }
    header.push('\n');
    out.write_all(header.as_bytes())?;
    let mut line = String::new();
    for n in 0..trace.len() {
        line.clear();
        line.push_str(&format!("{n},{}", trace.timestamps[n]));
        for row in &trace.rssi {
            line.push_str(&format!(",{}", row[n]));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

/// Writes a trace file; see [`write_trace`] for the layout.
pub fn export_trace(trace: &ProbeTrace, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(trace, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Reads a trace CSV.
///
/// Rounds with an empty cell for any party are dropped and counted; any
/// other unparsable value is an error carrying its line number.
pub fn ingest_trace(path: &Path, mapping: &ColumnMap) -> Result<ProbeTrace> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);

    let alice = find(&mapping.alice).ok_or_else(|| Error::Schema(format!("missing column `{}`", mapping.alice)))?;
    let bob = find(&mapping.bob).ok_or_else(|| Error::Schema(format!("missing column `{}`", mapping.bob)))?;
    let eves: Vec<usize> = match &mapping.eves {
        Some(names) => names
            .iter()
            .map(|n| find(n).ok_or_else(|| Error::Schema(format!("missing column `{n}`"))))
            .collect::<Result<_>>()?,
        None => (1..).map_while(|m| find(&format!("eve{m}_dbm"))).collect(),
    };
    let round_col = match &mapping.round {
        Some(n) => Some(find(n).ok_or_else(|| Error::Schema(format!("missing column `{n}`")))?),
        None => None,
    };
    let time_col = match &mapping.timestamp {
        Some(n) => Some(find(n).ok_or_else(|| Error::Schema(format!("missing column `{n}`")))?),
        None => None,
    };
    let party_cols: Vec<usize> = [alice, bob].into_iter().chain(eves).collect();

    struct Round {
        index: u64,
        line: u64,
        time: Option<f64>,
        values: Vec<f64>,
    }
    let mut rounds = Vec::new();
    let mut dropped = 0;
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(k as u64 + 2, |p| p.line());
        let cell = |c: usize| record.get(c).map(str::trim).unwrap_or("");
        let number = |c: usize| -> Result<f64> {
            let s = cell(c);
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("column `{}`: `{s}` is not a finite number", &headers[c]),
                })
        };
        let index = match round_col {
            Some(c) => cell(c).parse::<u64>().map_err(|_| Error::Parse {
                line,
                msg: format!("round `{}` is not a non-negative integer", cell(c)),
            })?,
            None => k as u64,
        };
        let time = time_col.map(number).transpose()?;
        if party_cols.iter().any(|&c| cell(c).is_empty()) {
            dropped += 1;
            continue;
        }
        let values = party_cols.iter().map(|&c| number(c)).collect::<Result<Vec<_>>>()?;
        rounds.push(Round {
            index,
            line,
            time,
            values,
        });
    }

    rounds.sort_by_key(|r| r.index);
    if let Some(w) = rounds.windows(2).find(|w| w[0].index == w[1].index) {
        return Err(Error::Parse {
            line: w[1].line,
            msg: format!("duplicate round {}", w[1].index),
        });
    }

    let mut rows = vec![Vec::with_capacity(rounds.len()); party_cols.len()];
    let mut timestamps = Vec::with_capacity(rounds.len());
    for r in &rounds {
        for (row, v) in rows.iter_mut().zip(&r.values) {
            row.push(*v);
        }
        timestamps.push(r.time.unwrap_or(r.index as f64));
    }
    if dropped > 0 {
        log::info!("{}: dropped {dropped} incomplete round(s)", path.display());
    }
    ProbeTrace::new(
        rows,
        timestamps,
        TraceSource::Ingested {
            path: path.display().to_string(),
            dropped_rounds: dropped,
        },
    )
}
