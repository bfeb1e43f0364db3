use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::pipeline::{CellOutcome, CellResult, SweepResult};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn mkdir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn completed(result: &SweepResult) -> impl Iterator<Item = (&CellOutcome, &CellResult)> {
    result.cells.iter().filter_map(|c| c.result.as_ref().map(|r| (c, r)))
}

fn key(cell: &CellOutcome) -> String {
    format!("{},{},{}", cell.scenario, cell.r_wavelengths, cell.seed)
}

fn capacity_table(result: &SweepResult) -> String {
    let mut out = format!(
        "scenario,r_wavelengths,seed,{},feasible\n",
        MetricsReport::csv_header(result.config.eves)
    );
    for (cell, res) in completed(result) {
        out += &format!("{},{},{}\n", key(cell), res.raw.csv_row(), res.feasible);
    }
    out
}

fn mwa_table(result: &SweepResult) -> String {
    let mut out = String::from("scenario,r_wavelengths,seed");
    for w in &result.config.mwa_windows {
        out += &format!(",r_ck_w{w}");
    }
    out.push('\n');
    for (cell, res) in completed(result) {
        out += &key(cell);
        for entry in &res.mwa {
            out += &format!(",{}", opt(entry.report.r_ck));
        }
        out.push('\n');
    }
    out
}

fn filter_table(result: &SweepResult) -> String {
    let mut out = String::from(
        "scenario,r_wavelengths,seed,z0,c_k_raw,c_k_general,c_k_worst,r_ck_raw,r_ck_general,r_ck_worst,cmi_ec_general,cmi_ec_worst\n",
    );
    for (cell, res) in completed(result) {
        out += &format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            key(cell),
            res.filter.z0,
            res.raw.c_k,
            res.post_general.c_k,
            res.post_worst.c_k,
            opt(res.raw.r_ck),
            opt(res.post_general.r_ck),
            opt(res.post_worst.r_ck),
            res.post_general.cmi_ec,
            res.post_worst.cmi_ec,
        );
    }
    out
}

fn kdr_table(result: &SweepResult) -> String {
    let eves = result.config.eves;
    let mut out = String::from("scenario,r_wavelengths,seed,kdr_ab_before,kdr_ab_after,kdr_aec_before,kdr_aec_after");
    for m in 1..=eves {
        out += &format!(",kdr_ae{m}_before,kdr_ae{m}_after");
    }
    out += ",ab_reconcilable,aec_reconcilable\n";
    for (cell, res) in completed(result) {
        let k = &res.kdr;
        out += &format!(
            "{},{},{},{},{}",
            key(cell),
            k.ab_before,
            k.ab_after,
            k.aec_before,
            k.aec_after
        );
        for (b, a) in k.aem_before.iter().zip(&k.aem_after) {
            out += &format!(",{b},{a}");
        }
        out += &format!(",{},{}\n", k.ab_reconcilable(), k.aec_reconcilable());
    }
    out
}

fn curve_table(res: &CellResult) -> String {
    let mut out = String::from("z,c_k_general,c_k_worst,r_ck_general,r_ck_worst\n");
    for p in &res.curve {
        out += &format!(
            "{},{},{},{},{}\n",
            p.z,
            p.c_k_general,
            p.c_k_worst,
            opt(p.r_ck_general),
            opt(p.r_ck_worst)
        );
    }
    out
}

fn manifest(result: &SweepResult) -> String {
    let cells: Vec<_> = result
        .cells
        .iter()
        .map(|c| {
            json!({
                "id": c.id(),
                "scenario": c.scenario.to_string(),
                "r_wavelengths": c.r_wavelengths,
                "seed": c.seed,
                "status": if c.result.is_some() { "ok" } else { "failed" },
                "failure": c.failure,
            })
        })
        .collect();
    let doc = json!({
        "crate_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": result.config.digest(),
        "seeds": result.config.seeds,
        "config": result.config,
        "cells": cells,
    });
    serde_json::to_string_pretty(&doc).expect("manifest serializes") + "\n"
}

/// Writes the report tree under `dir`. Output bytes depend only on `result`.
///
/// Layout: `manifest.json`, `capacity.csv`, `intact_ratio_mwa.csv`,
/// `filter.csv`, `kdr.csv`, `randomness/<cell>.json`, `curves/<cell>.csv`.
/// A result without cells produces the manifest alone.
pub fn emit_reports(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    mkdir(dir)?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: String| -> Result<()> {
        write(path.clone(), &text)?;
        written.push(path);
        Ok(())
    };
    put(dir.join("manifest.json"), manifest(result))?;
    if result.cells.is_empty() {
        return Ok(written);
    }
    put(dir.join("capacity.csv"), capacity_table(result))?;
    put(dir.join("intact_ratio_mwa.csv"), mwa_table(result))?;
    put(dir.join("filter.csv"), filter_table(result))?;
    put(dir.join("kdr.csv"), kdr_table(result))?;
    let rdir = dir.join("randomness");
    let cdir = dir.join("curves");
    mkdir(&rdir)?;
    mkdir(&cdir)?;
    for (cell, res) in completed(result) {
        let mut doc = res.randomness.to_json();
        doc["bob_key_hex"] = json!(res.bob_key);
        let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
        put(rdir.join(format!("{}.json", cell.id())), text)?;
        put(cdir.join(format!("{}.csv", cell.id())), curve_table(res))?;
    }
    Ok(written)
}
