use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::run::ResultRow;
use crate::{Error, Result};

/// CSV header of [`DifferenceRow`].
pub const DIFFERENCE_COLUMNS: [&str; 8] = [
    "snr_db",
    "method",
    "baseline",
    "seed",
    "p_hat",
    "baseline_p_hat",
    "difference",
    "combined_std_err",
];

/// Signed difference of one row against the baseline row of the same SNR and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceRow {
    pub snr_db: f64,
    pub method: Method,
    pub baseline: Method,
    pub seed: u64,
    pub p_hat: f64,
    pub baseline_p_hat: f64,
    /// `p_hat - baseline_p_hat`.
    pub difference: f64,
    /// `sqrt(se^2 + se_baseline^2)`.
    pub combined_std_err: f64,
}

/// Differences `p_hat(method) - p_hat(baseline)` per (SNR, seed), in input order.
pub fn compare_methods(rows: &[ResultRow], baseline: Method) -> Result<Vec<DifferenceRow>> {
    let mut base: BTreeMap<(u64, u64), &ResultRow> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.method == baseline) {
        if base.insert((row.snr_db.to_bits(), row.seed), row).is_some() {
            return Err(Error::invalid(format!(
                "duplicate {baseline} rows at snr {} dB, seed {}",
                row.snr_db, row.seed
            )));
        }
    }
    rows.iter()
        .map(|row| {
            let b = base.get(&(row.snr_db.to_bits(), row.seed)).ok_or_else(|| {
                Error::invalid(format!(
                    "no {baseline} row at snr {} dB, seed {}",
                    row.snr_db, row.seed
                ))
            })?;
            Ok(DifferenceRow {
                snr_db: row.snr_db,
                method: row.method,
                baseline,
                seed: row.seed,
                p_hat: row.p_hat,
                baseline_p_hat: b.p_hat,
                difference: row.p_hat - b.p_hat,
                combined_std_err: row.std_err.hypot(b.std_err),
            })
        })
        .collect()
}
