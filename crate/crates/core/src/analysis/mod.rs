//! Monte Carlo diagnostics: forward/dual cross-checks, lineage moments,
//! quadratic variation and local-averaging gaps.

mod averaging;
mod duality;
mod lineage;
mod qv;
pub mod stats;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use averaging::{averaging_gap, averaging_gap_mc};
pub use duality::{duality_check, DualityReport, DualitySetup};
pub use lineage::{
    branch_rate, first_branch_ks, jump_magnitudes, lineage_msd, run_lineages, LineageStudy, MsdPoint,
};
pub use qv::{qv_coefficient, qv_estimate, qv_series, QvEstimate, QvSeries};

/// A Monte Carlo estimate with the information needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n_replicates: usize,
    pub seed: u64,
    pub meta: serde_json::Value,
}

impl McReport {
    pub fn from_samples(samples: &[f64], seed: u64, meta: serde_json::Value) -> Self {
        let m = stats::mean_se(samples);
        Self {
            estimate: m.mean,
            std_error: if m.std_error.is_nan() { 0.0 } else { m.std_error },
            n_replicates: samples.len(),
            seed,
            meta,
        }
    }

    pub fn z_against(&self, other: &McReport) -> f64 {
        stats::z_score(self.estimate, self.std_error, other.estimate, other.std_error)
    }
}

/// One line of a CSV summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: Option<f64>,
}

pub fn write_report_csv<W: Write>(out: &mut W, rows: &[ReportRow]) -> Result<()> {
    writeln!(out, "experiment,estimate,std_error,z")?;
    for r in rows {
        let z = r.z.map(|z| z.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{}", r.experiment, r.estimate, r.std_error, z)?;
    }
    Ok(())
}
