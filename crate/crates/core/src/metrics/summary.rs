//! Benchmark records and repetition statistics.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::SummaryStats;

/// One benchmark repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub app: String,
    pub method: String,
    /// Sample count `n` or representation size `r`.
    pub param: u64,
    pub repetition: u32,
    pub wasserstein: f64,
    pub runtime_ms: f64,
    pub seed: u64,
}

pub const RECORD_COLUMNS: [&str; 7] = [
    "app",
    "method",
    "param",
    "repetition",
    "wasserstein",
    "runtime_ms",
    "seed",
];

pub fn write_records<W: Write>(w: W, records: &[RunRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if records.is_empty() {
        wtr.write_record(RECORD_COLUMNS)?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(RECORD_COLUMNS) {
        return Err(Error::Format(format!(
            "expected columns {}, got {}",
            RECORD_COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize()
        .map(|r| r.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionSummary {
    pub records: Vec<RunRecord>,
    pub wasserstein_mean: f64,
    pub wasserstein_std: f64,
    pub runtime_mean_ms: f64,
    pub runtime_std_ms: f64,
}

impl RepetitionSummary {
    pub fn count(&self) -> usize {
        self.records.len()
    }
}

/// Mean and unbiased std-dev of W1 and run time over repetitions.
pub fn summarize(records: &[RunRecord]) -> Result<RepetitionSummary> {
    if records.len() < 2 {
        return Err(Error::argument(format!(
            "summary needs at least 2 repetitions, got {}",
            records.len()
        )));
    }
    let w: Vec<f64> = records.iter().map(|r| r.wasserstein).collect();
    let t: Vec<f64> = records.iter().map(|r| r.runtime_ms).collect();
    let (ws, ts) = (SummaryStats::from_values(&w)?, SummaryStats::from_values(&t)?);
    Ok(RepetitionSummary {
        records: records.to_vec(),
        wasserstein_mean: ws.mean,
        wasserstein_std: ws.std_dev(),
        runtime_mean_ms: ts.mean,
        runtime_std_ms: ts.std_dev(),
    })
}
