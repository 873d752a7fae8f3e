use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ArdExperiment;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "experiment_id",
    "epsilon",
    "n_reps",
    "mean",
    "std_error",
    "ci_lo",
    "ci_hi",
    "target",
    "truncation_bound",
    "master_seed",
];

/// One flat CSV line: an experiment at one epsilon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment_id: String,
    pub epsilon: f64,
    pub n_reps: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub target: Option<f64>,
    pub truncation_bound: f64,
    pub master_seed: u64,
}

impl CsvRow {
    pub fn rows(exp: &ArdExperiment) -> Vec<CsvRow> {
        exp.estimates
            .iter()
            .map(|e| CsvRow {
                experiment_id: exp.plan.experiment_id.clone(),
                epsilon: e.epsilon,
                n_reps: e.estimate.n_reps,
                mean: e.estimate.mean,
                std_error: e.estimate.std_error,
                ci_lo: e.estimate.ci95.0,
                ci_hi: e.estimate.ci95.1,
                target: exp.summary.target,
                truncation_bound: e.estimate.truncation_bound_total,
                master_seed: e.estimate.seed_lineage.master_seed,
            })
            .collect()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        context: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        context: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path).map_err(io_err(path))?);
    serde_json::from_reader(r).map_err(|source| Error::Json {
        context: path.to_path_buf(),
        source,
    })
}

/// Full experiment, including plan and seed lineage, as JSON.
pub fn persist_results(results: &ArdExperiment, path: impl AsRef<Path>) -> Result<()> {
    write_json(results, path.as_ref())
}

pub fn load_results(path: impl AsRef<Path>) -> Result<ArdExperiment> {
    read_json(path.as_ref())
}

/// Flat CSV with the fixed column order of [`CSV_HEADER`].
pub fn write_csv(results: &[ArdExperiment], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        context: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for exp in results {
        for row in CsvRow::rows(exp) {
            w.serialize(row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        context: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if !header.iter().eq(CSV_HEADER) {
        return Err(crate::error::invalid(format!(
            "{}: unexpected CSV header {:?}",
            path.display(),
            header
        )));
    }
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}
