use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::McResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "experiment_id",
    "estimator",
    "n",
    "M",
    "mean_error",
    "rmse",
    "variance",
    "on_graph_mean",
    "failures",
    "seconds",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv(result: &McResult, path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err)?;
    wr.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in &result.rows {
        wr.serialize(row).map_err(csv_err)?;
    }
    wr.flush().map_err(io_err(path))
}

/// Writes any serializable value as pretty JSON.
pub fn write_json_value<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json(result: &McResult, path: &Path) -> Result<()> {
    write_json_value(result, path)
}

pub fn read_json(path: &Path) -> Result<McResult> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit(result: &McResult, format: Format, path: &Path) -> Result<()> {
    match format {
        Format::Csv => write_csv(result, path),
        Format::Json => write_json(result, path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_mc, EstimatorKind, EstimatorSpec, ExperimentSpec, ModelKind};
    use crate::parallel::Execution;

    fn result() -> McResult {
        let spec = ExperimentSpec {
            id: "emit".into(),
            model: ModelKind::Ppp,
            g: "const:0".into(),
            noise: "exp:1".into(),
            w: "const:1".into(),
            estimators: vec![
                EstimatorSpec::new("mle", EstimatorKind::Mle),
                EstimatorSpec::new("blockwise", EstimatorKind::Blockwise),
            ],
            n_grid: vec![50, 100, 200],
            replications: 5,
            master_seed: 1,
            band_height: None,
            keep_replicates: true,
            record_timing: false,
            output: None,
        };
        run_mc(&spec, Execution::sequential()).unwrap()
    }

    #[test]
    fn csv_rows_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let res = result();
        emit(&res, Format::Csv, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.count(), 2 * 3);

        let mut empty = res.clone();
        empty.rows.clear();
        write_csv(&empty, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let res = result();
        emit(&res, Format::from_path(&path), &path).unwrap();
        assert_eq!(read_json(&path).unwrap(), res);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let res = result();
        let err = write_csv(&res, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
        let err = read_json(Path::new("/nonexistent-dir/x.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.json"));
    }
}
