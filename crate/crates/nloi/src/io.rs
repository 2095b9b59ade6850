//! CSV ingestion and emission for matrices, partitions, and node weights.
//!
//! Matrix files are plain CSV, n rows by n columns of decimal literals with
//! no row labels; a single header row is tolerated and auto-detected (any
//! non-numeric field in the first row). Partition files hold either a single
//! column of node labels in observation order, or two columns `index,label`
//! where the index column must cover 0..n-1 or 1..n exactly. Labels may be
//! arbitrary tokens; they are mapped to 1..=K in order of first appearance
//! and the original tokens are retained for weight lookup. Weight files hold
//! either one weight per node in node order, or `label,weight` rows keyed by
//! the partition's original tokens.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::matrix::{NodeWeights, Partition, PartitionError, ProximityMatrix};
use crate::MatrixError;

/// Ingestion tolerance applied to asymmetry and diagonal deviations unless
/// the caller overrides it: absolute 1e-9 on values scaled to [0, 1].
pub const DEFAULT_ASYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed CSV: {msg}")]
    Csv { path: String, msg: String },
    #[error("{path}: row {row}, column {col}: cannot parse {token:?} as a number")]
    NumberParse { path: String, row: usize, col: usize, token: String },
    #[error("{path}: row {row}: expected {expected} fields, found {got}")]
    FieldCount { path: String, row: usize, expected: usize, got: usize },
    #[error("{path}: row {row}: cannot parse observation index {token:?}")]
    IndexParse { path: String, row: usize, token: String },
    #[error("{path}: observation indices must cover 0..n-1 or 1..n exactly ({detail})")]
    BadIndexSet { path: String, detail: String },
    #[error("{path}: file holds no data rows")]
    Empty { path: String },
    #[error("{path}: {source}")]
    Matrix {
        path: String,
        #[source]
        source: MatrixError,
    },
    #[error("{path}: {source}")]
    Partition {
        path: String,
        #[source]
        source: PartitionError,
    },
    #[error("{path}: row {row}: cannot parse weight {token:?}")]
    WeightParse { path: String, row: usize, token: String },
    #[error("{path}: no weight supplied for node {token:?}")]
    WeightMissing { path: String, token: String },
    #[error("{path}: expected {expected} node weights, found {got}")]
    WeightCount { path: String, expected: usize, got: usize },
}

impl ReadError {
    /// True for filesystem-level failures, false for content problems.
    /// The CLI maps the former to exit 1 and the latter to exit 2.
    pub fn is_io(&self) -> bool {
        matches!(self, ReadError::Io { .. })
    }
}

/// A partition read from disk: canonical labels plus the original node
/// tokens, `node_names[k - 1]` being the token first seen for node k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionFile {
    pub partition: Partition,
    pub node_names: Vec<String>,
}

fn open(path: &Path) -> Result<File, ReadError> {
    File::open(path).map_err(|source| ReadError::Io { path: display(path), source })
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn csv_records(reader: impl Read, path: &str) -> Result<Vec<csv::StringRecord>, ReadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| ReadError::Csv { path: path.to_string(), msg: e.to_string() })?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    Ok(records)
}

/// Reads a proximity matrix with the default ingestion tolerance.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<ProximityMatrix<f64>, ReadError> {
    read_matrix_csv_with_tolerance(path, DEFAULT_ASYMMETRY_TOLERANCE)
}

pub fn read_matrix_csv_with_tolerance(
    path: impl AsRef<Path>,
    tolerance: f64,
) -> Result<ProximityMatrix<f64>, ReadError> {
    let path = path.as_ref();
    let file = open(path)?;
    read_matrix(file, &display(path), tolerance)
}

/// Reader-level matrix ingestion; `path` only labels error messages.
pub fn read_matrix(
    reader: impl Read,
    path: &str,
    tolerance: f64,
) -> Result<ProximityMatrix<f64>, ReadError> {
    let mut records = csv_records(reader, path)?;
    let header = records
        .first()
        .is_some_and(|rec| rec.iter().any(|f| f.parse::<f64>().is_err()));
    if header {
        records.remove(0);
    }
    if records.is_empty() {
        return Err(ReadError::Empty { path: path.to_string() });
    }
    let mut rows = Vec::with_capacity(records.len());
    for (row, rec) in records.iter().enumerate() {
        let mut vals = Vec::with_capacity(rec.len());
        for (col, field) in rec.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|_| ReadError::NumberParse {
                path: path.to_string(),
                row,
                col,
                token: field.to_string(),
            })?;
            vals.push(v);
        }
        rows.push(vals);
    }
    ProximityMatrix::from_raw(&rows, tolerance)
        .map_err(|source| ReadError::Matrix { path: path.to_string(), source })
}

pub fn read_partition_csv(path: impl AsRef<Path>) -> Result<PartitionFile, ReadError> {
    let path = path.as_ref();
    let file = open(path)?;
    read_partition(file, &display(path))
}

/// Reader-level partition ingestion; `path` only labels error messages.
pub fn read_partition(reader: impl Read, path: &str) -> Result<PartitionFile, ReadError> {
    let mut records = csv_records(reader, path)?;
    if let Some(first) = records.first() {
        let is_header = match first.len() {
            // `index,label`-style heading: the index field is not a number.
            2 => first.get(0).is_some_and(|f| f.parse::<usize>().is_err()),
            _ => first.get(0).is_some_and(|f| f.eq_ignore_ascii_case("label")),
        };
        if is_header {
            records.remove(0);
        }
    }
    if records.is_empty() {
        return Err(ReadError::Empty { path: path.to_string() });
    }
    let width = records[0].len();
    if width != 1 && width != 2 {
        return Err(ReadError::FieldCount { path: path.to_string(), row: 0, expected: 2, got: width });
    }
    let mut tokens: Vec<String> = Vec::with_capacity(records.len());
    if width == 1 {
        for rec in &records {
            tokens.push(rec.get(0).unwrap_or("").to_string());
        }
    } else {
        let mut indexed = Vec::with_capacity(records.len());
        for (row, rec) in records.iter().enumerate() {
            if rec.len() != 2 {
                return Err(ReadError::FieldCount {
                    path: path.to_string(),
                    row,
                    expected: 2,
                    got: rec.len(),
                });
            }
            let idx_tok = rec.get(0).unwrap_or("");
            let idx = idx_tok.parse::<usize>().map_err(|_| ReadError::IndexParse {
                path: path.to_string(),
                row,
                token: idx_tok.to_string(),
            })?;
            indexed.push((idx, rec.get(1).unwrap_or("").to_string()));
        }
        indexed.sort_by_key(|&(idx, _)| idx);
        let n = indexed.len();
        let base = indexed[0].0;
        if base > 1 {
            return Err(ReadError::BadIndexSet {
                path: path.to_string(),
                detail: format!("smallest index is {base}"),
            });
        }
        for (offset, &(idx, _)) in indexed.iter().enumerate() {
            if idx != base + offset {
                return Err(ReadError::BadIndexSet {
                    path: path.to_string(),
                    detail: format!("expected index {}, found {idx}", base + offset),
                });
            }
        }
        debug_assert_eq!(indexed.len(), n);
        tokens.extend(indexed.into_iter().map(|(_, tok)| tok));
    }

    let mut node_names: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(tokens.len());
    for token in &tokens {
        let label = match node_names.iter().position(|t| t == token) {
            Some(pos) => pos + 1,
            None => {
                node_names.push(token.clone());
                node_names.len()
            }
        };
        labels.push(label);
    }
    let k = node_names.len();
    let partition = Partition::new(labels, k)
        .map_err(|source| ReadError::Partition { path: path.to_string(), source })?;
    Ok(PartitionFile { partition, node_names })
}

pub fn read_weights_csv(
    path: impl AsRef<Path>,
    partition: &PartitionFile,
) -> Result<NodeWeights<f64>, ReadError> {
    let path = path.as_ref();
    let file = open(path)?;
    read_weights(file, &display(path), partition)
}

/// Reader-level weight ingestion; `path` only labels error messages.
pub fn read_weights(
    reader: impl Read,
    path: &str,
    partition: &PartitionFile,
) -> Result<NodeWeights<f64>, ReadError> {
    let mut records = csv_records(reader, path)?;
    if let Some(first) = records.first() {
        let weight_field = if first.len() >= 2 { first.get(1) } else { first.get(0) };
        if weight_field.is_some_and(|f| f.parse::<f64>().is_err()) {
            records.remove(0);
        }
    }
    if records.is_empty() {
        return Err(ReadError::Empty { path: path.to_string() });
    }
    let k = partition.node_names.len();
    let parse = |row: usize, token: &str| -> Result<f64, ReadError> {
        token.parse::<f64>().map_err(|_| ReadError::WeightParse {
            path: path.to_string(),
            row,
            token: token.to_string(),
        })
    };
    let weights = if records[0].len() >= 2 {
        let mut by_token: Vec<Option<f64>> = vec![None; k];
        for (row, rec) in records.iter().enumerate() {
            let token = rec.get(0).unwrap_or("");
            let value = parse(row, rec.get(1).unwrap_or(""))?;
            if let Some(pos) = partition.node_names.iter().position(|t| t == token) {
                by_token[pos] = Some(value);
            }
        }
        let mut out = Vec::with_capacity(k);
        for (pos, w) in by_token.into_iter().enumerate() {
            out.push(w.ok_or_else(|| ReadError::WeightMissing {
                path: path.to_string(),
                token: partition.node_names[pos].clone(),
            })?);
        }
        out
    } else {
        if records.len() != k {
            return Err(ReadError::WeightCount {
                path: path.to_string(),
                expected: k,
                got: records.len(),
            });
        }
        let mut out = Vec::with_capacity(k);
        for (row, rec) in records.iter().enumerate() {
            out.push(parse(row, rec.get(0).unwrap_or(""))?);
        }
        out
    };
    Ok(NodeWeights::PerNode(weights))
}

/// Writes a matrix as headerless CSV. Floats use the shortest decimal form
/// that parses back to the identical bits, so a write/read round trip is
/// exact.
pub fn write_matrix(writer: impl Write, matrix: &ProximityMatrix<f64>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for i in 0..matrix.n() {
        let row: Vec<String> = matrix.row(i).iter().map(|v| format!("{v}")).collect();
        w.write_record(&row)?;
    }
    w.flush()
}

/// Writes a partition as a single column of labels in observation order.
pub fn write_partition(writer: impl Write, partition: &Partition) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for &label in partition.labels() {
        w.write_record([label.to_string()])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn matrix_from(text: &str) -> Result<ProximityMatrix<f64>, ReadError> {
        read_matrix(Cursor::new(text), "test.csv", DEFAULT_ASYMMETRY_TOLERANCE)
    }

    #[test]
    fn reads_plain_matrix() {
        let m = matrix_from("1,0.8,0.2\n0.8,1,0.6\n0.2,0.6,1\n").unwrap();
        assert_eq!(m.pair_values(), vec![0.8, 0.2, 0.6]);
    }

    #[test]
    fn skips_header_row() {
        let m = matrix_from("a,b\n1,0.5\n0.5,1\n").unwrap();
        assert_eq!(m.get(0, 1), 0.5);
    }

    #[test]
    fn numeric_first_row_is_data() {
        // Were the sole row eaten as a header this would report an empty
        // file; keeping it as data trips the minimum-size check instead.
        let err = matrix_from("1,0.5\n").unwrap_err();
        assert!(matches!(err, ReadError::Matrix { source: MatrixError::TooSmall(1), .. }));
    }

    #[test]
    fn bad_number_is_reported_with_coordinates() {
        let err = matrix_from("1,0.5\nx,1\n").unwrap_err();
        match err {
            ReadError::NumberParse { row, col, token, .. } => {
                assert_eq!((row, col, token.as_str()), (1, 0, "x"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(!matrix_from("x,1\n1,x\n").unwrap_err().is_io());
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_matrix_csv("/nonexistent/matrix.csv").unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("/nonexistent/matrix.csv"));
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = matrix_from("1,0.8,0.2\n0.8,1,0.6123456789012345\n0.2,0.6123456789012345,1\n")
            .unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        let back = read_matrix(Cursor::new(buf), "rt.csv", 0.0).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn reads_single_column_partition() {
        let p = read_partition(Cursor::new("1\n1\n2\n"), "p.csv").unwrap();
        assert_eq!(p.partition.labels(), &[1, 1, 2]);
        assert_eq!(p.node_names, vec!["1", "2"]);
    }

    #[test]
    fn reads_indexed_partition_in_any_order() {
        let p = read_partition(Cursor::new("index,label\n2,b\n0,a\n1,a\n"), "p.csv").unwrap();
        assert_eq!(p.partition.labels(), &[1, 1, 2]);
        assert_eq!(p.node_names, vec!["a", "b"]);
    }

    #[test]
    fn one_based_indices_accepted() {
        let p = read_partition(Cursor::new("1,x\n2,y\n3,x\n"), "p.csv").unwrap();
        assert_eq!(p.partition.labels(), &[1, 2, 1]);
    }

    #[test]
    fn gapped_indices_rejected() {
        let err = read_partition(Cursor::new("0,a\n2,b\n"), "p.csv").unwrap_err();
        assert!(matches!(err, ReadError::BadIndexSet { .. }));
    }

    #[test]
    fn arbitrary_tokens_map_by_first_appearance() {
        let p = read_partition(Cursor::new("setosa\nvirginica\nsetosa\n"), "p.csv").unwrap();
        assert_eq!(p.partition.labels(), &[1, 2, 1]);
        assert_eq!(p.node_names, vec!["setosa", "virginica"]);
    }

    #[test]
    fn partition_round_trip() {
        let p = read_partition(Cursor::new("1\n2\n1\n"), "p.csv").unwrap();
        let mut buf = Vec::new();
        write_partition(&mut buf, &p.partition).unwrap();
        let back = read_partition(Cursor::new(buf), "rt.csv").unwrap();
        assert_eq!(back.partition, p.partition);
    }

    #[test]
    fn weights_by_token() {
        let p = read_partition(Cursor::new("b\na\nb\n"), "p.csv").unwrap();
        let w = read_weights(Cursor::new("label,weight\na,0.5\nb,0.9\n"), "w.csv", &p).unwrap();
        // Node 1 is token "b" (first appearance), so its weight leads.
        assert_eq!(w, NodeWeights::PerNode(vec![0.9, 0.5]));
    }

    #[test]
    fn weights_single_column_in_node_order() {
        let p = read_partition(Cursor::new("1\n1\n2\n"), "p.csv").unwrap();
        let w = read_weights(Cursor::new("0.8\n0.6\n"), "w.csv", &p).unwrap();
        assert_eq!(w, NodeWeights::PerNode(vec![0.8, 0.6]));
    }

    #[test]
    fn weights_errors() {
        let p = read_partition(Cursor::new("a\nb\n"), "p.csv").unwrap();
        let err = read_weights(Cursor::new("a,0.5\n"), "w.csv", &p).unwrap_err();
        assert!(matches!(err, ReadError::WeightMissing { .. }));
        let err = read_weights(Cursor::new("0.5\n"), "w.csv", &p).unwrap_err();
        assert!(matches!(err, ReadError::WeightCount { expected: 2, got: 1, .. }));
    }

    #[test]
    fn blank_lines_are_ignored() {
        let m = matrix_from("1,0.5\n\n0.5,1\n\n").unwrap();
        assert_eq!(m.n(), 2);
    }
}
