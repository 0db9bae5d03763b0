use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::encoding::ClassVector;
use crate::learners::FeatureMatrix;

fn default_delimiter() -> char {
    ','
}

/// How to read a delimited file. All columns other than the label and the
/// optional ID column are numeric features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvOptions {
    pub label_column: String,
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self { label_column: label_column.into(), id_column: None, delimiter: ',' }
    }

    pub fn delimiter(mut self, d: char) -> Self {
        self.delimiter = d;
        self
    }

    pub fn id_column(mut self, name: impl Into<String>) -> Self {
        self.id_column = Some(name.into());
        self
    }

    fn delimiter_byte(&self) -> Result<u8, DataError> {
        u8::try_from(self.delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| DataError::Invalid(format!("delimiter {:?} is not ASCII", self.delimiter)))
    }
}

/// Labels sort numerically when every value parses as a number, otherwise
/// lexicographically. Class `k` is the `k`-th value in that order.
fn label_order(raw: &[String]) -> Vec<String> {
    let distinct: BTreeSet<&str> = raw.iter().map(String::as_str).collect();
    let mut values: Vec<String> = distinct.into_iter().map(str::to_owned).collect();
    let numeric: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut pairs: Vec<(f64, String)> = nums.into_iter().zip(values).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        values = pairs.into_iter().map(|(_, v)| v).collect();
    }
    values
}

/// Reads a headed, delimited file. Missing or non-numeric feature values are
/// errors naming the file line. Without an ID column, sample IDs are the
/// zero-based data row numbers.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter_byte()?)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::Invalid(format!("{}: no column named {name:?}", path.display())))
    };
    let label_at = find(&opts.label_column)?;
    let id_at = opts.id_column.as_deref().map(find).transpose()?;
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&c| c != label_at && Some(c) != id_at).collect();
    if feature_cols.is_empty() {
        return Err(DataError::Invalid(format!("{}: no feature columns", path.display())));
    }

    let mut data = Vec::new();
    let mut raw_labels = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| DataError::Parse { row: line, message: e.to_string() })?;
        if record.len() != headers.len() {
            return Err(DataError::Parse {
                row: line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for &c in &feature_cols {
            let field = &record[c];
            if field.is_empty() {
                return Err(DataError::Parse { row: line, message: format!("missing value in column {:?}", headers[c]) });
            }
            let v: f64 = field.parse().map_err(|_| DataError::Parse {
                row: line,
                message: format!("column {:?}: {field:?} is not a number", headers[c]),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse { row: line, message: format!("column {:?}: non-finite value", headers[c]) });
            }
            data.push(v);
        }
        let label = &record[label_at];
        if label.is_empty() {
            return Err(DataError::Parse { row: line, message: "missing label".into() });
        }
        raw_labels.push(label.to_owned());
        let id = match id_at {
            Some(c) => record[c].to_owned(),
            None => i.to_string(),
        };
        if !seen_ids.insert(id.clone()) {
            return Err(DataError::Parse { row: line, message: format!("duplicate sample id {id:?}") });
        }
        ids.push(id);
    }

    let names = label_order(&raw_labels);
    if names.len() < 2 {
        return Err(DataError::Invalid(format!("{}: need at least two distinct labels", path.display())));
    }
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|l| names.iter().position(|n| n == l).expect("label came from this set"))
        .collect();
    let n = labels.len();
    let features = FeatureMatrix::new(data, n, feature_cols.len())?
        .with_column_names(feature_cols.iter().map(|&c| headers[c].clone()).collect())?;
    let mut ds = Dataset::new(features, ClassVector::new(labels, names.len())?, ids)?;
    ds.label_names = Some(names);
    Ok(ds)
}

/// Writes `id`, the feature columns and `label`. Labels use the original
/// names when the dataset has them. Numbers are written in shortest
/// round-trip form, so loading the file back is lossless.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>, delimiter: char) -> Result<(), DataError> {
    let opts = CsvOptions::new("label").delimiter(delimiter);
    let mut w = csv::WriterBuilder::new().delimiter(opts.delimiter_byte()?).from_path(path)?;
    let names: Vec<String> = match ds.features.column_names() {
        Some(n) => n.to_vec(),
        None => (0..ds.num_features()).map(|j| format!("x{j}")).collect(),
    };
    let mut header = vec!["id".to_owned()];
    header.extend(names);
    header.push("label".to_owned());
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec = vec![ds.sample_ids[i].clone()];
        rec.extend(ds.features.row(i).iter().map(|v| v.to_string()));
        let c = ds.labels.get(i);
        rec.push(match &ds.label_names {
            Some(n) => n[c].clone(),
            None => c.to_string(),
        });
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
