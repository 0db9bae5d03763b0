use crate::error::{Error, Result};

/// Dense row-major feature matrix held privately by one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    num_rows: usize,
    num_cols: usize,
    column_names: Option<Vec<String>>,
}

impl FeatureMatrix {
    pub fn new(data: Vec<f64>, num_rows: usize, num_cols: usize) -> Result<Self> {
        if data.len() != num_rows * num_cols {
            return Err(Error::invalid(format!(
                "feature buffer has {} values, expected {num_rows} x {num_cols}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature at row {}, column {}",
                pos / num_cols.max(1),
                pos % num_cols.max(1)
            )));
        }
        Ok(Self { data, num_rows, num_cols, column_names: None })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_cols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != num_cols) {
            return Err(Error::invalid(format!("row {i} is ragged")));
        }
        Self::new(rows.concat(), rows.len(), num_cols)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.num_cols {
            return Err(Error::invalid("column name count does not match columns"));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.num_cols..(i + 1) * self.num_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.num_cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.num_cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self {
            data,
            num_rows: rows.len(),
            num_cols: self.num_cols,
            column_names: self.column_names.clone(),
        }
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.num_rows * cols.len());
        for i in 0..self.num_rows {
            let row = self.row(i);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        let column_names = self
            .column_names
            .as_ref()
            .map(|names| cols.iter().map(|&c| names[c].clone()).collect());
        Self { data, num_rows: self.num_rows, num_cols: cols.len(), column_names }
    }

    /// Side-by-side concatenation of matrices with equal row counts.
    pub fn hstack(parts: &[&FeatureMatrix]) -> Result<Self> {
        let num_rows = parts.first().map_or(0, |m| m.num_rows);
        if parts.iter().any(|m| m.num_rows != num_rows) {
            return Err(Error::invalid("hstack of matrices with different row counts"));
        }
        let num_cols = parts.iter().map(|m| m.num_cols).sum();
        let mut data = Vec::with_capacity(num_rows * num_cols);
        for i in 0..num_rows {
            for m in parts {
                data.extend_from_slice(m.row(i));
            }
        }
        let column_names = parts
            .iter()
            .map(|m| m.column_names.clone())
            .collect::<Option<Vec<_>>>()
            .map(|v| v.concat());
        Ok(Self { data, num_rows, num_cols, column_names })
    }

    pub(crate) fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.num_rows).map(move |i| self.data[i * self.num_cols + j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(FeatureMatrix::new(vec![1.0; 5], 2, 3).is_err());
        assert!(FeatureMatrix::new(vec![f64::NAN], 1, 1).is_err());
        assert!(FeatureMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn slicing_and_stacking() {
        let m = FeatureMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let a = m.select_cols(&[0, 2]);
        let b = m.select_cols(&[1]);
        assert_eq!(a.row(1), &[4.0, 6.0]);
        let joined = FeatureMatrix::hstack(&[&a, &b]).unwrap();
        assert_eq!(joined.row(0), &[1.0, 3.0, 2.0]);
        assert_eq!(m.select_rows(&[1, 1]).row(1), &[4.0, 5.0, 6.0]);
    }
}
