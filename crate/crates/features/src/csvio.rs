//! Dataset CSV with exact round-tripping.
//!
//! Layout: header `f0,...,f139,label`, one row per vector, label encoded as
//! 0 (ransomware) or 1 (normal). Values are written with Rust's shortest
//! round-trip float formatting, so `read(write(d)) == d` bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{Dataset, FeatureVector, Label};
use crate::layout::FeatureLayout;
use crate::{FeatureError, FEATURE_DIM};

/// The only header this format accepts.
pub fn csv_header() -> String {
    let mut h = String::new();
    for i in 0..FEATURE_DIM {
        let _ = write!(h, "f{i},");
    }
    h.push_str("label");
    h
}

pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = csv_header();
    out.push('\n');
    for row in &data.rows {
        for v in &row.values {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", row.label.as_int());
    }
    out
}

/// Parse a dataset. Rows and columns in errors are 1-based; the header is
/// row 1.
pub fn dataset_from_csv(text: &str, layout: &FeatureLayout) -> Result<Dataset, FeatureError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let expected = csv_header();
    if header != expected {
        return Err(FeatureError::CsvHeader(format!(
            "expected {} columns f0..f{}, label",
            FEATURE_DIM + 1,
            FEATURE_DIM - 1
        )));
    }

    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let row_no = idx + 2;
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != FEATURE_DIM + 1 {
            return Err(FeatureError::Csv {
                row: row_no,
                col: cells.len(),
                message: format!("expected {} columns, found {}", FEATURE_DIM + 1, cells.len()),
            });
        }
        let mut values = Vec::with_capacity(FEATURE_DIM);
        for (c, cell) in cells[..FEATURE_DIM].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| FeatureError::Csv {
                row: row_no,
                col: c + 1,
                message: format!("non-numeric cell {cell:?}"),
            })?;
            values.push(v);
        }
        let label_cell = cells[FEATURE_DIM];
        let label = label_cell
            .parse::<i64>()
            .ok()
            .and_then(Label::from_int)
            .ok_or_else(|| FeatureError::LabelDomain {
                row: row_no,
                value: label_cell.to_string(),
            })?;
        rows.push(FeatureVector { values, label });
    }
    Ok(Dataset { rows, layout: layout.clone() })
}

pub fn write_csv(data: &Dataset, path: &Path) -> Result<(), FeatureError> {
    fs::write(path, dataset_to_csv(data))?;
    Ok(())
}

pub fn read_csv(path: &Path, layout: &FeatureLayout) -> Result<Dataset, FeatureError> {
    let text = fs::read_to_string(path)?;
    dataset_from_csv(&text, layout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_dataset() -> Dataset {
        let layout = FeatureLayout::default_layout().clone();
        let mut a = vec![0.0; FEATURE_DIM];
        a[0] = 3.0;
        a[17] = 0.12345678901234567; // forces non-trivial float formatting
        let mut b = vec![0.0; FEATURE_DIM];
        b[139] = 42.0;
        Dataset {
            rows: vec![
                FeatureVector::new(a, Label::Ransomware).unwrap(),
                FeatureVector::new(b, Label::Normal).unwrap(),
            ],
            layout,
        }
    }

    #[test]
    fn header_shape() {
        let h = csv_header();
        assert!(h.starts_with("f0,f1,"));
        assert!(h.ends_with("f139,label"));
        assert_eq!(h.split(',').count(), 141);
    }

    #[test]
    fn round_trip_is_exact() {
        let data = sample_dataset();
        let text = dataset_to_csv(&data);
        let back = dataset_from_csv(&text, &data.layout).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn wrong_column_count_reports_row() {
        let mut text = csv_header();
        text.push('\n');
        text.push_str(&vec!["1"; FEATURE_DIM].join(",")); // 140 cells: label missing
        text.push('\n');
        let err = dataset_from_csv(&text, FeatureLayout::default_layout()).unwrap_err();
        match err {
            FeatureError::Csv { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let mut cells = vec!["0".to_string(); FEATURE_DIM + 1];
        cells[4] = "abc".to_string();
        let text = format!("{}\n{}\n", csv_header(), cells.join(","));
        let err = dataset_from_csv(&text, FeatureLayout::default_layout()).unwrap_err();
        match err {
            FeatureError::Csv { row, col, .. } => {
                assert_eq!((row, col), (2, 5));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn label_outside_domain_is_rejected() {
        let mut cells = vec!["0".to_string(); FEATURE_DIM + 1];
        cells[FEATURE_DIM] = "2".to_string();
        let text = format!("{}\n{}\n", csv_header(), cells.join(","));
        let err = dataset_from_csv(&text, FeatureLayout::default_layout()).unwrap_err();
        assert!(matches!(err, FeatureError::LabelDomain { row: 2, .. }));
    }

    #[test]
    fn bad_header_is_rejected() {
        let text = "f0,f1,label\n";
        assert!(matches!(
            dataset_from_csv(text, FeatureLayout::default_layout()),
            Err(FeatureError::CsvHeader(_))
        ));
    }
}
