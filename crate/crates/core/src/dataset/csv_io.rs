use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::index;

use super::{CategoricalColumn, Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Exclude,
    Label,
}

impl ColumnKind {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "numeric" => Some(ColumnKind::Numeric),
            "categorical" => Some(ColumnKind::Categorical),
            "exclude" => Some(ColumnKind::Exclude),
            "label" => Some(ColumnKind::Label),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Exclude => "exclude",
            ColumnKind::Label => "label",
        }
    }
}

/// Column kind declarations. Columns present in the CSV but absent from the
/// schema are read as numeric.
///
/// Text form, one declaration per line, `#` starts a comment:
///
/// ```text
/// id = exclude
/// proto = categorical
/// dur = numeric
/// label = label
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    entries: Vec<(String, ColumnKind)>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, column: impl Into<String>, kind: ColumnKind) -> Self {
        let column = column.into();
        self.entries.retain(|(c, _)| *c != column);
        self.entries.push((column, kind));
        self
    }

    pub fn kind_of(&self, column: &str) -> Option<ColumnKind> {
        self.entries
            .iter()
            .find(|(c, _)| c == column)
            .map(|&(_, k)| k)
    }

    pub fn entries(&self) -> &[(String, ColumnKind)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut schema = Schema::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, kind) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| {
                    Error::Schema(format!("line {}: expected `column = kind`", lineno + 1))
                })?;
            let kind = ColumnKind::parse(kind).ok_or_else(|| {
                Error::Schema(format!("line {}: unknown kind `{}`", lineno + 1, kind.trim()))
            })?;
            let name = name.trim();
            if schema.kind_of(name).is_some() {
                return Err(Error::Schema(format!(
                    "line {}: column {name} declared twice",
                    lineno + 1
                )));
            }
            schema.entries.push((name.to_string(), kind));
        }
        Ok(schema)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(c, k)| format!("{c} = {}\n", k.as_str()))
            .collect()
    }

    /// Schema describing the CSV that [`write_csv`] produces for `d`.
    pub fn for_dataset(d: &Dataset, label_column: &str) -> Self {
        let mut s = Schema::new();
        for c in d.columns() {
            s = s.with(c.name.clone(), ColumnKind::Numeric);
        }
        for c in d.categoricals() {
            s = s.with(c.name.clone(), ColumnKind::Categorical);
        }
        s.with(label_column, ColumnKind::Label)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Text label of the normal class. When set, every other label value is
    /// read as anomaly; when unset labels must be 0 or 1.
    pub normal_label: Option<String>,
    /// Keep zero-variance numeric columns (used for test files that are
    /// aligned to a training layout afterwards).
    pub keep_constant: bool,
    /// Uniform random subsample of this many rows, keyed by the seed.
    pub sample_rows: Option<(usize, u64)>,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, label_column: &str) -> Result<Dataset> {
    load_csv_with(path, schema, label_column, &LoadOptions::default())
}

pub fn load_csv_with(
    path: impl AsRef<Path>,
    schema: &Schema,
    label_column: &str,
    opts: &LoadOptions,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    for (name, kind) in schema.entries() {
        if !header.contains(name) {
            return Err(Error::Schema(format!("column {name} not found in {}", path.display())));
        }
        if *kind == ColumnKind::Label && name != label_column {
            return Err(Error::Schema(format!(
                "schema marks {name} as label but label column is {label_column}"
            )));
        }
    }
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Schema(format!("label column {label_column} not found")))?;

    let mut numeric_idx = Vec::new();
    let mut categorical_idx = Vec::new();
    for (i, name) in header.iter().enumerate() {
        if i == label_idx {
            continue;
        }
        match schema.kind_of(name).unwrap_or(ColumnKind::Numeric) {
            ColumnKind::Numeric => numeric_idx.push(i),
            ColumnKind::Categorical => categorical_idx.push(i),
            ColumnKind::Exclude => {}
            ColumnKind::Label => unreachable!("checked against label column above"),
        }
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut cats: Vec<Vec<String>> = vec![Vec::new(); categorical_idx.len()];
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let record = record?;
        let mut row = Vec::with_capacity(numeric_idx.len());
        for &c in &numeric_idx {
            let cell = record[c].trim();
            let v: f64 = cell.parse().map_err(|_| Error::MalformedRow {
                row: line,
                message: format!("column {}: cannot parse `{cell}` as a number", header[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedRow {
                    row: line,
                    message: format!("column {}: non-finite value `{cell}`", header[c]),
                });
            }
            row.push(v);
        }
        for (slot, &c) in cats.iter_mut().zip(&categorical_idx) {
            let cell = record[c].trim();
            if cell.is_empty() {
                return Err(Error::MalformedRow {
                    row: line,
                    message: format!("column {}: missing value", header[c]),
                });
            }
            slot.push(cell.to_string());
        }
        labels.push(parse_label(record[label_idx].trim(), line, opts)?);
        rows.push(row);
    }

    if let Some((n, s)) = opts.sample_rows {
        if n < rows.len() {
            let mut keep = index::sample(&mut seed::rng(s), rows.len(), n).into_vec();
            keep.sort_unstable();
            rows = keep.iter().map(|&r| std::mem::take(&mut rows[r])).collect();
            labels = keep.iter().map(|&r| labels[r]).collect();
            for col in &mut cats {
                *col = keep.iter().map(|&r| std::mem::take(&mut col[r])).collect();
            }
        }
    }

    let mut keep_cols = Vec::new();
    let mut dropped = Vec::new();
    for (j, &c) in numeric_idx.iter().enumerate() {
        let first = rows.first().map(|r| r[j]);
        let constant = rows.iter().all(|r| Some(r[j]) == first);
        if constant && !opts.keep_constant {
            log::warn!("dropping zero-variance column {}", header[c]);
            dropped.push(header[c].clone());
        } else {
            keep_cols.push(j);
        }
    }
    let values: Vec<f64> = rows
        .iter()
        .flat_map(|r| keep_cols.iter().map(move |&j| r[j]))
        .collect();
    let names: Vec<String> = keep_cols.iter().map(|&j| header[numeric_idx[j]].clone()).collect();
    let kinds = vec![FeatureKind::Numeric; names.len()];
    let categoricals = categorical_idx
        .iter()
        .zip(cats)
        .map(|(&c, values)| CategoricalColumn {
            name: header[c].clone(),
            values,
        })
        .collect();
    let mut d = Dataset::assemble(
        names,
        kinds,
        values,
        labels,
        categoricals,
        path.display().to_string(),
    )?;
    d.set_dropped_constant(dropped);
    Ok(d)
}

fn parse_label(cell: &str, line: usize, opts: &LoadOptions) -> Result<u8> {
    if let Some(normal) = &opts.normal_label {
        return Ok(u8::from(cell != normal));
    }
    match cell.parse::<f64>() {
        Ok(0.0) => Ok(0),
        Ok(1.0) => Ok(1),
        _ => Err(Error::Label(format!(
            "row {line}: label `{cell}` is not 0 or 1"
        ))),
    }
}

/// Writes `d` as CSV: numeric and one-hot columns, then raw categoricals,
/// then the label column. Values use the shortest exact decimal form, so a
/// load of the written file reproduces the matrix bit for bit.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let text = to_csv_string(d, label_column)?;
    let mut f = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub(crate) fn to_csv_string(d: &Dataset, label_column: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = d.columns().iter().map(|c| c.name.as_str()).collect();
    header.extend(d.categoricals().iter().map(|c| c.name.as_str()));
    header.push(label_column);
    w.write_record(&header)?;
    for r in 0..d.n_rows() {
        let mut rec: Vec<String> = d.row(r).iter().map(|v| v.to_string()).collect();
        rec.extend(d.categoricals().iter().map(|c| c.values[r].clone()));
        rec.push(d.labels()[r].to_string());
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serde(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn constant_column_is_dropped() {
        let f = write_tmp("a,b,c,label\n1,7,0.5,1\n2,7,0.1,0\n3,7,0.3,1\n");
        let d = load_csv(f.path(), &Schema::new(), "label").unwrap();
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.dropped_constant(), &["b".to_string()]);
        assert_eq!(d.labels(), &[1, 0, 1]);
        assert_eq!(d.row(1), &[2.0, 0.1]);
    }

    #[test]
    fn schema_controls_kinds() {
        let f = write_tmp("id,proto,dur,label\n1,tcp,0.5,1\n2,udp,0.1,0\n");
        let schema = Schema::parse("id = exclude\nproto: categorical # comment\nlabel = label\n")
            .unwrap();
        let d = load_csv(f.path(), &schema, "label").unwrap();
        assert_eq!(d.n_features(), 1);
        assert_eq!(d.columns()[0].name, "dur");
        assert_eq!(d.categoricals()[0].values, vec!["tcp", "udp"]);
    }

    #[test]
    fn malformed_row_reports_line() {
        let f = write_tmp("a,label\n1,0\nx,1\n");
        match load_csv(f.path(), &Schema::new(), "label").unwrap_err() {
            Error::MalformedRow { row, .. } => assert_eq!(row, 3),
            e => panic!("unexpected {e}"),
        }
        let f = write_tmp("a,label\n1,0\n2\n");
        assert!(matches!(
            load_csv(f.path(), &Schema::new(), "label").unwrap_err(),
            Error::MalformedRow { .. }
        ));
        let f = write_tmp("a,label\n,0\n2,1\n");
        assert!(matches!(
            load_csv(f.path(), &Schema::new(), "label").unwrap_err(),
            Error::MalformedRow { row: 2, .. }
        ));
    }

    #[test]
    fn unknown_schema_column_and_bad_labels_error() {
        let f = write_tmp("a,label\n1,0\n2,1\n");
        let schema = Schema::new().with("nope", ColumnKind::Numeric);
        assert!(matches!(
            load_csv(f.path(), &schema, "label").unwrap_err(),
            Error::Schema(_)
        ));
        assert!(matches!(
            load_csv(f.path(), &Schema::new(), "class").unwrap_err(),
            Error::Schema(_)
        ));
        let f = write_tmp("a,label\n1,0\n2,2\n");
        assert!(matches!(
            load_csv(f.path(), &Schema::new(), "label").unwrap_err(),
            Error::Label(_)
        ));
    }

    #[test]
    fn text_labels_with_normal_class() {
        let f = write_tmp("a,Label\n1,BENIGN\n2,DDoS\n3,PortScan\n");
        let opts = LoadOptions {
            normal_label: Some("BENIGN".into()),
            ..Default::default()
        };
        let d = load_csv_with(f.path(), &Schema::new(), "Label", &opts).unwrap();
        assert_eq!(d.labels(), &[0, 1, 1]);
    }

    #[test]
    fn write_then_load_round_trips() {
        let d = Dataset::from_rows(
            vec!["x".into(), "y".into()],
            vec![vec![0.1, -3.25], vec![1e-7, 2.0 / 3.0]],
            vec![0, 1],
            "mem",
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(&d, f.path(), "label").unwrap();
        let back = load_csv(f.path(), &Schema::for_dataset(&d, "label"), "label").unwrap();
        assert_eq!(back.raw_values(), d.raw_values());
        assert_eq!(back.labels(), d.labels());
    }

    #[test]
    fn schema_text_round_trips() {
        let s = Schema::new()
            .with("a", ColumnKind::Numeric)
            .with("p", ColumnKind::Categorical)
            .with("label", ColumnKind::Label);
        assert_eq!(Schema::parse(&s.to_text()).unwrap(), s);
        assert!(Schema::parse("a = float\n").is_err());
        assert!(Schema::parse("just a name\n").is_err());
    }
}
