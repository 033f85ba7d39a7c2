use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::ClassLabel;
use crate::error::FeatureError;

/// Feature rows keyed by recording id. Columns are arbitrary so that
/// externally computed feature sets can be imported alongside the
/// handcrafted ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub labels: Vec<ClassLabel>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(
        ids: Vec<String>,
        labels: Vec<ClassLabel>,
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, FeatureError> {
        let m = Self {
            ids,
            labels,
            names,
            rows,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), FeatureError> {
        let n = self.ids.len();
        if self.labels.len() != n || self.rows.len() != n {
            return Err(FeatureError::Table(
                "ids, labels and rows differ in length".into(),
            ));
        }
        if self.names.is_empty() {
            return Err(FeatureError::Table("no feature columns".into()));
        }
        let mut seen = HashSet::new();
        for (id, row) in self.ids.iter().zip(&self.rows) {
            if !seen.insert(id) {
                return Err(FeatureError::Table(format!("duplicate id `{id}`")));
            }
            if row.len() != self.names.len() {
                return Err(FeatureError::Table(format!(
                    "row `{id}` has {} values for {} columns",
                    row.len(),
                    self.names.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(FeatureError::Table(format!(
                    "row `{id}` has non-finite values"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Header `id,label,<feature names>`; values printed in shortest
    /// round-trip form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), FeatureError> {
        let table_err = |e: csv::Error| FeatureError::Table(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(table_err)?;
        for ((id, label), row) in self.ids.iter().zip(&self.labels).zip(&self.rows) {
            let mut rec = vec![id.clone(), label.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(table_err)?;
        }
        w.flush().map_err(|e| FeatureError::Table(e.to_string()))
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<(), FeatureError> {
        let f = std::fs::File::create(path)
            .map_err(|e| FeatureError::Table(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads any CSV with `id` and `label` columns; every other column is a
    /// numeric feature, kept in file order.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, FeatureError> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = r
            .headers()
            .map_err(|e| FeatureError::Table(e.to_string()))?
            .clone();
        let find = |name: &str| header.iter().position(|h| h.eq_ignore_ascii_case(name));
        let id_col = find("id").ok_or_else(|| FeatureError::Table("missing `id` column".into()))?;
        let label_col =
            find("label").ok_or_else(|| FeatureError::Table("missing `label` column".into()))?;
        let feature_cols: Vec<usize> = (0..header.len())
            .filter(|&c| c != id_col && c != label_col)
            .collect();
        let names = feature_cols
            .iter()
            .map(|&c| header[c].to_string())
            .collect();
        let (mut ids, mut labels, mut rows) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| FeatureError::Table(format!("line {line}: {e}")))?;
            ids.push(rec[id_col].to_string());
            labels.push(
                rec[label_col]
                    .parse::<ClassLabel>()
                    .map_err(|e| FeatureError::Table(format!("line {line}: {e}")))?,
            );
            let row = feature_cols
                .iter()
                .map(|&c| {
                    rec[c].parse::<f64>().map_err(|_| {
                        FeatureError::Table(format!("line {line}: `{}` is not a number", &rec[c]))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::new(ids, labels, names, rows)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self, FeatureError> {
        let f = std::fs::File::open(path)
            .map_err(|e| FeatureError::Table(format!("{}: {e}", path.display())))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
