use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    /// Relative to the dataset root.
    pub path: String,
    pub label: String,
}

/// Ordered `(path, label)` records with a lexicographically sorted class list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    records: Vec<Record>,
    classes: Vec<String>,
}

impl Manifest {
    pub fn new(records: Vec<Record>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.path.as_str()) {
                return Err(Error::Data(format!("duplicate manifest path `{}`", r.path)));
            }
            if r.label.is_empty() {
                return Err(Error::Data(format!("empty label for `{}`", r.path)));
            }
        }
        let classes = records
            .iter()
            .map(|r| r.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Self { records, classes })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.binary_search_by(|c| c.as_str().cmp(label)).ok()
    }

    /// Class index of every record.
    pub fn labels(&self) -> Vec<usize> {
        self.records
            .iter()
            .map(|r| self.class_index(&r.label).expect("label in class list"))
            .collect()
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "path" || &headers[1] != "label" {
            return Err(Error::Data(format!(
                "manifest header must start with `path,label`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row?;
            records.push(Record {
                path: row[0].to_owned(),
                label: row[1].to_owned(),
            });
        }
        Self::new(records)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["path", "label"])?;
        for r in &self.records {
            writer.write_record([&r.path, &r.label])?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Data(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text).map_err(|e| e.at_path(path))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}
