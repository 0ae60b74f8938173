use std::collections::HashSet;

use serde::Serialize;

use super::GridError;
use crate::annotator::{presence_of, PresenceVector, ThreadAnnotation};
use crate::lexicon::SlotType;

/// Slot × thread presence matrix. Columns keep input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossGrid {
    columns: Vec<PresenceVector>,
}

impl CrossGrid {
    pub fn from_columns(columns: Vec<PresenceVector>) -> Result<Self, GridError> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.thread_id.as_str()) {
                return Err(GridError::DuplicateId(c.thread_id.clone()));
            }
        }
        Ok(CrossGrid { columns })
    }

    pub fn columns(&self) -> &[PresenceVector] {
        &self.columns
    }

    pub fn thread_ids(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.thread_id.as_str())
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn cell(&self, slot: SlotType, column: usize) -> bool {
        self.columns[column].has(slot)
    }

    /// One row of cells, in column order.
    pub fn row(&self, slot: SlotType) -> Vec<bool> {
        self.columns.iter().map(|c| c.has(slot)).collect()
    }

    /// Header `slot,<thread ids>` then one `0`/`1` row per slot, LF endings.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = std::iter::once("slot").chain(self.thread_ids());
        w.write_record(header).expect("in-memory write");
        for &slot in SlotType::ALL {
            let cells = self
                .row(slot)
                .into_iter()
                .map(|b| if b { "1" } else { "0" });
            w.write_record(std::iter::once(slot.name()).chain(cells))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("grid CSV is UTF-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let csv_err = |line: usize, message: String| GridError::Csv { line, message };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();

        let header = match records.next() {
            Some(r) => r.map_err(|e| csv_err(1, e.to_string()))?,
            None => return Err(csv_err(1, "empty input".into())),
        };
        if header.get(0) != Some("slot") {
            return Err(csv_err(1, "header must start with `slot`".into()));
        }
        let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut columns: Vec<PresenceVector> = ids
            .iter()
            .map(|id| PresenceVector::empty(id.clone()))
            .collect();

        let mut rows = 0;
        for (i, record) in records.enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| csv_err(line, e.to_string()))?;
            let Some(&slot) = SlotType::ALL.get(i) else {
                return Err(csv_err(line, "more than 18 slot rows".into()));
            };
            if record.get(0) != Some(slot.name()) {
                return Err(csv_err(
                    line,
                    format!(
                        "expected row `{}`, found `{}`",
                        slot,
                        record.get(0).unwrap_or("")
                    ),
                ));
            }
            if record.len() != ids.len() + 1 {
                return Err(csv_err(
                    line,
                    format!("expected {} cells, found {}", ids.len(), record.len() - 1),
                ));
            }
            for (col, cell) in record.iter().skip(1).enumerate() {
                columns[col].bits[slot.index()] = match cell {
                    "1" => true,
                    "0" => false,
                    other => return Err(csv_err(line, format!("cell `{other}` is not 0 or 1"))),
                };
            }
            rows += 1;
        }
        if rows != SlotType::COUNT {
            return Err(csv_err(
                rows + 2,
                format!("expected 18 slot rows, found {rows}"),
            ));
        }
        CrossGrid::from_columns(columns)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Row {
            slot: SlotType,
            cells: Vec<bool>,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            thread_ids: Vec<&'a str>,
            rows: Vec<Row>,
        }
        let out = Out {
            thread_ids: self.thread_ids().collect(),
            rows: SlotType::ALL
                .iter()
                .map(|&slot| Row {
                    slot,
                    cells: self.row(slot),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&out).expect("grid serializes");
        s.push('\n');
        s
    }
}

/// One column per annotation, in input order.
pub fn build_grid(annotations: &[ThreadAnnotation]) -> Result<CrossGrid, GridError> {
    CrossGrid::from_columns(annotations.iter().map(presence_of).collect())
}
