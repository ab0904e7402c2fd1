//! Tables written row by row as CSV (with a header) or JSON lines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::Format;

pub enum Table {
    Csv(csv::Writer<File>),
    Jsonl(BufWriter<File>),
}

impl Table {
    /// Creates `dir/name.<ext>`, making `dir` if needed.
    pub fn create(dir: &Path, name: &str, format: Format) -> std::io::Result<Table> {
        std::fs::create_dir_all(dir)?;
        let file = File::create(dir.join(format!("{name}.{}", format.extension())))?;
        Ok(match format {
            Format::Csv => Table::Csv(csv::Writer::from_writer(file)),
            Format::Jsonl => Table::Jsonl(BufWriter::new(file)),
        })
    }

    /// Appends one row and flushes, so partial output of long runs is readable.
    pub fn row<T: Serialize>(&mut self, row: &T) -> std::io::Result<()> {
        match self {
            Table::Csv(w) => {
                w.serialize(row).map_err(std::io::Error::other)?;
                w.flush()
            }
            Table::Jsonl(w) => {
                serde_json::to_writer(&mut *w, row)?;
                w.write_all(b"\n")?;
                w.flush()
            }
        }
    }
}
