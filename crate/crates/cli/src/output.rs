use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use szego_core::Complex64;

use crate::args::Format;

pub const SCHEMA: u32 = 1;

/// A complex number as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

pub struct Sink {
    pub format: Format,
    out: Box<dyn Write>,
}

impl Sink {
    pub fn open(format: Format, path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self { format, out })
    }

    /// One JSON document.
    pub fn json<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut self.out, value)?;
        writeln!(self.out)?;
        self.out.flush()
    }

    /// One JSON object per line.
    pub fn json_lines<T: Serialize>(&mut self, rows: &[T]) -> io::Result<()> {
        for r in rows {
            serde_json::to_writer(&mut self.out, r)?;
            writeln!(self.out)?;
        }
        self.out.flush()
    }

    /// Header plus one row per record.
    pub fn csv<T: Serialize>(&mut self, rows: &[T]) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(&mut self.out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        drop(w);
        self.out.flush()
    }

    /// Rows as CSV, or JSON Lines when json is selected.
    pub fn rows<T: Serialize>(&mut self, rows: &[T]) -> io::Result<()> {
        match self.format {
            Format::Csv => self.csv(rows),
            Format::Json => self.json_lines(rows),
        }
    }
}
