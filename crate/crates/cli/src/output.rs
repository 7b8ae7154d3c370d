use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use detproc::{Error, Result};

/// Round-trip exact: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(";")
}

pub struct Csv {
    out: BufWriter<File>,
    name: String,
}

impl Csv {
    pub fn create(dir: &Path, name: &str, header: &str) -> Result<Self> {
        let file = File::create(dir.join(name)).map_err(|e| io_err(name, e))?;
        let mut csv = Csv { out: BufWriter::new(file), name: name.into() };
        csv.line(header)?;
        Ok(csv)
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.line(&fields.join(","))
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| io_err(&self.name, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| io_err(&self.name, e))
    }
}

fn io_err(name: &str, e: std::io::Error) -> Error {
    Error::Config(format!("cannot write {name} under out_dir: {e}"))
}
