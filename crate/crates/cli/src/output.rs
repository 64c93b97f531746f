//! Result files: one CSV table, `summary.json` and the resolved scenario.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use cbm_core::scenario::Scenario;

use crate::Failure;

pub struct Output {
    dir: PathBuf,
    command: &'static str,
    echo: String,
}

/// Shortest round-tripping decimal, switching to exponent form outside
/// `[1e-4, 1e15)` so tiny probabilities stay readable.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// JSON number, or `null` for NaN and infinities.
pub fn jnum(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl Output {
    pub fn create(dir: &Path, command: &'static str, scenario: &Scenario) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir)?;
        let echo = scenario.to_toml_string()?;
        std::fs::write(dir.join("scenario.resolved.toml"), &echo)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command,
            echo,
        })
    }

    /// Writes `<command>.csv`: the resolved scenario as `#` lines, then the
    /// header and rows.
    pub fn table(&self, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
        let file = File::create(self.dir.join(format!("{}.csv", self.command)))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "# cbm {}", self.command)?;
        for line in self.echo.lines() {
            writeln!(w, "# {line}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(header)?;
        for row in rows {
            csv.write_record(row)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn summary(&self, status: &str, results: Value, tolerances: Value, warnings: &[String]) -> Result<(), Failure> {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("status".into(), json!(status));
        m.insert("results".into(), results);
        m.insert("tolerances".into(), tolerances);
        m.insert("warnings".into(), json!(warnings));
        let text = serde_json::to_string_pretty(&Value::Object(m)).expect("serializable");
        std::fs::write(self.dir.join("summary.json"), text + "\n")?;
        Ok(())
    }
}
