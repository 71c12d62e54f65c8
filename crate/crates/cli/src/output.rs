//! Output plumbing: CSV goes to --out (or stdout), human log lines go to
//! the other stream. CSV bytes are deterministic for fixed inputs; the
//! only timestamp lives in a log line.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Emitter {
    out: Option<PathBuf>,
    quiet: bool,
    csv: String,
}

impl Emitter {
    pub fn new(out: Option<PathBuf>, quiet: bool) -> Self {
        Emitter {
            out,
            quiet,
            csv: String::new(),
        }
    }

    /// A `# key=value` comment embedded in the CSV so outputs carry their
    /// full resolved configuration.
    pub fn config_line(&mut self, key: &str, value: impl AsRef<str>) {
        self.csv.push_str(&format!("# config {key}={}\n", value.as_ref()));
        self.log(&format!("config {key}={}", value.as_ref()));
    }

    pub fn csv_row(&mut self, fields: &[String]) {
        self.csv.push_str(&fields.join(","));
        self.csv.push('\n');
    }

    pub fn csv_header(&mut self, fields: &[&str]) {
        self.csv.push_str(&fields.join(","));
        self.csv.push('\n');
    }

    /// Verbatim text into the result buffer (the fit report is JSON).
    pub fn csv_raw(&mut self, text: &str) {
        self.csv.push_str(text);
    }

    /// Human-readable line on the log stream.
    pub fn log(&self, line: &str) {
        if self.quiet {
            return;
        }
        if self.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }

    /// Write the accumulated CSV and stamp the log.
    pub fn finish(self) -> Result<()> {
        let ts = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.log(&format!("# completed unix_time={ts}"));
        match &self.out {
            Some(path) => {
                let mut f = std::fs::File::create(path)
                    .with_context(|| format!("creating {}", path.display()))?;
                f.write_all(self.csv.as_bytes())?;
            }
            None => {
                print!("{}", self.csv);
            }
        }
        Ok(())
    }
}
