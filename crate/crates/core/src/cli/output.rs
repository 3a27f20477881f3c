//! CSV and `key = value` text output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::CliError;

/// Formats with 12 significant digits, switching to exponent notation for
/// very large or small magnitudes, without trailing zeros.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Destination opened before any computation so a bad path fails fast.
pub struct Sink {
    writer: Box<dyn Write>,
    path: Option<PathBuf>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => {
                let file = File::create(p).map_err(|source| CliError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Ok(Sink {
                    writer: Box::new(BufWriter::new(file)),
                    path: Some(p.to_path_buf()),
                })
            }
            None => Ok(Sink {
                writer: Box::new(io::stdout().lock()),
                path: None,
            }),
        }
    }

    fn io_error(&self, source: io::Error) -> CliError {
        CliError::Io {
            path: self
                .path
                .clone()
                .unwrap_or_else(|| PathBuf::from("<stdout>")),
            source,
        }
    }

    pub fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.writer, "{text}").map_err(|e| self.io_error(e))
    }

    pub fn csv_row<S: AsRef<str>>(&mut self, cells: &[S]) -> Result<(), CliError> {
        let row: Vec<&str> = cells.iter().map(AsRef::as_ref).collect();
        self.line(&row.join(","))
    }

    pub fn key_value(&mut self, key: &str, value: impl std::fmt::Display) -> Result<(), CliError> {
        self.line(&format!("{key} = {value}"))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(|e| self.io_error(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(140.15), "140.15");
        assert_eq!(sig12(2.170_639_333_525_373_7), "2.17063933353");
        assert_eq!(sig12(0.007_522_721_040_475_553), "0.00752272104048");
        assert_eq!(sig12(-1.5e-9), "-1.5e-9");
        assert_eq!(sig12(7.5e-5), "0.000075");
        assert_eq!(sig12(1.134e-13), "1.134e-13");
        assert_eq!(sig12(9.999_999_999_999_9), "10");
        assert_eq!(sig12(123_456_789_012_345.0), "1.23456789012e14");
    }
}
