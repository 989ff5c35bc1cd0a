//! TOML system files.
//!
//! ```toml
//! label = "double integrator"   # optional
//! n = 2
//! m = 1
//! A = [
//!   0.0, 1.0,
//!   0.0, 0.0,
//! ]
//! B = [
//!   0.0,
//!   1.0,
//! ]
//! ```
//!
//! `A` and `B` are row-major; integers are accepted as entries.

use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use stabcert_core::LinearSystem;
use toml::{Spanned, Value};

#[derive(Debug, thiserror::Error)]
pub enum SysFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}: {message}")]
    Schema {
        origin: String,
        line: usize,
        message: String,
    },
}

impl SysFileError {
    pub fn category(&self) -> &'static str {
        match self {
            SysFileError::Io { .. } => "io",
            SysFileError::Schema { .. } => "invalid-argument",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    label: Option<String>,
    n: Spanned<i64>,
    m: Spanned<i64>,
    #[serde(rename = "A")]
    a: Spanned<Vec<Spanned<Value>>>,
    #[serde(rename = "B")]
    b: Spanned<Vec<Spanned<Value>>>,
}

fn line_of(src: &str, span: Range<usize>) -> usize {
    let end = span.start.min(src.len());
    src[..end].bytes().filter(|&c| c == b'\n').count() + 1
}

struct Ctx<'a> {
    src: &'a str,
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> SysFileError {
        SysFileError::Schema {
            origin: self.origin.to_string(),
            line: line_of(self.src, span),
            message: message.into(),
        }
    }

    fn dim(&self, name: &str, v: &Spanned<i64>) -> Result<usize, SysFileError> {
        let x = *v.get_ref();
        if x < 1 {
            return Err(self.err(v.span(), format!("{name} must be a positive integer, got {x}")));
        }
        Ok(x as usize)
    }

    fn entries(
        &self,
        name: &str,
        arr: &Spanned<Vec<Spanned<Value>>>,
        expected: usize,
        shape: &str,
    ) -> Result<Vec<f64>, SysFileError> {
        let items = arr.get_ref();
        if items.len() != expected {
            return Err(self.err(
                arr.span(),
                format!(
                    "dimension mismatch: {name} has {} entries, expected {shape} = {expected}",
                    items.len()
                ),
            ));
        }
        items
            .iter()
            .enumerate()
            .map(|(k, item)| {
                let x = match item.get_ref() {
                    Value::Float(f) => *f,
                    Value::Integer(i) => *i as f64,
                    other => {
                        return Err(self.err(
                            item.span(),
                            format!("{name}[{k}] must be a number, got {}", other.type_str()),
                        ))
                    }
                };
                if !x.is_finite() {
                    return Err(self.err(item.span(), format!("{name}[{k}] is not finite ({x})")));
                }
                Ok(x)
            })
            .collect()
    }
}

/// Parses a system file held in memory; `origin` names it in diagnostics.
pub fn parse_system_str(src: &str, origin: &str) -> Result<LinearSystem, SysFileError> {
    let ctx = Ctx { src, origin };
    let raw: RawSystem = toml::from_str(src).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        ctx.err(span, e.message().to_string())
    })?;
    let n = ctx.dim("n", &raw.n)?;
    let m = ctx.dim("m", &raw.m)?;
    let a = ctx.entries("A", &raw.a, n * n, "n*n")?;
    let b = ctx.entries("B", &raw.b, n * m, "n*m")?;
    let sys = LinearSystem::from_row_major(n, m, &a, &b)
        .map_err(|e| ctx.err(raw.a.span(), e.to_string()))?;
    Ok(match raw.label {
        Some(label) => sys.with_label(label),
        None => sys,
    })
}

pub fn parse_system_file(path: &Path) -> Result<LinearSystem, SysFileError> {
    let src = fs::read_to_string(path).map_err(|source| SysFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system_str(&src, &path.display().to_string())
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_rows(out: &mut String, name: &str, rows: usize, cols: usize, at: impl Fn(usize, usize) -> f64) {
    let _ = writeln!(out, "{name} = [");
    for i in 0..rows {
        let row: Vec<String> = (0..cols).map(|j| format!("{:?}", at(i, j))).collect();
        let _ = writeln!(out, "  {},", row.join(", "));
    }
    out.push_str("]\n");
}

/// Serializes a system; entries use the shortest representation that parses
/// back to the same `f64`.
pub fn write_system(sys: &LinearSystem) -> String {
    let mut out = String::new();
    if let Some(label) = sys.label() {
        let _ = writeln!(out, "label = {}", quote(label));
    }
    let _ = writeln!(out, "n = {}", sys.n());
    let _ = writeln!(out, "m = {}", sys.m());
    write_rows(&mut out, "A", sys.n(), sys.n(), |i, j| sys.a()[(i, j)]);
    write_rows(&mut out, "B", sys.n(), sys.m(), |i, j| sys.b()[(i, j)]);
    out
}

pub fn write_system_file(path: &Path, sys: &LinearSystem) -> Result<(), SysFileError> {
    fs::write(path, write_system(sys)).map_err(|source| SysFileError::Io {
        path: path.display().to_string(),
        source,
    })
}
