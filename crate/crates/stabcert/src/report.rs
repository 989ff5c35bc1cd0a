//! Structured text reports, rendered as TOML so they can be parsed back.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub enum Item {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Nums(Vec<f64>),
}

impl From<f64> for Item {
    fn from(x: f64) -> Self {
        Item::Num(x)
    }
}
impl From<usize> for Item {
    fn from(x: usize) -> Self {
        Item::Int(x as i64)
    }
}
impl From<u64> for Item {
    fn from(x: u64) -> Self {
        Item::Int(x as i64)
    }
}
impl From<bool> for Item {
    fn from(x: bool) -> Self {
        Item::Bool(x)
    }
}
impl From<&str> for Item {
    fn from(x: &str) -> Self {
        Item::Str(x.to_string())
    }
}
impl From<String> for Item {
    fn from(x: String) -> Self {
        Item::Str(x)
    }
}
impl From<Vec<f64>> for Item {
    fn from(x: Vec<f64>) -> Self {
        Item::Nums(x)
    }
}

fn toml_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

fn toml_str(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl Item {
    fn render(&self) -> String {
        match self {
            Item::Num(x) => toml_num(*x),
            Item::Int(i) => i.to_string(),
            Item::Bool(b) => b.to_string(),
            Item::Str(s) => toml_str(s),
            Item::Nums(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| toml_num(*x)).collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }
}

/// Ordered sections of `key = value` lines.
#[derive(Debug, Default, Clone)]
pub struct Report {
    sections: Vec<(String, Vec<(String, Item)>)>,
}

impl Report {
    pub fn new() -> Self {
        Report { sections: vec![(String::new(), Vec::new())] }
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Vec::new()));
        self
    }

    pub fn put(&mut self, key: &str, value: impl Into<Item>) -> &mut Self {
        self.sections
            .last_mut()
            .expect("root section")
            .1
            .push((key.to_string(), value.into()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, items) in &self.sections {
            if !name.is_empty() {
                if !out.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{name}]");
            }
            for (k, v) in items {
                let _ = writeln!(out, "{k} = {}", v.render());
            }
        }
        out
    }
}
