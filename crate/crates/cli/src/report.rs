//! Report envelope and CSV output.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::mapfile::SCHEMA;

/// A JSON report. Keys are kept sorted so equal runs print equal bytes.
pub struct Report {
    fields: Map<String, Value>,
    flags: Vec<String>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("schema".into(), SCHEMA.into());
        fields.insert("command".into(), command.into());
        Report { fields, flags: Vec::new() }
    }

    pub fn set<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.fields.insert(key.into(), v);
        self
    }

    /// Marks a numerical failure; the run exits with status 2.
    pub fn flag(&mut self, name: &str) {
        if !self.flags.iter().any(|f| f == name) {
            self.flags.push(name.into());
        }
    }

    pub fn flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut fields = self.fields.clone();
        let mut flags = self.flags.clone();
        flags.sort();
        fields.insert("flags".into(), flags.into());
        let mut s = serde_json::to_string_pretty(&Value::Object(fields)).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Header row plus records, `.` decimals and LF endings.
pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Self {
        Csv { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip form; non-finite values as `nan`, `inf`, `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted() {
        let mut r = Report::new("x");
        r.set("zeta", 1).set("alpha", 2);
        let s = r.to_json();
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
        assert!(s.contains("\"flags\": []"));
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["n", "value"]);
        c.push(vec!["1".into(), num(0.5)]);
        c.push(vec!["2".into(), num(f64::NAN)]);
        assert_eq!(c.render(), "n,value\n1,0.5\n2,nan\n");
    }
}
