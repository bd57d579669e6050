//! Formatting helpers for machine-readable output.
//!
//! Every numeric value the tool emits is printed with 12 significant digits
//! in scientific notation, so golden files compare stably across platforms
//! and languages. The JSON builder exists because generic serializers print
//! floats in shortest-round-trip form; here the fixed-width digits are
//! injected as raw JSON numbers.

use std::fmt::Write as _;

/// Formats with 12 significant digits (`7.50000000000e-1` style). The result
/// is a valid JSON number and a valid CSV cell.
pub fn format_sig(value: f64) -> String {
    format!("{value:.11e}")
}

/// Formats an optional value, with empty string for absent (CSV convention).
pub fn format_opt(value: Option<f64>) -> String {
    value.map(format_sig).unwrap_or_default()
}

/// In-memory CSV table with a fixed header; rows must match its arity.
/// Quoting (e.g. for labels containing commas) is handled by the `csv`
/// writer underneath.
pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
    columns: usize,
    rows: usize,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        CsvTable {
            writer,
            columns: header.len(),
            rows: 0,
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut written = 0usize;
        self.writer
            .write_record(cells.into_iter().inspect(|_| written += 1))
            .expect("in-memory write");
        debug_assert_eq!(written, self.columns, "row arity must match the header");
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(self) -> String {
        String::from_utf8(self.writer.into_inner().expect("in-memory flush"))
            .expect("CSV output is UTF-8")
    }
}

/// Minimal JSON object builder with insertion-ordered fields.
#[derive(Debug, Default)]
pub struct JsonObject {
    body: String,
}

fn push_escaped(out: &mut String, text: &str) {
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

impl JsonObject {
    pub fn new() -> Self {
        JsonObject::default()
    }

    fn field(&mut self, key: &str, raw: &str) -> &mut Self {
        if !self.body.is_empty() {
            self.body.push(',');
        }
        push_escaped(&mut self.body, key);
        self.body.push(':');
        self.body.push_str(raw);
        self
    }

    pub fn number(&mut self, key: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.field(key, &format_sig(value))
        } else {
            self.field(key, "null")
        }
    }

    pub fn maybe_number(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        match value {
            Some(v) => self.number(key, v),
            None => self.field(key, "null"),
        }
    }

    pub fn integer(&mut self, key: &str, value: u64) -> &mut Self {
        self.field(key, &value.to_string())
    }

    pub fn boolean(&mut self, key: &str, value: bool) -> &mut Self {
        self.field(key, if value { "true" } else { "false" })
    }

    pub fn string(&mut self, key: &str, value: &str) -> &mut Self {
        let mut raw = String::new();
        push_escaped(&mut raw, value);
        self.field(key, &raw)
    }

    pub fn object(&mut self, key: &str, value: JsonObject) -> &mut Self {
        self.field(key, &value.finish())
    }

    pub fn array_of_objects(&mut self, key: &str, items: Vec<JsonObject>) -> &mut Self {
        let mut raw = String::from("[");
        for (i, item) in items.into_iter().enumerate() {
            if i > 0 {
                raw.push(',');
            }
            raw.push_str(&item.finish());
        }
        raw.push(']');
        self.field(key, &raw)
    }

    pub fn array_of_strings(&mut self, key: &str, items: &[String]) -> &mut Self {
        let mut raw = String::from("[");
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                raw.push(',');
            }
            push_escaped(&mut raw, item);
        }
        raw.push(']');
        self.field(key, &raw)
    }

    pub fn finish(self) -> String {
        format!("{{{}}}", self.body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.75), "7.50000000000e-1");
        assert_eq!(format_sig(0.0), "0.00000000000e0");
        assert_eq!(format_sig(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(format_sig(-123.456), "-1.23456000000e2");
    }

    #[test]
    fn csv_table_quotes_awkward_cells() {
        let mut table = CsvTable::new(&["policy", "value"]);
        table.row(["mrs(q1=0.7,q2=1)", "0.5"]);
        assert_eq!(table.rows(), 1);
        assert_eq!(
            table.finish(),
            "policy,value\n\"mrs(q1=0.7,q2=1)\",0.5\n"
        );
    }

    #[test]
    fn builder_emits_parseable_json() {
        let mut inner = JsonObject::new();
        inner.number("avg_via", 0.75).maybe_number("avg_aoii", None);
        let mut obj = JsonObject::new();
        obj.string("policy", "rs \"quoted\"")
            .integer("slots", 999)
            .boolean("pass", true)
            .object("metrics", inner)
            .array_of_strings("notes", &["a".to_string(), "b\nb".to_string()]);
        let text = obj.finish();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["metrics"]["avg_via"], 0.75);
        assert!(parsed["metrics"]["avg_aoii"].is_null());
        assert_eq!(parsed["policy"], "rs \"quoted\"");
        assert_eq!(parsed["notes"][1], "b\nb");
        assert_eq!(parsed["slots"], 999);
    }
}
