use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// Rows of a result that has a natural tabular form.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// The result of one command: always a JSON value, sometimes also a table.
#[derive(Debug, Clone)]
pub struct Output {
    pub value: Value,
    pub table: Option<Table>,
}

impl Output {
    pub fn value(value: Value) -> Self {
        Output { value, table: None }
    }

    pub fn with_table(value: Value, table: Table) -> Self {
        Output { value, table: Some(table) }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |key: &str| if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn as_table(output: &Output) -> Table {
    if let Some(t) = &output.table {
        return t.clone();
    }
    let mut pairs = Vec::new();
    flatten("", &output.value, &mut pairs);
    Table {
        headers: vec!["key".into(), "value".into()],
        rows: pairs.into_iter().map(|(k, v)| vec![k, v]).collect(),
    }
}

fn csv(table: &Table) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(&table.headers).expect("in-memory write");
    for row in &table.rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}

fn aligned(table: &Table) -> String {
    let mut widths: Vec<usize> = table.headers.iter().map(|h| h.chars().count()).collect();
    for row in &table.rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[String]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&table.headers);
    line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for row in &table.rows {
        line(row);
    }
    out
}

/// Renders `output` as UTF-8 text ending in a newline.
pub fn render(output: &Output, format: Format) -> String {
    match format {
        Format::Json => format!("{}\n", serde_json::to_string(&output.value).expect("JSON values serialize")),
        Format::Csv => csv(&as_table(output)),
        Format::Pretty => match &output.table {
            Some(t) => aligned(t),
            None => format!("{}\n", serde_json::to_string_pretty(&output.value).expect("JSON values serialize")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_flattens_nested_values() {
        let out = Output::value(json!({"a": {"re": 1.0, "im": 0.5}, "b": "1/2"}));
        assert_eq!(render(&out, Format::Csv), "key,value\na.re,1.0\na.im,0.5\nb,1/2\n");
    }

    #[test]
    fn pretty_tables_align() {
        let table = Table { headers: vec!["x".into(), "long".into()], rows: vec![vec!["123".into(), "1".into()]] };
        let text = render(&Output::with_table(json!([]), table), Format::Pretty);
        assert_eq!(text, "x    long\n---  ----\n123  1\n");
    }
}
