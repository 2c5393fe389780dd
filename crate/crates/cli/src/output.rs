use std::str::FromStr;

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A CSV body together with the metadata printed in JSON mode.
pub struct Report {
    pub csv: String,
    pub meta: Map<String, Value>,
}

impl Report {
    pub fn new(csv: String) -> Self {
        Report {
            csv,
            meta: Map::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv.clone(),
            Format::Json => {
                let mut out = Map::new();
                out.insert("meta".into(), Value::Object(self.meta.clone()));
                out.insert("rows".into(), Value::Array(csv_rows(&self.csv)));
                let mut s =
                    serde_json::to_string_pretty(&Value::Object(out)).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

fn cell(text: &str) -> Value {
    if text.is_empty() {
        return Value::Null;
    }
    if text.parse::<f64>().is_ok() && !text.contains(['i', 'I', 'n', 'N']) {
        if let Ok(v) = Value::from_str(text) {
            return v;
        }
    }
    Value::String(text.to_string())
}

/// One object per CSV row, keyed by the header.
fn csv_rows(csv: &str) -> Vec<Value> {
    let mut lines = csv.lines();
    let header: Vec<&str> = match lines.next() {
        Some(h) => h.split(',').collect(),
        None => return Vec::new(),
    };
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let obj: Map<String, Value> = header
                .iter()
                .zip(line.split(','))
                .map(|(k, v)| (k.to_string(), cell(v)))
                .collect();
            Value::Object(obj)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_mirrors_csv() {
        let r = Report::new("a,b,c\n1,0.50,x\n2,,inf\n".into()).meta("version", "0.1.0");
        let v: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["meta"]["version"], "0.1.0");
        assert_eq!(v["rows"][0]["a"].to_string(), "1");
        assert_eq!(v["rows"][0]["b"].to_string(), "0.50");
        assert_eq!(v["rows"][0]["c"], "x");
        assert_eq!(v["rows"][1]["b"], Value::Null);
        assert_eq!(v["rows"][1]["c"], "inf");
    }
}
