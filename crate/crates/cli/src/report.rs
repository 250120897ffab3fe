//! Reports: a schema-versioned JSON document and a plain-text rendering of it.

use serde_json::{json, Map, Value};

use crate::dsl::StructureDocument;

pub const SCHEMA: &str = "ncw-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    /// Flags in the order they are listed by the command.
    pub flags: Vec<(String, String)>,
    pub structure: Value,
    pub results: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, doc: &StructureDocument) -> Self {
        Report {
            command: command.to_string(),
            flags: Vec::new(),
            structure: structure_echo(doc),
            results: Map::new(),
        }
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.push((name.to_string(), value.to_string()));
        self
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn to_json(&self) -> Value {
        let flags: Map<String, Value> = self
            .flags
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
            .collect();
        json!({
            "schema": SCHEMA,
            "command": { "name": self.command, "flags": flags },
            "structure": self.structure,
            "results": Value::Object(self.results.clone()),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => self.to_text(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("ncw ");
        out.push_str(&self.command);
        for (k, v) in &self.flags {
            out.push_str(&format!(" --{k} {v}"));
        }
        out.push('\n');
        out.push_str("structure:");
        write_value(&mut out, &self.structure, 1);
        for (k, v) in &self.results {
            out.push_str(&format!("{k}:"));
            write_value(&mut out, v, 1);
        }
        out
    }
}

fn structure_echo(doc: &StructureDocument) -> Value {
    let mut m = Map::new();
    if let Some(name) = &doc.name {
        m.insert("name".into(), name.as_str().into());
    }
    m.insert("n".into(), doc.n.into());
    m.insert("kind".into(), doc.spec.kind().into());
    Value::Object(m)
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(if *b { "yes" } else { "no" }.into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("[]".into()),
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::String(_) | Value::Number(_))) => Some(format!(
            "[{}]",
            a.iter()
                .map(|x| scalar(x).expect("scalar"))
                .collect::<Vec<_>>()
                .join("; ")
        )),
        Value::Object(m) if m.is_empty() => Some("{}".into()),
        _ => None,
    }
}

/// Writes `v` after a `key:` already on the line.
fn write_value(out: &mut String, v: &Value, depth: usize) {
    if let Some(s) = scalar(v) {
        out.push_str(&format!(" {s}\n"));
        return;
    }
    out.push('\n');
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                out.push_str(&format!("{pad}{k}:"));
                write_value(out, x, depth + 1);
            }
        }
        Value::Array(a) => {
            for x in a {
                match x {
                    Value::Object(m) if !m.is_empty() => {
                        let mut first = true;
                        for (k, y) in m {
                            let lead = if first { format!("{pad}- ") } else { format!("{pad}  ") };
                            first = false;
                            out.push_str(&format!("{lead}{k}:"));
                            write_value(out, y, depth + 2);
                        }
                    }
                    _ => {
                        out.push_str(&format!("{pad}-"));
                        write_value(out, x, depth + 1);
                    }
                }
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}
