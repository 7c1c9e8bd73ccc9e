//! Machine-readable reports: a command echo, stable input digests, and an
//! ordered key-value payload with an optional table. Rendering is
//! deterministic byte for byte; timing never enters the payload.

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Structured,
    Csv,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<(String, String)>,
    pub payload: Vec<(String, String)>,
    pub table: Option<Table>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub header: String,
    pub rows: Vec<String>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report { command: command.into(), ..Default::default() }
    }

    pub fn input(&mut self, tag: impl Into<String>, bytes: &[u8]) {
        self.inputs.push((tag.into(), digest(bytes)));
    }

    pub fn kv(&mut self, key: impl Into<String>, value: impl ToString) {
        self.payload.push((key.into(), value.to_string()));
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Structured => {
                let mut out = String::new();
                out.push_str("etale-report: 1\n");
                out.push_str(&format!("command: {}\n", self.command));
                for (tag, hash) in &self.inputs {
                    out.push_str(&format!("input: {tag} sha256:{hash}\n"));
                }
                for (k, v) in &self.payload {
                    out.push_str(&format!("{k}: {v}\n"));
                }
                if let Some(table) = &self.table {
                    out.push_str(&format!("table: {}\n", table.header));
                    for row in &table.rows {
                        out.push_str(&format!("row: {row}\n"));
                    }
                }
                out
            }
            ReportFormat::Csv => match &self.table {
                Some(table) => {
                    let mut out = String::new();
                    out.push_str(&table.header);
                    out.push('\n');
                    for row in &table.rows {
                        out.push_str(row);
                        out.push('\n');
                    }
                    out
                }
                None => {
                    let mut out = String::from("key,value\n");
                    for (k, v) in &self.payload {
                        out.push_str(&format!("{k},{v}\n"));
                    }
                    out
                }
            },
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex_string(&h.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_deterministic() {
        let mut r = Report::new("orbits a.spec");
        r.input("a.spec", b"payload");
        r.kv("orbit-count", 2);
        r.kv("orbit-0", "{-1, 1}");
        let one = r.render(ReportFormat::Structured);
        let two = r.render(ReportFormat::Structured);
        assert_eq!(one, two);
        assert!(one.starts_with("etale-report: 1\n"));
    }

    #[test]
    fn csv_prefers_the_table() {
        let mut r = Report::new("spectrum");
        r.table = Some(Table {
            header: "class_word,min_length,iterations,converged,degenerate".into(),
            rows: vec!["a,1.000,10,true,false".into()],
        });
        let csv = r.render(ReportFormat::Csv);
        assert_eq!(
            csv,
            "class_word,min_length,iterations,converged,degenerate\na,1.000,10,true,false\n"
        );
    }
}
