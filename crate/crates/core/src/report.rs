//! Serialization of run results as `key = value` text or CSV tables.

use std::fmt::Write as _;

use crate::adversary::CheatReport;
use crate::bitcommit::{BindingReport, CommitmentOutcome};
use crate::bounds::{BoundReport, LemmaReport, NormIdentityReport};
use crate::protocol::Transcript;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
enum Section {
    Fields(Vec<(String, String)>),
    Table { columns: Vec<String>, rows: Vec<Vec<String>> },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    sections: Vec<(String, Section)>,
}

/// Shortest round-trip representation, so equal values print equal bytes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn fmt_bool(b: bool) -> String {
    (b as u8).to_string()
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a `key = value` section.
    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Section::Fields(Vec::new())));
        self
    }

    pub fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        if !matches!(self.sections.last(), Some((_, Section::Fields(_)))) {
            self.section("run");
        }
        if let Some((_, Section::Fields(fields))) = self.sections.last_mut() {
            fields.push((key.to_string(), value.to_string()));
        }
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.field(key, fmt_f64(value))
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.field(key, value)
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<String>>) -> &mut Self {
        let columns = columns.iter().map(|c| c.to_string()).collect();
        self.sections.push((name.to_string(), Section::Table { columns, rows }));
        self
    }

    /// Value of the first field named `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.sections.iter().find_map(|(_, s)| match s {
            Section::Fields(fields) => fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str()),
            Section::Table { .. } => None,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, (name, section)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{name}]");
            match section {
                Section::Fields(fields) => {
                    for (k, v) in fields {
                        let _ = writeln!(out, "{k} = {v}");
                    }
                }
                Section::Table { columns, rows } => {
                    for (r, row) in rows.iter().enumerate() {
                        for (k, v) in columns.iter().zip(row) {
                            let _ = writeln!(out, "{name}.{r}.{k} = {v}");
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, (name, section)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            let _ = w.write_record([format!("# {name}")]);
            match section {
                Section::Fields(fields) => {
                    let _ = w.write_record(["key", "value"]);
                    for (k, v) in fields {
                        let _ = w.write_record([k, v]);
                    }
                }
                Section::Table { columns, rows } => {
                    let _ = w.write_record(columns);
                    for row in rows {
                        let _ = w.write_record(row);
                    }
                }
            }
            let bytes = w.into_inner().unwrap_or_default();
            out.push_str(&String::from_utf8_lossy(&bytes));
        }
        out
    }
}

pub fn transcript_report(report: &mut Report, t: &Transcript) {
    report
        .section("transcript")
        .field("n", t.n)
        .field("r0", &t.r0)
        .field("r1", &t.r1)
        .field("s", &t.s)
        .field("c", fmt_bool(t.c))
        .field("d0", &t.d0)
        .field("d1", &t.d1)
        .field("b", fmt_bool(t.b))
        .field("x0", &t.x0)
        .field("x1", &t.x1)
        .field("b_prime", t.b_prime.map_or("-".to_string(), fmt_bool))
        .field("t0", &t.t0)
        .field("t1", &t.t1)
        .field(
            "surviving",
            t.surviving.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
        )
        .field("output", t.output.as_ref().map_or("-".to_string(), |o| format!("{}@{}", o.bits, o.agent)))
        .field("aborted", fmt_bool(t.aborted));
    let rows = t
        .messages
        .iter()
        .map(|m| {
            vec![
                m.step.clone(),
                m.sender.to_string(),
                m.receiver.to_string(),
                m.payload.to_string(),
                fmt_f64(m.emitted.t),
                fmt_f64(m.received.t),
            ]
        })
        .collect();
    report.table("messages", &["step", "sender", "receiver", "payload", "emitted", "received"], rows);
}

pub fn cheat_report(report: &mut Report, r: &CheatReport) {
    report
        .section("cheat")
        .field("strategy", &r.strategy)
        .field("n", r.n)
        .field("trials", r.trials)
        .field("successes", r.successes)
        .float("estimate", r.estimate())
        .float("standard_error", r.standard_error())
        .float("region0_estimate", r.region_estimate(0))
        .float("region1_estimate", r.region_estimate(1))
        .float("gamma", r.gamma)
        .field("tolerant_successes", r.tolerant_successes)
        .flag("quantum_between_bobs", r.has_quantum_message_between_bobs());
}

pub fn bound_report(report: &mut Report, b: &BoundReport) {
    let opt = |x: Option<f64>| x.map_or("-".to_string(), fmt_f64);
    report
        .section("bounds")
        .field("n", b.n)
        .float("bound", b.bound)
        .float("cheat_lower", b.cheat_lower)
        .float("gap", b.gap)
        .field("gamma", opt(b.gamma))
        .field("entropy", opt(b.entropy))
        .field("error_bound", opt(b.error_bound));
}

pub fn norm_report(report: &mut Report, r: &NormIdentityReport) {
    report
        .section("normcheck")
        .field("cases", r.cases.len())
        .float("max_norm_error", r.max_norm_error)
        .float("max_idempotence_error", r.max_idempotence_error)
        .float("max_projector_error", r.max_projector_error)
        .flag("pass", r.pass);
}

pub fn lemma_report(report: &mut Report, r: &LemmaReport) {
    report
        .section("lemmas")
        .field("dim", r.dim)
        .field("lemma1_instances", r.lemma1_instances)
        .field("lemma1_violations", r.lemma1_violations)
        .float("lemma1_min_slack", r.lemma1_min_slack)
        .field("lemma2_instances", r.lemma2_instances)
        .field("lemma2_violations", r.lemma2_violations)
        .float("lemma2_min_slack", r.lemma2_min_slack)
        .flag("xor_family_orthogonal", r.xor_family_orthogonal)
        .flag("pass", r.pass());
}

pub fn commitment_report(report: &mut Report, o: &CommitmentOutcome) {
    report
        .section("commitment")
        .field("b", fmt_bool(o.b))
        .field("unveil", &o.unveil.payload)
        .float("unveil_time", o.unveil.received.t)
        .flag("string_matches", o.string_matches)
        .flag("in_window", o.in_window)
        .flag("accepted", o.accepted)
        .float("t_prime", o.t_prime);
}

pub fn binding_report(report: &mut Report, name: &str, b: &BindingReport) {
    report
        .section(name)
        .field("strategy", &b.strategy)
        .field("n", b.n)
        .field("trials", b.trials)
        .float("p0", b.p0)
        .float("p1", b.p1)
        .float("sum", b.sum)
        .float("standard_error", b.standard_error)
        .float("bound", b.bound)
        .flag("within_bound", b.within_bound);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new();
        r.field("n", 3).float("p", 0.75).flag("ok", true);
        r.table("rows", &["a", "b"], vec![vec!["1".into(), "x,y".into()]]);
        r
    }

    #[test]
    fn text_lines() {
        assert_eq!(
            sample().to_text(),
            "[run]\nn = 3\np = 0.75\nok = true\n\n[rows]\nrows.0.a = 1\nrows.0.b = x,y\n"
        );
    }

    #[test]
    fn csv_quotes_fields() {
        let csv = sample().to_csv();
        assert!(csv.starts_with("# run\nkey,value\nn,3\n"));
        assert!(csv.contains("1,\"x,y\""));
    }

    #[test]
    fn lookup() {
        assert_eq!(sample().get("p"), Some("0.75"));
        assert_eq!(sample().get("a"), None);
    }
}
