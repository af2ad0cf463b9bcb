//! Rendering of reports as JSON, CSV or aligned text tables.

use std::fmt::Write as _;

use anyhow::Result;
use num_complex::Complex64;
use scissorsim_core::protocols::ScissorsReport;
use scissorsim_core::verify::VerifyReport;
use scissorsim_core::TeleportationReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    config: &'a C,
    report: &'a R,
}

pub fn json<C: Serialize, R: Serialize>(config: &C, report: &R) -> Result<String> {
    let mut out = serde_json::to_string_pretty(&Envelope { config, report })?;
    out.push('\n');
    Ok(out)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .delimiter(b',')
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn csv_rows<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv_writer();
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.10}", z.re)
    } else {
        format!("{:.10}{:+.10}i", z.re, z.im)
    }
}

fn optional(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.10}"))
}

fn clicks(map: &std::collections::BTreeMap<String, u32>) -> String {
    map.iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScissorsRow {
    pub pattern: String,
    pub corrected: bool,
    pub announcement_probability: f64,
    pub success_probability: f64,
}

pub fn scissors_csv(r: &ScissorsReport) -> Result<String> {
    csv_rows(r.patterns.iter().map(|p| ScissorsRow {
        pattern: clicks(&p.clicks),
        corrected: p.corrected,
        announcement_probability: p.announcement_probability,
        success_probability: p.success_probability,
    }))
}

pub fn scissors_table(r: &ScissorsReport) -> String {
    let mut s = String::new();
    let alphas: Vec<String> = r.alphas.iter().map(|&a| complex(a)).collect();
    let _ = writeln!(s, "quantum scissors, eta = {}", r.eta);
    let _ = writeln!(s, "input alphas: {}", alphas.join(", "));
    let _ = writeln!(
        s,
        "{:<12} {:<10} {:>16} {:>16}",
        "pattern", "corrected", "announced", "success"
    );
    for p in &r.patterns {
        let _ = writeln!(
            s,
            "{:<12} {:<10} {:>16.12} {:>16.12}",
            clicks(&p.clicks),
            if p.corrected { "pi on b" } else { "none" },
            p.announcement_probability,
            p.success_probability
        );
    }
    let _ = writeln!(
        s,
        "{:<12} {:<10} {:>16.12} {:>16.12}",
        "total", "", r.announcement_probability, r.success_probability
    );
    match &r.output_amplitudes {
        Some(out) => {
            let _ = writeln!(s, "output on b: {}|0> + {}|1>", complex(out[0]), complex(out[1]));
        }
        None => {
            let _ = writeln!(s, "output on b: never heralded");
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportRow {
    pub d: usize,
    pub eta: f64,
    pub success_probability: f64,
    pub announcement_probability: f64,
    pub false_announcement_probability: f64,
    pub paper_fidelity: f64,
    pub conditional_fidelity: Option<f64>,
    pub two_photon_event_probability: f64,
}

impl From<&TeleportationReport> for TeleportRow {
    fn from(r: &TeleportationReport) -> Self {
        Self {
            d: r.d,
            eta: r.eta,
            success_probability: r.success_probability,
            announcement_probability: r.announcement_probability,
            false_announcement_probability: r.false_announcement_probability,
            paper_fidelity: r.paper_fidelity,
            conditional_fidelity: r.conditional_fidelity,
            two_photon_event_probability: r.two_photon_event_probability,
        }
    }
}

pub fn teleport_csv(r: &TeleportationReport) -> Result<String> {
    csv_rows([TeleportRow::from(r)])
}

pub fn teleport_table(r: &TeleportationReport) -> String {
    let mut s = String::new();
    let gammas: Vec<String> = r.gammas.iter().map(|&g| complex(g)).collect();
    let _ = writeln!(s, "qudit teleportation, d = {}, eta = {}", r.d, r.eta);
    let _ = writeln!(s, "gammas: {}", gammas.join(", "));
    let rows = [
        ("success probability", format!("{:.12}", r.success_probability)),
        (
            "announcement probability",
            format!("{:.12}", r.announcement_probability),
        ),
        (
            "false announcement",
            format!("{:.12}", r.false_announcement_probability),
        ),
        ("fidelity 1 - eta(1 - eta)", format!("{:.12}", r.paper_fidelity)),
        ("conditional fidelity", optional(r.conditional_fidelity)),
        (
            "two-photon event probability",
            format!("{:.12}", r.two_photon_event_probability),
        ),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<30} {v}");
    }
    let _ = writeln!(
        s,
        "{:<40} {:<24} {:>16} {:>16}",
        "pattern", "corrected", "announced", "success"
    );
    for p in &r.per_pattern {
        let corrected = if p.corrected_modes.is_empty() {
            "none".to_string()
        } else {
            p.corrected_modes.join(" ")
        };
        let _ = writeln!(
            s,
            "{:<40} {:<24} {:>16.12} {:>16.12}",
            clicks(&p.clicks),
            corrected,
            p.announcement_probability,
            p.success_probability
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub success: f64,
    pub paper_fidelity: f64,
    pub conditional_fidelity: Option<f64>,
    pub false_announcement: f64,
}

impl From<&TeleportationReport> for SweepRow {
    fn from(r: &TeleportationReport) -> Self {
        Self {
            eta: r.eta,
            success: r.success_probability,
            paper_fidelity: r.paper_fidelity,
            conditional_fidelity: r.conditional_fidelity,
            false_announcement: r.false_announcement_probability,
        }
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    csv_rows(rows)
}

pub fn sweep_table(d: usize, rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "efficiency sweep, d = {d}");
    let _ = writeln!(
        s,
        "{:>6} {:>16} {:>16} {:>16} {:>16}",
        "eta", "success", "1-eta(1-eta)", "conditional", "false"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>6.3} {:>16.12} {:>16.12} {:>16} {:>16.12}",
            r.eta,
            r.success,
            r.paper_fidelity,
            r.conditional_fidelity
                .map_or_else(|| "n/a".to_string(), |f| format!("{f:.12}")),
            r.false_announcement
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub checks: Vec<CheckRow>,
    pub notes: Vec<String>,
    pub elapsed_seconds: f64,
}

impl From<&VerifyReport> for VerifySummary {
    fn from(r: &VerifyReport) -> Self {
        Self {
            passed: r.all_passed(),
            checks: r
                .checks
                .iter()
                .map(|c| CheckRow {
                    id: c.id.to_string(),
                    passed: c.passed,
                    detail: c.detail.clone(),
                })
                .collect(),
            notes: r.notes.clone(),
            elapsed_seconds: r.elapsed.as_secs_f64(),
        }
    }
}

pub fn verify_csv(r: &VerifySummary) -> Result<String> {
    csv_rows(&r.checks)
}

pub fn verify_table(r: &VerifySummary) -> String {
    let mut s = String::new();
    let width = r.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
    for c in &r.checks {
        let _ = writeln!(
            s,
            "{} {:<width$}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.detail
        );
    }
    if !r.notes.is_empty() {
        let _ = writeln!(s, "notes:");
        for n in &r.notes {
            let _ = writeln!(s, "  {n}");
        }
    }
    let passed = r.checks.iter().filter(|c| c.passed).count();
    let _ = writeln!(
        s,
        "{passed}/{} checks passed in {:.2} s",
        r.checks.len(),
        r.elapsed_seconds
    );
    s
}
