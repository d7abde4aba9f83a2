use std::str::FromStr;

use num::rational::BigRational;
use serde_json::{json, Value as Json};

use super::aad::AadReport;
use super::robustness::{BracketCounts, RobustnessReport};
use crate::error::{Error, Result};
use crate::market::Market;
use crate::oracle::DeviationReport;
use crate::rational::{to_decimal, to_fraction, to_percent};
use crate::stats::{CellKind, GroupStats, Mode, OutcomeStats, PredictionCell, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::invalid(format!("unknown format {s:?}"))),
        }
    }
}

/// A table of string cells rendered as CSV or as a JSON array of objects.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(Vec::new());
                w.write_record(&self.header).expect("in-memory write");
                for r in &self.rows {
                    w.write_record(r).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
            }
            Format::Json => {
                let rows: Vec<Json> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Json::Object(
                            self.header
                                .iter()
                                .zip(r)
                                .map(|(h, v)| (h.to_string(), Json::String(v.clone())))
                                .collect(),
                        )
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&rows).expect("json");
                s.push('\n');
                s
            }
        }
    }
}

fn opt_fraction(r: Option<BigRational>) -> String {
    r.map(|r| to_fraction(&r)).unwrap_or_default()
}

fn opt_percent(r: Option<BigRational>) -> String {
    r.map(|r| to_percent(&r)).unwrap_or_default()
}

/// (fraction, decimal, stderr) columns; rates show as percentages.
fn value_columns(value: &Value, percent: bool) -> [String; 3] {
    match value {
        Value::Exact(r) => [
            to_fraction(r),
            if percent {
                to_percent(r)
            } else {
                to_decimal(r, 2)
            },
            String::new(),
        ],
        Value::Estimate { mean, stderr } => {
            let k = if percent { 100.0 } else { 1.0 };
            [
                String::new(),
                format!("{:.2}", mean * k),
                format!("{:.2}", stderr * k),
            ]
        }
    }
}

/// Predicted treatment summary cells.
pub fn render_cells(cells: &[PredictionCell], format: Format) -> String {
    let rows = cells
        .iter()
        .map(|c| {
            let percent = c.kind == CellKind::MatchRate;
            let [f, d, e] = value_columns(&c.value, percent);
            vec![
                c.treatment.label().to_string(),
                c.row.clone(),
                if percent { "percent" } else { "points" }.to_string(),
                f,
                d,
                e,
            ]
        })
        .collect();
    Table {
        header: vec!["treatment", "row", "unit", "fraction", "decimal", "stderr"],
        rows,
    }
    .render(format)
}

fn group_name(market: &Market, g: &GroupStats) -> (String, String) {
    (
        g.role.map_or("all".into(), |r| r.label(market)),
        g.type_label.clone().unwrap_or_else(|| "all".into()),
    )
}

/// Match rate, payoff and assignment shares for every group.
pub fn render_outcome_stats(stats: &OutcomeStats, market: &Market, format: Format) -> String {
    let mut rows = Vec::new();
    let seed = match stats.mode {
        Mode::Exact => String::new(),
        Mode::MonteCarlo { seed, .. } => seed.to_string(),
    };
    for g in &stats.groups {
        let (role, ty) = group_name(market, g);
        let mut push = |metric: String, v: &Value, percent: bool| {
            let [f, d, e] = value_columns(v, percent);
            rows.push(vec![
                role.clone(),
                ty.clone(),
                metric,
                f,
                d,
                e,
                seed.clone(),
            ]);
        };
        push("match rate".into(), &g.match_rate, true);
        push("payoff".into(), &g.payoff, false);
        for (k, v) in g.assignment.iter().enumerate() {
            let name = if k < market.schools() {
                format!("P({})", market.school_label(crate::market::SchoolId(k)))
            } else {
                "P(unmatched)".into()
            };
            push(name, v, false);
        }
    }
    for (s, v) in stats.vacancies.iter().enumerate() {
        let [f, d, e] = value_columns(v, false);
        rows.push(vec![
            "all".into(),
            "all".into(),
            format!(
                "vacancies {}",
                market.school_label(crate::market::SchoolId(s))
            ),
            f,
            d,
            e,
            seed.clone(),
        ]);
    }
    Table {
        header: vec![
            "role", "type", "metric", "fraction", "decimal", "stderr", "seed",
        ],
        rows,
    }
    .render(format)
}

pub fn render_aad(report: &AadReport, format: Format) -> String {
    let mut rows = Vec::new();
    for c in std::iter::once(&report.overall).chain(&report.cells) {
        rows.push(vec![
            report.treatment.label().to_string(),
            c.role.clone(),
            c.key.clone(),
            c.deviations.to_string(),
            c.total.to_string(),
            opt_fraction(c.rate()),
            opt_percent(c.rate()),
        ]);
    }
    let mut out = Table {
        header: vec![
            "treatment",
            "role",
            "cell",
            "deviations",
            "total",
            "fraction",
            "percent",
        ],
        rows,
    }
    .render(format);
    if format == Format::Csv && (!report.flagged.is_empty() || report.excluded > 0) {
        out.push_str(&format!(
            "# flagged rows: {:?}; excluded rows: {}\n",
            report.flagged, report.excluded
        ));
    }
    out
}

fn bracket_row(rol_limit: usize, c: &BracketCounts) -> Vec<String> {
    vec![
        rol_limit.to_string(),
        c.label.clone(),
        c.neighborhood_students.to_string(),
        opt_percent(c.report_rate()),
        opt_percent(c.report_rate_first()),
        opt_percent(c.report_rate_second()),
        c.bias_students.to_string(),
        opt_percent(c.bias()),
        opt_percent(c.bias_first()),
        opt_percent(c.bias_second()),
        opt_percent(c.segregation()),
        opt_percent(c.match_rate()),
        c.efficiency()
            .map(|e| to_decimal(&e, 2))
            .unwrap_or_default(),
    ]
}

pub fn render_robustness(report: &RobustnessReport, format: Format) -> String {
    let rows = std::iter::once(&report.overall)
        .chain(&report.brackets)
        .map(|c| bracket_row(report.rol_limit, c))
        .collect();
    Table {
        header: vec![
            "rol_limit",
            "lottery",
            "neighborhood_students",
            "report_rate",
            "report_first",
            "report_second",
            "bias_students",
            "bias",
            "bias_first",
            "bias_second",
            "segregation",
            "match_rate",
            "efficiency",
        ],
        rows,
    }
    .render(format)
}

fn describe_info(market: &Market, info: &crate::info::InfoSet) -> String {
    let mut parts = vec![format!("u={:?}", info.own_type.0)];
    if let Some(r) = info.own_rank {
        parts.push(format!("rank={r}"));
    }
    if let Some(stats) = &info.neighborhood_stats {
        for c in stats {
            parts.push(format!("{}:{:?}", market.school_label(c.school), c.ranks()));
        }
    }
    parts.join(" ")
}

pub fn render_deviation_report(
    report: &DeviationReport,
    market: &Market,
    format: Format,
) -> String {
    let rows = report
        .entries
        .iter()
        .map(|e| {
            vec![
                (e.student.0 + 1).to_string(),
                e.info
                    .own_role
                    .map_or("none".into(), |s| market.school_label(s).to_string()),
                describe_info(market, &e.info),
                e.prescribed.render(market),
                e.best.render(market),
                to_fraction(&e.gain),
                to_decimal(&e.gain, 2),
            ]
        })
        .collect();
    let mut out = Table {
        header: vec![
            "student",
            "neighborhood",
            "info",
            "prescribed",
            "best",
            "gain",
            "gain_decimal",
        ],
        rows,
    }
    .render(format);
    if format == Format::Csv {
        out.push_str(&format!(
            "# verdict: {}; max gain {}\n",
            if report.is_bne() { "BNE" } else { "not BNE" },
            to_fraction(&report.max_gain())
        ));
    }
    out
}

/// Summary JSON for a simulated run.
pub fn simulate_summary(rows: usize, groups: usize, disagreements: usize) -> Json {
    json!({ "rows": rows, "group_rounds": groups, "disagreements": disagreements })
}
