use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::strategies::StrategyKind;

use super::{BenchError, MetricsReport, Phase, PhaseTotals, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl TableFormat {
    fn extension(&self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Markdown => "md",
        }
    }
}

pub const TABLE_NAMES: [&str; 9] = [
    "t1_disk_ingest",
    "t2_write_times",
    "t3_gas_ingest",
    "t4_read_times",
    "t5_disk_update",
    "t6_update_times",
    "t7_gas_update",
    "t8_read_after_update",
    "audit",
];

const NA: &str = "n/a";

struct Table {
    name: &'static str,
    title: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn ms(x: f64) -> String {
    format!("{x:.3}")
}

fn int(x: f64) -> String {
    format!("{x:.0}")
}

fn two(x: f64) -> String {
    format!("{x:.2}")
}

fn titled(first: &str, strategies: &[StrategyKind]) -> Vec<String> {
    std::iter::once(first.to_string())
        .chain(strategies.iter().map(|s| s.title().to_string()))
        .collect()
}

fn disk_table(
    report: &MetricsReport,
    phase: Phase,
    name: &'static str,
    title: &'static str,
) -> Table {
    let mut by_range: BTreeMap<(u64, u64), BTreeMap<StrategyKind, u64>> = BTreeMap::new();
    for b in report.buckets.iter().filter(|b| b.phase == phase) {
        by_range
            .entry((b.first_op, b.last_op))
            .or_default()
            .insert(b.strategy, b.cumulative_disk_bytes);
    }
    let rows = by_range
        .into_iter()
        .map(|((first, last), cells)| {
            std::iter::once(format!("{first}-{last}"))
                .chain(report.strategies.iter().map(|s| {
                    cells
                        .get(s)
                        .map_or_else(|| NA.to_string(), |v| v.to_string())
                }))
                .collect()
        })
        .collect();
    Table {
        name,
        title,
        header: titled("RDF triples range", &report.strategies),
        rows,
    }
}

fn phase_totals(report: &MetricsReport, phase: Phase) -> Vec<Option<&PhaseTotals>> {
    report
        .strategies
        .iter()
        .map(|s| report.totals_for(phase, *s))
        .collect()
}

fn time_rows(totals: &[Option<&PhaseTotals>]) -> Vec<Vec<String>> {
    let stat = |label: &str, f: &dyn Fn(&Summary) -> f64| -> Vec<String> {
        std::iter::once(label.to_string())
            .chain(
                totals
                    .iter()
                    .map(|t| t.map_or_else(|| NA.to_string(), |t| ms(f(&t.write_ms)))),
            )
            .collect()
    };
    vec![
        stat("Maximum", &|s| s.max),
        stat("Minimum", &|s| s.min),
        stat("Average", &|s| s.mean()),
        stat("Total", &|s| s.total),
    ]
}

fn gas_table(
    report: &MetricsReport,
    phase: Phase,
    name: &'static str,
    title: &'static str,
) -> Table {
    let totals = phase_totals(report, phase);
    let mut header = vec![String::new()];
    for s in &report.strategies {
        header.push(format!("{} gas", s.title()));
        header.push(format!("{} characters", s.title()));
    }
    let rows = if totals.iter().all(Option::is_none) {
        Vec::new()
    } else {
        let stat = |label: &str, f: &dyn Fn(&Summary) -> String| -> Vec<String> {
            let mut row = vec![label.to_string()];
            for t in &totals {
                match t.and_then(|t| t.gas.as_ref().zip(t.tx_chars.as_ref())) {
                    Some((g, c)) if g.count > 0 => {
                        row.push(f(g));
                        row.push(f(c));
                    }
                    _ => {
                        row.push(NA.to_string());
                        row.push(NA.to_string());
                    }
                }
            }
            row
        };
        vec![
            stat("Max.", &|s| int(s.max)),
            stat("Min.", &|s| int(s.min)),
            stat("Avg.", &|s| two(s.mean())),
            stat("Total", &|s| int(s.total)),
        ]
    };
    Table {
        name,
        title,
        header,
        rows,
    }
}

fn read_table(
    report: &MetricsReport,
    phase: Phase,
    name: &'static str,
    title: &'static str,
) -> Table {
    let reads: Vec<_> = report.reads.iter().filter(|r| r.phase == phase).collect();
    let rows = if reads.is_empty() {
        Vec::new()
    } else {
        let cells = |f: &dyn Fn(&super::ReadRow) -> String| -> Vec<String> {
            report
                .strategies
                .iter()
                .map(|s| {
                    reads
                        .iter()
                        .find(|r| r.strategy == *s)
                        .map_or_else(|| NA.to_string(), |r| f(r))
                })
                .collect()
        };
        vec![
            std::iter::once("Total time".to_string())
                .chain(cells(&|r| ms(r.duration_ms)))
                .collect(),
            std::iter::once("Triples".to_string())
                .chain(cells(&|r| r.triples.to_string()))
                .collect(),
        ]
    };
    Table {
        name,
        title,
        header: titled("", &report.strategies),
        rows,
    }
}

fn update_time_table(report: &MetricsReport) -> Table {
    let totals = phase_totals(report, Phase::Update);
    let rows = if report.updates.is_empty() {
        Vec::new()
    } else {
        let mut rows = time_rows(&totals);
        rows.pop();
        let cells = |f: &dyn Fn(&super::UpdateRow) -> f64| -> Vec<String> {
            report
                .strategies
                .iter()
                .map(|s| {
                    report
                        .updates
                        .iter()
                        .find(|u| u.strategy == *s)
                        .map_or_else(|| NA.to_string(), |u| ms(f(u)))
                })
                .collect()
        };
        rows.push(
            std::iter::once("Updating (time only)".to_string())
                .chain(cells(&|u| u.update_ms))
                .collect(),
        );
        rows.push(
            std::iter::once("Total time (update and reconstruction)".to_string())
                .chain(cells(&|u| u.total_ms))
                .collect(),
        );
        rows
    };
    Table {
        name: "t6_update_times",
        title: "Time to update the knowledge graph (ms)",
        header: titled("", &report.strategies),
        rows,
    }
}

fn audit_table(report: &MetricsReport) -> Table {
    let header = [
        "batches_checked",
        "matches",
        "mismatches",
        "orphans",
        "unanchored",
        "duplicates",
    ]
    .map(String::from)
    .to_vec();
    let rows = report
        .audit
        .iter()
        .map(|a| {
            vec![
                a.batches_checked.to_string(),
                a.matches.to_string(),
                a.mismatches.len().to_string(),
                a.orphans.len().to_string(),
                a.unanchored.len().to_string(),
                a.duplicates.len().to_string(),
            ]
        })
        .collect();
    Table {
        name: "audit",
        title: "Anchor audit",
        header,
        rows,
    }
}

fn build(report: &MetricsReport) -> Vec<Table> {
    let ingest_totals = phase_totals(report, Phase::Ingest);
    vec![
        disk_table(
            report,
            Phase::Ingest,
            "t1_disk_ingest",
            "Cumulative ledger bytes while storing",
        ),
        Table {
            name: "t2_write_times",
            title: "Time per write call while storing (ms)",
            header: titled("", &report.strategies),
            rows: if ingest_totals.iter().all(Option::is_none) {
                Vec::new()
            } else {
                time_rows(&ingest_totals)
            },
        },
        gas_table(
            report,
            Phase::Ingest,
            "t3_gas_ingest",
            "Gas per public transaction while storing",
        ),
        read_table(
            report,
            Phase::Ingest,
            "t4_read_times",
            "Time to read and reconstruct the graph (ms)",
        ),
        disk_table(
            report,
            Phase::Update,
            "t5_disk_update",
            "Cumulative ledger bytes while updating",
        ),
        update_time_table(report),
        gas_table(
            report,
            Phase::Update,
            "t7_gas_update",
            "Gas per public transaction while updating",
        ),
        read_table(
            report,
            Phase::Update,
            "t8_read_after_update",
            "Time to read and reconstruct the updated graph (ms)",
        ),
        audit_table(report),
    ]
}

fn to_csv(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header).expect("in-memory write");
    for row in &t.rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

fn to_markdown(t: &Table) -> String {
    let escape = |c: &String| c.replace('|', "\\|");
    let mut out = format!("## {}\n\n", t.title);
    out.push_str(&format!(
        "| {} |\n",
        t.header.iter().map(escape).collect::<Vec<_>>().join(" | ")
    ));
    out.push_str(&format!("|{}\n", "---|".repeat(t.header.len())));
    for row in &t.rows {
        out.push_str(&format!(
            "| {} |\n",
            row.iter().map(escape).collect::<Vec<_>>().join(" | ")
        ));
    }
    out
}

/// File name and content of every table.
pub fn render_tables(report: &MetricsReport, format: TableFormat) -> Vec<(String, String)> {
    build(report)
        .iter()
        .map(|t| {
            let body = match format {
                TableFormat::Csv => to_csv(t),
                TableFormat::Markdown => to_markdown(t),
            };
            (format!("{}.{}", t.name, format.extension()), body)
        })
        .collect()
}

/// Writes every table in `format` into `dir`. Returns the paths written.
pub fn emit_tables(
    report: &MetricsReport,
    dir: &Path,
    format: TableFormat,
) -> Result<Vec<PathBuf>, BenchError> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    render_tables(report, format)
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| BenchError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{BucketRow, ReadRow};

    #[test]
    fn empty_report_is_header_only() {
        let report = MetricsReport::default();
        for (name, body) in render_tables(&report, TableFormat::Csv) {
            assert_eq!(body.lines().count(), 1, "{name}");
        }
        for (name, body) in render_tables(&report, TableFormat::Markdown) {
            assert_eq!(body.lines().count(), 4, "{name}");
        }
    }

    fn sample() -> MetricsReport {
        let mut s = Summary::default();
        s.add(2.0);
        s.add(4.0);
        let totals = |strategy, gas: Option<Summary>| PhaseTotals {
            phase: Phase::Ingest,
            strategy,
            ops: 2,
            write_ms: s,
            gas,
            tx_chars: gas,
            op_chars: s,
            ledger_txs: 1,
            anchor_txs: 0,
            warnings: 0,
            disk_bytes: 10,
        };
        MetricsReport {
            strategies: vec![StrategyKind::PublicDirect, StrategyKind::PrivateBatched],
            bucket_width: 2,
            buckets: vec![BucketRow {
                phase: Phase::Ingest,
                strategy: StrategyKind::PublicDirect,
                first_op: 1,
                last_op: 2,
                ops: 2,
                cumulative_disk_bytes: 500,
                write_ms: s,
                gas: Some(s),
                tx_chars: Some(s),
                op_chars: s,
            }],
            totals: vec![
                totals(StrategyKind::PublicDirect, Some(s)),
                totals(StrategyKind::PrivateBatched, None),
            ],
            reads: vec![ReadRow {
                phase: Phase::Ingest,
                strategy: StrategyKind::PrivateBatched,
                triples: 2,
                duration_ms: 0.5,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn private_gas_is_not_applicable() {
        let files = render_tables(&sample(), TableFormat::Csv);
        let gas = &files
            .iter()
            .find(|(n, _)| n == "t3_gas_ingest.csv")
            .unwrap()
            .1;
        assert_eq!(gas.lines().nth(1).unwrap(), "Max.,4,4,n/a,n/a");
        assert_eq!(gas.lines().nth(3).unwrap(), "Avg.,3.00,3.00,n/a,n/a");
        let disk = &files
            .iter()
            .find(|(n, _)| n == "t1_disk_ingest.csv")
            .unwrap()
            .1;
        assert_eq!(disk.lines().nth(1).unwrap(), "1-2,500,n/a");
    }

    #[test]
    fn formats_carry_identical_numbers() {
        let csv = render_tables(&sample(), TableFormat::Csv);
        let md = render_tables(&sample(), TableFormat::Markdown);
        for ((_, c), (_, m)) in csv.iter().zip(&md) {
            let c_cells: Vec<String> = c
                .lines()
                .skip(1)
                .flat_map(|l| l.split(',').map(String::from).collect::<Vec<_>>())
                .collect();
            let m_cells: Vec<String> = m
                .lines()
                .skip(4)
                .flat_map(|l| {
                    l.trim_matches('|')
                        .split(" | ")
                        .map(|s| s.trim().to_string())
                        .collect::<Vec<_>>()
                })
                .collect();
            assert_eq!(c_cells, m_cells);
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        assert_eq!(
            render_tables(&sample(), TableFormat::Markdown),
            render_tables(&sample(), TableFormat::Markdown)
        );
    }
}
