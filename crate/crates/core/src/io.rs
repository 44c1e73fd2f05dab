//! CSV input and output, bundled fixtures and DOT export.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::dominance::HasseDiagram;
use crate::error::{Error, Result};
use crate::model::{validate_criteria, CriterionSpec, Direction, QualityTable, Scale};

/// Accuracy, AUC and Brier score of eight classifiers on sixteen UCI data sets.
pub const UCI_FIXTURES_CSV: &str = include_str!("../data/uci_fixtures.csv");

/// Criteria of the bundled fixtures: all metric, Brier score minimized.
pub fn uci_criteria() -> Vec<CriterionSpec> {
    vec![
        CriterionSpec::new("accuracy", Scale::Metric, Direction::Maximize),
        CriterionSpec::new("auc", Scale::Metric, Direction::Maximize),
        CriterionSpec::new("brier", Scale::Metric, Direction::Minimize),
    ]
}

pub fn uci_fixtures() -> QualityTable {
    read_csv(UCI_FIXTURES_CSV.as_bytes(), &uci_criteria()).expect("bundled fixtures are valid")
}

pub fn load_csv(path: impl AsRef<Path>, criteria: &[CriterionSpec]) -> Result<QualityTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Csv {
        location: path.display().to_string(),
        message: e.to_string(),
    })?;
    read_csv(file, criteria)
}

/// Reads a long-format table with header `classifier,dataset,criterion,value`.
/// Classifiers and data sets keep their order of first appearance; criteria
/// follow `criteria`.
pub fn read_csv<R: Read>(reader: R, criteria: &[CriterionSpec]) -> Result<QualityTable> {
    validate_criteria(criteria)?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error("header", e))?.clone();
    let expected = ["classifier", "dataset", "criterion", "value"];
    if header.len() != 4 || header.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Csv {
            location: "header".into(),
            message: format!("expected `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let crit_index: HashMap<&str, usize> = criteria.iter().enumerate().map(|(k, c)| (c.name.as_str(), k)).collect();
    let mut classifiers: Vec<String> = Vec::new();
    let mut datasets: Vec<String> = Vec::new();
    let mut cells: HashMap<(usize, usize, usize), f64> = HashMap::new();
    for (n, record) in rdr.records().enumerate() {
        let line = format!("line {}", n + 2);
        let record = record.map_err(|e| csv_error(&line, e))?;
        if record.len() != 4 {
            return Err(Error::Csv {
                location: line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let (c, d, k, v) = (&record[0], &record[1], &record[2], &record[3]);
        let Some(&k_idx) = crit_index.get(k) else {
            return Err(Error::Csv {
                location: line,
                message: format!("criterion `{k}` is not configured"),
            });
        };
        let value: f64 = v.parse().map_err(|_| Error::Csv {
            location: line.clone(),
            message: format!("value `{v}` is not a number"),
        })?;
        let c_idx = intern(&mut classifiers, c);
        let d_idx = intern(&mut datasets, d);
        if cells.insert((c_idx, d_idx, k_idx), value).is_some() {
            return Err(Error::Csv {
                location: line,
                message: format!("duplicate cell ({c}, {d}, {k})"),
            });
        }
    }
    let mut missing = Vec::new();
    for (ci, c) in classifiers.iter().enumerate() {
        for (di, d) in datasets.iter().enumerate() {
            for (ki, k) in criteria.iter().enumerate() {
                if !cells.contains_key(&(ci, di, ki)) {
                    missing.push(format!("({c}, {d}, {})", k.name));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Csv {
            location: "table".into(),
            message: format!("missing cells: {}", missing.join(", ")),
        });
    }
    QualityTable::from_fn(classifiers, datasets, criteria.to_vec(), |c, d, k| cells[&(c, d, k)])
}

fn intern(names: &mut Vec<String>, name: &str) -> usize {
    match names.iter().position(|n| n == name) {
        Some(i) => i,
        None => {
            names.push(name.to_string());
            names.len() - 1
        }
    }
}

fn csv_error(location: &str, e: csv::Error) -> Error {
    Error::Csv {
        location: location.to_string(),
        message: e.to_string(),
    }
}

/// Writes `table` in the long format read by [`read_csv`].
pub fn write_csv<W: Write>(table: &QualityTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| csv_error("output", e);
    w.write_record(["classifier", "dataset", "criterion", "value"]).map_err(io)?;
    for (c, cname) in table.classifiers().iter().enumerate() {
        for (d, dname) in table.datasets().iter().enumerate() {
            for (k, crit) in table.criteria().iter().enumerate() {
                let v = table.value(c, d, k).to_string();
                w.write_record([cname.as_str(), dname.as_str(), crit.name.as_str(), v.as_str()]).map_err(io)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Deterministic DOT rendering, top to bottom.
pub fn export_dot(h: &HasseDiagram) -> String {
    let mut labels: Vec<String> = (0..h.nodes.len()).map(|i| h.label(i)).collect();
    labels.sort();
    let mut edges = h.edge_labels();
    edges.sort();
    let mut out = String::from("digraph hasse {\n  rankdir=TB;\n");
    for l in &labels {
        let _ = writeln!(out, "  {};", quote(l));
    }
    for (a, b) in &edges {
        let _ = writeln!(out, "  {} -> {};", quote(a), quote(b));
    }
    out.push_str("}\n");
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}
