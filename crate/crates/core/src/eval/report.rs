//! Metric reports and their CSV form.
//!
//! ```text
//! # schema=metric_report version=1 label=18000
//! iteration,metric,value,count
//! 1000,free/grammaticality,0.93,1000
//! ```

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use super::EvalError;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub value: f64,
    /// Number of records averaged.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    pub iteration: u64,
    pub metrics: BTreeMap<String, Metric>,
}

impl MetricReport {
    pub fn new(iteration: u64) -> Self {
        Self {
            iteration,
            metrics: BTreeMap::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).map(|m| m.value)
    }

    /// Records the mean of `values` under `name`; empty input is skipped.
    pub fn push_mean(&mut self, name: impl Into<String>, values: &[f64]) {
        if !values.is_empty() {
            let value = values.iter().sum::<f64>() / values.len() as f64;
            self.metrics.insert(
                name.into(),
                Metric {
                    value,
                    count: values.len(),
                },
            );
        }
    }
}

/// A metric CSV: optional scale label plus reports in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTable {
    pub label: Option<String>,
    pub reports: Vec<MetricReport>,
}

impl MetricTable {
    /// `(iteration, value)` pairs of one metric, in iteration order.
    pub fn series(&self, metric: &str) -> Vec<(u64, f64)> {
        let mut out: Vec<(u64, f64)> = self
            .reports
            .iter()
            .filter_map(|r| r.get(metric).map(|v| (r.iteration, v)))
            .collect();
        out.sort_by_key(|&(i, _)| i);
        out
    }
}

pub fn write_metric_csv<W: Write>(mut w: W, table: &MetricTable) -> io::Result<()> {
    write!(w, "# schema=metric_report version={SCHEMA_VERSION}")?;
    if let Some(label) = &table.label {
        write!(w, " label={label}")?;
    }
    writeln!(w)?;
    writeln!(w, "iteration,metric,value,count")?;
    for r in &table.reports {
        for (name, m) in &r.metrics {
            writeln!(w, "{},{name},{},{}", r.iteration, m.value, m.count)?;
        }
    }
    w.flush()
}

pub fn read_metric_csv<R: BufRead>(r: R) -> Result<MetricTable, EvalError> {
    let mut lines = r.lines().enumerate();
    let bad = |line: usize, message: String| EvalError::Csv { line, message };
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(bad(1, "empty file".into())),
    };
    let fields: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
    if !header.starts_with('#') || !fields.contains(&"schema=metric_report") {
        return Err(bad(1, "missing `# schema=metric_report` header".into()));
    }
    let mut table = MetricTable::default();
    for f in fields {
        if let Some(v) = f.strip_prefix("version=") {
            if v != SCHEMA_VERSION.to_string() {
                return Err(bad(1, format!("unsupported version {v}")));
            }
        } else if let Some(l) = f.strip_prefix("label=") {
            table.label = Some(l.to_string());
        }
    }
    let columns = lines.next().map(|(_, l)| l).transpose()?;
    if columns.as_deref().map(str::trim) != Some("iteration,metric,value,count") {
        return Err(bad(
            2,
            "expected column header `iteration,metric,value,count`".into(),
        ));
    }
    let mut by_iter: BTreeMap<u64, MetricReport> = BTreeMap::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let n = i + 1;
        let parts: Vec<&str> = line.split(',').collect();
        let [it, name, value, count] = parts[..] else {
            return Err(bad(n, "expected four fields".into()));
        };
        let iteration = it
            .trim()
            .parse()
            .map_err(|_| bad(n, format!("bad iteration `{it}`")))?;
        let value = value
            .trim()
            .parse()
            .map_err(|_| bad(n, format!("bad value `{value}`")))?;
        let count = count
            .trim()
            .parse()
            .map_err(|_| bad(n, format!("bad count `{count}`")))?;
        by_iter
            .entry(iteration)
            .or_insert_with(|| MetricReport::new(iteration))
            .metrics
            .insert(name.trim().to_string(), Metric { value, count });
    }
    table.reports = by_iter.into_values().collect();
    Ok(table)
}
