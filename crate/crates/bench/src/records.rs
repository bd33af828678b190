//! Result rows and their CSV form.
//!
//! Schema: `experiment,method,alpha,seed,metric,value,wall_time_s`, header
//! row, LF line endings. Floats are written with 17 significant digits in
//! scientific notation so the text is locale-free and round-trips exactly.

use std::io::{Read, Write};

use serde::Serialize;

use crate::BenchError;

pub const HEADER: [&str; 7] = [
    "experiment",
    "method",
    "alpha",
    "seed",
    "metric",
    "value",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub method: String,
    pub alpha: f64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(
        experiment: &str,
        method: &str,
        alpha: f64,
        seed: u64,
        metric: &str,
        value: f64,
        wall_time_s: f64,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            method: method.to_string(),
            alpha,
            seed,
            metric: metric.to_string(),
            value,
            wall_time_s,
        }
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write records as CSV.
pub fn write_csv<W: Write>(records: &[ResultRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.experiment.as_str(),
            r.method.as_str(),
            &format_float(r.alpha),
            &r.seed.to_string(),
            r.metric.as_str(),
            &format_float(r.value),
            &format_float(r.wall_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parse CSV produced by [`write_csv`].
pub fn parse_csv<R: Read>(input: R) -> Result<Vec<ResultRecord>, BenchError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(BenchError::Config(format!("unexpected CSV header: {header:?}")));
    }
    let float = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| BenchError::Config(format!("bad float {s:?}: {e}")))
    };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        out.push(ResultRecord {
            experiment: row[0].to_string(),
            method: row[1].to_string(),
            alpha: float(&row[2])?,
            seed: row[3]
                .parse()
                .map_err(|e| BenchError::Config(format!("bad seed {:?}: {e}", &row[3])))?,
            metric: row[4].to_string(),
            value: float(&row[5])?,
            wall_time_s: float(&row[6])?,
        });
    }
    Ok(out)
}

/// Mean, minimum and maximum of one metric for one (method, α) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub method: String,
    pub alpha: f64,
    pub metric: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Aggregate over seeds, keeping first-appearance order of the groups.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    for r in records {
        let pos = rows.iter().position(|s| {
            s.experiment == r.experiment
                && s.method == r.method
                && s.alpha.to_bits() == r.alpha.to_bits()
                && s.metric == r.metric
        });
        match pos {
            Some(i) => {
                sums[i] += r.value;
                rows[i].min = rows[i].min.min(r.value);
                rows[i].max = rows[i].max.max(r.value);
                rows[i].count += 1;
            }
            None => {
                sums.push(r.value);
                rows.push(SummaryRow {
                    experiment: r.experiment.clone(),
                    method: r.method.clone(),
                    alpha: r.alpha,
                    metric: r.metric.clone(),
                    mean: 0.0,
                    min: r.value,
                    max: r.value,
                    count: 1,
                });
            }
        }
    }
    for (row, sum) in rows.iter_mut().zip(sums) {
        row.mean = sum / row.count as f64;
    }
    rows
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["experiment", "method", "alpha", "metric", "mean", "min", "max", "count"])?;
    for r in rows {
        w.write_record([
            r.experiment.as_str(),
            r.method.as_str(),
            &format_float(r.alpha),
            r.metric.as_str(),
            &format_float(r.mean),
            &format_float(r.min),
            &format_float(r.max),
            &r.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
