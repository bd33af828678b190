//! Writing a finished sweep to an output directory.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::records::{summarize, write_csv, write_summary_csv, ResultRecord};
use crate::svg::render_metric;
use crate::BenchError;

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    experiment: &'a str,
    base_seed: u64,
    seeds: usize,
    threads: usize,
    records: usize,
    files: Vec<String>,
    config: &'a ExperimentConfig,
}

/// Write `results.csv`, `summary.csv`, one SVG per metric under `plots/`
/// (when `cfg.plot`) and `manifest.json`. Returns the written file names.
pub fn emit_outputs(
    records: &[ResultRecord],
    experiment: &str,
    cfg: &ExperimentConfig,
    threads: usize,
    dir: &Path,
) -> Result<Vec<String>, BenchError> {
    fs::create_dir_all(dir)?;
    let mut files = vec!["results.csv".to_string(), "summary.csv".to_string()];
    write_csv(records, BufWriter::new(fs::File::create(dir.join("results.csv"))?))?;
    let summary = summarize(records);
    write_summary_csv(&summary, BufWriter::new(fs::File::create(dir.join("summary.csv"))?))?;
    if cfg.plot {
        let mut metrics: Vec<&str> = Vec::new();
        for r in &summary {
            if !metrics.contains(&r.metric.as_str()) {
                metrics.push(&r.metric);
            }
        }
        if !metrics.is_empty() {
            fs::create_dir_all(dir.join("plots"))?;
        }
        for m in metrics {
            if let Some(svg) = render_metric(&summary, m) {
                let name = format!("plots/{m}.svg");
                fs::write(dir.join(&name), svg)?;
                files.push(name);
            }
        }
    }
    files.push("manifest.json".to_string());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        experiment,
        base_seed: cfg.base_seed,
        seeds: cfg.seeds,
        threads,
        records: records.len(),
        files: files.clone(),
        config: cfg,
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| BenchError::Config(format!("manifest: {e}")))?;
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(files)
}
