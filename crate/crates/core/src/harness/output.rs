//! Tab-separated result files. Numbers use shortest round-trip formatting
//! and wall times are not written, so reruns produce identical bytes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::{DatasetSpec, ExperimentConfig};
use super::experiment::{ResultRecord, Status};
use crate::error::{Error, Result};
use crate::optim::Algorithm;

pub const RECORDS_HEADER: &str = "sweep\tbatch_size\tmemory\tgamma\talgorithm\tfold\trun\tstatus\tnog\tacc";
pub const SUMMARY_HEADER: &str =
    "sweep\tbatch_size\tmemory\tgamma\talgorithm\tn_ok\tn_failed\tnog_mean\tnog_std\tacc_mean\tacc_std";

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate for one (sweep point, algorithm) group.
#[derive(Debug, Clone)]
pub struct GroupSummary<'a> {
    pub first: &'a ResultRecord,
    pub n_ok: usize,
    pub n_failed: usize,
    pub nog: (f64, f64),
    pub acc: (f64, f64),
}

pub fn summarize(records: &[ResultRecord]) -> Vec<GroupSummary<'_>> {
    let mut groups: BTreeMap<(usize, Algorithm), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.point.index, r.algorithm)).or_default().push(r);
    }
    groups
        .into_values()
        .map(|recs| {
            let ok: Vec<&ResultRecord> = recs.iter().copied().filter(|r| r.status == Status::Ok).collect();
            let nogs: Vec<f64> = ok.iter().map(|r| r.nog).collect();
            let accs: Vec<f64> = ok.iter().map(|r| r.acc).collect();
            GroupSummary {
                first: recs[0],
                n_ok: ok.len(),
                n_failed: recs.len() - ok.len(),
                nog: mean_std(&nogs),
                acc: mean_std(&accs),
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn axis_value(cfg: &ExperimentConfig, r: &ResultRecord) -> String {
    match cfg.varying_axis() {
        "batch_size" => r.point.batch_size.to_string(),
        "memory" => r.point.memory.to_string(),
        "gamma" => r.point.gamma.to_string(),
        _ => r.point.index.to_string(),
    }
}

/// Writes `records.tsv`, `summary.tsv`, `series_<metric>_<algorithm>.tsv`,
/// `metadata.tsv` and, when tracing, `trace.tsv` into `dir`.
pub fn emit_results(records: &[ResultRecord], cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to write".into()));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("records.tsv");
    let mut w = create(&path)?;
    writeln!(w, "{RECORDS_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.point.index,
            r.point.batch_size,
            r.point.memory,
            r.point.gamma,
            r.algorithm,
            r.fold,
            r.run,
            r.status.label(),
            r.nog,
            r.acc
        )?;
    }
    w.flush()?;
    written.push(path);

    let summary = summarize(records);
    let path = dir.join("summary.tsv");
    let mut w = create(&path)?;
    writeln!(w, "{SUMMARY_HEADER}")?;
    for g in &summary {
        let p = &g.first.point;
        if g.n_ok == 0 {
            writeln!(
                w,
                "#warning\tsweep={}\talgorithm={}\tno successful records ({} failed)",
                p.index, g.first.algorithm, g.n_failed
            )?;
            continue;
        }
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.index,
            p.batch_size,
            p.memory,
            p.gamma,
            g.first.algorithm,
            g.n_ok,
            g.n_failed,
            g.nog.0,
            g.nog.1,
            g.acc.0,
            g.acc.1
        )?;
    }
    w.flush()?;
    written.push(path);

    let axis = cfg.varying_axis();
    for &algorithm in &cfg.algorithms {
        for (metric, pick) in [("nog", 0usize), ("acc", 1)] {
            let path = dir.join(format!("series_{metric}_{algorithm}.tsv"));
            let mut w = create(&path)?;
            writeln!(w, "{axis}\t{metric}")?;
            for g in summary.iter().filter(|g| g.first.algorithm == algorithm && g.n_ok > 0) {
                let v = if pick == 0 { g.nog.0 } else { g.acc.0 };
                writeln!(w, "{}\t{v}", axis_value(cfg, g.first))?;
            }
            w.flush()?;
            written.push(path);
        }
    }

    if cfg.trace {
        let path = dir.join("trace.tsv");
        let mut w = create(&path)?;
        writeln!(w, "sweep\talgorithm\tfold\trun\tinterval\tnog")?;
        for r in records {
            for (t, v) in r.trace.iter().enumerate() {
                writeln!(w, "{}\t{}\t{}\t{}\t{}\t{v}", r.point.index, r.algorithm, r.fold, r.run, t + 1)?;
            }
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("metadata.tsv");
    let mut w = create(&path)?;
    let dataset = match &cfg.dataset {
        DatasetSpec::Synthetic { n, d, seed } => format!("synthetic(n={n},d={d},seed={seed})"),
        DatasetSpec::File { path, .. } => path.display().to_string(),
    };
    let iterations = cfg
        .iterations
        .map_or_else(|| format!("{} epochs", cfg.epochs), |k| k.to_string());
    for (k, v) in [
        ("problem", cfg.problem.to_string()),
        ("dataset", dataset),
        ("standardize", cfg.standardize.to_string()),
        ("bias", cfg.bias.to_string()),
        ("nog_split", "train".to_string()),
        ("acc_split", if cfg.folds > 1 { "test" } else { "train" }.to_string()),
        ("folds", cfg.folds.to_string()),
        ("monte_carlo_runs", cfg.monte_carlo_runs.to_string()),
        ("iterations", iterations),
        ("master_seed", cfg.master_seed.to_string()),
    ] {
        writeln!(w, "{k}\t{v}")?;
    }
    w.flush()?;
    written.push(path);
    Ok(written)
}

/// One parsed row of `records.tsv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordRow {
    pub sweep: usize,
    pub algorithm: String,
    pub fold: usize,
    pub run: usize,
    pub ok: bool,
    pub nog: f64,
    pub acc: f64,
}

pub fn read_records(path: &Path) -> Result<Vec<RecordRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line: line as u64 + 1,
        message,
    };
    match lines.next() {
        Some((_, h)) if h == RECORDS_HEADER => {}
        _ => return Err(parse_err(0, "missing records header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 10 {
            return Err(parse_err(i, format!("expected 10 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(i, format!("bad number '{s}'")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(i, format!("bad integer '{s}'")));
        rows.push(RecordRow {
            sweep: int(f[0])?,
            algorithm: f[4].to_string(),
            fold: int(f[5])?,
            run: int(f[6])?,
            ok: f[7] == "ok",
            nog: num(f[8])?,
            acc: num(f[9])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
