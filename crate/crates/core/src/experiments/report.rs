use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;
use statrs::statistics::Statistics;

use super::{ExperimentConfig, ExperimentReport, TrialRecord};
use crate::error::Result;

/// Mean, sample variance and maximum of one ratio over a cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub max: f64,
}

impl RatioStats {
    pub fn from_values(name: &str, values: &[f64]) -> Self {
        Self {
            name: name.to_string(),
            count: values.len(),
            mean: values.mean(),
            variance: values.variance(),
            max: values.max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub l: Option<f64>,
    pub kappa: Option<f64>,
    pub rho: f64,
    pub trials: usize,
    pub failures: usize,
    pub ratios: Vec<RatioStats>,
}

impl CellSummary {
    pub fn ratio(&self, name: &str) -> Option<&RatioStats> {
        self.ratios.iter().find(|r| r.name == name)
    }
}

/// Per-cell statistics over the successful trials.
pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Vec<CellSummary> {
    config
        .cells()
        .iter()
        .map(|cell| {
            let mut rows: Vec<&TrialRecord> = records.iter().filter(|r| r.cell == cell.index).collect();
            rows.sort_by_key(|r| r.trial);
            let ok: Vec<&TrialRecord> = rows.iter().copied().filter(|r| !r.failed()).collect();
            let ratios = config
                .example
                .ratio_names()
                .iter()
                .map(|name| {
                    let vals: Vec<f64> = ok.iter().filter_map(|r| r.ratio(name)).collect();
                    RatioStats::from_values(name, &vals)
                })
                .collect();
            CellSummary {
                cell: cell.index,
                l: cell.l(config.example),
                kappa: cell.kappa(config.example, config.n),
                rho: cell.rho,
                trials: rows.len(),
                failures: rows.len() - ok.len(),
                ratios,
            }
        })
        .collect()
}

/// One CSV row per trial, fixed column order.
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, report)?;
    Ok(())
}

/// `1.234e-05` style, as printed by C's `%.3e`.
fn sci(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "-".into() } else { format!("{v}") };
    }
    let s = format!("{v:.3e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        None => s,
    }
}

/// Mean and variance per ratio, one block per `ρ`, one column pair per `κ`.
pub fn render_table(report: &ExperimentReport) -> String {
    let cfg = &report.config;
    let mut kappas: Vec<(Option<f64>, Option<f64>)> = Vec::new();
    let mut rhos: Vec<f64> = Vec::new();
    for s in &report.summary {
        if !kappas.contains(&(s.l, s.kappa)) {
            kappas.push((s.l, s.kappa));
        }
        if !rhos.contains(&s.rho) {
            rhos.push(s.rho);
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "{} m={} n={} p={} trials={} seed={}", cfg.example, cfg.m, cfg.n, cfg.p, cfg.trials, cfg.seed);
    if report.summary.is_empty() {
        let _ = writeln!(out, "(empty grid)");
        return out;
    }
    let _ = write!(out, "{:>10} {:>6}", "rho", "ratio");
    for (l, kappa) in &kappas {
        let label = match (l, kappa) {
            (Some(l), _) => format!("kappa=n^{l}"),
            (None, Some(k)) => format!("kappa={k:.0e}"),
            _ => String::new(),
        };
        let _ = write!(out, " | {label:^21}");
    }
    let _ = writeln!(out);
    let _ = write!(out, "{:>10} {:>6}", "", "");
    for _ in &kappas {
        let _ = write!(out, " | {:>10} {:>10}", "mean", "variance");
    }
    let _ = writeln!(out);
    for rho in &rhos {
        for (i, name) in cfg.example.ratio_names().iter().enumerate() {
            let rho_label = if i == 0 { format!("{rho:.0e}") } else { String::new() };
            let _ = write!(out, "{rho_label:>10} {name:>6}");
            for (l, kappa) in &kappas {
                let cell = report.summary.iter().find(|s| s.rho == *rho && s.l == *l && s.kappa == *kappa);
                match cell.and_then(|c| c.ratio(name)) {
                    Some(st) => {
                        let _ = write!(out, " | {:>10} {:>10}", sci(st.mean), sci(st.variance));
                    }
                    None => {
                        let _ = write!(out, " | {:>10} {:>10}", "-", "-");
                    }
                }
            }
            let _ = writeln!(out);
        }
    }
    let failures: usize = report.summary.iter().map(|s| s.failures).sum();
    if failures > 0 {
        let _ = writeln!(out, "failed trials excluded: {failures}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{run_experiment, Example};
    use super::*;

    fn report() -> ExperimentReport {
        let mut c = ExperimentConfig::table3(false);
        (c.m, c.n, c.p, c.trials) = (10, 5, 5, 6);
        c.rho_grid = vec![1e-2, 1e2];
        run_experiment(&c).unwrap()
    }

    #[test]
    fn statistics_recompute_from_records() {
        let rep = report();
        for s in &rep.summary {
            for name in Example::Ex3.ratio_names() {
                let vals: Vec<f64> = rep.records.iter().filter(|r| r.cell == s.cell).filter_map(|r| r.ratio(name)).collect();
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                let st = s.ratio(name).unwrap();
                assert!((st.mean - mean).abs() <= 1e-14 * mean.abs());
                assert!((st.variance - var).abs() <= 1e-12 * var.abs().max(1e-300));
                assert_eq!(st.max, vals.iter().copied().fold(f64::MIN, f64::max));
            }
        }
    }

    #[test]
    fn csv_has_fixed_columns() {
        let rep = report();
        let mut buf = Vec::new();
        write_csv(&rep.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("example,cell,l,kappa,rho,trial,seed"));
        assert!(header.ends_with("r_N,r_M,r_C"));
        assert_eq!(text.lines().count(), rep.records.len() + 1);
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<TrialRecord> = rd.deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(back, rep.records.iter().map(|r| TrialRecord { elapsed: Default::default(), ..r.clone() }).collect::<Vec<_>>());
    }

    #[test]
    fn json_and_table_render() {
        let rep = report();
        let mut buf = Vec::new();
        write_json(&rep, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), rep.records.len());
        let table = render_table(&rep);
        assert!(table.contains("r_N") && table.contains("1e2"));
    }
}
