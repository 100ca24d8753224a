//! Reproducible ratio experiments: estimator accuracy and structured versus
//! unstructured condition numbers on generated problems.

mod generators;
mod report;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use generators::{
    example1_diagonal, example2_diagonal, example3_kind, gen_example1, gen_example2, gen_example3, planted_solution,
    Planted, MAX_ATTEMPTS,
};
pub use report::{render_table, summarize, write_csv, write_json, CellSummary, RatioStats};

use crate::cond::{kappa_2ils, kappa_componentwise, kappa_mixed, CondParams};
use crate::error::{Error, Result};
use crate::estimators::{estimate_kappa2_pce, estimate_kappa2_ssce, estimate_kappa_inf_ssce, SsceConfig};
use crate::par;
use crate::structured::{kappa_2ils_structured, kappa_componentwise_structured, kappa_mixed_structured};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    /// Normwise estimators on Householder-built problems.
    Ex1,
    /// Mixed and componentwise estimators.
    Ex2,
    /// Structured against unstructured condition numbers, Toeplitz blocks.
    Ex3,
}

impl Example {
    /// Ratio columns reported for this example.
    pub fn ratio_names(self) -> &'static [&'static str] {
        match self {
            Example::Ex1 => &["r_p", "r_s"],
            Example::Ex2 => &["r_m", "r_c"],
            Example::Ex3 => &["r_N", "r_M", "r_C"],
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
        };
        f.write_str(s)
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "ex1" => Ok(Example::Ex1),
            "2" | "ex2" => Ok(Example::Ex2),
            "3" | "ex3" => Ok(Example::Ex3),
            other => Err(Error::InvalidParameter(format!("unknown example '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub example: Example,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    /// Exponents `l` with `κ(A) = n^l` for ex1, target `κ(A)` for ex2,
    /// unused for ex3.
    pub kappa_grid: Vec<f64>,
    pub rho_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    pub epsilon: f64,
    /// SSCE sample count.
    pub k: usize,
}

const RHO_FIVE: [f64; 5] = [1e-4, 1e-2, 1.0, 1e2, 1e4];

impl ExperimentConfig {
    fn base(example: Example, m: usize, n: usize, p: usize, kappa_grid: Vec<f64>, rho_grid: Vec<f64>, trials: usize) -> Self {
        Self {
            example,
            m,
            n,
            p,
            kappa_grid,
            rho_grid,
            trials,
            seed: 0,
            delta: 0.01,
            epsilon: 1e-3,
            k: 3,
        }
    }

    /// Normwise estimator experiment; `full` selects the larger sizes.
    pub fn table1(full: bool) -> Self {
        if full {
            Self::base(Example::Ex1, 200, 120, 140, vec![0.0, 3.0, 6.0, 9.0], RHO_FIVE.to_vec(), 500)
        } else {
            Self::base(Example::Ex1, 60, 36, 42, vec![0.0, 3.0, 6.0], vec![1e-4, 1.0, 1e4], 100)
        }
    }

    /// Mixed and componentwise estimator experiment.
    pub fn table2(full: bool) -> Self {
        let kappas = vec![1e2, 1e6, 1e10, 1e12];
        if full {
            Self::base(Example::Ex2, 120, 50, 70, kappas, RHO_FIVE.to_vec(), 200)
        } else {
            Self::base(Example::Ex2, 60, 25, 35, kappas, RHO_FIVE.to_vec(), 100)
        }
    }

    /// Structured versus unstructured experiment.
    pub fn table3(full: bool) -> Self {
        let n = if full { 60 } else { 24 };
        Self::base(Example::Ex3, 2 * n, n, n, Vec::new(), RHO_FIVE.to_vec(), if full { 200 } else { 100 })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self.example {
            Example::Ex1 | Example::Ex2 => {
                if self.n == 0 || self.p < self.n || self.p > self.m {
                    return bad(format!("need 1 <= n <= p <= m, got m = {}, n = {}, p = {}", self.m, self.n, self.p));
                }
            }
            Example::Ex3 => {
                if self.n < 2 || self.m != 2 * self.n || self.p != self.n {
                    return bad(format!("ex3 needs m = 2n, p = n, n >= 2, got m = {}, n = {}, p = {}", self.m, self.n, self.p));
                }
            }
        }
        if self.k == 0 || self.k > self.n {
            return bad(format!("need 1 <= k <= n, got k = {}", self.k));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 && self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("delta and epsilon must lie in (0, 1), got {}, {}", self.delta, self.epsilon));
        }
        if self.rho_grid.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("rho values must be finite and nonnegative".into());
        }
        Ok(())
    }

    /// Grid cells in output order: κ-major, then ρ.
    pub fn cells(&self) -> Vec<Cell> {
        let kappas: Vec<Option<f64>> = match self.example {
            Example::Ex3 => vec![None],
            _ => self.kappa_grid.iter().copied().map(Some).collect(),
        };
        let mut cells = Vec::new();
        for k in kappas {
            for &rho in &self.rho_grid {
                cells.push(Cell { index: cells.len(), grid: k, rho });
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    /// Raw `kappa_grid` entry.
    pub grid: Option<f64>,
    pub rho: f64,
}

impl Cell {
    /// Exponent `l` for ex1.
    pub fn l(&self, example: Example) -> Option<f64> {
        (example == Example::Ex1).then_some(self.grid).flatten()
    }

    /// Target `κ(A)`.
    pub fn kappa(&self, example: Example, n: usize) -> Option<f64> {
        match example {
            Example::Ex1 => self.grid.map(|l| (n as f64).powf(l)),
            Example::Ex2 => self.grid,
            Example::Ex3 => None,
        }
    }
}

/// One row of the experiment output. Columns that do not apply to the
/// example are left empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialRecord {
    pub example: String,
    pub cell: usize,
    pub l: Option<f64>,
    pub kappa: Option<f64>,
    pub rho: f64,
    pub trial: usize,
    pub seed: u64,
    pub attempts: Option<usize>,
    pub error: Option<String>,
    pub kappa_2ils: Option<f64>,
    pub kappa_mixed: Option<f64>,
    pub kappa_comp: Option<f64>,
    pub kappa_pce: Option<f64>,
    pub pce_iterations: Option<usize>,
    pub pce_ratio_not_met: Option<bool>,
    pub kappa_ssce: Option<f64>,
    pub ssce_mixed: Option<f64>,
    pub ssce_comp: Option<f64>,
    pub kappa_2ils_s: Option<f64>,
    pub kappa_mixed_s: Option<f64>,
    pub kappa_comp_s: Option<f64>,
    pub r_p: Option<f64>,
    pub r_s: Option<f64>,
    pub r_m: Option<f64>,
    pub r_c: Option<f64>,
    #[serde(rename = "r_N")]
    pub r_nn: Option<f64>,
    #[serde(rename = "r_M")]
    pub r_mm: Option<f64>,
    #[serde(rename = "r_C")]
    pub r_cc: Option<f64>,
    /// Wall time; kept out of serialized output so files stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl TrialRecord {
    pub fn ratio(&self, name: &str) -> Option<f64> {
        match name {
            "r_p" => self.r_p,
            "r_s" => self.r_s,
            "r_m" => self.r_m,
            "r_c" => self.r_c,
            "r_N" => self.r_nn,
            "r_M" => self.r_mm,
            "r_C" => self.r_cc,
            _ => None,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<CellSummary>,
}

/// Generator and estimator seeds of one trial, drawn from a stream of the
/// root seed that is private to the trial.
pub fn trial_seeds(root: u64, cell: usize, trial: usize) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(((cell as u64) << 32) | trial as u64);
    [rng.random(), rng.random(), rng.random()]
}

fn ratio(estimate: f64, exact: f64) -> Result<f64> {
    if !(exact > 0.0) {
        return Err(Error::UndefinedConditionNumber("ratio with a zero exact value"));
    }
    Ok(estimate / exact)
}

fn run_ex1(config: &ExperimentConfig, cell: &Cell, seeds: [u64; 3], rec: &mut TrialRecord) -> Result<()> {
    let l = cell.grid.unwrap_or(0.0);
    let g = gen_example1(config.m, config.n, config.p, l, cell.rho, seeds[0])?;
    rec.attempts = Some(g.attempts);
    let params = CondParams::default();
    let exact = kappa_2ils(&g.problem, &params)?;
    rec.kappa_2ils = Some(exact);
    let pce = estimate_kappa2_pce(&g.problem, &params, config.delta, config.epsilon, seeds[1])?;
    rec.kappa_pce = Some(pce.value);
    rec.pce_iterations = Some(pce.interval.iterations);
    rec.pce_ratio_not_met = Some(pce.interval.ratio_not_met);
    let ssce_cfg = SsceConfig { k: config.k, seed: seeds[2], ..SsceConfig::default() };
    let ssce = estimate_kappa2_ssce(&g.problem, &params, &ssce_cfg)?;
    rec.kappa_ssce = Some(ssce);
    rec.r_p = Some(ratio(pce.value, exact)?);
    rec.r_s = Some(ratio(ssce, exact)?);
    Ok(())
}

fn run_ex2(config: &ExperimentConfig, cell: &Cell, seeds: [u64; 3], rec: &mut TrialRecord) -> Result<()> {
    let kappa = cell.grid.unwrap_or(1.0);
    let g = gen_example2(config.m, config.n, config.p, kappa, cell.rho, seeds[0])?;
    rec.attempts = Some(g.attempts);
    let params = CondParams::default();
    let km = kappa_mixed(&g.problem, &params)?;
    let kc = kappa_componentwise(&g.problem, &params)?;
    rec.kappa_mixed = Some(km);
    rec.kappa_comp = Some(kc);
    let cfg = SsceConfig { k: config.k, seed: seeds[1], ..SsceConfig::default() };
    let est = estimate_kappa_inf_ssce(&g.problem, &params, &cfg)?;
    rec.ssce_mixed = Some(est.mixed);
    rec.ssce_comp = Some(est.componentwise);
    rec.r_m = Some(ratio(est.mixed, km)?);
    rec.r_c = Some(ratio(est.componentwise, kc)?);
    Ok(())
}

fn run_ex3(config: &ExperimentConfig, cell: &Cell, seeds: [u64; 3], rec: &mut TrialRecord) -> Result<()> {
    let (g, sp) = gen_example3(config.n, cell.rho, seeds[0])?;
    rec.attempts = Some(g.attempts);
    let params = CondParams::default();
    let p = &g.problem;
    let (k2, km, kc) = (kappa_2ils(p, &params)?, kappa_mixed(p, &params)?, kappa_componentwise(p, &params)?);
    let k2s = kappa_2ils_structured(p, &params, &sp)?;
    let kms = kappa_mixed_structured(p, &params, &sp)?;
    let kcs = kappa_componentwise_structured(p, &params, &sp)?;
    rec.kappa_2ils = Some(k2);
    rec.kappa_mixed = Some(km);
    rec.kappa_comp = Some(kc);
    rec.kappa_2ils_s = Some(k2s);
    rec.kappa_mixed_s = Some(kms);
    rec.kappa_comp_s = Some(kcs);
    rec.r_nn = Some(ratio(k2, k2s)?);
    rec.r_mm = Some(ratio(km, kms)?);
    rec.r_cc = Some(ratio(kc, kcs)?);
    Ok(())
}

/// Runs a single trial. Failures are recorded in the `error` column.
pub fn run_trial(config: &ExperimentConfig, cell: &Cell, trial: usize) -> TrialRecord {
    let seeds = trial_seeds(config.seed, cell.index, trial);
    let mut rec = TrialRecord {
        example: config.example.to_string(),
        cell: cell.index,
        l: cell.l(config.example),
        kappa: cell.kappa(config.example, config.n),
        rho: cell.rho,
        trial,
        seed: seeds[0],
        ..TrialRecord::default()
    };
    let start = Instant::now();
    let outcome = match config.example {
        Example::Ex1 => run_ex1(config, cell, seeds, &mut rec),
        Example::Ex2 => run_ex2(config, cell, seeds, &mut rec),
        Example::Ex3 => run_ex3(config, cell, seeds, &mut rec),
    };
    rec.elapsed = start.elapsed();
    if let Err(e) = outcome {
        log::warn!("cell {} trial {trial}: {e}", cell.index);
        rec.error = Some(e.to_string());
    }
    rec
}

/// Runs every trial of every cell and summarizes the ratios per cell.
/// Output is independent of thread scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let cells = config.cells();
    let trials = config.trials;
    let records = par::map_indices(cells.len() * trials, |idx| run_trial(config, &cells[idx / trials], idx % trials));
    let failures = records.iter().filter(|r| r.failed()).count();
    if failures > 0 {
        log::warn!("{failures} of {} trials failed and are excluded from the statistics", records.len());
    }
    let summary = summarize(config, &records);
    Ok(ExperimentReport { config: config.clone(), records, summary })
}
