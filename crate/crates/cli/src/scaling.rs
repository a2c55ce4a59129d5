//! Scaling experiment: for each configured `n`, pick a generator set, build
//! the Cayley construction and optionally confirm its bound with the
//! reduced LP.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use pathmetric::delta::{build_invariant_metric_lp, delta_bisect, DeltaOptions, Target};
use pathmetric::groups::{cayley_construction, sample_x, symmetric_set, CyclicGroup};
use pathmetric::linarith::feasible;
use pathmetric::rational;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Either `n` (a list of moduli sharing `k`/`x`, `m`, `verify`, `delta`,
/// where `k` and `m` may be maps keyed by `n`) or an explicit `runs` list.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub k: Option<PerN>,
    #[serde(default)]
    pub x: Option<Vec<i64>>,
    #[serde(default)]
    pub m: Option<PerN>,
    #[serde(default)]
    pub verify: bool,
    #[serde(default)]
    pub delta: bool,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
    /// Default seed for runs without one.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: String,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PerN {
    All(usize),
    Each(BTreeMap<String, usize>),
}

impl PerN {
    fn get(&self, n: usize) -> Option<usize> {
        match self {
            PerN::All(v) => Some(*v),
            PerN::Each(map) => map.get(&n.to_string()).copied(),
        }
    }
}

/// One `n`. Either `x` (generators, negatives added) or `k` (classes to
/// sample) must be given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub x: Option<Vec<i64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Probe the reduced LP just below the bound.
    #[serde(default)]
    pub verify: bool,
    /// Also bracket Δ by bisection.
    #[serde(default)]
    pub delta: bool,
}

impl ScalingConfig {
    /// The runs in config order; a run whose `m` is missing is an error row.
    fn expand(&self) -> Vec<Result<RunSpec, (usize, String)>> {
        let listed = self.n.iter().map(|&n| {
            let m = self.m.as_ref().and_then(|m| m.get(n)).ok_or((n, format!("no m for n = {n}")))?;
            Ok(RunSpec {
                n,
                m,
                k: self.k.as_ref().and_then(|k| k.get(n)),
                x: self.x.clone(),
                seed: None,
                verify: self.verify,
                delta: self.delta,
            })
        });
        listed.chain(self.runs.iter().cloned().map(Ok)).collect()
    }
}

fn default_tol() -> String {
    "1e-6".into()
}

fn default_attempts() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub x_size: usize,
    pub d: Option<usize>,
    pub bound: Option<String>,
    pub delta_lo: Option<String>,
    pub delta_hi: Option<String>,
    pub probes: usize,
    pub wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub const CSV_HEADER: [&str; 10] = [
    "n", "k", "m", "x_size", "d", "bound", "delta_lo", "delta_hi", "probes", "wall_time_ms",
];

/// Runs every configured `n` in order; a failing run is reported in its
/// row (and on `log`) and the rest continue.
pub fn run_scaling_experiment(cfg: &ScalingConfig, log: &mut dyn Write) -> Vec<ExperimentRow> {
    cfg.expand()
        .into_iter()
        .map(|spec| {
            let start = Instant::now();
            let (n, k, m) = match &spec {
                Ok(s) => (s.n, s.k.unwrap_or(0), s.m),
                Err((n, _)) => (*n, cfg.k.as_ref().and_then(|k| k.get(*n)).unwrap_or(0), 0),
            };
            let mut row = ExperimentRow {
                n,
                k,
                m,
                x_size: 0,
                d: None,
                bound: None,
                delta_lo: None,
                delta_hi: None,
                probes: 0,
                wall_time_ms: 0.0,
                error: None,
            };
            let outcome = spec.map_err(|(_, e)| e).and_then(|s| fill(cfg, &s, &mut row));
            if let Err(e) = outcome {
                let _ = writeln!(log, "n = {n}: {e}");
                row.error = Some(e);
            }
            row.wall_time_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
            row
        })
        .collect()
}

fn fill(cfg: &ScalingConfig, spec: &RunSpec, row: &mut ExperimentRow) -> Result<(), String> {
    let g = CyclicGroup::new(spec.n).map_err(|e| e.to_string())?;
    let x: Vec<i64> = match (&spec.x, spec.k) {
        (Some(x), _) => symmetric_set(spec.n, x).into_iter().map(|a| g.signed(a)).collect(),
        (None, Some(k)) => {
            let s = sample_x(spec.n, k, spec.m, spec.seed.unwrap_or(cfg.seed), cfg.max_attempts)
                .map_err(|e| e.to_string())?;
            s.x.into_iter().map(|a| g.signed(a)).collect()
        }
        (None, None) => return Err("run needs x or k".into()),
    };
    row.x_size = x.len();
    row.k = x.len() / 2;
    let (params, wt) = cayley_construction(spec.n, &x, spec.m).map_err(|e| e.to_string())?;
    row.d = Some(params.d);
    row.bound = Some(rational::to_string(&params.bound));
    let tol = rational::parse_rational(&cfg.tol).map_err(|e| e.to_string())?;

    if spec.verify {
        // the larger of bound·(1 - 1e-6) and bound - tol; infeasibility there
        // covers both
        let relative = &params.bound * (rational::int(1) - rational::pow10_neg(6));
        let absolute = &params.bound - &tol;
        let below = if relative > absolute { relative } else { absolute };
        if below > rational::int(1) {
            let lp = build_invariant_metric_lp(&wt, &below).map_err(|e| e.to_string())?;
            row.probes += 1;
            if feasible(&lp).map_err(|e| e.to_string())?.is_feasible() {
                return Err(format!("reduced LP feasible at {}", rational::to_string(&below)));
            }
            row.delta_lo = Some(rational::to_string(&below));
        } else {
            row.delta_lo = Some("1".into());
        }
    }
    if spec.delta {
        let opts = DeltaOptions {
            tol,
            ..Default::default()
        };
        let r = delta_bisect(Target::Invariant(&wt), &opts).map_err(|e| e.to_string())?;
        row.probes += r.probes;
        let probed = row.delta_lo.as_deref().and_then(|s| rational::parse_rational(s).ok());
        let lo = match probed {
            Some(p) if p > r.lo => p,
            _ => r.lo,
        };
        row.delta_lo = Some(rational::to_string(&lo));
        row.delta_hi = Some(rational::to_string(&r.hi));
    }
    Ok(())
}

pub fn write_csv(out: &mut dyn Write, rows: &[ExperimentRow]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Invalid(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            r.x_size.to_string(),
            r.d.map(|d| d.to_string()).unwrap_or_default(),
            opt(&r.bound),
            opt(&r.delta_lo),
            opt(&r.delta_hi),
            r.probes.to_string(),
            format!("{:.3}", r.wall_time_ms),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?;
    crate::output::written(out.write_all(&bytes))
}
