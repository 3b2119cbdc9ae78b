//! Monte Carlo driver: one trial composes the whole chain for a fresh user
//! drop; experiments sweep `K`, total power and `mu`, aggregate sum rates
//! with 95% confidence intervals and write CSV.
//!
//! Every random draw of trial `i` comes from seeds derived from
//! `(base_seed, i)`, so results do not depend on the thread count and the
//! first `n` trials of a longer run are exactly the trials of a shorter one.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::baselines::{oma_scenario, pd_noma_scenario, BaselineKind, BeamPolicy, PairingRule, PowerPolicy};
use crate::channel::{
    dbm_to_mw, derive_seed, drop_users, generate_channels, ChannelSet, LargeScaleParams, SeedStream, SystemDims,
};
use crate::error::{PdmaError, Result};
use crate::linalg::frobenius_sq;
use crate::pattern::{assign_columns_to_users, optimize_beam_allocation, simple_beam_allocation, Pattern};
use crate::power::{
    default_epsilon, optimize_power_barrier, simple_power_allocation, PowerAlloc, PowerConstraints, SolverReport,
};
use crate::transceiver::{
    beamformer, correlation_matrix, normalized_gains, order_by_metric, per_user_rates, select_targets, sic_order, sinr,
    spatial_filters, sum_rate, Beamformer, Criterion, NormalizedGains, SicOrder, TargetSelection,
};

/// A scalar or a list of values; always stored as a list.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep(pub Vec<f64>);

impl Sweep {
    pub fn one(x: f64) -> Self {
        Sweep(vec![x])
    }

    /// `start, start + step, ...` up to `stop` inclusive, rounded to 1e-9.
    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Sweep(
            (0..=n)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect(),
        )
    }
}

impl Serialize for Sweep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sweep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            One(f64),
            Many(Vec<f64>),
        }
        Ok(match OneOrMany::deserialize(d)? {
            OneOrMany::One(x) => Sweep(vec![x]),
            OneOrMany::Many(v) => Sweep(v),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Written to the `preset` CSV column.
    pub label: String,
    pub scenario: BaselineKind,
    /// `n_users` is ignored; `k_list` sets the user counts.
    pub dims: SystemDims,
    pub large_scale: LargeScaleParams,
    pub noise_power_dbm: f64,
    pub p_sum_dbm: Sweep,
    pub mu: Sweep,
    pub k_list: Vec<usize>,
    pub bf_criterion: Criterion,
    pub sf_criterion: Criterion,
    pub trials: usize,
    pub base_seed: u64,
    /// Floor on target entries for the optimized power policy; defaults to
    /// `1e-2 P_b / K`.
    pub epsilon: Option<f64>,
    /// Minimum rate (bits) on every covered entry under the optimized
    /// power policy.
    pub r_min: f64,
    /// Overrides the scenario's target rule.
    pub target_selection: Option<TargetSelection>,
    /// Times the filters, gains, order and powers are recomputed.
    pub refinement_passes: usize,
    pub pairing: PairingRule,
    /// Add `sum_k p_nk <= P_b` per beam to the optimized power policy.
    pub per_beam_budget: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            label: "custom".into(),
            scenario: BaselineKind::PdmaSimple,
            dims: SystemDims::default(),
            large_scale: LargeScaleParams::default(),
            noise_power_dbm: -104.0,
            p_sum_dbm: Sweep::one(30.0),
            mu: Sweep::one(1.0),
            k_list: vec![5],
            bf_criterion: Criterion::Zf,
            sf_criterion: Criterion::Zf,
            trials: 2000,
            base_seed: 1,
            epsilon: None,
            r_min: 0.0,
            target_selection: None,
            refinement_passes: 1,
            pairing: PairingRule::StrongestWeakest,
            per_beam_budget: false,
        }
    }
}

/// One `(K, P_sum, mu)` combination of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n_users: usize,
    pub p_sum_dbm: f64,
    pub mu: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| PdmaError::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(PdmaError::Config(m));
        if self.trials == 0 {
            return cfg("trials must be at least 1".into());
        }
        if self.k_list.is_empty() || self.p_sum_dbm.0.is_empty() || self.mu.0.is_empty() {
            return cfg("k_list, p_sum_dbm and mu must be nonempty".into());
        }
        if self.refinement_passes == 0 {
            return cfg("refinement_passes must be at least 1".into());
        }
        if let Some(x) = self.mu.0.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return cfg(format!("mu must be positive, got {x}"));
        }
        if self
            .p_sum_dbm
            .0
            .iter()
            .chain([&self.noise_power_dbm])
            .any(|x| !x.is_finite())
        {
            return cfg("power levels must be finite".into());
        }
        if let Some(e) = self.epsilon {
            if !(e.is_finite() && e > 0.0) {
                return cfg(format!("epsilon must be positive, got {e}"));
            }
        }
        if !(self.r_min.is_finite() && self.r_min >= 0.0) {
            return cfg(format!("r_min must be >= 0, got {}", self.r_min));
        }
        self.large_scale.validate()?;
        for &k in &self.k_list {
            let dims = self.dims.with_users(k);
            dims.check_shape()
                .and_then(|_| dims.check_user_range())
                .map_err(|e| PdmaError::Config(e.to_string().replace("dimension error: ", "")))?;
            if let Some(req) = self.scenario.required_users(self.dims.n_beams) {
                if k != req {
                    return cfg(format!("scenario {} needs K = {req}, got K = {k}", self.scenario));
                }
            }
        }
        Ok(())
    }

    /// Points in output order: `K` outermost, then total power, then `mu`.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &n_users in &self.k_list {
            for &p_sum_dbm in &self.p_sum_dbm.0 {
                for &mu in &self.mu.0 {
                    out.push(SweepPoint { n_users, p_sum_dbm, mu });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub base_seed: u64,
    pub sum_rate_bits: f64,
    pub per_user_rates: Vec<f64>,
    pub pattern_used: Pattern,
    pub power: PowerAlloc,
    pub targets: Vec<usize>,
    pub sic_order: SicOrder,
    pub solver_report: Option<SolverReport>,
}

fn cached_beam_search(dims: SystemDims) -> Result<Pattern> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Pattern>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (dims.n_beams, dims.n_users);
    if let Some(p) = cache.lock().expect("cache poisoned").get(&key) {
        return Ok(p.clone());
    }
    let p = optimize_beam_allocation(dims)?.pattern;
    cache.lock().expect("cache poisoned").insert(key, p.clone());
    Ok(p)
}

struct Chain<'a> {
    config: &'a ExperimentConfig,
    channels: &'a ChannelSet,
    p_beam: f64,
    bf_reg: f64,
}

impl Chain<'_> {
    fn gains(&self, bf: &Beamformer, pattern: &Pattern, power: &PowerAlloc) -> Result<NormalizedGains> {
        let a = correlation_matrix(pattern, power);
        let filters = spatial_filters(self.config.sf_criterion, self.channels, bf, &a)?;
        normalized_gains(&filters, self.channels, bf, self.p_beam)
    }

    fn beamformer(&self, targets: &[usize]) -> Result<Beamformer> {
        beamformer(self.config.bf_criterion, self.channels, targets, self.bf_reg)
    }
}

/// Runs trial `trial` of `config` at `point`.
pub fn run_trial(config: &ExperimentConfig, point: &SweepPoint, trial: u64) -> Result<TrialResult> {
    trial_inner(config, point, trial).map_err(|e| PdmaError::Trial {
        trial: trial as usize,
        source: Box::new(e),
    })
}

fn trial_inner(config: &ExperimentConfig, point: &SweepPoint, trial: u64) -> Result<TrialResult> {
    let dims = config.dims.with_users(point.n_users);
    dims.check_shape()?;
    dims.check_user_range()?;
    let (n, k) = (dims.n_beams, dims.n_users);
    let p_sum = dbm_to_mw(point.p_sum_dbm);
    let p_beam = p_sum / n as f64;
    let noise = dbm_to_mw(config.noise_power_dbm);
    let base = config.base_seed;

    let geometry = drop_users(
        dims,
        &config.large_scale,
        derive_seed(base, trial, SeedStream::Geometry),
    )?;
    let channels = generate_channels(
        dims,
        &geometry,
        &config.large_scale,
        noise,
        derive_seed(base, trial, SeedStream::SmallScale),
    )?;

    // bootstrap: beams steered at the N strongest users
    let strength: Vec<f64> = channels
        .g
        .iter()
        .zip(&channels.noise_var)
        .map(|(g, s2)| frobenius_sq(g) / s2)
        .collect();
    let by_strength = order_by_metric(&strength);
    let boot_targets: Vec<usize> = by_strength.perm.iter().rev().take(n).copied().collect();
    let chain = Chain {
        config,
        channels: &channels,
        p_beam,
        bf_reg: 0.0,
    };
    let bf_reg = match config.bf_criterion {
        Criterion::Zf => 0.0,
        Criterion::Mmse => boot_targets.iter().map(|&t| channels.noise_var[t]).sum::<f64>() / n as f64 / p_beam,
    };
    let chain = Chain { bf_reg, ..chain };
    let boot_bf = chain.beamformer(&boot_targets)?;
    let boot_power = PowerAlloc {
        p: DMatrix::from_fn(n, k, |b, u| if u < n && b == u { p_beam } else { 0.0 }),
    };
    let boot_gains = chain.gains(
        &boot_bf,
        &Pattern::from_columns(n, (0..k).map(|u| if u < n { 1 << u } else { 0 }).collect())?,
        &boot_power,
    )?;
    let boot_order = sic_order(&boot_gains);

    let pattern = match config.scenario.beam_policy() {
        BeamPolicy::Identity => oma_scenario(dims)?.0,
        BeamPolicy::Paired => {
            pd_noma_scenario(
                dims,
                &boot_order.perm,
                config.pairing,
                derive_seed(base, trial, SeedStream::Pairing),
            )?
            .0
        }
        BeamPolicy::Simple => simple_beam_allocation(dims, &boot_order.perm, false)?,
        BeamPolicy::Optimized => assign_columns_to_users(&cached_beam_search(dims)?, &boot_order.perm)?,
    };
    let rule = config
        .target_selection
        .unwrap_or_else(|| config.scenario.default_target_selection());
    let targets = select_targets(&pattern, &boot_order, rule)?;
    let bf = chain.beamformer(&targets)?;

    let mut order = boot_order;
    let mut power = simple_power_allocation(&pattern, p_beam, point.mu, &order)?.power;
    let mut report = None;
    for _ in 0..config.refinement_passes {
        let gains = chain.gains(&bf, &pattern, &power)?;
        order = sic_order(&gains);
        power = match config.scenario.power_policy() {
            PowerPolicy::Geometric => simple_power_allocation(&pattern, p_beam, point.mu, &order)?.power,
            PowerPolicy::Optimized => {
                let eps = config.epsilon.unwrap_or_else(|| default_epsilon(p_beam, k));
                let r_min = DMatrix::from_fn(n, k, |b, u| if pattern.get(b, u) { config.r_min } else { 0.0 });
                let constraints = PowerConstraints::for_targets(k, &targets, p_sum, eps)?
                    .with_r_min(r_min)?
                    .with_per_beam_budget(config.per_beam_budget.then_some(p_beam))?;
                let (p, rep) = optimize_power_barrier(&gains, &pattern, &constraints, &order)?;
                report = Some(rep);
                p
            }
        };
    }
    let gains = chain.gains(&bf, &pattern, &power)?;
    let final_order = sic_order(&gains);
    let gamma = sinr(&gains, &pattern, &power, &final_order)?;
    Ok(TrialResult {
        trial,
        base_seed: base,
        sum_rate_bits: sum_rate(&gamma),
        per_user_rates: per_user_rates(&gamma),
        pattern_used: pattern,
        power,
        targets,
        sic_order: final_order,
        solver_report: report,
    })
}

/// Mean, sample standard deviation and Student-t 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
}

impl Summary {
    /// With a single sample `std` and the interval are NaN.
    pub fn of(xs: &[f64]) -> Summary {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Summary {
                n,
                mean,
                std: f64::NAN,
                ci95_lo: f64::NAN,
                ci95_hi: f64::NAN,
            };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("valid degrees of freedom")
            .inverse_cdf(0.975);
        let half = t * std / (n as f64).sqrt();
        Summary {
            n,
            mean,
            std,
            ci95_lo: mean - half,
            ci95_hi: mean + half,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub preset: String,
    pub scenario: BaselineKind,
    #[serde(rename = "K")]
    pub k: usize,
    pub mu: f64,
    pub p_sum_dbm: f64,
    pub noise_dbm: f64,
    pub trials: usize,
    pub mean_sum_rate: f64,
    pub std: f64,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub base_seed: u64,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "preset",
    "scenario",
    "K",
    "mu",
    "p_sum_dbm",
    "noise_dbm",
    "trials",
    "mean_sum_rate",
    "std",
    "ci95_lo",
    "ci95_hi",
    "base_seed",
];

/// Rows that completed, plus the error that stopped the run, if any.
#[derive(Debug)]
pub struct ExperimentRun {
    pub rows: Vec<SummaryRow>,
    pub failure: Option<PdmaError>,
}

impl ExperimentRun {
    pub fn into_result(self) -> Result<Vec<SummaryRow>> {
        match self.failure {
            None => Ok(self.rows),
            Some(e) => Err(e),
        }
    }
}

/// Sum rates of every trial of `config` at `point`, in trial order.
pub fn trial_sum_rates(config: &ExperimentConfig, point: &SweepPoint) -> Result<Vec<f64>> {
    (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, point, t).map(|r| r.sum_rate_bits))
        .collect()
}

/// Runs every configuration on the current rayon pool. Rows follow the
/// configuration order, then [`ExperimentConfig::points`].
pub fn run_experiments(configs: &[ExperimentConfig]) -> ExperimentRun {
    let mut rows = Vec::new();
    for config in configs {
        if let Err(e) = config.validate() {
            return ExperimentRun { rows, failure: Some(e) };
        }
        let points = config.points();
        let jobs: Vec<(usize, u64)> = (0..points.len())
            .flat_map(|p| (0..config.trials as u64).map(move |t| (p, t)))
            .collect();
        let results: Vec<Result<f64>> = jobs
            .par_iter()
            .map(|&(p, t)| run_trial(config, &points[p], t).map(|r| r.sum_rate_bits))
            .collect();
        for (p, point) in points.iter().enumerate() {
            let chunk = &results[p * config.trials..(p + 1) * config.trials];
            let mut rates = Vec::with_capacity(config.trials);
            for r in chunk {
                match r {
                    Ok(x) => rates.push(*x),
                    Err(e) => {
                        return ExperimentRun {
                            rows,
                            failure: Some(clone_error(e)),
                        }
                    }
                }
            }
            let s = Summary::of(&rates);
            rows.push(SummaryRow {
                preset: config.label.clone(),
                scenario: config.scenario,
                k: point.n_users,
                mu: point.mu,
                p_sum_dbm: point.p_sum_dbm,
                noise_dbm: config.noise_power_dbm,
                trials: config.trials,
                mean_sum_rate: s.mean,
                std: s.std,
                ci95_lo: s.ci95_lo,
                ci95_hi: s.ci95_hi,
                base_seed: config.base_seed,
            });
        }
    }
    ExperimentRun { rows, failure: None }
}

pub fn run_experiment(config: &ExperimentConfig) -> ExperimentRun {
    run_experiments(std::slice::from_ref(config))
}

/// Same as [`run_experiments`] on a dedicated pool of `threads` workers.
pub fn run_experiments_with_threads(configs: &[ExperimentConfig], threads: usize) -> Result<ExperimentRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| PdmaError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| run_experiments(configs)))
}

fn clone_error(e: &PdmaError) -> PdmaError {
    match e {
        PdmaError::Trial { trial, source } => PdmaError::Trial {
            trial: *trial,
            source: Box::new(clone_error(source)),
        },
        PdmaError::Dimension(m) => PdmaError::Dimension(m.clone()),
        PdmaError::Domain(m) => PdmaError::Domain(m.clone()),
        PdmaError::Config(m) => PdmaError::Config(m.clone()),
        PdmaError::Infeasible { certificate } => PdmaError::Infeasible {
            certificate: *certificate,
        },
        PdmaError::NotConverged {
            iterations,
            t,
            decrement,
            iterate,
        } => PdmaError::NotConverged {
            iterations: *iterations,
            t: *t,
            decrement: *decrement,
            iterate: iterate.clone(),
        },
        PdmaError::SearchTooLarge { bits } => PdmaError::SearchTooLarge { bits: *bits },
        other => PdmaError::Domain(other.to_string()),
    }
}

/// Writes header and rows. When `failure` is set a final comment line
/// marks the output as incomplete.
pub fn write_csv<W: Write>(out: W, rows: &[SummaryRow], failure: Option<&PdmaError>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    let mut out = w.into_inner().map_err(|e| PdmaError::Io(e.into_error()))?;
    if let Some(e) = failure {
        writeln!(out, "# incomplete: {}", e.to_string().replace('\n', " "))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
        }
    }

    /// Whether the x axis is `mu` (otherwise total power).
    pub fn sweeps_mu(self) -> bool {
        self == Preset::Fig3
    }

    /// Expands the preset on top of `base` (dims, channel model, noise,
    /// trials, seed and solver options are taken from `base`).
    pub fn configs(self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let with = |scenario, k_list: Vec<usize>, p: Sweep, mu: Sweep| ExperimentConfig {
            label: self.name().into(),
            scenario,
            k_list,
            p_sum_dbm: p,
            mu,
            ..base.clone()
        };
        let n = base.dims.n_beams;
        let power_sweep = Sweep::range(20.0, 46.0, 2.0);
        let pair = |other, mu: f64| {
            vec![
                with(
                    BaselineKind::PdmaSimple,
                    base.k_list.clone(),
                    power_sweep.clone(),
                    Sweep::one(mu),
                ),
                with(other, base.k_list.clone(), power_sweep.clone(), Sweep::one(mu)),
            ]
        };
        match self {
            Preset::Fig3 => {
                let ks: Vec<usize> = (n + 1..=crate::channel::max_users(n)).collect();
                vec![
                    with(
                        BaselineKind::PdmaSimple,
                        ks,
                        Sweep::one(30.0),
                        Sweep::range(0.1, 2.0, 0.1),
                    ),
                    with(BaselineKind::Oma, vec![n], Sweep::one(30.0), Sweep::one(1.0)),
                    with(BaselineKind::PdNoma, vec![2 * n], Sweep::one(30.0), Sweep::one(1.0)),
                ]
            }
            Preset::Fig4 => pair(BaselineKind::PdmaOptPower, 0.5),
            Preset::Fig5 => pair(BaselineKind::PdmaOptBeam, 0.5),
            Preset::Fig6 => pair(BaselineKind::PdmaOptBeam, 1.5),
            Preset::Fig7 => pair(BaselineKind::PdmaOptBoth, 0.5),
        }
    }
}

impl FromStr for Preset {
    type Err = PdmaError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| PdmaError::Config(format!("unknown preset '{s}'")))
    }
}

/// Gnuplot script plotting `csv_path`: one curve per (scenario, K), mean
/// sum rate with CI error bars against `mu` or total power.
pub fn plot_script(csv_path: &str, rows: &[SummaryRow], x_is_mu: bool) -> String {
    let (xcol, xlabel) = if x_is_mu {
        (4, "power gain factor mu")
    } else {
        (5, "sum transmit power (dBm)")
    };
    let mut series: Vec<(BaselineKind, usize)> = Vec::new();
    for r in rows {
        if !series.contains(&(r.scenario, r.k)) {
            series.push((r.scenario, r.k));
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set xlabel '{xlabel}'");
    let _ = writeln!(s, "set ylabel 'sum rate (bit/s/Hz)'");
    let _ = writeln!(s, "set key left top");
    let _ = writeln!(s, "set grid");
    let plots: Vec<String> = series
        .iter()
        .map(|(sc, k)| {
            let sel = format!("(strcol(2) eq '{sc}' && $3 == {k})");
            format!("'{csv_path}' skip 1 using ({sel} ? ${xcol} : NaN):8:10:11 with yerrorlines title '{sc} K={k}'")
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scenario: BaselineKind, k: usize) -> ExperimentConfig {
        ExperimentConfig {
            scenario,
            k_list: vec![k],
            trials: 4,
            base_seed: 9,
            ..ExperimentConfig::default()
        }
    }

    fn point(k: usize, mu: f64) -> SweepPoint {
        SweepPoint {
            n_users: k,
            p_sum_dbm: 30.0,
            mu,
        }
    }

    #[test]
    fn sweep_accepts_scalar_or_list() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"mu": 0.5, "p_sum_dbm": [20, 22]}"#).unwrap();
        assert_eq!(c.mu, Sweep::one(0.5));
        assert_eq!(c.p_sum_dbm, Sweep(vec![20.0, 22.0]));
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let r = Sweep::range(0.1, 2.0, 0.1);
        assert_eq!(r.0.len(), 20);
        assert_eq!(r.0[2], 0.3);
        assert_eq!(Sweep::range(20.0, 46.0, 2.0).0.len(), 14);
    }

    #[test]
    fn validation_messages() {
        let mut c = small(BaselineKind::PdmaSimple, 8);
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("2^N - 1"), "{e}");
        c.k_list = vec![5];
        c.trials = 0;
        assert!(c.validate().is_err());
        assert!(small(BaselineKind::Oma, 4).validate().is_err());
        assert!(small(BaselineKind::Oma, 3).validate().is_ok());
        assert!(small(BaselineKind::PdNoma, 6).validate().is_ok());
    }

    #[test]
    fn trial_is_deterministic_and_consistent() {
        for kind in BaselineKind::ALL {
            let k = kind.required_users(3).unwrap_or(5);
            let c = small(kind, k);
            let a = run_trial(&c, &point(k, 0.5), 3).unwrap();
            let b = run_trial(&c, &point(k, 0.5), 3).unwrap();
            assert_eq!(a, b, "{kind}");
            let total: f64 = a.per_user_rates.iter().sum();
            assert!((total - a.sum_rate_bits).abs() < 1e-9);
            assert!(a.sum_rate_bits > 0.0);
            assert_eq!(a.solver_report.is_some(), kind.power_policy() == PowerPolicy::Optimized);
        }
    }

    #[test]
    fn oma_serves_each_user_on_one_beam() {
        let c = small(BaselineKind::Oma, 3);
        let r = run_trial(&c, &point(3, 1.0), 0).unwrap();
        assert_eq!(r.per_user_rates.iter().filter(|&&x| x > 0.0).count(), 3);
        assert_eq!(r.pattern_used, Pattern::identity(3).unwrap());
        assert!(r.power.p.iter().all(|&x| x == 0.0 || (x - 1000.0 / 3.0).abs() < 1e-9));
    }

    #[test]
    fn summary_statistics() {
        let one = Summary::of(&[2.5]);
        assert_eq!(one.mean, 2.5);
        assert!(one.std.is_nan() && one.ci95_lo.is_nan() && one.ci95_hi.is_nan());
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        // t_{0.975, 3} = 3.182446305284263
        let half = 3.182_446_305_284_263 * s.std / 2.0;
        assert!((s.ci95_hi - 2.5 - half).abs() < 1e-9);
    }

    #[test]
    fn longer_runs_extend_shorter_ones() {
        let c = small(BaselineKind::PdmaSimple, 5);
        let short = trial_sum_rates(&c, &point(5, 1.0)).unwrap();
        let long = trial_sum_rates(&ExperimentConfig { trials: 8, ..c }, &point(5, 1.0)).unwrap();
        assert_eq!(short[..], long[..4]);
    }

    #[test]
    fn csv_layout_and_failure_marker() {
        let run = run_experiment(&small(BaselineKind::PdmaSimple, 4));
        assert!(run.failure.is_none());
        let mut buf = Vec::new();
        write_csv(&mut buf, &run.rows, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let row = lines.next().unwrap();
        assert!(row.starts_with("custom,pdma_simple,4,1.0,30.0,-104.0,4,"), "{row}");
        let mut buf = Vec::new();
        write_csv(&mut buf, &run.rows, Some(&PdmaError::Infeasible { certificate: 0.5 })).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .lines()
            .last()
            .unwrap()
            .starts_with("# incomplete"));
    }

    #[test]
    fn fig3_preset_shape() {
        let configs = Preset::Fig3.configs(&ExperimentConfig::default());
        let points: usize = configs.iter().map(|c| c.points().len()).sum();
        assert_eq!(points, 20 * 4 + 2);
        assert!(configs.iter().all(|c| c.validate().is_ok()));
        for p in [Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7] {
            let cs = p.configs(&ExperimentConfig::default());
            assert_eq!(cs.len(), 2);
            assert_eq!(cs[0].scenario, BaselineKind::PdmaSimple);
        }
    }

    #[test]
    fn plot_script_mentions_every_series() {
        let rows = run_experiments(&Preset::Fig3.configs(&ExperimentConfig {
            trials: 2,
            ..ExperimentConfig::default()
        }))
        .into_result()
        .unwrap();
        let s = plot_script("out.csv", &rows, true);
        assert!(s.contains("pdma_simple K=7") && s.contains("oma K=3") && s.contains("pd_noma K=6"));
    }
}
