//! Threshold calibration, detection-probability estimation, equivalence checks and sweeps.
//!
//! Every trial draws from its own generator keyed on `(seed, stream, trial)`, so all
//! rules see the same samples and results do not depend on the number of workers.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{invalid, FusionError, Result};
use crate::jamming::{clairvoyant_lrt_for_signal, igmm_glrt, is_glrt, nlos_glrt, JammerWorkspace};
use crate::rules::{igmm_rule, is_rule, llr, nlos_rule, wl_statistic, RuleContext, DEFAULT_LLR_CAP};
use crate::rng::{streams, trial_rng};
use crate::scenario::{db_to_linear, JammerScenario, WsnScenario};
use crate::signal::{draw_sample, DecisionModel, Hypothesis, ReceivedSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    Llr,
    Is,
    Nlos,
    Wl0,
    Wl1,
    Igmm,
    Clairvoyant,
    IsGlrt,
    NlosGlrt,
    IgmmGlrt,
}

impl RuleId {
    pub const ALL: [RuleId; 10] = [
        RuleId::Llr,
        RuleId::Is,
        RuleId::Nlos,
        RuleId::Wl0,
        RuleId::Wl1,
        RuleId::Igmm,
        RuleId::Clairvoyant,
        RuleId::IsGlrt,
        RuleId::NlosGlrt,
        RuleId::IgmmGlrt,
    ];

    pub const INTERFERENCE_FREE: [RuleId; 6] =
        [RuleId::Llr, RuleId::Is, RuleId::Nlos, RuleId::Wl0, RuleId::Wl1, RuleId::Igmm];

    pub const JAMMER_AWARE: [RuleId; 4] =
        [RuleId::Clairvoyant, RuleId::IsGlrt, RuleId::NlosGlrt, RuleId::IgmmGlrt];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Llr => "llr",
            RuleId::Is => "is",
            RuleId::Nlos => "nlos",
            RuleId::Wl0 => "wl0",
            RuleId::Wl1 => "wl1",
            RuleId::Igmm => "igmm",
            RuleId::Clairvoyant => "clairvoyant",
            RuleId::IsGlrt => "is-glrt",
            RuleId::NlosGlrt => "nlos-glrt",
            RuleId::IgmmGlrt => "igmm-glrt",
        }
    }

    pub fn requires_jammer(self) -> bool {
        Self::JAMMER_AWARE.contains(&self)
    }

    pub fn valid_ids() -> String {
        Self::ALL.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = FusionError;

    fn from_str(s: &str) -> Result<Self> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                FusionError::InvalidArgument(format!("unknown rule '{s}'; valid ids: {}", RuleId::valid_ids()))
            })
    }
}

/// Parse a comma-separated rule list.
pub fn parse_rules(list: &str) -> Result<Vec<RuleId>> {
    let rules: Vec<RuleId> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(RuleId::from_str)
        .collect::<Result<_>>()?;
    if rules.is_empty() {
        return invalid(format!("rule list is empty; valid ids: {}", RuleId::valid_ids()));
    }
    Ok(rules)
}

/// A scenario ready for Monte Carlo: rule context, optional jammer and its workspace.
#[derive(Clone, Debug)]
pub struct Evaluator {
    ctx: RuleContext,
    jammer: Option<JammerScenario>,
    workspace: Option<JammerWorkspace>,
}

impl Evaluator {
    pub fn new(wsn: &WsnScenario, jammer: Option<&JammerScenario>) -> Result<Self> {
        Self::with_model(wsn, DecisionModel::from_scenario(wsn), jammer)
    }

    pub fn with_model(wsn: &WsnScenario, model: DecisionModel, jammer: Option<&JammerScenario>) -> Result<Self> {
        let ctx = RuleContext::with_model(wsn, model, DEFAULT_LLR_CAP)?;
        let workspace = jammer.map(|j| JammerWorkspace::build(&ctx, j)).transpose()?;
        Ok(Self {
            ctx,
            jammer: jammer.cloned(),
            workspace,
        })
    }

    pub fn context(&self) -> &RuleContext {
        &self.ctx
    }

    pub fn scenario(&self) -> &WsnScenario {
        self.ctx.scenario()
    }

    pub fn jammer(&self) -> Option<&JammerScenario> {
        self.jammer.as_ref()
    }

    pub fn workspace(&self) -> Option<&JammerWorkspace> {
        self.workspace.as_ref()
    }

    /// Fail early when a rule cannot be evaluated for this scenario.
    pub fn check(&self, rule: RuleId) -> Result<()> {
        if rule.requires_jammer() && self.jammer.is_none() {
            return invalid(format!("rule '{rule}' needs a jammer scenario"));
        }
        match rule {
            RuleId::Llr | RuleId::Clairvoyant => self.ctx.llr_table().map(|_| ()),
            RuleId::Wl0 => self.ctx.wl_weight(Hypothesis::H0).map(|_| ()),
            RuleId::Wl1 => self.ctx.wl_weight(Hypothesis::H1).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Draw trial `trial` of `stream`; jammed whenever the evaluator has a jammer.
    pub fn draw(&self, h: Hypothesis, seed: u64, stream: u64, trial: u64) -> Result<ReceivedSample> {
        let mut rng = trial_rng(seed, stream, trial);
        draw_sample(self.scenario(), self.ctx.model(), self.jammer.as_ref(), h, &mut rng)
    }

    pub fn statistic(&self, rule: RuleId, sample: &ReceivedSample) -> Result<f64> {
        let y = &sample.y;
        let need_ws = || {
            self.workspace
                .as_ref()
                .ok_or_else(|| FusionError::InvalidArgument(format!("rule '{rule}' needs a jammer scenario")))
        };
        let v = match rule {
            RuleId::Llr => llr(y, &self.ctx)?,
            RuleId::Is => is_rule(y, &self.ctx),
            RuleId::Nlos => nlos_rule(y),
            RuleId::Wl0 => wl_statistic(y, &self.ctx, Hypothesis::H0)?,
            RuleId::Wl1 => wl_statistic(y, &self.ctx, Hypothesis::H1)?,
            RuleId::Igmm => igmm_rule(y, &self.ctx),
            RuleId::Clairvoyant => {
                let ws = need_ws()?;
                let psi = sample
                    .psi
                    .clone()
                    .unwrap_or_else(|| crate::linalg::CVector::zeros(ws.rank()));
                clairvoyant_lrt_for_signal(y, &self.ctx, ws.jammer(), &psi)?
            }
            RuleId::IsGlrt => is_glrt(y, need_ws()?),
            RuleId::NlosGlrt => nlos_glrt(y, need_ws()?.jammer()),
            RuleId::IgmmGlrt => igmm_glrt(y, need_ws()?)?,
        };
        if !v.is_finite() {
            return Err(FusionError::Numerical(format!("rule '{rule}' produced a non-finite statistic")));
        }
        Ok(v)
    }
}

/// Statistics for several rules over `trials` samples of one stream: `out[rule][trial]`.
pub fn statistics(
    eval: &Evaluator,
    rules: &[RuleId],
    h: Hypothesis,
    seed: u64,
    stream: u64,
    trials: usize,
) -> Result<Vec<Vec<f64>>> {
    for &rule in rules {
        eval.check(rule)?;
    }
    let rows: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let sample = eval.draw(h, seed, stream, t)?;
            rules.iter().map(|&r| eval.statistic(r, &sample)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..rules.len()).map(|i| rows.iter().map(|row| row[i]).collect()).collect())
}

/// Binomial point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_count(hits: usize, trials: usize, seed: u64) -> Self {
        let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() };
        Self { estimate: p, stderr, trials, seed }
    }

    /// `estimate ± z·stderr`, clipped to `[0, 1]`.
    pub fn confidence_interval(&self, z: f64) -> (f64, f64) {
        ((self.estimate - z * self.stderr).max(0.0), (self.estimate + z * self.stderr).min(1.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibratedTest {
    pub rule: RuleId,
    pub gamma: f64,
    pub target_pf0: f64,
    pub achieved_pf0: McEstimate,
    pub calibration_trials: usize,
}

impl CalibratedTest {
    /// Decide H1 iff `Λ > γ`.
    pub fn decide(&self, statistic: f64) -> bool {
        statistic > self.gamma
    }
}

/// Upper order statistic: the sample at 1-based rank `⌈(1 − p)·n⌉`, no interpolation.
pub fn quantile_threshold(values: &[f64], target_pf0: f64) -> Result<f64> {
    if values.is_empty() {
        return invalid("cannot take a quantile of an empty sample");
    }
    if !(target_pf0 > 0.0 && target_pf0 < 1.0) {
        return invalid(format!("target false-alarm rate must lie in (0, 1), got {target_pf0}"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // The small guard keeps products like 0.99 × 10^5 from rounding up past an integer.
    let rank = (((1.0 - target_pf0) * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    Ok(sorted[rank - 1])
}

pub fn exceedance(values: &[f64], gamma: f64, seed: u64) -> McEstimate {
    McEstimate::from_count(values.iter().filter(|&&v| v > gamma).count(), values.len(), seed)
}

fn check_calibration_trials(trials: usize, target_pf0: f64) -> Result<()> {
    if !(target_pf0 > 0.0 && target_pf0 < 1.0) {
        return invalid(format!("target false-alarm rate must lie in (0, 1), got {target_pf0}"));
    }
    if (trials as f64) * target_pf0 < 100.0 - 1e-9 {
        return invalid(format!(
            "calibration at Pf0 = {target_pf0} needs at least {} trials, got {trials}",
            (100.0 / target_pf0).ceil()
        ));
    }
    Ok(())
}

/// Calibrate from precomputed H0 statistics: threshold on `calibration`, Pf0 on `validation`.
pub fn calibrate_from_values(
    rule: RuleId,
    calibration: &[f64],
    validation: &[f64],
    target_pf0: f64,
    seed: u64,
) -> Result<CalibratedTest> {
    check_calibration_trials(calibration.len(), target_pf0)?;
    let gamma = quantile_threshold(calibration, target_pf0)?;
    Ok(CalibratedTest {
        rule,
        gamma,
        target_pf0,
        achieved_pf0: exceedance(validation, gamma, seed),
        calibration_trials: calibration.len(),
    })
}

pub fn calibrate_threshold(
    eval: &Evaluator,
    rule: RuleId,
    target_pf0: f64,
    trials: usize,
    seed: u64,
) -> Result<CalibratedTest> {
    check_calibration_trials(trials, target_pf0)?;
    let cal = statistics(eval, &[rule], Hypothesis::H0, seed, streams::CALIBRATION_H0, trials)?;
    let val = statistics(eval, &[rule], Hypothesis::H0, seed, streams::VALIDATION_H0, trials)?;
    calibrate_from_values(rule, &cal[0], &val[0], target_pf0, seed)
}

pub fn estimate_pd0(test: &CalibratedTest, eval: &Evaluator, trials: usize, seed: u64) -> Result<McEstimate> {
    let det = statistics(eval, &[test.rule], Hypothesis::H1, seed, streams::DETECTION_H1, trials)?;
    Ok(exceedance(&det[0], test.gamma, seed))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub test: CalibratedTest,
    pub pd0: McEstimate,
}

/// Calibrate and estimate Pd0 for several rules on shared samples.
pub fn run_point(
    eval: &Evaluator,
    rules: &[RuleId],
    target_pf0: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<PointResult>> {
    check_calibration_trials(trials, target_pf0)?;
    let cal = statistics(eval, rules, Hypothesis::H0, seed, streams::CALIBRATION_H0, trials)?;
    let val = statistics(eval, rules, Hypothesis::H0, seed, streams::VALIDATION_H0, trials)?;
    let det = statistics(eval, rules, Hypothesis::H1, seed, streams::DETECTION_H1, trials)?;
    rules
        .iter()
        .enumerate()
        .map(|(i, &rule)| {
            let test = calibrate_from_values(rule, &cal[i], &val[i], target_pf0, seed)?;
            let pd0 = exceedance(&det[i], test.gamma, seed);
            Ok(PointResult { test, pd0 })
        })
        .collect()
}

/// Ranks with ties sharing their average rank (1-based).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; exactly 1 when both samples induce the same ranking.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spearman needs equal-length samples");
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    if ra == rb {
        return 1.0;
    }
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Target Pf0 levels at which decision agreement is compared.
pub const EQUIVALENCE_PF0_GRID: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    MonotoneEquivalent,
    Distinct,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "equivalent",
            Verdict::MonotoneEquivalent => "monotone-equivalent",
            Verdict::Distinct => "distinct",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub spearman: f64,
    /// Largest fraction of trials (H0 and H1 pooled) on which the two tests disagree.
    pub max_disagreement: f64,
    pub disagreement_by_level: Vec<(f64, f64)>,
    pub trials: usize,
}

/// Compare two statistics evaluated on the same H0 and H1 samples.
pub fn equivalence_from_values(a_h0: &[f64], a_h1: &[f64], b_h0: &[f64], b_h1: &[f64]) -> Result<EquivalenceReport> {
    if a_h0.len() != b_h0.len() || a_h1.len() != b_h1.len() {
        return invalid("equivalence check needs paired samples");
    }
    let a_all: Vec<f64> = a_h0.iter().chain(a_h1).copied().collect();
    let b_all: Vec<f64> = b_h0.iter().chain(b_h1).copied().collect();
    let mut levels = Vec::with_capacity(EQUIVALENCE_PF0_GRID.len());
    for &p in &EQUIVALENCE_PF0_GRID {
        let ga = quantile_threshold(a_h0, p)?;
        let gb = quantile_threshold(b_h0, p)?;
        let differ = a_all.iter().zip(&b_all).filter(|(a, b)| (**a > ga) != (**b > gb)).count();
        levels.push((p, differ as f64 / a_all.len() as f64));
    }
    let max_disagreement = levels.iter().map(|l| l.1).fold(0.0, f64::max);
    let rho = spearman(&a_all, &b_all);
    let verdict = if max_disagreement == 0.0 {
        Verdict::Equivalent
    } else if rho == 1.0 {
        Verdict::MonotoneEquivalent
    } else {
        Verdict::Distinct
    };
    Ok(EquivalenceReport {
        verdict,
        spearman: rho,
        max_disagreement,
        disagreement_by_level: levels,
        trials: a_all.len(),
    })
}

/// Equivalence verdict for two rules over `trials` H0 and `trials` H1 common samples.
pub fn equivalence_check(eval: &Evaluator, a: RuleId, b: RuleId, trials: usize, seed: u64) -> Result<EquivalenceReport> {
    let h0 = statistics(eval, &[a, b], Hypothesis::H0, seed, streams::EQUIVALENCE_H0, trials)?;
    let h1 = statistics(eval, &[a, b], Hypothesis::H1, seed, streams::EQUIVALENCE_H1, trials)?;
    equivalence_from_values(&h0[0], &h1[0], &h0[1], &h1[1])
}

#[derive(Clone, Debug, PartialEq)]
pub struct RocPoint {
    pub rule: RuleId,
    pub target_pf0: f64,
    pub pf0: f64,
    pub pd0: f64,
}

/// Empirical ROC: thresholds at the H0 quantiles of `pf0_grid`, Pd0 on a separate H1 sample.
pub fn roc_curve(eval: &Evaluator, rules: &[RuleId], pf0_grid: &[f64], trials: usize, seed: u64) -> Result<Vec<RocPoint>> {
    let h0 = statistics(eval, rules, Hypothesis::H0, seed, streams::CALIBRATION_H0, trials)?;
    let h1 = statistics(eval, rules, Hypothesis::H1, seed, streams::DETECTION_H1, trials)?;
    let mut out = Vec::new();
    for (i, &rule) in rules.iter().enumerate() {
        for &p in pf0_grid {
            let gamma = quantile_threshold(&h0[i], p)?;
            out.push(RocPoint {
                rule,
                target_pf0: p,
                pf0: exceedance(&h0[i], gamma, seed).estimate,
                pd0: exceedance(&h1[i], gamma, seed).estimate,
            });
        }
    }
    Ok(out)
}

/// A deployment frozen once and reused across a sweep grid.
#[derive(Clone, Debug)]
pub struct FrozenScenario {
    pub preset: String,
    pub jammer_preset: String,
    pub wsn: WsnScenario,
    pub jammer: Option<JammerScenario>,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub scenarios: Vec<FrozenScenario>,
    pub rules: Vec<RuleId>,
    pub sigma_w2_dbm: Vec<f64>,
    pub n_antennas: Vec<usize>,
    pub target_pf0: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub preset: String,
    pub jammer: String,
    pub rule: RuleId,
    pub sigma_w2_dbm: f64,
    pub n_antennas: usize,
    pub target_pf0: f64,
    pub gamma: f64,
    pub achieved_pf0: f64,
    pub pd0: f64,
    pub pd0_stderr: f64,
    pub trials: usize,
    pub seed: u64,
    pub wall_time: Duration,
}

pub const SWEEP_CSV_HEADER: [&str; 12] = [
    "preset",
    "jammer",
    "rule",
    "sigma_w2_dbm",
    "n_antennas",
    "target_pf0",
    "gamma",
    "achieved_pf0",
    "pd0",
    "pd0_stderr",
    "trials",
    "seed",
];

/// Evaluate one frozen scenario at a given antenna count and noise power (dBm).
pub fn evaluator_at(scenario: &FrozenScenario, n_antennas: usize, sigma_w2_dbm: f64) -> Result<Evaluator> {
    let wsn = scenario
        .wsn
        .with_antennas(n_antennas)?
        .with_noise_power(db_to_linear(sigma_w2_dbm))?;
    let jammer = scenario.jammer.as_ref().map(|j| j.with_antennas(n_antennas)).transpose()?;
    Evaluator::new(&wsn, jammer.as_ref())
}

pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.rules.is_empty() {
        return invalid(format!("rule list is empty; valid ids: {}", RuleId::valid_ids()));
    }
    let mut rows = Vec::new();
    for scenario in &spec.scenarios {
        for &n in &spec.n_antennas {
            for &dbm in &spec.sigma_w2_dbm {
                let start = Instant::now();
                let eval = evaluator_at(scenario, n, dbm)?;
                let results = run_point(&eval, &spec.rules, spec.target_pf0, spec.trials, spec.seed)?;
                let elapsed = start.elapsed();
                for r in results {
                    rows.push(SweepRow {
                        preset: scenario.preset.clone(),
                        jammer: scenario.jammer_preset.clone(),
                        rule: r.test.rule,
                        sigma_w2_dbm: dbm,
                        n_antennas: n,
                        target_pf0: spec.target_pf0,
                        gamma: r.test.gamma,
                        achieved_pf0: r.test.achieved_pf0.estimate,
                        pd0: r.pd0.estimate,
                        pd0_stderr: r.pd0.stderr,
                        trials: spec.trials,
                        seed: spec.seed,
                        wall_time: elapsed,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER).map_err(crate::signal::csv_err)?;
    for r in rows {
        w.write_record([
            r.preset.clone(),
            r.jammer.clone(),
            r.rule.to_string(),
            r.sigma_w2_dbm.to_string(),
            r.n_antennas.to_string(),
            r.target_pf0.to_string(),
            r.gamma.to_string(),
            r.achieved_pf0.to_string(),
            r.pd0.to_string(),
            r.pd0_stderr.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ])
        .map_err(crate::signal::csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Run `f` on a dedicated pool with `threads` workers (0 means the rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| FusionError::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{realize, DeploymentConfig, JammerPreset, WsnPreset};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn rule_ids_round_trip() {
        for r in RuleId::ALL {
            assert_eq!(r.as_str().parse::<RuleId>().unwrap(), r);
        }
        let err = "foo".parse::<RuleId>().unwrap_err().to_string();
        assert!(err.contains("igmm-glrt"));
        assert!(parse_rules("").is_err());
        assert_eq!(parse_rules("is, nlos").unwrap(), vec![RuleId::Is, RuleId::Nlos]);
    }

    #[test]
    fn constant_statistic_never_fires() {
        let v = vec![3.0; 1000];
        let t = calibrate_from_values(RuleId::Is, &v, &v, 0.1, 0).unwrap();
        assert_eq!(t.gamma, 3.0);
        assert_eq!(t.achieved_pf0.estimate, 0.0);
    }

    #[test]
    fn insufficient_trials_rejected() {
        let v = vec![0.0; 999];
        assert!(matches!(
            calibrate_from_values(RuleId::Is, &v, &v, 0.1, 0),
            Err(FusionError::InvalidArgument(_))
        ));
    }

    #[test]
    fn normal_quantile_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g = quantile_threshold(&v, 0.05).unwrap();
        assert!((g - 1.644_853_626_951_472_2).abs() < 0.02, "{g}");
    }

    #[test]
    fn order_statistic_index() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile_threshold(&v, 0.1).unwrap(), 90.0);
        assert_eq!(quantile_threshold(&v, 0.01).unwrap(), 99.0);
        assert_eq!(exceedance(&v, 90.0, 0).estimate, 0.1);
    }

    #[test]
    fn extreme_thresholds() {
        let v = vec![1.0, 2.0, 3.0];
        assert_eq!(exceedance(&v, f64::NEG_INFINITY, 0).estimate, 1.0);
        assert_eq!(exceedance(&v, 10.0, 0).estimate, 0.0);
        let e = McEstimate::from_count(30, 100, 0);
        assert!((e.stderr - (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spearman_ties_and_identity() {
        let a = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(average_ranks(&a), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(spearman(&a, &[10.0, 20.0, 20.0, 50.0]), 1.0);
        assert!((spearman(&a, &[4.0, 3.0, 3.0, 1.0]) + 1.0).abs() < 1e-12);
    }

    fn small_eval(jam: JammerPreset) -> Evaluator {
        let (wsn, j) = realize(&DeploymentConfig::preset(WsnPreset::Los, jam, 6, 4, 3)).unwrap();
        Evaluator::new(&wsn, j.as_ref()).unwrap()
    }

    #[test]
    fn identical_rules_are_equivalent() {
        let eval = small_eval(JammerPreset::None);
        let rep = equivalence_check(&eval, RuleId::Igmm, RuleId::Igmm, 1000, 4).unwrap();
        assert_eq!(rep.verdict, Verdict::Equivalent);
        assert_eq!(rep.spearman, 1.0);
    }

    #[test]
    fn results_do_not_depend_on_threads() {
        let eval = small_eval(JammerPreset::LosJam);
        let rules = [RuleId::Is, RuleId::IgmmGlrt, RuleId::Clairvoyant];
        let one = with_threads(1, || run_point(&eval, &rules, 0.1, 1000, 9)).unwrap().unwrap();
        let three = with_threads(3, || run_point(&eval, &rules, 0.1, 1000, 9)).unwrap().unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn single_point_sweep_matches_direct_calls() {
        let (wsn, _) = realize(&DeploymentConfig::preset(WsnPreset::Los, JammerPreset::None, 6, 4, 3)).unwrap();
        let frozen = FrozenScenario { preset: "los".into(), jammer_preset: "none".into(), wsn, jammer: None };
        let spec = SweepSpec {
            scenarios: vec![frozen.clone()],
            rules: vec![RuleId::Igmm],
            sigma_w2_dbm: vec![0.0],
            n_antennas: vec![4],
            target_pf0: 0.1,
            trials: 1000,
            seed: 5,
        };
        let rows = sweep(&spec).unwrap();
        let eval = evaluator_at(&frozen, 4, 0.0).unwrap();
        let test = calibrate_threshold(&eval, RuleId::Igmm, 0.1, 1000, 5).unwrap();
        let pd = estimate_pd0(&test, &eval, 1000, 5).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].gamma, test.gamma);
        assert_eq!(rows[0].achieved_pf0, test.achieved_pf0.estimate);
        assert_eq!(rows[0].pd0, pd.estimate);

        let empty = SweepSpec { sigma_w2_dbm: vec![], ..spec };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &sweep(&empty).unwrap()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), SWEEP_CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn jammer_rules_need_a_jammer() {
        let eval = small_eval(JammerPreset::None);
        assert!(eval.check(RuleId::IsGlrt).is_err());
        assert!(eval.check(RuleId::Is).is_ok());
    }
}
