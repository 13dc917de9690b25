//! Executable equivalence and oracle checks, reported one line per check.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::jamming::{igmm_glrt, is_glrt, nlos_piecewise_reference, stationarity_sides};
use crate::linalg::CVector;
use crate::montecarlo::{equivalence_check, EquivalenceReport, Evaluator, RuleId, Verdict};
use crate::rng::trial_rng;
use crate::scenario::{JammerScenario, WsnScenario};
use crate::signal::{draw_sample, second_order_char, DecisionModel, Hypothesis};

const MOMENT_STREAMS: [u64; 2] = [30, 31];
const REDUCTION_STREAM: u64 = 32;
const STATIONARITY_STREAM: u64 = 33;
const MOMENT_DRAWS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub subject: String,
    pub verdict: String,
    pub diagnostic: f64,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {} {:e}", self.name, self.verdict, self.subject, self.diagnostic)
    }
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn equivalence_line(name: &'static str, a: RuleId, b: RuleId, rep: &EquivalenceReport) -> Check {
    Check {
        name,
        subject: format!("{a},{b}"),
        verdict: rep.verdict.to_string(),
        diagnostic: rep.max_disagreement,
        passed: rep.verdict == Verdict::Equivalent,
    }
}

/// With every κ forced to 0, IS and IGMM must collapse to the energy detector.
pub fn lemma1(wsn: &WsnScenario, trials: usize, seed: u64) -> Result<Vec<Check>> {
    let eval = Evaluator::new(&wsn.with_kappa(0.0)?, None)?;
    [(RuleId::Is, RuleId::Nlos), (RuleId::Igmm, RuleId::Nlos)]
        .into_iter()
        .map(|(a, b)| Ok(equivalence_line("lemma1", a, b, &equivalence_check(&eval, a, b, trials, seed)?)))
        .collect()
}

/// Under perfect sensors (P_D, P_F) = (1, 0): IGMM ~ IS, WL0 ~ WL1, and LLR ranks like IS.
pub fn lemma3(wsn: &WsnScenario, trials: usize, llr_draws: usize, seed: u64) -> Result<Vec<Check>> {
    let eval = Evaluator::new(&wsn.with_decision_quality(1.0, 0.0)?, None)?;
    let mut out = vec![
        equivalence_line(
            "lemma3",
            RuleId::Igmm,
            RuleId::Is,
            &equivalence_check(&eval, RuleId::Igmm, RuleId::Is, trials, seed)?,
        ),
        equivalence_line(
            "wl-pair",
            RuleId::Wl0,
            RuleId::Wl1,
            &equivalence_check(&eval, RuleId::Wl0, RuleId::Wl1, trials, seed)?,
        ),
    ];
    if eval.check(RuleId::Llr).is_ok() {
        let half = (llr_draws / 2).max(1);
        let rep = equivalence_check(&eval, RuleId::Llr, RuleId::Is, half, seed)?;
        out.push(Check {
            name: "llr-is",
            subject: "llr,is".into(),
            verdict: if rep.spearman == 1.0 { rep.verdict } else { Verdict::Distinct }.to_string(),
            diagnostic: rep.spearman,
            passed: rep.spearman == 1.0,
        });
    }
    Ok(out)
}

/// Under perfect sensors the IGMM-GLRT must be equivalent to the IS-GLRT.
pub fn jam_lemma(wsn: &WsnScenario, jammer: &JammerScenario, trials: usize, seed: u64) -> Result<Check> {
    let eval = Evaluator::new(&wsn.with_decision_quality(1.0, 0.0)?, Some(jammer))?;
    let rep = equivalence_check(&eval, RuleId::IgmmGlrt, RuleId::IsGlrt, trials, seed)?;
    Ok(equivalence_line("jam-lemma", RuleId::IgmmGlrt, RuleId::IsGlrt, &rep))
}

/// Largest deviation of IS-GLRT and IGMM-GLRT from the piecewise energy form when every κ is 0.
pub fn piecewise_reduction(wsn: &WsnScenario, jammer: &JammerScenario, draws: usize, seed: u64) -> Result<f64> {
    let wsn = wsn.with_kappa(0.0)?;
    let eval = Evaluator::new(&wsn, Some(jammer))?;
    let ws = eval.workspace().expect("evaluator built with a jammer");
    let n = wsn.n_antennas();
    let sw = wsn.noise_power();
    let betas = wsn.betas();
    let sum_beta: f64 = betas.iter().sum();
    let weighted = |h: Hypothesis| -> f64 {
        wsn.transmit_probabilities(h.is_h1()).iter().zip(&betas).map(|(p, b)| p * b).sum::<f64>() + sw
    };
    let (sn0, sn1) = (weighted(Hypothesis::H0), weighted(Hypothesis::H1));
    let errs: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let h = if t % 2 == 0 { Hypothesis::H0 } else { Hypothesis::H1 };
            let mut rng = trial_rng(seed, REDUCTION_STREAM, t);
            let s = draw_sample(&wsn, eval.context().model(), Some(jammer), h, &mut rng)?;
            let e = jammer.project(&s.y).norm_squared();
            let ref_is = nlos_piecewise_reference(e, sw, sum_beta + sw, n)?;
            let ref_igmm = nlos_piecewise_reference(e, sn0, sn1, n)?;
            let d_is = (is_glrt(&s.y, ws) - ref_is).abs() / (1.0 + ref_is.abs());
            let d_igmm = (igmm_glrt(&s.y, ws)? - ref_igmm).abs() / (1.0 + ref_igmm.abs());
            Ok(d_is.max(d_igmm))
        })
        .collect::<Result<_>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// Largest relative stationarity residual of the σ_J² estimate at interior optima.
pub fn sigma_stationarity(wsn: &WsnScenario, jammer: &JammerScenario, draws: usize, seed: u64) -> Result<f64> {
    let eval = Evaluator::new(wsn, Some(jammer))?;
    let ws = eval.workspace().expect("evaluator built with a jammer");
    let res: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let h = if t % 2 == 0 { Hypothesis::H0 } else { Hypothesis::H1 };
            let mut rng = trial_rng(seed, STATIONARITY_STREAM, t);
            let s = draw_sample(wsn, eval.context().model(), Some(jammer), h, &mut rng)?;
            let mut worst: f64 = 0.0;
            for hh in [Hypothesis::H0, Hypothesis::H1] {
                let (sig, _) = ws.sigma_estimate(&s.y, hh)?;
                if sig > 0.0 {
                    let (l, r) = stationarity_sides(ws.lambda_a(hh), ws.lambda_c(hh), &ws.v_abs2(&s.y, hh), sig);
                    worst = worst.max((l - r).abs() / (l.abs() + r.abs()).max(f64::MIN_POSITIVE));
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Sample moments of generated `y` against the closed-form characterization.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    /// Largest `|estimate − theory| / stderr` over mean, covariance and pseudo-covariance entries.
    pub max_z: f64,
    /// Largest relative error on the covariance diagonal.
    pub max_diag_rel: f64,
    pub draws: usize,
}

fn entry_z(samples: impl Iterator<Item = Complex64> + Clone, n: usize, theory: Complex64) -> f64 {
    let nf = n as f64;
    let mean = samples.clone().sum::<Complex64>() / nf;
    let var = samples.map(|z| (z - mean).norm_sqr()).sum::<f64>() / (nf - 1.0);
    let se = (var / nf).sqrt();
    let err = (mean - theory).norm();
    if se == 0.0 {
        if err == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        err / se
    }
}

pub fn moment_check(wsn: &WsnScenario, h: Hypothesis, draws: usize, seed: u64) -> Result<MomentReport> {
    let model = DecisionModel::from_scenario(wsn);
    let ys: Vec<CVector> = (0..draws as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, MOMENT_STREAMS[h.index()], t);
            draw_sample(wsn, &model, None, h, &mut rng).map(|s| s.y)
        })
        .collect::<Result<_>>()?;
    let theory = second_order_char(wsn, h);
    let n = wsn.n_antennas();
    let centered: Vec<CVector> = ys.iter().map(|y| y - &theory.mean).collect();
    let mut max_z: f64 = 0.0;
    let mut max_diag_rel: f64 = 0.0;
    for i in 0..n {
        max_z = max_z.max(entry_z(ys.iter().map(|y| y[i]), draws, theory.mean[i]));
        for j in i..n {
            let cov_samples = centered.iter().map(|d| d[i] * d[j].conj());
            max_z = max_z.max(entry_z(cov_samples.clone(), draws, theory.cov[(i, j)]));
            let pcov_samples = centered.iter().map(|d| d[i] * d[j]);
            max_z = max_z.max(entry_z(pcov_samples, draws, theory.pcov[(i, j)]));
            if i == j {
                let est = cov_samples.sum::<Complex64>().re / draws as f64;
                let t = theory.cov[(i, i)].re;
                max_diag_rel = max_diag_rel.max((est - t).abs() / t);
            }
        }
    }
    Ok(MomentReport { max_z, max_diag_rel, draws })
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub trials: usize,
    pub seed: u64,
    pub is_assumption: bool,
}

/// Run every check that applies to the scenario.
pub fn run_suite(wsn: &WsnScenario, jammer: Option<&JammerScenario>, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let base = if opts.is_assumption { wsn.with_decision_quality(1.0, 0.0)? } else { wsn.clone() };
    let mut out = lemma1(&base, opts.trials, opts.seed)?;
    for h in [Hypothesis::H0, Hypothesis::H1] {
        let rep = moment_check(&base, h, MOMENT_DRAWS, opts.seed)?;
        let ok = rep.max_z <= 3.0 && rep.max_diag_rel <= 0.05;
        out.push(Check {
            name: "moments",
            subject: format!("{h:?}").to_lowercase(),
            verdict: pass_fail(ok),
            diagnostic: rep.max_z,
            passed: ok,
        });
    }
    if opts.is_assumption {
        out.extend(lemma3(&base, opts.trials, 1000, opts.seed)?);
    }
    if let Some(j) = jammer {
        let d = piecewise_reduction(&base, j, 1000, opts.seed)?;
        out.push(Check {
            name: "piecewise",
            subject: "is-glrt,igmm-glrt".into(),
            verdict: pass_fail(d <= 1e-9),
            diagnostic: d,
            passed: d <= 1e-9,
        });
        let d = sigma_stationarity(&base, j, 200, opts.seed)?;
        out.push(Check {
            name: "sigma-stationarity",
            subject: "igmm-glrt".into(),
            verdict: pass_fail(d <= 1e-6),
            diagnostic: d,
            passed: d <= 1e-6,
        });
        if opts.is_assumption {
            out.push(jam_lemma(wsn, j, opts.trials, opts.seed)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{realize, DeploymentConfig, JammerPreset, WsnPreset};

    #[test]
    fn suite_passes_on_small_jammed_scenario() {
        let (wsn, jam) = realize(&DeploymentConfig::preset(WsnPreset::Nlos, JammerPreset::LosJam, 6, 4, 21)).unwrap();
        for is_assumption in [false, true] {
            let opts = SuiteOptions { trials: 2000, seed: 3, is_assumption };
            let checks = run_suite(&wsn, jam.as_ref(), &opts).unwrap();
            for c in &checks {
                println!("{c}");
            }
            assert!(checks.iter().all(|c| c.passed));
        }
    }

    #[test]
    fn check_line_format() {
        let c = Check { name: "lemma1", subject: "is,nlos".into(), verdict: "equivalent".into(), diagnostic: 0.0, passed: true };
        assert_eq!(c.to_string(), "lemma1: equivalent is,nlos 0e0");
    }
}
