//! Interference-free fusion statistics: LLR, IS, NLOS, WL (two deflection designs) and IGMM.

use num_complex::Complex64;

use crate::error::{invalid, FusionError, Result};
use crate::linalg::{augment, augment_rows, is_augmented_consistent, CMatrix, CVector, HpdFactor};
use crate::scenario::WsnScenario;
use crate::signal::{second_order_char_for, DecisionModel, Hypothesis, SecondOrderChar, MAX_TABLE_SENSORS};

/// Default cap on K for the exact mixture likelihood ratio.
pub const DEFAULT_LLR_CAP: usize = MAX_TABLE_SENSORS;

/// Below this the linear-domain mixture sum may have lost precision to underflow.
const SAFE_LINEAR_SUM: f64 = 1e-200;

/// Online log-sum-exp accumulator.
#[derive(Clone, Copy, Debug)]
struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    #[inline]
    fn push(&mut self, v: f64) {
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

/// Per-`x` quantities of the mixture likelihood ratio, stored in Gray-code order so
/// that consecutive entries differ in one decision bit.
#[derive(Clone, Debug)]
pub struct LlrTable {
    n: usize,
    k: usize,
    los: CMatrix,
    log_pmf: [Vec<f64>; 2],
    pmf: [Vec<f64>; 2],
    sigma: Vec<f64>,
    ln_sigma: Vec<f64>,
    inv_sigma: Vec<f64>,
    los_energy: Vec<f64>,
}

impl LlrTable {
    pub fn new(wsn: &WsnScenario, model: &DecisionModel) -> Result<Self> {
        let k = wsn.k_sensors();
        if model.k() != k {
            return invalid("decision model and scenario disagree on K");
        }
        let natural = [model.log_pmf_table(Hypothesis::H0)?, model.log_pmf_table(Hypothesis::H1)?];
        let size = 1usize << k;
        let nus = wsn.scattered_powers();
        let los = wsn.los_matrix().clone();
        let mut log_pmf = [Vec::with_capacity(size), Vec::with_capacity(size)];
        let mut sigma = Vec::with_capacity(size);
        let mut los_energy = Vec::with_capacity(size);
        let mut mean = CVector::zeros(wsn.n_antennas());
        for t in 0..size {
            let g = t ^ (t >> 1);
            if t > 0 {
                let bit = t.trailing_zeros() as usize;
                if (g >> bit) & 1 == 1 {
                    mean += los.column(bit);
                } else {
                    mean -= los.column(bit);
                }
            }
            let exact: f64 = wsn.noise_power() + (0..k).filter(|&j| (g >> j) & 1 == 1).map(|j| nus[j]).sum::<f64>();
            log_pmf[0].push(natural[0][g]);
            log_pmf[1].push(natural[1][g]);
            sigma.push(exact);
            los_energy.push(mean.norm_squared());
        }
        let ln_sigma = sigma.iter().map(|s| s.ln()).collect();
        let inv_sigma = sigma.iter().map(|s| 1.0 / s).collect();
        let pmf = [
            log_pmf[0].iter().map(|l| l.exp()).collect(),
            log_pmf[1].iter().map(|l| l.exp()).collect(),
        ];
        Ok(Self {
            n: wsn.n_antennas(),
            k,
            los,
            log_pmf,
            pmf,
            sigma,
            ln_sigma,
            inv_sigma,
            los_energy,
        })
    }

    /// `ln p(y|H1) − ln p(y|H0)` for mixtures with components
    /// `CN(Ã x, (σ_e²(x) + extra_var) I)`.
    pub fn evaluate(&self, y: &CVector, extra_var: f64) -> f64 {
        let proj: Vec<f64> = (0..self.k).map(|j| self.los.column(j).dotc(y).re).collect();
        let y2 = y.norm_squared();
        let n = self.n as f64;
        let mut base = Vec::with_capacity(self.sigma.len());
        let mut cross = 0.0;
        for t in 0..self.sigma.len() {
            if t > 0 {
                let bit = t.trailing_zeros() as usize;
                let g = t ^ (t >> 1);
                if (g >> bit) & 1 == 1 {
                    cross += proj[bit];
                } else {
                    cross -= proj[bit];
                }
            }
            let dist = (y2 - 2.0 * cross + self.los_energy[t]).max(0.0);
            base.push(if extra_var == 0.0 {
                -n * self.ln_sigma[t] - dist * self.inv_sigma[t]
            } else {
                let s = self.sigma[t] + extra_var;
                -n * s.ln() - dist / s
            });
        }
        let top = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sums = [0.0; 2];
        for (t, b) in base.iter().enumerate() {
            let w = (b - top).exp();
            sums[0] += self.pmf[0][t] * w;
            sums[1] += self.pmf[1][t] * w;
        }
        let log_mix = |i: usize| {
            if sums[i] > SAFE_LINEAR_SUM {
                top + sums[i].ln()
            } else {
                let mut acc = LogSumExp::new();
                for (lp, b) in self.log_pmf[i].iter().zip(&base) {
                    if *lp != f64::NEG_INFINITY {
                        acc.push(lp + b);
                    }
                }
                acc.value()
            }
        };
        log_mix(1) - log_mix(0)
    }
}

/// Everything the interference-free rules need, precomputed once per scenario.
#[derive(Clone, Debug)]
pub struct RuleContext {
    wsn: WsnScenario,
    model: DecisionModel,
    chars: [SecondOrderChar; 2],
    aug_los: CMatrix,
    aug_means: [CVector; 2],
    aug_factors: [HpdFactor; 2],
    aug_inverses: [CMatrix; 2],
    wl: [Option<CVector>; 2],
    llr: Option<LlrTable>,
    llr_cap: usize,
    igmm_quad: CMatrix,
    igmm_lin: CVector,
}

impl RuleContext {
    /// Context for conditionally independent sensors.
    pub fn new(wsn: &WsnScenario) -> Result<Self> {
        Self::with_model(wsn, DecisionModel::from_scenario(wsn), DEFAULT_LLR_CAP)
    }

    pub fn with_model(wsn: &WsnScenario, model: DecisionModel, llr_cap: usize) -> Result<Self> {
        let chars = [
            second_order_char_for(wsn, &model, Hypothesis::H0)?,
            second_order_char_for(wsn, &model, Hypothesis::H1)?,
        ];
        let aug_los = augment_rows(wsn.los_matrix());
        let aug_means = [chars[0].aug_mean(), chars[1].aug_mean()];
        let aug_factors = [HpdFactor::new(&chars[0].aug_cov)?, HpdFactor::new(&chars[1].aug_cov)?];
        let aug_inverses = [aug_factors[0].inverse(), aug_factors[1].inverse()];
        let igmm_quad = &aug_inverses[0] - &aug_inverses[1];
        let igmm_lin = aug_factors[1].solve(&aug_means[1]) - aug_factors[0].solve(&aug_means[0]);
        let llr = if wsn.k_sensors() <= llr_cap.min(MAX_TABLE_SENSORS) {
            Some(LlrTable::new(wsn, &model)?)
        } else {
            None
        };
        let mut ctx = Self {
            wsn: wsn.clone(),
            model,
            chars,
            aug_los,
            aug_means,
            aug_factors,
            aug_inverses,
            wl: [None, None],
            llr,
            llr_cap,
            igmm_quad,
            igmm_lin,
        };
        ctx.wl = [
            wl_weights(&ctx, Hypothesis::H0).ok(),
            wl_weights(&ctx, Hypothesis::H1).ok(),
        ];
        Ok(ctx)
    }

    pub fn scenario(&self) -> &WsnScenario {
        &self.wsn
    }

    pub fn model(&self) -> &DecisionModel {
        &self.model
    }

    pub fn char(&self, h: Hypothesis) -> &SecondOrderChar {
        &self.chars[h.index()]
    }

    /// `[Ã; conj(Ã)]`
    pub fn aug_los(&self) -> &CMatrix {
        &self.aug_los
    }

    pub fn aug_mean(&self, h: Hypothesis) -> &CVector {
        &self.aug_means[h.index()]
    }

    pub fn aug_inverse(&self, h: Hypothesis) -> &CMatrix {
        &self.aug_inverses[h.index()]
    }

    pub fn llr_table(&self) -> Result<&LlrTable> {
        self.llr.as_ref().ok_or_else(|| {
            FusionError::UnsupportedSize(format!(
                "exact LLR needs K <= {}, scenario has K = {}",
                self.llr_cap.min(MAX_TABLE_SENSORS),
                self.wsn.k_sensors()
            ))
        })
    }

    /// Cached `z_WL,i`, or the reason it does not exist.
    pub fn wl_weight(&self, h: Hypothesis) -> Result<&CVector> {
        match &self.wl[h.index()] {
            Some(z) => Ok(z),
            None => Err(wl_weights(self, h).err().unwrap_or_else(|| {
                FusionError::DegenerateWeights("WL weights unavailable".into())
            })),
        }
    }
}

/// Exact log-likelihood ratio of the two Gaussian mixtures.
pub fn llr(y: &CVector, ctx: &RuleContext) -> Result<f64> {
    Ok(ctx.llr_table()?.evaluate(y, 0.0))
}

/// `2 Re(μ̄† y) + (ν̄/σ_w²) ‖y‖²`
pub fn is_rule(y: &CVector, ctx: &RuleContext) -> f64 {
    let wsn = ctx.scenario();
    2.0 * wsn.mu_bar().dotc(y).re + wsn.nu_bar() / wsn.noise_power() * y.norm_squared()
}

/// Received energy `‖y‖²`.
pub fn nlos_rule(y: &CVector) -> f64 {
    y.norm_squared()
}

/// Unit-norm maximizer of the deflection `D_i`: `Σ_ȳ|H_i⁻¹ Ã̲ ρ_{1,0}` normalized.
pub fn wl_weights(ctx: &RuleContext, h: Hypothesis) -> Result<CVector> {
    let rho1 = &ctx.char(Hypothesis::H1).rho;
    let rho0 = &ctx.char(Hypothesis::H0).rho;
    if rho1 == rho0 {
        return Err(FusionError::DegenerateWeights("rho_1 equals rho_0".into()));
    }
    let k = rho1.len();
    let rho10 = CVector::from_iterator(k, rho1.iter().zip(rho0).map(|(a, b)| Complex64::new(a - b, 0.0)));
    let z = ctx.aug_factors[h.index()].solve(&(ctx.aug_los() * rho10));
    let norm = z.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(FusionError::DegenerateWeights(
            "received LOS mean shift is zero, no WL direction exists".into(),
        ));
    }
    Ok(z.unscale(norm))
}

fn wl_value(y_aug: &CVector, z: &CVector) -> Result<f64> {
    let v = z.dotc(y_aug);
    if v.im.abs() > 1e-10 * (1.0 + z.norm() * y_aug.norm()) {
        return Err(FusionError::Numerical(format!("WL statistic has imaginary part {}", v.im)));
    }
    Ok(v.re)
}

/// `z̲† y̲` for an augmented-consistent weight vector.
pub fn wl_rule(y: &CVector, z: &CVector) -> Result<f64> {
    if z.len() != 2 * y.len() {
        return invalid(format!("WL weight has length {}, expected {}", z.len(), 2 * y.len()));
    }
    if !is_augmented_consistent(z, 1e-10) {
        return invalid("WL weight vector is not augmented-consistent");
    }
    wl_value(&augment(y), z)
}

/// WL statistic with the cached `z_WL,i`.
pub fn wl_statistic(y: &CVector, ctx: &RuleContext, h: Hypothesis) -> Result<f64> {
    wl_value(&augment(y), ctx.wl_weight(h)?)
}

/// Deflection `D_i(z) = (z̲†(m̄_1 − m̄_0))² / (z̲† Σ_ȳ|H_i z̲)`.
pub fn deflection(ctx: &RuleContext, z: &CVector, h: Hypothesis) -> f64 {
    let shift = z.dotc(&(ctx.aug_mean(Hypothesis::H1) - ctx.aug_mean(Hypothesis::H0))).re;
    let var = z.dotc(&(&ctx.char(h).aug_cov * z)).re;
    shift * shift / var
}

/// Difference of the two improper-Gaussian quadratic forms.
pub fn igmm_rule(y: &CVector, ctx: &RuleContext) -> f64 {
    let ya = augment(y);
    let q1 = ctx.aug_factors[1].quad_form(&(&ya - &ctx.aug_means[1]));
    let q0 = ctx.aug_factors[0].quad_form(&(&ya - &ctx.aug_means[0]));
    q0 - q1
}

/// Quadratic-plus-linear form of the IGMM statistic, equal to [`igmm_rule`] up to a constant.
pub fn igmm_rule_expanded(y: &CVector, ctx: &RuleContext) -> f64 {
    let ya = augment(y);
    ya.dotc(&(&ctx.igmm_quad * &ya)).re + 2.0 * ya.dotc(&ctx.igmm_lin).re
}
