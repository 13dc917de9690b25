//! Static parameters of the sensor network, the jammer and the DFC array.
//!
//! Sensors sit in a 2-D annulus around the fusion center (origin). The DFC is
//! a half-wavelength uniform linear array, so a source at bearing θ produces the
//! steering vector `a(θ)_m = exp(jπ m cos θ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, FusionError, Result};
use crate::linalg::{full_svd, projector, CMatrix, CVector};
use crate::rng::{stream_rng, streams};

/// Convert a dB (or dBm) value to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `sqrt(κ/(1+κ))`, with the LOS-only limit `κ = ∞ → 1`.
pub fn rician_los_gain(kappa: f64) -> f64 {
    if kappa.is_infinite() {
        1.0
    } else {
        (kappa / (1.0 + kappa)).sqrt()
    }
}

/// ULA steering vector `[1, e^{jπ cos θ}, …, e^{jπ(n-1) cos θ}]`.
pub fn steering_vector(theta: f64, n: usize) -> Result<CVector> {
    if n == 0 {
        return invalid("steering vector needs at least one antenna");
    }
    let phase = PI * theta.cos();
    Ok(CVector::from_fn(n, |m, _| {
        Complex64::from_polar(1.0, phase * m as f64)
    }))
}

fn steering_matrix(angles: &[f64], n: usize) -> Result<CMatrix> {
    let mut a = CMatrix::zeros(n, angles.len());
    for (k, &theta) in angles.iter().enumerate() {
        a.set_column(k, &steering_vector(theta, n)?);
    }
    Ok(a)
}

/// Bearing of a point seen from the origin, folded into `[0, π]`.
///
/// A ULA only resolves `cos θ`, so front and back directions coincide.
pub fn bearing(position: [f64; 2]) -> f64 {
    let r = position[0].hypot(position[1]);
    if r == 0.0 {
        return PI / 2.0;
    }
    (position[0] / r).clamp(-1.0, 1.0).acos()
}

/// Long-term power gain `ξ·(r_min/r)^L`.
pub fn large_scale_gain(xi: f64, distance: f64, r_min: f64, path_loss_exponent: f64) -> f64 {
    xi * (r_min / distance).powf(path_loss_exponent)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub position: [f64; 2],
    pub beta: f64,
    pub kappa: f64,
    pub theta: f64,
    pub pd: f64,
    pub pf: f64,
}

impl SensorParams {
    /// `b_k`
    pub fn los_gain(&self) -> f64 {
        rician_los_gain(self.kappa)
    }

    /// `ν_k = β_k (1 − b_k²)`, the received scattered power.
    pub fn scattered_power(&self) -> f64 {
        let b = self.los_gain();
        self.beta * (1.0 - b * b)
    }

    /// `b_k² β_k`, the received LOS power.
    pub fn los_power(&self) -> f64 {
        let b = self.los_gain();
        self.beta * b * b
    }

    fn validate(&self, k: usize) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid(format!("sensor {k}: beta must be positive, got {}", self.beta));
        }
        if !(self.kappa >= 0.0) {
            return invalid(format!("sensor {k}: kappa must be >= 0, got {}", self.kappa));
        }
        if !(0.0..=1.0).contains(&self.pd) || !(0.0..=1.0).contains(&self.pf) {
            return invalid(format!("sensor {k}: local probabilities must lie in [0, 1]"));
        }
        if self.pf > self.pd {
            return invalid(format!(
                "sensor {k}: pf ({}) exceeds pd ({})",
                self.pf, self.pd
            ));
        }
        if !self.theta.is_finite() {
            return invalid(format!("sensor {k}: theta must be finite"));
        }
        Ok(())
    }
}

/// WSN-side scenario with its derived LOS quantities.
#[derive(Clone, Debug)]
pub struct WsnScenario {
    sensors: Vec<SensorParams>,
    n_antennas: usize,
    noise_power: f64,
    steering: CMatrix,
    los: CMatrix,
    mu_bar: CVector,
    nu_bar: f64,
}

impl WsnScenario {
    pub fn new(sensors: Vec<SensorParams>, n_antennas: usize, noise_power: f64) -> Result<Self> {
        if sensors.is_empty() {
            return invalid("scenario needs at least one sensor");
        }
        if n_antennas == 0 {
            return invalid("scenario needs at least one antenna");
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return invalid(format!("noise power must be positive, got {noise_power}"));
        }
        for (k, s) in sensors.iter().enumerate() {
            s.validate(k)?;
        }
        let thetas: Vec<f64> = sensors.iter().map(|s| s.theta).collect();
        let steering = steering_matrix(&thetas, n_antennas)?;
        let mut los = steering.clone();
        for (k, s) in sensors.iter().enumerate() {
            let gain = s.beta.sqrt() * s.los_gain();
            los.column_mut(k).scale_mut(gain);
        }
        let k = sensors.len() as f64;
        let mu_bar = los.column_sum().unscale(k);
        let nu_bar = sensors.iter().map(SensorParams::scattered_power).sum::<f64>() / k;
        Ok(Self {
            sensors,
            n_antennas,
            noise_power,
            steering,
            los,
            mu_bar,
            nu_bar,
        })
    }

    pub fn sensors(&self) -> &[SensorParams] {
        &self.sensors
    }

    pub fn k_sensors(&self) -> usize {
        self.sensors.len()
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    /// `σ_w²` (linear).
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// `A(θ)`
    pub fn steering(&self) -> &CMatrix {
        &self.steering
    }

    /// Received LOS matrix `Ã(θ) = A(θ) R D^{1/2}`.
    pub fn los_matrix(&self) -> &CMatrix {
        &self.los
    }

    pub fn mu_bar(&self) -> &CVector {
        &self.mu_bar
    }

    pub fn nu_bar(&self) -> f64 {
        self.nu_bar
    }

    pub fn betas(&self) -> Vec<f64> {
        self.sensors.iter().map(|s| s.beta).collect()
    }

    pub fn scattered_powers(&self) -> Vec<f64> {
        self.sensors.iter().map(SensorParams::scattered_power).collect()
    }

    /// `ρ_i`: per-sensor probability of transmitting under `H_i`.
    pub fn transmit_probabilities(&self, h1: bool) -> Vec<f64> {
        self.sensors
            .iter()
            .map(|s| if h1 { s.pd } else { s.pf })
            .collect()
    }

    /// `σ_e²(x) = σ_w² + Σ_k ν_k x_k`.
    pub fn effective_noise(&self, x: &[u8]) -> f64 {
        self.noise_power
            + self
                .sensors
                .iter()
                .zip(x)
                .filter(|(_, &xk)| xk != 0)
                .map(|(s, _)| s.scattered_power())
                .sum::<f64>()
    }

    fn rebuild(&self, sensors: Vec<SensorParams>, n: usize, noise: f64) -> Result<Self> {
        Self::new(sensors, n, noise)
    }

    pub fn with_noise_power(&self, noise_power: f64) -> Result<Self> {
        self.rebuild(self.sensors.clone(), self.n_antennas, noise_power)
    }

    pub fn with_antennas(&self, n_antennas: usize) -> Result<Self> {
        self.rebuild(self.sensors.clone(), n_antennas, self.noise_power)
    }

    /// Same deployment with every sensor given the local quality `(pd, pf)`.
    pub fn with_decision_quality(&self, pd: f64, pf: f64) -> Result<Self> {
        let sensors = self
            .sensors
            .iter()
            .map(|s| SensorParams { pd, pf, ..s.clone() })
            .collect();
        self.rebuild(sensors, self.n_antennas, self.noise_power)
    }

    /// Same deployment with every Rician factor replaced by `kappa` (linear).
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        let sensors = self
            .sensors
            .iter()
            .map(|s| SensorParams { kappa, ..s.clone() })
            .collect();
        self.rebuild(sensors, self.n_antennas, self.noise_power)
    }

    /// Rescale all sensor powers by `factor` (used to push a deployment toward weak LOS).
    pub fn with_power_scale(&self, factor: f64) -> Result<Self> {
        let sensors = self
            .sensors
            .iter()
            .map(|s| SensorParams {
                beta: s.beta * factor,
                ..s.clone()
            })
            .collect();
        self.rebuild(sensors, self.n_antennas, self.noise_power)
    }
}

/// How the jamming symbols `ψ` are produced for each trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignalPolicy {
    /// `ψ_ℓ = e^{jφ_ℓ}`, φ_ℓ uniform on `[0, 2π)`, redrawn every trial.
    #[default]
    RandomPhase,
    /// The same `ψ` on every trial, given as `[re, im]` pairs.
    Constant { psi: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JammerEmitter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
    pub beta: f64,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

impl JammerEmitter {
    /// `b_ℓ,J`
    pub fn los_gain(&self) -> f64 {
        rician_los_gain(self.kappa)
    }

    /// `ν_ℓ,J = β_ℓ,J (1 − b_ℓ,J²)`
    pub fn scattered_power(&self) -> f64 {
        let b = self.los_gain();
        self.beta * (1.0 - b * b)
    }
}

/// Jammer-side scenario: steering matrix, its SVD and the interference-free projector.
#[derive(Clone, Debug)]
pub struct JammerScenario {
    emitters: Vec<JammerEmitter>,
    n_antennas: usize,
    policy: SignalPolicy,
    steering: CMatrix,
    u_full: CMatrix,
    singular_values: Vec<f64>,
    v: CMatrix,
    projector: CMatrix,
}

/// Rank threshold relative to the largest singular value.
pub const JAMMER_RANK_TOL: f64 = 1e-8;

impl JammerScenario {
    pub fn new(emitters: Vec<JammerEmitter>, n_antennas: usize, policy: SignalPolicy) -> Result<Self> {
        let phis: Vec<f64> = emitters
            .iter()
            .map(|e| {
                e.phi
                    .ok_or_else(|| FusionError::InvalidArgument("jammer emitter without angle".into()))
            })
            .collect::<Result<_>>()?;
        if n_antennas == 0 {
            return invalid("jammer scenario needs at least one antenna");
        }
        let steering = steering_matrix(&phis, n_antennas)?;
        Self::from_steering(steering, emitters, policy)
    }

    /// Build from an explicit `A_J` (columns need not be ULA steering vectors).
    pub fn from_steering(
        steering: CMatrix,
        emitters: Vec<JammerEmitter>,
        policy: SignalPolicy,
    ) -> Result<Self> {
        let (n, r) = steering.shape();
        if r == 0 {
            return invalid("jammer rank must be at least 1");
        }
        if r >= n {
            return invalid(format!(
                "jammer rank r = {r} must be smaller than the number of antennas N = {n}"
            ));
        }
        if emitters.len() != r {
            return invalid(format!(
                "jammer has {} emitters but A_J has {r} columns",
                emitters.len()
            ));
        }
        for (l, e) in emitters.iter().enumerate() {
            if !(e.beta > 0.0 && e.beta.is_finite()) || !(e.kappa >= 0.0) {
                return invalid(format!("jammer emitter {l} has invalid beta/kappa"));
            }
        }
        if let SignalPolicy::Constant { psi } = &policy {
            if psi.len() != r {
                return invalid(format!("constant psi has length {}, expected {r}", psi.len()));
            }
        }
        let (u_full, singular_values, v) = full_svd(&steering)?;
        let smax = singular_values[0];
        let smin = singular_values[r - 1];
        if !(smin > JAMMER_RANK_TOL * smax) {
            return invalid(format!(
                "jammer steering matrix is rank deficient (singular values {singular_values:?})"
            ));
        }
        let u_perp = u_full.columns(r, n - r).into_owned();
        let projector = projector(&u_perp);
        Ok(Self {
            emitters,
            n_antennas: n,
            policy,
            steering,
            u_full,
            singular_values,
            v,
            projector,
        })
    }

    pub fn emitters(&self) -> &[JammerEmitter] {
        &self.emitters
    }

    pub fn rank(&self) -> usize {
        self.emitters.len()
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn policy(&self) -> &SignalPolicy {
        &self.policy
    }

    /// `A_J(φ)`
    pub fn steering(&self) -> &CMatrix {
        &self.steering
    }

    /// Full left singular basis `U_J` (N×N); the first r columns span range(A_J).
    pub fn left_basis(&self) -> &CMatrix {
        &self.u_full
    }

    /// `U_J,⊥`: the last N − r columns of `U_J`.
    pub fn complement_basis(&self) -> CMatrix {
        let r = self.rank();
        self.u_full.columns(r, self.n_antennas - r).into_owned()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn right_basis(&self) -> &CMatrix {
        &self.v
    }

    /// `P⊥` onto the orthogonal complement of range(A_J).
    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    pub fn project(&self, y: &CVector) -> CVector {
        &self.projector * y
    }

    /// Least-squares `ζ̂ = A_J⁻ y` with singular values below `1e-10·σ_max` dropped.
    pub fn pseudo_inverse_apply(&self, y: &CVector) -> CVector {
        let r = self.rank();
        let smax = self.singular_values[0];
        let ur = self.u_full.columns(0, r);
        let mut coeffs = ur.adjoint() * y;
        for (i, s) in self.singular_values.iter().enumerate() {
            coeffs[i] = if *s > 1e-10 * smax {
                coeffs[i] / *s
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        &self.v * coeffs
    }

    pub fn scattered_powers(&self) -> Vec<f64> {
        self.emitters.iter().map(JammerEmitter::scattered_power).collect()
    }

    /// `σ_J²(ψ) = Σ_ℓ ν_ℓ,J |ψ_ℓ|²`
    pub fn scattered_variance(&self, psi: &CVector) -> f64 {
        self.emitters
            .iter()
            .zip(psi.iter())
            .map(|(e, p)| e.scattered_power() * p.norm_sqr())
            .sum()
    }

    /// `ζ(ψ) = R_J D_J^{1/2} ψ`
    pub fn los_symbols(&self, psi: &CVector) -> CVector {
        CVector::from_iterator(
            self.rank(),
            self.emitters
                .iter()
                .zip(psi.iter())
                .map(|(e, p)| p * (e.los_gain() * e.beta.sqrt())),
        )
    }

    pub fn draw_signal<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        match &self.policy {
            SignalPolicy::RandomPhase => CVector::from_fn(self.rank(), |_, _| {
                Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI)
            }),
            SignalPolicy::Constant { psi } => {
                CVector::from_iterator(psi.len(), psi.iter().map(|p| Complex64::new(p[0], p[1])))
            }
        }
    }

    pub fn with_antennas(&self, n_antennas: usize) -> Result<Self> {
        Self::new(self.emitters.clone(), n_antennas, self.policy.clone())
    }

    pub fn with_policy(&self, policy: SignalPolicy) -> Result<Self> {
        Self::from_steering(self.steering.clone(), self.emitters.clone(), policy)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        let emitters = self
            .emitters
            .iter()
            .map(|e| JammerEmitter { kappa, ..e.clone() })
            .collect();
        Self::from_steering(self.steering.clone(), emitters, self.policy.clone())
    }
}

/// Rician-factor interval presets for the WSN.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WsnPreset {
    Los,
    Intermediate,
    Nlos,
}

impl WsnPreset {
    pub const ALL: [WsnPreset; 3] = [WsnPreset::Los, WsnPreset::Intermediate, WsnPreset::Nlos];

    /// `[κ_min, κ_max]` in dB.
    pub fn kappa_db(self) -> [f64; 2] {
        match self {
            WsnPreset::Los => [10.0, 20.0],
            WsnPreset::Intermediate => [-10.0, 10.0],
            WsnPreset::Nlos => [-20.0, -10.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WsnPreset::Los => "los",
            WsnPreset::Intermediate => "intermediate",
            WsnPreset::Nlos => "nlos",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// Rician-factor interval presets for the jammer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JammerPreset {
    None,
    LosJam,
    WeakLosJam,
}

impl JammerPreset {
    pub const ALL: [JammerPreset; 3] = [JammerPreset::None, JammerPreset::LosJam, JammerPreset::WeakLosJam];

    pub fn kappa_db(self) -> Option<[f64; 2]> {
        match self {
            JammerPreset::None => None,
            JammerPreset::LosJam => Some([10.0, 20.0]),
            JammerPreset::WeakLosJam => Some([-10.0, 10.0]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JammerPreset::None => "none",
            JammerPreset::LosJam => "los-jam",
            JammerPreset::WeakLosJam => "weak-los-jam",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JammerConfig {
    pub rank: usize,
    pub shadowing_mean_db: f64,
    pub shadowing_std_db: f64,
    pub kappa_db: [f64; 2],
    #[serde(default)]
    pub policy: SignalPolicy,
}

/// Parameters of the random deployment recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeploymentConfig {
    pub k_sensors: usize,
    pub n_antennas: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub path_loss_exponent: f64,
    pub shadowing_mean_db: f64,
    pub shadowing_std_db: f64,
    pub kappa_db: [f64; 2],
    pub pd: f64,
    pub pf: f64,
    /// `σ_w²`, linear (mW).
    pub noise_power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jammer: Option<JammerConfig>,
    pub seed: u64,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            k_sensors: 14,
            n_antennas: 6,
            r_min: 100.0,
            r_max: 1000.0,
            path_loss_exponent: 2.0,
            shadowing_mean_db: 15.0,
            shadowing_std_db: 2.0,
            kappa_db: WsnPreset::Los.kappa_db(),
            pd: 0.5,
            pf: 0.05,
            noise_power: 1.0,
            jammer: None,
            seed: 0,
        }
    }
}

impl DeploymentConfig {
    pub fn preset(wsn: WsnPreset, jammer: JammerPreset, k_sensors: usize, n_antennas: usize, seed: u64) -> Self {
        Self {
            k_sensors,
            n_antennas,
            kappa_db: wsn.kappa_db(),
            jammer: jammer.kappa_db().map(|kappa_db| JammerConfig {
                rank: 2,
                shadowing_mean_db: 25.0,
                shadowing_std_db: 2.0,
                kappa_db,
                policy: SignalPolicy::RandomPhase,
            }),
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_sensors == 0 || self.n_antennas == 0 {
            return invalid("need at least one sensor and one antenna");
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max) {
            return invalid(format!(
                "need 0 < r_min < r_max, got r_min = {}, r_max = {}",
                self.r_min, self.r_max
            ));
        }
        if !(self.shadowing_std_db >= 0.0) {
            return invalid("shadowing standard deviation must be >= 0");
        }
        if !(self.kappa_db[0] <= self.kappa_db[1]) {
            return invalid("kappa interval must satisfy kappa_min <= kappa_max");
        }
        if !(0.0..=1.0).contains(&self.pd) || !(0.0..=1.0).contains(&self.pf) || self.pf > self.pd {
            return invalid("local decision quality must satisfy 0 <= pf <= pd <= 1");
        }
        if !(self.noise_power > 0.0) {
            return invalid("noise power must be positive");
        }
        if let Some(j) = &self.jammer {
            if j.rank == 0 || j.rank >= self.n_antennas {
                return invalid(format!(
                    "jammer rank r = {} must satisfy 1 <= r < N = {}",
                    j.rank, self.n_antennas
                ));
            }
            if !(j.shadowing_std_db >= 0.0) || !(j.kappa_db[0] <= j.kappa_db[1]) {
                return invalid("invalid jammer shadowing or kappa interval");
            }
        }
        Ok(())
    }
}

struct Placement {
    position: [f64; 2],
    beta: f64,
    kappa: f64,
    angle: f64,
}

fn place<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &DeploymentConfig,
    shadowing_mean_db: f64,
    shadowing_std_db: f64,
    kappa_db: [f64; 2],
) -> Result<Placement> {
    let shadowing = Normal::new(shadowing_mean_db, shadowing_std_db)
        .map_err(|e| FusionError::InvalidArgument(format!("shadowing distribution: {e}")))?;
    let (r_min2, r_max2) = (cfg.r_min * cfg.r_min, cfg.r_max * cfg.r_max);
    let distance = (r_min2 + rng.random::<f64>() * (r_max2 - r_min2)).sqrt();
    let heading = rng.random::<f64>() * 2.0 * PI;
    let position = [distance * heading.cos(), distance * heading.sin()];
    let xi = db_to_linear(shadowing.sample(rng));
    let beta = large_scale_gain(xi, distance, cfg.r_min, cfg.path_loss_exponent);
    let kdb = kappa_db[0] + rng.random::<f64>() * (kappa_db[1] - kappa_db[0]);
    Ok(Placement {
        position,
        beta,
        kappa: db_to_linear(kdb),
        angle: bearing(position),
    })
}

/// Draw a WSN deployment following the annulus/path-loss/shadowing recipe.
pub fn generate_wsn<R: Rng + ?Sized>(config: &DeploymentConfig, rng: &mut R) -> Result<WsnScenario> {
    config.validate()?;
    let mut sensors = Vec::with_capacity(config.k_sensors);
    for _ in 0..config.k_sensors {
        let p = place(rng, config, config.shadowing_mean_db, config.shadowing_std_db, config.kappa_db)?;
        sensors.push(SensorParams {
            position: p.position,
            beta: p.beta,
            kappa: p.kappa,
            theta: p.angle,
            pd: config.pd,
            pf: config.pf,
        });
    }
    WsnScenario::new(sensors, config.n_antennas, config.noise_power)
}

/// Draw the jammer emitters with the same recipe and the jammer power parameters.
pub fn generate_jammer<R: Rng + ?Sized>(config: &DeploymentConfig, rng: &mut R) -> Result<JammerScenario> {
    config.validate()?;
    let jc = config
        .jammer
        .as_ref()
        .ok_or_else(|| FusionError::InvalidArgument("deployment has no jammer block".into()))?;
    let mut emitters = Vec::with_capacity(jc.rank);
    for _ in 0..jc.rank {
        let p = place(rng, config, jc.shadowing_mean_db, jc.shadowing_std_db, jc.kappa_db)?;
        emitters.push(JammerEmitter {
            position: Some(p.position),
            beta: p.beta,
            kappa: p.kappa,
            phi: Some(p.angle),
        });
    }
    JammerScenario::new(emitters, config.n_antennas, jc.policy.clone())
}

/// WSN and optional jammer generated from the config's own seed.
pub fn realize(config: &DeploymentConfig) -> Result<(WsnScenario, Option<JammerScenario>)> {
    let wsn = generate_wsn(config, &mut stream_rng(config.seed, streams::WSN_DEPLOYMENT))?;
    let jammer = match config.jammer {
        Some(_) => Some(generate_jammer(
            config,
            &mut stream_rng(config.seed, streams::JAMMER_DEPLOYMENT),
        )?),
        None => None,
    };
    Ok((wsn, jammer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hermitian_defect, operator_norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn steering_vector_examples() {
        let v = steering_vector(PI / 2.0, 4).unwrap();
        assert!(v.iter().all(|&z| close(z, c(1.0, 0.0))));
        let v = steering_vector(0.0, 3).unwrap();
        assert!(close(v[0], c(1.0, 0.0)) && close(v[1], c(-1.0, 0.0)) && close(v[2], c(1.0, 0.0)));
        let v = steering_vector(PI / 3.0, 2).unwrap();
        assert!(close(v[0], c(1.0, 0.0)) && close(v[1], c(0.0, 1.0)));
        assert!(matches!(steering_vector(1.0, 0), Err(FusionError::InvalidArgument(_))));
    }

    #[test]
    fn large_scale_gain_examples() {
        assert_eq!(large_scale_gain(1.0, 100.0, 100.0, 2.0), 1.0);
        assert!((large_scale_gain(1.0, 200.0, 100.0, 2.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bearing_folds_into_upper_half_plane() {
        assert!((bearing([1.0, 0.0]) - 0.0).abs() < 1e-15);
        assert!((bearing([0.0, 5.0]) - PI / 2.0).abs() < 1e-15);
        assert!((bearing([-2.0, 0.0]) - PI).abs() < 1e-15);
        assert!((bearing([1.0, -1.0]) - bearing([1.0, 1.0])).abs() < 1e-15);
    }

    #[test]
    fn default_recipe_values() {
        let cfg = DeploymentConfig::preset(WsnPreset::Los, JammerPreset::LosJam, 14, 6, 1);
        assert_eq!((cfg.shadowing_mean_db, cfg.shadowing_std_db), (15.0, 2.0));
        assert_eq!((cfg.r_min, cfg.r_max, cfg.path_loss_exponent), (100.0, 1000.0, 2.0));
        let j = cfg.jammer.unwrap();
        assert_eq!((j.shadowing_mean_db, j.shadowing_std_db, j.rank), (25.0, 2.0, 2));
        assert_eq!(j.kappa_db, [10.0, 20.0]);
        assert_eq!(JammerPreset::WeakLosJam.kappa_db(), Some([-10.0, 10.0]));
        assert_eq!(WsnPreset::Nlos.kappa_db(), [-20.0, -10.0]);
    }

    #[test]
    fn generated_scenario_invariants() {
        let cfg = DeploymentConfig::preset(WsnPreset::Intermediate, JammerPreset::LosJam, 14, 6, 42);
        let (wsn, jam) = realize(&cfg).unwrap();
        let n = wsn.n_antennas() as f64;
        for (k, s) in wsn.sensors().iter().enumerate() {
            let r = s.position[0].hypot(s.position[1]);
            assert!(r >= cfg.r_min && r <= cfg.r_max);
            let b = s.los_gain();
            assert!((0.0..1.0).contains(&b));
            assert_eq!(b * b + (1.0 - b * b), 1.0);
            assert!((s.scattered_power() + s.beta * b * b - s.beta).abs() <= 1e-15 * s.beta);
            let kdb = linear_to_db(s.kappa);
            assert!(kdb >= -10.0 - 1e-9 && kdb <= 10.0 + 1e-9);
            let col_norm = wsn.los_matrix().column(k).norm();
            assert!((col_norm - (n * s.beta).sqrt() * b).abs() < 1e-12 * (1.0 + col_norm));
        }
        assert!(wsn.steering().iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
        let jam = jam.unwrap();
        assert_eq!(jam.rank(), 2);
        let p = jam.projector();
        assert!(hermitian_defect(p) < 1e-12);
        assert!(operator_norm(&(p * p - p)) <= 1e-10);
        assert!(operator_norm(&(p * jam.steering())) <= 1e-10);
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = DeploymentConfig::preset(WsnPreset::Los, JammerPreset::WeakLosJam, 10, 4, 5);
        let (a, ja) = realize(&cfg).unwrap();
        let (b, jb) = realize(&cfg).unwrap();
        assert_eq!(a.sensors(), b.sensors());
        assert_eq!(ja.unwrap().emitters(), jb.unwrap().emitters());
    }

    #[test]
    fn kappa_zero_gives_nu_equal_beta() {
        let cfg = DeploymentConfig::preset(WsnPreset::Los, JammerPreset::None, 5, 3, 9);
        let wsn = realize(&cfg).unwrap().0.with_kappa(0.0).unwrap();
        for s in wsn.sensors() {
            assert_eq!(s.scattered_power(), s.beta);
        }
        assert_eq!(wsn.los_matrix().norm(), 0.0);
    }

    #[test]
    fn jammer_rank_must_be_below_antennas() {
        let mut cfg = DeploymentConfig::preset(WsnPreset::Los, JammerPreset::LosJam, 5, 2, 9);
        assert!(matches!(
            generate_jammer(&cfg, &mut ChaCha8Rng::seed_from_u64(1)),
            Err(FusionError::InvalidArgument(_))
        ));
        cfg.n_antennas = 3;
        assert!(generate_jammer(&cfg, &mut ChaCha8Rng::seed_from_u64(1)).is_ok());
    }

    #[test]
    fn basis_column_projector_zeroes_first_coordinate() {
        let mut a = CMatrix::zeros(4, 1);
        a[(0, 0)] = c(1.0, 0.0);
        let emitter = JammerEmitter { position: None, beta: 1.0, kappa: 1.0, phi: None };
        let jam = JammerScenario::from_steering(a, vec![emitter], SignalPolicy::RandomPhase).unwrap();
        let mut expected = CMatrix::identity(4, 4);
        expected[(0, 0)] = c(0.0, 0.0);
        assert!((jam.projector() - expected).norm() < 1e-14);
    }

    #[test]
    fn projector_annihilates_jammer_components() {
        let cfg = DeploymentConfig::preset(WsnPreset::Los, JammerPreset::LosJam, 4, 6, 3);
        let jam = realize(&cfg).unwrap().1.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            let v = CVector::from_fn(6, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let pv = jam.project(&v);
            assert!((jam.steering().adjoint() * pv).norm() <= 1e-9 * v.norm());
            // Projection equals the least-squares residual.
            let resid = &v - jam.steering() * jam.pseudo_inverse_apply(&v);
            assert!((resid - jam.project(&v)).norm() < 1e-10 * v.norm());
        }
    }

    #[test]
    fn rejects_invalid_sensor() {
        let s = SensorParams { position: [100.0, 0.0], beta: 1.0, kappa: 1.0, theta: 0.3, pd: 0.1, pf: 0.2 };
        assert!(WsnScenario::new(vec![s.clone()], 2, 1.0).is_err());
        let s = SensorParams { pd: 0.5, ..s };
        assert!(WsnScenario::new(vec![s.clone()], 2, 0.0).is_err());
        assert!(WsnScenario::new(vec![s], 2, 1.0).is_ok());
    }
}
