//! Per-trial random draws and the second-order characterization of the received vector.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, FusionError, Result};
use crate::linalg::{augment, CMatrix, CVector};
use crate::scenario::{JammerScenario, WsnScenario};

/// Largest K for which a full `{0,1}^K` table is materialized.
pub const MAX_TABLE_SENSORS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub fn index(self) -> usize {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }

    pub fn is_h1(self) -> bool {
        self == Hypothesis::H1
    }
}

/// Joint pmf of the decision vector under both hypotheses, as `2^K` tables.
///
/// Entry `i` of a table is `P(x | H)` for the vector with `x_k = (i >> k) & 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPmf {
    k: usize,
    tables: [Vec<f64>; 2],
}

impl JointPmf {
    pub fn new(k: usize, h0: Vec<f64>, h1: Vec<f64>) -> Result<Self> {
        if k == 0 || k > MAX_TABLE_SENSORS {
            return Err(FusionError::UnsupportedSize(format!(
                "joint pmf supports 1 <= K <= {MAX_TABLE_SENSORS}, got {k}"
            )));
        }
        for (name, t) in [("H0", &h0), ("H1", &h1)] {
            if t.len() != 1 << k {
                return invalid(format!("{name} table has {} entries, expected {}", t.len(), 1usize << k));
            }
            if t.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return invalid(format!("{name} table has negative or non-finite entries"));
            }
            let total: f64 = t.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return invalid(format!("{name} table sums to {total}, expected 1"));
            }
        }
        Ok(Self { k, tables: [h0, h1] })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn table(&self, h: Hypothesis) -> &[f64] {
        &self.tables[h.index()]
    }
}

/// Statistical model of the local decisions.
#[derive(Clone, Debug, PartialEq)]
pub enum DecisionModel {
    /// Conditionally independent sensors with per-sensor `(P_D,k, P_F,k)`.
    Independent { pd: Vec<f64>, pf: Vec<f64> },
    Joint(JointPmf),
}

fn bits(index: usize, k: usize) -> Vec<u8> {
    (0..k).map(|j| ((index >> j) & 1) as u8).collect()
}

impl DecisionModel {
    pub fn from_scenario(wsn: &WsnScenario) -> Self {
        DecisionModel::Independent {
            pd: wsn.transmit_probabilities(true),
            pf: wsn.transmit_probabilities(false),
        }
    }

    pub fn k(&self) -> usize {
        match self {
            DecisionModel::Independent { pd, .. } => pd.len(),
            DecisionModel::Joint(j) => j.k(),
        }
    }

    /// `ρ_i = E{x | H_i}`.
    pub fn rho(&self, h: Hypothesis) -> Vec<f64> {
        match self {
            DecisionModel::Independent { pd, pf } => match h {
                Hypothesis::H1 => pd.clone(),
                Hypothesis::H0 => pf.clone(),
            },
            DecisionModel::Joint(j) => {
                let mut rho = vec![0.0; j.k];
                for (i, p) in j.table(h).iter().enumerate() {
                    for (k, r) in rho.iter_mut().enumerate() {
                        if (i >> k) & 1 == 1 {
                            *r += p;
                        }
                    }
                }
                rho
            }
        }
    }

    /// `Σ_x|H_i`, the covariance of the decision vector.
    pub fn covariance(&self, h: Hypothesis) -> DMatrix<f64> {
        let k = self.k();
        match self {
            DecisionModel::Independent { .. } => {
                let rho = self.rho(h);
                DMatrix::from_fn(k, k, |a, b| if a == b { rho[a] * (1.0 - rho[a]) } else { 0.0 })
            }
            DecisionModel::Joint(j) => {
                let rho = self.rho(h);
                let mut second = DMatrix::<f64>::zeros(k, k);
                for (i, p) in j.table(h).iter().enumerate() {
                    if *p == 0.0 {
                        continue;
                    }
                    for a in 0..k {
                        if (i >> a) & 1 == 0 {
                            continue;
                        }
                        for b in 0..k {
                            if (i >> b) & 1 == 1 {
                                second[(a, b)] += p;
                            }
                        }
                    }
                }
                DMatrix::from_fn(k, k, |a, b| second[(a, b)] - rho[a] * rho[b])
            }
        }
    }

    /// `ln P(x | H)` for every `x ∈ {0,1}^K`, in natural index order.
    pub fn log_pmf_table(&self, h: Hypothesis) -> Result<Vec<f64>> {
        let k = self.k();
        if k > MAX_TABLE_SENSORS {
            return Err(FusionError::UnsupportedSize(format!(
                "pmf table needs K <= {MAX_TABLE_SENSORS}, got {k}"
            )));
        }
        match self {
            DecisionModel::Independent { .. } => {
                let rho = self.rho(h);
                let log_on: Vec<f64> = rho.iter().map(|p| p.ln()).collect();
                let log_off: Vec<f64> = rho.iter().map(|p| (1.0 - p).ln()).collect();
                Ok((0..1usize << k)
                    .map(|i| {
                        (0..k)
                            .map(|j| if (i >> j) & 1 == 1 { log_on[j] } else { log_off[j] })
                            .sum()
                    })
                    .collect())
            }
            DecisionModel::Joint(j) => Ok(j.table(h).iter().map(|p| p.ln()).collect()),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, h: Hypothesis, rng: &mut R) -> Vec<u8> {
        match self {
            DecisionModel::Independent { .. } => {
                let rho = match (self, h) {
                    (DecisionModel::Independent { pd, .. }, Hypothesis::H1) => pd,
                    (DecisionModel::Independent { pf, .. }, Hypothesis::H0) => pf,
                    _ => unreachable!(),
                };
                rho.iter().map(|&p| u8::from(rng.random::<f64>() < p)).collect()
            }
            DecisionModel::Joint(j) => {
                let u: f64 = rng.random();
                let table = j.table(h);
                let mut acc = 0.0;
                let mut pick = table.len() - 1;
                for (i, p) in table.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                bits(pick, j.k)
            }
        }
    }
}

/// Conditionally independent decisions using the scenario's `(P_D,k, P_F,k)`.
pub fn draw_decisions<R: Rng + ?Sized>(wsn: &WsnScenario, h: Hypothesis, rng: &mut R) -> Vec<u8> {
    wsn.sensors()
        .iter()
        .map(|s| {
            let p = if h.is_h1() { s.pd } else { s.pf };
            u8::from(rng.random::<f64>() < p)
        })
        .collect()
}

/// `n` i.i.d. `CN(0, variance)` entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize, variance: f64) -> CVector {
    let sd = (variance / 2.0).sqrt();
    CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(sd * re, sd * im)
    })
}

fn check_decisions(wsn: &WsnScenario, x: &[u8]) -> Result<()> {
    if x.len() != wsn.k_sensors() {
        return invalid(format!("decision vector has length {}, expected {}", x.len(), wsn.k_sensors()));
    }
    if x.iter().any(|&b| b > 1) {
        return invalid("decision entries must be 0 or 1");
    }
    Ok(())
}

/// `y = Ã x + Σ_k √ν_k h_k x_k + w`.
///
/// One fading vector is drawn per sensor regardless of `x`, then the noise, so
/// the random stream consumed by a trial does not depend on the decisions or on `σ_w²`.
pub fn draw_received<R: Rng + ?Sized>(wsn: &WsnScenario, x: &[u8], rng: &mut R) -> Result<CVector> {
    check_decisions(wsn, x)?;
    let n = wsn.n_antennas();
    let mut y = CVector::zeros(n);
    for (k, s) in wsn.sensors().iter().enumerate() {
        let h = complex_gaussian(rng, n, 1.0);
        if x[k] == 1 {
            y += wsn.los_matrix().column(k);
            y.axpy(Complex64::new(s.scattered_power().sqrt(), 0.0), &h, Complex64::new(1.0, 0.0));
        }
    }
    let w = complex_gaussian(rng, n, 1.0);
    y.axpy(Complex64::new(wsn.noise_power().sqrt(), 0.0), &w, Complex64::new(1.0, 0.0));
    Ok(y)
}

/// Full channel matrix `H̄ = (A(θ) R + H (I − R²)^{1/2}) D^{1/2}` for one trial.
pub fn draw_channel<R: Rng + ?Sized>(wsn: &WsnScenario, rng: &mut R) -> CMatrix {
    let n = wsn.n_antennas();
    let mut h_bar = CMatrix::zeros(n, wsn.k_sensors());
    for (k, s) in wsn.sensors().iter().enumerate() {
        let b = s.los_gain();
        let h = complex_gaussian(rng, n, 1.0);
        let los = wsn.steering().column(k) * Complex64::new(b, 0.0);
        let col = (los + h * Complex64::new((1.0 - b * b).sqrt(), 0.0)) * Complex64::new(s.beta.sqrt(), 0.0);
        h_bar.set_column(k, &col);
    }
    h_bar
}

/// `y = H̄ x + w` with an explicitly drawn channel matrix.
pub fn draw_received_via_channel<R: Rng + ?Sized>(wsn: &WsnScenario, x: &[u8], rng: &mut R) -> Result<CVector> {
    check_decisions(wsn, x)?;
    let h_bar = draw_channel(wsn, rng);
    let xv = CVector::from_iterator(x.len(), x.iter().map(|&b| Complex64::new(f64::from(b), 0.0)));
    let w = complex_gaussian(rng, wsn.n_antennas(), wsn.noise_power());
    Ok(h_bar * xv + w)
}

/// `s_J = A_J ζ(ψ) + Σ_ℓ √ν_ℓ,J h_J,ℓ ψ_ℓ` with fresh scattering vectors.
pub fn jammer_signal<R: Rng + ?Sized>(jammer: &JammerScenario, psi: &CVector, rng: &mut R) -> Result<CVector> {
    if psi.len() != jammer.rank() {
        return invalid(format!("psi has length {}, expected {}", psi.len(), jammer.rank()));
    }
    let n = jammer.n_antennas();
    let mut s = jammer.steering() * jammer.los_symbols(psi);
    for (l, e) in jammer.emitters().iter().enumerate() {
        let h = complex_gaussian(rng, n, 1.0);
        s.axpy(psi[l] * e.scattered_power().sqrt(), &h, Complex64::new(1.0, 0.0));
    }
    Ok(s)
}

/// Jammed received vector `y_s = y + s_J` and the jamming symbols used.
pub fn draw_jammed<R: Rng + ?Sized>(
    wsn: &WsnScenario,
    jammer: &JammerScenario,
    x: &[u8],
    rng: &mut R,
) -> Result<(CVector, CVector)> {
    if jammer.n_antennas() != wsn.n_antennas() {
        return invalid("jammer and WSN scenarios have different antenna counts");
    }
    let y = draw_received(wsn, x, rng)?;
    let psi = jammer.draw_signal(rng);
    let s = jammer_signal(jammer, &psi, rng)?;
    Ok((y + s, psi))
}

#[derive(Clone, Debug)]
pub struct ReceivedSample {
    pub y: CVector,
    pub hypothesis: Hypothesis,
    pub x: Vec<u8>,
    pub psi: Option<CVector>,
}

impl ReceivedSample {
    pub fn jammed(&self) -> bool {
        self.psi.is_some()
    }
}

/// Draw decisions, then the (optionally jammed) received vector.
pub fn draw_sample<R: Rng + ?Sized>(
    wsn: &WsnScenario,
    model: &DecisionModel,
    jammer: Option<&JammerScenario>,
    h: Hypothesis,
    rng: &mut R,
) -> Result<ReceivedSample> {
    let x = model.draw(h, rng);
    let (y, psi) = match jammer {
        Some(j) => {
            let (y, psi) = draw_jammed(wsn, j, &x, rng)?;
            (y, Some(psi))
        }
        None => (draw_received(wsn, &x, rng)?, None),
    };
    Ok(ReceivedSample { y, hypothesis: h, x, psi })
}

/// Conditional first- and second-order moments of `y` under one hypothesis.
#[derive(Clone, Debug)]
pub struct SecondOrderChar {
    pub rho: Vec<f64>,
    pub sigma_e2: f64,
    pub mean: CVector,
    pub cov: CMatrix,
    pub pcov: CMatrix,
    pub aug_cov: CMatrix,
}

impl SecondOrderChar {
    /// `[m; conj(m)]`
    pub fn aug_mean(&self) -> CVector {
        augment(&self.mean)
    }
}

/// Moments for conditionally independent decisions.
pub fn second_order_char(wsn: &WsnScenario, h: Hypothesis) -> SecondOrderChar {
    let model = DecisionModel::from_scenario(wsn);
    second_order_char_with(wsn, &model.rho(h), &model.covariance(h))
        .expect("independent model has consistent sizes")
}

/// Moments for an arbitrary decision mean `ρ` and covariance `Σ_x`.
pub fn second_order_char_with(wsn: &WsnScenario, rho: &[f64], sigma_x: &DMatrix<f64>) -> Result<SecondOrderChar> {
    let k = wsn.k_sensors();
    if rho.len() != k {
        return invalid(format!("rho has length {}, expected {k}", rho.len()));
    }
    if sigma_x.nrows() != k || sigma_x.ncols() != k {
        return invalid(format!(
            "decision covariance must be {k}x{k}, got {}x{}",
            sigma_x.nrows(),
            sigma_x.ncols()
        ));
    }
    let n = wsn.n_antennas();
    let a = wsn.los_matrix();
    let rho_c = CVector::from_iterator(k, rho.iter().map(|&p| Complex64::new(p, 0.0)));
    let sx = sigma_x.map(|v| Complex64::new(v, 0.0));
    let sigma_e2 = wsn.noise_power()
        + wsn
            .sensors()
            .iter()
            .zip(rho)
            .map(|(s, p)| s.scattered_power() * p)
            .sum::<f64>();
    let mean = a * rho_c;
    let a_sx = a * &sx;
    let gram = &a_sx * a.adjoint();
    let cov = &gram + CMatrix::identity(n, n) * Complex64::new(sigma_e2, 0.0);
    let pcov = &a_sx * a.transpose();
    let mut aug_cov = CMatrix::zeros(2 * n, 2 * n);
    aug_cov.view_mut((0, 0), (n, n)).copy_from(&cov);
    aug_cov.view_mut((0, n), (n, n)).copy_from(&pcov);
    aug_cov.view_mut((n, 0), (n, n)).copy_from(&pcov.conjugate());
    aug_cov.view_mut((n, n), (n, n)).copy_from(&cov.conjugate());
    Ok(SecondOrderChar {
        rho: rho.to_vec(),
        sigma_e2,
        mean,
        cov,
        pcov,
        aug_cov,
    })
}

/// Moments using a decision model's own `ρ_i` and `Σ_x|H_i`.
pub fn second_order_char_for(wsn: &WsnScenario, model: &DecisionModel, h: Hypothesis) -> Result<SecondOrderChar> {
    if model.k() != wsn.k_sensors() {
        return invalid("decision model and scenario disagree on K");
    }
    second_order_char_with(wsn, &model.rho(h), &model.covariance(h))
}

/// Write samples as CSV rows: trial, hypothesis, decision bits, then Re/Im of each `y_n`.
pub fn write_samples_csv<W: Write>(out: W, samples: &[(u64, ReceivedSample)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = samples.first().map_or(0, |(_, s)| s.y.len());
    let mut header = vec!["trial".to_string(), "hypothesis".to_string(), "x".to_string()];
    for i in 0..n {
        header.push(format!("y{i}_re"));
        header.push(format!("y{i}_im"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for (trial, s) in samples {
        let mut row = vec![
            trial.to_string(),
            if s.hypothesis.is_h1() { "H1" } else { "H0" }.to_string(),
            s.x.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect(),
        ];
        for z in s.y.iter() {
            row.push(z.re.to_string());
            row.push(z.im.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> FusionError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FusionError::Io(io),
        other => FusionError::Parse(format!("{other:?}")),
    }
}
