//! Jammer-aware statistics: clairvoyant LRT, IS-GLRT, NLOS-GLRT and IGMM-GLRT.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, hermitize, CMatrix, CVector};
use crate::poly::Polynomial;
use crate::rules::RuleContext;
use crate::scenario::JammerScenario;
use crate::signal::Hypothesis;

/// Relative distance below which two poles of the stationarity equation are merged.
const POLE_MERGE_TOL: f64 = 1e-10;
/// Imaginary-part tolerance for accepting a companion eigenvalue as a real root.
const ROOT_IMAG_TOL: f64 = 1e-8;

/// Concentrated log-likelihood in `σ_J²`, without the `−N ln π` constant:
/// `−½ Σ ln(λ_A,n + s) − ½ Σ |v_ℓ|²/(λ_c,ℓ + s)`.
pub fn concentrated_log_likelihood(lambda_a: &[f64], lambda_c: &[f64], v_abs2: &[f64], s: f64) -> f64 {
    let det: f64 = lambda_a.iter().map(|l| (l + s).ln()).sum();
    let quad: f64 = lambda_c
        .iter()
        .zip(v_abs2)
        .filter(|(_, v)| **v != 0.0)
        .map(|(l, v)| v / (l + s))
        .sum();
    -0.5 * det - 0.5 * quad
}

/// Both sides of the stationarity condition `Σ 1/(λ_A,n+s) = Σ |v_ℓ|²/(λ_c,ℓ+s)²`.
pub fn stationarity_sides(lambda_a: &[f64], lambda_c: &[f64], v_abs2: &[f64], s: f64) -> (f64, f64) {
    let lhs = lambda_a.iter().map(|l| 1.0 / (l + s)).sum();
    let rhs = lambda_c
        .iter()
        .zip(v_abs2)
        .filter(|(_, v)| **v != 0.0)
        .map(|(l, v)| v / ((l + s) * (l + s)))
        .sum();
    (lhs, rhs)
}

fn stationarity_derivative(lambda_a: &[f64], lambda_c: &[f64], v_abs2: &[f64], s: f64) -> f64 {
    let a: f64 = lambda_a.iter().map(|l| -1.0 / ((l + s) * (l + s))).sum();
    let c: f64 = lambda_c
        .iter()
        .zip(v_abs2)
        .filter(|(_, v)| **v != 0.0)
        .map(|(l, v)| 2.0 * v / ((l + s) * (l + s) * (l + s)))
        .sum();
    a + c
}

struct Pole {
    at: f64,
    simple: f64,
    double: f64,
}

fn merge_poles(lambda_a: &[f64], lambda_c: &[f64], v_abs2: &[f64]) -> Vec<Pole> {
    let mut raw: Vec<(f64, f64, f64)> = lambda_a
        .iter()
        .map(|&l| (l, 1.0, 0.0))
        .chain(
            lambda_c
                .iter()
                .zip(v_abs2)
                .filter(|(_, v)| **v > 0.0)
                .map(|(&l, &v)| (l, 0.0, v)),
        )
        .collect();
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut poles: Vec<Pole> = Vec::new();
    for (at, simple, double) in raw {
        match poles.last_mut() {
            Some(p) if (at - p.at).abs() <= POLE_MERGE_TOL * at.abs().max(p.at.abs()) => {
                p.simple += simple;
                p.double += double;
            }
            _ => poles.push(Pole { at, simple, double }),
        }
    }
    poles
}

/// Numerator of the cleared stationarity equation in the scaled variable `u = s/τ`.
fn stationarity_polynomial(poles: &[Pole], tau: f64) -> Polynomial {
    let factors: Vec<(Polynomial, usize)> = poles
        .iter()
        .map(|p| (Polynomial::linear(p.at / tau), if p.double > 0.0 { 2 } else { 1 }))
        .collect();
    let mut total = Polynomial::constant(0.0);
    for (i, p) in poles.iter().enumerate() {
        let mut term = if p.double > 0.0 {
            // a (p' + u) − c/τ
            &Polynomial::linear(p.at / tau).scale(p.simple) - &Polynomial::constant(p.double / tau)
        } else {
            Polynomial::constant(p.simple)
        };
        for (j, (f, m)) in factors.iter().enumerate() {
            if j != i {
                for _ in 0..*m {
                    term = &term * f;
                }
            }
        }
        total = &total + &term;
    }
    total
}

fn polish(lambda_a: &[f64], lambda_c: &[f64], v_abs2: &[f64], start: f64) -> Option<f64> {
    let mut s = start.max(0.0);
    for _ in 0..60 {
        let (lhs, rhs) = stationarity_sides(lambda_a, lambda_c, v_abs2, s);
        let d = stationarity_derivative(lambda_a, lambda_c, v_abs2, s);
        if !d.is_finite() || d == 0.0 {
            break;
        }
        let step = (lhs - rhs) / d;
        let mut next = s - step;
        if next < 0.0 {
            next = 0.5 * s;
        }
        let done = (next - s).abs() <= 1e-15 * (1.0 + s.abs());
        s = next;
        if done {
            break;
        }
    }
    let (lhs, rhs) = stationarity_sides(lambda_a, lambda_c, v_abs2, s);
    ((lhs - rhs).abs() <= 1e-8 * (lhs.abs() + rhs.abs()) && s > 0.0).then_some(s)
}

/// Nonnegative stationary points of the concentrated likelihood, ascending.
pub fn sigma_candidates(lambda_a: &[f64], lambda_c: &[f64], v_abs2: &[f64]) -> Vec<f64> {
    let poles = merge_poles(lambda_a, lambda_c, v_abs2);
    if poles.iter().all(|p| p.double == 0.0) {
        return Vec::new();
    }
    let positive: Vec<f64> = poles.iter().map(|p| p.at).filter(|&p| p > 0.0).collect();
    let tau = if positive.is_empty() {
        1.0
    } else {
        (positive.iter().map(|p| p.ln()).sum::<f64>() / positive.len() as f64).exp()
    };
    let poly = stationarity_polynomial(&poles, tau);
    let mut out: Vec<f64> = poly
        .real_roots(ROOT_IMAG_TOL)
        .into_iter()
        .map(|u| u * tau)
        .filter(|&s| s >= 0.0)
        .filter_map(|s| polish(lambda_a, lambda_c, v_abs2, s))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()));
    out
}

/// ML estimate of `σ_J²`: the candidate in `{stationary points ≥ 0} ∪ {0}` with the
/// largest concentrated likelihood, ties going to the smaller value.
pub fn solve_sigma_poly(lambda_a: &[f64], lambda_c: &[f64], v_abs2: &[f64]) -> Result<f64> {
    if lambda_c.len() != v_abs2.len() {
        return invalid(format!(
            "lambda_c has {} entries but v_abs2 has {}",
            lambda_c.len(),
            v_abs2.len()
        ));
    }
    if lambda_a.iter().chain(lambda_c).chain(v_abs2).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return invalid("solver inputs must be finite and nonnegative");
    }
    let mut best = 0.0;
    let mut best_ll = concentrated_log_likelihood(lambda_a, lambda_c, v_abs2, 0.0);
    for s in sigma_candidates(lambda_a, lambda_c, v_abs2) {
        let ll = concentrated_log_likelihood(lambda_a, lambda_c, v_abs2, s);
        if ll > best_ll {
            best = s;
            best_ll = ll;
        }
    }
    Ok(best)
}

/// Three-branch closed form that IS-GLRT and IGMM-GLRT take when every `κ_k = 0`.
pub fn nlos_piecewise_reference(r0_norm2: f64, sigma_a2: f64, sigma_b2: f64, n: usize) -> Result<f64> {
    if !(sigma_a2 > 0.0 && sigma_a2 < sigma_b2) {
        return invalid(format!("need 0 < sigma_a2 < sigma_b2, got {sigma_a2}, {sigma_b2}"));
    }
    let nf = n as f64;
    let x = r0_norm2;
    let per = x / nf;
    Ok(if per < sigma_a2 {
        nf * (sigma_a2 / sigma_b2).ln() - x / sigma_b2 + x / sigma_a2
    } else if per < sigma_b2 {
        nf * (x / (nf * sigma_b2)).ln() - x / sigma_b2 + nf
    } else {
        0.0
    })
}

/// Index map of the permutation `Γ`: entry `p` of `m = Γ† s̲` is `s̲[gamma[p]]`.
pub fn permutation_indices(n: usize, r: usize) -> Vec<usize> {
    (0..r)
        .chain(n..n + r)
        .chain(r..n)
        .chain(n + r..2 * n)
        .collect()
}

/// `Γ` as a dense 0/1 matrix.
pub fn permutation_matrix(n: usize, r: usize) -> CMatrix {
    let gamma = permutation_indices(n, r);
    let mut g = CMatrix::zeros(2 * n, 2 * n);
    for (p, &nat) in gamma.iter().enumerate() {
        g[(nat, p)] = Complex64::new(1.0, 0.0);
    }
    g
}

#[derive(Clone, Debug)]
struct HypothesisBlock {
    sigma_a: CMatrix,
    lambda_a: Vec<f64>,
    sigma_c: CMatrix,
    lambda_c: Vec<f64>,
    u_c_adj: CMatrix,
    mean: CVector,
    perp_mean: CVector,
}

/// Everything the GLRT family needs, fixed for one (WSN, jammer) pair.
#[derive(Clone, Debug)]
pub struct JammerWorkspace {
    jammer: JammerScenario,
    n: usize,
    r: usize,
    noise_power: f64,
    sigma_e_ones: f64,
    perp_los_sum: CVector,
    u_perp_adj: CMatrix,
    blocks: [HypothesisBlock; 2],
}

impl JammerWorkspace {
    pub fn build(ctx: &RuleContext, jammer: &JammerScenario) -> Result<Self> {
        let wsn = ctx.scenario();
        let n = wsn.n_antennas();
        if jammer.n_antennas() != n {
            return invalid(format!(
                "jammer has {} antennas, WSN scenario has {n}",
                jammer.n_antennas()
            ));
        }
        let r = jammer.rank();
        if r >= n {
            return invalid(format!("jammer rank {r} must be below N = {n}"));
        }
        let u = jammer.left_basis();
        let mut u_bar = CMatrix::zeros(2 * n, 2 * n);
        u_bar.view_mut((0, 0), (n, n)).copy_from(u);
        u_bar.view_mut((n, n), (n, n)).copy_from(&u.conjugate());
        let u_perp = jammer.complement_basis();
        let u_perp_adj = u_perp.adjoint();
        let idx: Vec<usize> = permutation_indices(n, r)[2 * r..].to_vec();
        let block = |h: Hypothesis| {
            let ch = ctx.char(h);
            let sigma_a = hermitize(&(u_bar.adjoint() * &ch.aug_cov * &u_bar));
            let lambda_a: Vec<f64> = hermitian_eigenvalues(&sigma_a).into_iter().map(|l| l.max(0.0)).collect();
            let m = idx.len();
            let sigma_c = CMatrix::from_fn(m, m, |a, b| sigma_a[(idx[a], idx[b])]);
            let (vals, vecs) = hermitian_eigen(&sigma_c);
            HypothesisBlock {
                lambda_c: vals.into_iter().map(|l| l.max(0.0)).collect(),
                u_c_adj: vecs.adjoint(),
                sigma_a,
                lambda_a,
                sigma_c,
                perp_mean: &u_perp_adj * &ch.mean,
                mean: ch.mean.clone(),
            }
        };
        let blocks = [block(Hypothesis::H0), block(Hypothesis::H1)];
        let ones_los = wsn.los_matrix().column_sum();
        Ok(Self {
            jammer: jammer.clone(),
            n,
            r,
            noise_power: wsn.noise_power(),
            sigma_e_ones: wsn.noise_power() + wsn.scattered_powers().iter().sum::<f64>(),
            perp_los_sum: jammer.project(&ones_los),
            u_perp_adj,
            blocks,
        })
    }

    pub fn jammer(&self) -> &JammerScenario {
        &self.jammer
    }

    pub fn n_antennas(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    /// `Σ_A,i = Ū_J† Σ_ȳ|H_i Ū_J`
    pub fn sigma_a(&self, h: Hypothesis) -> &CMatrix {
        &self.blocks[h.index()].sigma_a
    }

    pub fn lambda_a(&self, h: Hypothesis) -> &[f64] {
        &self.blocks[h.index()].lambda_a
    }

    /// `Σ_c,i`, the trailing `2(N−r)` block of `Γ† Σ_A,i Γ`.
    pub fn sigma_c(&self, h: Hypothesis) -> &CMatrix {
        &self.blocks[h.index()].sigma_c
    }

    pub fn lambda_c(&self, h: Hypothesis) -> &[f64] {
        &self.blocks[h.index()].lambda_c
    }

    /// `t_i = Ã ρ_i`
    pub fn mean(&self, h: Hypothesis) -> &CVector {
        &self.blocks[h.index()].mean
    }

    pub fn permutation(&self) -> CMatrix {
        permutation_matrix(self.n, self.r)
    }

    /// `|v_i,ℓ|²` for the received vector under hypothesis `h`.
    pub fn v_abs2(&self, y_s: &CVector, h: Hypothesis) -> Vec<f64> {
        let b = &self.blocks[h.index()];
        let u = &self.u_perp_adj * y_s - &b.perp_mean;
        let m = u.len();
        let m_c = CVector::from_fn(2 * m, |i, _| if i < m { u[i] } else { u[i - m].conj() });
        (&b.u_c_adj * m_c).iter().map(|z| z.norm_sqr()).collect()
    }

    /// `σ̂_J,i²` and the concentrated log-likelihood it attains.
    pub fn sigma_estimate(&self, y_s: &CVector, h: Hypothesis) -> Result<(f64, f64)> {
        let b = &self.blocks[h.index()];
        let v = self.v_abs2(y_s, h);
        let s = solve_sigma_poly(&b.lambda_a, &b.lambda_c, &v)?;
        Ok((s, concentrated_log_likelihood(&b.lambda_a, &b.lambda_c, &v, s)))
    }
}

/// LRT that knows the jammer's `ζ` and `σ_J²`.
pub fn clairvoyant_lrt(
    y_s: &CVector,
    ctx: &RuleContext,
    jammer: &JammerScenario,
    zeta: &CVector,
    sigma_j2: f64,
) -> Result<f64> {
    if zeta.len() != jammer.rank() {
        return invalid(format!("zeta has length {}, expected {}", zeta.len(), jammer.rank()));
    }
    let table = ctx.llr_table()?;
    let shifted = y_s - jammer.steering() * zeta;
    Ok(table.evaluate(&shifted, sigma_j2))
}

/// Clairvoyant LRT for the jammer symbols `ψ` that generated `y_s`.
pub fn clairvoyant_lrt_for_signal(y_s: &CVector, ctx: &RuleContext, jammer: &JammerScenario, psi: &CVector) -> Result<f64> {
    clairvoyant_lrt(y_s, ctx, jammer, &jammer.los_symbols(psi), jammer.scattered_variance(psi))
}

/// IS-GLRT: concentrated likelihood ratio under perfect local decisions.
pub fn is_glrt(y_s: &CVector, ws: &JammerWorkspace) -> f64 {
    let r0 = ws.jammer.project(y_s);
    let r1 = &r0 - &ws.perp_los_sum;
    let n = ws.n as f64;
    let e0 = r0.norm_squared();
    let e1 = r1.norm_squared();
    let s0 = (e0 / n - ws.noise_power).max(0.0);
    let s1 = (e1 / n - ws.sigma_e_ones).max(0.0);
    let d0 = ws.noise_power + s0;
    let d1 = ws.sigma_e_ones + s1;
    n * (d0 / d1).ln() - e1 / d1 + e0 / d0
}

/// NLOS-GLRT: energy after projecting out the jammer subspace.
pub fn nlos_glrt(y_s: &CVector, jammer: &JammerScenario) -> f64 {
    jammer.project(y_s).norm_squared()
}

/// IGMM-GLRT statistic.
pub fn igmm_glrt(y_s: &CVector, ws: &JammerWorkspace) -> Result<f64> {
    let (_, ll1) = ws.sigma_estimate(y_s, Hypothesis::H1)?;
    let (_, ll0) = ws.sigma_estimate(y_s, Hypothesis::H0)?;
    Ok(ll1 - ll0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, full_svd, hermitian_eigenvalues, projector};
    use crate::scenario::{
        realize, DeploymentConfig, JammerEmitter, JammerPreset, SignalPolicy, WsnPreset, WsnScenario,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(preset: WsnPreset, jam: JammerPreset, k: usize, n: usize, seed: u64) -> (WsnScenario, JammerScenario) {
        let (w, j) = realize(&DeploymentConfig::preset(preset, jam, k, n, seed)).unwrap();
        (w, j.unwrap())
    }

    fn random_y(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CVector {
        CVector::from_fn(n, |_, _| c(scale * (rng.random::<f64>() - 0.5), scale * (rng.random::<f64>() - 0.5)))
    }

    #[test]
    fn solver_zero_data_returns_zero() {
        assert_eq!(solve_sigma_poly(&[1.0, 2.0], &[1.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn solver_symmetric_pair() {
        let (lam, v) = (0.7, 3.2);
        let s = solve_sigma_poly(&[lam, lam], &[lam, lam], &[v, v]).unwrap();
        assert!((s - (v - lam)).abs() < 1e-10, "{s}");
    }

    #[test]
    fn solver_stationarity_holds_at_interior_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.random_range(2..=8);
            let r = rng.random_range(1..n);
            let la: Vec<f64> = (0..2 * n).map(|_| 0.1 + 10.0 * rng.random::<f64>()).collect();
            let lc: Vec<f64> = (0..2 * (n - r)).map(|_| 0.1 + 10.0 * rng.random::<f64>()).collect();
            let v: Vec<f64> = (0..2 * (n - r)).map(|_| 50.0 * rng.random::<f64>().powi(2)).collect();
            let s = solve_sigma_poly(&la, &lc, &v).unwrap();
            if s > 0.0 {
                let (lhs, rhs) = stationarity_sides(&la, &lc, &v, s);
                assert!((lhs - rhs).abs() <= 1e-6 * lhs.abs().max(rhs.abs()));
            }
        }
    }

    #[test]
    fn piecewise_reference_examples() {
        let (a, b, n) = (1.0, 3.0, 4);
        assert_eq!(nlos_piecewise_reference(n as f64 * b, a, b, n).unwrap(), 0.0);
        let at_b = nlos_piecewise_reference(n as f64 * b * (1.0 - 1e-12), a, b, n).unwrap();
        assert!(at_b.abs() < 1e-9);
        assert!((nlos_piecewise_reference(0.0, a, b, n).unwrap() - 4.0 * (a / b).ln()).abs() < 1e-15);
        let knot = n as f64 * a;
        let left = nlos_piecewise_reference(knot * (1.0 - 1e-13), a, b, n).unwrap();
        let right = nlos_piecewise_reference(knot, a, b, n).unwrap();
        assert!((left - right).abs() < 1e-9);
        assert!(nlos_piecewise_reference(1.0, 3.0, 3.0, n).is_err());
    }

    #[test]
    fn permutation_is_orthogonal() {
        let g = permutation_matrix(5, 2);
        assert_eq!(g.adjoint() * &g, CMatrix::identity(10, 10));
        for row in 0..10 {
            assert_eq!(g.row(row).iter().filter(|z| z.re == 1.0).count(), 1);
        }
    }

    #[test]
    fn workspace_invariants() {
        let (wsn, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 6, 5, 2);
        let ctx = RuleContext::new(&wsn).unwrap();
        let ws = JammerWorkspace::build(&ctx, &jam).unwrap();
        for h in [Hypothesis::H0, Hypothesis::H1] {
            let expected = hermitian_eigenvalues(&ctx.char(h).aug_cov);
            for (a, b) in ws.lambda_a(h).iter().zip(&expected) {
                assert!((a - b).abs() <= 1e-9 * b.abs());
            }
            assert!(ws.lambda_c(h).iter().all(|&l| l >= 0.0));
            let g = ws.permutation();
            let full = g.adjoint() * ws.sigma_a(h) * &g;
            let tail = full.view((4, 4), (6, 6)).into_owned();
            assert!((tail - ws.sigma_c(h)).norm() <= 1e-12 * ws.sigma_c(h).norm());
        }
    }

    #[test]
    fn workspace_under_is_assumption() {
        let (wsn, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 6, 4, 3);
        let wsn = wsn.with_decision_quality(1.0, 0.0).unwrap();
        let ctx = RuleContext::new(&wsn).unwrap();
        let ws = JammerWorkspace::build(&ctx, &jam).unwrap();
        for h in [Hypothesis::H0, Hypothesis::H1] {
            let s2 = ctx.char(h).sigma_e2;
            let diff = ws.sigma_a(h) - CMatrix::identity(8, 8) * c(s2, 0.0);
            assert!(diff.norm() <= 1e-10 * s2);
            assert!(ws.lambda_c(h).iter().all(|l| (l - s2).abs() <= 1e-10 * s2));
        }
    }

    #[test]
    fn clairvoyant_without_jamming_is_llr() {
        let (wsn, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 5, 4, 4);
        let ctx = RuleContext::new(&wsn).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let y = random_y(&mut rng, 4, 10.0);
            let a = clairvoyant_lrt(&y, &ctx, &jam, &CVector::zeros(2), 0.0).unwrap();
            assert_eq!(a, crate::rules::llr(&y, &ctx).unwrap());
        }
    }

    #[test]
    fn clairvoyant_single_sensor_oracle() {
        let (wsn, jam) = setup(WsnPreset::Intermediate, JammerPreset::WeakLosJam, 1, 3, 6);
        let ctx = RuleContext::new(&wsn).unwrap();
        let s = &wsn.sensors()[0];
        let a = wsn.los_matrix().column(0).into_owned();
        let zeta = CVector::from_vec(vec![c(0.3, -1.1), c(2.0, 0.4)]);
        let sj = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let y = random_y(&mut rng, 3, 6.0);
            let shifted = &y - jam.steering() * &zeta;
            let v0 = wsn.noise_power() + sj;
            let v1 = v0 + s.scattered_power();
            let l0 = -3.0 * v0.ln() - shifted.norm_squared() / v0;
            let l1 = -3.0 * v1.ln() - (&shifted - &a).norm_squared() / v1;
            let num = (s.pd * l1.exp() + (1.0 - s.pd) * l0.exp()).ln();
            let den = (s.pf * l1.exp() + (1.0 - s.pf) * l0.exp()).ln();
            let got = clairvoyant_lrt(&y, &ctx, &jam, &zeta, sj).unwrap();
            assert!((got - (num - den)).abs() < 1e-9 * (1.0 + got.abs()));
        }
    }

    #[test]
    fn clairvoyant_mean_shift_cancels() {
        let (wsn, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 4, 4, 8);
        let ctx = RuleContext::new(&wsn).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zeta = CVector::from_vec(vec![c(1.0, 0.5), c(-0.2, 0.9)]);
        for _ in 0..20 {
            let y = random_y(&mut rng, 4, 8.0);
            let delta = random_y(&mut rng, 2, 3.0);
            let moved = &y + jam.steering() * &delta;
            let a = clairvoyant_lrt(&y, &ctx, &jam, &zeta, 0.4).unwrap();
            let b = clairvoyant_lrt(&moved, &ctx, &jam, &(&zeta + &delta), 0.4).unwrap();
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn is_glrt_clamp_and_range_examples() {
        let (wsn, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 4, 4, 10);
        let ctx = RuleContext::new(&wsn).unwrap();
        let ws = JammerWorkspace::build(&ctx, &jam).unwrap();
        let y = jam.steering() * CVector::from_vec(vec![c(2.0, 1.0), c(-1.0, 3.0)]);
        let r1 = -jam.project(&wsn.los_matrix().column_sum());
        let se1 = wsn.noise_power() + wsn.scattered_powers().iter().sum::<f64>();
        let s1 = (r1.norm_squared() / 4.0 - se1).max(0.0);
        let expected = 4.0 * (wsn.noise_power() / (se1 + s1)).ln() - r1.norm_squared() / (se1 + s1);
        assert!((is_glrt(&y, &ws) - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        assert!(nlos_glrt(&y, &jam) < 1e-18 * y.norm_squared().max(1.0));
    }

    #[test]
    fn nlos_glrt_coordinate_projector_and_scratch_projection() {
        let mut a = CMatrix::zeros(4, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(1.0, 0.0);
        let e = JammerEmitter { position: None, beta: 1.0, kappa: 1.0, phi: None };
        let jam = JammerScenario::from_steering(a, vec![e.clone(), e], SignalPolicy::RandomPhase).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let y = random_y(&mut rng, 4, 4.0);
            let expected = y[2].norm_sqr() + y[3].norm_sqr();
            assert!((nlos_glrt(&y, &jam) - expected).abs() < 1e-12 * (1.0 + expected));
        }
        let (_, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 3, 6, 12);
        let (u, _, _) = full_svd(jam.steering()).unwrap();
        let p = projector(&u.columns(2, 4).into_owned());
        for _ in 0..50 {
            let y = random_y(&mut rng, 6, 4.0);
            let scratch = (&p * &y).norm_squared();
            assert!((nlos_glrt(&y, &jam) - scratch).abs() <= 1e-10 * (1.0 + scratch));
        }
    }

    #[test]
    fn igmm_glrt_degenerate_sensors() {
        let (wsn, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 4, 4, 13);
        let wsn = wsn.with_decision_quality(0.3, 0.3).unwrap();
        let ctx = RuleContext::new(&wsn).unwrap();
        let ws = JammerWorkspace::build(&ctx, &jam).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            assert_eq!(igmm_glrt(&random_y(&mut rng, 4, 6.0), &ws).unwrap(), 0.0);
        }
    }

    #[test]
    fn glrt_subspace_invariance() {
        let (wsn, jam) = setup(WsnPreset::Los, JammerPreset::LosJam, 5, 5, 15);
        let ctx = RuleContext::new(&wsn).unwrap();
        let ws = JammerWorkspace::build(&ctx, &jam).unwrap();
        let is_ctx = RuleContext::new(&wsn.with_decision_quality(1.0, 0.0).unwrap()).unwrap();
        let is_ws = JammerWorkspace::build(&is_ctx, &jam).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..100 {
            let y = random_y(&mut rng, 5, 8.0);
            let shift = jam.steering() * random_y(&mut rng, 2, 20.0);
            let moved = &y + &shift;
            assert!((is_glrt(&y, &ws) - is_glrt(&moved, &ws)).abs() <= 1e-9);
            assert!((nlos_glrt(&y, &jam) - nlos_glrt(&moved, &jam)).abs() <= 1e-9);
            let a = igmm_glrt(&y, &is_ws).unwrap();
            let b = igmm_glrt(&moved, &is_ws).unwrap();
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn nlos_monotone_in_residual_energy() {
        let (wsn, jam) = setup(WsnPreset::Nlos, JammerPreset::LosJam, 6, 4, 17);
        let wsn = wsn.with_kappa(0.0).unwrap();
        let ctx = RuleContext::new(&wsn).unwrap();
        let ws = JammerWorkspace::build(&ctx, &jam).unwrap();
        let dir = jam.project(&CVector::from_fn(4, |i, _| c(1.0 + i as f64, 0.5)));
        let dir = dir.unscale(dir.norm());
        let sb: f64 = wsn.betas().iter().sum::<f64>() + wsn.noise_power();
        let (mut prev_is, mut prev_igmm) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for i in 0..1000 {
            let e = 4.0 * sb * i as f64 / 999.0;
            let y = &dir * c(e.sqrt(), 0.0);
            let a = is_glrt(&y, &ws);
            let b = igmm_glrt(&y, &ws).unwrap();
            assert!(a >= prev_is - 1e-9 && b >= prev_igmm - 1e-9);
            prev_is = a;
            prev_igmm = b;
        }
    }
}
