//! Real polynomials and real-root extraction through companion-matrix eigenvalues.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

/// Real polynomial with coefficients stored in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `s + a`
    pub fn linear(a: f64) -> Self {
        Self::new(vec![a, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Real roots, found as eigenvalues of the balanced companion matrix.
    ///
    /// An eigenvalue `z` is accepted as real when `|Im z| ≤ imag_tol·(1 + |z|)`.
    /// Exact zero roots are factored out and reported once.
    pub fn real_roots(&self, imag_tol: f64) -> Vec<f64> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut coeffs: Vec<f64> = self.coeffs.clone();
        let mut roots = Vec::new();
        let zeros = coeffs.iter().take_while(|&&c| c == 0.0).count();
        if zeros > 0 {
            roots.push(0.0);
            coeffs.drain(..zeros);
        }
        let degree = coeffs.len().saturating_sub(1);
        match degree {
            0 => {}
            1 => roots.push(-coeffs[0] / coeffs[1]),
            _ => {
                let lead = coeffs[degree];
                let mut companion = DMatrix::<f64>::zeros(degree, degree);
                for i in 1..degree {
                    companion[(i, i - 1)] = 1.0;
                }
                for i in 0..degree {
                    companion[(i, degree - 1)] = -coeffs[i] / lead;
                }
                balance(&mut companion);
                if let Some(schur) = companion.try_schur(f64::EPSILON, 10_000) {
                    for z in schur.complex_eigenvalues().iter() {
                        if z.re.is_finite() && z.im.abs() <= imag_tol * (1.0 + z.re.abs()) {
                            roots.push(z.re);
                        }
                    }
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

/// Parlett–Reinsch diagonal balancing (radix 2) applied in place.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let sqrdx = radix * radix;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut r = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if col == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / radix;
            let mut f = 1.0;
            let s = col + r;
            while col < g {
                f *= radix;
                col *= sqrdx;
            }
            g = r * radix;
            while col > g {
                f /= radix;
                col /= sqrdx;
            }
            if (col + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= g;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}
