//! Streamline density and Bernoulli functions as polynomials in the
//! stream-function value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense scan resolution for profile validation.
pub const VALIDATION_SCAN_POINTS: usize = 1000;

/// Polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("polynomial coefficient {i}")));
        }
        let mut coeffs = coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c]).expect("finite constant")
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree after trimming; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `k`-th derivative at `p`.
    pub fn eval(&self, k: usize, p: f64) -> f64 {
        if k >= self.coeffs.len() {
            return 0.0;
        }
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().skip(k).rev() {
            acc = acc * p + c * falling_factorial(j, k);
        }
        acc
    }

    pub fn value(&self, p: f64) -> f64 {
        self.eval(0, p)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| c * j as f64)
            .collect();
        Polynomial::new(coeffs).expect("finite")
    }

    /// Antiderivative vanishing at the origin.
    pub fn antiderivative(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(j, &c)| c / (j + 1) as f64));
        Polynomial::new(coeffs).expect("finite")
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out).expect("finite")
    }
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Polynomial::new(v)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Vec<f64> {
        p.coeffs
    }
}

fn falling_factorial(j: usize, k: usize) -> f64 {
    ((j - k + 1)..=j).fold(1.0, |acc, i| acc * i as f64)
}

/// Streamline density `rho(p)`, `p = -psi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub rho: Polynomial,
}

impl DensityProfile {
    pub fn new(rho: Polynomial) -> Self {
        Self { rho }
    }

    pub fn homogeneous(value: f64) -> Self {
        Self { rho: Polynomial::constant(value) }
    }

    pub fn at(&self, p: f64) -> f64 {
        self.rho.value(p)
    }

    pub fn derivative_at(&self, p: f64) -> f64 {
        self.rho.eval(1, p)
    }

    /// `rho'` as a polynomial, the object composed with `-psi` in the
    /// coefficient recursion.
    pub fn derivative(&self) -> Polynomial {
        self.rho.derivative()
    }
}

/// Bernoulli function `beta(psi)`, with `dE/dpsi = -beta(psi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliFunction {
    pub beta: Polynomial,
}

impl BernoulliFunction {
    pub fn new(beta: Polynomial) -> Self {
        Self { beta }
    }

    pub fn zero() -> Self {
        Self { beta: Polynomial::zero() }
    }

    pub fn at(&self, psi: f64) -> f64 {
        self.beta.value(psi)
    }

    /// `B(psi) = int_0^psi beta`.
    pub fn primitive(&self) -> Polynomial {
        self.beta.antiderivative()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub pass: bool,
    /// Worst offending `p`, or the scan point closest to failing.
    pub witness_p: f64,
    pub witness_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub checks: Vec<InvariantCheck>,
    pub min_rho: f64,
    pub min_rho_at: f64,
}

impl ProfileReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Scans `[p0, 0]` for positivity and monotonicity of the density and
/// finiteness of the Bernoulli function.
pub fn validate_profiles(rho: &DensityProfile, beta: &BernoulliFunction, p0: f64) -> ProfileReport {
    let n = VALIDATION_SCAN_POINTS;
    let ps: Vec<f64> = (0..n).map(|i| p0 * (1.0 - i as f64 / (n - 1) as f64)).collect();

    let (mut min_rho, mut min_rho_at) = (f64::INFINITY, 0.0);
    let (mut max_drho, mut max_drho_at) = (f64::NEG_INFINITY, 0.0);
    let mut beta_ok = (true, 0.0, 0.0);
    for &p in &ps {
        let r = rho.at(p);
        if r < min_rho || r.is_nan() {
            min_rho = r;
            min_rho_at = p;
        }
        let dr = rho.derivative_at(p);
        if dr > max_drho || dr.is_nan() {
            max_drho = dr;
            max_drho_at = p;
        }
        // beta is evaluated at psi = -p
        let b = beta.at(-p);
        if !b.is_finite() && beta_ok.0 {
            beta_ok = (false, p, b);
        }
    }
    let rho_finite = rho.rho.coeffs().iter().all(|c| c.is_finite());
    let checks = vec![
        InvariantCheck {
            name: "density positive".into(),
            pass: rho_finite && min_rho > 0.0,
            witness_p: min_rho_at,
            witness_value: min_rho,
        },
        InvariantCheck {
            name: "density nonincreasing".into(),
            pass: rho_finite && max_drho <= 0.0,
            witness_p: max_drho_at,
            witness_value: max_drho,
        },
        InvariantCheck {
            name: "bernoulli finite".into(),
            pass: beta_ok.0,
            witness_p: beta_ok.1,
            witness_value: beta_ok.2,
        },
    ];
    ProfileReport { checks, min_rho, min_rho_at }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly(&[1.0, -0.1]).eval(1, 7.3), -0.1);
        assert_eq!(poly(&[0.0, 0.0, 1.0]).eval(0, 3.0), 9.0);
        // p^3 - 2p, second derivative 6p at 1.5
        assert_abs_diff_eq!(poly(&[0.0, -2.0, 0.0, 1.0]).eval(2, 1.5), 9.0, epsilon = 1e-14);
        assert_eq!(poly(&[0.0, -2.0, 0.0, 1.0]).eval(4, 1.5), 0.0);
    }

    #[test]
    fn antiderivative_examples() {
        assert!(Polynomial::zero().antiderivative().is_zero());
        assert_eq!(poly(&[1.0]).antiderivative().coeffs(), &[0.0, 1.0]);
        assert_eq!(poly(&[0.0, -4.0]).antiderivative().coeffs(), &[0.0, 0.0, -2.0]);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = poly(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(Polynomial::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn homogeneous_still_water_passes() {
        let r = validate_profiles(&DensityProfile::homogeneous(1.0), &BernoulliFunction::zero(), -1.0);
        assert!(r.all_pass());
    }

    #[test]
    fn negative_density_flagged_near_bed() {
        let rho = DensityProfile::new(poly(&[1.0, 1.0]));
        let r = validate_profiles(&rho, &BernoulliFunction::zero(), -2.0);
        let fail: Vec<_> = r.failures().collect();
        assert_eq!(fail.len(), 2, "1 + p is increasing and negative below -1");
        assert_eq!(fail[0].name, "density positive");
        assert_abs_diff_eq!(fail[0].witness_p, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_stratification_passes() {
        // (1 - p/10)^2
        let rho = DensityProfile::new(poly(&[1.0, -0.2, 0.01]));
        let r = validate_profiles(&rho, &BernoulliFunction::zero(), -1.0);
        assert!(r.all_pass());
        assert_abs_diff_eq!(r.min_rho, 1.0, epsilon = 1e-14);
        assert_eq!(r.min_rho_at, 0.0);
    }

    proptest! {
        #[test]
        fn antiderivative_inverts_derivative(
            c in proptest::collection::vec(-5.0f64..5.0, 1..6),
            p in -3.0f64..3.0,
        ) {
            let f = Polynomial::new(c).unwrap();
            let g = f.antiderivative();
            let lhs = g.eval(1, p);
            let rhs = f.eval(0, p);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            prop_assert_eq!(g.value(0.0), 0.0);
        }
    }
}
