//! Closed-form waves for `rho = 1`, `beta(psi) = lambda psi`.
//!
//! The interior equation becomes `lap psi = -lambda psi`, solved by
//! `psi = f(y) + eps cos(x) g(y)` with `f'' = -lambda f`, `g'' = (1 - lambda) g`.
//! These fields satisfy the interior equation and `psi = 0` on their own
//! level-set surface, but not the dynamic surface condition.

use serde::{Deserialize, Serialize};

use crate::axis::AxisData;
use crate::error::{Error, Result};
use crate::profiles::{BernoulliFunction, DensityProfile, Polynomial};
use crate::series::{EvenSeries, Grid, NodalFunction};

/// Shape of the `cos x` mode below the surface.
///
/// `Cosh` uses `g = cosh(k (y + d))`; its `x`-dependent part does not vanish
/// on the bed, so the bed is not a streamline. `Sinh` uses
/// `g = sinh(k (y + d))`, which keeps `psi` constant on `y = -d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BedVariant {
    #[default]
    Cosh,
    Sinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedWave {
    pub lambda: f64,
    pub epsilon: f64,
    pub d: f64,
    pub c: f64,
    pub variant: BedVariant,
    /// Crest height: root of `f + eps g` near the still-water level.
    pub eta0: f64,
    kf: f64,
    kg: f64,
}

impl ManufacturedWave {
    pub fn new(lambda: f64, epsilon: f64, d: f64, variant: BedVariant) -> Result<Self> {
        if !(lambda < 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be negative")));
        }
        if !(d > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("need d > 0 and finite epsilon, got d = {d}")));
        }
        let mut w = Self {
            lambda,
            epsilon,
            d,
            c: 0.0,
            variant,
            eta0: 0.0,
            kf: (-lambda).sqrt(),
            kg: (1.0 - lambda).sqrt(),
        };
        w.eta0 = w.crest_height()?;
        w.check_amplitude()?;
        Ok(w)
    }

    pub fn rho(&self) -> DensityProfile {
        DensityProfile::homogeneous(1.0)
    }

    pub fn beta(&self) -> BernoulliFunction {
        BernoulliFunction::new(Polynomial::new(vec![0.0, self.lambda]).expect("finite"))
    }

    pub fn f(&self, y: f64) -> f64 {
        -(self.kf * y).sinh()
    }

    pub fn df(&self, y: f64) -> f64 {
        -self.kf * (self.kf * y).cosh()
    }

    pub fn g(&self, y: f64) -> f64 {
        let s = self.kg * (y + self.d);
        match self.variant {
            BedVariant::Cosh => s.cosh(),
            BedVariant::Sinh => s.sinh(),
        }
    }

    pub fn dg(&self, y: f64) -> f64 {
        let s = self.kg * (y + self.d);
        self.kg
            * match self.variant {
                BedVariant::Cosh => s.sinh(),
                BedVariant::Sinh => s.cosh(),
            }
    }

    pub fn psi(&self, x: f64, y: f64) -> f64 {
        self.f(y) + self.epsilon * x.cos() * self.g(y)
    }

    pub fn psi_x(&self, x: f64, y: f64) -> f64 {
        -self.epsilon * x.sin() * self.g(y)
    }

    pub fn psi_y(&self, x: f64, y: f64) -> f64 {
        self.df(y) + self.epsilon * x.cos() * self.dg(y)
    }

    /// `(u, v)` with `rho = 1`.
    pub fn velocity(&self, x: f64, y: f64) -> (f64, f64) {
        (self.c + self.psi_y(x, y), -self.psi_x(x, y))
    }

    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        // f'' = -lambda f, g'' = (1 - lambda) g, (cos x)'' = -cos x
        -self.lambda * self.f(y) + self.epsilon * x.cos() * (1.0 - self.lambda - 1.0) * self.g(y)
    }

    /// Pseudo mass flux `-psi(0, -d)`.
    pub fn p0(&self) -> f64 {
        -self.psi(0.0, -self.d)
    }

    /// Surface height at `x`: the root of `psi(x, .)` on `[-d, eta0]`.
    pub fn surface(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(self.eta0);
        }
        let top = self.eta0 + 1.0;
        bisect(|y| self.psi(x, y), -self.d, top).ok_or(Error::SurfaceEscape { x })
    }

    fn crest_height(&self) -> Result<f64> {
        let h = |y: f64| self.psi(0.0, y);
        let mut hi = 0.0_f64.max(self.d.min(1.0));
        while h(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e3 {
                return Err(Error::AmplitudeTooLarge { y: hi, psi_y: f64::NAN });
            }
        }
        bisect(h, -self.d, hi).ok_or(Error::AmplitudeTooLarge { y: -self.d, psi_y: f64::NAN })
    }

    /// `psi_y < 0` for every `x` on `[-d, eta0]`.
    fn check_amplitude(&self) -> Result<()> {
        let n = 1000;
        for i in 0..n {
            let y = -self.d + (self.eta0 + self.d) * i as f64 / (n - 1) as f64;
            let worst = self.df(y) + (self.epsilon * self.dg(y)).abs();
            if !(worst < 0.0) {
                return Err(Error::AmplitudeTooLarge { y, psi_y: worst });
            }
        }
        Ok(())
    }

    /// Axis data at the `m` Lobatto nodes of `[-d, eta0]`.
    pub fn axis_data(&self, m: usize, g: f64, p_atm: f64) -> Result<AxisData> {
        let grid = Grid::new(m, -self.d, self.eta0)?;
        let u = grid.nodes().iter().map(|&y| self.velocity(0.0, y).0).collect();
        AxisData::on_nodes(u, self.eta0, self.c, self.d, g, p_atm)
    }

    /// Exact Taylor coefficients `a_0 = f + eps g`,
    /// `a_{2n} = (-1)^n eps g / (2n)!` on an `m`-node grid.
    pub fn taylor_series(&self, order: usize, m: usize) -> Result<EvenSeries> {
        let grid = Grid::new(m, -self.d, self.eta0)?;
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(NodalFunction::from_fn(grid.clone(), |y| self.f(y) + self.epsilon * self.g(y))?);
        let mut fact = 1.0;
        for n in 1..=order {
            fact *= ((2 * n - 1) * (2 * n)) as f64;
            let s = if n % 2 == 0 { 1.0 } else { -1.0 } * self.epsilon / fact;
            coeffs.push(NodalFunction::from_fn(grid.clone(), |y| s * self.g(y))?);
        }
        EvenSeries::new(coeffs)
    }
}

/// Bisection for a root of a function that is positive at `lo` and
/// non-positive at `hi`; runs to machine resolution.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi <= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(if f(hi) == 0.0 { hi } else { 0.5 * (lo + hi) })
}
