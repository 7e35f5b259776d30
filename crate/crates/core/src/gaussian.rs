//! Zero-mean trivariate normal `(X1, X2, X3)`.
//!
//! The conditional kernels `P^{X1|X3}` and `P^{X2|X3}` are `P^{X3}`-independent
//! exactly when `ρ13 · ρ23 = 0`: the law of `P^{X2|X3}` given that `P^{X1|X3}`
//! took the value `x1` is normal with mean `σ2 ρ23 ρ13 x1 / σ1` and variance
//! `σ2² (1 − ρ23² ρ13²)`, which equals `P^{X2}` only in that case.
//!
//! This is the only floating-point module; [`discretized_check`] bridges back
//! to the exact finite machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_prob::{FiniteProbSpace, RandomVariable};
use crate::kernel::{diagonal_product, image};
use crate::rational::Rational;
use crate::theorems::condition_on;

/// Tolerance on `|ρ13 ρ23|` used when none is given.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrivariateCovariance {
    sigma: [[f64; 3]; 3],
}

impl TrivariateCovariance {
    pub fn new(sigma: [[f64; 3]; 3]) -> Result<Self> {
        for row in &sigma {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NotPositiveDefinite("non-finite entry".into()));
            }
        }
        for i in 0..3 {
            for j in 0..i {
                let (a, b) = (sigma[i][j], sigma[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::NotPositiveDefinite(format!(
                        "not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let s = &sigma;
        let minors = [
            s[0][0],
            s[0][0] * s[1][1] - s[0][1] * s[1][0],
            det3(s),
        ];
        if let Some(k) = minors.iter().position(|&m| m <= 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "leading principal minor {} is {}",
                k + 1,
                minors[k]
            )));
        }
        Ok(TrivariateCovariance { sigma })
    }

    /// From the upper triangle `s11, s12, s13, s22, s23, s33`.
    pub fn from_upper(u: [f64; 6]) -> Result<Self> {
        let [s11, s12, s13, s22, s23, s33] = u;
        Self::new([[s11, s12, s13], [s12, s22, s23], [s13, s23, s33]])
    }

    /// Unit variances with the given correlations `ρ12, ρ13, ρ23`.
    pub fn from_correlations(r12: f64, r13: f64, r23: f64) -> Result<Self> {
        Self::from_upper([1.0, r12, r13, 1.0, r23, 1.0])
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.sigma[i][j]
    }

    /// Standard deviation `σ_i` (0-based index).
    pub fn sd(&self, i: usize) -> f64 {
        self.sigma[i][i].sqrt()
    }

    /// Correlation `ρ_ij` (0-based indices).
    pub fn corr(&self, i: usize, j: usize) -> f64 {
        self.sigma[i][j] / (self.sd(i) * self.sd(j))
    }

    /// Covariance of `(c1 X1, c2 X2, c3 X3)`.
    pub fn rescaled(&self, c: [f64; 3]) -> Result<Self> {
        let mut s = self.sigma;
        for (i, row) in s.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v *= c[i] * c[j];
            }
        }
        Self::new(s)
    }
}

fn det3(s: &[[f64; 3]; 3]) -> f64 {
    s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1])
        - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0])
        + s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0])
}

/// `N(mean_slope · x1, variance)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalLaw {
    pub mean_slope: f64,
    pub variance: f64,
}

/// Law of `P^{X2|X3}` given `P^{X1|X3} = x1` under `P^{X3}`.
pub fn conditional_kernel_law(cov: &TrivariateCovariance) -> NormalLaw {
    let (s1, s2) = (cov.sd(0), cov.sd(1));
    let (r13, r23) = (cov.corr(0, 2), cov.corr(1, 2));
    NormalLaw {
        mean_slope: s2 * r23 * r13 / s1,
        variance: s2 * s2 * (1.0 - r23 * r23 * r13 * r13),
    }
}

/// `|ρ13 ρ23| ≤ tol`.
pub fn gaussian_kernels_independent(cov: &TrivariateCovariance, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {tol}")));
    }
    Ok((cov.corr(0, 2) * cov.corr(1, 2)).abs() <= tol)
}

/// Unnormalized normal density `exp(-(x-μ)²/2v) / √v`.
fn normal_density(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * var)).exp() / var.sqrt()
}

/// Discretizes the density on the midpoints of a uniform `n³` grid over
/// `[-extent, extent]³`, converts the masses exactly to rationals and runs the
/// exact kernel-independence machinery on the resulting finite space.
///
/// The density is evaluated through the factorization
/// `f(x3) f(x1 | x3) f(x2 | x1, x3)` and the three factors are multiplied in
/// exact arithmetic, so a covariance under which `X2` is independent of
/// `(X1, X3)` yields an exactly factorized grid.
///
/// Returns the largest relative cell discrepancy
/// `|P^{M1×M2}(a, b) − P^{M1}(a) P^{M2}(b)| / (P^{M1}(a) P^{M2}(b))`
/// over cells with positive product mass.
pub fn discretized_check(cov: &TrivariateCovariance, grid_points: usize, extent: f64) -> Result<f64> {
    if grid_points < 3 || grid_points.is_multiple_of(2) {
        return Err(Error::DegenerateGrid(format!(
            "grid_points must be odd and at least 3, got {grid_points}"
        )));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::DegenerateGrid(format!("extent must be positive, got {extent}")));
    }
    let n = grid_points;
    let h = 2.0 * extent / n as f64;
    let xs: Vec<f64> = (0..n).map(|m| -extent + h * (m as f64 + 0.5)).collect();

    let s = |i: usize, j: usize| cov.entry(i, j);
    // X1 | X3
    let slope13 = s(0, 2) / s(2, 2);
    let var1 = s(0, 0) - s(0, 2) * s(0, 2) / s(2, 2);
    // X2 | (X1, X3): regression coefficients from the 2x2 block of (X1, X3)
    let det13 = s(0, 0) * s(2, 2) - s(0, 2) * s(0, 2);
    let b1 = (s(1, 0) * s(2, 2) - s(1, 2) * s(0, 2)) / det13;
    let b3 = (s(1, 2) * s(0, 0) - s(1, 0) * s(0, 2)) / det13;
    let var2 = s(1, 1) - (b1 * s(1, 0) + b3 * s(1, 2));
    if !(var1 > 0.0 && var2 > 0.0) {
        return Err(Error::NotPositiveDefinite("degenerate conditional variance".into()));
    }

    let exact = |v: f64| Rational::from_f64(v).expect("finite density");
    let f3: Vec<Rational> = xs.iter().map(|&x3| exact(normal_density(x3, 0.0, s(2, 2)))).collect();

    let mut weights = Vec::with_capacity(n * n * n);
    let mut states = Vec::with_capacity(n * n * n);
    let (mut a1, mut a2, mut a3) = (
        Vec::with_capacity(n * n * n),
        Vec::with_capacity(n * n * n),
        Vec::with_capacity(n * n * n),
    );
    for (i, &x1) in xs.iter().enumerate() {
        for (j, &x2) in xs.iter().enumerate() {
            for (k, &x3) in xs.iter().enumerate() {
                let f1 = exact(normal_density(x1, slope13 * x3, var1));
                let f2 = exact(normal_density(x2, b1 * x1 + b3 * x3, var2));
                weights.push(&f3[k] * &f1 * f2);
                states.push(format!("{i},{j},{k}"));
                a1.push(i);
                a2.push(j);
                a3.push(k);
            }
        }
    }
    let space = FiniteProbSpace::from_unnormalized(states, weights)
        .map_err(|e| Error::DegenerateGrid(e.to_string()))?;
    let axis: Vec<String> = (0..n).map(|m| m.to_string()).collect();
    let x1 = RandomVariable::new("X1", axis.clone(), a1)?;
    let x2 = RandomVariable::new("X2", axis.clone(), a2)?;
    let x3 = RandomVariable::new("X3", axis, a3)?;

    let cond = condition_on(&space, &[&x1, &x2], &x3)?;
    let (m1, m2) = (&cond.kernels[0], &cond.kernels[1]);
    let joint = image(&cond.space, &diagonal_product(m1, m2)?)?;
    let p1 = image(&cond.space, m1)?;
    let p2 = image(&cond.space, m2)?;
    let mut worst = 0.0f64;
    for (a, pa) in p1.masses().iter().enumerate() {
        for (b, pb) in p2.masses().iter().enumerate() {
            let prod = pa * pb;
            if prod.is_zero() {
                continue;
            }
            let rel = ((&joint.masses()[a * n + b] - &prod) / &prod).abs();
            worst = worst.max(rel.to_f64());
        }
    }
    Ok(worst)
}
