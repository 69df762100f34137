//! Quadrature variances, photon statistics, g2(0) and the EPR witness.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{Mode, QuantumState};

/// Below this mean occupation g2 is reported as undefined.
pub const MIN_OCCUPATION: f64 = 1e-12;

/// Normally ordered moments of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub a: Complex64,
    pub a2: Complex64,
    pub n: f64,
    pub n2: f64,
}

impl Moments {
    pub fn of(state: &QuantumState, mode: Mode) -> Self {
        let w = state.norm() * state.norm();
        let psi = state.amplitudes();
        let la = state.lower(mode);
        let shifted = QuantumState::from_vector(state.cutoffs().0, state.cutoffs().1, la.clone());
        let laa = shifted.lower(mode);
        let n = la.norm_squared() / w;
        Self {
            a: psi.dotc(&la) / w,
            a2: psi.dotc(&laa) / w,
            n,
            // <n^2> = <a+^2 a^2> + <n>
            n2: laa.norm_squared() / w + n,
        }
    }

    /// `<a^2> - <a>^2`
    fn m(&self) -> Complex64 {
        self.a2 - self.a * self.a
    }

    /// Symmetrized number fluctuation `<a a+ + a+ a> - 2|<a>|^2`, using `[a, a+] = 1`.
    fn sym(&self) -> f64 {
        2.0 * self.n + 1.0 - 2.0 * self.a.norm_sqr()
    }

    pub fn variance(&self, theta: f64) -> f64 {
        0.25 * (self.sym() + 2.0 * (self.m() * Complex64::from_polar(1.0, -2.0 * theta)).re)
    }

    pub fn var_min(&self) -> f64 {
        0.25 * (self.sym() - 2.0 * self.m().norm())
    }

    pub fn var_max(&self) -> f64 {
        0.25 * (self.sym() + 2.0 * self.m().norm())
    }

    /// Angle in `[0, pi)` at which the variance is smallest.
    pub fn theta_min(&self) -> f64 {
        ((self.m().arg() + PI) / 2.0).rem_euclid(PI)
    }

    pub fn n_var(&self) -> f64 {
        (self.n2 - self.n * self.n).max(0.0)
    }
}

/// Variance of `X_theta = (a e^{-i theta} + a+ e^{i theta}) / 2`; the vacuum gives 0.25.
pub fn quadrature_variance(state: &QuantumState, mode: Mode, theta: f64) -> f64 {
    Moments::of(state, mode).variance(theta)
}

/// Smallest quadrature variance over the angle, and the angle.
pub fn min_quadrature_variance(state: &QuantumState, mode: Mode) -> (f64, f64) {
    let m = Moments::of(state, mode);
    (m.var_min(), m.theta_min())
}

/// `(<n>, <n^2> - <n>^2)`
pub fn photon_stats(state: &QuantumState, mode: Mode) -> (f64, f64) {
    let m = Moments::of(state, mode);
    (m.n, m.n_var())
}

/// `(1 + (V - n)/n, 1 + (V - n)/n^2)`. The first divides by the mean, the
/// second is the usual Mandel-Q form.
pub fn g2_zero(state: &QuantumState, mode: Mode) -> Result<(f64, f64)> {
    let (n, v) = photon_stats(state, mode);
    g2_from_stats(n, v)
}

pub fn g2_from_stats(n: f64, v: f64) -> Result<(f64, f64)> {
    if !(n >= MIN_OCCUPATION) {
        return Err(Error::UndefinedCorrelation { n_mean: n });
    }
    Ok((1.0 + (v - n) / n, 1.0 + (v - n) / (n * n)))
}

/// `Var(X1 - X2) + Var(Y1 + Y2)` minimized over the relative phase of the
/// two modes; vacuum gives 1 and values below 1 witness two-mode squeezing.
pub fn epr_variance(state: &QuantumState) -> Result<f64> {
    if !state.is_two_mode() {
        return Err(Error::domain("state", "EPR variance needs a two-mode state"));
    }
    let (c1, c2) = state.cutoffs();
    let w = state.norm() * state.norm();
    let m1 = Moments::of(state, Mode::One);
    let m2 = Moments::of(state, Mode::Two);
    let l2 = state.lower(Mode::Two);
    let l12 = QuantumState::from_vector(c1, c2, l2).lower(Mode::One);
    let corr = state.amplitudes().dotc(&l12) / w - m1.a * m2.a;
    let sum = 0.5 * (m1.sym() + m2.sym());
    Ok(sum - 2.0 * corr.norm())
}

/// Everything measured on one mode of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableReport {
    pub mode: Mode,
    pub var_x: f64,
    pub var_y: f64,
    pub var_min: f64,
    pub theta_min: f64,
    pub n_mean: f64,
    pub n_var: f64,
    /// `None` when the mode is (numerically) empty.
    pub g2: Option<f64>,
    pub g2_standard: Option<f64>,
    pub epr: Option<f64>,
}

impl ObservableReport {
    pub fn measure(state: &QuantumState, mode: Mode) -> Self {
        let m = Moments::of(state, mode);
        let (n_mean, n_var) = (m.n, m.n_var());
        let g2 = g2_from_stats(n_mean, n_var).ok();
        Self {
            mode,
            var_x: m.variance(0.0),
            var_y: m.variance(PI / 2.0),
            var_min: m.var_min(),
            theta_min: m.theta_min(),
            n_mean,
            n_var,
            g2: g2.map(|g| g.0),
            g2_standard: g2.map(|g| g.1),
            epr: epr_variance(state).ok(),
        }
    }

    pub fn satisfies_uncertainty(&self) -> bool {
        self.var_x * self.var_y >= 1.0 / 16.0 - 1e-9
    }
}
