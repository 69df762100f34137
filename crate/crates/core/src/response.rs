//! Classical transfer function of the simplified amplifier, its step
//! response and settling time.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::circuit::{DerivedCoefficients, OscillatorParams, SourceParams, TransistorParams};
use crate::error::{Error, Result};

/// Default channel-length-modulation resistance (ohm).
pub const DEFAULT_R0: f64 = 500.0;
/// Default settling band, as a fraction of the peak deviation.
pub const DEFAULT_BAND: f64 = 0.02;

/// Rational transfer function with real coefficients in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    pub l_p2: f64,
    pub c_p1: f64,
    pub c_p2: f64,
    pub a_v0: f64,
}

impl TransferFunction {
    /// Plain rational function without circuit elements attached.
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        if num.iter().chain(den.iter()).any(|x| !x.is_finite()) {
            return Err(Error::domain("transfer function", "coefficients must be finite"));
        }
        let tf = Self { num, den, l_p2: f64::NAN, c_p1: f64::NAN, c_p2: f64::NAN, a_v0: f64::NAN };
        if tf.den_degree().is_none() {
            return Err(Error::domain("den", "denominator is identically zero"));
        }
        if let Some(dn) = tf.num_degree() {
            if dn >= tf.den_degree().unwrap_or(0) {
                return Err(Error::domain("num", "transfer function must be strictly proper"));
            }
        }
        Ok(tf)
    }

    fn num_degree(&self) -> Option<usize> {
        degree(&self.num)
    }

    fn den_degree(&self) -> Option<usize> {
        degree(&self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num_degree().is_none()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        horner(&self.num, s) / horner(&self.den, s)
    }

    pub fn dc_gain(&self) -> f64 {
        self.num.first().copied().unwrap_or(0.0) / self.den[0]
    }

    /// Coefficients of `H(w sigma)`, with the denominator made monic.
    fn rescaled(&self, w: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.den_degree().unwrap_or(0);
        let lead = self.den[n] * w.powi(n as i32);
        let scale =
            |c: &[f64]| -> Vec<f64> { c.iter().enumerate().map(|(k, x)| x * w.powi(k as i32) / lead).collect() };
        let mut den = scale(&self.den[..=n]);
        den[n] = 1.0;
        (scale(&self.num), den)
    }

    /// Frequency scale that brings the roots near unit magnitude.
    fn natural_scale(&self) -> f64 {
        let n = self.den_degree().unwrap_or(0);
        let a0 = self.den[0].abs();
        if n == 0 || a0 == 0.0 {
            return 1.0;
        }
        (a0 / self.den[n].abs()).powf(1.0 / n as f64)
    }

    /// Roots of the denominator (rad/s).
    pub fn poles(&self) -> Vec<Complex64> {
        let w = self.natural_scale();
        let (_, den) = self.rescaled(w);
        polynomial_roots(&den).into_iter().map(|p| p * w).collect()
    }

    /// All poles strictly in the left half-plane.
    pub fn is_stable(&self) -> bool {
        let poles = self.poles();
        marginal_or_unstable(&poles).is_empty()
    }

    /// Poles, or an error if any lies in the right half-plane (the step
    /// response would grow without bound).
    fn require_bounded(&self) -> Result<Vec<Complex64>> {
        let poles = self.poles();
        let unstable: Vec<Complex64> = poles.iter().copied().filter(|p| p.re > MARGINAL * p.norm()).collect();
        if unstable.is_empty() {
            Ok(poles)
        } else {
            Err(Error::NoSettling { roots: unstable })
        }
    }

    /// Poles, or an error naming every pole that keeps the response from
    /// settling (right half-plane or on the imaginary axis).
    fn require_stable(&self) -> Result<Vec<Complex64>> {
        let poles = self.poles();
        let bad = marginal_or_unstable(&poles);
        if bad.is_empty() {
            Ok(poles)
        } else {
            Err(Error::NoSettling { roots: bad })
        }
    }

    /// Long enough for the slowest mode to decay by `e^-12`.
    pub fn suggested_duration(&self) -> Result<f64> {
        let poles = self.require_stable()?;
        let slowest = poles.iter().map(|p| -p.re).fold(f64::INFINITY, f64::min);
        Ok(12.0 / slowest)
    }

    /// Step small enough to resolve the fastest mode.
    pub fn suggested_step(&self) -> Result<f64> {
        let poles = self.require_bounded()?;
        let fastest = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
        Ok(0.01 / fastest)
    }
}

/// Poles with `Re p > -MARGINAL |p|` are treated as lying on the axis.
const MARGINAL: f64 = 1e-9;

fn marginal_or_unstable(poles: &[Complex64]) -> Vec<Complex64> {
    poles.iter().copied().filter(|p| p.re >= -MARGINAL * p.norm()).collect()
}

fn degree(c: &[f64]) -> Option<usize> {
    c.iter().rposition(|&x| x != 0.0)
}

fn horner(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * s + x)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, x)| k as f64 * x).collect()
}

/// Roots of a monic polynomial (ascending coefficients) from its companion
/// matrix, refined with a few Newton steps.
fn polynomial_roots(monic: &[f64]) -> Vec<Complex64> {
    let n = monic.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -monic[i];
    }
    let d = derivative(monic);
    comp.complex_eigenvalues()
        .iter()
        .map(|&z| {
            let mut z = z;
            for _ in 0..4 {
                let dz = horner(&d, z);
                if dz.norm() == 0.0 {
                    break;
                }
                let step = horner(monic, z) / dz;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                z -= step;
            }
            z
        })
        .collect()
}

/// The simplified amplifier: resonator 1 loaded by the Miller-multiplied
/// feedback capacitance, resonator 2 by the nonlinear capacitance and
/// inductance.
///
/// With `r_damp = None` the `s^3` and `s^1` coefficients are used as-is,
/// although they lack a resistance to be dimensionally consistent; with
/// `Some(r)` both are divided by `r`.
pub fn build_transfer_function(
    c: &DerivedCoefficients,
    t: &TransistorParams,
    o: &OscillatorParams,
    s: &SourceParams,
    r0: f64,
    r_damp: Option<f64>,
) -> Result<TransferFunction> {
    if !(r0 > 0.0) {
        return Err(Error::domain("r0", "must be positive"));
    }
    let r = match r_damp {
        None => 1.0,
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(_) => return Err(Error::domain("R_damp", "must be positive")),
    };
    // L2N in parallel with L2.
    let inv_lp2 = c.inv_l2n + 1.0 / o.l2;
    if !(inv_lp2 > 0.0) || !inv_lp2.is_finite() {
        return Err(Error::domain("L_2N", format!("parallel inductance degenerate (1/L = {inv_lp2:e})")));
    }
    let l_p2 = 1.0 / inv_lp2;
    let a_v0 = t.g_m * r0;
    let c_p1 = t.c_gs + o.c1 + (t.c_gd + s.c_f) * a_v0;
    let c_p2 = c.c_n + o.c2;
    let l1 = o.l1;
    let num = vec![0.0, 0.0, t.g_m * l_p2 * l1];
    let den = vec![1.0, l1 / r, l1 * c_p1 + l_p2 * c_p2, l_p2 * l1 * c_p2 / r, l_p2 * l1 * c_p1 * c_p2];
    Ok(TransferFunction { num, den, l_p2, c_p1, c_p2, a_v0 })
}

/// Sampled response `y(t)` to a unit step applied at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub final_value: f64,
}

impl StepSeries {
    pub fn peak_deviation(&self) -> f64 {
        self.y.iter().map(|y| (y - self.final_value).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "t,v_out")?;
        for (t, y) in self.t.iter().zip(&self.y) {
            writeln!(f, "{t:.12e},{y:.12e}")?;
        }
        f.flush()?;
        Ok(())
    }
}

fn sample_times(duration: f64, dt: f64) -> Result<Vec<f64>> {
    if !(duration > 0.0) || !(dt > 0.0) || !duration.is_finite() {
        return Err(Error::domain("dt", "duration and step must be positive"));
    }
    let steps = (duration / dt).round() as usize;
    if steps > 200_000_000 {
        return Err(Error::domain("dt", "too many samples"));
    }
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// Step response by partial fractions over the (simple) poles:
/// `y(t) = H(0) + sum_k N(p_k) / (p_k D'(p_k)) e^{p_k t}`.
pub fn step_response(tf: &TransferFunction, duration: f64, dt: f64) -> Result<StepSeries> {
    let times = sample_times(duration, dt)?;
    if tf.is_zero() {
        let n = times.len();
        return Ok(StepSeries { t: times, y: vec![0.0; n], final_value: 0.0 });
    }
    let poles = tf.require_bounded()?;
    // Work in the rescaled variable so the residues are well conditioned.
    let w = tf.natural_scale();
    let (num, den) = tf.rescaled(w);
    let dden = derivative(&den);
    let mut residues = Vec::with_capacity(poles.len());
    for p in &poles {
        let q = p / w;
        let dq = horner(&dden, q);
        if dq.norm() < 1e-10 * horner(&derivative(&dden), q).norm().max(1.0) {
            return Err(Error::domain("den", "repeated poles are not supported"));
        }
        residues.push((q, horner(&num, q) / (q * dq)));
    }
    let final_value = tf.dc_gain();
    let y = times
        .iter()
        .map(|&t| {
            let tau = t * w;
            final_value + residues.iter().map(|(q, r)| r * (q * tau).exp()).sum::<Complex64>().re
        })
        .collect();
    Ok(StepSeries { t: times, y, final_value })
}

/// Trapezoidal integration of the controllable canonical state-space form,
/// taking `substeps` internal steps per output sample.
pub fn step_response_ode(tf: &TransferFunction, duration: f64, dt: f64, substeps: usize) -> Result<StepSeries> {
    let times = sample_times(duration, dt)?;
    if substeps == 0 {
        return Err(Error::domain("substeps", "must be at least 1"));
    }
    tf.require_bounded()?;
    let final_value = if tf.is_zero() { 0.0 } else { tf.dc_gain() };
    let w = tf.natural_scale();
    let (num, den) = tf.rescaled(w);
    let n = den.len() - 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -den[j];
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let c = DVector::from_iterator(n, (0..n).map(|k| num.get(k).copied().unwrap_or(0.0)));
    let h = dt * w / substeps as f64;
    let id = DMatrix::<f64>::identity(n, n);
    let lhs =
        (&id - &a * (0.5 * h)).try_inverse().ok_or_else(|| Error::domain("dt", "trapezoidal system is singular"))?;
    let step = &lhs * (&id + &a * (0.5 * h));
    let forcing = &lhs * &b * h;
    let mut x = DVector::<f64>::zeros(n);
    let mut next = DVector::<f64>::zeros(n);
    let mut y = Vec::with_capacity(times.len());
    for _ in &times {
        y.push(c.dot(&x));
        for _ in 0..substeps {
            step.mul_to(&x, &mut next);
            next += &forcing;
            std::mem::swap(&mut x, &mut next);
        }
    }
    Ok(StepSeries { t: times, y, final_value })
}

/// Last time the response is outside `final +- band * peak`, with linear
/// interpolation to the crossing. Zero if it never leaves the band.
pub fn settling_time(series: &StepSeries, band: f64) -> Result<f64> {
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::domain("band", "must lie in (0, 1)"));
    }
    let peak = series.peak_deviation();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let tol = band * peak;
    let dev: Vec<f64> = series.y.iter().map(|y| (y - series.final_value).abs()).collect();
    let Some(last) = dev.iter().rposition(|&d| d > tol) else {
        return Ok(0.0);
    };
    if last + 1 == dev.len() {
        return Err(Error::NoSettling { roots: Vec::new() });
    }
    let (d0, d1) = (dev[last], dev[last + 1]);
    let (t0, t1) = (series.t[last], series.t[last + 1]);
    Ok(t0 + (t1 - t0) * (d0 - tol) / (d0 - d1))
}

/// Settling time from the analytic response on an automatically chosen grid.
pub fn settling_time_of(tf: &TransferFunction, band: f64) -> Result<f64> {
    if tf.is_zero() {
        return Ok(0.0);
    }
    tf.require_stable()?;
    let duration = tf.suggested_duration()?;
    let dt = (duration / 400_000.0).min(tf.suggested_step()? * 10.0);
    settling_time(&step_response(tf, duration, dt)?, band)
}
