//! Per-point pipeline (coefficients, steady state, evolution window, state,
//! observables) and parameter sweeps over it.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{compute_squeeze_params, DerivedCoefficients, SqueezeParams};
use crate::config::CircuitConfig;
use crate::dynamics::{apply_single_mode_squeeze, apply_two_mode_squeeze, evolve, select_t0, steady_state};
use crate::error::{Error, Result};
use crate::fock::{Mode, QuantumState};
use crate::hamiltonian::{build, LinearModel};
use crate::observables::{epr_variance, ObservableReport};
use crate::response::{build_transfer_function, settling_time_of};

/// First cutoff tried by the convergence ladder and its increment.
pub const LADDER_START: usize = 15;
pub const LADDER_STEP: usize = 5;
/// Relative change between successive cutoffs accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Relative disagreement between the two paths that is reported.
pub const PATH_AGREEMENT: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathSelection {
    Full,
    Squeeze,
    Both,
}

impl FromStr for PathSelection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "squeeze" => Ok(Self::Squeeze),
            "both" => Ok(Self::Both),
            _ => Err(Error::domain("path", format!("`{s}` is not one of full, squeeze, both"))),
        }
    }
}

/// Result of one evolution path on mode 2.
#[derive(Debug, Clone)]
pub struct PathOutcome {
    pub state: QuantumState,
    pub report: ObservableReport,
    pub cutoff: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Everything computed for one parameter set.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub coeffs: DerivedCoefficients,
    pub model: LinearModel,
    pub kappa: (f64, f64),
    pub amplitudes: (Complex64, Complex64),
    pub squeeze: SqueezeParams,
    pub settling: Option<f64>,
    pub t0: f64,
    pub full: Option<PathOutcome>,
    pub squeeze_path: Option<PathOutcome>,
    /// EPR variance of the two-mode squeeze-operator state.
    pub epr_squeeze: Option<f64>,
    pub warnings: Vec<String>,
}

fn observables_close(a: &ObservableReport, b: &ObservableReport, tol: f64) -> bool {
    [(a.var_x, b.var_x), (a.var_y, b.var_y), (a.n_mean, b.n_mean)]
        .iter()
        .all(|&(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()) + 1e-14)
}

/// Raise the mode-2 cutoff from 15 in steps of 5 until mode-2 observables
/// change by less than 0.1%, or `cap` is reached.
fn converge<F>(cap: usize, run: F) -> Result<PathOutcome>
where
    F: Fn(usize) -> Result<(QuantumState, Vec<String>)>,
{
    let mut cutoff = LADDER_START.min(cap);
    let (mut state, mut warnings) = run(cutoff)?;
    let mut report = ObservableReport::measure(&state, Mode::Two);
    while cutoff < cap {
        let next = (cutoff + LADDER_STEP).min(cap);
        let (s, w) = run(next)?;
        let r = ObservableReport::measure(&s, Mode::Two);
        let done = observables_close(&report, &r, CONVERGENCE_TOL);
        (state, warnings, report, cutoff) = (s, w, r, next);
        if done {
            return Ok(PathOutcome { state, report, cutoff, converged: true, warnings });
        }
    }
    warnings.push(format!("mode-2 observables not converged at cutoff {cutoff}"));
    Ok(PathOutcome { state, report, cutoff, converged: false, warnings })
}

fn initial_state(cfg: &CircuitConfig, c1: usize, c2: usize, a1: Complex64, a2: Complex64) -> QuantumState {
    if cfg.coherent_input {
        QuantumState::coherent(c1, c2, a1, a2)
    } else {
        QuantumState::vacuum(c1, c2)
    }
}

/// Coefficients, steady state, window and the requested evolution paths for
/// one configuration. Failures inside a path become warnings; failures
/// before evolution are errors.
pub fn evaluate_point(cfg: &CircuitConfig, paths: PathSelection) -> Result<PointResult> {
    cfg.validate()?;
    let t = &cfg.transistor;
    let o = cfg.oscillator()?;
    let s = &cfg.source;
    let mut op = cfg.operating_point();
    let coeffs = DerivedCoefficients::evaluate(t, &o, s, &op, cfg.bandwidth)?;
    let model = LinearModel::from_coefficients(&coeffs, s.c_in, s.v_rf, t.c_gs);
    let (kappa1, kappa2) = o.decay.resolve(coeffs.omega1, coeffs.omega2);
    let (a1, a2) = steady_state(&model, kappa1, kappa2)?;
    op.a1 = a1;
    op.a2 = a2;
    let squeeze = compute_squeeze_params(&coeffs, &op);
    let mut warnings = Vec::new();

    let settling = if cfg.use_settling {
        match build_transfer_function(&coeffs, t, &o, s, cfg.r0, cfg.r_damp)
            .and_then(|tf| settling_time_of(&tf, cfg.settle_band))
        {
            Ok(ts) => Some(ts),
            Err(e) => {
                warnings.push(format!("settling time unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };
    let t0 = select_t0(kappa1, kappa2, settling);

    let full = if paths != PathSelection::Squeeze {
        let g = coeffs.couplings();
        let run = |c2: usize| -> Result<(QuantumState, Vec<String>)> {
            let set = build(&model, &g, cfg.cutoff1, c2)?;
            let psi = evolve(&set.total, t0, &initial_state(cfg, cfg.cutoff1, c2, a1, a2))?;
            let mut w = Vec::new();
            if psi.tail_weight(Mode::One, 1) > 1e-6 {
                w.push(format!("mode-1 population reaches the top of {} levels", cfg.cutoff1));
            }
            Ok((psi, w))
        };
        match converge(cfg.cutoff2, run) {
            Ok(out) => Some(out),
            Err(e) => {
                warnings.push(format!("full-Hamiltonian path failed: {e}"));
                None
            }
        }
    } else {
        None
    };

    let squeeze_path = if paths != PathSelection::Full {
        let run = |c2: usize| -> Result<(QuantumState, Vec<String>)> {
            let init = if cfg.coherent_input {
                QuantumState::coherent(c2, 0, a2, Complex64::new(0.0, 0.0))
            } else {
                QuantumState::vacuum(c2, 0)
            };
            let out = apply_single_mode_squeeze(&squeeze, t0, &init)?;
            Ok((out.state, out.warning.into_iter().collect()))
        };
        match converge(cfg.cutoff2, run) {
            Ok(out) => Some(out),
            Err(e) => {
                warnings.push(format!("squeeze-operator path failed: {e}"));
                None
            }
        }
    } else {
        None
    };

    let epr_squeeze = if paths != PathSelection::Full {
        let c = cfg.cutoff1.max(10);
        let init = initial_state(cfg, c, c, a1, a2);
        match apply_two_mode_squeeze(&squeeze, t0, &init) {
            Ok(out) => {
                if let Some(w) = out.warning {
                    warnings.push(format!("two-mode squeeze: {w}"));
                }
                if out.state.tail_weight(Mode::One, 1) > 1e-6 || out.state.tail_weight(Mode::Two, 1) > 1e-6 {
                    warnings.push(format!("two-mode squeezed state reaches the top of {c} levels"));
                }
                epr_variance(&out.state).ok()
            }
            Err(e) => {
                warnings.push(format!("two-mode squeeze failed: {e}"));
                None
            }
        }
    } else {
        None
    };

    if let (Some(f), Some(q)) = (&full, &squeeze_path) {
        for (name, x, y) in [("var_x2", f.report.var_x, q.report.var_x), ("var_y2", f.report.var_y, q.report.var_y)] {
            let rel = (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
            if rel > PATH_AGREEMENT {
                warnings.push(format!("paths disagree on {name}: full {x:.6e}, squeeze {y:.6e}"));
            }
        }
    }

    Ok(PointResult {
        coeffs,
        model,
        kappa: (kappa1, kappa2),
        amplitudes: (a1, a2),
        squeeze,
        settling,
        t0,
        full,
        squeeze_path,
        epr_squeeze,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    GM,
    GM2,
    GM3,
    CF,
    VRF,
    /// Decay rate as a fraction of each mode frequency.
    Kappa,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            Self::GM => "g_m",
            Self::GM2 => "g_m2",
            Self::GM3 => "g_m3",
            Self::CF => "C_f",
            Self::VRF => "V_RF",
            Self::Kappa => "kappa",
        }
    }

    pub fn apply(&self, cfg: &mut CircuitConfig, value: f64) {
        match self {
            Self::Kappa => {
                cfg.kappa_ratio = value;
                cfg.kappa1 = None;
                cfg.kappa2 = None;
            }
            p => cfg.set_real(p.name(), value).expect("sweep parameters are config keys"),
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Self::GM, Self::GM2, Self::GM3, Self::CF, Self::VRF, Self::Kappa]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::domain("param", format!("`{s}` is not one of g_m, g_m2, g_m3, C_f, V_RF, kappa")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub fixed: CircuitConfig,
    pub paths: PathSelection,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::domain("start", "need finite start < stop"));
        }
        if self.points < 2 {
            return Err(Error::domain("points", "need at least 2 points"));
        }
        self.fixed.validate()
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|i| if i == n { self.stop } else { self.start + (self.stop - self.start) * i as f64 / n as f64 })
            .collect()
    }

    pub fn config_at(&self, value: f64) -> CircuitConfig {
        let mut cfg = self.fixed.clone();
        self.parameter.apply(&mut cfg, value);
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param_value: f64,
    pub var_x2: f64,
    pub var_y2: f64,
    pub g2_paper: f64,
    pub g2_standard: f64,
    pub n_mean: f64,
    pub zeta1_mag: f64,
    pub zeta2_mag: f64,
    pub epr: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl SweepRow {
    fn failed(param_value: f64, err: &Error) -> Self {
        Self {
            param_value,
            var_x2: f64::NAN,
            var_y2: f64::NAN,
            g2_paper: f64::NAN,
            g2_standard: f64::NAN,
            n_mean: f64::NAN,
            zeta1_mag: f64::NAN,
            zeta2_mag: f64::NAN,
            epr: f64::NAN,
            converged: false,
            warnings: vec![err.to_string()],
        }
    }

    /// Row for one point: the full-Hamiltonian state when it was computed,
    /// the squeeze-operator state otherwise.
    pub fn from_point(param_value: f64, p: &PointResult) -> Self {
        let mut warnings = p.warnings.clone();
        let chosen = p.full.as_ref().or(p.squeeze_path.as_ref());
        for out in [&p.full, &p.squeeze_path].into_iter().flatten() {
            warnings.extend(out.warnings.iter().cloned());
        }
        let nan = f64::NAN;
        let (var_x2, var_y2, n_mean, g2, g2s, path_converged) = match chosen {
            Some(o) => {
                (o.report.var_x, o.report.var_y, o.report.n_mean, o.report.g2, o.report.g2_standard, o.converged)
            }
            None => (nan, nan, nan, None, None, false),
        };
        if chosen.is_some() && g2.is_none() {
            warnings.push(format!("g2 undefined: mean occupation {n_mean:e}"));
        }
        let epr = match &p.full {
            Some(f) => f.report.epr,
            None => p.epr_squeeze,
        };
        let converged = path_converged && warnings.is_empty();
        Self {
            param_value,
            var_x2,
            var_y2,
            g2_paper: g2.unwrap_or(nan),
            g2_standard: g2s.unwrap_or(nan),
            n_mean,
            zeta1_mag: p.squeeze.zeta1.norm(),
            zeta2_mag: p.squeeze.zeta2.norm(),
            epr: epr.unwrap_or(nan),
            converged,
            warnings,
        }
    }
}

pub fn evaluate_row(spec: &SweepSpec, value: f64) -> SweepRow {
    match evaluate_point(&spec.config_at(value), spec.paths) {
        Ok(p) => SweepRow::from_point(value, &p),
        Err(e) => SweepRow::failed(value, &e),
    }
}

/// One row per sweep value, in parameter order. Points are evaluated in
/// parallel; a failing point yields a row of NaN with the error as warning.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.values().par_iter().map(|&v| evaluate_row(spec, v)).collect())
}

pub const CSV_HEADER: &str = "param,var_x2,var_y2,g2_paper,g2_standard,n_mean,zeta1_mag,zeta2_mag,epr,converged";

pub fn format_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            r.param_value,
            r.var_x2,
            r.var_y2,
            r.g2_paper,
            r.g2_standard,
            r.n_mean,
            r.zeta1_mag,
            r.zeta2_mag,
            r.epr,
            r.converged
        );
    }
    out
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::domain("rows", "nothing to write"));
    }
    std::fs::write(path, format_csv(rows))?;
    Ok(())
}

/// Columns written as separate two-column panel files.
pub const PANEL_COLUMNS: [&str; 6] = ["var_x2", "var_y2", "g2_paper", "g2_standard", "n_mean", "epr"];

/// Two-column `param,<column>` companion files, one per plotted quantity,
/// named `<stem>_<column>.csv` next to `base`. Returns the paths written.
pub fn emit_panels(rows: &[SweepRow], param: &str, base: &Path) -> Result<Vec<std::path::PathBuf>> {
    if rows.is_empty() {
        return Err(Error::domain("rows", "nothing to write"));
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let dir = base.parent().unwrap_or(Path::new(""));
    let mut written = Vec::new();
    for col in PANEL_COLUMNS {
        let mut out = format!("{param},{col}\n");
        for r in rows {
            let v = match col {
                "var_x2" => r.var_x2,
                "var_y2" => r.var_y2,
                "g2_paper" => r.g2_paper,
                "g2_standard" => r.g2_standard,
                "n_mean" => r.n_mean,
                _ => r.epr,
            };
            let _ = writeln!(out, "{:.12e},{v:.12e}", r.param_value);
        }
        let path = dir.join(format!("{stem}_{col}.csv"));
        std::fs::write(&path, out)?;
        written.push(path);
    }
    Ok(written)
}

/// Total parameter width over which `g2_paper < 1`, each row standing for
/// the interval halfway to its neighbours.
pub fn antibunching_width(rows: &[SweepRow]) -> f64 {
    let n = rows.len();
    (0..n)
        .filter(|&i| rows[i].g2_paper < 1.0)
        .map(|i| {
            let lo = if i == 0 { rows[0].param_value } else { 0.5 * (rows[i - 1].param_value + rows[i].param_value) };
            let hi = if i + 1 == n {
                rows[n - 1].param_value
            } else {
                0.5 * (rows[i].param_value + rows[i + 1].param_value)
            };
            hi - lo
        })
        .fold(0.0, |acc, w| acc + w)
}

/// Index of the smallest finite `var_y2`.
pub fn var_y2_minimum(rows: &[SweepRow]) -> Option<usize> {
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.var_y2.is_finite())
        .min_by(|a, b| a.1.var_y2.total_cmp(&b.1.var_y2))
        .map(|(i, _)| i)
}
