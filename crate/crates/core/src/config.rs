//! Plain-text `key = value` configuration.
//!
//! One key per line, SI units, `#` starts a comment. Missing keys keep their
//! defaults; unknown or repeated keys are rejected with the line number.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::circuit::{
    DecayRates, DerivedCoefficients, OperatingPoint, OscillatorParams, SourceParams, TransistorParams,
};
use crate::error::{Error, Result};
use crate::response::{build_transfer_function, TransferFunction};

/// Nonlinear transconductance and capacitance the default DC point is chosen to produce.
pub const REFERENCE_G_M2N: f64 = 0.677;
pub const REFERENCE_C_N: f64 = 3.3e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitConfig {
    pub transistor: TransistorParams,
    pub oscillator: OscillatorParams,
    pub source: SourceParams,
    pub phi2_dc: f64,
    pub dphi1_dc: f64,
    /// Noise bandwidth, Hz.
    pub bandwidth: f64,
    /// Channel-length-modulation resistance, ohm.
    pub r0: f64,
    pub r_damp: Option<f64>,
    pub kappa_ratio: f64,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    /// Levels kept for mode 1 in two-mode simulations.
    pub cutoff1: usize,
    /// Largest mode-2 cutoff tried by the convergence ladder.
    pub cutoff2: usize,
    /// Start from the steady-state coherent amplitudes instead of vacuum.
    pub coherent_input: bool,
    /// Let the classical settling time bound the evolution window.
    pub use_settling: bool,
    pub settle_band: f64,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        let transistor = TransistorParams::cryogenic_inp_hemt();
        let op = OperatingPoint::back_solve(transistor.g_m2, transistor.g_m3, REFERENCE_G_M2N, REFERENCE_C_N)
            .expect("reference transconductances admit a DC point");
        let oscillator = OscillatorParams::default_5ghz();
        let kappa_ratio = match oscillator.decay {
            DecayRates::RelativeToFrequency(r) => r,
            DecayRates::Absolute { .. } => unreachable!(),
        };
        Self {
            transistor,
            oscillator,
            source: SourceParams::reference(),
            phi2_dc: op.phi2_dc,
            dphi1_dc: op.dphi1_dc,
            bandwidth: 1.0,
            r0: 500.0,
            r_damp: None,
            kappa_ratio,
            kappa1: None,
            kappa2: None,
            cutoff1: 10,
            cutoff2: 40,
            coherent_input: false,
            use_settling: false,
            settle_band: 0.02,
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Real,
    OptionalReal,
    Count,
    Flag,
}

const KEYS: &[(&str, Kind)] = &[
    ("g_m", Kind::Real),
    ("g_m2", Kind::Real),
    ("g_m3", Kind::Real),
    ("C_gs", Kind::Real),
    ("C_gd", Kind::Real),
    ("C_ds", Kind::Real),
    ("R_g", Kind::Real),
    ("R_gs", Kind::Real),
    ("R_gd", Kind::Real),
    ("R_ds", Kind::Real),
    ("L_g", Kind::Real),
    ("L_d", Kind::Real),
    ("gamma", Kind::Real),
    ("L1", Kind::Real),
    ("L2", Kind::Real),
    ("C1", Kind::Real),
    ("C2", Kind::Real),
    ("C_in", Kind::Real),
    ("C_f", Kind::Real),
    ("V_RF", Kind::Real),
    ("T", Kind::Real),
    ("phi2_dc", Kind::Real),
    ("dphi1_dc", Kind::Real),
    ("delta_f", Kind::Real),
    ("r0", Kind::Real),
    ("R_damp", Kind::OptionalReal),
    ("kappa_ratio", Kind::Real),
    ("kappa1", Kind::OptionalReal),
    ("kappa2", Kind::OptionalReal),
    ("cutoff1", Kind::Count),
    ("cutoff2", Kind::Count),
    ("coherent_input", Kind::Flag),
    ("use_settling", Kind::Flag),
    ("settle_band", Kind::Real),
];

impl CircuitConfig {
    /// All recognized keys, in echo order.
    pub fn keys() -> impl Iterator<Item = &'static str> {
        KEYS.iter().map(|(k, _)| *k)
    }

    fn real_mut(&mut self, key: &str) -> Option<&mut f64> {
        let t = &mut self.transistor;
        let o = &mut self.oscillator;
        let s = &mut self.source;
        Some(match key {
            "g_m" => &mut t.g_m,
            "g_m2" => &mut t.g_m2,
            "g_m3" => &mut t.g_m3,
            "C_gs" => &mut t.c_gs,
            "C_gd" => &mut t.c_gd,
            "C_ds" => &mut t.c_ds,
            "R_g" => &mut t.r_g,
            "R_gs" => &mut t.r_gs,
            "R_gd" => &mut t.r_gd,
            "R_ds" => &mut t.r_ds,
            "L_g" => &mut t.l_g,
            "L_d" => &mut t.l_d,
            "gamma" => &mut t.gamma,
            "L1" => &mut o.l1,
            "L2" => &mut o.l2,
            "C1" => &mut o.c1,
            "C2" => &mut o.c2,
            "C_in" => &mut s.c_in,
            "C_f" => &mut s.c_f,
            "V_RF" => &mut s.v_rf,
            "T" => &mut s.temperature,
            "phi2_dc" => &mut self.phi2_dc,
            "dphi1_dc" => &mut self.dphi1_dc,
            "delta_f" => &mut self.bandwidth,
            "r0" => &mut self.r0,
            "kappa_ratio" => &mut self.kappa_ratio,
            "settle_band" => &mut self.settle_band,
            _ => return None,
        })
    }

    fn optional_mut(&mut self, key: &str) -> Option<&mut Option<f64>> {
        match key {
            "R_damp" => Some(&mut self.r_damp),
            "kappa1" => Some(&mut self.kappa1),
            "kappa2" => Some(&mut self.kappa2),
            _ => None,
        }
    }

    /// Set a real-valued key. Used by sweeps.
    pub fn set_real(&mut self, key: &str, value: f64) -> Result<()> {
        if let Some(slot) = self.real_mut(key) {
            *slot = value;
        } else if let Some(slot) = self.optional_mut(key) {
            *slot = Some(value);
        } else {
            return Err(Error::domain(key, "not a real-valued configuration key"));
        }
        Ok(())
    }

    pub fn get_real(&self, key: &str) -> Option<f64> {
        let mut copy = self.clone();
        if let Some(v) = copy.real_mut(key) {
            return Some(*v);
        }
        copy.optional_mut(key).and_then(|v| *v)
    }

    fn assign(&mut self, key: &str, kind: Kind, raw: &str) -> std::result::Result<(), String> {
        match kind {
            Kind::Real => {
                let v = parse_real(raw)?;
                *self.real_mut(key).expect("table and accessors agree") = v;
            }
            Kind::OptionalReal => {
                let v = if raw.eq_ignore_ascii_case("off") { None } else { Some(parse_real(raw)?) };
                *self.optional_mut(key).expect("table and accessors agree") = v;
            }
            Kind::Count => {
                let v: usize = raw.parse().map_err(|_| format!("`{raw}` is not a non-negative integer"))?;
                match key {
                    "cutoff1" => self.cutoff1 = v,
                    _ => self.cutoff2 = v,
                }
            }
            Kind::Flag => {
                let v = match raw {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(format!("`{raw}` is not a flag (0, 1, true, false)")),
                };
                match key {
                    "coherent_input" => self.coherent_input = v,
                    _ => self.use_settling = v,
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse { line, msg: format!("expected `key = value`, found `{content}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&(name, kind)) = KEYS.iter().find(|(k, _)| *k == key) else {
                return Err(Error::UnknownKey { line, key: key.to_string() });
            };
            if !seen.insert(name) {
                return Err(Error::Parse { line, msg: format!("`{name}` given more than once") });
            }
            if value.is_empty() {
                return Err(Error::Parse { line, msg: format!("missing value for `{name}`") });
            }
            cfg.assign(name, kind, value).map_err(|msg| Error::Parse { line, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn decay(&self) -> Result<DecayRates> {
        match (self.kappa1, self.kappa2) {
            (None, None) => Ok(DecayRates::RelativeToFrequency(self.kappa_ratio)),
            (Some(kappa1), Some(kappa2)) => Ok(DecayRates::Absolute { kappa1, kappa2 }),
            (Some(_), None) => Err(Error::domain("kappa2", "must be given together with kappa1")),
            (None, Some(_)) => Err(Error::domain("kappa1", "must be given together with kappa2")),
        }
    }

    /// Oscillator parameters with the configured decay rates.
    pub fn oscillator(&self) -> Result<OscillatorParams> {
        Ok(OscillatorParams { decay: self.decay()?, ..self.oscillator })
    }

    pub fn operating_point(&self) -> OperatingPoint {
        OperatingPoint::new(self.phi2_dc, self.dphi1_dc)
    }

    pub fn coefficients(&self) -> Result<DerivedCoefficients> {
        self.validate()?;
        DerivedCoefficients::evaluate(
            &self.transistor,
            &self.oscillator()?,
            &self.source,
            &self.operating_point(),
            self.bandwidth,
        )
    }

    pub fn transfer_function(&self) -> Result<TransferFunction> {
        let c = self.coefficients()?;
        build_transfer_function(&c, &self.transistor, &self.oscillator, &self.source, self.r0, self.r_damp)
    }

    pub fn validate(&self) -> Result<()> {
        for &(key, _) in KEYS {
            if let Some(v) = self.get_real(key) {
                if !v.is_finite() {
                    return Err(Error::domain(key, "must be finite"));
                }
            }
        }
        self.transistor.validate()?;
        self.oscillator()?.validate()?;
        self.source.validate()?;
        self.operating_point().validate()?;
        if !(self.bandwidth > 0.0) {
            return Err(Error::domain("delta_f", "must be positive"));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::domain("r0", "must be positive"));
        }
        if let Some(r) = self.r_damp {
            if !(r > 0.0) {
                return Err(Error::domain("R_damp", "must be positive"));
            }
        }
        if self.cutoff1 < 2 {
            return Err(Error::domain("cutoff1", "need at least 2 levels"));
        }
        if self.cutoff2 < 5 {
            return Err(Error::domain("cutoff2", "need at least 5 levels"));
        }
        if !(self.settle_band > 0.0 && self.settle_band < 1.0) {
            return Err(Error::domain("settle_band", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Every key with its resolved value, in a form `parse` reads back exactly.
    pub fn echo(&self) -> String {
        let mut out = String::from("# resolved configuration\n");
        for &(key, kind) in KEYS {
            let _ = match kind {
                Kind::Real => writeln!(out, "{key} = {:e}", self.get_real(key).unwrap()),
                Kind::OptionalReal => match self.get_real(key) {
                    Some(v) => writeln!(out, "{key} = {v:e}"),
                    None => writeln!(out, "{key} = off"),
                },
                Kind::Count => writeln!(out, "{key} = {}", if key == "cutoff1" { self.cutoff1 } else { self.cutoff2 }),
                Kind::Flag => {
                    let v = if key == "coherent_input" { self.coherent_input } else { self.use_settling };
                    writeln!(out, "{key} = {}", u8::from(v))
                }
            };
        }
        out
    }
}

fn parse_real(raw: &str) -> std::result::Result<f64, String> {
    raw.parse::<f64>().map_err(|_| format!("`{raw}` is not a number"))
}
