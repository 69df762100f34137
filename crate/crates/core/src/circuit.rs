//! Circuit-level coefficients of the transistor-coupled oscillator pair.
//!
//! Everything here is a closed-form function of element values and a DC
//! operating point: capacitance aggregates, the inverted capacitance matrix,
//! the nonlinear DC terms, the quadratic-Hamiltonian coefficients and the
//! ladder-operator couplings `g13..g18`. All values are SI; couplings that
//! enter the Hamiltonian are angular frequencies (rad/s, hbar = 1).

use num_complex::Complex64;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};

/// Small-signal model of the transistor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransistorParams {
    /// Transconductance, A/V.
    pub g_m: f64,
    /// Second-order transconductance, A/V^2.
    pub g_m2: f64,
    /// Third-order transconductance, A/V^3.
    pub g_m3: f64,
    pub c_gs: f64,
    pub c_gd: f64,
    /// Stored only; not part of the circuit equations.
    pub c_ds: f64,
    pub r_g: f64,
    pub r_gs: f64,
    pub r_gd: f64,
    pub r_ds: f64,
    /// Stored only; not part of the circuit equations.
    pub l_g: f64,
    /// Stored only; not part of the circuit equations.
    pub l_d: f64,
    /// Empirical channel-noise constant.
    pub gamma: f64,
}

impl TransistorParams {
    /// 2x50 um InP HEMT at 5 K, with the transconductances used for the
    /// reference g_m scan (g_m = 45 mS, g_m2 = 200 mA/V^2, g_m3 = 1200 mA/V^3).
    pub fn cryogenic_inp_hemt() -> Self {
        Self {
            g_m: 45e-3,
            g_m2: 0.2,
            g_m3: 1.2,
            c_gs: 69e-15,
            c_gd: 19e-15,
            c_ds: 29e-15,
            r_g: 0.3,
            r_gs: 4.0,
            r_gd: 35.0,
            r_ds: 500.0,
            l_g: 75e-12,
            l_d: 70e-12,
            gamma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("g_m", self.g_m),
            ("C_gs", self.c_gs),
            ("C_gd", self.c_gd),
            ("C_ds", self.c_ds),
            ("R_g", self.r_g),
            ("R_gs", self.r_gs),
            ("R_gd", self.r_gd),
            ("R_ds", self.r_ds),
            ("L_g", self.l_g),
            ("L_d", self.l_d),
            ("gamma", self.gamma),
        ];
        for (name, v) in nonneg {
            check_nonneg(name, v)?;
        }
        check_finite("g_m2", self.g_m2)?;
        check_finite("g_m3", self.g_m3)
    }
}

/// How the oscillator decay rates are specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayRates {
    /// kappa_i = ratio * omega_i.
    RelativeToFrequency(f64),
    /// Fixed rates in rad/s.
    Absolute { kappa1: f64, kappa2: f64 },
}

impl DecayRates {
    pub fn resolve(&self, omega1: f64, omega2: f64) -> (f64, f64) {
        match *self {
            DecayRates::RelativeToFrequency(r) => (r * omega1, r * omega2),
            DecayRates::Absolute { kappa1, kappa2 } => (kappa1, kappa2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub l1: f64,
    pub l2: f64,
    pub c1: f64,
    pub c2: f64,
    pub decay: DecayRates,
}

impl OscillatorParams {
    /// 100 fF tanks with inductors chosen for a bare 5 GHz resonance.
    pub fn default_5ghz() -> Self {
        let c = 100e-15;
        let w = 2.0 * std::f64::consts::PI * 5e9;
        let l = 1.0 / (w * w * c);
        Self { l1: l, l2: l, c1: c, c2: c, decay: DecayRates::RelativeToFrequency(1e-3) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("L1", self.l1), ("L2", self.l2), ("C1", self.c1), ("C2", self.c2)] {
            check_pos(name, v)?;
        }
        match self.decay {
            DecayRates::RelativeToFrequency(r) => check_pos("kappa_ratio", r),
            DecayRates::Absolute { kappa1, kappa2 } => {
                check_pos("kappa1", kappa1)?;
                check_pos("kappa2", kappa2)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    pub c_in: f64,
    pub c_f: f64,
    /// Input amplitude, V.
    pub v_rf: f64,
    /// Temperature, K.
    pub temperature: f64,
}

impl SourceParams {
    pub fn reference() -> Self {
        Self { c_in: 100e-15, c_f: 20e-15, v_rf: 1e-6, temperature: 5.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_nonneg("C_in", self.c_in)?;
        check_nonneg("C_f", self.c_f)?;
        check_finite("V_RF", self.v_rf)?;
        check_pos("T", self.temperature)
    }
}

/// DC point of the circuit plus the steady-state mode amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// DC node-2 flux, V*s.
    pub phi2_dc: f64,
    /// DC value of the node-1 flux rate, V.
    pub dphi1_dc: f64,
    pub a1: Complex64,
    pub a2: Complex64,
}

impl OperatingPoint {
    pub fn new(phi2_dc: f64, dphi1_dc: f64) -> Self {
        Self { phi2_dc, dphi1_dc, a1: Complex64::new(0.0, 0.0), a2: Complex64::new(0.0, 0.0) }
    }

    /// Solve for the DC point that yields the requested `g_m2N` and `C_N`
    /// for the given transistor nonlinearity.
    pub fn back_solve(g_m2: f64, g_m3: f64, target_g_m2n: f64, target_c_n: f64) -> Result<Self> {
        if g_m3 == 0.0 {
            return Err(Error::domain("g_m3", "back-solve needs a nonzero g_m3"));
        }
        let dphi1 = (target_g_m2n - g_m2) / (6.0 * g_m3);
        let slope = 2.0 * g_m2 + 6.0 * g_m3 * dphi1;
        if slope == 0.0 {
            return Err(Error::domain("phi2_dc", "C_N is independent of phi2_dc at this point"));
        }
        Ok(Self::new(target_c_n / slope, dphi1))
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("phi2_dc", self.phi2_dc)?;
        check_finite("dphi1_dc", self.dphi1_dc)
    }
}

/// Thermal-noise drives. Each is the square root of a power spectral density
/// integrated over the effective bandwidth, so currents are in A and the
/// gate-source drive in V.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseDrives {
    pub ig: f64,
    pub id: f64,
    pub ij: f64,
    pub ids: f64,
    pub vi: f64,
    /// I_g - I_j.
    pub igs: f64,
}

/// Noise drives of the gate (R_g), drain (R_ds), gate-drain (R_gd) and
/// gate-source (R_gs) resistors and of the channel.
pub fn compute_noise_drives(t: &TransistorParams, temperature: f64, bandwidth: f64) -> Result<NoiseDrives> {
    for (name, r) in [("R_g", t.r_g), ("R_ds", t.r_ds), ("R_gd", t.r_gd), ("R_gs", t.r_gs)] {
        if !(r > 0.0) {
            return Err(Error::domain(name, format!("resistance must be positive, got {r:e}")));
        }
    }
    if !(temperature >= 0.0) {
        return Err(Error::domain("T", "temperature must be non-negative"));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::domain("delta_f", "bandwidth must be positive"));
    }
    let kt4 = 4.0 * K_B * temperature * bandwidth;
    let ig = (kt4 / t.r_g).sqrt();
    let ij = (kt4 / t.r_gd).sqrt();
    Ok(NoiseDrives {
        ig,
        id: (kt4 / t.r_ds).sqrt(),
        ij,
        ids: (kt4 * t.gamma * t.g_m).sqrt(),
        vi: (kt4 * t.r_gs).sqrt(),
        igs: ig - ij,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub c_a: f64,
    pub c_b: f64,
    pub c_c: f64,
}

pub fn compute_aggregates(t: &TransistorParams, o: &OscillatorParams, s: &SourceParams) -> Aggregates {
    Aggregates { c_a: s.c_in + o.c1 + t.c_gs + s.c_f + t.c_gd, c_b: t.c_gd + s.c_f + o.c2, c_c: s.c_f + t.c_gd }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearDc {
    /// Nonlinear capacitance, F.
    pub c_n: f64,
    /// A/V.
    pub c_n_prime: f64,
    /// Effective second-order transconductance, A/V^2.
    pub g_m2n: f64,
}

pub fn compute_nonlinear_dc_terms(t: &TransistorParams, op: &OperatingPoint) -> NonlinearDc {
    let d = op.dphi1_dc;
    NonlinearDc {
        c_n: 2.0 * t.g_m2 * op.phi2_dc + 6.0 * t.g_m3 * op.phi2_dc * d,
        c_n_prime: 2.0 * t.g_m2 * d + 12.0 * t.g_m3 * d * d,
        g_m2n: t.g_m2 + 6.0 * t.g_m3 * d,
    }
}

/// Coefficients of the linearized Hamiltonian obtained by inverting the
/// capacitance matrix `[C_B, C_C; C_C, C_A + C_N]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearTerms {
    /// C_B (C_A + C_N) - C_C^2, F^2.
    pub c_m2: f64,
    pub inv_cq1: f64,
    pub inv_cq2: f64,
    pub inv_cq1q2: f64,
    /// Inductive correction of the second tank, 1/H.
    pub inv_lp2: f64,
    /// 1/L2 + 1/L_p2.
    pub inv_l2prime: f64,
    pub g12: f64,
    pub g22: f64,
    pub v_q1: f64,
    pub v_q2: f64,
    pub i_p2: f64,
}

pub fn capacitance_determinant(agg: &Aggregates, c_n: f64) -> Result<f64> {
    let c_m2 = agg.c_b * (agg.c_a + c_n) - agg.c_c * agg.c_c;
    if !(c_m2 > 0.0) || !c_m2.is_finite() {
        return Err(Error::SingularCapacitanceMatrix { cm2: c_m2 });
    }
    Ok(c_m2)
}

pub fn compute_linear_terms(
    agg: &Aggregates,
    dc: &NonlinearDc,
    t: &TransistorParams,
    o: &OscillatorParams,
    s: &SourceParams,
    noise: &NoiseDrives,
) -> Result<LinearTerms> {
    let Aggregates { c_a, c_b, c_c } = *agg;
    let c_n = dc.c_n;
    let cnp = dc.c_n_prime;
    let g_m = t.g_m;
    let c_m2 = capacitance_determinant(agg, c_n)?;
    let c_m4 = c_m2 * c_m2;
    // C_N + C_A/2 and C_N + C_A recur in every coefficient.
    let half = c_n + 0.5 * c_a;
    let full = c_n + c_a;
    let cin_vrf = s.c_in * s.v_rf;

    let inv_cq1 = (2.0 * c_b * c_b * half - c_c * c_c * c_b) / c_m4;
    let inv_cq2 = (2.0 * c_c * c_c * half + full * full * c_b - 2.0 * c_c * full * c_b) / c_m4;
    let inv_cq1q2 = (2.0 * c_c * c_b * half + c_c * full * c_b - c_c * c_c * c_b) / c_m4;
    let inv_lp2 = 2.0 * g_m * g_m * c_b * c_b * half / c_m4 + 2.0 * g_m * cnp * c_b / c_m2;
    let g12 = -2.0 * g_m * c_b * c_b * half / c_m4 + cnp * c_b / c_m2 - 3.0 * g_m * c_c * c_c * c_b / (2.0 * c_m4);
    let g22 = -2.0 * g_m * c_b * c_c * half / c_m4 + cnp * c_c / c_m2 + g_m * c_c * c_c * c_c / c_m4
        - g_m * full * c_c * c_b / c_m4;
    let v_q1 = (2.0 * c_b * c_c * cin_vrf * half - c_c * c_c * c_b * cin_vrf) / c_m4;
    let v_q2 = (2.0 * c_b * c_c * cin_vrf * half - c_c * c_c * c_c * cin_vrf) / c_m4;
    let i_p2 = -2.0 * g_m * c_b * c_b * cin_vrf * half / c_m4 + g_m * c_b * c_c * c_c * cin_vrf / c_m4
        - c_b * cnp * cin_vrf / c_m2
        - noise.ids;

    Ok(LinearTerms {
        c_m2,
        inv_cq1,
        inv_cq2,
        inv_cq1q2,
        inv_lp2,
        inv_l2prime: 1.0 / o.l2 + inv_lp2,
        g12,
        g22,
        v_q1,
        v_q2,
        i_p2,
    })
}

/// Linear terms generated by the nonlinear part of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq8Linear {
    pub inv_l2n: f64,
    pub g12n: f64,
    pub g22n: f64,
    pub i_p2n: f64,
}

pub fn compute_eq8_linear_terms(
    agg: &Aggregates,
    dc: &NonlinearDc,
    c_m2: f64,
    t: &TransistorParams,
    s: &SourceParams,
) -> Eq8Linear {
    let Aggregates { c_b, c_c, .. } = *agg;
    let c_m4 = c_m2 * c_m2;
    let k = dc.g_m2n / c_m4;
    let cin_vrf = s.c_in * s.v_rf;
    // The underbraced coefficient is 1/(2 L_2N).
    let half_inv_l2n = -2.0 * t.g_m * c_b * c_b * cin_vrf * k;
    Eq8Linear {
        inv_l2n: 2.0 * half_inv_l2n,
        g12n: 2.0 * c_b * c_b * cin_vrf * k,
        g22n: 2.0 * c_b * c_c * cin_vrf * k,
        i_p2n: c_b * c_b * cin_vrf * cin_vrf * k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeConstants {
    pub z1: f64,
    pub z2: f64,
    pub omega1: f64,
    pub omega2: f64,
}

/// Impedances and frequencies of the two tanks. `inv_l2_eff` is
/// `1/L2' + 1/L_2N`.
pub fn compute_mode_constants(inv_cq1: f64, inv_cq2: f64, l1: f64, inv_l2_eff: f64) -> Result<ModeConstants> {
    let checks = [("1/C_q1", inv_cq1), ("1/C_q2", inv_cq2), ("L1", l1), ("1/L2_eff", inv_l2_eff)];
    for (what, v) in checks {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::DegenerateMode { what, value: v });
        }
    }
    Ok(ModeConstants {
        z1: (l1 * inv_cq1).sqrt(),
        z2: (inv_cq2 / inv_l2_eff).sqrt(),
        omega1: (inv_cq1 / l1).sqrt(),
        omega2: (inv_l2_eff * inv_cq2).sqrt(),
    })
}

/// Cubic couplings of the nonlinear Hamiltonian, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NonlinearCouplings {
    pub g13: f64,
    pub g14: f64,
    pub g15: f64,
    pub g16: f64,
    pub g17: f64,
    pub g18: f64,
}

pub fn compute_g13_g18(agg: &Aggregates, c_m2: f64, g_m2n: f64, g_m: f64, modes: &ModeConstants) -> NonlinearCouplings {
    let Aggregates { c_b, c_c, .. } = *agg;
    let ModeConstants { z1, z2, .. } = *modes;
    let c_m4 = c_m2 * c_m2;
    let q2 = (HBAR / (2.0 * z2)).sqrt();
    let q1 = (HBAR / (2.0 * z1)).sqrt();
    let phi2 = (HBAR * z2 / 2.0).sqrt();
    let bb = g_m2n * c_b * c_b / c_m4;
    let bc = g_m2n * c_b * c_c / c_m4;
    let cc = g_m2n * c_c * c_c / c_m4;
    NonlinearCouplings {
        g13: q2 * bb / (2.0 * z1),
        g14: q2 * cc / (2.0 * z2),
        g15: q2 * bc / (z1 * z2).sqrt(),
        g16: (z2 / 2.0) * phi2 * g_m * g_m * bb,
        g17: z2 * q1 * g_m * bb,
        g18: z2 * q2 * g_m * bc,
    }
}

/// Every derived symbol of the circuit model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoefficients {
    pub c_a: f64,
    pub c_b: f64,
    pub c_c: f64,
    pub c_m2: f64,
    pub c_n: f64,
    pub c_n_prime: f64,
    pub g_m2n: f64,
    pub inv_cq1: f64,
    pub inv_cq2: f64,
    pub inv_cq1q2: f64,
    pub g12: f64,
    pub g22: f64,
    pub g12n: f64,
    pub g22n: f64,
    pub inv_lp2: f64,
    pub inv_l2prime: f64,
    pub inv_l2n: f64,
    pub v_q1: f64,
    pub v_q2: f64,
    pub i_p2: f64,
    pub i_p2n: f64,
    pub z1: f64,
    pub z2: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub g13: f64,
    pub g14: f64,
    pub g15: f64,
    pub g16: f64,
    pub g17: f64,
    pub g18: f64,
    pub noise: NoiseDrives,
}

impl DerivedCoefficients {
    pub fn evaluate(
        t: &TransistorParams,
        o: &OscillatorParams,
        s: &SourceParams,
        op: &OperatingPoint,
        bandwidth: f64,
    ) -> Result<Self> {
        let noise = compute_noise_drives(t, s.temperature, bandwidth)?;
        let agg = compute_aggregates(t, o, s);
        let dc = compute_nonlinear_dc_terms(t, op);
        let a = compute_linear_terms(&agg, &dc, t, o, s, &noise)?;
        let l = compute_eq8_linear_terms(&agg, &dc, a.c_m2, t, s);
        let modes = compute_mode_constants(a.inv_cq1, a.inv_cq2, o.l1, a.inv_l2prime + l.inv_l2n)?;
        let g = compute_g13_g18(&agg, a.c_m2, dc.g_m2n, t.g_m, &modes);
        Ok(Self {
            c_a: agg.c_a,
            c_b: agg.c_b,
            c_c: agg.c_c,
            c_m2: a.c_m2,
            c_n: dc.c_n,
            c_n_prime: dc.c_n_prime,
            g_m2n: dc.g_m2n,
            inv_cq1: a.inv_cq1,
            inv_cq2: a.inv_cq2,
            inv_cq1q2: a.inv_cq1q2,
            g12: a.g12,
            g22: a.g22,
            g12n: l.g12n,
            g22n: l.g22n,
            inv_lp2: a.inv_lp2,
            inv_l2prime: a.inv_l2prime,
            inv_l2n: l.inv_l2n,
            v_q1: a.v_q1,
            v_q2: a.v_q2,
            i_p2: a.i_p2,
            i_p2n: l.i_p2n,
            z1: modes.z1,
            z2: modes.z2,
            omega1: modes.omega1,
            omega2: modes.omega2,
            g13: g.g13,
            g14: g.g14,
            g15: g.g15,
            g16: g.g16,
            g17: g.g17,
            g18: g.g18,
            noise,
        })
    }

    pub fn g12_total(&self) -> f64 {
        self.g12 + self.g12n
    }

    pub fn g22_total(&self) -> f64 {
        self.g22 + self.g22n
    }

    pub fn i_p2_total(&self) -> f64 {
        self.i_p2 + self.i_p2n
    }

    /// 1/L2' + 1/L_2N.
    pub fn inv_l2_eff(&self) -> f64 {
        self.inv_l2prime + self.inv_l2n
    }

    pub fn couplings(&self) -> NonlinearCouplings {
        NonlinearCouplings { g13: self.g13, g14: self.g14, g15: self.g15, g16: self.g16, g17: self.g17, g18: self.g18 }
    }

    /// `(name, value, unit)` for every field, in declaration order.
    pub fn fields(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("C_A", self.c_a, "F"),
            ("C_B", self.c_b, "F"),
            ("C_C", self.c_c, "F"),
            ("C_M2", self.c_m2, "F^2"),
            ("C_N", self.c_n, "F"),
            ("C_Nprime", self.c_n_prime, "A/V"),
            ("g_m2N", self.g_m2n, "A/V^2"),
            ("inv_Cq1", self.inv_cq1, "1/F"),
            ("inv_Cq2", self.inv_cq2, "1/F"),
            ("inv_Cq1q2", self.inv_cq1q2, "1/F"),
            ("g12", self.g12, "1/s"),
            ("g22", self.g22, "1/s"),
            ("g12N", self.g12n, "1/s"),
            ("g22N", self.g22n, "1/s"),
            ("inv_Lp2", self.inv_lp2, "1/H"),
            ("inv_L2prime", self.inv_l2prime, "1/H"),
            ("inv_L2N", self.inv_l2n, "1/H"),
            ("V_q1", self.v_q1, "V"),
            ("V_q2", self.v_q2, "V"),
            ("I_p2", self.i_p2, "A"),
            ("I_p2N", self.i_p2n, "A"),
            ("Z1", self.z1, "Ohm"),
            ("Z2", self.z2, "Ohm"),
            ("omega1", self.omega1, "rad/s"),
            ("omega2", self.omega2, "rad/s"),
            ("g13", self.g13, "rad/s"),
            ("g14", self.g14, "rad/s"),
            ("g15", self.g15, "rad/s"),
            ("g16", self.g16, "rad/s"),
            ("g17", self.g17, "rad/s"),
            ("g18", self.g18, "rad/s"),
            ("Ig2", self.noise.ig, "A"),
            ("Id2", self.noise.id, "A"),
            ("Ij2", self.noise.ij, "A"),
            ("Ids2", self.noise.ids, "A"),
            ("Vi2", self.noise.vi, "V"),
            ("Igs2", self.noise.igs, "A"),
        ]
    }
}

/// Complex squeeze rates, 1/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    pub zeta1: Complex64,
    pub zeta2: Complex64,
    pub zeta_t1: Complex64,
    pub zeta_t2: Complex64,
}

impl SqueezeParams {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self { zeta1: z, zeta2: z, zeta_t1: z, zeta_t2: z }
    }
}

pub fn compute_squeeze_params(c: &DerivedCoefficients, op: &OperatingPoint) -> SqueezeParams {
    let j = Complex64::i();
    let (a1, a2) = (op.a1, op.a2);
    SqueezeParams {
        zeta1: Complex64::new(-0.5 * c.g22_total() + c.g18 * a2.re, c.g14 * a2.im),
        zeta2: 2.0 * a1.conj() * Complex64::new(-c.g17, -c.g15),
        zeta_t1: j * a2 * c.g15,
        zeta_t2: j * a1 * c.g13,
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, "value must be finite"))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v < 0.0 {
        return Err(Error::domain(name, format!("must be non-negative, got {v:e}")));
    }
    Ok(())
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v <= 0.0 {
        return Err(Error::domain(name, format!("must be positive, got {v:e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> (TransistorParams, OscillatorParams, SourceParams) {
        (TransistorParams::cryogenic_inp_hemt(), OscillatorParams::default_5ghz(), SourceParams::reference())
    }

    #[test]
    fn gate_noise_at_5k() {
        let t = TransistorParams::cryogenic_inp_hemt();
        let n = compute_noise_drives(&t, 5.0, 1.0).unwrap();
        let expected = (4.0 * 1.380649e-23 * 5.0 / 0.3f64).sqrt();
        assert_relative_eq!(n.ig, expected, max_relative = 1e-15);
        assert_relative_eq!(n.ig, 3.034e-11, max_relative = 1e-3);
        assert_relative_eq!(n.igs, n.ig - n.ij);
    }

    #[test]
    fn noise_vanishes_at_zero_temperature_and_zero_gm() {
        let mut t = TransistorParams::cryogenic_inp_hemt();
        let n = compute_noise_drives(&t, 0.0, 1.0).unwrap();
        assert_eq!(n, NoiseDrives::default());
        let tiny = compute_noise_drives(&t, 1e-12, 1.0).unwrap();
        assert!(tiny.ig < 1e-16 && tiny.ids < 1e-16);
        t.g_m = 0.0;
        assert_eq!(compute_noise_drives(&t, 5.0, 1.0).unwrap().ids, 0.0);
    }

    #[test]
    fn nonpositive_resistance_is_named() {
        let mut t = TransistorParams::cryogenic_inp_hemt();
        t.r_gd = 0.0;
        match compute_noise_drives(&t, 5.0, 1.0) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "R_gd"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn aggregates_for_reference_values() {
        let (t, o, s) = reference();
        let a = compute_aggregates(&t, &o, &s);
        assert_relative_eq!(a.c_a, 308e-15, max_relative = 1e-12);
        assert_relative_eq!(a.c_b, 139e-15, max_relative = 1e-12);
        assert_relative_eq!(a.c_c, 39e-15, max_relative = 1e-12);
    }

    #[test]
    fn aggregates_degenerate_cases() {
        let (mut t, mut o, mut s) = reference();
        t.c_gs = 0.0;
        t.c_gd = 0.0;
        o.c1 = 0.0;
        o.c2 = 0.0;
        s.c_in = 0.0;
        s.c_f = 0.0;
        let a = compute_aggregates(&t, &o, &s);
        assert_eq!((a.c_a, a.c_b, a.c_c), (0.0, 0.0, 0.0));
        let (mut t, o, mut s) = reference();
        t.c_gd = 0.0;
        s.c_f = 0.0;
        assert_eq!(compute_aggregates(&t, &o, &s).c_c, 0.0);
    }

    #[test]
    fn dc_terms() {
        let t = TransistorParams::cryogenic_inp_hemt();
        let zero = compute_nonlinear_dc_terms(&t, &OperatingPoint::new(0.0, 0.0));
        assert_eq!(zero.c_n, 0.0);
        assert_eq!(zero.c_n_prime, 0.0);
        assert_eq!(zero.g_m2n, t.g_m2);
        let dc = compute_nonlinear_dc_terms(&t, &OperatingPoint::new(0.0, 0.0663));
        assert_relative_eq!(dc.g_m2n, 0.2 + 6.0 * 1.2 * 0.0663, max_relative = 1e-15);
        assert!((dc.g_m2n - 0.677).abs() < 1e-3);
    }

    #[test]
    fn back_solve_hits_targets() {
        let t = TransistorParams::cryogenic_inp_hemt();
        let op = OperatingPoint::back_solve(t.g_m2, t.g_m3, 0.677, 3.3e-12).unwrap();
        let dc = compute_nonlinear_dc_terms(&t, &op);
        assert_relative_eq!(dc.g_m2n, 0.677, max_relative = 1e-14);
        assert_relative_eq!(dc.c_n, 3.3e-12, max_relative = 1e-14);
    }

    #[test]
    fn monotone_in_gm3() {
        let mut t = TransistorParams::cryogenic_inp_hemt();
        let op = OperatingPoint::new(1e-12, 0.05);
        let mut last = f64::NEG_INFINITY;
        for k in 0..20 {
            t.g_m3 = 0.1 * k as f64;
            let g = compute_nonlinear_dc_terms(&t, &op).g_m2n;
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn linear_terms_switched_off() {
        let (mut t, o, mut s) = reference();
        t.g_m = 0.0;
        s.v_rf = 0.0;
        let agg = compute_aggregates(&t, &o, &s);
        let dc = NonlinearDc { c_n: 0.0, c_n_prime: 0.0, g_m2n: t.g_m2 };
        let noise = NoiseDrives { ids: 1e-12, ..Default::default() };
        let a = compute_linear_terms(&agg, &dc, &t, &o, &s, &noise).unwrap();
        assert_eq!((a.g12, a.g22, a.v_q1, a.v_q2), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(a.i_p2, -1e-12);
        let m4 = a.c_m2 * a.c_m2;
        let expect = (2.0 * agg.c_b * agg.c_b * 0.5 * agg.c_a - agg.c_c * agg.c_c * agg.c_b) / m4;
        assert_relative_eq!(a.inv_cq1, expect, max_relative = 1e-14);
    }

    #[test]
    fn linear_terms_decoupled() {
        let (mut t, o, mut s) = reference();
        t.c_gd = 0.0;
        s.c_f = 0.0;
        let agg = compute_aggregates(&t, &o, &s);
        let dc = compute_nonlinear_dc_terms(&t, &OperatingPoint::new(1e-12, 0.05));
        let a = compute_linear_terms(&agg, &dc, &t, &o, &s, &NoiseDrives::default()).unwrap();
        assert_eq!(a.inv_cq1q2, 0.0);
    }

    #[test]
    fn singular_capacitance_matrix() {
        let agg = Aggregates { c_a: 1e-15, c_b: 1e-15, c_c: 1e-15 };
        assert!(matches!(capacitance_determinant(&agg, 0.0), Err(Error::SingularCapacitanceMatrix { .. })));
    }

    #[test]
    fn capacitance_matrix_inverse() {
        let (t, o, s) = reference();
        let op = OperatingPoint::back_solve(0.2, 1.2, 0.677, 3.3e-12).unwrap();
        let agg = compute_aggregates(&t, &o, &s);
        let c_n = compute_nonlinear_dc_terms(&t, &op).c_n;
        let cm2 = capacitance_determinant(&agg, c_n).unwrap();
        let m = nalgebra::Matrix2::new(agg.c_b, agg.c_c, agg.c_c, agg.c_a + c_n);
        assert_eq!(m, m.transpose());
        // Closed-form inverse uses the adjugate over C_M^2.
        let inv = nalgebra::Matrix2::new(agg.c_a + c_n, -agg.c_c, -agg.c_c, agg.c_b) / cm2;
        let id = m * inv;
        assert!((id - nalgebra::Matrix2::identity()).norm() < 1e-12);
    }

    #[test]
    fn eq8_terms_vanish() {
        let (t, o, mut s) = reference();
        let agg = compute_aggregates(&t, &o, &s);
        let dc = NonlinearDc { c_n: 1e-12, c_n_prime: 0.1, g_m2n: 0.0 };
        let l = compute_eq8_linear_terms(&agg, &dc, 1e-25, &t, &s);
        assert_eq!((l.inv_l2n, l.g12n, l.g22n, l.i_p2n), (0.0, 0.0, 0.0, 0.0));
        s.v_rf = 0.0;
        let dc = NonlinearDc { g_m2n: 0.5, ..dc };
        let l = compute_eq8_linear_terms(&agg, &dc, 1e-25, &t, &s);
        assert_eq!((l.inv_l2n, l.g12n, l.g22n, l.i_p2n), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn mode_constants_example() {
        let m = compute_mode_constants(1e12, 1e12, 1e-9, 1e9).unwrap();
        assert_relative_eq!(m.z1, 31.6227766, max_relative = 1e-8);
        assert_relative_eq!(m.omega1, 3.16227766e10, max_relative = 1e-8);
        // Same element values on both sides give the same mode.
        assert_relative_eq!(m.z1, m.z2, max_relative = 1e-15);
        assert_relative_eq!(m.omega1, m.omega2, max_relative = 1e-15);
        assert!(matches!(compute_mode_constants(1e12, 1e12, 1e-9, -1.0), Err(Error::DegenerateMode { .. })));
    }

    #[test]
    fn couplings_vanish_without_nonlinearity_or_cc() {
        let agg = Aggregates { c_a: 3e-13, c_b: 1.4e-13, c_c: 4e-14 };
        let modes = ModeConstants { z1: 50.0, z2: 40.0, omega1: 1e10, omega2: 2e10 };
        assert_eq!(compute_g13_g18(&agg, 4e-26, 0.0, 0.045, &modes), NonlinearCouplings::default());
        let agg = Aggregates { c_c: 0.0, ..agg };
        let g = compute_g13_g18(&agg, 4e-26, 0.677, 0.045, &modes);
        assert_eq!((g.g14, g.g15, g.g18), (0.0, 0.0, 0.0));
        assert!(g.g13 > 0.0 && g.g16 > 0.0 && g.g17 > 0.0);
    }

    #[test]
    fn squeeze_param_examples() {
        let (t, o, s) = reference();
        let op = OperatingPoint::back_solve(0.2, 1.2, 0.677, 3.3e-12).unwrap();
        let mut c = DerivedCoefficients::evaluate(&t, &o, &s, &op, 1.0).unwrap();
        c.g22 = 0.0;
        c.g22n = 0.0;
        let z = compute_squeeze_params(&c, &op);
        assert_eq!(z, SqueezeParams::zero());

        c.g17 = 2.0;
        c.g15 = 3.0;
        c.g14 = 5.0;
        c.g18 = 7.0;
        let mut op2 = op;
        op2.a1 = Complex64::new(1.0, 0.0);
        op2.a2 = Complex64::new(0.0, 1.0);
        let z = compute_squeeze_params(&c, &op2);
        assert_eq!(z.zeta2, Complex64::new(-4.0, -6.0));
        assert_eq!(z.zeta1, Complex64::new(0.0, 5.0));
    }

    #[test]
    fn zero_nonlinearity_collapse() {
        let (mut t, o, s) = reference();
        t.g_m2 = 0.0;
        t.g_m3 = 0.0;
        let op = OperatingPoint::new(3.7e-12, 0.066);
        let c = DerivedCoefficients::evaluate(&t, &o, &s, &op, 1.0).unwrap();
        assert_eq!((c.c_n, c.c_n_prime, c.g_m2n), (0.0, 0.0, 0.0));
        assert_eq!((c.inv_l2n, c.g12n, c.g22n, c.i_p2n), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(c.couplings(), NonlinearCouplings::default());
        let mut op = op;
        op.a1 = Complex64::new(0.3, -0.2);
        op.a2 = Complex64::new(-0.1, 0.4);
        let z = compute_squeeze_params(&c, &op);
        assert_eq!(z.zeta2, Complex64::new(0.0, 0.0));
        assert_eq!(z.zeta_t1, Complex64::new(0.0, 0.0));
        assert_eq!(z.zeta_t2, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn homogeneity_of_dc_terms() {
        // C_N is linear in phi2_dc; C_N' and g_m2N - g_m2 scale with dphi1_dc as declared.
        let t = TransistorParams::cryogenic_inp_hemt();
        let a = compute_nonlinear_dc_terms(&t, &OperatingPoint::new(1e-12, 0.05));
        let b = compute_nonlinear_dc_terms(&t, &OperatingPoint::new(1e-9, 0.05));
        assert_relative_eq!(b.c_n, 1e3 * a.c_n, max_relative = 1e-14);
        let mut tl = t;
        tl.g_m3 = 0.0;
        let a = compute_nonlinear_dc_terms(&tl, &OperatingPoint::new(1e-12, 0.05));
        let b = compute_nonlinear_dc_terms(&tl, &OperatingPoint::new(1e-12, 50.0));
        assert_relative_eq!(b.c_n_prime, 1e3 * a.c_n_prime, max_relative = 1e-14);
    }
}
