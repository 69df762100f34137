//! Exact rational re-evaluation of the closed-form circuit coefficients.
//!
//! Every input is converted to the rational number it represents exactly,
//! so the only rounding left is the final conversion back to `f64`. The
//! square roots in the mode constants are taken from the `f64` path and
//! treated as exact inputs; everything rational around them is recomputed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::circuit::{DerivedCoefficients, OperatingPoint, OscillatorParams, SourceParams, TransistorParams};
use crate::constants::HBAR;
use crate::error::{Error, Result};

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// One coefficient from both evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: &'static str,
    pub value: f64,
    pub exact: f64,
    pub rel_error: f64,
}

fn compare(name: &'static str, value: f64, exact: &BigRational) -> Comparison {
    let e = exact.to_f64().unwrap_or(f64::NAN);
    let rel_error = if exact.is_zero() {
        value.abs()
    } else {
        // Error measured against the exact value, not its rounded image.
        let diff = (q(value) - exact) / exact;
        diff.to_f64().unwrap_or(f64::INFINITY).abs()
    };
    Comparison { name, value, exact: e, rel_error }
}

/// Recompute the aggregates, nonlinear DC terms, inverse-capacitance and
/// drive coefficients, nonlinear linear terms and cubic couplings exactly,
/// and compare each with `coeffs`.
pub fn exact_comparison(
    coeffs: &DerivedCoefficients,
    t: &TransistorParams,
    o: &OscillatorParams,
    s: &SourceParams,
    op: &OperatingPoint,
) -> Result<Vec<Comparison>> {
    let (c_in, c_f, v_rf) = (q(s.c_in), q(s.c_f), q(s.v_rf));
    let (c1, c2, l2) = (q(o.c1), q(o.c2), q(o.l2));
    let (c_gs, c_gd) = (q(t.c_gs), q(t.c_gd));
    let (g_m, g_m2, g_m3) = (q(t.g_m), q(t.g_m2), q(t.g_m3));
    let (phi2, d) = (q(op.phi2_dc), q(op.dphi1_dc));
    let two = int(2);

    let c_a = &c_in + &c1 + &c_gs + &c_f + &c_gd;
    let c_b = &c_gd + &c_f + &c2;
    let c_c = &c_f + &c_gd;

    let c_n = &two * &g_m2 * &phi2 + int(6) * &g_m3 * &phi2 * &d;
    let cnp = &two * &g_m2 * &d + int(12) * &g_m3 * &d * &d;
    let g_m2n = &g_m2 + int(6) * &g_m3 * &d;

    let c_m2 = &c_b * (&c_a + &c_n) - &c_c * &c_c;
    if c_m2 <= BigRational::zero() {
        return Err(Error::SingularCapacitanceMatrix { cm2: c_m2.to_f64().unwrap_or(f64::NAN) });
    }
    let c_m4 = &c_m2 * &c_m2;
    let half = &c_n + &c_a / &two;
    let full = &c_n + &c_a;
    let cin_vrf = &c_in * &v_rf;
    let ids = q(coeffs.noise.ids);

    let inv_cq1 = (&two * &c_b * &c_b * &half - &c_c * &c_c * &c_b) / &c_m4;
    let inv_cq2 = (&two * &c_c * &c_c * &half + &full * &full * &c_b - &two * &c_c * &full * &c_b) / &c_m4;
    let inv_cq1q2 = (&two * &c_c * &c_b * &half + &c_c * &full * &c_b - &c_c * &c_c * &c_b) / &c_m4;
    let inv_lp2 = &two * &g_m * &g_m * &c_b * &c_b * &half / &c_m4 + &two * &g_m * &cnp * &c_b / &c_m2;
    let g12 = -(&two * &g_m * &c_b * &c_b * &half) / &c_m4 + &cnp * &c_b / &c_m2
        - int(3) * &g_m * &c_c * &c_c * &c_b / (&two * &c_m4);
    let g22 = -(&two * &g_m * &c_b * &c_c * &half) / &c_m4 + &cnp * &c_c / &c_m2 + &g_m * &c_c * &c_c * &c_c / &c_m4
        - &g_m * &full * &c_c * &c_b / &c_m4;
    let v_q1 = (&two * &c_b * &c_c * &cin_vrf * &half - &c_c * &c_c * &c_b * &cin_vrf) / &c_m4;
    let v_q2 = (&two * &c_b * &c_c * &cin_vrf * &half - &c_c * &c_c * &c_c * &cin_vrf) / &c_m4;
    let i_p2 = -(&two * &g_m * &c_b * &c_b * &cin_vrf * &half) / &c_m4 + &g_m * &c_b * &c_c * &c_c * &cin_vrf / &c_m4
        - &c_b * &cnp * &cin_vrf / &c_m2
        - &ids;

    let k = &g_m2n / &c_m4;
    let inv_l2n = -int(4) * &g_m * &c_b * &c_b * &cin_vrf * &k;
    let g12n = &two * &c_b * &c_b * &cin_vrf * &k;
    let g22n = &two * &c_b * &c_c * &cin_vrf * &k;
    let i_p2n = &c_b * &c_b * &cin_vrf * &cin_vrf * &k;

    let (z1, z2) = (q(coeffs.z1), q(coeffs.z2));
    let q2 = q((HBAR / (2.0 * coeffs.z2)).sqrt());
    let q1 = q((HBAR / (2.0 * coeffs.z1)).sqrt());
    let phi_zpf = q((HBAR * coeffs.z2 / 2.0).sqrt());
    let sqrt_z1z2 = q((coeffs.z1 * coeffs.z2).sqrt());
    let bb = &g_m2n * &c_b * &c_b / &c_m4;
    let bc = &g_m2n * &c_b * &c_c / &c_m4;
    let cc = &g_m2n * &c_c * &c_c / &c_m4;
    let g13 = &q2 * &bb / (&two * &z1);
    let g14 = &q2 * &cc / (&two * &z2);
    let g15 = &q2 * &bc / &sqrt_z1z2;
    let g16 = &z2 / &two * &phi_zpf * &g_m * &g_m * &bb;
    let g17 = &z2 * &q1 * &g_m * &bb;
    let g18 = &z2 * &q2 * &g_m * &bc;

    let c = coeffs;
    Ok(vec![
        compare("C_A", c.c_a, &c_a),
        compare("C_B", c.c_b, &c_b),
        compare("C_C", c.c_c, &c_c),
        compare("C_N", c.c_n, &c_n),
        compare("C_N'", c.c_n_prime, &cnp),
        compare("g_m2N", c.g_m2n, &g_m2n),
        compare("C_M^2", c.c_m2, &c_m2),
        compare("1/C_q1", c.inv_cq1, &inv_cq1),
        compare("1/C_q2", c.inv_cq2, &inv_cq2),
        compare("1/C_q1q2", c.inv_cq1q2, &inv_cq1q2),
        compare("1/L_p2", c.inv_lp2, &inv_lp2),
        compare("1/L2'", c.inv_l2prime, &(&inv_lp2 + int(1) / &l2)),
        compare("g12", c.g12, &g12),
        compare("g22", c.g22, &g22),
        compare("V_q1", c.v_q1, &v_q1),
        compare("V_q2", c.v_q2, &v_q2),
        compare("I_p2", c.i_p2, &i_p2),
        compare("1/L_2N", c.inv_l2n, &inv_l2n),
        compare("g12N", c.g12n, &g12n),
        compare("g22N", c.g22n, &g22n),
        compare("I_p2N", c.i_p2n, &i_p2n),
        compare("g13", c.g13, &g13),
        compare("g14", c.g14, &g14),
        compare("g15", c.g15, &g15),
        compare("g16", c.g16, &g16),
        compare("g17", c.g17, &g17),
        compare("g18", c.g18, &g18),
    ])
}

/// Largest relative error over all compared coefficients.
pub fn max_rel_error(rows: &[Comparison]) -> (f64, &'static str) {
    rows.iter()
        .map(|c| (c.rel_error, c.name))
        .fold((0.0, ""), |acc, x| if x.0 > acc.0 || x.0.is_nan() { x } else { acc })
}
