//! Invariant suite behind the `check` command.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::SqueezeParams;
use crate::circuit::{compute_squeeze_params, DerivedCoefficients, OperatingPoint, OscillatorParams};
use crate::config::CircuitConfig;
use crate::dynamics::{apply_single_mode_squeeze, apply_two_mode_squeeze, propagator, select_t0};
use crate::fock::{FockOperator, Mode, QuantumState};
use crate::hamiltonian::{build, LinearModel, HERMITICITY_TOL};
use crate::observables::{epr_variance, Moments};
use crate::oracle::{exact_comparison, max_rel_error};
use crate::sweep::{evaluate_point, PathSelection};

pub const RANDOM_SETS: usize = 100;
pub const SEED: u64 = 0x5eed_c0ef;
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn failure(name: &'static str, err: impl std::fmt::Display) -> CheckResult {
    result(name, false, format!("error: {err}"))
}

fn default_parts() -> crate::Result<(CircuitConfig, DerivedCoefficients, LinearModel)> {
    let cfg = CircuitConfig::default();
    let c = cfg.coefficients()?;
    let m = LinearModel::from_coefficients(&c, cfg.source.c_in, cfg.source.v_rf, cfg.transistor.c_gs);
    Ok((cfg, c, m))
}

pub fn check_hermiticity() -> CheckResult {
    let name = "hermiticity";
    let run = || -> crate::Result<CheckResult> {
        let (_, c, m) = default_parts()?;
        let set = build(&m, &c.couplings(), 10, 20)?;
        let h = set.hermiticity;
        let ok = h.linear <= HERMITICITY_TOL && h.total <= HERMITICITY_TOL && h.nonlinear <= HERMITICITY_TOL;
        Ok(result(
            name,
            ok,
            format!(
                "linear {:.2e}, nonlinear {:.2e} (raw {:.2e}), total {:.2e}",
                h.linear, h.nonlinear, h.nonlinear_raw, h.total
            ),
        ))
    };
    run().unwrap_or_else(|e| failure(name, e))
}

pub fn check_unitarity() -> CheckResult {
    let name = "unitarity";
    let run = || -> crate::Result<CheckResult> {
        let (cfg, c, m) = default_parts()?;
        let (k1, k2) = cfg.oscillator()?.decay.resolve(c.omega1, c.omega2);
        let set = build(&m, &c.couplings(), 8, 15)?;
        let u = propagator(&set.total, select_t0(k1, k2, None))?;
        let (c1, c2) = u.cutoffs();
        let defect = (&(&u.adjoint() * &u) - &FockOperator::identity(c1, c2)).frobenius_norm();
        Ok(result(name, defect < 1e-9, format!("|U+U - 1|_F = {defect:.2e}")))
    };
    run().unwrap_or_else(|e| failure(name, e))
}

/// Robertson-Schroedinger bound `var_min * var_max >= 1/16` on every mode
/// of a set of produced states.
pub fn check_uncertainty() -> CheckResult {
    let name = "uncertainty";
    let run = || -> crate::Result<CheckResult> {
        let mut states = Vec::new();
        for g_m in [0.01, 0.045, 0.1] {
            let mut cfg = CircuitConfig::default();
            cfg.transistor.g_m = g_m;
            cfg.cutoff2 = 25;
            if let Some(f) = evaluate_point(&cfg, PathSelection::Full)?.full {
                states.push(f.state);
            }
        }
        let mut sp = SqueezeParams::zero();
        sp.zeta1 = Complex64::new(0.3, 0.0);
        sp.zeta2 = Complex64::new(0.1, 0.2);
        sp.zeta_t1 = Complex64::new(0.4, 0.1);
        states.push(apply_single_mode_squeeze(&sp, 1.0, &QuantumState::vacuum(50, 0))?.state);
        states.push(apply_two_mode_squeeze(&sp, 1.0, &QuantumState::vacuum(20, 20))?.state);
        let mut worst = f64::INFINITY;
        for s in &states {
            let modes: &[Mode] = if s.is_two_mode() { &[Mode::One, Mode::Two] } else { &[Mode::One] };
            for &mode in modes {
                let m = Moments::of(s, mode);
                worst = worst.min(m.var_min() * m.var_max());
            }
        }
        Ok(result(name, worst >= 1.0 / 16.0 - 1e-9, format!("{} states, smallest product {worst:.9}", states.len())))
    };
    run().unwrap_or_else(|e| failure(name, e))
}

pub fn check_zero_nonlinearity() -> CheckResult {
    let name = "zero-nonlinearity collapse";
    let run = || -> crate::Result<CheckResult> {
        let mut cfg = CircuitConfig::parse("g_m2 = 0\ng_m3 = 0")?;
        cfg.cutoff2 = 20;
        let p = evaluate_point(&cfg, PathSelection::Squeeze)?;
        let c = &p.coeffs;
        let z = Complex64::new(0.0, 0.0);
        let reals =
            [c.c_n, c.c_n_prime, c.g_m2n, c.inv_l2n, c.g12n, c.g22n, c.i_p2n, c.g13, c.g14, c.g15, c.g16, c.g17, c.g18];
        let ok = reals.iter().all(|&x| x == 0.0)
            && [p.squeeze.zeta2, p.squeeze.zeta_t1, p.squeeze.zeta_t2].iter().all(|&x| x == z);
        Ok(result(name, ok, format!("largest remnant {:e}", reals.iter().fold(0.0f64, |a, x| a.max(x.abs())))))
    };
    run().unwrap_or_else(|e| failure(name, e))
}

pub fn check_convergence() -> CheckResult {
    let name = "cutoff convergence";
    let run = || -> crate::Result<CheckResult> {
        let p = evaluate_point(&CircuitConfig::default(), PathSelection::Full)?;
        let f = p.full.ok_or(crate::Error::domain("path", "full path missing"))?;
        Ok(result(name, f.converged, format!("mode-2 cutoff {}", f.cutoff)))
    };
    run().unwrap_or_else(|e| failure(name, e))
}

pub fn check_squeeze_oracles() -> CheckResult {
    let name = "squeeze oracles";
    let run = || -> crate::Result<CheckResult> {
        let r: f64 = 0.5;
        let mut sp = SqueezeParams::zero();
        sp.zeta2 = Complex64::new(r, 0.0);
        let s = apply_single_mode_squeeze(&sp, 1.0, &QuantumState::vacuum(60, 0))?.state;
        let single = (Moments::of(&s, Mode::One).var_min() - (-2.0 * r).exp() / 4.0).abs();
        let mut sp = SqueezeParams::zero();
        sp.zeta_t1 = Complex64::new(0.3, 0.0);
        sp.zeta_t2 = Complex64::new(0.3, 0.0);
        let s = apply_two_mode_squeeze(&sp, 1.0, &QuantumState::vacuum(25, 25))?.state;
        let epr = (epr_variance(&s)? - (-0.6f64).exp()).abs();
        Ok(result(name, single < 1e-6 && epr < 1e-6, format!("single-mode {single:.1e}, EPR {epr:.1e}")))
    };
    run().unwrap_or_else(|e| failure(name, e))
}

pub fn check_t0_contract() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let ok = (0..1000).all(|_| {
        let k1 = 10f64.powf(rng.gen_range(3.0..10.0));
        let k2 = 10f64.powf(rng.gen_range(3.0..10.0));
        let s = if rng.gen_bool(0.5) { Some(rng.gen_range(0.0..2.0) / k1.min(k2)) } else { None };
        select_t0(k1, k2, s) < (1.0 / k1).min(1.0 / k2)
    });
    result("t0 contract", ok, "1000 random decay pairs".into())
}

fn scaled(rng: &mut ChaCha8Rng, x: f64) -> f64 {
    x * rng.gen_range(0.5..1.5)
}

/// One random but physical parameter set, or `None` if it lands on a
/// degenerate circuit.
fn random_point(rng: &mut ChaCha8Rng) -> Option<(CircuitConfig, DerivedCoefficients)> {
    let mut cfg = CircuitConfig::default();
    let t = &mut cfg.transistor;
    t.g_m = rng.gen_range(5e-3..0.15);
    t.g_m2 = rng.gen_range(0.05..0.4);
    t.g_m3 = rng.gen_range(0.3..2.4);
    t.c_gs = scaled(rng, t.c_gs);
    t.c_gd = scaled(rng, t.c_gd);
    t.r_g = scaled(rng, t.r_g);
    t.r_gs = scaled(rng, t.r_gs);
    t.r_gd = scaled(rng, t.r_gd);
    t.r_ds = scaled(rng, t.r_ds);
    let o: &mut OscillatorParams = &mut cfg.oscillator;
    o.l1 = scaled(rng, o.l1);
    o.l2 = scaled(rng, o.l2);
    o.c1 = scaled(rng, o.c1);
    o.c2 = scaled(rng, o.c2);
    cfg.source.c_in = scaled(rng, cfg.source.c_in);
    cfg.source.c_f = scaled(rng, cfg.source.c_f);
    cfg.source.v_rf = 10f64.powf(rng.gen_range(-7.0..-5.0));
    let op = OperatingPoint::back_solve(
        cfg.transistor.g_m2,
        cfg.transistor.g_m3,
        rng.gen_range(0.3..1.0),
        rng.gen_range(1e-12..5e-12),
    )
    .ok()?;
    cfg.phi2_dc = op.phi2_dc;
    cfg.dphi1_dc = op.dphi1_dc;
    let osc = cfg.oscillator().ok()?;
    let c = DerivedCoefficients::evaluate(&cfg.transistor, &osc, &cfg.source, &op, cfg.bandwidth).ok()?;
    Some((cfg, c))
}

pub fn check_exact_agreement() -> CheckResult {
    let name = "exact-arithmetic agreement";
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = (0.0, "");
    let mut done = 0;
    let mut rejected = 0;
    while done < RANDOM_SETS {
        let Some((cfg, c)) = random_point(&mut rng) else {
            rejected += 1;
            if rejected > 10 * RANDOM_SETS {
                return result(name, false, "could not draw enough valid parameter sets".into());
            }
            continue;
        };
        let osc = cfg.oscillator().expect("validated above");
        match exact_comparison(&c, &cfg.transistor, &osc, &cfg.source, &cfg.operating_point()) {
            Ok(rows) => {
                let m = max_rel_error(&rows);
                if m.0 > worst.0 || m.0.is_nan() {
                    worst = m;
                }
            }
            Err(e) => return failure(name, e),
        }
        done += 1;
    }
    result(
        name,
        worst.0 <= EXACT_TOL,
        format!("{done} sets ({rejected} degenerate draws skipped), worst {:.2e} on {}", worst.0, worst.1),
    )
}

/// Squeeze parameters vanish when both the nonlinear transconductance and
/// the total `g22` do.
pub fn check_squeeze_zero() -> CheckResult {
    let name = "squeeze parameters vanish";
    let run = || -> crate::Result<CheckResult> {
        let (_, mut c, _) = default_parts()?;
        c.g13 = 0.0;
        c.g14 = 0.0;
        c.g15 = 0.0;
        c.g17 = 0.0;
        c.g18 = 0.0;
        c.g22 = 0.0;
        c.g22n = 0.0;
        let mut op = OperatingPoint::new(0.0, 0.0);
        op.a1 = Complex64::new(0.3, -0.2);
        op.a2 = Complex64::new(-0.1, 0.5);
        let sp = compute_squeeze_params(&c, &op);
        let largest = [sp.zeta1, sp.zeta2, sp.zeta_t1, sp.zeta_t2].iter().fold(0.0f64, |a, z| a.max(z.norm()));
        Ok(result(name, sp == SqueezeParams::zero(), format!("largest |zeta| {largest:e}")))
    };
    run().unwrap_or_else(|e| failure(name, e))
}

pub fn run_all() -> Vec<CheckResult> {
    vec![
        check_hermiticity(),
        check_unitarity(),
        check_uncertainty(),
        check_zero_nonlinearity(),
        check_squeeze_zero(),
        check_convergence(),
        check_squeeze_oracles(),
        check_t0_contract(),
        check_exact_agreement(),
    ]
}
