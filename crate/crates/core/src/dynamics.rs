//! Steady-state amplitudes, the evolution window and state generation.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::circuit::SqueezeParams;
use crate::error::{Error, Result};
use crate::fock::{annihilation, embed, expm, expm_apply, FockOperator, Mode, QuantumState};
use crate::hamiltonian::{HamiltonianSet, LinearModel, HERMITICITY_TOL};

/// Fraction of the shortest decay time allowed for the evolution window.
pub const DECAY_GUARD: f64 = 0.9;

/// Renormalization factors outside this range mean the exponent was too
/// large for the truncated space.
pub const RENORM_RANGE: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Vacuum,
    Coherent { a1: Complex64, a2: Complex64 },
}

impl InitialState {
    pub fn prepare(&self, cutoff1: usize, cutoff2: usize) -> QuantumState {
        match *self {
            InitialState::Vacuum => QuantumState::vacuum(cutoff1, cutoff2),
            InitialState::Coherent { a1, a2 } => QuantumState::coherent(cutoff1, cutoff2, a1, a2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvolutionPath {
    FullHamiltonian,
    SqueezeOperator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub t0: f64,
    pub initial: InitialState,
    pub path: EvolutionPath,
}

impl EvolutionConfig {
    pub fn validate(&self, kappa1: f64, kappa2: f64) -> Result<()> {
        if !(self.t0 > 0.0) {
            return Err(Error::domain("t0", "evolution window must be positive"));
        }
        let bound = (1.0 / kappa1).min(1.0 / kappa2);
        if self.t0 > bound {
            return Err(Error::domain("t0", format!("{:e} s exceeds the decay time {bound:e} s", self.t0)));
        }
        Ok(())
    }
}

/// Coherent fixed point of `dA_i/dt = -i dH/dA_i* - (kappa_i/2) A_i`.
///
/// `H` is quadratic, so the right-hand side is affine in
/// `(Re A1, Im A1, Re A2, Im A2)`; the terms in `A*` make it a real 4x4
/// system rather than a complex 2x2 one.
pub fn steady_state(model: &LinearModel, kappa1: f64, kappa2: f64) -> Result<(Complex64, Complex64)> {
    if !(kappa1 > 0.0) || !(kappa2 > 0.0) {
        return Err(Error::domain("kappa", "decay rates must be positive"));
    }
    let i = Complex64::i();
    let rhs = |r: &Vector4<f64>| -> Vector4<f64> {
        let a1 = Complex64::new(r[0], r[1]);
        let a2 = Complex64::new(r[2], r[3]);
        let (g1, g2) = model.gradient(a1, a2);
        let f1 = -i * g1 - 0.5 * kappa1 * a1;
        let f2 = -i * g2 - 0.5 * kappa2 * a2;
        Vector4::new(f1.re, f1.im, f2.re, f2.im)
    };
    let f0 = rhs(&Vector4::zeros());
    let mut jac = Matrix4::zeros();
    for k in 0..4 {
        let mut e = Vector4::zeros();
        e[k] = 1.0;
        jac.set_column(k, &(rhs(&e) - f0));
    }
    // Rescale rows so the singularity test is independent of units.
    let scale = jac.abs().max();
    if scale == 0.0 {
        return Err(Error::SingularSteadyState);
    }
    let lu = (jac / scale).lu();
    if lu.determinant().abs() < 1e-24 {
        return Err(Error::SingularSteadyState);
    }
    let r = lu.solve(&(-f0 / scale)).ok_or(Error::SingularSteadyState)?;
    Ok((Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])))
}

/// `min(settling, 0.9/kappa1, 0.9/kappa2)`.
pub fn select_t0(kappa1: f64, kappa2: f64, settling: Option<f64>) -> f64 {
    let decay = (DECAY_GUARD / kappa1).min(DECAY_GUARD / kappa2);
    match settling {
        Some(s) if s.is_finite() && s > 0.0 => s.min(decay),
        _ => decay,
    }
}

/// `exp(-i H t) psi` for Hermitian `H`, via its eigendecomposition.
pub fn evolve(h: &FockOperator, t: f64, initial: &QuantumState) -> Result<QuantumState> {
    if initial.cutoffs() != h.cutoffs() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: initial.dim() });
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NonHermitian { defect });
    }
    let eig = SymmetricEigen::new(h.matrix().clone());
    let v = &eig.eigenvectors;
    let mut coeffs = v.ad_mul(initial.amplitudes());
    for (c, lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        *c *= Complex64::from_polar(1.0, -lambda * t);
    }
    let (c1, c2) = h.cutoffs();
    let out = QuantumState::from_vector(c1, c2, v * coeffs);
    if (out.norm() - initial.norm()).abs() > 1e-9 * initial.norm().max(1.0) {
        return Err(Error::domain("evolve", format!("norm drifted to {}", out.norm())));
    }
    Ok(out)
}

/// Evolve the prepared initial state under the total Hamiltonian for `cfg.t0`.
pub fn evolve_set(set: &HamiltonianSet, cfg: &EvolutionConfig) -> Result<QuantumState> {
    let (c1, c2) = set.total.cutoffs();
    evolve(&set.total, cfg.t0, &cfg.initial.prepare(c1, c2))
}

/// State produced by one of the closed-form squeeze operators.
#[derive(Debug, Clone)]
pub struct SqueezeOutcome {
    pub state: QuantumState,
    /// Norm of `exp(M) psi` before renormalization.
    pub renorm_factor: f64,
    pub warning: Option<String>,
}

/// Lowering operator of `mode` on the space of `state`.
fn lowering_on(state: &QuantumState, mode: Mode) -> Result<FockOperator> {
    let (c1, c2) = state.cutoffs();
    if c2 == 0 {
        return annihilation(c1);
    }
    match mode {
        Mode::One => embed(&annihilation(c1)?, Mode::One, c2),
        Mode::Two => embed(&annihilation(c2)?, Mode::Two, c1),
    }
}

fn exponentiate(m: &FockOperator, initial: &QuantumState) -> Result<SqueezeOutcome> {
    let raw = if m.dim() <= 200 { expm(m)?.apply(initial)? } else { expm_apply(m, initial)? };
    let factor = raw.norm() / initial.norm();
    let warning = if factor < RENORM_RANGE.0 || factor > RENORM_RANGE.1 || !factor.is_finite() {
        Some(format!("renormalization factor {factor:.3e} outside [0.5, 2]"))
    } else {
        None
    };
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(Error::Overflow);
    }
    Ok(SqueezeOutcome { state: raw.normalized(), renorm_factor: factor, warning })
}

/// Exponent `[zeta1 (a2^2 - a2+^2) + zeta2*/2 a2^2 - zeta2/2 a2+^2] t0` on
/// mode 2 of the state's space (a single-mode state is taken to be mode 2).
pub fn single_mode_squeeze_exponent(sp: &SqueezeParams, t0: f64, space: &QuantumState) -> Result<FockOperator> {
    let a = lowering_on(space, Mode::Two)?;
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    let ca = (sp.zeta1 + 0.5 * sp.zeta2.conj()) * t0;
    let cad = -(sp.zeta1 + 0.5 * sp.zeta2) * t0;
    Ok(&a2.scale(ca) + &ad2.scale(cad))
}

/// Exponent `[(zt1 + zt2)*/2 a1 a2 - (zt1 + zt2)/2 a1+ a2+] t0`.
pub fn two_mode_squeeze_exponent(sp: &SqueezeParams, t0: f64, space: &QuantumState) -> Result<FockOperator> {
    if !space.is_two_mode() {
        return Err(Error::domain("state", "two-mode squeezing needs a two-mode state"));
    }
    let a1 = lowering_on(space, Mode::One)?;
    let a2 = lowering_on(space, Mode::Two)?;
    let pair = &a1 * &a2;
    let total = sp.zeta_t1 + sp.zeta_t2;
    Ok(&pair.scale(0.5 * total.conj() * t0) - &pair.adjoint().scale(0.5 * total * t0))
}

pub fn apply_single_mode_squeeze(sp: &SqueezeParams, t0: f64, initial: &QuantumState) -> Result<SqueezeOutcome> {
    check_squeeze_inputs(t0, &[sp.zeta1, sp.zeta2])?;
    let m = single_mode_squeeze_exponent(sp, t0, initial)?;
    exponentiate(&m, initial)
}

pub fn apply_two_mode_squeeze(sp: &SqueezeParams, t0: f64, initial: &QuantumState) -> Result<SqueezeOutcome> {
    check_squeeze_inputs(t0, &[sp.zeta_t1, sp.zeta_t2])?;
    let m = two_mode_squeeze_exponent(sp, t0, initial)?;
    exponentiate(&m, initial)
}

fn check_squeeze_inputs(t0: f64, zetas: &[Complex64]) -> Result<()> {
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::domain("t0", "must be positive and finite"));
    }
    if zetas.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain("zeta", "squeeze parameters must be finite"));
    }
    Ok(())
}

/// Unitary `exp(-i H t)` as a matrix, for diagnostics.
pub fn propagator(h: &FockOperator, t: f64) -> Result<FockOperator> {
    let eig = SymmetricEigen::new(h.matrix().clone());
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * t)));
    let u = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
    let (c1, c2) = h.cutoffs();
    FockOperator::from_matrix(c1, c2, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn steady_state_without_drive_is_zero() {
        let mut m = LinearModel::bare(1.0, 1.3);
        m.c12 = 0.1;
        m.h22 = 0.05;
        let (a1, a2) = steady_state(&m, 0.01, 0.02).unwrap();
        assert_eq!((a1, a2), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn resonant_single_mode_drive() {
        // Drive frame with zero detuning: 0 = eps - kappa/2 A.
        let mut m = LinearModel::bare(0.0, 0.0);
        m.v1 = 1.0;
        let (a1, _) = steady_state(&m, 0.002, 1.0).unwrap();
        assert!((a1.norm() - 1000.0).abs() < 1e-9);
        assert!((a1 - c(1000.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn decoupled_modes_solve_independently() {
        let mut both = LinearModel::bare(1.0, 2.0);
        both.v1 = 0.3;
        both.q1 = 0.1;
        both.p2 = -0.2;
        both.v2 = 0.05;
        let (a1, a2) = steady_state(&both, 0.1, 0.2).unwrap();
        // Single-mode closed forms: A = -i g / (i w + k/2) with g the constant gradient.
        let g1 = c(0.0, both.v1) - both.q1;
        let g2 = c(0.0, both.v2) + both.p2;
        let want1 = -Complex64::i() * g1 / (Complex64::i() * 1.0 + 0.05);
        let want2 = -Complex64::i() * g2 / (Complex64::i() * 2.0 + 0.1);
        assert!((a1 - want1).norm() < 1e-14);
        assert!((a2 - want2).norm() < 1e-14);
    }

    #[test]
    fn steady_state_zeroes_the_drift() {
        let model = LinearModel {
            omega1: 1.0,
            omega2: 1.4,
            c12: 0.1,
            h12: 0.2,
            h22: 0.3,
            v1: 0.5,
            v2: -0.2,
            p2: 0.7,
            q1: -0.1,
            offset: 0.0,
        };
        let (a1, a2) = steady_state(&model, 0.05, 0.08).unwrap();
        let (g1, g2) = model.gradient(a1, a2);
        let r1 = -Complex64::i() * g1 - 0.025 * a1;
        let r2 = -Complex64::i() * g2 - 0.04 * a2;
        assert!(r1.norm() < 1e-12 && r2.norm() < 1e-12);
    }

    #[test]
    fn singular_steady_state() {
        let mut m = LinearModel::bare(0.0, 0.0);
        m.v1 = 1.0;
        assert!(matches!(steady_state(&m, 1e-300, 1e-300), Err(Error::SingularSteadyState)));
    }

    #[test]
    fn t0_selection() {
        assert!((select_t0(1e7, 1e7, None) - 9e-8).abs() < 1e-20);
        let k = 1.0 / 200e-9;
        assert_eq!(select_t0(k, k, Some(80e-9)), 80e-9);
        assert_eq!(select_t0(1e6, 4e6, None), 0.9 / 4e6);
        assert_eq!(select_t0(1e6, 4e6, Some(f64::INFINITY)), 0.9 / 4e6);
        for (k1, k2) in [(1.0, 2.0), (3e7, 1e5), (0.5, 0.5)] {
            assert!(select_t0(k1, k2, None) < (1.0 / k1).min(1.0 / k2));
        }
    }

    #[test]
    fn config_validation() {
        let cfg = EvolutionConfig { t0: 1e-6, initial: InitialState::Vacuum, path: EvolutionPath::FullHamiltonian };
        assert!(cfg.validate(1e5, 1e5).is_ok());
        assert!(cfg.validate(1e7, 1e5).is_err());
        let bad = EvolutionConfig { t0: 0.0, ..cfg };
        assert!(bad.validate(1.0, 1.0).is_err());
    }

    #[test]
    fn bare_evolution_keeps_vacuum() {
        let h = LinearModel::bare(2.0, 3.0).to_operator(6, 6).unwrap();
        let psi = evolve(&h, 1.7, &QuantumState::vacuum(6, 6)).unwrap();
        let overlap = QuantumState::vacuum(6, 6).inner(&psi);
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_squeeze_is_identity() {
        let psi = QuantumState::coherent(8, 8, c(0.2, 0.1), c(-0.3, 0.2));
        let out = apply_single_mode_squeeze(&SqueezeParams::zero(), 1e-8, &psi).unwrap();
        assert!((out.state.amplitudes() - psi.amplitudes()).norm() < 1e-14);
        let out = apply_two_mode_squeeze(&SqueezeParams::zero(), 1e-8, &psi).unwrap();
        assert!((out.state.amplitudes() - psi.amplitudes()).norm() < 1e-14);
        assert!((out.renorm_factor - 1.0).abs() < 1e-14);
        assert!(out.warning.is_none());
    }

    #[test]
    fn two_mode_squeeze_rejects_single_mode_state() {
        let mut sp = SqueezeParams::zero();
        sp.zeta_t1 = c(1.0, 0.0);
        assert!(apply_two_mode_squeeze(&sp, 1.0, &QuantumState::vacuum(10, 0)).is_err());
    }

    #[test]
    fn non_unitary_exponent_is_renormalized() {
        let mut sp = SqueezeParams::zero();
        sp.zeta1 = c(0.0, 0.4);
        let out = apply_single_mode_squeeze(&sp, 1.0, &QuantumState::vacuum(30, 0)).unwrap();
        assert!((out.state.norm() - 1.0).abs() < 1e-12);
        assert!((out.renorm_factor - 1.0).abs() > 1e-3);
    }

    #[test]
    fn propagator_is_unitary() {
        let mut m = LinearModel::bare(1.0, 1.7);
        m.c12 = 0.2;
        m.h22 = 0.1;
        m.v1 = 0.3;
        let h = m.to_operator(8, 8).unwrap();
        let u = propagator(&h, 2.3).unwrap();
        let e = &(&u.adjoint() * &u) - &FockOperator::identity(8, 8);
        assert!(e.frobenius_norm() < 1e-9);
        let psi = QuantumState::vacuum(8, 8);
        let a = evolve(&h, 2.3, &psi).unwrap();
        let b = u.apply(&psi).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-12);
    }
}
