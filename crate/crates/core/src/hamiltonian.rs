//! Ladder-operator Hamiltonians of the coupled oscillators (hbar = 1, rad/s).

use num_complex::Complex64;

use crate::circuit::{DerivedCoefficients, NonlinearCouplings};
use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::fock::{annihilation, number, FockOperator};

/// Relative Hermiticity defect above which an operator is rejected or symmetrized.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Coefficients of the quadratic Hamiltonian, all in rad/s:
///
/// ```text
/// H = w1 (n1 + 1/2) + w2 (n2 + 1/2)
///     - c12 (a1 - a1+)(a2 - a2+) - i h12 (a1 - a1+)(a2 + a2+) - i h22 (a2^2 - a2+^2)
///     - i v1 (a1 - a1+) - i v2 (a2 - a2+) + p2 (a2 + a2+) - q1 (a1 + a1+) + offset
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModel {
    pub omega1: f64,
    pub omega2: f64,
    pub c12: f64,
    pub h12: f64,
    pub h22: f64,
    pub v1: f64,
    pub v2: f64,
    pub p2: f64,
    pub q1: f64,
    pub offset: f64,
}

impl LinearModel {
    pub fn from_coefficients(c: &DerivedCoefficients, c_in: f64, v_rf: f64, c_gs: f64) -> Self {
        Self {
            omega1: c.omega1,
            omega2: c.omega2,
            c12: c.inv_cq1q2 / (2.0 * (c.z1 * c.z2).sqrt()),
            h12: 0.5 * c.g12_total() * (c.z2 / c.z1).sqrt(),
            // Q2 phi2 is Weyl-ordered, which drops the c-number part of (a - a+)(a + a+).
            h22: 0.5 * c.g22_total(),
            v1: c.v_q1 / (2.0 * HBAR * c.z1).sqrt(),
            v2: c.v_q2 / (2.0 * HBAR * c.z2).sqrt(),
            p2: c.i_p2_total() * (c.z2 / (2.0 * HBAR)).sqrt(),
            q1: c.noise.igs * (c.z1 / (2.0 * HBAR)).sqrt(),
            offset: -(c_in * v_rf * v_rf + c_gs * c.noise.vi * c.noise.vi) / (2.0 * HBAR),
        }
    }

    /// Only the two bare oscillators.
    pub fn bare(omega1: f64, omega2: f64) -> Self {
        Self { omega1, omega2, c12: 0.0, h12: 0.0, h22: 0.0, v1: 0.0, v2: 0.0, p2: 0.0, q1: 0.0, offset: 0.0 }
    }

    /// Classical energy with `a_i -> A_i` (no zero-point or offset terms).
    pub fn energy(&self, a1: Complex64, a2: Complex64) -> f64 {
        let i = Complex64::i();
        let d1 = a1 - a1.conj();
        let d2 = a2 - a2.conj();
        let x1 = a1 + a1.conj();
        let x2 = a2 + a2.conj();
        let h = self.omega1 * a1.norm_sqr() + self.omega2 * a2.norm_sqr()
            - self.c12 * d1 * d2
            - i * self.h12 * d1 * x2
            - i * self.h22 * (a2 * a2 - a2.conj() * a2.conj())
            - i * self.v1 * d1
            - i * self.v2 * d2
            + self.p2 * x2
            - self.q1 * x1;
        h.re
    }

    /// `(dH/dA1*, dH/dA2*)`.
    pub fn gradient(&self, a1: Complex64, a2: Complex64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        let d1 = a1 - a1.conj();
        let d2 = a2 - a2.conj();
        let x2 = a2 + a2.conj();
        let g1 = self.omega1 * a1 + self.c12 * d2 + i * self.h12 * x2 + i * self.v1 - self.q1;
        let g2 = self.omega2 * a2 + self.c12 * d1 - i * self.h12 * d1
            + 2.0 * i * self.h22 * a2.conj()
            + i * self.v2
            + self.p2;
        (g1, g2)
    }

    pub fn to_operator(&self, cutoff1: usize, cutoff2: usize) -> Result<FockOperator> {
        let m1 = ModeOps::new(cutoff1)?;
        let m2 = ModeOps::new(cutoff2)?;
        let i = Complex64::i();
        let re = |x: f64| Complex64::new(x, 0.0);
        let zero_point = 0.5 * (self.omega1 + self.omega2) + self.offset;
        let terms: [(Complex64, FockOperator); 10] = [
            (re(self.omega1), m1.n.kron(&m2.id)?),
            (re(self.omega2), m1.id.kron(&m2.n)?),
            (re(zero_point), m1.id.kron(&m2.id)?),
            (re(-self.c12), m1.d.kron(&m2.d)?),
            (-i * self.h12, m1.d.kron(&m2.x)?),
            (-i * self.h22, m1.id.kron(&m2.sq)?),
            (-i * self.v1, m1.d.kron(&m2.id)?),
            (-i * self.v2, m1.id.kron(&m2.d)?),
            (re(self.p2), m1.id.kron(&m2.x)?),
            (re(-self.q1), m1.x.kron(&m2.id)?),
        ];
        Ok(sum_terms(cutoff1, cutoff2, &terms))
    }
}

/// Single-mode building blocks.
struct ModeOps {
    id: FockOperator,
    n: FockOperator,
    /// a + a+
    x: FockOperator,
    /// a - a+
    d: FockOperator,
    /// a^2 - a+^2
    sq: FockOperator,
}

impl ModeOps {
    fn new(cutoff: usize) -> Result<Self> {
        let a = annihilation(cutoff)?;
        let ad = a.adjoint();
        Ok(Self {
            id: FockOperator::identity(cutoff, 0),
            n: number(cutoff)?,
            x: &a + &ad,
            d: &a - &ad,
            sq: &(&a * &a) - &(&ad * &ad),
        })
    }
}

fn sum_terms(cutoff1: usize, cutoff2: usize, terms: &[(Complex64, FockOperator)]) -> FockOperator {
    let mut m = FockOperator::zeros(cutoff1, cutoff2).into_matrix();
    for (coef, op) in terms {
        if *coef != Complex64::new(0.0, 0.0) {
            m += op.matrix() * *coef;
        }
    }
    FockOperator::from_matrix(cutoff1, cutoff2, m).expect("finite coefficients")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiticityReport {
    pub linear: f64,
    /// Defect of the nonlinear bracket before symmetrization.
    pub nonlinear_raw: f64,
    pub nonlinear: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct HamiltonianSet {
    pub linear: FockOperator,
    pub nonlinear: FockOperator,
    pub total: FockOperator,
    pub hermiticity: HermiticityReport,
}

pub fn build_linear(model: &LinearModel, cutoff1: usize, cutoff2: usize) -> Result<FockOperator> {
    let h = model.to_operator(cutoff1, cutoff2)?;
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NonHermitian { defect });
    }
    Ok(h)
}

/// The cubic bracket as written, in written operator order, followed by
/// `(M + M+)/2` when the raw product is not Hermitian. Returns the operator
/// and the raw defect.
pub fn build_nonlinear(g: &NonlinearCouplings, cutoff1: usize, cutoff2: usize) -> Result<(FockOperator, f64)> {
    let m1 = ModeOps::new(cutoff1)?;
    let m2 = ModeOps::new(cutoff2)?;
    let i = Complex64::i();
    let re = |x: f64| Complex64::new(x, 0.0);
    let x2sq = &m2.x * &m2.x;
    let terms: [(Complex64, FockOperator); 6] = [
        (re(-g.g13), (&m1.d * &m1.d).kron(&m2.x)?),
        (re(g.g14), m1.id.kron(&(&m2.x * &(&m2.d * &m2.d)))?),
        (re(-g.g15), m1.d.kron(&(&m2.d * &m2.x))?),
        (re(g.g16), m1.id.kron(&(&x2sq * &m2.x))?),
        (i * g.g17, m1.d.kron(&x2sq)?),
        (i * g.g18, m1.id.kron(&(&m2.d * &x2sq))?),
    ];
    let raw = sum_terms(cutoff1, cutoff2, &terms);
    let defect = raw.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        Ok((raw.hermitian_part(), defect))
    } else {
        Ok((raw, defect))
    }
}

pub fn build(model: &LinearModel, g: &NonlinearCouplings, cutoff1: usize, cutoff2: usize) -> Result<HamiltonianSet> {
    let linear = build_linear(model, cutoff1, cutoff2)?;
    let (nonlinear, nonlinear_raw) = build_nonlinear(g, cutoff1, cutoff2)?;
    let total = &linear + &nonlinear;
    let hermiticity = HermiticityReport {
        linear: linear.hermiticity_defect(),
        nonlinear_raw,
        nonlinear: nonlinear.hermiticity_defect(),
        total: total.hermiticity_defect(),
    };
    Ok(HamiltonianSet { linear, nonlinear, total, hermiticity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, Matrix4};

    fn eigenvalues(h: &FockOperator) -> Vec<f64> {
        let m: DMatrix<Complex64> = h.matrix().clone();
        let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn bare_oscillators() {
        let model = LinearModel::bare(1.3, 2.1);
        let h = build_linear(&model, 6, 6).unwrap();
        let e = eigenvalues(&h);
        assert!((e[0] - 0.5 * (1.3 + 2.1)).abs() < 1e-12);
        let n1 = crate::fock::embed(&number(6).unwrap(), crate::fock::Mode::One, 6).unwrap();
        let n2 = crate::fock::embed(&number(6).unwrap(), crate::fock::Mode::Two, 6).unwrap();
        let want = &(&n1.scale_re(1.3) + &n2.scale_re(2.1)) + &FockOperator::identity(6, 6).scale_re(1.7);
        assert!((h.matrix() - want.matrix()).norm() < 1e-12);
    }

    /// Normal-mode frequencies of a quadratic Hamiltonian in the quadrature
    /// representation, from the eigenvalues of J M with J the symplectic form.
    fn normal_modes(m: &Matrix4<f64>) -> Vec<f64> {
        let j = Matrix4::new(
            0.0, 1.0, 0.0, 0.0, //
            -1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, -1.0, 0.0,
        );
        let mut w: Vec<f64> = (j * m).complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        w.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * b.abs().max(1.0));
        w
    }

    /// Quadratic form of the beam-splitter-free part in (x1, p1, x2, p2) with
    /// a = (x + i p)/sqrt(2): H = (1/2) r^T M r.
    fn quadratic_form(model: &LinearModel) -> Matrix4<f64> {
        // a - a+ = i sqrt2 p, a + a+ = sqrt2 x, a^2 - a+^2 = 2i(xp + px)/2 * 2 / 2 = i (xp + px)
        // -c12 (i sqrt2 p1)(i sqrt2 p2) = 2 c12 p1 p2
        // -i h12 (i sqrt2 p1)(sqrt2 x2) = 2 h12 p1 x2
        // -i h22 (a^2 - a+^2) = -i h22 * i (xp + px) = h22 (xp + px) -> 2 h22 x2 p2 classically
        let (w1, w2) = (model.omega1, model.omega2);
        let mut m = Matrix4::zeros();
        m[(0, 0)] = w1;
        m[(1, 1)] = w1;
        m[(2, 2)] = w2;
        m[(3, 3)] = w2;
        m[(1, 3)] = 2.0 * model.c12;
        m[(3, 1)] = 2.0 * model.c12;
        m[(1, 2)] = 2.0 * model.h12;
        m[(2, 1)] = 2.0 * model.h12;
        m[(2, 3)] = 2.0 * model.h22;
        m[(3, 2)] = 2.0 * model.h22;
        m
    }

    fn spectrum_gaps(model: &LinearModel, cutoff: usize) -> Vec<f64> {
        let e = eigenvalues(&build_linear(model, cutoff, cutoff).unwrap());
        e.iter().map(|x| x - e[0]).collect()
    }

    #[test]
    fn charge_coupling_splits_degenerate_modes() {
        let mut model = LinearModel::bare(1.0, 1.0);
        model.c12 = 0.05;
        let gaps = spectrum_gaps(&model, 14);
        let w = normal_modes(&quadratic_form(&model));
        // Lowest two excitations are the two normal modes.
        assert!((gaps[1] - w[0]).abs() < 1e-8 * w[0]);
        assert!((gaps[2] - w[1]).abs() < 1e-8 * w[1]);
        // Symmetric split around the bare ladder, of size 2|c12| to first order.
        assert!(((w[1] - w[0]) - 2.0 * model.c12).abs() < 1e-2 * model.c12);
        assert!((0.5 * (w[0] + w[1]) - 1.0).abs() < 2e-3);
    }

    #[test]
    fn linear_spectrum_matches_symplectic_oracle() {
        let mut model = LinearModel::bare(1.0, 1.6);
        model.c12 = 0.07;
        model.h12 = -0.05;
        model.h22 = 0.11;
        let gaps = spectrum_gaps(&model, 22);
        let w = normal_modes(&quadratic_form(&model));
        assert!((gaps[1] - w[0]).abs() < 1e-8 * w[0], "{} vs {}", gaps[1], w[0]);
        let second = gaps.iter().copied().find(|g| (g - w[1]).abs() < 1e-8 * w[1]);
        assert!(second.is_some());
    }

    #[test]
    fn drive_is_hermitian() {
        let mut model = LinearModel::bare(1.0, 2.0);
        model.v1 = 0.3;
        model.q1 = -0.2;
        model.p2 = 0.4;
        model.v2 = 0.1;
        let h = build_linear(&model, 8, 8).unwrap();
        assert!(h.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let model = LinearModel {
            omega1: 1.1,
            omega2: 0.8,
            c12: 0.13,
            h12: -0.21,
            h22: 0.07,
            v1: 0.3,
            v2: -0.4,
            p2: 0.25,
            q1: 0.6,
            offset: 3.0,
        };
        let a1 = Complex64::new(0.3, -0.7);
        let a2 = Complex64::new(-0.2, 0.45);
        let h = 1e-6;
        let d = |f: &dyn Fn(Complex64) -> f64, z: Complex64| {
            // dH/dz* = (dH/dx + i dH/dy) / 2
            let dx = (f(z + h) - f(z - h)) / (2.0 * h);
            let dy = (f(z + Complex64::new(0.0, h)) - f(z - Complex64::new(0.0, h))) / (2.0 * h);
            Complex64::new(dx, dy) * 0.5
        };
        let (g1, g2) = model.gradient(a1, a2);
        let f1 = d(&|z| model.energy(z, a2), a1);
        let f2 = d(&|z| model.energy(a1, z), a2);
        assert!((g1 - f1).norm() < 1e-8);
        assert!((g2 - f2).norm() < 1e-8);
    }

    #[test]
    fn nonlinear_zero_and_hermitian_cases() {
        let (z, d) = build_nonlinear(&NonlinearCouplings::default(), 5, 5).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        assert_eq!(d, 0.0);
        let g = NonlinearCouplings { g16: 0.3, ..Default::default() };
        let (h, d) = build_nonlinear(&g, 5, 5).unwrap();
        assert!(d < 1e-15);
        assert!(h.frobenius_norm() > 0.0);
        let g = NonlinearCouplings { g13: 0.2, g17: -0.4, ..Default::default() };
        assert!(build_nonlinear(&g, 5, 5).unwrap().1 < 1e-15);
    }

    #[test]
    fn nonlinear_g18_needs_symmetrization() {
        let g = NonlinearCouplings { g18: 0.5, ..Default::default() };
        let (h, raw) = build_nonlinear(&g, 4, 4).unwrap();
        assert!(raw > 1e-3);
        assert!(h.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn nonlinear_scales_linearly() {
        let g = NonlinearCouplings { g13: 0.1, g14: -0.2, g15: 0.3, g16: 0.05, g17: 0.07, g18: -0.11 };
        let s = 3.25;
        let gs = NonlinearCouplings {
            g13: s * g.g13,
            g14: s * g.g14,
            g15: s * g.g15,
            g16: s * g.g16,
            g17: s * g.g17,
            g18: s * g.g18,
        };
        let (a, _) = build_nonlinear(&g, 5, 6).unwrap();
        let (b, _) = build_nonlinear(&gs, 5, 6).unwrap();
        assert!((b.matrix() - a.matrix() * Complex64::new(s, 0.0)).norm() < 1e-13 * b.frobenius_norm());
    }

    #[test]
    fn mode_swap_symmetry() {
        // Symmetric frequencies and a mode-symmetric coupling: spectrum invariant under relabeling.
        let mut model = LinearModel::bare(1.2, 1.2);
        model.c12 = 0.09;
        let e1 = eigenvalues(&build_linear(&model, 7, 7).unwrap());
        let swapped = LinearModel { omega1: model.omega2, omega2: model.omega1, ..model };
        let e2 = eigenvalues(&build_linear(&swapped, 7, 7).unwrap());
        for (a, b) in e1.iter().zip(&e2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn total_is_sum_and_hermitian() {
        let mut model = LinearModel::bare(1.0, 1.5);
        model.h22 = 0.05;
        let g = NonlinearCouplings { g13: 0.01, g14: 0.02, g15: 0.03, g16: 0.0, g17: 0.01, g18: 0.02 };
        let set = build(&model, &g, 5, 5).unwrap();
        assert_eq!(set.total, &set.linear + &set.nonlinear);
        assert!(set.hermiticity.total < HERMITICITY_TOL);
        assert!(set.hermiticity.linear < HERMITICITY_TOL);
    }
}
