//! Dense operators and states on a truncated Fock space.
//!
//! Two-mode basis states are ordered `|n1> (x) |n2>` with `n2` running
//! fastest, i.e. index `n1 * cutoff2 + n2`. A `cutoff2` of zero marks a
//! single-mode space.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    cutoff1: usize,
    cutoff2: usize,
    entries: DMatrix<Complex64>,
}

fn space_dim(cutoff1: usize, cutoff2: usize) -> usize {
    if cutoff2 == 0 {
        cutoff1
    } else {
        cutoff1 * cutoff2
    }
}

impl FockOperator {
    pub fn from_matrix(cutoff1: usize, cutoff2: usize, entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = space_dim(cutoff1, cutoff2);
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: entries.nrows().max(entries.ncols()) });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("entries", "operator entries must be finite"));
        }
        Ok(Self { cutoff1, cutoff2, entries })
    }

    pub fn zeros(cutoff1: usize, cutoff2: usize) -> Self {
        let d = space_dim(cutoff1, cutoff2);
        Self { cutoff1, cutoff2, entries: DMatrix::zeros(d, d) }
    }

    pub fn identity(cutoff1: usize, cutoff2: usize) -> Self {
        let d = space_dim(cutoff1, cutoff2);
        Self { cutoff1, cutoff2, entries: DMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.cutoff1, self.cutoff2)
    }

    pub fn is_two_mode(&self) -> bool {
        self.cutoff2 != 0
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    fn with_entries(&self, entries: DMatrix<Complex64>) -> Self {
        Self { cutoff1: self.cutoff1, cutoff2: self.cutoff2, entries }
    }

    pub fn adjoint(&self) -> Self {
        self.with_entries(self.entries.adjoint())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.with_entries(&self.entries * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(self.with_entries(&self.entries * &other.entries - &other.entries * &self.entries))
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// `||A - A^dagger||_F / ||A||_F`, zero for the zero operator.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.frobenius_norm();
        if n == 0.0 {
            return 0.0;
        }
        (&self.entries - self.entries.adjoint()).norm() / n
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        self.with_entries((&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0))
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.cutoffs() != other.cutoffs() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(self.with_entries(&self.entries + &other.entries))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(self.with_entries(&self.entries * &other.entries))
    }

    /// Tensor product of two single-mode operators: `self (x) other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        if self.is_two_mode() || other.is_two_mode() {
            return Err(Error::domain("kron", "both factors must be single-mode operators"));
        }
        Ok(Self { cutoff1: self.cutoff1, cutoff2: other.cutoff1, entries: self.entries.kronecker(&other.entries) })
    }

    pub fn apply(&self, state: &QuantumState) -> Result<QuantumState> {
        if state.cutoffs() != self.cutoffs() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        Ok(QuantumState::from_vector(self.cutoff1, self.cutoff2, &self.entries * state.amplitudes()))
    }

    /// `<psi| A |psi>` for a normalized state.
    pub fn expectation(&self, state: &QuantumState) -> Result<Complex64> {
        let v = self.apply(state)?;
        Ok(state.amplitudes().dotc(v.amplitudes()))
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: Self) -> FockOperator {
        self.try_add(rhs).expect("operators on different spaces")
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: Self) -> FockOperator {
        assert_eq!(self.cutoffs(), rhs.cutoffs(), "operators on different spaces");
        self.with_entries(&self.entries - &rhs.entries)
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: Self) -> FockOperator {
        self.try_mul(rhs).expect("operators on different spaces")
    }
}

impl Neg for &FockOperator {
    type Output = FockOperator;
    fn neg(self) -> FockOperator {
        self.with_entries(-&self.entries)
    }
}

/// Single-mode lowering operator with `(n-1, n)` entry `sqrt(n)`.
pub fn annihilation(cutoff: usize) -> Result<FockOperator> {
    if cutoff < 2 {
        return Err(Error::domain("cutoff", format!("need at least 2 levels, got {cutoff}")));
    }
    let mut m = DMatrix::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { cutoff1: cutoff, cutoff2: 0, entries: m })
}

pub fn creation(cutoff: usize) -> Result<FockOperator> {
    Ok(annihilation(cutoff)?.adjoint())
}

pub fn number(cutoff: usize) -> Result<FockOperator> {
    let mut m = DMatrix::zeros(cutoff, cutoff);
    for n in 0..cutoff {
        m[(n, n)] = Complex64::new(n as f64, 0.0);
    }
    FockOperator::from_matrix(cutoff, 0, m)
}

/// Lift a single-mode operator onto the two-mode space.
pub fn embed(op: &FockOperator, mode: Mode, cutoff_other: usize) -> Result<FockOperator> {
    if op.is_two_mode() {
        return Err(Error::DimensionMismatch { expected: op.cutoff1, found: op.dim() });
    }
    if cutoff_other == 0 {
        return Err(Error::domain("cutoff_other", "must be positive"));
    }
    let id = FockOperator::identity(cutoff_other, 0);
    match mode {
        Mode::One => op.kron(&id),
        Mode::Two => id.kron(op),
    }
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant (Higham 2005).
pub fn expm(op: &FockOperator) -> Result<FockOperator> {
    Ok(op.with_entries(expm_matrix(&op.entries)?))
}

pub fn expm_matrix(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;

    let n = a.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain("expm", "non-finite input"));
    }
    let norm1 = one_norm(a);
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * Complex64::new(2f64.powi(-s), 0.0);

    let c = |k: usize| Complex64::new(B[k], 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * c(13) + &a4 * c(11) + &a2 * c(9)) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(12) + &a4 * c(10) + &a2 * c(8)) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::Overflow)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow);
    }
    Ok(r)
}

/// `exp(A) v` without forming `exp(A)`: the exponent is split into
/// `ceil(||A||_1)` slices, each handled by a truncated Taylor series.
pub fn expm_apply(op: &FockOperator, state: &QuantumState) -> Result<QuantumState> {
    if state.cutoffs() != op.cutoffs() {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: state.dim() });
    }
    let steps = one_norm(&op.entries).ceil().max(1.0);
    if steps > 1e8 {
        return Err(Error::Overflow);
    }
    let steps = steps as usize;
    let a = &op.entries * Complex64::new(1.0 / steps as f64, 0.0);
    let mut v = state.amplitudes().clone();
    for _ in 0..steps {
        let mut term = v.clone();
        let mut acc = v.clone();
        for k in 1..=60 {
            term = &a * term * Complex64::new(1.0 / k as f64, 0.0);
            acc += &term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
        }
        v = acc;
        if !v.norm().is_finite() {
            return Err(Error::Overflow);
        }
    }
    Ok(QuantumState::from_vector(state.cutoff1, state.cutoff2, v))
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Pure state on a truncated one- or two-mode Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    cutoff1: usize,
    cutoff2: usize,
    amplitudes: DVector<Complex64>,
    norm: f64,
}

impl QuantumState {
    pub fn from_vector(cutoff1: usize, cutoff2: usize, amplitudes: DVector<Complex64>) -> Self {
        let norm = amplitudes.norm();
        Self { cutoff1, cutoff2, amplitudes, norm }
    }

    pub fn from_amplitudes(cutoff1: usize, cutoff2: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let d = space_dim(cutoff1, cutoff2);
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: amplitudes.len() });
        }
        Ok(Self::from_vector(cutoff1, cutoff2, DVector::from_vec(amplitudes)))
    }

    pub fn vacuum(cutoff1: usize, cutoff2: usize) -> Self {
        Self::fock(cutoff1, cutoff2, 0, 0)
    }

    /// Number state `|n1, n2>` (or `|n1>` on a single-mode space).
    pub fn fock(cutoff1: usize, cutoff2: usize, n1: usize, n2: usize) -> Self {
        let mut v = DVector::zeros(space_dim(cutoff1, cutoff2));
        let idx = if cutoff2 == 0 { n1 } else { n1 * cutoff2 + n2 };
        v[idx] = ONE;
        Self::from_vector(cutoff1, cutoff2, v)
    }

    /// Coherent state truncated to the space and renormalized.
    pub fn coherent(cutoff1: usize, cutoff2: usize, alpha1: Complex64, alpha2: Complex64) -> Self {
        let c1 = coherent_amplitudes(cutoff1, alpha1);
        let v = if cutoff2 == 0 {
            DVector::from_vec(c1)
        } else {
            let c2 = coherent_amplitudes(cutoff2, alpha2);
            DVector::from_iterator(cutoff1 * cutoff2, c1.iter().flat_map(|x| c2.iter().map(move |y| x * y)))
        };
        Self::from_vector(cutoff1, cutoff2, v).normalized()
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.cutoff1, self.cutoff2)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_two_mode(&self) -> bool {
        self.cutoff2 != 0
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn normalized(&self) -> Self {
        if self.norm == 0.0 {
            return self.clone();
        }
        Self::from_vector(self.cutoff1, self.cutoff2, &self.amplitudes / Complex64::new(self.norm, 0.0))
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Number of levels of `mode` in this space. On a single-mode space
    /// the only mode is the one held in `cutoff1`, whatever label is used.
    pub fn levels(&self, mode: Mode) -> usize {
        match (mode, self.is_two_mode()) {
            (Mode::Two, true) => self.cutoff2,
            _ => self.cutoff1,
        }
    }

    fn split_index(&self, idx: usize, mode: Mode) -> (usize, usize) {
        // Returns (occupation of `mode`, stride of that mode).
        match (mode, self.is_two_mode()) {
            (Mode::One, true) => (idx / self.cutoff2, self.cutoff2),
            (Mode::Two, true) => (idx % self.cutoff2, 1),
            _ => (idx, 1),
        }
    }

    /// Apply the lowering operator of `mode` directly to the amplitudes.
    pub fn lower(&self, mode: Mode) -> DVector<Complex64> {
        let mut out = DVector::from_element(self.dim(), ZERO);
        for idx in 0..self.dim() {
            let (n, stride) = self.split_index(idx, mode);
            if n > 0 {
                out[idx - stride] = self.amplitudes[idx] * (n as f64).sqrt();
            }
        }
        out
    }

    /// Probability of each occupation of `mode`, traced over the other mode.
    pub fn occupation_distribution(&self, mode: Mode) -> Vec<f64> {
        let mut p = vec![0.0; self.levels(mode)];
        for (idx, z) in self.amplitudes.iter().enumerate() {
            p[self.split_index(idx, mode).0] += z.norm_sqr();
        }
        p
    }

    /// Weight carried by the top `k` levels of `mode`.
    pub fn tail_weight(&self, mode: Mode, k: usize) -> f64 {
        let p = self.occupation_distribution(mode);
        let total: f64 = p.iter().sum();
        let start = p.len().saturating_sub(k);
        p[start..].iter().sum::<f64>() / total
    }

    /// Move into a larger (or equal) space, padding with zeros.
    pub fn padded(&self, cutoff1: usize, cutoff2: usize) -> Result<Self> {
        if cutoff1 < self.cutoff1 || (self.is_two_mode() != (cutoff2 != 0)) || cutoff2 < self.cutoff2 {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: space_dim(cutoff1, cutoff2) });
        }
        let mut v = DVector::zeros(space_dim(cutoff1, cutoff2));
        for (idx, z) in self.amplitudes.iter().enumerate() {
            let j = if self.is_two_mode() { (idx / self.cutoff2) * cutoff2 + idx % self.cutoff2 } else { idx };
            v[j] = *z;
        }
        Ok(Self::from_vector(cutoff1, cutoff2, v))
    }
}

fn coherent_amplitudes(cutoff: usize, alpha: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}
