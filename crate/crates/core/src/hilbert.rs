//! Truncated battery ⊗ qubit Hilbert space.
//!
//! Joint basis index is `k = 2n + s` with `s = 0` for |g⟩ and `s = 1` for |e⟩,
//! so the battery index is outer and the qubit index is inner. Every operator
//! and state in the crate uses this ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix on the truncated joint space (or on the qubit alone).
pub type ComplexOperator = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HilbertError {
    #[error("Fock cutoff must be at least 1, got {0}")]
    InvalidCutoff(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("expectation value of a Hermitian operator has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("joint dimension {0} is not even")]
    OddDimension(usize),
}

/// Qubit basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    Ground = 0,
    Excited = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    n_cut: usize,
}

impl HilbertSpec {
    pub fn new(n_cut: usize) -> Result<Self, HilbertError> {
        if n_cut == 0 {
            return Err(HilbertError::InvalidCutoff(n_cut));
        }
        Ok(Self { n_cut })
    }

    /// Number of retained Fock levels, |0⟩ … |n_cut − 1⟩.
    pub fn n_cut(&self) -> usize {
        self.n_cut
    }

    pub fn joint_dim(&self) -> usize {
        2 * self.n_cut
    }

    /// Joint index of |n, s⟩.
    pub fn index(&self, n: usize, s: Qubit) -> usize {
        debug_assert!(n < self.n_cut);
        2 * n + s as usize
    }
}

/// All operators needed by the protocol, on the joint space.
#[derive(Debug, Clone)]
pub struct Operators {
    pub spec: HilbertSpec,
    /// a ⊗ I₂
    pub a: ComplexOperator,
    pub a_dag: ComplexOperator,
    /// I_B ⊗ σ_z with σ_z|e⟩ = +|e⟩
    pub sigma_z: ComplexOperator,
    /// I_B ⊗ |e⟩⟨g|
    pub sigma_plus: ComplexOperator,
    /// I_B ⊗ |g⟩⟨e|
    pub sigma_minus: ComplexOperator,
    /// a†a ⊗ I₂
    pub n_op: ComplexOperator,
    /// a†a ⊗ I₂ + I_B ⊗ |e⟩⟨e|
    pub n_tot: ComplexOperator,
    /// I_B ⊗ |e⟩⟨e|
    pub proj_e: ComplexOperator,
}

pub fn build_operators(spec: HilbertSpec) -> Operators {
    let d = spec.joint_dim();
    let mut a = ComplexOperator::zeros(d, d);
    let mut sigma_z = ComplexOperator::zeros(d, d);
    let mut sigma_plus = ComplexOperator::zeros(d, d);
    let mut n_op = ComplexOperator::zeros(d, d);
    let mut proj_e = ComplexOperator::zeros(d, d);
    for n in 0..spec.n_cut() {
        let g = spec.index(n, Qubit::Ground);
        let e = spec.index(n, Qubit::Excited);
        if n > 0 {
            let amp = Complex64::new((n as f64).sqrt(), 0.0);
            a[(spec.index(n - 1, Qubit::Ground), g)] = amp;
            a[(spec.index(n - 1, Qubit::Excited), e)] = amp;
        }
        sigma_z[(g, g)] = -ONE;
        sigma_z[(e, e)] = ONE;
        sigma_plus[(e, g)] = ONE;
        n_op[(g, g)] = Complex64::new(n as f64, 0.0);
        n_op[(e, e)] = Complex64::new(n as f64, 0.0);
        proj_e[(e, e)] = ONE;
    }
    let a_dag = a.adjoint();
    let sigma_minus = sigma_plus.adjoint();
    let n_tot = &n_op + &proj_e;
    Operators {
        spec,
        a,
        a_dag,
        sigma_z,
        sigma_plus,
        sigma_minus,
        n_op,
        n_tot,
        proj_e,
    }
}

/// Two-level operators in the {|g⟩, |e⟩} basis.
pub mod qubit {
    use super::*;

    pub fn sigma_plus() -> ComplexOperator {
        ComplexOperator::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
    }

    pub fn sigma_minus() -> ComplexOperator {
        sigma_plus().adjoint()
    }

    pub fn sigma_z() -> ComplexOperator {
        ComplexOperator::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE])
    }

    pub fn proj_e() -> ComplexOperator {
        ComplexOperator::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, ONE])
    }
}

/// Lifts a 2×2 qubit operator to I_B ⊗ op on the joint space.
pub fn lift_qubit_operator(spec: HilbertSpec, op: &ComplexOperator) -> ComplexOperator {
    assert_eq!(op.shape(), (2, 2), "qubit operator must be 2x2");
    let d = spec.joint_dim();
    let mut out = ComplexOperator::zeros(d, d);
    for n in 0..spec.n_cut() {
        for r in 0..2 {
            for c in 0..2 {
                out[(2 * n + r, 2 * n + c)] = op[(r, c)];
            }
        }
    }
    out
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Normalizes `amplitudes`; fails only for the zero vector.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, HilbertError> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::ZeroNorm);
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = DVector::from_element(dim, ZERO);
        v[k] = ONE;
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, HilbertError> {
        if self.dim() != other.dim() {
            return Err(HilbertError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm_sqr())
    }

    /// Battery state ⊗ qubit basis state on the joint space.
    pub fn with_qubit(&self, s: Qubit) -> StateVector {
        let n_cut = self.dim();
        let mut v = DVector::from_element(2 * n_cut, ZERO);
        for (n, c) in self.amplitudes.iter().enumerate() {
            v[2 * n + s as usize] = *c;
        }
        StateVector { amplitudes: v }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexOperator,
}

impl DensityMatrix {
    /// Wraps a square matrix without validating it; see [`check_density`].
    pub fn from_matrix(matrix: ComplexOperator) -> Result<Self, HilbertError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(HilbertError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = psi.as_vector();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    /// |ψ_B⟩⟨ψ_B| ⊗ |s⟩⟨s|
    pub fn product(battery: &StateVector, s: Qubit) -> Self {
        Self::from_pure(&battery.with_qubit(s))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexOperator::identity(dim, dim).unscale(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexOperator {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexOperator {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Qubit state after tracing out the battery.
    pub fn reduced_qubit(&self) -> Result<ComplexOperator, HilbertError> {
        let n_cut = self.n_cut()?;
        let mut q = ComplexOperator::zeros(2, 2);
        for n in 0..n_cut {
            for r in 0..2 {
                for c in 0..2 {
                    q[(r, c)] += self.matrix[(2 * n + r, 2 * n + c)];
                }
            }
        }
        Ok(q)
    }

    /// Battery state after tracing out the qubit.
    pub fn reduced_battery(&self) -> Result<ComplexOperator, HilbertError> {
        let n_cut = self.n_cut()?;
        let mut b = ComplexOperator::zeros(n_cut, n_cut);
        for m in 0..n_cut {
            for n in 0..n_cut {
                b[(m, n)] = self.matrix[(2 * m, 2 * n)] + self.matrix[(2 * m + 1, 2 * n + 1)];
            }
        }
        Ok(b)
    }

    fn n_cut(&self) -> Result<usize, HilbertError> {
        let d = self.dim();
        if !d.is_multiple_of(2) {
            return Err(HilbertError::OddDimension(d));
        }
        Ok(d / 2)
    }
}

/// Tr[ρ · op]
pub fn expectation(rho: &DensityMatrix, op: &ComplexOperator) -> Result<Complex64, HilbertError> {
    let d = rho.dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(HilbertError::DimensionMismatch {
            expected: d,
            found: op.nrows(),
        });
    }
    let m = rho.matrix();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += m[(i, j)] * op[(j, i)];
        }
    }
    Ok(acc)
}

/// Real expectation value of a Hermitian operator. An imaginary residue above
/// 1e-9 (relative to the magnitude) is reported as an error.
pub fn expectation_real(rho: &DensityMatrix, op: &ComplexOperator) -> Result<f64, HilbertError> {
    let z = expectation(rho, op)?;
    if z.im.abs() > 1e-9 * z.re.abs().max(1.0) {
        return Err(HilbertError::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryObservables {
    pub mean_n: f64,
    pub var_n: f64,
    pub a_mean: Complex64,
    /// |⟨a⟩|²/⟨a†a⟩, defined as 0 for the vacuum.
    pub eta_coh: f64,
}

/// Photon-number statistics and coherent amplitude of the battery mode.
///
/// Evaluated directly from the joint density matrix, which is equivalent to
/// tracing out the qubit first because every operator here is `X ⊗ I₂`.
pub fn battery_observables(rho: &DensityMatrix) -> BatteryObservables {
    let m = rho.matrix();
    let n_cut = rho.dim() / 2;
    let mut mean_n = 0.0;
    let mut mean_n2 = 0.0;
    let mut a_mean = ZERO;
    for n in 0..n_cut {
        let nf = n as f64;
        let p = m[(2 * n, 2 * n)].re + m[(2 * n + 1, 2 * n + 1)].re;
        mean_n += nf * p;
        mean_n2 += nf * nf * p;
        if n > 0 {
            // Tr[ρ a] = Σ √n ⟨n,s|ρ|n−1,s⟩
            let coh = m[(2 * n, 2 * (n - 1))] + m[(2 * n + 1, 2 * (n - 1) + 1)];
            a_mean += coh * nf.sqrt();
        }
    }
    let var_n = (mean_n2 - mean_n * mean_n).max(0.0);
    let eta_coh = if mean_n > 0.0 { a_mean.norm_sqr() / mean_n } else { 0.0 };
    BatteryObservables {
        mean_n,
        var_n,
        a_mean,
        eta_coh,
    }
}

/// Positivity and normalization audit of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    /// Frobenius norm of ρ − ρ†.
    pub hermiticity_defect: f64,
    /// |Tr ρ − 1|
    pub trace_defect: f64,
    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub min_eigenvalue: f64,
    pub positivity_violation: bool,
}

pub fn check_density(rho: &DensityMatrix, tol_pos: f64) -> DensityDiagnostics {
    let m = rho.matrix();
    let hermiticity_defect = (m - m.adjoint()).norm();
    let trace_defect = (rho.trace() - ONE).norm();
    let herm = (m + m.adjoint()).unscale(2.0);
    let min_eigenvalue = herm
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    DensityDiagnostics {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        positivity_violation: min_eigenvalue < -tol_pos,
    }
}

/// Frobenius norm of AB − BA.
pub fn commutator_norm(a: &ComplexOperator, b: &ComplexOperator) -> f64 {
    (a * b - b * a).norm()
}
