//! Vectorized Lindblad generator L(t) = L₀ + δ(t)·L_δ.
//!
//! Density matrices are column-stacked: entry ρ_ij sits at `i + j·d`, so that
//! vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{ComplexOperator, DensityMatrix, HilbertError, Operators};
use crate::sparse::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiouvillianError {
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Dissipation rates, all in 1/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    /// Γ₁ = 1/T₁
    pub gamma1: f64,
    /// Pure dephasing γ_φ with 1/T₂ = Γ₁/2 + γ_φ.
    pub gamma_phi: f64,
    /// Battery energy loss rate κ.
    pub kappa: f64,
    /// Thermal occupation of the battery bath.
    pub n_th: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self::none()
    }
}

impl NoiseParams {
    pub fn none() -> Self {
        Self {
            gamma1: 0.0,
            gamma_phi: 0.0,
            kappa: 0.0,
            n_th: 0.0,
        }
    }

    /// Rates from coherence times T₁, T₂ (ns). Requires T₂ ≤ 2T₁.
    pub fn from_times(t1: f64, t2: f64, kappa: f64, n_th: f64) -> Result<Self, LiouvillianError> {
        if !(t1 > 0.0 && t2 > 0.0) {
            return Err(LiouvillianError::InvalidNoise(format!(
                "T1 = {t1} ns and T2 = {t2} ns must be positive"
            )));
        }
        let gamma1 = 1.0 / t1;
        let gamma_phi = 1.0 / t2 - gamma1 / 2.0;
        // Allow rounding at the T2 = 2T1 boundary.
        if gamma_phi < -1e-15 {
            return Err(LiouvillianError::InvalidNoise(format!(
                "T2 = {t2} ns exceeds 2 T1 = {} ns",
                2.0 * t1
            )));
        }
        let noise = Self {
            gamma1,
            gamma_phi: gamma_phi.max(0.0),
            kappa,
            n_th,
        };
        noise.validate()?;
        Ok(noise)
    }

    /// T₁ = 118 ns, T₂ = 157 ns, κ = 10⁻⁴ /ns, n̄_th = 0.
    pub fn nominal() -> Self {
        Self::from_times(118.0, 157.0, 1e-4, 0.0).expect("default noise is valid")
    }

    /// Same qubit rates with the battery channels removed.
    pub fn qubit_only(&self) -> Self {
        Self {
            kappa: 0.0,
            n_th: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<(), LiouvillianError> {
        for (name, v) in [
            ("gamma1", self.gamma1),
            ("gamma_phi", self.gamma_phi),
            ("kappa", self.kappa),
            ("n_th", self.n_th),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(LiouvillianError::InvalidNoise(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Column-stacked vec(ρ).
pub fn vectorize(rho: &DensityMatrix) -> Vec<Complex64> {
    // nalgebra storage is column-major, which is exactly column stacking.
    rho.matrix().as_slice().to_vec()
}

pub fn devectorize(v: &[Complex64], dim: usize) -> Result<DensityMatrix, HilbertError> {
    if v.len() != dim * dim {
        return Err(HilbertError::DimensionMismatch {
            expected: dim * dim,
            found: v.len(),
        });
    }
    DensityMatrix::from_matrix(ComplexOperator::from_column_slice(dim, dim, v))
}

/// −i(I ⊗ H − Hᵀ ⊗ I)
pub fn hamiltonian_super(h: &ComplexOperator) -> CsrMatrix {
    let d = h.nrows();
    let hs = CsrMatrix::from_dense(h);
    let id = CsrMatrix::identity(d);
    let left = CsrMatrix::kron(&id, &hs);
    let right = CsrMatrix::kron(&hs.transpose(), &id);
    let mi = Complex64::new(0.0, -1.0);
    CsrMatrix::sum([&left.scale(mi), &right.scale(-mi)]).expect("two terms")
}

/// D[L] = L̄ ⊗ L − ½ I ⊗ L†L − ½ (L†L)ᵀ ⊗ I
pub fn dissipator_super(l: &ComplexOperator) -> CsrMatrix {
    let d = l.nrows();
    let ls = CsrMatrix::from_dense(l);
    let ldl = CsrMatrix::from_dense(&(l.adjoint() * l));
    let id = CsrMatrix::identity(d);
    let jump = CsrMatrix::kron(&ls.conj(), &ls);
    let half = Complex64::new(-0.5, 0.0);
    let anti_left = CsrMatrix::kron(&id, &ldl).scale(half);
    let anti_right = CsrMatrix::kron(&ldl.transpose(), &id).scale(half);
    CsrMatrix::sum([&jump, &anti_left, &anti_right]).expect("three terms")
}

/// Generator split into a static part and a part scaled by the detuning.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    l0: CsrMatrix,
    ldelta: CsrMatrix,
}

impl Liouvillian {
    /// L₀ from H₀ and weighted collapse operators, L_δ from H_δ.
    pub fn from_parts(h0: &ComplexOperator, h_delta: &ComplexOperator, collapse: &[(f64, &ComplexOperator)]) -> Self {
        let dim = h0.nrows();
        let mut terms = vec![hamiltonian_super(h0)];
        for &(rate, l) in collapse {
            if rate != 0.0 {
                terms.push(dissipator_super(l).scale(Complex64::new(rate, 0.0)));
            }
        }
        let l0 = CsrMatrix::sum(terms.iter()).expect("at least the Hamiltonian term");
        let ldelta = hamiltonian_super(h_delta);
        Self { dim, l0, ldelta }
    }

    /// Hilbert-space dimension d (the generator acts on d² vectors).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l0(&self) -> &CsrMatrix {
        &self.l0
    }

    pub fn ldelta(&self) -> &CsrMatrix {
        &self.ldelta
    }

    /// out = (L₀ + δ L_δ) y
    pub fn apply(&self, delta: f64, y: &[Complex64], out: &mut [Complex64]) {
        self.l0.mul_vec_into(y, out);
        if delta != 0.0 {
            self.ldelta.mul_vec_add(delta, y, out);
        }
    }
}

/// Joint qubit–battery generator with H₀ = g(aσ₊ + a†σ₋), H_δ = σ_z/2 and
/// the four dissipators Γ₁D[σ₋], (γ_φ/2)D[σ_z], κ(n̄_th+1)D[a], κn̄_th D[a†].
pub fn assemble(ops: &Operators, g: f64, noise: &NoiseParams) -> Result<Liouvillian, LiouvillianError> {
    noise.validate()?;
    if !g.is_finite() {
        return Err(LiouvillianError::InvalidNoise(format!("coupling g = {g}")));
    }
    let h0 = (&ops.a * &ops.sigma_plus + &ops.a_dag * &ops.sigma_minus).scale(g);
    let h_delta = ops.sigma_z.scale(0.5);
    Ok(Liouvillian::from_parts(
        &h0,
        &h_delta,
        &[
            (noise.gamma1, &ops.sigma_minus),
            (noise.gamma_phi / 2.0, &ops.sigma_z),
            (noise.kappa * (noise.n_th + 1.0), &ops.a),
            (noise.kappa * noise.n_th, &ops.a_dag),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_operators, HilbertSpec, StateVector};
    use crate::sparse::CsrMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> ComplexOperator {
        ComplexOperator::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
        let a = random_matrix(rng, d);
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_matrix(m.unscale(tr.re)).unwrap()
    }

    fn apply_dense(l: &CsrMatrix, rho: &DensityMatrix) -> ComplexOperator {
        let v = vectorize(rho);
        let mut out = vec![Complex64::default(); v.len()];
        l.mul_vec_into(&v, &mut out);
        devectorize(&out, rho.dim()).unwrap().into_matrix()
    }

    #[test]
    fn column_stacking_order() {
        let rho = DensityMatrix::from_matrix(ComplexOperator::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)],
        ))
        .unwrap();
        let v = vectorize(&rho);
        assert_eq!(v, vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(devectorize(&v, 2).unwrap(), rho);
        assert!(devectorize(&v, 3).is_err());
    }

    #[test]
    fn vec_identity_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_matrix(&mut rng, 4);
            let b = random_matrix(&mut rng, 4);
            let rho = DensityMatrix::from_matrix(random_matrix(&mut rng, 4)).unwrap();
            let lhs = &a * rho.matrix() * &b;
            let sup = CsrMatrix::kron(&CsrMatrix::from_dense(&b.transpose()), &CsrMatrix::from_dense(&a));
            let rhs = apply_dense(&sup, &rho);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn dissipator_examples() {
        use crate::hilbert::qubit;
        // σ₋ on |e⟩⟨e|: ρ̇_ee = −1
        let rho = DensityMatrix::from_pure(&StateVector::basis(2, 1));
        let d = apply_dense(&dissipator_super(&qubit::sigma_minus()), &rho);
        assert!((d[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((d[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);

        // σ_z on |+⟩⟨+|: coherence decays at rate 2
        let plus = StateVector::from_amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let rho = DensityMatrix::from_pure(&plus);
        let d = apply_dense(&dissipator_super(&qubit::sigma_z()), &rho);
        assert!((d[(0, 1)] / rho.matrix()[(0, 1)] - c(-2.0, 0.0)).norm() < 1e-14);
        assert!(d[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn amplitude_damping_rate() {
        let spec = HilbertSpec::new(26).unwrap();
        let ops = build_operators(spec);
        let psi = crate::battery::build_coherent(5.0, 0.3, 26).unwrap();
        let rho = DensityMatrix::product(&psi, crate::hilbert::Qubit::Ground);
        let d = apply_dense(&dissipator_super(&ops.a), &rho);
        let rate = crate::hilbert::expectation(&DensityMatrix::from_matrix(d).unwrap(), &ops.n_op).unwrap();
        assert!((rate.re + 5.0).abs() < 1e-6);
    }

    fn full_generator(l: &Liouvillian, delta: f64) -> CsrMatrix {
        CsrMatrix::sum([l.l0(), &l.ldelta().scale(c(delta, 0.0))]).unwrap()
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let spec = HilbertSpec::new(4).unwrap();
        let ops = build_operators(spec);
        let noise = NoiseParams {
            gamma1: 0.3,
            gamma_phi: 0.2,
            kappa: 0.1,
            n_th: 0.4,
        };
        let lv = assemble(&ops, 0.7, &noise).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let rho = random_density(&mut rng, spec.joint_dim());
            for gen in [lv.l0(), lv.ldelta(), &full_generator(&lv, -1.3)] {
                let drho = apply_dense(gen, &rho);
                assert!(drho.trace().norm() < 1e-12);
                assert!((&drho - drho.adjoint()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_generator_is_commutator() {
        let spec = HilbertSpec::new(5).unwrap();
        let ops = build_operators(spec);
        let g = 0.4;
        let delta = 0.9;
        let lv = assemble(&ops, g, &NoiseParams::none()).unwrap();
        let h = (&ops.a * &ops.sigma_plus + &ops.a_dag * &ops.sigma_minus).scale(g) + ops.sigma_z.scale(delta / 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let rho = random_density(&mut rng, spec.joint_dim());
            let expected = (&h * rho.matrix() - rho.matrix() * &h) * c(0.0, -1.0);
            let got = apply_dense(&full_generator(&lv, delta), &rho);
            assert!((&expected - &got).norm() < 1e-12);

            let dn = crate::hilbert::expectation(&DensityMatrix::from_matrix(got).unwrap(), &ops.n_tot).unwrap();
            assert!(dn.norm() < 1e-10);
        }
    }

    #[test]
    fn zero_coupling_and_rates_give_zero_l0() {
        let ops = build_operators(HilbertSpec::new(3).unwrap());
        let lv = assemble(&ops, 0.0, &NoiseParams::none()).unwrap();
        assert_eq!(lv.l0().nnz(), 0);
        // L_δ is diagonal, so populations are untouched.
        assert!(lv.ldelta().triplets().all(|(r, c, _)| r == c));
    }

    #[test]
    fn rates_from_coherence_times() {
        let n = NoiseParams::from_times(118.0, 157.0, 1e-4, 0.0).unwrap();
        assert!((n.gamma1 - 8.4746e-3).abs() < 1e-6);
        assert!((n.gamma_phi - 2.1321e-3).abs() < 1e-6);
        assert!(NoiseParams::from_times(100.0, 250.0, 0.0, 0.0).is_err());
        let bad = NoiseParams {
            kappa: -1.0,
            ..NoiseParams::none()
        };
        assert!(bad.validate().is_err());
        let ops = build_operators(HilbertSpec::new(2).unwrap());
        assert!(matches!(
            assemble(&ops, 1.0, &bad),
            Err(LiouvillianError::InvalidNoise(_))
        ));
    }
}
