//! Echo-refocused Landau–Zener interferometer.
//!
//! The protocol runs in segments: forward sweep, first plateau half, an
//! instantaneous qubit π pulse at t_m = τ_C/2, second plateau half and the
//! reverse sweep. The state is symmetrized and renormalized after every
//! segment. The classical reference replaces the battery by a fixed transverse
//! field with the same mean gap.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::battery::{BatteryError, BatteryStateSpec};
use crate::hilbert::{
    battery_observables, build_operators, check_density, expectation, lift_qubit_operator, qubit, BatteryObservables,
    ComplexOperator, DensityMatrix, HilbertError, HilbertSpec, Operators, Qubit, StateVector,
};
use crate::liouvillian::{assemble, devectorize, vectorize, Liouvillian, LiouvillianError, NoiseParams};
use crate::mhz_to_rad_per_ns;
use crate::odeint::{integrate_segment, sanitize, IntegratorConfig, OdeError};

/// Floor on the smallest eigenvalue of a valid output state.
pub const POSITIVITY_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),
    #[error("time {t} ns outside the protocol window [0, {tau_c}] ns")]
    OutOfWindow { t: f64, tau_c: f64 },
    #[error(transparent)]
    Battery(#[from] BatteryError),
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
    #[error(transparent)]
    Integrator(#[from] OdeError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Interferometer definition. Frequencies in rad/ns, times in ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Mean transverse gap Ω.
    pub omega: f64,
    /// Sweep amplitude δ₀.
    pub delta0: f64,
    pub tau_p: f64,
    pub tau_c: f64,
    pub theta_geo: f64,
    pub phi_echo: f64,
    /// Mean photon number used to calibrate g = Ω/(2√n̄).
    pub nbar: f64,
    /// Apply the mid-plateau π pulse.
    pub echo: bool,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            omega: mhz_to_rad_per_ns(20.0),
            delta0: mhz_to_rad_per_ns(100.0),
            tau_p: 25.0,
            tau_c: 100.0,
            theta_geo: 0.0,
            phi_echo: 0.0,
            nbar: 5.0,
            echo: true,
        }
    }
}

impl ProtocolParams {
    /// Qubit–battery coupling g = Ω/(2√n̄).
    pub fn g(&self) -> f64 {
        self.omega / (2.0 * self.nbar.sqrt())
    }

    /// Battery phase φ_θ = θ_geo − π/2.
    pub fn battery_phase(&self) -> f64 {
        self.theta_geo - FRAC_PI_2
    }

    /// Echo instant t_m = τ_C/2.
    pub fn t_mid(&self) -> f64 {
        0.5 * self.tau_c
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let finite = [
            self.omega,
            self.delta0,
            self.tau_p,
            self.tau_c,
            self.theta_geo,
            self.phi_echo,
            self.nbar,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(ProtocolError::InvalidParams("non-finite parameter".into()));
        }
        if self.omega < 0.0 || self.delta0 < 0.0 {
            return Err(ProtocolError::InvalidParams(format!(
                "Ω = {} and δ0 = {} must be non-negative",
                self.omega, self.delta0
            )));
        }
        if !(self.tau_p > 0.0) || 2.0 * self.tau_p > self.tau_c * (1.0 + 1e-12) {
            return Err(ProtocolError::InvalidParams(format!(
                "need 0 < 2τ_p ≤ τ_C (τ_p = {}, τ_C = {})",
                self.tau_p, self.tau_c
            )));
        }
        Ok(())
    }

    fn validate_quantum(&self) -> Result<(), ProtocolError> {
        self.validate()?;
        if !(self.nbar > 0.0) {
            return Err(ProtocolError::InvalidParams(format!(
                "n̄ = {} must be positive to calibrate g",
                self.nbar
            )));
        }
        Ok(())
    }

    /// Segment boundaries 0, τ_p, t_m, τ_C − τ_p, τ_C.
    fn boundaries(&self) -> [f64; 5] {
        [0.0, self.tau_p, self.t_mid(), self.tau_c - self.tau_p, self.tau_c]
    }
}

/// Piecewise-linear detuning δ(t): ramp −δ₀ → +δ₀ over τ_p, plateau at +δ₀,
/// ramp back to −δ₀ over the last τ_p.
pub fn detuning(t: f64, p: &ProtocolParams) -> Result<f64, ProtocolError> {
    let slack = 1e-9 * p.tau_c.max(1.0);
    if !(t >= -slack && t <= p.tau_c + slack) {
        return Err(ProtocolError::OutOfWindow { t, tau_c: p.tau_c });
    }
    Ok(detuning_clamped(t, p))
}

fn detuning_clamped(t: f64, p: &ProtocolParams) -> f64 {
    let t = t.clamp(0.0, p.tau_c);
    let t_back = p.tau_c - p.tau_p;
    if t <= p.tau_p {
        -p.delta0 + 2.0 * p.delta0 * t / p.tau_p
    } else if t < t_back {
        p.delta0
    } else {
        p.delta0 - 2.0 * p.delta0 * (t - t_back) / p.tau_p
    }
}

/// U_π(φ) = −i(e^{−iφ}σ₊ + e^{iφ}σ₋) on the qubit.
pub fn echo_unitary(phi_echo: f64) -> ComplexOperator {
    let mi = Complex64::new(0.0, -1.0);
    (qubit::sigma_plus() * Complex64::from_polar(1.0, -phi_echo)
        + qubit::sigma_minus() * Complex64::from_polar(1.0, phi_echo))
        * mi
}

/// ρ → (I ⊗ U_π) ρ (I ⊗ U_π)†
pub fn apply_echo(rho: &DensityMatrix, phi_echo: f64) -> Result<DensityMatrix, ProtocolError> {
    let spec = HilbertSpec::new(rho.dim() / 2)?;
    if spec.joint_dim() != rho.dim() {
        return Err(HilbertError::OddDimension(rho.dim()).into());
    }
    let u = lift_qubit_operator(spec, &echo_unitary(phi_echo));
    Ok(DensityMatrix::from_matrix(&u * rho.matrix() * u.adjoint())?)
}

/// State bookkeeping at the end of a segment (after sanitizing).
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub label: &'static str,
    pub t: f64,
    /// ⟨N_tot⟩ (⟨|e⟩⟨e|⟩ for the two-level reference).
    pub n_tot: f64,
    pub p_e: f64,
    /// |Tr ρ − 1| before renormalization; 0 for the echo.
    pub raw_trace_defect: f64,
}

/// Battery statistics at the start and end of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryTrack {
    pub start: BatteryObservables,
    pub end: BatteryObservables,
}

impl BatteryTrack {
    /// Back-action Δn = ⟨n⟩_i − ⟨n⟩_f.
    pub fn delta_n(&self) -> f64 {
        self.start.mean_n - self.end.mean_n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Final excited-state population.
    pub p_e: f64,
    /// `None` for the classical reference.
    pub battery: Option<BatteryTrack>,
    /// Largest pre-renormalization trace defect over all segments.
    pub trace_defect: f64,
    /// Smallest eigenvalue of the final state.
    pub min_eig: f64,
    pub checkpoints: Vec<Checkpoint>,
}

impl RunResult {
    pub fn delta_n(&self) -> Option<f64> {
        self.battery.map(|b| b.delta_n())
    }

    pub fn positivity_ok(&self) -> bool {
        self.min_eig >= -POSITIVITY_TOLERANCE
    }
}

const SEGMENT_LABELS: [&str; 4] = ["forward-sweep", "plateau-1", "plateau-2", "reverse-sweep"];

/// Runs the segmented protocol with generator `liouv` from `rho0`.
fn run_segments(
    liouv: &Liouvillian,
    p: &ProtocolParams,
    rho0: DensityMatrix,
    proj_e: &ComplexOperator,
    n_tot: &ComplexOperator,
    cfg: &IntegratorConfig,
) -> Result<(DensityMatrix, Vec<Checkpoint>, f64), ProtocolError> {
    let dim = rho0.dim();
    let bounds = p.boundaries();
    let mut rho = rho0;
    let mut checkpoints = Vec::with_capacity(6);
    let mut worst_trace = 0.0f64;
    let observe = |rho: &DensityMatrix| -> Result<(f64, f64), ProtocolError> {
        Ok((expectation(rho, n_tot)?.re, expectation(rho, proj_e)?.re))
    };
    let (n0, pe0) = observe(&rho)?;
    checkpoints.push(Checkpoint {
        label: "initial",
        t: 0.0,
        n_tot: n0,
        p_e: pe0,
        raw_trace_defect: 0.0,
    });

    for (seg, label) in SEGMENT_LABELS.iter().enumerate() {
        let (t0, t1) = (bounds[seg], bounds[seg + 1]);
        if t1 - t0 > 1e-12 * p.tau_c {
            let y = integrate_segment(
                &vectorize(&rho),
                t0,
                t1,
                |t, y, dy| liouv.apply(detuning_clamped(t, p), y, dy),
                cfg,
            )?;
            let raw = devectorize(&y, dim)?;
            let raw_defect = (raw.trace() - Complex64::new(1.0, 0.0)).norm();
            worst_trace = worst_trace.max(raw_defect);
            rho = sanitize(&raw)?;
            let (n, pe) = observe(&rho)?;
            checkpoints.push(Checkpoint {
                label,
                t: t1,
                n_tot: n,
                p_e: pe,
                raw_trace_defect: raw_defect,
            });
        }
        if seg == 1 && p.echo {
            rho = apply_echo(&rho, p.phi_echo)?;
            let (n, pe) = observe(&rho)?;
            checkpoints.push(Checkpoint {
                label: "echo",
                t: t1,
                n_tot: n,
                p_e: pe,
                raw_trace_defect: 0.0,
            });
        }
    }
    Ok((rho, checkpoints, worst_trace))
}

/// Quantum-battery interferometer with a pre-assembled generator.
///
/// The generator depends only on (n_cut, g, noise), so one simulator serves a
/// whole θ_geo × τ_p grid.
#[derive(Debug, Clone)]
pub struct QuantumSimulator {
    ops: Operators,
    liouv: Liouvillian,
    g: f64,
    cfg: IntegratorConfig,
}

impl QuantumSimulator {
    pub fn new(n_cut: usize, g: f64, noise: &NoiseParams, cfg: IntegratorConfig) -> Result<Self, ProtocolError> {
        cfg.validate()?;
        let ops = build_operators(HilbertSpec::new(n_cut)?);
        let liouv = assemble(&ops, g, noise)?;
        Ok(Self { ops, liouv, g, cfg })
    }

    /// Simulator sized for `battery` and calibrated from `p`.
    pub fn for_protocol(
        p: &ProtocolParams,
        battery: &BatteryStateSpec,
        noise: &NoiseParams,
        cfg: IntegratorConfig,
    ) -> Result<Self, ProtocolError> {
        p.validate_quantum()?;
        Self::new(battery.adequate_cutoff()?, p.g(), noise, cfg)
    }

    pub fn n_cut(&self) -> usize {
        self.ops.spec.n_cut()
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn operators(&self) -> &Operators {
        &self.ops
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liouv
    }

    /// Battery vector for `p`, with the battery phase set to θ_geo − π/2.
    pub fn prepare_battery(
        &self,
        p: &ProtocolParams,
        battery: &BatteryStateSpec,
    ) -> Result<StateVector, ProtocolError> {
        Ok(battery.with_phase(p.battery_phase()).build(self.n_cut())?)
    }

    /// Full protocol from |ψ_B⟩ ⊗ |g⟩.
    pub fn run(&self, p: &ProtocolParams, battery: &BatteryStateSpec) -> Result<RunResult, ProtocolError> {
        let psi = self.prepare_battery(p, battery)?;
        self.run_from(p, &psi)
    }

    /// Full protocol from an explicit battery vector and a ground-state qubit.
    pub fn run_from(&self, p: &ProtocolParams, battery: &StateVector) -> Result<RunResult, ProtocolError> {
        p.validate_quantum()?;
        if (p.g() - self.g).abs() > 1e-12 * self.g.abs().max(1e-300) {
            return Err(ProtocolError::InvalidParams(format!(
                "simulator assembled for g = {} but parameters give g = {}",
                self.g,
                p.g()
            )));
        }
        if battery.dim() != self.n_cut() {
            return Err(HilbertError::DimensionMismatch {
                expected: self.n_cut(),
                found: battery.dim(),
            }
            .into());
        }
        let rho0 = DensityMatrix::product(battery, Qubit::Ground);
        let initial = battery_observables(&rho0);
        let (rho, checkpoints, trace_defect) =
            run_segments(&self.liouv, p, rho0, &self.ops.proj_e, &self.ops.n_tot, &self.cfg)?;
        let diag = check_density(&rho, POSITIVITY_TOLERANCE);
        Ok(RunResult {
            p_e: expectation(&rho, &self.ops.proj_e)?.re,
            battery: Some(BatteryTrack {
                start: initial,
                end: battery_observables(&rho),
            }),
            trace_defect,
            min_eig: diag.min_eigenvalue,
            checkpoints,
        })
    }

    /// Evolution at constant detuning `delta`, returning ρ at each of the
    /// ascending sample `times` (ns, measured from ρ₀). No renormalization.
    pub fn evolve_frozen(
        &self,
        rho0: &DensityMatrix,
        delta: f64,
        times: &[f64],
    ) -> Result<Vec<DensityMatrix>, ProtocolError> {
        let dim = self.ops.spec.joint_dim();
        if rho0.dim() != dim {
            return Err(HilbertError::DimensionMismatch {
                expected: dim,
                found: rho0.dim(),
            }
            .into());
        }
        let mut y = vectorize(rho0);
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &ts in times {
            if ts < t {
                return Err(ProtocolError::InvalidParams(format!(
                    "sample times must be ascending and non-negative ({ts} after {t})"
                )));
            }
            if ts > t {
                y = integrate_segment(&y, t, ts, |_, y, dy| self.liouv.apply(delta, y, dy), &self.cfg)?;
                t = ts;
            }
            out.push(devectorize(&y, dim)?);
        }
        Ok(out)
    }
}

/// Quantum-battery run: battery built at its cutoff with phase θ_geo − π/2,
/// qubit initially in |g⟩.
pub fn run_quantum(
    p: &ProtocolParams,
    battery: &BatteryStateSpec,
    noise: &NoiseParams,
    cfg: &IntegratorConfig,
) -> Result<RunResult, ProtocolError> {
    QuantumSimulator::for_protocol(p, battery, noise, *cfg)?.run(p, battery)
}

/// Two-level reference with H = δ(t)σ_z/2 + (Ω/2)(cos φ_θ σ_x + sin φ_θ σ_y).
/// Only the qubit channels Γ₁ and γ_φ act; κ and n̄_th are ignored.
pub fn run_classical(
    p: &ProtocolParams,
    noise: &NoiseParams,
    cfg: &IntegratorConfig,
) -> Result<RunResult, ProtocolError> {
    p.validate()?;
    cfg.validate()?;
    let noise = noise.qubit_only();
    noise.validate()?;
    let ops = build_operators(HilbertSpec::new(1)?);
    let phi = p.battery_phase();
    let h0 = (&ops.sigma_plus * Complex64::from_polar(1.0, -phi) + &ops.sigma_minus * Complex64::from_polar(1.0, phi))
        .scale(0.5 * p.omega);
    let h_delta = ops.sigma_z.scale(0.5);
    let liouv = Liouvillian::from_parts(
        &h0,
        &h_delta,
        &[(noise.gamma1, &ops.sigma_minus), (noise.gamma_phi / 2.0, &ops.sigma_z)],
    );
    let rho0 = DensityMatrix::from_pure(&StateVector::basis(2, Qubit::Ground as usize));
    let (rho, checkpoints, trace_defect) = run_segments(&liouv, p, rho0, &ops.proj_e, &ops.n_tot, cfg)?;
    let diag = check_density(&rho, POSITIVITY_TOLERANCE);
    Ok(RunResult {
        p_e: expectation(&rho, &ops.proj_e)?.re,
        battery: None,
        trace_defect,
        min_eig: diag.min_eigenvalue,
        checkpoints,
    })
}

/// θ_geo grid of `count` uniform points on [0, 2π], endpoints included.
pub fn theta_grid(count: usize) -> Vec<f64> {
    uniform_grid(0.0, 2.0 * PI, count)
}

/// `count` uniform points on [lo, hi], endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn detuning_examples() {
        let p = ProtocolParams::default();
        assert_eq!(detuning(0.0, &p).unwrap(), -p.delta0);
        assert!(detuning(p.tau_p / 2.0, &p).unwrap().abs() < 1e-15);
        assert!((detuning(p.tau_c, &p).unwrap() + p.delta0).abs() < 1e-15);
        assert_eq!(detuning(50.0, &p).unwrap(), p.delta0);
        assert!((detuning(p.tau_c - p.tau_p / 2.0, &p).unwrap()).abs() < 1e-15);
        assert!(matches!(detuning(-1.0, &p), Err(ProtocolError::OutOfWindow { .. })));
        assert!(matches!(detuning(100.5, &p), Err(ProtocolError::OutOfWindow { .. })));
    }

    #[test]
    fn detuning_is_continuous() {
        let p = ProtocolParams::default();
        for &t in &[p.tau_p, p.tau_c - p.tau_p] {
            let lo = detuning(t - 1e-9, &p).unwrap();
            let hi = detuning(t + 1e-9, &p).unwrap();
            assert!((lo - hi).abs() < 1e-8);
        }
    }

    #[test]
    fn coupling_calibration() {
        let p = ProtocolParams::default();
        assert!((p.g() * 2.0 * p.nbar.sqrt() - p.omega).abs() < 1e-12);
        // g/2π ≈ 4.472 MHz at n̄ = 5
        assert!((crate::rad_per_ns_to_mhz(p.g()) - 4.472135955).abs() < 1e-6);
    }

    #[test]
    fn validation() {
        let bad = ProtocolParams {
            tau_p: 60.0,
            ..ProtocolParams::default()
        };
        assert!(bad.validate().is_err());
        let edge = ProtocolParams {
            tau_p: 50.0,
            ..ProtocolParams::default()
        };
        assert!(edge.validate().is_ok());
    }

    #[test]
    fn echo_unitary_examples() {
        let u = echo_unitary(0.0);
        let g = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let e = nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((&u * &g - &e * c(0.0, -1.0)).norm() < 1e-15);
        assert!((&u * &e - &g * c(0.0, -1.0)).norm() < 1e-15);
        for &phi in &[0.0, 0.3, 2.0, -1.1] {
            let u = echo_unitary(phi);
            assert!((&u * u.adjoint() - ComplexOperator::identity(2, 2)).norm() < 1e-14);
            assert!((&u * &u + ComplexOperator::identity(2, 2)).norm() < 1e-14);
            // |g⟩ → −i e^{−iφ}|e⟩
            assert!((u[(1, 0)] - c(0.0, -1.0) * Complex64::from_polar(1.0, -phi)).norm() < 1e-15);
        }
    }

    #[test]
    fn joint_echo_moves_ground_to_excited_in_same_fock_level() {
        let spec = HilbertSpec::new(4).unwrap();
        let psi = StateVector::basis(spec.joint_dim(), spec.index(2, Qubit::Ground));
        let out = apply_echo(&DensityMatrix::from_pure(&psi), 0.7).unwrap();
        let k = spec.index(2, Qubit::Excited);
        assert!((out.matrix()[(k, k)].re - 1.0).abs() < 1e-15);
        let ops = build_operators(spec);
        let u = lift_qubit_operator(spec, &echo_unitary(0.0));
        assert!(crate::hilbert::commutator_norm(&u, &ops.n_tot) > 0.1);
    }

    #[test]
    fn echo_preserves_spectrum() {
        let amps: Vec<Complex64> = (0..6).map(|k| c(0.3 + k as f64 * 0.1, 0.2 - k as f64 * 0.05)).collect();
        let psi = StateVector::from_amplitudes(amps).unwrap();
        let mixed = DensityMatrix::from_matrix(
            DensityMatrix::from_pure(&psi).matrix().scale(0.6) + DensityMatrix::maximally_mixed(6).matrix().scale(0.4),
        )
        .unwrap();
        let out = apply_echo(&mixed, 1.3).unwrap();
        let mut a: Vec<f64> = mixed.matrix().symmetric_eigenvalues().iter().copied().collect();
        let mut b: Vec<f64> = out.matrix().symmetric_eigenvalues().iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((out.trace() - mixed.trace()).norm() < 1e-14);
    }

    #[test]
    fn decoupled_qubit_is_flipped_by_single_echo() {
        let p = ProtocolParams {
            omega: 0.0,
            nbar: 1.0,
            ..ProtocolParams::default()
        };
        let cfg = IntegratorConfig::default();
        let cl = run_classical(&p, &NoiseParams::none(), &cfg).unwrap();
        assert!((cl.p_e - 1.0).abs() < 1e-9);
        let q = run_quantum(
            &p,
            &BatteryStateSpec::Coherent { nbar: 1.0, phase: 0.0 },
            &NoiseParams::none(),
            &cfg,
        )
        .unwrap();
        assert!((q.p_e - 1.0).abs() < 1e-9);
        assert!(cl.battery.is_none());
    }

    #[test]
    fn frozen_resonant_fock_rabi() {
        let p = ProtocolParams {
            nbar: 2.0,
            ..ProtocolParams::default()
        };
        let n = 2;
        let battery = BatteryStateSpec::Fock { n };
        let sim =
            QuantumSimulator::for_protocol(&p, &battery, &NoiseParams::none(), IntegratorConfig::default()).unwrap();
        let psi = sim.prepare_battery(&p, &battery).unwrap();
        let rho0 = DensityMatrix::product(&psi, Qubit::Ground);
        let times: Vec<f64> = (0..=10).map(|k| 10.0 * k as f64).collect();
        let states = sim.evolve_frozen(&rho0, 0.0, &times).unwrap();
        for (t, rho) in times.iter().zip(&states) {
            let pe = expectation(rho, &sim.operators().proj_e).unwrap().re;
            let expected = (sim.g() * (n as f64).sqrt() * t).sin().powi(2);
            assert!((pe - expected).abs() < 1e-6, "t = {t}: {pe} vs {expected}");
        }
    }

    #[test]
    fn default_run_is_physical() {
        let p = ProtocolParams {
            theta_geo: 0.4,
            ..ProtocolParams::default()
        };
        let r = run_quantum(
            &p,
            &BatteryStateSpec::Coherent { nbar: 5.0, phase: 0.0 },
            &NoiseParams::nominal(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(r.p_e > -1e-7 && r.p_e < 1.0 + 1e-7);
        assert!(r.positivity_ok(), "min eig {}", r.min_eig);
        assert!(r.trace_defect < 1e-9);
        assert_eq!(r.checkpoints.len(), 6);
        let b = r.battery.unwrap();
        assert!((b.start.mean_n - 5.0).abs() < 1e-6);
        assert!((b.start.eta_coh - 1.0).abs() < 1e-6);
    }

    #[test]
    fn simulator_rejects_mismatched_coupling() {
        let p = ProtocolParams::default();
        let battery = BatteryStateSpec::Coherent { nbar: 5.0, phase: 0.0 };
        let sim =
            QuantumSimulator::for_protocol(&p, &battery, &NoiseParams::none(), IntegratorConfig::default()).unwrap();
        let other = ProtocolParams { nbar: 6.0, ..p };
        assert!(matches!(
            sim.run(&other, &battery),
            Err(ProtocolError::InvalidParams(_))
        ));
    }

    #[test]
    fn grids() {
        let g = theta_grid(101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert!((g[100] - 2.0 * PI).abs() < 1e-15);
        assert_eq!(uniform_grid(25.0, 35.0, 21)[10], 30.0);
        assert_eq!(uniform_grid(1.0, 2.0, 1), vec![1.0]);
    }
}
