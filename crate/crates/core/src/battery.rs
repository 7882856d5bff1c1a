//! Initial battery states in the truncated Fock basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{HilbertError, StateVector};

/// Probability mass allowed beyond the cutoff before a state is rejected.
pub const TAIL_TOLERANCE: f64 = 1e-8;
/// Target accuracy of the number-squeezed mean.
pub const MEAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BatteryError {
    #[error("cutoff {n_cut} too small: truncated tail probability {tail:e}")]
    CutoffTooSmall { n_cut: usize, tail: f64 },
    #[error("energy budget exceeded: nbar = {nbar} must exceed sinh^2 r = {squeeze_energy}")]
    EnergyBudgetExceeded { nbar: f64, squeeze_energy: f64 },
    #[error("no Gaussian center in [0, {n_cut}] reaches mean photon number {nbar}")]
    MeanUnreachable { nbar: f64, n_cut: usize },
    #[error("Fock index {n} outside cutoff {n_cut}")]
    IndexOutOfRange { n: usize, n_cut: usize },
    #[error("invalid battery parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
}

/// Orientation of the squeezing ellipse relative to the displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezeAlignment {
    /// ϑ_s = 2 arg α: squeezed quadrature along the displacement.
    Amplitude,
    /// ϑ_s = 2 arg α + π
    Phase,
    /// Explicit squeezing angle ϑ_s.
    Angle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatteryStateSpec {
    /// |α⟩ with α = √n̄ e^{−iφ}.
    Coherent {
        nbar: f64,
        phase: f64,
    },
    /// D(α)S(ζ)|0⟩ at fixed total energy: |α|² = n̄ − sinh²r, α = |α| e^{−iφ}.
    DisplacedSqueezed {
        nbar: f64,
        r: f64,
        phase: f64,
        alignment: SqueezeAlignment,
    },
    /// Truncated discrete Gaussian in n with width q√n̄ and phases e^{−inφ}.
    NumberSqueezedGaussian {
        nbar: f64,
        q: f64,
        phase: f64,
    },
    Fock {
        n: usize,
    },
    /// S(ζ)|0⟩ with ζ = r e^{iϑ_s}.
    SqueezedVacuum {
        r: f64,
        angle: f64,
    },
}

impl BatteryStateSpec {
    /// Nominal mean photon number of the ideal (untruncated) state.
    pub fn nominal_mean(&self) -> f64 {
        match *self {
            Self::Coherent { nbar, .. }
            | Self::DisplacedSqueezed { nbar, .. }
            | Self::NumberSqueezedGaussian { nbar, .. } => nbar,
            Self::Fock { n } => n as f64,
            Self::SqueezedVacuum { r, .. } => r.sinh().powi(2),
        }
    }

    /// Same state with the battery phase set to `phase`. Fock and squeezed
    /// vacuum carry no first-order phase and are returned unchanged.
    pub fn with_phase(self, phase: f64) -> Self {
        match self {
            Self::Coherent { nbar, .. } => Self::Coherent { nbar, phase },
            Self::DisplacedSqueezed { nbar, r, alignment, .. } => Self::DisplacedSqueezed {
                nbar,
                r,
                phase,
                alignment,
            },
            Self::NumberSqueezedGaussian { nbar, q, .. } => Self::NumberSqueezedGaussian { nbar, q, phase },
            other => other,
        }
    }

    /// Fock cutoff from the closed-form rule of [`compute_cutoff`].
    pub fn cutoff(&self) -> usize {
        compute_cutoff(self)
    }

    /// Smallest cutoff ≥ [`compute_cutoff`] at which the state builds with a
    /// truncation tail below [`TAIL_TOLERANCE`].
    ///
    /// The rule-based value is returned unchanged whenever it already
    /// suffices; strongly phase-squeezed states can need a few extra levels.
    pub fn adequate_cutoff(&self) -> Result<usize, BatteryError> {
        let base = compute_cutoff(self);
        let limit = 4 * base + 64;
        let mut n_cut = base;
        loop {
            match self.build(n_cut) {
                Ok(_) => return Ok(n_cut),
                Err(BatteryError::CutoffTooSmall { .. } | BatteryError::MeanUnreachable { .. }) if n_cut < limit => {
                    n_cut += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Builds the battery vector on `n_cut` Fock levels.
    pub fn build(&self, n_cut: usize) -> Result<StateVector, BatteryError> {
        match *self {
            Self::Coherent { nbar, phase } => build_coherent(nbar, phase, n_cut),
            Self::DisplacedSqueezed {
                nbar,
                r,
                phase,
                alignment,
            } => build_displaced_squeezed(nbar, r, phase, alignment, n_cut),
            Self::NumberSqueezedGaussian { nbar, q, phase } => build_number_squeezed(nbar, q, phase, n_cut),
            Self::Fock { n } => build_fock(n, n_cut),
            Self::SqueezedVacuum { r, angle } => build_squeezed_vacuum(r, angle, n_cut),
        }
    }

    /// Builds the state at its own cutoff.
    pub fn build_default(&self) -> Result<StateVector, BatteryError> {
        self.build(self.cutoff())
    }
}

fn ceil_usize(x: f64) -> usize {
    x.ceil().max(0.0) as usize
}

fn squeezed_cutoff(nbar: f64, r: f64) -> usize {
    let nbar_eff = nbar + 4.0 * r.sinh().powi(2) + 2.0;
    12.max(ceil_usize(nbar_eff + 7.0 * (nbar_eff + 1.0).sqrt() + 8.0))
}

/// Number-squeezed width σ = max(0.2, q√n̄).
pub fn number_squeezed_width(nbar: f64, q: f64) -> f64 {
    (q * nbar.sqrt()).max(0.2)
}

/// Fock cutoff rule per state family.
pub fn compute_cutoff(spec: &BatteryStateSpec) -> usize {
    match *spec {
        BatteryStateSpec::Coherent { nbar, .. } => 8.max(ceil_usize(nbar + 5.0 * (nbar + 1.0).sqrt() + 8.0)),
        BatteryStateSpec::DisplacedSqueezed { nbar, r, .. } => squeezed_cutoff(nbar, r),
        BatteryStateSpec::NumberSqueezedGaussian { nbar, q, .. } => {
            let sigma = number_squeezed_width(nbar, q);
            10.max(ceil_usize(nbar + 8.0 * sigma + 10.0))
        }
        BatteryStateSpec::Fock { n } => n + 3,
        BatteryStateSpec::SqueezedVacuum { r, .. } => squeezed_cutoff(r.sinh().powi(2), r),
    }
}

fn check_finite_nonneg(name: &str, x: f64) -> Result<(), BatteryError> {
    if !x.is_finite() || x < 0.0 {
        return Err(BatteryError::InvalidParameter(format!("{name} = {x}")));
    }
    Ok(())
}

fn truncate_checked(amps: Vec<Complex64>, n_cut: usize) -> Result<StateVector, BatteryError> {
    let kept: f64 = amps.iter().take(n_cut).map(|c| c.norm_sqr()).sum();
    let total: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let tail = (1.0 - kept / total).max(0.0);
    if tail >= TAIL_TOLERANCE {
        return Err(BatteryError::CutoffTooSmall { n_cut, tail });
    }
    Ok(StateVector::from_amplitudes(amps.into_iter().take(n_cut).collect())?)
}

/// Coherent state |α⟩, α = √n̄ e^{−iφ}.
pub fn build_coherent(nbar: f64, phase: f64, n_cut: usize) -> Result<StateVector, BatteryError> {
    check_finite_nonneg("nbar", nbar)?;
    if n_cut == 0 {
        return Err(HilbertError::InvalidCutoff(0).into());
    }
    let alpha = Complex64::from_polar(nbar.sqrt(), -phase);
    let mut amps = Vec::with_capacity(n_cut);
    let mut c = Complex64::new((-nbar / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..n_cut {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    // Poisson amplitudes are normalized on the infinite space, so the kept
    // weight is the complement of the tail directly.
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    if tail >= TAIL_TOLERANCE {
        return Err(BatteryError::CutoffTooSmall { n_cut, tail });
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

/// Squeezed-vacuum amplitudes on `len` Fock levels (not normalized after truncation).
fn squeezed_vacuum_amplitudes(r: f64, angle: f64, len: usize) -> Vec<Complex64> {
    let mut amps = vec![Complex64::new(0.0, 0.0); len];
    let ratio = -Complex64::from_polar(r.tanh(), angle);
    let mut c = Complex64::new(1.0 / r.cosh().sqrt(), 0.0);
    let mut m = 0usize;
    while 2 * m < len {
        amps[2 * m] = c;
        // c_{2m+2}/c_{2m} = −e^{iϑ} tanh r · √((2m+1)(2m+2)) / (2(m+1))
        let k = 2.0 * m as f64;
        c = c * ratio * ((k + 1.0) * (k + 2.0)).sqrt() / (2.0 * (m as f64 + 1.0));
        m += 1;
    }
    amps
}

/// Squeezed vacuum S(ζ)|0⟩, ζ = r e^{iϑ_s}; only even Fock levels are occupied.
pub fn build_squeezed_vacuum(r: f64, angle: f64, n_cut: usize) -> Result<StateVector, BatteryError> {
    check_finite_nonneg("r", r)?;
    if n_cut == 0 {
        return Err(HilbertError::InvalidCutoff(0).into());
    }
    let amps = squeezed_vacuum_amplitudes(r, angle, n_cut);
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let tail = (1.0 - kept).max(0.0);
    if tail >= TAIL_TOLERANCE {
        return Err(BatteryError::CutoffTooSmall { n_cut, tail });
    }
    Ok(StateVector::from_amplitudes(amps)?)
}

/// exp(α a† − α* a) applied to `v` on a space of dimension `v.len()`.
///
/// The generator is anti-Hermitian, so the exponential is evaluated through
/// the eigendecomposition of the Hermitian matrix i(α a† − α* a).
fn displace(alpha: Complex64, v: &[Complex64]) -> Vec<Complex64> {
    let dim = v.len();
    let mut herm = DMatrix::<Complex64>::zeros(dim, dim);
    let i = Complex64::new(0.0, 1.0);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        // ⟨n|a†|n−1⟩ = √n, ⟨n−1|a|n⟩ = √n
        herm[(n, n - 1)] = i * alpha * s;
        herm[(n - 1, n)] = -i * alpha.conj() * s;
    }
    let eig = herm.symmetric_eigen();
    let u = &eig.eigenvectors;
    let coeffs = u.adjoint() * DVector::from_column_slice(v);
    // exp(A) = exp(−i · iA) = U diag(e^{−iλ}) U†
    let rotated = DVector::from_iterator(
        dim,
        coeffs
            .iter()
            .zip(eig.eigenvalues.iter())
            .map(|(c, &lam)| c * Complex64::from_polar(1.0, -lam)),
    );
    (u * rotated).iter().copied().collect()
}

/// Displaced squeezed state D(α)S(ζ)|0⟩ at fixed total energy n̄.
pub fn build_displaced_squeezed(
    nbar: f64,
    r: f64,
    phase: f64,
    alignment: SqueezeAlignment,
    n_cut: usize,
) -> Result<StateVector, BatteryError> {
    check_finite_nonneg("nbar", nbar)?;
    check_finite_nonneg("r", r)?;
    if n_cut == 0 {
        return Err(HilbertError::InvalidCutoff(0).into());
    }
    let squeeze_energy = r.sinh().powi(2);
    if nbar <= squeeze_energy {
        return Err(BatteryError::EnergyBudgetExceeded { nbar, squeeze_energy });
    }
    let alpha = Complex64::from_polar((nbar - squeeze_energy).sqrt(), -phase);
    let arg_alpha = -phase;
    let angle = match alignment {
        SqueezeAlignment::Amplitude => 2.0 * arg_alpha,
        SqueezeAlignment::Phase => 2.0 * arg_alpha + std::f64::consts::PI,
        SqueezeAlignment::Angle(theta) => theta,
    };
    // Work on an enlarged space so the truncated exponential is exact on the
    // levels that are finally kept.
    let padded = 2 * n_cut + 40;
    let vacuum = squeezed_vacuum_amplitudes(r, angle, padded);
    let displaced = displace(alpha, &vacuum);
    truncate_checked(displaced, n_cut)
}

/// Truncated discrete-Gaussian probabilities with center `mu`.
fn gaussian_probabilities(mu: f64, sigma: f64, n_cut: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n_cut)
        .map(|n| (-(n as f64 - mu).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn mean_of(p: &[f64]) -> f64 {
    p.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

/// Photon-number probabilities of the number-squeezed Gaussian state, with the
/// center solved by bisection so that Σ n p_n = n̄.
pub fn number_squeezed_probabilities(nbar: f64, q: f64, n_cut: usize) -> Result<Vec<f64>, BatteryError> {
    if !(nbar > 0.0 && nbar.is_finite()) {
        return Err(BatteryError::InvalidParameter(format!("nbar = {nbar}")));
    }
    if !(q > 0.0 && q.is_finite()) {
        return Err(BatteryError::InvalidParameter(format!("q = {q}")));
    }
    if n_cut == 0 {
        return Err(HilbertError::InvalidCutoff(0).into());
    }
    let sigma = number_squeezed_width(nbar, q);
    let (mut lo, mut hi) = (0.0, n_cut as f64);
    let f = |mu: f64| mean_of(&gaussian_probabilities(mu, sigma, n_cut)) - nbar;
    if f(lo) > MEAN_TOLERANCE || f(hi) < -MEAN_TOLERANCE {
        return Err(BatteryError::MeanUnreachable { nbar, n_cut });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs() < 0.1 * MEAN_TOLERANCE {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = gaussian_probabilities(mid, sigma, n_cut);
    if (mean_of(&p) - nbar).abs() > MEAN_TOLERANCE {
        return Err(BatteryError::MeanUnreachable { nbar, n_cut });
    }
    Ok(p)
}

/// Number-squeezed phase state c_n = √p_n e^{−inφ}.
pub fn build_number_squeezed(nbar: f64, q: f64, phase: f64, n_cut: usize) -> Result<StateVector, BatteryError> {
    let p = number_squeezed_probabilities(nbar, q, n_cut)?;
    let amps = p
        .iter()
        .enumerate()
        .map(|(n, p)| Complex64::from_polar(p.sqrt(), -(n as f64) * phase))
        .collect();
    Ok(StateVector::from_amplitudes(amps)?)
}

pub fn build_fock(n: usize, n_cut: usize) -> Result<StateVector, BatteryError> {
    if n >= n_cut {
        return Err(BatteryError::IndexOutOfRange { n, n_cut });
    }
    Ok(StateVector::basis(n_cut, n))
}
