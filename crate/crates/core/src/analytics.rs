//! Closed-form results for the Jaynes–Cummings sectors, Landau–Zener scaling
//! and the photon statistics of the battery families.
//!
//! These are independent of the numerical simulator and serve as oracles.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::battery::SqueezeAlignment;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("n̄ = {nbar} does not exceed the squeezing energy sinh²r = {squeeze_energy}")]
    EnergyBudgetExceeded { nbar: f64, squeeze_energy: f64 },
}

/// Sector gap Ω_n = 2g√n.
pub fn sector_gap(n: usize, g: f64) -> f64 {
    2.0 * g * (n as f64).sqrt()
}

/// Ω_n = Ω√(n/n̄) under the calibration g = Ω/(2√n̄).
pub fn calibrated_gap(omega: f64, n: f64, nbar: f64) -> f64 {
    omega * (n / nbar).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborGap {
    /// Ω_{n±1}/Ω_n = √(1 ± 1/n)
    pub exact_ratio: f64,
    /// 1 ± 1/(2n) [− 1/(8n²) at order 2]
    pub series_ratio: f64,
}

pub fn neighbor_gap_expansion(n: usize, branch: Neighbor, order: u8) -> Result<NeighborGap, AnalyticsError> {
    if n == 0 || (branch == Neighbor::Minus && n < 2) {
        return Err(AnalyticsError::InvalidArgument(format!(
            "neighbor expansion needs n ≥ 1 (n ≥ 2 for the minus branch), got {n}"
        )));
    }
    let x = 1.0 / n as f64;
    let s = match branch {
        Neighbor::Plus => 1.0,
        Neighbor::Minus => -1.0,
    };
    let series_ratio = match order {
        1 => 1.0 + s * x / 2.0,
        2 => 1.0 + s * x / 2.0 - x * x / 8.0,
        _ => {
            return Err(AnalyticsError::InvalidArgument(format!(
                "expansion order must be 1 or 2, got {order}"
            )))
        }
    };
    Ok(NeighborGap {
        exact_ratio: (1.0 + s * x).sqrt(),
        series_ratio,
    })
}

/// Relative RMS gap spread ΔΩ/Ω ≃ √Var(n)/(2n̄).
pub fn gap_width(var_n: f64, nbar: f64) -> f64 {
    var_n.max(0.0).sqrt() / (2.0 * nbar)
}

/// Sweep rate v = 2δ₀/τ_p of the linear ramp (rad/ns²).
pub fn sweep_rate(delta0: f64, tau_p: f64) -> f64 {
    2.0 * delta0 / tau_p
}

/// Adiabaticity exponent β = πΩ_n²/(2v).
pub fn lz_exponent(omega_n: f64, v: f64) -> f64 {
    PI * omega_n * omega_n / (2.0 * v)
}

/// Asymptotic Landau–Zener probability exp(−πΩ_n²/(2v)).
pub fn lz_probability(omega_n: f64, v: f64) -> f64 {
    (-lz_exponent(omega_n, v)).exp()
}

/// Adiabatic-impulse fringe amplitude A = 4P(1−P).
pub fn fringe_amplitude(p: f64) -> f64 {
    4.0 * p * (1.0 - p)
}

/// Model fringe 1 − A sin²θ.
pub fn model_fringe(theta: f64, amplitude: f64) -> f64 {
    1.0 - amplitude * theta.sin().powi(2)
}

/// Sector amplitude as a function of x = n/n̄: A(x) = 4e^{−βx}(1 − e^{−βx}).
pub fn scaled_fringe_amplitude(x: f64, beta: f64) -> f64 {
    fringe_amplitude((-beta * x).exp())
}

/// A″(1) = 4β²P₀(1 − 4P₀) with P₀ = e^{−β}.
pub fn fringe_second_derivative(p0: f64, beta: f64) -> f64 {
    4.0 * beta * beta * p0 * (1.0 - 4.0 * p0)
}

/// Second-order deficit A(1) − ⟨A⟩ ≃ 2β²P₀(4P₀ − 1)Var(n)/n̄².
pub fn averaged_deficit(p0: f64, beta: f64, var_n: f64, nbar: f64) -> f64 {
    2.0 * beta * beta * p0 * (4.0 * p0 - 1.0) * var_n / (nbar * nbar)
}

/// Poisson weights p_0..p_N with N ≥ n̄ + 10√n̄, extended until the remaining
/// tail is below `tail_tol`.
pub fn poisson_weights(nbar: f64, tail_tol: f64) -> Vec<f64> {
    if nbar <= 0.0 {
        return vec![1.0];
    }
    let floor = (nbar + 10.0 * nbar.sqrt()).ceil() as usize;
    let mut w = Vec::with_capacity(floor + 1);
    let mut log_p = -nbar;
    let mut acc = 0.0;
    let mut n = 0usize;
    loop {
        let p = log_p.exp();
        w.push(p);
        acc += p;
        n += 1;
        log_p += nbar.ln() - (n as f64).ln();
        if n > floor && (1.0 - acc) < tail_tol && (n as f64) > nbar {
            break;
        }
        if n > floor + 10_000 {
            break;
        }
    }
    w
}

/// Brute-force Poisson average ⟨A⟩ = Σ p_n A(n/n̄).
pub fn poisson_averaged_amplitude(nbar: f64, beta: f64) -> f64 {
    poisson_weights(nbar, 1e-12)
        .iter()
        .enumerate()
        .map(|(n, p)| p * scaled_fringe_amplitude(n as f64 / nbar, beta))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorAmplitudes {
    /// Amplitude remaining on |n, g⟩.
    pub a: Complex64,
    /// Amplitude transferred to |n−1, e⟩.
    pub b: Complex64,
}

/// λ_n = √(g²n + δ²/4)
pub fn sector_frequency(n: usize, g: f64, delta: f64) -> f64 {
    (g * g * n as f64 + delta * delta / 4.0).sqrt()
}

/// Exact constant-detuning evolution of |n, g⟩ inside its two-level sector.
///
/// For n = 0 the state |0, g⟩ is uncoupled and only acquires e^{iδt/2}.
pub fn sector_amplitudes(n: usize, g: f64, delta: f64, t: f64) -> SectorAmplitudes {
    if n == 0 {
        return SectorAmplitudes {
            a: Complex64::from_polar(1.0, delta * t / 2.0),
            b: Complex64::new(0.0, 0.0),
        };
    }
    let lam = sector_frequency(n, g, delta);
    if lam == 0.0 {
        return SectorAmplitudes {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        };
    }
    let (s, c) = (lam * t).sin_cos();
    SectorAmplitudes {
        a: Complex64::new(c, delta / (2.0 * lam) * s),
        b: Complex64::new(0.0, -g * (n as f64).sqrt() / lam * s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitReduced {
    pub rho_ee: f64,
    pub rho_gg: f64,
    /// ⟨g|ρ_q|e⟩
    pub rho_ge: Complex64,
}

/// Reduced qubit state for |ψ_B⟩ ⊗ |g⟩ evolved at constant detuning.
pub fn reduced_qubit(c: &[Complex64], g: f64, delta: f64, t: f64) -> QubitReduced {
    reduced_qubit_with(c, |n| sector_amplitudes(n, g, delta, t))
}

/// Reduced qubit state from arbitrary per-sector amplitudes.
pub fn reduced_qubit_with<F>(c: &[Complex64], amplitudes: F) -> QubitReduced
where
    F: Fn(usize) -> SectorAmplitudes,
{
    let sectors: Vec<SectorAmplitudes> = (0..c.len()).map(amplitudes).collect();
    let mut rho_ee = 0.0;
    let mut rho_gg = 0.0;
    let mut rho_ge = Complex64::new(0.0, 0.0);
    for (n, (cn, s)) in c.iter().zip(&sectors).enumerate() {
        rho_ee += cn.norm_sqr() * s.b.norm_sqr();
        rho_gg += cn.norm_sqr() * s.a.norm_sqr();
        if n + 1 < c.len() {
            rho_ge += *cn * c[n + 1].conj() * s.a * sectors[n + 1].b.conj();
        }
    }
    QubitReduced { rho_ee, rho_gg, rho_ge }
}

/// ⟨a⟩ = Σ √(k+1) c_k* c_{k+1}
pub fn amean_from_amplitudes(c: &[Complex64]) -> Complex64 {
    c.windows(2)
        .enumerate()
        .map(|(k, w)| w[0].conj() * w[1] * ((k + 1) as f64).sqrt())
        .sum()
}

/// ⟨a⟩ = e^{−iφ} Σ √(n+1) √(p_n p_{n+1}) for number-squeezed phase states.
pub fn number_squeezed_amean(p: &[f64], phase: f64) -> Complex64 {
    let overlap: f64 = p
        .windows(2)
        .enumerate()
        .map(|(n, w)| ((n + 1) as f64).sqrt() * (w[0] * w[1]).sqrt())
        .sum();
    Complex64::from_polar(overlap, -phase)
}

/// (mean, variance) of a photon-number distribution.
pub fn number_moments(p: &[f64]) -> (f64, f64) {
    let mean: f64 = p.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let second: f64 = p.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
    (mean, second - mean * mean)
}

/// Photon-number variance of D(α)S(ζ)|0⟩ with |α|² = `alpha2` and
/// `rel_angle` = 2 arg α − ϑ_s.
pub fn squeezed_variance(alpha2: f64, r: f64, rel_angle: f64) -> f64 {
    let sh2 = r.sinh().powi(2);
    alpha2 * ((2.0 * r).cosh() - (2.0 * r).sinh() * rel_angle.cos()) + 2.0 * sh2 * (sh2 + 1.0)
}

/// Var_amp = |α|²e^{−2r} + 2sinh²r(sinh²r + 1)
pub fn amplitude_squeezed_variance(nbar: f64, r: f64) -> f64 {
    squeezed_variance(nbar - r.sinh().powi(2), r, 0.0)
}

/// Var_phase = |α|²e^{2r} + 2sinh²r(sinh²r + 1)
pub fn phase_squeezed_variance(nbar: f64, r: f64) -> f64 {
    squeezed_variance(nbar - r.sinh().powi(2), r, PI)
}

/// Smallest n̄ for which amplitude squeezing narrows the photon-number
/// distribution below the coherent value: n̄(1 − e^{−2r}) = 2s(s+1) − s e^{−2r}
/// with s = sinh²r.
pub fn amplitude_squeezing_threshold(r: f64) -> f64 {
    let s = r.sinh().powi(2);
    let e = (-2.0 * r).exp();
    (2.0 * s * (s + 1.0) - s * e) / (1.0 - e)
}

/// Small-r expansion n̄ − 2n̄r + (2n̄+1)r² of the amplitude-squeezed variance.
pub fn amplitude_variance_small_r(nbar: f64, r: f64) -> f64 {
    nbar - 2.0 * nbar * r + (2.0 * nbar + 1.0) * r * r
}

/// η_coh = 1 − sinh²r/n̄ at fixed total energy.
pub fn squeezed_eta(nbar: f64, r: f64) -> f64 {
    1.0 - r.sinh().powi(2) / nbar
}

/// Leading-order η_coh ≃ 1 − r²/n̄.
pub fn squeezed_eta_small_r(nbar: f64, r: f64) -> f64 {
    1.0 - r * r / nbar
}

/// Effective transverse gap Ω√η_coh.
pub fn omega_eff(omega: f64, eta_coh: f64) -> f64 {
    omega * eta_coh.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedStats {
    pub var_n: f64,
    pub eta_coh: f64,
    /// Ω_eff/Ω = √η_coh
    pub omega_eff_ratio: f64,
}

/// Statistics of the fixed-energy displaced squeezed battery with battery
/// phase `phase` (α = |α|e^{−iφ}).
pub fn squeezed_stats(
    nbar: f64,
    r: f64,
    alignment: SqueezeAlignment,
    phase: f64,
) -> Result<SqueezedStats, AnalyticsError> {
    let squeeze_energy = r.sinh().powi(2);
    if !(nbar > squeeze_energy) {
        return Err(AnalyticsError::EnergyBudgetExceeded { nbar, squeeze_energy });
    }
    let arg_alpha = -phase;
    let rel_angle = match alignment {
        SqueezeAlignment::Amplitude => 0.0,
        SqueezeAlignment::Phase => PI,
        SqueezeAlignment::Angle(theta_s) => 2.0 * arg_alpha - theta_s,
    };
    let eta = squeezed_eta(nbar, r);
    Ok(SqueezedStats {
        var_n: squeezed_variance(nbar - squeeze_energy, r, rel_angle),
        eta_coh: eta,
        omega_eff_ratio: eta.sqrt(),
    })
}

/// Squeezed-vacuum weights p_{2m} = (2m)!/(2^{2m}(m!)²) tanh^{2m}r / cosh r
/// for m = 0..=m_max, indexed by m.
pub fn squeezed_vacuum_weights(r: f64, m_max: usize) -> Vec<f64> {
    let t2 = r.tanh().powi(2);
    let mut w = Vec::with_capacity(m_max + 1);
    let mut p = 1.0 / r.cosh();
    for m in 0..=m_max {
        w.push(p);
        // (2m+2)!/(2m)! / (4 (m+1)²) = (2m+1)/(2m+2)
        p *= t2 * (2 * m + 1) as f64 / (2 * m + 2) as f64;
    }
    w
}

/// Resonant excited population Σ p_{2m} sin²(g√(2m) t) for a squeezed vacuum
/// battery, truncated once the neglected weight falls below 1e-14.
pub fn squeezed_vacuum_resonant_pe(r: f64, g: f64, t: f64) -> f64 {
    let mut m_max = 8;
    loop {
        let w = squeezed_vacuum_weights(r, m_max);
        let kept: f64 = w.iter().sum();
        if 1.0 - kept < 1e-14 || m_max > 100_000 {
            return w
                .iter()
                .enumerate()
                .map(|(m, p)| p * (g * ((2 * m) as f64).sqrt() * t).sin().powi(2))
                .sum();
        }
        m_max *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhz_to_rad_per_ns;
    use proptest::prelude::*;

    fn defaults_beta() -> (f64, f64) {
        let omega = mhz_to_rad_per_ns(20.0);
        let v = sweep_rate(mhz_to_rad_per_ns(100.0), 25.0);
        (lz_exponent(omega, v), lz_probability(omega, v))
    }

    #[test]
    fn gap_examples() {
        let omega = mhz_to_rad_per_ns(20.0);
        let nbar = 5.0;
        let g = omega / (2.0 * f64::sqrt(nbar));
        assert_eq!(sector_gap(0, g), 0.0);
        assert!((sector_gap(5, g) - omega).abs() < 1e-15);
        assert!((calibrated_gap(omega, 5.0, nbar) - omega).abs() < 1e-15);
        assert!((crate::rad_per_ns_to_mhz(g) - 4.4721).abs() < 1e-4);
    }

    #[test]
    fn neighbor_examples() {
        let plus = neighbor_gap_expansion(5, Neighbor::Plus, 2).unwrap();
        assert!((plus.exact_ratio - 1.095445).abs() < 1e-6);
        assert!((plus.series_ratio - 1.095).abs() < 1e-15);
        let minus = neighbor_gap_expansion(2, Neighbor::Minus, 2).unwrap();
        assert!((minus.exact_ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((minus.series_ratio - 0.71875).abs() < 1e-15);
        let first = neighbor_gap_expansion(4, Neighbor::Plus, 1).unwrap();
        assert_eq!(first.series_ratio, 1.125);
        assert!(neighbor_gap_expansion(1, Neighbor::Minus, 2).is_err());
        assert!(neighbor_gap_expansion(3, Neighbor::Plus, 3).is_err());
    }

    #[test]
    fn neighbor_series_error_decays_as_inverse_cube() {
        // log-log slope of |exact − series| between n = 100 and n = 1000
        let err = |n| {
            let r = neighbor_gap_expansion(n, Neighbor::Plus, 2).unwrap();
            (r.exact_ratio - r.series_ratio).abs()
        };
        let slope = (err(1000) / err(100)).log10();
        assert!((slope + 3.0).abs() < 0.05, "slope {slope}");
        for n in [2usize, 5, 10, 50] {
            let r = neighbor_gap_expansion(n, Neighbor::Minus, 2).unwrap();
            let bound = 1.0 / (n as f64).powi(3);
            assert!((r.exact_ratio - r.series_ratio).abs() <= bound);
        }
    }

    #[test]
    fn gap_width_examples() {
        assert!((gap_width(5.0, 5.0) - 0.22361).abs() < 1e-5);
        assert!((gap_width(5.0, 5.0) - 1.0 / (2.0 * 5f64.sqrt())).abs() < 1e-15);
        assert_eq!(gap_width(0.0, 5.0), 0.0);
        assert!((gap_width(0.25 * 5.0, 5.0) - 0.1118).abs() < 1e-4);
    }

    #[test]
    fn lz_defaults() {
        let (beta, p) = defaults_beta();
        assert!((beta - 0.05 * PI * PI).abs() < 1e-12);
        assert!((beta - 0.4935).abs() < 1e-4);
        assert!((p - 0.6105).abs() < 1e-4);
        assert_eq!(lz_probability(0.0, 1.0), 1.0);
    }

    #[test]
    fn lz_power_law_and_exponent_law() {
        let omega = mhz_to_rad_per_ns(20.0);
        let v = sweep_rate(mhz_to_rad_per_ns(100.0), 25.0);
        let nbar = 5.0;
        let p_bar = lz_probability(omega, v);
        for n in 0..30 {
            let lhs = lz_probability(calibrated_gap(omega, n as f64, nbar), v);
            let rhs = p_bar.powf(n as f64 / nbar);
            assert!((lhs - rhs).abs() < 1e-14, "n = {n}");
        }
        let p2 = lz_probability(calibrated_gap(omega, 2.0 * nbar, nbar), v);
        assert!((p2 - p_bar * p_bar).abs() < 1e-15);
    }

    #[test]
    fn fringe_examples() {
        assert_eq!(fringe_amplitude(0.5), 1.0);
        assert_eq!(model_fringe(0.0, 0.7), 1.0);
        let (beta, p0) = defaults_beta();
        let h = 1e-3;
        let fd = (scaled_fringe_amplitude(1.0 + h, beta) - 2.0 * scaled_fringe_amplitude(1.0, beta)
            + scaled_fringe_amplitude(1.0 - h, beta))
            / (h * h);
        let exact = fringe_second_derivative(p0, beta);
        assert!(((fd - exact) / exact).abs() < 1e-6, "{fd} vs {exact}");
    }

    #[test]
    fn deficit_matches_poisson_average_at_large_nbar() {
        let (beta, p0) = defaults_beta();
        for &nbar in &[10.0, 15.0, 30.0] {
            let brute = scaled_fringe_amplitude(1.0, beta) - poisson_averaged_amplitude(nbar, beta);
            let series = averaged_deficit(p0, beta, nbar, nbar);
            assert!(
                ((brute - series) / brute).abs() < 0.15,
                "n̄ = {nbar}: {brute} vs {series}"
            );
        }
        // coherent deficit ∝ 1/n̄
        let d10 = averaged_deficit(p0, beta, 10.0, 10.0);
        let d20 = averaged_deficit(p0, beta, 20.0, 20.0);
        assert!((d10 / d20 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_weights_tail() {
        for &nbar in &[0.5, 5.0, 15.0] {
            let w = poisson_weights(nbar, 1e-12);
            let s: f64 = w.iter().sum();
            assert!(1.0 - s < 1e-12);
            assert!(w.len() as f64 >= nbar + 10.0 * nbar.sqrt());
        }
    }

    #[test]
    fn sector_examples() {
        let g = 0.04;
        for n in 1..6 {
            let s = sector_amplitudes(n, g, 0.0, 7.3);
            let w = g * (n as f64).sqrt() * 7.3;
            assert!((s.a - Complex64::new(w.cos(), 0.0)).norm() < 1e-15);
            assert!((s.b - Complex64::new(0.0, -w.sin())).norm() < 1e-15);
            let s0 = sector_amplitudes(n, g, 0.3, 0.0);
            assert_eq!(s0.a, Complex64::new(1.0, 0.0));
            assert_eq!(s0.b, Complex64::new(0.0, 0.0));
        }
        let n = 3;
        let delta = 2.0;
        let lam = sector_frequency(n, g, delta);
        for k in 0..50 {
            let s = sector_amplitudes(n, g, delta, k as f64);
            assert!(s.b.norm_sqr() <= g * g * n as f64 / (lam * lam) + 1e-15);
        }
    }

    #[test]
    fn fock_battery_has_no_qubit_coherence() {
        let mut c = vec![Complex64::new(0.0, 0.0); 8];
        c[4] = Complex64::new(1.0, 0.0);
        for k in 0..10 {
            let q = reduced_qubit(&c, 0.05, 0.2, 10.0 * k as f64);
            assert_eq!(q.rho_ge, Complex64::new(0.0, 0.0));
            assert!((q.rho_ee + q.rho_gg - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn squeezed_vacuum_battery() {
        let r = 0.5;
        let g = 0.05;
        let w = squeezed_vacuum_weights(r, 60);
        let c: Vec<Complex64> = (0..120)
            .map(|n| {
                if n % 2 == 0 {
                    Complex64::new(w[n / 2].sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        for k in 0..20 {
            let t = 5.0 * k as f64;
            let q = reduced_qubit(&c, g, 0.0, t);
            assert_eq!(q.rho_ge, Complex64::new(0.0, 0.0));
            assert!((q.rho_ee - squeezed_vacuum_resonant_pe(r, g, t)).abs() < 1e-13);
        }
        // p₂/p₀ = tanh²r/2
        assert!((w[1] / w[0] - r.tanh().powi(2) / 2.0).abs() < 1e-15);
        let s: f64 = w.iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn amean_examples() {
        let mut fock = vec![Complex64::new(0.0, 0.0); 6];
        fock[3] = Complex64::new(1.0, 0.0);
        assert_eq!(amean_from_amplitudes(&fock), Complex64::new(0.0, 0.0));
        let nbar: f64 = 5.0;
        let phi = 0.7;
        let c: Vec<Complex64> = poisson_weights(nbar, 1e-16)
            .iter()
            .enumerate()
            .map(|(n, p)| Complex64::from_polar(p.sqrt(), -(n as f64) * phi))
            .collect();
        let a = amean_from_amplitudes(&c);
        assert!((a - Complex64::from_polar(nbar.sqrt(), -phi)).norm() < 1e-10);
        let p: Vec<f64> = c.iter().map(|x| x.norm_sqr()).collect();
        assert!((number_squeezed_amean(&p, phi) - a).norm() < 1e-12);
    }

    #[test]
    fn squeezed_stats_examples() {
        let s0 = squeezed_stats(5.0, 0.0, SqueezeAlignment::Amplitude, 0.3).unwrap();
        assert!((s0.var_n - 5.0).abs() < 1e-14);
        assert_eq!(s0.eta_coh, 1.0);
        assert_eq!(s0.omega_eff_ratio, 1.0);
        let s = squeezed_stats(5.0, 0.35, SqueezeAlignment::Amplitude, 0.0).unwrap();
        assert!((s.var_n - 2.707).abs() < 1e-3);
        assert!((s.eta_coh - 0.97448).abs() < 1e-5);
        assert!((s.var_n - amplitude_squeezed_variance(5.0, 0.35)).abs() < 1e-14);
        // explicit angle equal to the amplitude alignment
        let phase = 0.4;
        let a = squeezed_stats(5.0, 0.35, SqueezeAlignment::Angle(-2.0 * phase), phase).unwrap();
        assert!((a.var_n - s.var_n).abs() < 1e-13);
        assert!(matches!(
            squeezed_stats(0.1, 0.5, SqueezeAlignment::Amplitude, 0.0),
            Err(AnalyticsError::EnergyBudgetExceeded { .. })
        ));
        assert!((omega_eff(2.0, 0.25) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn amplitude_squeezing_narrows_only_above_threshold() {
        // Var_amp < n̄ fails near the energy budget, e.g. n̄ = 0.3, r = 0.35.
        assert!(amplitude_squeezed_variance(0.3, 0.35) > 0.3);
        for &nbar in &[1.0, 2.0, 3.0, 5.0, 7.5, 10.0] {
            for &r in &[0.15, 0.25, 0.35, 0.5] {
                assert!(nbar > amplitude_squeezing_threshold(r));
                assert!(amplitude_squeezed_variance(nbar, r) < nbar);
                assert!(phase_squeezed_variance(nbar, r) > nbar);
            }
        }
    }

    #[test]
    fn small_r_expansions() {
        // The r³ remainder of the variance series is (2 − 4n̄/3)r³, inside
        // 5r³ for n̄ ≤ 5.25.
        for &nbar in &[0.5, 1.0, 2.0, 3.0, 5.0] {
            for k in 1..=10 {
                let r = 0.01 * k as f64;
                let exact = amplitude_squeezed_variance(nbar, r);
                let series = amplitude_variance_small_r(nbar, r);
                assert!(((exact - series) / exact).abs() < 5.0 * r.powi(3) / exact);
            }
        }
        for &nbar in &[1.0, 5.0, 7.5, 10.0, 15.0] {
            let r: f64 = 1e-3;
            let cubic = (amplitude_squeezed_variance(nbar, r) - amplitude_variance_small_r(nbar, r)) / r.powi(3);
            assert!(
                (cubic - (2.0 - 4.0 * nbar / 3.0)).abs() < 0.05 * (1.0 + nbar),
                "n̄ = {nbar}: {cubic}"
            );
        }
        for &nbar in &[1.0, 2.0, 5.0, 10.0] {
            for k in 1..=20 {
                let r = 0.01 * k as f64;
                let d = (squeezed_eta(nbar, r) - squeezed_eta_small_r(nbar, r)).abs();
                assert!(d <= 2.0 * r.powi(4) / nbar);
            }
        }
    }

    proptest! {
        #[test]
        fn sector_evolution_is_unitary(n in 0usize..200, g in 0.0f64..0.5, delta in -5.0f64..5.0, t in 0.0f64..500.0) {
            let s = sector_amplitudes(n, g, delta, t);
            prop_assert!((s.a.norm_sqr() + s.b.norm_sqr() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn sector_frequency_bound(n in 1usize..200, g in 0.0f64..0.5, delta in -5.0f64..5.0) {
            let lam = sector_frequency(n, g, delta);
            prop_assert!(lam >= g * (n as f64).sqrt() * (1.0 - 1e-15));
        }

        #[test]
        fn reduced_qubit_is_a_state(
            raw in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..12),
            g in 0.001f64..0.2,
            delta in -1.0f64..1.0,
            t in 0.0f64..100.0,
        ) {
            let norm: f64 = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let c: Vec<Complex64> = raw.iter().map(|&(a, b)| Complex64::new(a, b) / norm).collect();
            let q = reduced_qubit(&c, g, delta, t);
            prop_assert!((q.rho_ee + q.rho_gg - 1.0).abs() < 1e-12);
            prop_assert!(q.rho_ge.norm_sqr() <= q.rho_ee * q.rho_gg + 1e-12);
        }

        #[test]
        fn lz_power_law(n in 0usize..100, nbar in 0.5f64..20.0, omega in 0.01f64..0.5, v in 0.01f64..0.2) {
            let lhs = lz_probability(calibrated_gap(omega, n as f64, nbar), v);
            let rhs = lz_probability(omega, v).powf(n as f64 / nbar);
            prop_assert!((lhs - rhs).abs() < 1e-14);
        }

        #[test]
        fn variance_ordering(nbar in 0.5f64..20.0, r in 0.01f64..1.0) {
            prop_assume!(nbar > r.sinh().powi(2) + 1e-6);
            let amp = amplitude_squeezed_variance(nbar, r);
            let phase = phase_squeezed_variance(nbar, r);
            prop_assert!(phase > nbar);
            if nbar > amplitude_squeezing_threshold(r) {
                prop_assert!(nbar > amp);
            } else {
                prop_assert!(amp >= nbar);
            }
        }
    }
}
