//! Simulation core for echo-refocused geometric Landau–Zener interferometry
//! driven by a single quantized bosonic mode (the "battery").
//!
//! The joint battery ⊗ qubit space is truncated at a Fock cutoff and evolved
//! under a vectorized Lindblad generator with an adaptive order-8 Runge–Kutta
//! integrator. Closed-form sector results live in [`analytics`] and serve as
//! independent oracles for the full simulation.
//!
//! Units: times in ns, angular frequencies and rates in rad/ns (or 1/ns).

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod battery;
pub mod hilbert;
pub mod liouvillian;
pub mod metrics;
pub mod odeint;
pub mod protocol;
pub mod sparse;

pub use num_complex::Complex64;

/// Converts a frequency quoted as f = ω/2π in MHz to an angular frequency in rad/ns.
pub fn mhz_to_rad_per_ns(f_mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_mhz * 1e-3
}

/// Inverse of [`mhz_to_rad_per_ns`].
pub fn rad_per_ns_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI) * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversion_round_trips() {
        let w = mhz_to_rad_per_ns(20.0);
        assert!((w - 0.04 * std::f64::consts::PI).abs() < 1e-15);
        assert!((rad_per_ns_to_mhz(w) - 20.0).abs() < 1e-12);
    }
}
