//! Figure-level reductions: fringe contrast, battery back-action and the
//! 1/n̄ fit of the contrast deficit.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty input")]
    EmptyInput,
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeSample {
    pub theta_geo: f64,
    pub p_e: f64,
    /// Back-action Δn; `None` without a battery.
    pub delta_n: Option<f64>,
}

/// C = max P_e − min P_e over the sampled grid.
pub fn contrast(p_e: &[f64]) -> Result<f64, MetricsError> {
    if p_e.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let (lo, hi) = p_e.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    Ok(hi - lo)
}

pub fn contrast_of(samples: &[FringeSample]) -> Result<f64, MetricsError> {
    contrast(&samples.iter().map(|s| s.p_e).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backaction {
    pub mean_delta_n: f64,
    /// Population standard deviation over the grid.
    pub std_delta_n: f64,
}

pub fn backaction(delta_n: &[f64]) -> Result<Backaction, MetricsError> {
    if delta_n.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = delta_n.len() as f64;
    let mean = delta_n.iter().sum::<f64>() / n;
    let var = delta_n.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(Backaction {
        mean_delta_n: mean,
        std_delta_n: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when the data have no spread.
    pub r2: f64,
}

/// Ordinary least squares y ≈ intercept + slope·x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricsError::DegenerateFit(format!("{} point(s)", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let syy: f64 = y.iter().map(|yi| (yi - my).powi(2)).sum();
    if sxx <= 1e-300 * n {
        return Err(MetricsError::DegenerateFit("abscissae are identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, r2 })
}

/// Fit of the deficit C_cl − C(n̄) against 1/n̄.
pub fn contrast_deficit_fit(nbar: &[f64], c: &[f64], c_cl: f64) -> Result<LinearFit, MetricsError> {
    if nbar.len() != c.len() {
        return Err(MetricsError::LengthMismatch(nbar.len(), c.len()));
    }
    if nbar.iter().any(|&n| !(n > 0.0)) {
        return Err(MetricsError::DegenerateFit("n̄ must be positive".into()));
    }
    let inv: Vec<f64> = nbar.iter().map(|n| 1.0 / n).collect();
    let deficit: Vec<f64> = c.iter().map(|ci| c_cl - ci).collect();
    linear_fit(&inv, &deficit)
}

/// Least-squares fringe P_e ≈ c₀ + a cos 2θ + b sin 2θ, i.e. a π-periodic
/// c₀' − A sin²(θ − θ₀) shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeShapeFit {
    pub offset: f64,
    /// Peak-to-peak amplitude A = 2√(a² + b²).
    pub amplitude: f64,
    pub rms_residual: f64,
    pub max_residual: f64,
}

pub fn fit_fringe_shape(theta: &[f64], p_e: &[f64]) -> Result<FringeShapeFit, MetricsError> {
    if theta.len() != p_e.len() {
        return Err(MetricsError::LengthMismatch(theta.len(), p_e.len()));
    }
    if theta.len() < 3 {
        return Err(MetricsError::DegenerateFit(format!("{} point(s)", theta.len())));
    }
    // Normal equations for the basis {1, cos 2θ, sin 2θ}.
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (&t, &y) in theta.iter().zip(p_e) {
        let row = nalgebra::Vector3::new(1.0, (2.0 * t).cos(), (2.0 * t).sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let coef = ata
        .lu()
        .solve(&aty)
        .ok_or_else(|| MetricsError::DegenerateFit("θ grid does not resolve cos 2θ and sin 2θ".into()))?;
    let mut ss = 0.0;
    let mut max_residual = 0.0f64;
    for (&t, &y) in theta.iter().zip(p_e) {
        let r = y - coef[0] - coef[1] * (2.0 * t).cos() - coef[2] * (2.0 * t).sin();
        ss += r * r;
        max_residual = max_residual.max(r.abs());
    }
    Ok(FringeShapeFit {
        offset: coef[0],
        amplitude: 2.0 * coef[1].hypot(coef[2]),
        rms_residual: (ss / theta.len() as f64).sqrt(),
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::model_fringe;
    use crate::protocol::theta_grid;
    use proptest::prelude::*;

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast(&[0.3; 7]).unwrap(), 0.0);
        assert_eq!(contrast(&[]), Err(MetricsError::EmptyInput));
        for &a in &[0.2, 0.5, 0.93] {
            let p: Vec<f64> = theta_grid(101).iter().map(|&t| model_fringe(t, a)).collect();
            let c = contrast(&p).unwrap();
            let bound = (std::f64::consts::PI * a / 100.0).powi(2);
            assert!((c - a).abs() < bound, "A = {a}: C = {c}");
        }
        let samples = [
            FringeSample {
                theta_geo: 0.0,
                p_e: 0.9,
                delta_n: None,
            },
            FringeSample {
                theta_geo: 1.0,
                p_e: 0.2,
                delta_n: None,
            },
        ];
        assert!((contrast_of(&samples).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn backaction_examples() {
        let b = backaction(&[0.0; 5]).unwrap();
        assert_eq!(b.mean_delta_n, 0.0);
        assert_eq!(b.std_delta_n, 0.0);
        let b = backaction(&[1.0, 3.0]).unwrap();
        assert_eq!(b.mean_delta_n, 2.0);
        assert_eq!(b.std_delta_n, 1.0);
        assert_eq!(backaction(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn deficit_fit_examples() {
        let nbar = [3.0, 5.0, 7.5, 10.0, 15.0];
        let c_cl = 0.8;
        let k = 0.37;
        let c: Vec<f64> = nbar.iter().map(|n| c_cl - k / n).collect();
        let fit = contrast_deficit_fit(&nbar, &c, c_cl).unwrap();
        assert!((fit.slope - k).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(matches!(
            contrast_deficit_fit(&[5.0, 5.0], &[0.1, 0.1], 0.2),
            Err(MetricsError::DegenerateFit(_))
        ));
        assert!(matches!(
            contrast_deficit_fit(&[5.0], &[0.1, 0.2], 0.2),
            Err(MetricsError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn fringe_shape_fit_recovers_model() {
        let theta = theta_grid(41);
        let p: Vec<f64> = theta.iter().map(|&t| model_fringe(t - 0.3, 0.6)).collect();
        let fit = fit_fringe_shape(&theta, &p).unwrap();
        assert!((fit.amplitude - 0.6).abs() < 1e-12);
        assert!((fit.offset - 0.7).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
        // a 2π-periodic shape does not fit
        let q: Vec<f64> = theta.iter().map(|&t| 0.5 + 0.4 * t.cos()).collect();
        assert!(fit_fringe_shape(&theta, &q).unwrap().rms_residual > 0.2);
    }

    proptest! {
        #[test]
        fn contrast_nonnegative_and_zero_iff_constant(v in proptest::collection::vec(0.0f64..1.0, 1..50)) {
            let c = contrast(&v).unwrap();
            prop_assert!(c >= 0.0);
            let constant = v.iter().all(|&x| x == v[0]);
            prop_assert_eq!(c == 0.0, constant);
        }

        #[test]
        fn contrast_invariant_under_cyclic_shift(a in 0.0f64..1.0, phase in 0.0f64..6.3, shift in 0usize..100) {
            // periodic fringe on [0, 2π): the duplicated endpoint is dropped
            let grid = theta_grid(101);
            let p: Vec<f64> = grid[..100].iter().map(|&t| model_fringe(t - phase, a)).collect();
            let mut rotated = p.clone();
            rotated.rotate_left(shift);
            prop_assert_eq!(contrast(&p).unwrap(), contrast(&rotated).unwrap());
        }
    }
}
