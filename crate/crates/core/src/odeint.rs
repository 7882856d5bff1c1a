//! Adaptive Dormand–Prince 8(5,3) integration of linear complex ODEs.
//!
//! The 12-stage order-8 pair of Hairer, Nørsett & Wanner with the combined
//! fifth/third-order error estimate and a PI (Lund-stabilized) step controller.

// Tableau digits are kept as published.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use thiserror::Error;

use crate::hilbert::{ComplexOperator, DensityMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size {h:e} ns fell below h_min at t = {t} ns")]
    StepUnderflow { t: f64, h: f64 },
    #[error("exceeded {max_steps} steps at t = {t} ns")]
    MaxStepsExceeded { t: f64, max_steps: usize },
    #[error("invalid integration interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite state at t = {t} ns")]
    NonFinite { t: f64 },
    #[error("density matrix trace {0:e} too small to renormalize")]
    ZeroTrace(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step (ns).
    pub h_init: f64,
    /// Smallest step accepted before giving up (ns).
    pub h_min: f64,
    /// Largest step (ns); `None` means the segment length.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 2e-7,
            atol: 2e-9,
            h_init: 0.1,
            h_min: 1e-6,
            h_max: None,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), OdeError> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(OdeError::InvalidConfig(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init) {
            return Err(OdeError::InvalidConfig(format!(
                "need 0 < h_min <= h_init (h_min = {}, h_init = {})",
                self.h_min, self.h_init
            )));
        }
        if let Some(h_max) = self.h_max {
            if h_max < self.h_init {
                return Err(OdeError::InvalidConfig(format!("h_max = {h_max} < h_init")));
            }
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps = 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutput {
    pub y: Vec<Complex64>,
    pub stats: StepStats,
}

const SAFETY: f64 = 0.9;
/// Lund stabilization exponent of the PI controller.
const BETA: f64 = 0.04;
const EXPO1: f64 = 1.0 / 8.0 - BETA * 0.2;
/// Step ratio bounds: 1/3 ≤ h_new/h ≤ 6 (stored as inverse factors).
const FAC_MIN_INV: f64 = 3.0;
const FAC_MAX_INV: f64 = 1.0 / 6.0;

/// Integrates y' = rhs(t, y) from `t0` to `t1` and returns y(t1).
pub fn integrate_segment<F>(
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    rhs: F,
    cfg: &IntegratorConfig,
) -> Result<Vec<Complex64>, OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    integrate_segment_with_stats(y0, t0, t1, rhs, cfg).map(|o| o.y)
}

/// Linear combination buffer: out = y + h Σ coeff_j k_j.
fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, k) in terms {
            acc += k[i] * c;
        }
        *o = y[i] + acc * h;
    }
}

pub fn integrate_segment_with_stats<F>(
    y0: &[Complex64],
    t0: f64,
    t1: f64,
    mut rhs: F,
    cfg: &IntegratorConfig,
) -> Result<SegmentOutput, OdeError>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    cfg.validate()?;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(OdeError::InvalidInterval { t0, t1 });
    }
    let n = y0.len();
    let span = t1 - t0;
    let h_max = cfg.h_max.unwrap_or(span).min(span);
    let zero = Complex64::new(0.0, 0.0);
    let mut stats = StepStats::default();

    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex64>> = (0..12).map(|_| vec![zero; n]).collect();
    let mut ystage = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut k_next = vec![zero; n];

    let mut t = t0;
    let mut h = cfg.h_init.min(h_max);
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;

    rhs(t, &y, &mut k[0]);
    stats.rhs_evals += 1;

    loop {
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(OdeError::MaxStepsExceeded {
                t,
                max_steps: cfg.max_steps,
            });
        }
        let remaining = t1 - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        } else if h < cfg.h_min {
            return Err(OdeError::StepUnderflow { t, h });
        }

        {
            let (k1, rest) = k.split_at_mut(1);
            let k1 = &k1[0];
            combine(&mut ystage, &y, h, &[(A21, k1)]);
            rhs(t + C2 * h, &ystage, &mut rest[0]);
        }
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C3 * h,
            2,
            &[(0, A31), (1, A32)],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C4 * h,
            3,
            &[(0, A41), (2, A43)],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C5 * h,
            4,
            &[(0, A51), (2, A53), (3, A54)],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C6 * h,
            5,
            &[(0, A61), (3, A64), (4, A65)],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C7 * h,
            6,
            &[(0, A71), (3, A74), (4, A75), (5, A76)],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C8 * h,
            7,
            &[(0, A81), (3, A84), (4, A85), (5, A86), (6, A87)],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C9 * h,
            8,
            &[(0, A91), (3, A94), (4, A95), (5, A96), (6, A97), (7, A98)],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C10 * h,
            9,
            &[
                (0, A101),
                (3, A104),
                (4, A105),
                (5, A106),
                (6, A107),
                (7, A108),
                (8, A109),
            ],
            &mut rhs,
        );
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t + C11 * h,
            10,
            &[
                (0, A111),
                (3, A114),
                (4, A115),
                (5, A116),
                (6, A117),
                (7, A118),
                (8, A119),
                (9, A1110),
            ],
            &mut rhs,
        );
        let t_new = if last { t1 } else { t + h };
        stage(
            &mut k,
            &mut ystage,
            &y,
            h,
            t_new,
            11,
            &[
                (0, A121),
                (3, A124),
                (4, A125),
                (5, A126),
                (6, A127),
                (7, A128),
                (8, A129),
                (9, A1210),
                (10, A1211),
            ],
            &mut rhs,
        );
        stats.rhs_evals += 11;

        // Eighth-order solution and the two embedded error estimates.
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let slope = k[0][i] * B1
                + k[5][i] * B6
                + k[6][i] * B7
                + k[7][i] * B8
                + k[8][i] * B9
                + k[9][i] * B10
                + k[10][i] * B11
                + k[11][i] * B12;
            ynew[i] = y[i] + slope * h;
            let sk = cfg.atol + cfg.rtol * y[i].norm().max(ynew[i].norm());
            let e3 = slope - k[0][i] * BHH1 - k[8][i] * BHH2 - k[11][i] * BHH3;
            err3 += (e3.norm() / sk).powi(2);
            let e5 = k[0][i] * ER1
                + k[5][i] * ER6
                + k[6][i] * ER7
                + k[7][i] * ER8
                + k[8][i] * ER9
                + k[9][i] * ER10
                + k[10][i] * ER11
                + k[11][i] * ER12;
            err5 += (e5.norm() / sk).powi(2);
        }
        let mut deno = err5 + 0.01 * err3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err5 * (1.0 / (deno * n.max(1) as f64)).sqrt();
        if !err.is_finite() {
            return Err(OdeError::NonFinite { t });
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            stats.accepted += 1;
            // PI step-size proposal
            let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(FAC_MAX_INV, FAC_MIN_INV);
            let mut h_new = h / fac;
            facold = err.max(1e-4);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;

            rhs(t_new, &ynew, &mut k_next);
            stats.rhs_evals += 1;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k[0], &mut k_next);
            t = t_new;
            if last {
                return Ok(SegmentOutput { y, stats });
            }
            h = h_new.min(h_max);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            let shrink = FAC_MIN_INV.min(fac11 / SAFETY);
            h = (h / shrink).min(0.5 * h);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn stage<F>(
    k: &mut [Vec<Complex64>],
    ystage: &mut [Complex64],
    y: &[Complex64],
    h: f64,
    t_stage: f64,
    target: usize,
    coeffs: &[(usize, f64)],
    rhs: &mut F,
) where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    {
        let terms: Vec<(f64, &[Complex64])> = coeffs.iter().map(|&(j, c)| (c, k[j].as_slice())).collect();
        combine(ystage, y, h, &terms);
    }
    rhs(t_stage, ystage, &mut k[target]);
}

/// Hermitian symmetrization followed by trace renormalization.
pub fn sanitize(rho: &DensityMatrix) -> Result<DensityMatrix, OdeError> {
    let m = rho.matrix();
    let herm: ComplexOperator = (m + m.adjoint()).unscale(2.0);
    let tr = herm.trace().re;
    if tr.abs() < 1e-6 || !tr.is_finite() {
        return Err(OdeError::ZeroTrace(tr));
    }
    Ok(DensityMatrix::from_matrix(herm.unscale(tr)).expect("square by construction"))
}

// Dormand–Prince 8(5,3) coefficients (Hairer, Nørsett & Wanner, DOP853).
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;
