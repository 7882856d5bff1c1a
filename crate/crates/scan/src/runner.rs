//! Grid execution: one simulator per battery, points dispatched in parallel,
//! results returned in grid order.

use std::time::Instant;

use glzi_core::battery::{BatteryStateSpec, SqueezeAlignment};
use glzi_core::liouvillian::NoiseParams;
use glzi_core::odeint::IntegratorConfig;
use glzi_core::protocol::{run_classical, QuantumSimulator};
use rayon::prelude::*;

use crate::config::{Experiment, ScanConfig};
use crate::format::fmt_num;
use crate::ScanError;

/// What drives the qubit at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// Two-level reference with a classical drive.
    Classical,
    Quantum(BatteryStateSpec),
}

impl Source {
    /// Stable label used in file names and records.
    pub fn descriptor(&self) -> String {
        match *self {
            Source::Classical => "classical".into(),
            Source::Quantum(spec) => match spec {
                BatteryStateSpec::Coherent { nbar, .. } => format!("coherent(nbar={})", fmt_num(nbar)),
                BatteryStateSpec::DisplacedSqueezed { nbar, r, alignment, .. } => {
                    format!("{}(nbar={},r={})", squeeze_kind(alignment), fmt_num(nbar), fmt_num(r))
                }
                BatteryStateSpec::NumberSqueezedGaussian { nbar, q, .. } => {
                    format!("number_squeezed(nbar={},q={})", fmt_num(nbar), fmt_num(q))
                }
                BatteryStateSpec::Fock { n } => format!("fock(n={n})"),
                BatteryStateSpec::SqueezedVacuum { r, .. } => format!("squeezed_vacuum(r={})", fmt_num(r)),
            },
        }
    }

    /// n̄ used to calibrate g; `None` for the classical reference.
    pub fn nbar(&self) -> Option<f64> {
        match self {
            Source::Classical => None,
            Source::Quantum(spec) => Some(spec.nominal_mean()),
        }
    }
}

pub fn squeeze_kind(alignment: SqueezeAlignment) -> &'static str {
    match alignment {
        SqueezeAlignment::Amplitude => "amplitude_squeezed",
        SqueezeAlignment::Phase => "phase_squeezed",
        SqueezeAlignment::Angle(_) => "angle_squeezed",
    }
}

/// One battery (or the classical drive) evaluated over a list of
/// (θ_geo, τ_p) points.
#[derive(Debug, Clone)]
pub struct Job {
    pub source: Source,
    pub points: Vec<(f64, f64)>,
}

/// θ-outer, τ_p-inner product grid.
pub fn product_grid(theta: &[f64], tau_p: &[f64]) -> Vec<(f64, f64)> {
    theta
        .iter()
        .flat_map(|&t| tau_p.iter().map(move |&tp| (t, tp)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub experiment: Experiment,
    pub battery: String,
    pub theta_geo: f64,
    pub tau_p: f64,
    pub nbar: Option<f64>,
    pub r: Option<f64>,
    pub q: Option<f64>,
    pub p_e: f64,
    pub delta_n: Option<f64>,
    pub var_n_init: Option<f64>,
    pub eta_coh_init: Option<f64>,
    pub trace_defect: f64,
    pub min_eig: f64,
    /// Seconds spent on this point; not written to CSV.
    pub wall_time: f64,
}

/// Numerical settings shared by every job of one experiment.
#[derive(Debug, Clone)]
pub struct RunContext<'a> {
    pub cfg: &'a ScanConfig,
    pub experiment: Experiment,
    pub noise: NoiseParams,
    pub integrator: IntegratorConfig,
    /// Replaces Ω when set (control runs use 0).
    pub omega_override: Option<f64>,
}

impl<'a> RunContext<'a> {
    pub fn new(cfg: &'a ScanConfig, experiment: Experiment) -> Result<Self, ScanError> {
        Ok(Self {
            cfg,
            experiment,
            noise: cfg.noise_params()?,
            integrator: cfg.integrator,
            omega_override: None,
        })
    }

    fn params(&self, theta: f64, tau_p: f64, nbar: f64) -> glzi_core::protocol::ProtocolParams {
        let mut p = self.cfg.protocol_params(theta, tau_p, nbar);
        if let Some(omega) = self.omega_override {
            p.omega = omega;
        }
        p
    }
}

fn squeeze_params(source: &Source) -> (Option<f64>, Option<f64>) {
    match source {
        Source::Quantum(BatteryStateSpec::DisplacedSqueezed { r, .. }) => (Some(*r), None),
        Source::Quantum(BatteryStateSpec::NumberSqueezedGaussian { q, .. }) => (None, Some(*q)),
        _ => (None, None),
    }
}

/// Evaluates every job on the current rayon pool.
///
/// The output has one vector per job, each in the job's point order,
/// independent of the number of worker threads.
pub fn run_jobs(ctx: &RunContext<'_>, jobs: &[Job]) -> Result<Vec<Vec<ScanRecord>>, ScanError> {
    let sims: Vec<Option<QuantumSimulator>> = jobs
        .par_iter()
        .map(|job| match job.source {
            Source::Classical => Ok(None),
            Source::Quantum(spec) => {
                let p = ctx.params(0.0, ctx.cfg.protocol.tau_p_ns, spec.nominal_mean());
                QuantumSimulator::for_protocol(&p, &spec, &ctx.noise, ctx.integrator).map(Some)
            }
        })
        .collect::<Result<_, _>>()?;
    for (job, sim) in jobs.iter().zip(&sims) {
        if let Some(sim) = sim {
            log::debug!("{}: n_cut = {}", job.source.descriptor(), sim.n_cut());
        }
    }

    let tasks: Vec<(usize, usize)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, job)| (0..job.points.len()).map(move |k| (j, k)))
        .collect();
    let records: Vec<ScanRecord> = tasks
        .par_iter()
        .map(|&(j, k)| {
            let job = &jobs[j];
            let (theta, tau_p) = job.points[k];
            let start = Instant::now();
            let nbar = job.source.nbar();
            let p = ctx.params(theta, tau_p, nbar.unwrap_or(1.0));
            let result = match (&job.source, &sims[j]) {
                (Source::Quantum(spec), Some(sim)) => sim.run(&p, spec),
                _ => run_classical(&p, &ctx.noise, &ctx.integrator),
            }
            .map_err(|e| {
                ScanError::Numerical(format!(
                    "{} at θ = {theta}, τ_p = {tau_p}: {e}",
                    job.source.descriptor()
                ))
            })?;
            let (r, q) = squeeze_params(&job.source);
            Ok(ScanRecord {
                experiment: ctx.experiment,
                battery: job.source.descriptor(),
                theta_geo: theta,
                tau_p,
                nbar,
                r,
                q,
                p_e: result.p_e,
                delta_n: result.delta_n(),
                var_n_init: result.battery.map(|b| b.start.var_n),
                eta_coh_init: result.battery.map(|b| b.start.eta_coh),
                trace_defect: result.trace_defect,
                min_eig: result.min_eig,
                wall_time: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_, ScanError>>()?;

    let mut it = records.into_iter();
    Ok(jobs
        .iter()
        .map(|job| it.by_ref().take(job.points.len()).collect())
        .collect())
}

/// Runs `f` on a dedicated pool with `workers` threads.
pub fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, ScanError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ScanError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ScanConfig {
        ScanConfig::load(None, &["integrator.rtol=1e-6".into(), "integrator.atol=1e-8".into()]).unwrap()
    }

    #[test]
    fn product_grid_is_theta_outer() {
        let g = product_grid(&[0.0, 1.0], &[25.0, 30.0, 35.0]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], (0.0, 25.0));
        assert_eq!(g[2], (0.0, 35.0));
        assert_eq!(g[3], (1.0, 25.0));
    }

    #[test]
    fn descriptors_are_stable() {
        assert_eq!(Source::Classical.descriptor(), "classical");
        let s = Source::Quantum(BatteryStateSpec::DisplacedSqueezed {
            nbar: 5.0,
            r: 0.35,
            phase: 1.0,
            alignment: SqueezeAlignment::Amplitude,
        });
        assert_eq!(s.descriptor(), "amplitude_squeezed(nbar=5,r=0.35)");
        assert_eq!(s.nbar(), Some(5.0));
        assert_eq!(Source::Classical.nbar(), None);
    }

    #[test]
    fn records_follow_job_order_for_any_worker_count() {
        let cfg = small_config();
        let ctx = RunContext::new(&cfg, Experiment::Fringe).unwrap();
        let jobs = vec![
            Job {
                source: Source::Quantum(BatteryStateSpec::Coherent { nbar: 1.0, phase: 0.0 }),
                points: vec![(0.3, 25.0), (1.2, 25.0), (2.0, 25.0)],
            },
            Job {
                source: Source::Classical,
                points: vec![(0.3, 25.0), (1.2, 25.0)],
            },
        ];
        let one = with_pool(1, || run_jobs(&ctx, &jobs)).unwrap().unwrap();
        let three = with_pool(3, || run_jobs(&ctx, &jobs)).unwrap().unwrap();
        assert_eq!(one.len(), 2);
        assert_eq!(one[0].len(), 3);
        assert_eq!(one[1].len(), 2);
        for (a, b) in one.iter().flatten().zip(three.iter().flatten()) {
            assert_eq!(a.theta_geo, b.theta_geo);
            assert_eq!(a.p_e.to_bits(), b.p_e.to_bits());
            assert_eq!(a.battery, b.battery);
        }
        assert!(one[1][0].delta_n.is_none());
        assert!(one[0][0].delta_n.is_some());
        assert_eq!(one[0][1].theta_geo, 1.2);
    }
}
