//! Library-level checks of experiment outputs against their definitions.

use glzi_core::metrics::fit_fringe_shape;
use glzi_scan::experiments::{BACKACTION_COLUMNS, CONTRAST_COLUMNS, HEATMAP_COLUMNS, SQUEEZE_COLUMNS};
use glzi_scan::{run_experiment, Experiment, ScanConfig};

fn cfg(extra: &[&str]) -> ScanConfig {
    let mut o = vec!["integrator.rtol=1e-6".to_string(), "integrator.atol=1e-8".to_string()];
    o.extend(extra.iter().map(|s| s.to_string()));
    ScanConfig::load(None, &o).unwrap()
}

#[test]
fn default_fringe_grid_has_six_files_of_101_rows() {
    // Only the classical file is evaluated at full size; the n̄ files share its grid.
    let c = cfg(&["grid.fringe_nbar=0.5"]);
    let r = run_experiment(&c, Experiment::Fringe, 2).unwrap();
    assert!(r.tables.iter().all(|a| a.table.len() == 101));
    assert_eq!(ScanConfig::default().grid.fringe_nbar.len() + 1, 6);
}

#[test]
fn noiseless_classical_fringe_has_sin_squared_shape() {
    let c = cfg(&["noise.enabled=false", "grid.theta_count=41", "grid.fringe_nbar=1"]);
    let r = run_experiment(&c, Experiment::Fringe, 1).unwrap();
    let t = r.table("fringe_classical").unwrap();
    let fit = fit_fringe_shape(&t.column("theta_geo").unwrap(), &t.column("P_e").unwrap()).unwrap();
    assert!(fit.rms_residual < 0.05, "rms residual {}", fit.rms_residual);
    assert!(fit.amplitude > 0.1);
}

#[test]
fn backaction_std_is_population_sigma_of_fringe_delta_n() {
    let c = cfg(&["grid.theta_count=6", "grid.nbar=2", "grid.fringe_nbar=2"]);
    let b = run_experiment(&c, Experiment::Backaction, 1).unwrap();
    let f = run_experiment(&c, Experiment::Fringe, 1).unwrap();
    let dn = f.table("fringe_nbar_2").unwrap().column("delta_n").unwrap();
    let mean = dn.iter().sum::<f64>() / dn.len() as f64;
    let sigma = (dn.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / dn.len() as f64).sqrt();
    let t = b.table("backaction").unwrap();
    assert_eq!(t.header(), BACKACTION_COLUMNS);
    assert!((t.column("mean_delta_n").unwrap()[0] - mean).abs() < 1e-11);
    assert!((t.column("std_delta_n").unwrap()[0] - sigma).abs() < 1e-11);
    assert!((t.column("rel_backaction").unwrap()[0] - mean / 2.0).abs() < 1e-11);
}

#[test]
fn column_schemas() {
    assert_eq!(HEATMAP_COLUMNS.join(","), "theta_geo,tau_p,P_e");
    assert_eq!(CONTRAST_COLUMNS.join(","), "nbar,C,C_cl,deficit,inv_nbar");
    assert_eq!(
        SQUEEZE_COLUMNS.join(","),
        "state_kind,nbar,r_or_q,C,delta_C,var_n_init,eta_coh_init"
    );
}

#[test]
fn contrast_inverse_column_and_classical_constant() {
    let c = cfg(&["grid.theta_count=5", "grid.nbar=2,4", "grid.fit_min_nbar=2"]);
    let r = run_experiment(&c, Experiment::ContrastScan, 2).unwrap();
    let t = r.table("contrast_scan").unwrap();
    assert_eq!(t.column("inv_nbar").unwrap(), vec![0.5, 0.25]);
    let ccl = t.column("C_cl").unwrap();
    assert_eq!(ccl[0], ccl[1]);
}

#[test]
fn coarse_heatmap_row_count() {
    let c = cfg(&["grid.theta_count=21", "grid.tau_p_count=21", "grid.heatmap_nbar=0.5"]);
    let r = run_experiment(&c, Experiment::Heatmap, 2).unwrap();
    assert!(r.tables.iter().all(|a| a.table.len() == 441));
}
