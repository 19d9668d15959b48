use rarelink::harness::{
    compare_methods, emit_results_to_path, read_results_path, run_cell, run_experiment,
    run_experiment_logged, ExperimentConfig, Method, OutputFormat, ResultRow,
};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn bpsk(snr: f64, method: &str, n: u64, packs: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig::parse(&format!(
        "modulation = bpsk\nsnr = {snr}\nmethod = {method}\nwords_per_pack = {n}\npacks = {packs}\nseed = {seed}"
    ))
    .unwrap()
}

#[test]
fn rqmc_mean_matches_mc_mean() {
    let mut rqmc = Vec::new();
    let mut mc = Vec::new();
    for seed in 0..30 {
        let cfg = bpsk(4.0, "mc,rqmc-sobol", 4096, 1, seed);
        rqmc.push(run_cell(&cfg, 4.0, Method::RqmcSobol).unwrap().row.p_hat);
        mc.push(run_cell(&cfg, 4.0, Method::Mc).unwrap().row.p_hat);
    }
    let (mr, vr) = mean_var(&rqmc);
    let (mm, vm) = mean_var(&mc);
    let combined = (vr / 30.0 + vm / 30.0).sqrt();
    assert!((mr - mm).abs() <= 3.0 * combined, "rqmc {mr} mc {mm} se {combined}");
}

#[test]
fn low_snr_methods_agree_with_importance_sampling() {
    let cfg = ExperimentConfig::parse(
        "modulation = qam\norder = 16\nsnr = 5,10,15\nmethod = mc,qmc-halton,qmc-sobol,rqmc-sobol,is-scale\n\
         words_per_pack = 4000\npacks = 10\nseed = 2",
    )
    .unwrap();
    let rows = run_experiment(&cfg).unwrap();
    let diffs = compare_methods(&rows, Method::IsScale).unwrap();
    assert_eq!(diffs.len(), rows.len());
    for d in &diffs {
        assert!(
            d.difference.abs() <= 5.0 * d.combined_std_err,
            "{} at {} dB: diff {:e}, combined se {:e}",
            d.method,
            d.snr_db,
            d.difference,
            d.combined_std_err
        );
    }
}

#[test]
fn qmc_differences_vary_less_than_mc_differences() {
    let mut qmc = Vec::new();
    let mut mc = Vec::new();
    for seed in 0..20 {
        let cfg = ExperimentConfig::parse(&format!(
            "modulation = qam\norder = 16\nsnr = 14\nmethod = mc,qmc-sobol,is-scale\n\
             words_per_pack = 8192\npacks = 1\nseed = {seed}"
        ))
        .unwrap();
        let rows = run_experiment(&cfg).unwrap();
        for d in compare_methods(&rows, Method::IsScale).unwrap() {
            match d.method {
                Method::Mc => mc.push(d.difference),
                Method::QmcSobol => qmc.push(d.difference),
                _ => {}
            }
        }
    }
    let (_, vq) = mean_var(&qmc);
    let (_, vm) = mean_var(&mc);
    assert!(vq <= vm, "qmc {vq:e} mc {vm:e}");
}

#[test]
fn result_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::parse(
        "modulation = qam\norder = 4\nsnr = 6,9\nmethod = mc,rqmc-sobol,is-tilt,is-scale\n\
         words_per_pack = 1000\npacks = 3\nadapt_iterations = 2\nseed = 4",
    )
    .unwrap();
    let mut texts = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let rows: Vec<ResultRow> = run_experiment(&cfg).unwrap().iter().map(ResultRow::without_timing).collect();
        let path = dir.path().join(name);
        emit_results_to_path(&rows, OutputFormat::Csv, &path).unwrap();
        assert_eq!(read_results_path(&path).unwrap(), rows);
        texts.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn seeds_change_results_and_snr_orders_them() {
    let a = run_cell(&bpsk(3.0, "mc", 5000, 2, 1), 3.0, Method::Mc).unwrap().row;
    let b = run_cell(&bpsk(3.0, "mc", 5000, 2, 2), 3.0, Method::Mc).unwrap().row;
    assert_ne!(a.p_hat, b.p_hat);
    let cfg = bpsk(0.0, "qmc-sobol", 20_000, 1, 0);
    let lo = run_cell(&cfg, 0.0, Method::QmcSobol).unwrap().row.p_hat;
    let hi = run_cell(&cfg, 6.0, Method::QmcSobol).unwrap().row.p_hat;
    assert!(hi < lo);
}

#[test]
fn run_log_covers_every_is_iteration() {
    let cfg = ExperimentConfig::parse(
        "modulation = qam\norder = 16\nsnr = 10,12\nmethod = mc,is-tilt,is-scale\n\
         words_per_pack = 1000\npacks = 2\nadapt_iterations = 4\nseed = 1",
    )
    .unwrap();
    let out = run_experiment_logged(&cfg).unwrap();
    assert_eq!(out.rows.len(), 6);
    assert_eq!(out.run_log.len(), 2 * 2 * 4);
    for e in &out.run_log {
        assert!(e.method.is_importance_sampling());
        assert_eq!(e.record.samples, 500);
    }
    let line = serde_json::to_string(&out.run_log[0]).unwrap();
    assert!(line.contains("\"snr_db\"") && line.contains("\"iteration\":0"));
}

#[test]
fn high_snr_plain_methods_report_no_events() {
    let cfg = ExperimentConfig::parse(
        "modulation = qam\norder = 16\nsnr = 25\nmethod = mc,qmc-halton,rqmc-sobol\nwords_per_pack = 1000\npacks = 5",
    )
    .unwrap();
    for row in run_experiment(&cfg).unwrap() {
        assert!(row.zero_events);
        assert_eq!(row.p_hat, 0.0);
        assert_eq!(row.std_err, 0.0);
    }
}
