use jscc_core::catalog::find;
use jscc_core::codec::{LiftedCode, DEFAULT_MAX_FILLERS};
use jscc_core::sim::{run_point, run_sweep, SimConfig, SimError, SimRow, StopReason, CSV_COLUMNS};

fn small_code() -> LiftedCode {
    let code = find("example1_opt1").unwrap().code();
    LiftedCode::build(&code, 4, 16, 1, 30, DEFAULT_MAX_FILLERS, 10).unwrap()
}

fn config(grid: Vec<f64>) -> SimConfig {
    let mut c = SimConfig::new("example1_opt1", 4, 16, grid);
    c.max_frames = 150;
    c.min_frames = 20;
    c.target_error_frames = 5;
    c.i_max = 30;
    c.batch = 16;
    c
}

fn with_threads<R: Send>(n: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let code = small_code();
    let cfg = config(vec![-3.0]);
    let one = with_threads(1, || run_point::<f64>(&code, &cfg, -3.0).unwrap());
    let three = with_threads(3, || run_point::<f64>(&code, &cfg, -3.0).unwrap());
    assert_eq!(one, three);
    let mut other = cfg.clone();
    other.sim_seed = 2;
    let reseeded = run_point::<f64>(&code, &other, -3.0).unwrap();
    assert_ne!(one.bit_errors, reseeded.bit_errors);
}

#[test]
fn stop_rules() {
    let code = small_code();
    let cfg = config(vec![0.0]);
    // clean channel: runs past the frame cap (short codes keep a small
    // source-side floor, so the error count can be non-zero)
    let clean = run_point::<f64>(&code, &cfg, 5.0).unwrap();
    assert_eq!(clean.stop_reason, StopReason::FramesCap);
    assert_eq!(clean.frames, cfg.max_frames + 1);
    assert!(clean.sser < 1e-2, "{}", clean.sser);
    // hopeless channel: stops once the error target is passed after min_frames
    let noisy = run_point::<f64>(&code, &cfg, -10.0).unwrap();
    assert_eq!(noisy.stop_reason, StopReason::ErrorTarget);
    assert_eq!(noisy.frames, cfg.min_frames);
    assert!(noisy.error_frames > cfg.target_error_frames);
    assert_eq!(noisy.source_bits, noisy.frames * code.info_len() as u64);
    assert!(noisy.mean_iters <= cfg.i_max as f64);
}

#[test]
fn csv_schema_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let code = small_code();
    let first = run_sweep::<f64>(&code, &config(vec![-4.0, -2.0]), &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, CSV_COLUMNS.join(","));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let rows: Vec<SimRow> = reader.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].point(), first[0]);
    assert!(text.contains(",frames-cap,") || text.contains(",error-target,"));

    // extend the grid: finished points are reused, new ones appended
    let second = run_sweep::<f64>(&code, &config(vec![-4.0, -2.0, 0.0]), &path).unwrap();
    assert_eq!(&second[..2], &first[..]);
    let again = std::fs::read_to_string(&path).unwrap();
    assert!(again.starts_with(&text));
    assert_eq!(again.lines().count(), 4);

    let mut other = config(vec![-4.0]);
    other.sim_seed = 99;
    assert!(matches!(
        run_sweep::<f64>(&code, &other, &path),
        Err(SimError::Resume { .. })
    ));
}

#[test]
fn interrupted_sweep_matches_uninterrupted() {
    let dir = tempfile::tempdir().unwrap();
    let code = small_code();
    let full = dir.path().join("full.csv");
    let part = dir.path().join("part.csv");
    run_sweep::<f64>(&code, &config(vec![-3.5, -2.5]), &full).unwrap();
    run_sweep::<f64>(&code, &config(vec![-3.5]), &part).unwrap();
    run_sweep::<f64>(&code, &config(vec![-3.5, -2.5]), &part).unwrap();
    assert_eq!(
        std::fs::read_to_string(full).unwrap(),
        std::fs::read_to_string(part).unwrap()
    );
}

#[test]
fn invalid_configs_are_rejected() {
    let code = small_code();
    let mut cfg = config(vec![]);
    assert!(matches!(
        run_point::<f64>(&code, &cfg, 0.0),
        Err(SimError::Config(_))
    ));
    cfg.grid = vec![f64::NAN];
    assert!(cfg.validate().is_err());
    cfg.grid = vec![0.0];
    cfg.batch = 0;
    assert!(cfg.validate().is_err());
}

#[test]
fn single_precision_tracks_double() {
    let code = small_code();
    let cfg = config(vec![-3.0]);
    let a = run_point::<f64>(&code, &cfg, -3.0).unwrap();
    let b = run_point::<f32>(&code, &cfg, -3.0).unwrap();
    let (ea, eb) = (
        a.error_frames as f64 / a.frames as f64,
        b.error_frames as f64 / b.frames as f64,
    );
    assert!((ea - eb).abs() < 0.1, "{ea} vs {eb}");
}
