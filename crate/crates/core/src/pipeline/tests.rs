use super::*;
use crate::fixture::{campus_fixture, DEFAULT_SEED};
use crate::ingest::write_csv;

pub(crate) fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn bundled_fixture_matches_generator() {
    let mut buf = Vec::new();
    write_csv(&campus_fixture(DEFAULT_SEED).unwrap(), &mut buf).unwrap();
    let path = fixture_dir().join("campus.csv");
    if std::env::var_os("MTC_BLESS").is_some() {
        std::fs::write(&path, &buf).unwrap();
    }
    let bundled = std::fs::read(&path).unwrap();
    assert!(bundled == buf, "fixtures/campus.csv is stale; rerun with MTC_BLESS=1");
}

fn fixture_config() -> PathBuf {
    fixture_dir().join("pipeline.conf")
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let content = if e.path().is_file() { std::fs::read(e.path()).unwrap() } else { Vec::new() };
            (e.file_name().to_string_lossy().into_owned(), content)
        })
        .collect();
    v.sort();
    v
}

#[test]
fn fixture_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline_file(&fixture_config(), None, dir.path()).unwrap();
    assert!(out.row_errors.is_empty());
    assert_eq!(out.artifacts.len(), 8);
    assert_eq!(out.classes.len(), 2);
    for class in TrafficClass::ALL {
        for name in artifact_names(class) {
            assert!(dir.path().join(&name).is_file(), "{name}");
        }
        let text = std::fs::read_to_string(dir.path().join(format!("{class}_report.json"))).unwrap();
        let doc: ReportDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.entries.len(), 5);
        assert!(doc.report().is_ranked());
        assert_eq!(doc.tail_errors.models.len(), 5);
    }
}

#[test]
fn deterministic_across_runs_and_threads() {
    let run = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_pipeline_file(&fixture_config(), Some(11), dir.path())).unwrap();
        read_all(dir.path())
    };
    let a = run(1);
    assert_eq!(a, run(1));
    assert_eq!(a, run(4));
}

#[test]
fn augmentation_uses_the_seed() {
    let mut cfg = PipelineConfig::from_file(fixture_config()).unwrap();
    cfg.augment_jitter = 1;
    cfg.augment_resample = 0.2;
    cfg.classes = vec![TrafficClass::QuasiPeriodic];
    let run = |cfg: &PipelineConfig| {
        let dir = tempfile::tempdir().unwrap();
        run_pipeline(cfg, dir.path()).unwrap();
        read_all(dir.path())
    };
    let a = run(&cfg);
    assert_eq!(a.len(), 4);
    assert_eq!(a, run(&cfg));
    cfg.seed += 1;
    assert_ne!(a, run(&cfg));
}

#[test]
fn unknown_measurement_fails_in_classify() {
    let mut cfg = PipelineConfig::from_file(fixture_config()).unwrap();
    cfg.measurements = Some(vec!["co2".into(), "voltage".into()]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let err = run_pipeline(&cfg, &out).unwrap_err();
    assert_eq!(err.stage, Stage::Classify);
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("classify"));
    assert!(err.to_string().contains("voltage"));
    assert!(!out.exists());
}

#[test]
fn stage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "input = x.csv\nfrobnicate = 1\n").unwrap();
    let err = run_pipeline_file(&conf, None, dir.path()).unwrap_err();
    assert_eq!((err.stage, err.exit_code()), (Stage::Config, 2));

    let missing = PipelineConfig::with_input(dir.path().join("missing.csv"));
    let err = run_pipeline(&missing, dir.path()).unwrap_err();
    assert_eq!((err.stage, err.exit_code()), (Stage::Ingest, 2));

    let small = dir.path().join("small.csv");
    std::fs::write(&small, "device_id,sensor_type,measurement,timestamp_ms\nd,A,co2,0\nd,A,co2,900000\n").unwrap();
    let err = run_pipeline(&PipelineConfig::with_input(&small), &dir.path().join("o")).unwrap_err();
    assert_eq!((err.stage, err.exit_code()), (Stage::Extract, 2));
}

#[test]
fn failed_emit_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig::from_file(fixture_config()).unwrap();
    let out = dir.path().join("out");
    std::fs::create_dir(&out).unwrap();
    // A directory where the last artifact should go makes that write fail.
    std::fs::create_dir(out.join("quasi_periodic_tail_errors.json")).unwrap();
    let err = run_pipeline(&cfg, &out).unwrap_err();
    assert_eq!(err.stage, Stage::Emit);
    let left: Vec<_> = read_all(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(left, vec!["quasi_periodic_tail_errors.json".to_string()]);
}
