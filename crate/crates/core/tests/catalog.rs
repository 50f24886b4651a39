use persistgraph_core::scenario::{catalog, execute, run_scenario, RunOptions};

#[test]
fn every_catalog_scenario_meets_its_expectations() {
    for s in catalog() {
        let report = run_scenario(&s, &RunOptions::default()).unwrap();
        println!("{}", report.render_text());
        assert!(report.passed(), "{}", report.body());
    }
}

#[test]
fn reports_and_csv_are_deterministic() {
    for s in catalog().into_iter().filter(|s| s.name != "S4") {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run_scenario(&s, &RunOptions { out_dir: Some(a.path().into()), ..Default::default() }).unwrap();
        let rb = run_scenario(&s, &RunOptions { out_dir: Some(b.path().into()), ..Default::default() }).unwrap();
        assert_eq!(ra.body(), rb.body());
        let csv = format!("{}.csv", s.name);
        assert_eq!(
            std::fs::read(a.path().join(&csv)).unwrap(),
            std::fs::read(b.path().join(&csv)).unwrap()
        );
    }
}

#[test]
fn floor_scenario_keeps_its_gap() {
    let out = execute(&persistgraph_core::scenario::s3(), &RunOptions::default()).unwrap();
    let floor = &out.report.certificates[0];
    assert_eq!(floor.name, "discrete-floor");
    assert!(floor.ok);
}
