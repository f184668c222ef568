use exptype_core::verify::{
    read_rows, run_check, summarise_records, summarise_rows, write_reports, CheckId, Context, Format, RunConfig,
};
use exptype_core::Error;

const POLYGON: &str = r#"
[domain]
kind = "smoothed_polygon"
vertices = [[-1.0, -0.5], [1.0, -0.5], [0.0, 1.0]]
rounding = 0.25

[[function]]
id = "pole"
terms = [[1.0, 0.0, 0, 0.2, 0.1]]

[[function]]
terms = [[0.5, 0.0, 1, -0.3, 0.0], [1.0, 0.0, 0, 0.1, -0.2]]

[verify]
beta = [0.0]
alpha = [1.0]
near_points = 6
far_points = 4
distance_points = 10
"#;

#[test]
fn config_file_to_reports_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, POLYGON).unwrap();
    let run = RunConfig::load(&path).unwrap().prepare().unwrap();
    assert_eq!(run.functions.iter().map(|(id, _)| id.as_str()).collect::<Vec<_>>(), ["pole", "f1"]);
    assert!(run.eps > 0.0 && run.eps <= run.domain.metrics().circumradius);

    let ctx = Context::new(run);
    let ids = [CheckId::OracleDistance, CheckId::OracleTail, CheckId::Lemma2, CheckId::Lemma5, CheckId::Lemma7];
    let records: Vec<_> = ids.iter().flat_map(|&id| run_check(&ctx, id)).collect();
    assert!(records.iter().all(|r| r.passed()), "{:?}", records.iter().find(|r| !r.passed()));
    assert_eq!(records.iter().filter(|r| r.check_id == CheckId::OracleDistance).count(), 10);

    let mut out = ctx.run.config.output.clone();
    out.dir = dir.path().join("out");
    out.format = Format::Both;
    let files = write_reports(&records, &out).unwrap();
    assert_eq!(files.len(), 2);
    let rows = read_rows(&out.dir).unwrap();
    assert_eq!(rows.len(), records.len());
    assert_eq!(summarise_rows(&rows), summarise_records(&records));
}

#[test]
fn malformed_configs_are_config_errors() {
    let cases = [
        "[domain]\nkind = \"disk\"\nradius = 1.0\n[verify]\nbogus = 1\n[[function]]\nterms = [[1.0, 0.0, 0, 0.0, 0.0]]\n",
        "[domain]\nkind = \"disk\"\nradius = 1.0\n",
        "[domain]\nkind = \"disk\"\nradius = 1.0\n[verify]\nbeta = [1.6]\n[[function]]\nterms = [[1.0, 0.0, 0, 0.0, 0.0]]\n",
        "[domain]\nkind = \"disk\"\nradius = 1.0\n[[function]]\nterms = [[1.0, 0.0, 0, 2.0, 0.0]]\n",
        "not toml at all [",
    ];
    for text in cases {
        let outcome = RunConfig::from_toml(text).and_then(|c| c.prepare());
        assert!(outcome.is_err(), "accepted: {text}");
    }
    assert!(matches!(RunConfig::from_toml(cases[0]), Err(Error::Config(_))));
}
