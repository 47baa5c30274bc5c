use cmc_index::analysis::analyze_surface;
use cmc_index::catalog::{self, load_report, load_reports, save_report, save_reports};
use cmc_index::Error;

#[test]
fn report_round_trip() {
    let cat = catalog::default_catalog().unwrap();
    let reports: Vec<_> = ["U1", "N3"]
        .iter()
        .map(|n| {
            analyze_surface(catalog::find_surface(&cat, n).unwrap())
                .unwrap()
                .report
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();

    let one = dir.path().join("one.json");
    save_report(&reports[0], &one).unwrap();
    assert_eq!(load_report(&one).unwrap(), reports[0]);

    let many = dir.path().join("many.json");
    save_reports(&reports, &many).unwrap();
    assert_eq!(load_reports(&many).unwrap(), reports);
    assert!(matches!(load_report(&many), Err(Error::Schema(_))));

    let text = std::fs::read_to_string(&one)
        .unwrap()
        .replace("\"schema_version\": 1", "\"schema_version\": 9");
    std::fs::write(&one, text).unwrap();
    assert!(matches!(load_report(&one), Err(Error::Schema(_))));
}
