//! Transcripts compared byte-for-byte against files in `tests/golden/`.
//! Set `GOLDEN_UPDATE=1` to rewrite them.

use std::path::PathBuf;

use gridcycle::{
    dfs_region_detector, early_answer, run_game, union_find_scanner, ComposedAdversary, DetectionAlgorithm,
    FinalChoicePolicy, GameTranscript, GridDims,
};

fn check<A: DetectionAlgorithm>(name: &str, make: impl Fn() -> A, rows: usize, cols: usize, policy: FinalChoicePolicy) {
    let adv = ComposedAdversary::new(GridDims::new(rows, cols).unwrap()).unwrap();
    let json = run_game(make, adv, policy).unwrap().to_json();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"));
    if std::env::var_os("GOLDEN_UPDATE").is_some() {
        std::fs::write(&path, &json).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(json, expected, "{name} transcript changed");
    let parsed = GameTranscript::from_json(&expected).unwrap();
    assert_eq!(parsed.to_json(), expected);
}

#[test]
fn dfs_three_by_three_fork() {
    check("dfs_3x3_fork", dfs_region_detector, 3, 3, FinalChoicePolicy::ForkBoth);
}

#[test]
fn union_find_two_by_three_forced_acyclic() {
    check("union_find_2x3_acyclic", union_find_scanner, 2, 3, FinalChoicePolicy::ForceAcyclic);
}

#[test]
fn early_answer_two_by_two() {
    check("early_no_2x2_k3", || early_answer(3, false), 2, 2, FinalChoicePolicy::ForkBoth);
}
