//! Orderings on the default synthetic grid. The grid is computed once and
//! shared by every test in this file.

use std::sync::OnceLock;

use refboot::eval::{
    generate_synthetic, run_experiment_grid, GridConfig, GridReport, SyntheticSpec,
};

fn grid() -> &'static GridReport {
    static GRID: OnceLock<GridReport> = OnceLock::new();
    GRID.get_or_init(|| {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        run_experiment_grid(&s.gold, &s.reference, &s.dictionary, &GridConfig::default()).unwrap()
    })
}

fn f1(id: &str) -> f64 {
    100.0 * grid().row(id).unwrap().result.f1
}

#[test]
fn full_labels_bound_every_condition() {
    for row in &grid().rows {
        assert!(
            f1("E1") >= 100.0 * row.result.f1,
            "{} beats E1",
            row.condition.id
        );
    }
    assert!(f1("E3") < f1("E1"));
}

#[test]
fn filtered_bootstrapping_beats_seed_and_unfiltered_matching() {
    let seed_only = 100.0 * grid().row("E8").unwrap().seed_only.unwrap().f1;
    assert!(
        f1("E8") > seed_only,
        "E8 {} vs seed-only {seed_only}",
        f1("E8")
    );
    assert!(f1("E8") > f1("E7"), "E8 {} vs E7 {}", f1("E8"), f1("E7"));
}

#[test]
fn sequence_retraining_keeps_pace_with_marginal_models() {
    assert!(
        f1("E6") >= f1("E5") - 1.0,
        "E6 {} vs E5 {}",
        f1("E6"),
        f1("E5")
    );
    assert!(
        f1("E9") >= f1("E8") - 1.0,
        "E9 {} vs E8 {}",
        f1("E9"),
        f1("E8")
    );
}

#[test]
fn five_rounds_improve_on_the_seed_model() {
    for id in ["E5", "E8"] {
        let f = grid().row(id).unwrap().trace.as_ref().unwrap().f1_series();
        let (m0, m5) = (f[0].unwrap(), f[5].unwrap());
        assert!(m5 >= m0, "{id}: M_5 {m5} < M_0 {m0}");
    }
}

#[test]
fn report_shape() {
    let g = grid();
    assert_eq!(g.rows.len(), 9);
    assert_eq!((g.n_train, g.n_seed, g.n_test), (1600, 48, 400));
    for row in &g.rows {
        match &row.trace {
            Some(t) => {
                assert_eq!(t.len(), GridConfig::default().iterations + 1);
                assert!(row.seed_only.is_some());
            }
            None => assert!(!row.condition.predicted),
        }
    }
    assert_eq!(g.to_tsv().lines().count(), 10);
}
