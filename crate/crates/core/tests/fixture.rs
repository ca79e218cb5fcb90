use xrepair_core::fixture;
use xrepair_core::repair::{indicator, reference_repair, ReferenceRepair, RepairTask};
use xrepair_core::shapley::{rank, shapley_constraints, Rational};
use xrepair_core::{column_distribution, diff_tables, mask_cells, violations, CellRef, Value};

fn subset(ids: &[&str]) -> Vec<xrepair_core::DenialConstraint> {
    fixture::constraints()
        .into_iter()
        .filter(|c| ids.contains(&c.id.as_str()))
        .collect()
}

#[test]
fn reference_repair_produces_the_clean_table() {
    let clean = reference_repair(&fixture::constraints(), &fixture::dirty()).unwrap();
    assert_eq!(clean, fixture::clean());
    let changes = diff_tables(&fixture::dirty(), &clean).unwrap();
    let got: Vec<String> = changes
        .iter()
        .map(|c| format!("{} {} -> {}", c.cell, c.before, c.after))
        .collect();
    assert_eq!(
        got,
        [
            r#"t5[City] "Capital" -> "Madrid""#,
            r#"t5[Country] "España" -> "Spain""#
        ]
    );
}

#[test]
fn city_distribution_peaks_at_madrid() {
    let d = column_distribution(&fixture::dirty(), "City").unwrap();
    let madrid = d.weights[&Value::text("Madrid")];
    assert!(d
        .weights
        .iter()
        .all(|(v, &c)| v == &Value::text("Madrid") || c < madrid));
}

#[test]
fn city_indicator_needs_the_team_constraint() {
    let alg = ReferenceRepair::default();
    let task = RepairTask::from_repair(
        &alg,
        fixture::constraints(),
        fixture::dirty(),
        CellRef::new(5, "City"),
    )
    .unwrap();
    assert_eq!(task.expected, Value::text("Madrid"));
    let with = indicator(&alg, &task, &subset(&["C1", "C2", "C3"]), &task.dirty).unwrap();
    let without = indicator(&alg, &task, &subset(&["C2", "C3"]), &task.dirty).unwrap();
    assert_eq!((with, without), (1, 0));
}

#[test]
fn constraint_values_on_the_country_cell() {
    let alg = ReferenceRepair::default();
    let task = RepairTask::from_repair(
        &alg,
        fixture::constraints(),
        fixture::dirty(),
        fixture::target(),
    )
    .unwrap();
    let report = shapley_constraints(&alg, &task).unwrap();
    let values: Vec<(String, Rational)> = report
        .values
        .iter()
        .map(|v| (v.player.to_string(), v.value.exact().unwrap().clone()))
        .collect();
    assert_eq!(
        values,
        [
            ("C1".to_string(), Rational::new(1, 6)),
            ("C2".to_string(), Rational::new(1, 6)),
            ("C3".to_string(), Rational::new(2, 3)),
            ("C4".to_string(), Rational::zero()),
        ]
    );
    assert_eq!(report.evaluations, 16);
    let order: Vec<String> = rank(&report)
        .players()
        .iter()
        .map(|p| p.to_string())
        .collect();
    assert_eq!(order, ["C3", "C1", "C2", "C4"]);
}

#[test]
fn team_violations_pair_t5_with_the_other_real_madrid_rows() {
    let c1 = &subset(&["C1"])[0];
    let pairs: Vec<(usize, usize)> = violations(c1, &fixture::dirty())
        .unwrap()
        .into_iter()
        .map(|v| v.pair)
        .collect();
    assert_eq!(pairs, [(3, 5), (5, 3), (5, 6), (6, 5)]);
    let c4 = &subset(&["C4"])[0];
    assert!(violations(c4, &fixture::clean()).unwrap().is_empty());
}

#[test]
fn singleton_mask_leaves_one_cell() {
    let t = fixture::dirty();
    let masked = mask_cells(&t, &[CellRef::new(5, "League")]).unwrap();
    let live: Vec<_> = masked
        .positions()
        .filter(|p| !masked.get(*p).is_null())
        .collect();
    assert_eq!(live.len(), 1);
    assert_eq!(
        masked.value(&CellRef::new(5, "League")).unwrap(),
        &Value::text("La Liga")
    );
}
