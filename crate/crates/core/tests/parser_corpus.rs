use xrepair_core::dc::{parse_dc, parse_dcs, render_dcs};
use xrepair_core::fixture;
use xrepair_core::{violations, DenialConstraint, Table};

#[test]
fn corpus_round_trips() {
    let dcs = parse_dcs(fixture::CORPUS_DC).unwrap();
    assert!(dcs.len() >= 20, "corpus has {} constraints", dcs.len());
    for dc in &dcs {
        let printed = dc.to_string();
        assert_eq!(&parse_dc(&printed).unwrap(), dc, "{printed}");
        assert_eq!(parse_dc(&printed).unwrap().to_string(), printed);
    }
    assert_eq!(parse_dcs(&render_dcs(&dcs)).unwrap(), dcs);
}

#[test]
fn corpus_holds_both_place_forms() {
    let dcs = parse_dcs(fixture::CORPUS_DC).unwrap();
    let ids: Vec<&str> = dcs.iter().map(|d| d.id.as_str()).collect();
    for id in ["C1", "C2", "C3", "C4", "C4_printed"] {
        assert!(ids.contains(&id), "{id} missing");
    }
    let fixture_dcs = fixture::constraints();
    for dc in &fixture_dcs {
        assert!(dcs.contains(dc), "{} differs from the corpus", dc.id);
    }
}

// Independent pair checker: every ordered pair, every predicate, by name.
fn brute_count(dc: &DenialConstraint, t: &Table) -> usize {
    use xrepair_core::dc::{CmpOp, Term, TupleVar};
    let n = t.row_count();
    let mut count = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let val = |term: &Term| match term {
                Term::Const(v) => v.clone(),
                Term::Cell { var, attr } => {
                    let row = if *var == TupleVar::T1 { i } else { j };
                    t.row(row)[t.col_index(attr).unwrap()].clone()
                }
            };
            let all = dc.predicates.iter().all(|p| {
                let (l, r) = (val(&p.left), val(&p.right));
                !l.is_null()
                    && !r.is_null()
                    && match p.op {
                        CmpOp::Eq => l == r,
                        CmpOp::Neq => l != r,
                        CmpOp::Lt => l < r,
                        CmpOp::Leq => l <= r,
                        CmpOp::Gt => l > r,
                        CmpOp::Geq => l >= r,
                    }
            });
            if all {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn violation_counts_match_pair_enumeration() {
    let corpus = parse_dcs(fixture::CORPUS_DC).unwrap();
    let schema = fixture::dirty().schema().to_vec();
    for table in [fixture::dirty(), fixture::clean()] {
        for dc in corpus.iter().filter(|d| d.bind(&schema).is_ok()) {
            assert_eq!(
                violations(dc, &table).unwrap().len(),
                brute_count(dc, &table),
                "{}",
                dc.id
            );
        }
    }
}
