mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;

use common::{fixture, golden_records, FIXTURES};
use mathworld::convert::validate_states;
use mathworld::corpus::{
    corpus_to_string, graph_to_string, load_corpus, load_graph, load_predictions, parse_corpus, parse_graph,
    parse_predictions, predictions_to_string, save_corpus, save_graph, CorpusError,
};
use mathworld::metrics::strong_equivalent;
use mathworld::model::RelationType;
use mathworld::reason::solve_reference;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Compares a checked-in file with freshly generated content; set
/// `MATHWORLD_BLESS=1` to rewrite it.
fn check_file(name: &str, expected: &str) {
    let path = data(name);
    if std::env::var_os("MATHWORLD_BLESS").is_some() {
        std::fs::write(&path, expected).unwrap();
    }
    let actual = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "{name} is stale");
}

#[test]
fn checked_in_files_are_current() {
    let (g, states) = fixture("cafeteria").graph();
    check_file("cafeteria.json", &graph_to_string(&g, &states));
    let records = golden_records();
    check_file("golden.jsonl", &corpus_to_string(&records));
    let forms: BTreeMap<String, _> = records
        .iter()
        .map(|r| (r.id.clone(), r.logical_forms.clone()))
        .collect();
    check_file("gold-as-pred.lf", &predictions_to_string(&forms));
}

#[test]
fn cafeteria_file_structure() {
    let file = load_graph(data("cafeteria.json")).unwrap();
    assert_eq!(file.model.container_count(), 3);
    assert_eq!(file.model.relation_count(), 2);
    assert!(file
        .model
        .relations()
        .all(|r| r.kind.relation_type() == RelationType::Transfer));
    assert_eq!(solve_reference(&file.model).unwrap(), fixture("cafeteria").answer());
}

#[test]
fn golden_corpus_loads_validates_and_solves() {
    let records = load_corpus(data("golden.jsonl")).unwrap();
    assert_eq!(records.len(), 6);
    for r in &records {
        r.graph.validate().unwrap();
        validate_states(&r.graph, &r.states).unwrap();
        assert_eq!(solve_reference(&r.graph).as_ref(), Ok(&r.answer), "{}", r.id);
    }
}

#[test]
fn save_load_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    for f in FIXTURES {
        let (g, states) = f.graph();
        let path = dir.path().join(format!("{}.json", f.id));
        save_graph(&path, &g, &states).unwrap();
        let back = load_graph(&path).unwrap();
        assert_eq!(back.model, g, "{}", f.id);
        assert_eq!(back.states, states);
        assert!(strong_equivalent(&back.model, &g));
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(graph_to_string(&back.model, &back.states), text);
    }
    let records: Vec<_> = FIXTURES.iter().map(|f| f.record()).collect();
    let path = dir.path().join("all.jsonl");
    save_corpus(&path, &records).unwrap();
    let back = load_corpus(&path).unwrap();
    assert_eq!(back, records);
    assert_eq!(corpus_to_string(&back), std::fs::read_to_string(&path).unwrap());
}

#[test]
fn predictions_round_trip() {
    let pred = load_predictions(data("gold-as-pred.lf")).unwrap();
    assert!(pred.warnings.is_empty());
    assert_eq!(pred.forms.len(), 6);
    for r in golden_records() {
        assert_eq!(pred.forms[&r.id], r.logical_forms, "{}", r.id);
    }
    let text = predictions_to_string(&pred.forms);
    assert_eq!(parse_predictions(&text).unwrap().forms, pred.forms);
}

#[test]
fn duplicate_ids_are_rejected() {
    let one = corpus_to_string(&[fixture("josh").record()]);
    let err = parse_corpus(&format!("{one}{one}")).unwrap_err();
    assert!(matches!(err, CorpusError::DuplicateId(ref id) if id == "josh"), "{err}");
}

#[test]
fn malformed_graph_is_an_error() {
    assert!(parse_graph("{").is_err());
    assert!(parse_graph("{\"nodes\": 3}").is_err());
}
