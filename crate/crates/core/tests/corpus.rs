use std::fs;
use std::path::PathBuf;

use effws_core::pipeline::{compile, front, run_core, Semantics};
use effws_core::surface::eval::run_surface;
use effws_core::DEFAULT_FUEL;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../harness/tests/corpus")
}

fn load(name: &str) -> (String, String) {
    let dir = corpus_dir();
    let src = fs::read_to_string(dir.join(format!("{name}.effs"))).unwrap();
    let expected = fs::read_to_string(dir.join(format!("{name}.expected"))).unwrap();
    (src, expected)
}

fn check_all_routes(name: &str) {
    let (src, expected) = load(name);
    let compiled = compile(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
    for sem in Semantics::ALL {
        let outcome = run_core(&compiled.core, sem, DEFAULT_FUEL).unwrap();
        assert_eq!(outcome.golden_text(), expected, "{name} under {sem}");
    }
}

#[test]
fn test1_prints_acdbcd() {
    check_all_routes("test1");
}

#[test]
fn test2_prints_per_instance_order() {
    check_all_routes("test2");
}

#[test]
fn testn1_relays_to_outer_handler() {
    check_all_routes("testn1");
}

#[test]
fn testn2_reraises_unhandled_operations() {
    check_all_routes("testn2");
    check_all_routes("testn2'");
}

#[test]
fn reader_answers_21() {
    check_all_routes("reader");
}

#[test]
fn single_cell_state() {
    check_all_routes("state");
}

#[test]
fn two_cells_of_different_types() {
    check_all_routes("two-ref");
}

#[test]
fn exeff_matches_hand_written_union() {
    check_all_routes("exeff");
    check_all_routes("exeff_single");
}

#[test]
fn multi_op_programs_agree_with_direct_evaluation() {
    for name in ["test1", "test2", "testn1", "testn2", "testn2'", "exeff"] {
        let (src, expected) = load(name);
        let p = front(&src).unwrap();
        assert_eq!(
            run_surface(&p, DEFAULT_FUEL).golden_text(),
            expected,
            "{name}"
        );
    }
}

#[test]
fn exd_gives_135_under_both_delimcc_semantics() {
    use effws_core::core_delimcc::{check_delimcc, fixtures::exd, DType, DTypeCtx};
    use effws_core::delimcc_denot::run_delimcc;
    use effws_core::delimcc_step::run_step;
    let p = exd();
    assert_eq!(
        check_delimcc(&mut DTypeCtx::new(), &p.body).unwrap(),
        DType::Int
    );
    assert_eq!(run_delimcc(&p, DEFAULT_FUEL).golden_text(), "\n135\n");
    assert_eq!(run_step(&p, DEFAULT_FUEL).golden_text(), "\n135\n");
}
