//! End-to-end checks of the `valnet` binary: golden outputs for the bundled
//! scenario scripts, exit codes, and the parse/print round trip.

use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;

use valnet_cli::ast::{DenseValue, FocalSpec, MassEntry, NetworkDocument, Statement};
use valnet_cli::parse;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn run_fixture(name: &str, args: &[&str]) -> (String, String, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_valnet"))
        .arg("run")
        .arg(fixture(name))
        .args(args)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code(),
    )
}

#[test]
fn wardrobe_probability_golden() {
    let (stdout, stderr, code) = run_fixture("wardrobe_probability.vn", &[]);
    assert_eq!(code, Some(0), "stderr: {stderr}");
    assert_eq!(
        stdout,
        "Dress      p\n\
         B      0.333\n\
         W      0.333\n\
         P      0.333\n\
         \n\
         Dress      p\n\
         B      0.400\n\
         W      0.200\n\
         P      0.400\n\
         \n\
         Dress      p\n\
         B      0.051\n\
         W      0.026\n\
         P      0.923\n\
         \n"
    );
}

#[test]
fn wardrobe_belief_golden() {
    let (stdout, _, code) = run_fixture("wardrobe_belief.vn", &[]);
    assert_eq!(code, Some(0));
    assert_eq!(
        stdout,
        "Dress    bel     pl\n\
         B      0.000  1.000\n\
         W      0.000  1.000\n\
         P      0.000  1.000\n\
         \n\
         Dress    bel     pl\n\
         B      0.000  1.000\n\
         W      0.000  0.200\n\
         P      0.000  1.000\n\
         \n\
         Dress    bel     pl\n\
         B      0.000  0.100\n\
         W      0.000  0.020\n\
         P      0.900  1.000\n\
         \n"
    );
}

#[test]
fn wardrobe_possibility_golden() {
    let (stdout, _, code) = run_fixture("wardrobe_possibility.vn", &[]);
    assert_eq!(code, Some(0));
    assert_eq!(
        stdout,
        "Dress      N      Π\n\
         B      0.000  1.000\n\
         W      0.000  1.000\n\
         P      0.000  1.000\n\
         \n\
         Dress      N      Π\n\
         B      0.000  1.000\n\
         W      0.000  0.200\n\
         P      0.000  1.000\n\
         \n\
         Dress      N      Π\n\
         B      0.000  0.100\n\
         W      0.000  0.100\n\
         P      0.900  1.000\n\
         \n"
    );
}

#[test]
fn wardrobe_boolean_golden() {
    let (stdout, _, code) = run_fixture("wardrobe_boolean.vn", &[]);
    assert_eq!(code, Some(0));
    assert_eq!(
        stdout,
        "Dress  truth\n\
         B       true\n\
         W       true\n\
         P       true\n\
         \n\
         Dress  truth\n\
         B       true\n\
         W      false\n\
         P       true\n\
         \n\
         Dress  truth\n\
         B      false\n\
         W      false\n\
         P       true\n\
         \n"
    );
}

#[test]
fn unnormalized_run_prints_totals() {
    let (stdout, _, code) = run_fixture("wardrobe_probability.vn", &["--unnormalized"]);
    assert_eq!(code, Some(0));
    assert!(stdout.contains("total 0.098\n"), "{stdout}");
}

#[test]
fn oracle_check_passes_on_fixtures() {
    for f in [
        "wardrobe_probability.vn",
        "wardrobe_belief.vn",
        "wardrobe_possibility.vn",
        "wardrobe_boolean.vn",
        "wardrobe_all.vn",
        "grid_demo.vn",
    ] {
        let (_, stderr, code) = run_fixture(f, &["--oracle-check"]);
        assert_eq!(code, Some(0), "{f}: {stderr}");
    }
}

#[test]
fn exit_codes_distinguish_parse_and_statement_errors() {
    let dir = std::env::temp_dir();
    let bad = dir.join("valnet_bad_syntax.vn");
    std::fs::write(&bad, "nonsense here\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_valnet"))
        .args(["run", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let stale = dir.join("valnet_stale.vn");
    std::fs::write(&stale, "calculus probability\nvar X { a }\nquery X\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_valnet"))
        .args(["run", stale.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("stale"));
}

#[test]
fn validate_subcommand_reports_valid_trees() {
    for f in ["wardrobe_probability.vn", "alarm1.vn", "grid_demo.vn"] {
        let out = Command::new(env!("CARGO_BIN_EXE_valnet"))
            .args(["validate", fixture(f).to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{f}");
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("valid"), "{f}: {stdout}");
    }
}

#[test]
fn alarm_fixture_parses_with_all_four_encodings() {
    let text = std::fs::read_to_string(fixture("alarm1.vn")).unwrap();
    let doc = parse(&text).unwrap();
    let vals = doc
        .statements
        .iter()
        .filter(|(s, _)| matches!(s, Statement::DenseVal { .. } | Statement::MassVal { .. }))
        .count();
    assert_eq!(vals, 4);
    let (_, stderr, code) = run_fixture("alarm1.vn", &[]);
    assert_eq!(code, Some(0), "{stderr}");
}

#[test]
fn combined_document_yields_all_four_final_tables() {
    // 3 variables, 2 relations, one valuation block per calculus and target;
    // each `calculus` switch re-evaluates the same structure
    let text = std::fs::read_to_string(fixture("wardrobe_all.vn")).unwrap();
    let doc = parse(&text).unwrap();
    let vals = doc
        .statements
        .iter()
        .filter(|(s, _)| matches!(s, Statement::DenseVal { .. } | Statement::MassVal { .. }))
        .count();
    assert_eq!(vals, 8); // 4 calculi x 2 relations

    // print/parse round trip on the bundled document
    let reparsed = parse(&doc.to_string()).unwrap();
    assert_eq!(
        doc.statements.iter().map(|(s, _)| s).collect::<Vec<_>>(),
        reparsed
            .statements
            .iter()
            .map(|(s, _)| s)
            .collect::<Vec<_>>()
    );

    let (stdout, stderr, code) = run_fixture("wardrobe_all.vn", &[]);
    assert_eq!(code, Some(0), "{stderr}");
    assert_eq!(
        stdout,
        "Dress      p\n\
         B      0.051\n\
         W      0.026\n\
         P      0.923\n\
         \n\
         Dress    bel     pl\n\
         B      0.000  0.100\n\
         W      0.000  0.020\n\
         P      0.900  1.000\n\
         \n\
         Dress      N      Π\n\
         B      0.000  0.100\n\
         W      0.000  0.100\n\
         P      0.900  1.000\n\
         \n\
         Dress  truth\n\
         B      false\n\
         W      false\n\
         P       true\n\
         \n"
    );
}

#[test]
fn one_document_serves_several_calculi() {
    // structure declared once; `calculus` plus `reset` re-stage the same
    // scenario under two theories
    let script = "\
        var Dress { B W P }\n\
        var Philco { ok out }\n\
        var Speech { uttered unuttered }\n\
        rel washing ( Philco Dress )\n\
        rel coherence ( Speech Dress )\n\
        calculus probability\n\
        val washing probability dense [ 1/6 1/6 1/6 0.2 0.1 0.2 ]\n\
        val coherence probability dense [ 0.025 0.025 0.45 1/6 1/6 1/6 ]\n\
        observe Philco out\n\
        observe Speech uttered\n\
        propagate\n\
        query Dress\n\
        calculus possibility\n\
        reset\n\
        val washing possibility dense [ 1 1 1 1 0.2 1 ]\n\
        val coherence possibility dense [ 0.1 0.1 1 1 1 1 ]\n\
        observe Philco out\n\
        observe Speech uttered\n\
        propagate\n\
        query Dress\n";
    let doc = parse(script).unwrap();
    let mut session = valnet_cli::Session::with_builtins(valnet_cli::SessionOptions::default());
    let outputs = session.run_document(&doc).unwrap();
    let tables: Vec<&String> = outputs
        .iter()
        .filter_map(|o| match o {
            valnet_cli::Output::Table(t) => Some(t),
            _ => None,
        })
        .collect();
    assert_eq!(tables.len(), 2);
    assert!(tables[0].contains("0.923"), "{}", tables[0]);
    assert!(tables[1].contains("Π"), "{}", tables[1]);
    assert!(tables[1].contains("0.100"), "{}", tables[1]);
}

fn arb_name() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9-]{0,5}"
}

fn arb_statement() -> impl Strategy<Value = Statement> {
    let name = arb_name();
    prop_oneof![
        arb_name().prop_map(Statement::Calculus),
        (arb_name(), prop::collection::vec(arb_name(), 0..4))
            .prop_map(|(name, frame)| Statement::Var { name, frame }),
        (arb_name(), prop::collection::vec(arb_name(), 0..4))
            .prop_map(|(name, variables)| Statement::Rel { name, variables }),
        (
            arb_name(),
            arb_name(),
            prop::collection::vec(
                prop_oneof![
                    (-1.0e6..1.0e6f64).prop_map(DenseValue::Number),
                    any::<bool>().prop_map(DenseValue::Truth),
                ],
                0..8
            )
        )
            .prop_map(|(target, calculus, values)| Statement::DenseVal {
                target,
                calculus,
                values
            }),
        (
            arb_name(),
            arb_name(),
            prop::collection::vec(
                (
                    0.0..=1.0f64,
                    prop_oneof![
                        Just(FocalSpec::Full),
                        prop::collection::vec(prop::collection::vec(arb_name(), 0..3), 0..3)
                            .prop_map(FocalSpec::Configs),
                    ]
                )
                    .prop_map(|(mass, set)| MassEntry { mass, set }),
                0..3
            )
        )
            .prop_map(|(target, calculus, entries)| Statement::MassVal {
                target,
                calculus,
                entries
            }),
        (arb_name(), arb_name())
            .prop_map(|(variable, value)| Statement::Observe { variable, value }),
        name.prop_map(|variable| Statement::Retract { variable }),
        prop_oneof![Just(None), Just(Some(true)), Just(Some(false))]
            .prop_map(|unnormalized| Statement::Propagate { unnormalized }),
        arb_name().prop_map(|variable| Statement::Query { variable }),
        Just(Statement::Reset),
    ]
}

proptest! {
    #[test]
    fn print_parse_round_trip(statements in prop::collection::vec(arb_statement(), 0..12)) {
        let doc = NetworkDocument {
            statements: statements
                .into_iter()
                .map(|s| (s, valnet_cli::Location { line: 1, column: 1 }))
                .collect(),
        };
        let printed = doc.to_string();
        let reparsed = parse(&printed).unwrap_or_else(|e| panic!("{e}\n---\n{printed}"));
        prop_assert_eq!(
            doc.statements.iter().map(|(s, _)| s).collect::<Vec<_>>(),
            reparsed.statements.iter().map(|(s, _)| s).collect::<Vec<_>>()
        );
    }
}
