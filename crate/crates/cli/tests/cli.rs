use std::process::{Command, Output};

fn rellich(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rellich")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header and first data row of a CSV output, skipping the provenance line.
fn first_row(text: &str) -> Vec<(String, String)> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# tool=rellich"));
    let cols: Vec<&str> = lines.next().unwrap().split(',').collect();
    let vals: Vec<&str> = lines.next().unwrap().split(',').collect();
    cols.into_iter().zip(vals).map(|(c, v)| (c.to_string(), v.to_string())).collect()
}

fn field<'a>(row: &'a [(String, String)], name: &str) -> &'a str {
    &row.iter().find(|(c, _)| c == name).unwrap().1
}

#[test]
fn constants_default_row() {
    let o = rellich(&["constants", "--k", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let row = first_row(&stdout(&o));
    assert_eq!(field(&row, "A"), "576");
    assert_eq!(field(&row, "B"), "13");
    assert_eq!(field(&row, "Q"), "24");
    assert_eq!(field(&row, "star_ok"), "true");
}

#[test]
fn violated_condition_exits_2_unless_allowed() {
    let o = rellich(&["constants", "--k", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(field(&first_row(&stdout(&o)), "gamma_crit"), "0");
    let o = rellich(&["constants", "--k", "5", "--allow-star-violation"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bad_input_exits_1() {
    assert_eq!(rellich(&["constants", "--p", "abc"]).status.code(), Some(1));
    assert_eq!(rellich(&["constants", "--precision", "10"]).status.code(), Some(1));
    assert_eq!(rellich(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn non_integrable_exits_2() {
    let o = rellich(&["integrate", "--eps", "-0.1,0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identities_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = rellich(&["identities", "--trials", "5", "--seed", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().skip(2).all(|l| l.ends_with(",true")));
}

#[test]
fn json_lines_carry_provenance() {
    let o = rellich(&["constants", "--format", "json"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    let head: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(head["provenance"]["command"], "constants");
    let row: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(row["A"], "576");
}

#[test]
fn schema_lists_documented_columns() {
    let text = stdout(&rellich(&["schema"]));
    for needle in [
        "constants: m, p, gamma, k, A_prime, A_double_prime, A, B",
        "check-inequality:",
        "remainder",
        "sharpness-b: kind, eps, quotient",
        "d-sweep: kind, D, probe",
        "provenance",
    ] {
        assert!(text.contains(needle), "{needle}");
    }
}
