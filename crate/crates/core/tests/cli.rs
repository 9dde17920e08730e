use std::process::{Command, Output};

fn stackshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackshift"))
        .args(args)
        .env_remove("STACKSHIFT_STEP_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn table_default_and_empty() {
    let o = stackshift(&["table", "--steps", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert_eq!(last, "6\t(3,1) (4,6) (5,6) (6,10) (7,12) (8,9) (9,10) (10,6) (11,3) (12,2)");
    assert_eq!(text.lines().count(), 7);
    let o = stackshift(&["table", "--steps", "0"]);
    assert_eq!(stdout(&o), "m\tU_m\n");
}

#[test]
fn table_tsv_marks_block_ends() {
    let o = stackshift(&["table", "--steps", "13", "--format", "tsv"]);
    let ends: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .filter(|l| l.split('\t').nth(2) == Some("1"))
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    assert_eq!(ends, ["2", "5", "7", "13"]);
}

#[test]
fn sequences_rows() {
    let text = stdout(&stackshift(&["sequences", "--kmax", "4"]));
    assert!(text.lines().any(|l| l == "r\t2 3 2 6"));
    let text = stdout(&stackshift(&["sequences", "--kmax", "2"]));
    assert!(text.lines().any(|l| l == "zeta\t3 9"));
    let text = stdout(&stackshift(&["sequences", "--kmax", "1"]));
    assert!(text.lines().any(|l| l == "e_R\t8"));
    assert!(text.lines().any(|l| l == "C_R\t256"));
    let tsv = stdout(&stackshift(&["sequences", "--kmax", "1", "--format", "tsv"]));
    assert_eq!(tsv, "k\tr\tR\tzeta\tgamma_k\td_k\te_Rk\n1\t2\t2\t3\t5\t12\t8\n");
}

#[test]
fn budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_stackshift"))
        .args(["table", "--steps", "6"])
        .env("STACKSHIFT_STEP_BUDGET", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_stackshift"))
        .args(["table", "--steps", "1"])
        .env("STACKSHIFT_STEP_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(stackshift(&["verify", "--check", "eq21", "--measure", "dirac", "--T", "1"]).status.code(), Some(0));
    assert_eq!(stackshift(&["verify", "--check", "nope"]).status.code(), Some(2));
    assert_eq!(stackshift(&["verify"]).status.code(), Some(2));
    assert_eq!(stackshift(&["verify", "--check", "eq21", "--bogus"]).status.code(), Some(2));
    assert_eq!(stackshift(&["verify", "--check", "eq21", "--measure", "gauss"]).status.code(), Some(2));
    let o = stackshift(&[
        "verify", "--check", "p6", "--measure", "dirac", "--k", "1", "--exponent-offset", "-4",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_p5_exact_report() {
    let o = stackshift(&["verify", "--check", "p5", "--m", "2", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let js: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reports = js.as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["certified_exact"], true);
    assert_eq!(reports[0]["error_budget"], "0.0000000000000000e0");
}

#[test]
fn verify_all_writes_file_deterministically() {
    let dir = std::env::temp_dir().join(format!("stackshift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for p in [&a, &b] {
        let o = stackshift(&["verify", "--all", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let js: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert!(js.as_array().unwrap().len() >= 60);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn plotdata_sweeps() {
    let o = stackshift(&["plotdata", "--check", "eq21", "--measure", "gaussian", "--from", "0.1", "--to", "10", "--points", "50", "--log"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 51);
    assert_eq!(text.lines().next().unwrap(), "T\tlhs\trhs\tmargin");

    let o = stackshift(&["plotdata", "--check", "p6", "--param", "W", "--measure", "dirac", "--k", "1", "--from", "0.5", "--to", "8", "--points", "5"]);
    for line in stdout(&o).lines().skip(1) {
        let cols: Vec<f64> = line.split('\t').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[2] / cols[1], 81.0 / 8.0);
    }

    let o = stackshift(&["plotdata", "--check", "eq21", "--points", "0"]);
    assert_eq!(stdout(&o), "T\tlhs\trhs\tmargin\n");
    assert_eq!(stackshift(&["plotdata", "--check", "eq21", "--param", "k"]).status.code(), Some(2));
}

#[test]
fn lists_checks() {
    let text = stdout(&stackshift(&["checks"]));
    assert!(text.lines().any(|l| l.starts_with("theorem-final\t")));
    assert_eq!(text.lines().count(), 17);
}
