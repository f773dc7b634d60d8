//! Binary-level behavior: exit codes, payload shapes, config precedence,
//! and byte-for-byte determinism across repeat runs.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkp-h3"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dkp-h3"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_text(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn specfun_prints_value_and_derivative() {
    let out = run(&["specfun", "--fn", "J", "--order", "0", "--arg", "0"]);
    assert_eq!(code(&out), 0);
    let text = stdout_text(&out);
    assert!(text.contains("value,derivative"), "{text}");
    assert!(
        text.contains("1.0000000000000000e0,0.0000000000000000e0"),
        "{text}"
    );
    assert!(text.contains("# fn = j"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["--no-such-flag"])), 2);
    assert_eq!(code(&run(&["specfun", "--order", "1", "--arg", "1"])), 2);
    assert_eq!(
        code(&run(&[
            "specfun", "--fn", "k", "--order", "0.5", "--arg", "-1"
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "dispersion",
            "--kappa-range",
            "2:0:5",
            "--n-r",
            "4",
            "--n-z",
            "4"
        ])),
        2
    );
    assert_eq!(code(&run(&["mode", "--r-min", "-1"])), 2);
    assert_eq!(code(&run(&["verify", "--fd-order", "3"])), 2);
    assert_eq!(
        code(&run(&["--config", "/no/such/file", "geometry-check"])),
        2
    );
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["verify", "--help"])), 0);
}

#[test]
fn mode_csv_carries_the_fixed_header_and_row_major_grid() {
    let out = run(&["mode", "--n-r", "5", "--n-z", "4"]);
    assert_eq!(code(&out), 0);
    let text = stdout_text(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# dkp-h3 mode"));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body[0],
        "r,z,Re(Phi0),Im(Phi0),Re(Phi1),Im(Phi1),Re(Phi2),Im(Phi2),Re(Phi3),Im(Phi3),\
         Re(E1),Im(E1),Re(E2),Im(E2),Re(E3),Im(E3),Re(H1),Im(H1),Re(H2),Im(H2),Re(H3),Im(H3)"
    );
    assert_eq!(body.len(), 1 + 5 * 4);
    let cell = |line: &str, idx: usize| -> f64 {
        line.split(',').nth(idx).unwrap().parse::<f64>().unwrap()
    };
    // r is the outer loop: the first four rows share r and walk z.
    assert_eq!(cell(body[1], 0), cell(body[2], 0));
    assert!(cell(body[1], 1) < cell(body[2], 1));
    assert!(cell(body[1], 0) < cell(body[5], 0));
    for row in &body[1..] {
        assert_eq!(row.split(',').count(), 22, "{row}");
    }
    // Echo includes the resolved mode parameters.
    assert!(text.contains("# family = sigma"), "{text}");
    assert!(text.contains("# n-r = 5"), "{text}");
}

#[test]
fn verify_reports_pass_and_fail_through_exit_codes() {
    let pass = run(&[
        "verify",
        "--system",
        "full",
        "--richardson",
        "--n-r",
        "8",
        "--n-z",
        "8",
    ]);
    assert_eq!(code(&pass), 0, "{}", stdout_text(&pass));
    let text = stdout_text(&pass);
    assert!(text.contains("# result = PASS"), "{text}");
    assert!(text.contains("index,label,max_abs"), "{text}");

    let fail = run(&[
        "verify",
        "--system",
        "full",
        "--sigma-im",
        "1.1",
        "--n-r",
        "8",
        "--n-z",
        "8",
    ]);
    assert_eq!(code(&fail), 1);
    let text = stdout_text(&fail);
    assert!(text.contains("# result = FAIL"), "{text}");
    assert!(text.contains("# offending:"), "{text}");
}

#[test]
fn verify_json_payload_mirrors_the_report() {
    let out = run(&[
        "verify", "--system", "scalar", "--eps", "1.2", "--n-r", "6", "--n-z", "6", "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout_text(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json stdout");
    assert_eq!(doc["config"]["subcommand"], "verify");
    assert_eq!(doc["config"]["family"], "sigma0");
    assert_eq!(doc["report"]["system"], "scalar-23a");
    assert_eq!(doc["report"]["equations"].as_array().unwrap().len(), 1);
    assert_eq!(doc["pass"], true);
    assert!(doc["report"]["grid"]["n_r"].is_number());
}

#[test]
fn geometry_check_passes_at_default_tolerance() {
    let out = run(&["geometry-check", "--points", "25"]);
    assert_eq!(code(&out), 0, "{}", stdout_text(&out));
    let text = stdout_text(&out);
    assert!(text.contains("christoffel-closed-vs-numeric"), "{text}");
    assert!(text.contains("rotation-closed-vs-contracted"), "{text}");
    assert!(text.contains("# result = PASS"), "{text}");
}

#[test]
fn dispersion_locates_the_closure_minimum() {
    let out = run(&[
        "dispersion",
        "--kappa-range",
        "0:2:21",
        "--n-r",
        "6",
        "--n-z",
        "6",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout_text(&out));
    let text = stdout_text(&out);
    let min_line = |tag: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(tag))
            .unwrap_or_else(|| panic!("missing {tag} in {text}"))
            .rsplit('=')
            .next()
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    assert!(
        (min_line("# closure_minimum_kappa") - 1.0).abs() < 1e-12,
        "{text}"
    );
    assert!(
        (min_line("# system_minimum_kappa") - 1.0).abs() < 1e-12,
        "{text}"
    );
    // The kappa = 0 row has no sigma mode; its system column is NaN.
    assert!(
        text.lines()
            .any(|l| l.starts_with("0.0000000000000000e0,") && l.ends_with("NaN")),
        "{text}"
    );
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# grid\nn-r = 5\nn-z = 4\neps = 1.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = run(&["mode", "--config", cfg]);
    assert_eq!(code(&from_file), 0);
    let text = stdout_text(&from_file);
    assert!(text.contains("# n-r = 5"), "{text}");
    assert!(text.contains("# eps = 1.5000000000000000e0"), "{text}");

    let overridden = run(&["mode", "--config", cfg, "--n-r", "6"]);
    let text = stdout_text(&overridden);
    assert!(text.contains("# n-r = 6"), "{text}");
    assert!(text.contains("# eps = 1.5000000000000000e0"), "{text}");
}

#[test]
fn repeat_runs_are_byte_identical() {
    let cases: [&[&str]; 5] = [
        &["geometry-check", "--points", "15"],
        &["mode", "--n-r", "5", "--n-z", "4", "--format", "json"],
        &[
            "verify", "--system", "sigma0", "--eps", "1.2", "--n-r", "6", "--n-z", "5",
        ],
        &[
            "dispersion",
            "--kappa-range",
            "0:2:5",
            "--n-r",
            "5",
            "--n-z",
            "4",
        ],
        &["specfun", "--fn", "kimag", "--order", "1.0", "--arg", "0.8"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert_eq!(code(&a), code(&b), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "stdout differs for {args:?}");
        // A serial run must agree with the default parallel run.
        let serial = run_env(args, "DKP_H3_THREADS", "1");
        assert_eq!(
            a.stdout, serial.stdout,
            "serial stdout differs for {args:?}"
        );
    }
}

#[test]
fn output_files_are_byte_identical_and_status_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("payload.csv");
    let args = [
        "mode",
        "--n-r",
        "5",
        "--n-z",
        "4",
        "--output",
        path.to_str().unwrap(),
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0);
    let bytes1 = std::fs::read(&path).unwrap();
    let second = run(&args);
    assert_eq!(code(&second), 0);
    let bytes2 = std::fs::read(&path).unwrap();
    assert!(!bytes1.is_empty());
    assert_eq!(bytes1, bytes2);
    // The payload went to the file; the resolved path is echoed inside it.
    assert!(String::from_utf8_lossy(&bytes1).contains("# output = "));
    assert!(stdout_text(&first).contains("mode: sampled 20 points"));
}
