use std::process::Command;

fn floer_cube(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_floer-cube")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn trefoil_reduced_json_matches_oracle() {
    let (code, out, err) = floer_cube(&["compute", "--word", "1 1 1", "--strands", "2", "--variant", "reduced"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["comparison"]["match"], true);
    assert_eq!(v["total_dim"], 15);
    assert_eq!(v["stage"], "E2");
}

#[test]
fn words_file_to_csv_output() {
    let dir = std::env::temp_dir().join(format!("floer-cube-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let words = dir.join("words.txt");
    let out = dir.join("out.csv");
    std::fs::write(&words, "# knots\n1: \n2: 1 1 1\n").unwrap();
    let (code, _, err) = floer_cube(&[
        "compute",
        "--words-file",
        words.to_str().unwrap(),
        "--format",
        "csv",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches("variant,i,j,k,dim").count(), 1);
    assert!(text.lines().count() > 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn verify_flag_runs_a_suite() {
    let (code, out, _) = floer_cube(&["--jobs", "2", "--verify", "reduction-edge"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 7);
}

#[test]
fn malformed_word_exits_with_error() {
    let (code, _, err) = floer_cube(&["compute", "--word", "1 x", "--strands", "2"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"), "{err}");
}
