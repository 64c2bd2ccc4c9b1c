use std::io::Write;
use std::process::{Command, Output, Stdio};

const EXAMPLE: &str = "[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4";

fn sesame(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sesame"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().expect("piped").write_all(stdin.as_bytes()).expect("stdin");
    child.wait_with_output().expect("binary exits")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn traces_the_running_example_from_a_file() {
    let dir = std::env::temp_dir().join(format!("sesame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("example.esc");
    std::fs::write(&file, format!("# the running example\n\n{EXAMPLE}\n")).unwrap();
    let o = sesame(&["--trace", file.to_str().unwrap()], "");
    assert!(o.status.success());
    let printed: String = stdout(&o).lines().filter(|l| !l.starts_with("Metrics:")).map(|l| format!("{l}\n")).collect();
    assert_eq!(printed, include_str!("golden/running_example.txt"));
    assert!(stdout(&o).contains("Metrics:"));
}

#[test]
fn reads_terms_from_standard_input() {
    let o = sesame(&[], "\\m1m1\n[!\\m1m1-e1]e1\n");
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("Accepted grammar"));
    assert_eq!(out.matches("->*GC").count(), 2);
}

#[test]
fn exit_status_names_the_failure() {
    assert_eq!(sesame(&[], "[m1-\n").status.code(), Some(3));
    assert_eq!(sesame(&[], "\\m1m2\n").status.code(), Some(4));
    assert_eq!(sesame(&[], "[\\m1m1-e1]e1\n").status.code(), Some(5));
    assert_eq!(sesame(&["--max-steps", "3"], &format!("{EXAMPLE}\n")).status.code(), Some(6));
    assert_eq!(sesame(&["--mode", "warp"], "").status.code(), Some(2));
}

#[test]
fn parse_errors_point_at_the_input() {
    let o = sesame(&[], "[m1-\n");
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains('^'), "{err}");
}

#[test]
fn families_run_in_every_mode() {
    for mode in ["sesame", "bam", "good", "basic"] {
        let o = sesame(&["--family", "sigma:2", "--mode", mode], "");
        assert!(o.status.success(), "{mode}: {}", String::from_utf8_lossy(&o.stderr));
    }
    // the basic machine wants closed terms
    assert_eq!(sesame(&["--family", "cutpi:2,3", "--mode", "bam"], "").status.code(), Some(1));
}

#[test]
fn json_output_is_one_object_per_line() {
    let o = sesame(&["--json", "--trace"], &format!("{EXAMPLE}\n"));
    assert!(o.status.success());
    let events: Vec<serde_json::Value> =
        stdout(&o).lines().map(|l| serde_json::from_str(l).expect("json line")).collect();
    assert_eq!(events.iter().filter(|e| e["event"] == "step" && !e["tag"].is_null()).count(), 13);
    assert!(events.iter().any(|e| e["event"] == "metrics"));
}

#[test]
fn self_test_passes() {
    let o = sesame(&["--self-test"], "");
    assert!(o.status.success());
    assert_eq!(stdout(&o).matches(": ok").count(), 4);
}

#[test]
fn batch_and_standard_input_print_the_same_trace() {
    let dir = std::env::temp_dir().join(format!("sesame-cli-batch-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("terms.esc");
    let terms = format!("{EXAMPLE}\n[!\\m1m1-e1][e1?m2]m2\n");
    std::fs::write(&file, &terms).unwrap();
    let batch = stdout(&sesame(&["--trace", "--seed", "5", file.to_str().unwrap()], ""));
    let repl = stdout(&sesame(&["--trace", "--seed", "5"], &terms));
    let from_input = repl.find("Input:").unwrap();
    assert_eq!(batch, repl[from_input..]);
}

#[test]
fn json_trace_matches_the_text_trace() {
    let text = stdout(&sesame(&["--trace"], &format!("{EXAMPLE}\n")));
    let text = &text[text.find("Input:").unwrap()..];
    let json = stdout(&sesame(&["--trace", "--json"], &format!("{EXAMPLE}\n")));
    let text_steps: Vec<String> = text
        .lines()
        .filter(|l| (l.starts_with("->") && !l.starts_with("->*GC")) || l.starts_with("       "))
        .map(str::to_string)
        .collect();
    let json_steps: Vec<String> = json
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|e| e["event"] == "step")
        .map(|e| {
            let tag = e["tag"].as_str().unwrap_or("");
            let state = e["state"].as_str().unwrap();
            if tag.is_empty() {
                format!("       {state}")
            } else {
                format!("->{tag:<5}{state}")
            }
        })
        .collect();
    assert_eq!(text_steps, json_steps);
}

#[test]
fn sigma_three_has_no_multiplicative_step() {
    let o = sesame(&["--family", "sigma:3"], "");
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("Metrics:") && l.contains("multiplicative=0")));
}
