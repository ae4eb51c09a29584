use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_padkit");

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn padkit(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PADKIT_LAYOUT_CMD")
        .output()
        .expect("binary runs")
}

fn mini3(args: &[&str]) -> Output {
    let nodes = golden_dir().join("nodes.csv");
    let triads = golden_dir().join("triads.csv");
    let mut all = vec![
        "--nodes",
        nodes.to_str().unwrap(),
        "--triads",
        triads.to_str().unwrap(),
    ];
    all.extend_from_slice(args);
    padkit(&all)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn assert_ok(out: &Output) {
    assert_eq!(
        code(out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn run_all(dir: &Path) {
    let out = dir.to_str().unwrap();
    for cmd in [
        vec!["stats", "--out", out],
        vec!["dag", "--out", out],
        vec!["triads", "--out", out],
        vec!["dyads", "--problem", "P2", "--out", out],
        vec!["taxonomy", "--kind", "D", "--out", out],
    ] {
        assert_ok(&mini3(&cmd));
    }
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn mini3_outputs_match_golden_files() {
    let tmp = tempfile::tempdir().unwrap();
    run_all(tmp.path());
    let golden = golden_dir().join("mini3");
    assert_eq!(listing(tmp.path()), listing(&golden));
    for name in listing(&golden) {
        let want = fs::read_to_string(golden.join(&name)).unwrap();
        let got = fs::read_to_string(tmp.path().join(&name)).unwrap();
        assert_eq!(got, want, "{name} differs from golden");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_all(a.path());
    run_all(b.path());
    for name in listing(a.path()) {
        assert_eq!(
            fs::read(a.path().join(&name)).unwrap(),
            fs::read(b.path().join(&name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn stats_writes_seven_files_and_share_tables_sum_to_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mini3(&["stats", "--out", tmp.path().to_str().unwrap()]);
    assert_ok(&out);
    let names = listing(tmp.path());
    assert_eq!(names.len(), 7, "{names:?}");
    for stem in ["r_p", "w_p", "r_a", "u_a", "r_d"] {
        let text = fs::read_to_string(tmp.path().join(format!("{stem}.csv"))).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let (mut num, mut den) = (0u64, 1u64);
        for record in reader.records() {
            let record = record.unwrap();
            let n: u64 = record[2].parse().unwrap();
            let d: u64 = record[3].parse().unwrap();
            num = num * d + n * den;
            den *= d;
        }
        assert_eq!(num, den, "{stem} does not sum to one");
    }
}

#[test]
fn dyads_for_p2_is_a_single_full_edge() {
    let tmp = tempfile::tempdir().unwrap();
    assert_ok(&mini3(&[
        "dyads",
        "--problem",
        "P2",
        "--out",
        tmp.path().to_str().unwrap(),
    ]));
    let dot = fs::read_to_string(tmp.path().join("dyads_P2.dot")).unwrap();
    let edges: Vec<&str> = dot.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(edges.len(), 1);
    assert!(edges[0].contains("\"100.0%\""), "{}", edges[0]);
}

#[test]
fn ru_binary_dyads_count_units() {
    let tmp = tempfile::tempdir().unwrap();
    assert_ok(&mini3(&[
        "dyads",
        "--problem",
        "P1",
        "--dyad-count",
        "ru-binary",
        "--out",
        tmp.path().to_str().unwrap(),
    ]));
    let dot = fs::read_to_string(tmp.path().join("dyads_P1.dot")).unwrap();
    assert!(dot.contains("\"P1\" -> \"A1\" [label=\"66.7%\""), "{dot}");
    assert!(dot.contains("\"P1\" -> \"A2\" [label=\"33.3%\""), "{dot}");
}

#[test]
fn validate_reports_clean_corpus() {
    let out = mini3(&["validate"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: 3 research units, 6 triads"));
}

#[test]
fn validate_corrupt_triads_exits_one_with_row_number() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("triads.csv");
    fs::write(
        &bad,
        "ru_id,p,a,d\nRU1,P1.1,A1.1,D1.1\nRU1,P1.1,A9.1,D1.1\n",
    )
    .unwrap();
    let nodes = golden_dir().join("nodes.csv");
    let out = padkit(&[
        "--nodes",
        nodes.to_str().unwrap(),
        "--triads",
        bad.to_str().unwrap(),
        "validate",
    ]);
    assert_eq!(code(&out), 1);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("row 3"), "{stdout}");
}

#[test]
fn structural_errors_are_reported_as_a_list() {
    let tmp = tempfile::tempdir().unwrap();
    let json = tmp.path().join("corpus.json");
    assert_ok(&mini3(&[
        "export",
        "--format",
        "json",
        "--out",
        tmp.path().to_str().unwrap(),
    ]));
    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    // Swap the P and D slots of the first triad.
    let triad = &mut doc["research_units"][0]["triads"][0];
    let (p, d) = (triad["p"].clone(), triad["d"].clone());
    triad["p"] = d;
    triad["d"] = p;
    fs::write(&json, serde_json::to_string(&doc).unwrap()).unwrap();

    let out = padkit(&["--corpus", json.to_str().unwrap(), "validate"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    let errors = String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| l.starts_with("error"))
        .count();
    assert!(errors >= 2, "expected both slots reported");

    let out = padkit(&[
        "--corpus",
        json.to_str().unwrap(),
        "stats",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_two() {
    let nodes = golden_dir().join("nodes.csv");
    let nodes = nodes.to_str().unwrap();
    for args in [
        vec!["stats"],
        vec!["--nodes", nodes, "stats"],
        vec![
            "--nodes", nodes, "--triads", nodes, "--corpus", nodes, "stats",
        ],
        vec!["frobnicate"],
        vec!["taxonomy", "--kind", "X"],
        vec![],
    ] {
        let out = padkit(&args);
        assert_eq!(code(&out), 2, "{args:?}");
    }
    for problem in ["P9", "A1", "nonsense"] {
        let out = mini3(&["dyads", "--problem", problem]);
        assert_eq!(code(&out), 2, "{problem}");
    }
    let out = mini3(&["dag", "--min-width", "5", "--max-width", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn help_and_version_exit_zero() {
    assert_ok(&padkit(&["--help"]));
    assert_ok(&padkit(&["--version"]));
    assert_ok(&padkit(&["stats", "--help"]));
}

#[test]
fn missing_input_file_exits_one() {
    let out = padkit(&["--corpus", "/nonexistent/corpus.json", "stats"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn json_and_csv_exports_reproduce_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    assert_ok(&mini3(&["export", "--format", "json", "--out", dir]));
    assert_ok(&mini3(&["export", "--format", "csv", "--out", dir]));

    let from_json = tmp.path().join("json");
    let from_csv = tmp.path().join("csv");
    let corpus = tmp.path().join("corpus.json");
    let nodes = tmp.path().join("nodes.csv");
    let triads = tmp.path().join("triads.csv");
    for (input, out) in [
        (vec!["--corpus", corpus.to_str().unwrap()], &from_json),
        (
            vec![
                "--nodes",
                nodes.to_str().unwrap(),
                "--triads",
                triads.to_str().unwrap(),
            ],
            &from_csv,
        ),
    ] {
        let out = out.to_str().unwrap();
        for cmd in [vec!["stats", "--out", out], vec!["dag", "--out", out]] {
            let mut args = input.clone();
            args.extend(cmd);
            assert_ok(&padkit(&args));
        }
    }
    let golden = golden_dir().join("mini3");
    for name in listing(&from_json) {
        let want = fs::read(golden.join(&name)).unwrap();
        assert_eq!(fs::read(from_json.join(&name)).unwrap(), want, "{name}");
        assert_eq!(fs::read(from_csv.join(&name)).unwrap(), want, "{name}");
    }
}

#[test]
fn builtin_svg_is_written_next_to_dot() {
    let tmp = tempfile::tempdir().unwrap();
    assert_ok(&mini3(&[
        "dag",
        "--svg",
        "--layout",
        "builtin",
        "--out",
        tmp.path().to_str().unwrap(),
    ]));
    let svg = fs::read_to_string(tmp.path().join("dag.svg")).unwrap();
    assert!(svg.contains("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 7);
}

#[test]
fn layout_command_comes_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let nodes = golden_dir().join("nodes.csv");
    let triads = golden_dir().join("triads.csv");
    let out = Command::new(BIN)
        .args([
            "--nodes",
            nodes.to_str().unwrap(),
            "--triads",
            triads.to_str().unwrap(),
            "triads",
            "--svg",
            "--out",
            tmp.path().to_str().unwrap(),
        ])
        .env("PADKIT_LAYOUT_CMD", "cat")
        .output()
        .unwrap();
    assert_ok(&out);
    // `cat` echoes its input, so the "SVG" is the DOT text itself.
    assert_eq!(
        fs::read(tmp.path().join("triads.svg")).unwrap(),
        fs::read(tmp.path().join("triads.dot")).unwrap()
    );
}

#[test]
fn serve_reports_busy_port() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port().to_string();
    let out = mini3(&["serve", "--port", &port]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("already in use"));
}
