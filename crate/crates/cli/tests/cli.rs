use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn spatialui() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spatialui"))
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = spatialui()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn replay_reproduces_golden_trace() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("trace.jsonl");
    let status = spatialui()
        .args(["replay", "--script", path_arg(&data("demo_script.jsonl"))])
        .args(["--chargers", path_arg(&data("chargers.csv"))])
        .args(["--config", path_arg(&data("demo.toml"))])
        .args(["--out", path_arg(&out)])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let golden = std::fs::read(data("demo_trace.jsonl")).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), golden);
    // The fixture names one scan that does not exist; that only warns.
    assert!(String::from_utf8_lossy(&status.stderr).contains("abz-10"));
}

#[test]
fn validate_accepts_each_fixture_kind() {
    for (name, expect) in [
        ("chargers.csv", "ok: 10 chargers"),
        ("scans/abz-01.ply", "ok: 8 points"),
        ("demo.toml", "ok: config"),
        ("demo_script.jsonl", "script lines"),
    ] {
        let out = spatialui().args(["validate", path_arg(&data(name))]).output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains(expect), "{name}");
    }
}

#[test]
fn validate_accepts_layout_and_rules_json() {
    let dir = TempDir::new().unwrap();
    let layout = dir.path().join("layout.json");
    std::fs::write(
        &layout,
        r#"{"version":1,"saved_at":"2024-03-01T12:00:00.000Z","entries":{"map":{"p":[0,0.8,-0.9],"q":[0,0,0,1]}}}"#,
    )
    .unwrap();
    let rules = dir.path().join("rules.json");
    std::fs::write(&rules, r#"{"version":1,"rules":[{"tag":"default","visible":["map"]}]}"#).unwrap();
    for (path, expect) in [(&layout, "layout with 1 entries"), (&rules, "1 context rules")] {
        let out = spatialui().args(["validate", path_arg(path)]).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stdout).contains(expect));
    }
}

#[test]
fn validate_rejects_malformed_files_with_code_2() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("bad.csv", "id,lat,lon,type,available,scan_path\na,1,1,slow,1,\nb,95,0,fast,1,\n"),
        ("bad.json", "{\"version\":1,"),
        ("other.json", "{\"something\":1}"),
        ("bad.toml", "[button]\ntravel = -1.0\n"),
        ("bad.jsonl", "{\"t\":1}\n{\"t\":0.5}\n"),
        ("bad.ply", "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nend_header\n1\n"),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = spatialui().args(["validate", path_arg(&path)]).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let missing = spatialui().args(["validate", "/nonexistent/file.csv"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

const FRAME_0: &str = r#"{"t":0.0,"head":{"p":[0,1.6,0],"q":[0,0,0,1]},"devices":[]}"#;
const FRAME_1: &str = r#"{"t":0.1,"head":{"p":[0,1.6,0],"q":[0,0,0,1]},"devices":[]}"#;

fn world_args() -> Vec<String> {
    vec!["--chargers".into(), path_arg(&data("chargers.csv")).into(), "--config".into(), path_arg(&data("demo.toml")).into()]
}

#[test]
fn run_emits_one_snapshot_per_frame() {
    let mut args = vec!["run".to_string()];
    args.extend(world_args());
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let input = format!("{FRAME_0}\n{{\"t\":0.05,\"directive\":\"set_context\",\"tag\":\"scan\"}}\n{FRAME_1}\n");
    let out = run_with_stdin(&args, &input);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let snapshots: Vec<serde_json::Value> = stdout
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v.get("frame").is_some())
        .collect();
    assert_eq!(snapshots.len(), 2);
    assert_eq!(snapshots[1]["frame"], 2);
    let filter = snapshots[1]["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|n| n["name"] == "filter_panel")
        .unwrap();
    assert_eq!(filter["visible"], false);
}

#[test]
fn run_rejects_stale_and_malformed_input_with_code_3() {
    let mut args = vec!["run".to_string()];
    args.extend(world_args());
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    for input in [format!("{FRAME_1}\n{FRAME_0}\n"), format!("{FRAME_0}\nnot json\n")] {
        let out = run_with_stdin(&args, &input);
        assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
        // The first frame was still answered.
        assert!(String::from_utf8_lossy(&out.stdout).contains("\"frame\":1"));
    }
}

#[test]
fn missing_chargers_file_is_a_format_error() {
    let out = run_with_stdin(&["run", "--chargers", "/nonexistent.csv"], "");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn serve_answers_one_tcp_client() {
    let port = {
        let probe = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        probe.local_addr().unwrap().port()
    };
    let mut args = vec!["run".to_string()];
    args.extend(world_args());
    args.extend(["--serve".to_string(), port.to_string()]);
    let mut child = spatialui().args(&args).stdout(Stdio::null()).stderr(Stdio::null()).spawn().unwrap();

    let deadline = Instant::now() + Duration::from_secs(20);
    let stream = loop {
        match TcpStream::connect(("127.0.0.1", port)) {
            Ok(s) => break s,
            Err(_) if Instant::now() < deadline => thread::sleep(Duration::from_millis(50)),
            Err(e) => {
                let _ = child.kill();
                panic!("could not connect: {e}");
            }
        }
    };
    stream.set_read_timeout(Some(Duration::from_secs(20))).unwrap();
    let mut writer = stream.try_clone().unwrap();
    let mut reader = BufReader::new(stream);
    writer.write_all(format!("{FRAME_0}\n").as_bytes()).unwrap();
    let mut line = String::new();
    reader.read_line(&mut line).unwrap();
    let snap: serde_json::Value = serde_json::from_str(&line).unwrap();
    assert_eq!(snap["frame"], 1);
    assert!(snap["nodes"].as_array().unwrap().len() > 10);
    writer.shutdown(std::net::Shutdown::Write).unwrap();
    let status = child.wait().unwrap();
    assert!(status.success());
}
