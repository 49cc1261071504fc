use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use tempfile::TempDir;

fn idcode() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_idcode"));
    for (k, _) in std::env::vars() {
        if k.starts_with("IDCODE_") {
            cmd.env_remove(k);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    idcode().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn keygen(dir: &Path, params: &str, seed: u64, name: &str) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let o = run(&["keygen", "--params", params, "--seed", &seed.to_string(), "--out", &p]);
    assert!(o.status.success(), "{o:?}");
    p
}

fn tag_hex(params: &str, file: &str, seed: u64) -> String {
    let o = run(&["tag", "--params", params, "--identity-file", file, "--seed", &seed.to_string()]);
    assert!(o.status.success(), "{o:?}");
    stdout(&o).lines().next().unwrap().to_string()
}

#[test]
fn keygen_sizes_and_determinism() {
    let dir = TempDir::new().unwrap();
    let a = keygen(dir.path(), "2,2,1", 1, "a");
    assert_eq!(std::fs::read(&a).unwrap().len(), 2);
    let b = keygen(dir.path(), "13,7,6", 9, "b");
    let c = keygen(dir.path(), "13,7,6", 9, "c");
    let b = std::fs::read(b).unwrap();
    assert_eq!(b.len(), 93_184);
    assert_eq!(b, std::fs::read(c).unwrap());
}

#[test]
fn tag_output_shape() {
    let dir = TempDir::new().unwrap();
    let id = keygen(dir.path(), "4,3,2", 3, "id");
    let o = run(&["tag", "--m", "4", "--k", "3", "--delta", "2", "--identity-file", &id, "--seed", "5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap().len(), 6); // 20 bits -> 3 bytes
    let breakdown = lines.next().unwrap();
    assert!(breakdown.starts_with("r1=") && breakdown.contains(" r2=") && breakdown.contains(" tag="));
    assert_eq!(tag_hex("4,3,2", &id, 5), tag_hex("4,3,2", &id, 5));
}

#[test]
fn zero_identity_has_zero_tag() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("zero");
    std::fs::write(&path, [0u8; 2]).unwrap();
    for seed in 0..5 {
        let o = run(&["tag", "--params", "2,2,1", "--identity-file", path.to_str().unwrap(), "--seed", &seed.to_string()]);
        assert!(stdout(&o).lines().nth(1).unwrap().ends_with("tag=0"));
    }
}

#[test]
fn mismatched_identity_length_fails() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("short");
    std::fs::write(&path, [0u8; 3]).unwrap();
    let o = run(&["tag", "--params", "2,2,1", "--identity-file", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let id = keygen(dir.path(), "4,3,2", 11, "id");
    for seed in 0..10 {
        let hex = tag_hex("4,3,2", &id, seed);
        let ok = run(&["verify", "--params", "4,3,2", "--identity-file", &id, &hex]);
        assert_eq!(ok.status.code(), Some(0), "{ok:?}");
        assert!(stdout(&ok).starts_with("accept"));

        // 20 bits in 3 bytes: the tag is the second-to-last nibble
        let n = hex.len();
        let tag = u8::from_str_radix(&hex[n - 2..n - 1], 16).unwrap();
        let altered = format!("{}{:x}{}", &hex[..n - 2], tag ^ 0x5, &hex[n - 1..]);
        let bad = run(&["verify", "--params", "4,3,2", "--identity-file", &id, &altered]);
        assert_eq!(bad.status.code(), Some(1), "{bad:?}");
        assert!(stdout(&bad).starts_with("reject"));

        let truncated = run(&["verify", "--params", "4,3,2", "--identity-file", &id, &hex[..hex.len() - 2]]);
        assert_eq!(truncated.status.code(), Some(2));
    }
    let padded = format!("{}1", &tag_hex("4,3,2", &id, 0)[..5]);
    let o = run(&["verify", "--params", "4,3,2", "--identity-file", &id, &padded]);
    assert_eq!(o.status.code(), Some(2));
    let junk = run(&["verify", "--params", "4,3,2", "--identity-file", &id, "zz"]);
    assert_eq!(junk.status.code(), Some(2));
}

#[test]
fn pipeline_over_small_grid() {
    let dir = TempDir::new().unwrap();
    for params in ["2,2,1", "2,3,1", "2,3,2", "3,3,1", "4,3,2", "5,4,3", "8,3,2"] {
        let id = keygen(dir.path(), params, 7, "id");
        let hex = tag_hex(params, &id, 8);
        let o = run(&["verify", "--params", params, "--identity-file", &id, &hex]);
        assert_eq!(o.status.code(), Some(0), "{params}");
    }
}

#[test]
fn challenge_at_m13_k7_is_fifteen_bytes() {
    // challenge size does not depend on delta; (13,7,5) identities are 512 MiB
    let dir = TempDir::new().unwrap();
    let id = keygen(dir.path(), "13,7,6", 1, "id");
    assert_eq!(tag_hex("13,7,6", &id, 2).len(), 30);
}

#[test]
fn env_overrides() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("env");
    let o = idcode()
        .args(["keygen", "--out", out.to_str().unwrap()])
        .env("IDCODE_PARAMS", "3,2,1")
        .env("IDCODE_SEED", "4")
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    assert_eq!(std::fs::read(out).unwrap().len(), 6);
}

#[test]
fn collide_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.csv");
    let o = run(&[
        "collide", "--params", "4,3,2", "--n-challenges", "2", "--samples", "2000", "--seed", "1",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "m,k,delta,n_c,samples,accepts,fraction,theory,std_error");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("4,3,2,1,2000,"));
    let again = run(&["collide", "--params", "4,3,2", "--n-challenges", "2", "--samples", "2000", "--seed", "1"]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn bench_csv() {
    let o = run(&["bench", "--params", "3,3,2", "--repetitions", "3"]);
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,3,2,polynomial,"));
    assert!(lines[2].starts_with("3,3,2,zech,"));
    let o = run(&["bench", "--params", "3,3,2", "--repetitions", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

struct Listener(Child);

impl Drop for Listener {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn listen(params: &str, id: &str, extra: &[&str]) -> (Listener, String) {
    let mut child = idcode()
        .args(["listen", "--bind", "127.0.0.1:0", "--params", params, "--identity-file", id])
        .args(extra)
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").expect("address line").to_string();
    (Listener(child), addr)
}

#[test]
fn send_and_listen() {
    let dir = TempDir::new().unwrap();
    let id = keygen(dir.path(), "4,3,2", 2, "id");
    let (_l, addr) = listen("4,3,2", &id, &[]);
    let stats = dir.path().join("stats.csv");
    let o = run(&[
        "send", &addr, "--params", "4,3,2", "--identity-file", &id, "--count", "20", "--seed", "3",
        "--stats-csv", stats.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("accepts=20 rejects=0 frame_drops=0"));
    let csv = std::fs::read_to_string(stats).unwrap();
    assert_eq!(csv.lines().count(), 21);

    let o = run(&["send", &addr, "--params", "4,3,2", "--identity-file", &id, "--mode", "transmit-identity"]);
    assert!(stdout(&o).contains("accepts=1"), "{o:?}");
}

#[test]
fn send_to_closed_port_fails() {
    let dir = TempDir::new().unwrap();
    let id = keygen(dir.path(), "2,2,1", 2, "id");
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let o = run(&["send", &port.to_string(), "--params", "2,2,1", "--identity-file", &id]);
    assert_eq!(o.status.code(), Some(2));
}
