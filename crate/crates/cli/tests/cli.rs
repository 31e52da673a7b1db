use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fbar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbar"))
        .args(args)
        .output()
        .expect("spawn fbar")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn kv(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
        .unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn round_trip_both_modes() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("sample.txt");
    fs::write(&input, b"Philip Baback").unwrap();
    for mode in ["channels", "collapsed"] {
        let packed = dir.path().join(format!("{mode}.fbar"));
        let out = dir.path().join(format!("{mode}.out"));
        let o = fbar(&["compress", s(&input), "--mode", mode, "--output", s(&packed)]);
        assert!(o.status.success(), "{o:?}");
        assert!(stdout(&o).contains("honest_ratio="));
        assert!(stdout(&o).contains("honest_space_saving="));
        let header = fs::read(&packed).unwrap();
        assert_eq!(&header[..4], b"FBAR");
        assert_eq!(header[5], if mode == "channels" { 0 } else { 1 });
        let o = fbar(&["decompress", s(&packed), "--output", s(&out)]);
        assert!(o.status.success(), "{o:?}");
        assert_eq!(fs::read(&out).unwrap(), b"Philip Baback");
    }
}

#[test]
fn default_paths() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("data.bin");
    let data: Vec<u8> = (0..=255u8).cycle().take(5000).collect();
    fs::write(&input, &data).unwrap();
    assert!(fbar(&["compress", s(&input)]).status.success());
    let packed = dir.path().join("data.bin.fbar");
    assert!(packed.exists());
    fs::remove_file(&input).unwrap();
    assert!(fbar(&["decompress", s(&packed)]).status.success());
    assert_eq!(fs::read(&input).unwrap(), data);
}

#[test]
fn empty_file_gives_header_only_container() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty");
    fs::write(&input, b"").unwrap();
    let packed = dir.path().join("empty.fbar");
    assert!(fbar(&["compress", s(&input), "--output", s(&packed)]).status.success());
    assert_eq!(fs::read(&packed).unwrap().len(), 18);
    let out = dir.path().join("restored");
    assert!(fbar(&["decompress", s(&packed), "--output", s(&out)]).status.success());
    assert!(fs::read(&out).unwrap().is_empty());
}

#[test]
fn corrupt_container_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("t.txt");
    fs::write(&input, b"The quick brown fox jumps over the lazy dog").unwrap();
    let packed = dir.path().join("t.fbar");
    assert!(fbar(&["compress", s(&input), "--output", s(&packed)]).status.success());
    let mut bytes = fs::read(&packed).unwrap();
    bytes[18] ^= 0x01;
    fs::write(&packed, &bytes).unwrap();
    let o = fbar(&["decompress", s(&packed), "--output", s(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
    assert!(!dir.path().join("x").exists());

    let foreign = dir.path().join("foreign");
    fs::write(&foreign, b"PK\x03\x04 not a container").unwrap();
    let o = fbar(&["decompress", s(&foreign)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("magic"));
}

#[test]
fn io_and_flag_errors() {
    let o = fbar(&["compress", "/nonexistent/input"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let o = fbar(&["compress", "x", "--mode", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fbar(&["audit", "x", "--accounting", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fbar(&["audit"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fbar(&["audit", "/nonexistent/corpus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn collisions_report_lists_odd_pairs() {
    let o = fbar(&["audit", "--collisions", "--format", "kv"]);
    assert!(o.status.success());
    assert_eq!(
        kv(&o, "collisions.odd_pairs"),
        "AB,EF,IJ,MN,QR,UV,YZ,ab,ef,ij,mn,qr,uv,yz"
    );
    assert_eq!(kv(&o, "collisions.odd_letters"), "28");
    let o = fbar(&["audit", "--collisions"]);
    assert!(stdout(&o).contains("A      B      odd"));
}

#[test]
fn pure_input_audits_at_two_to_one() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("ff");
    fs::write(&input, vec![0xFF; 1000]).unwrap();
    let o = fbar(&["audit", s(&input), "--format", "kv"]);
    assert!(o.status.success());
    assert_eq!(kv(&o, "aggregate.paper.ratio"), "2:1");
    assert_eq!(kv(&o, "aggregate.honest.ratio"), "2:1");
    assert_eq!(kv(&o, "aggregate.sideband_entries"), "0");
    let o = fbar(&["audit", s(&input), "--format", "kv", "--accounting", "paper"]);
    assert!(!stdout(&o).contains("honest.ratio"));
}

#[test]
fn audit_is_deterministic_and_parseable() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir_all(corpus.join("sub")).unwrap();
    fs::write(corpus.join("a.txt"), "It was the best of times, it was the worst of times.").unwrap();
    fs::write(corpus.join("b.txt"), "Call me Ishmael. Some years ago, never mind how long.").unwrap();
    fs::write(corpus.join("sub/c.txt"), "In a hole in the ground there lived a hobbit.").unwrap();
    let run = |parallel: bool| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_fbar"));
        cmd.args(["audit", s(&corpus), "--format", "kv"]);
        if !parallel {
            cmd.env("FBAR_NO_PARALLEL", "1");
        }
        cmd.output().unwrap()
    };
    let a = run(true);
    let b = run(false);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.lines().all(|l| l.contains('=')));
    assert_eq!(kv(&a, "files"), "3");
    assert_eq!(kv(&a, "aggregate.files"), "3");
    assert!(kv(&a, "file.2.path").ends_with("c.txt"));
    assert_eq!(kv(&a, "file.0.sha256").len(), 64);
    assert_eq!(kv(&a, "claim.perfect_entropy_1_to_1.verdict"), "PASS");
    assert_eq!(kv(&a, "claim.alphabet_28_byte_file.verdict"), "UNVERIFIABLE");
    assert!(text.lines().filter(|l| l.starts_with("check.")).all(|l| l.ends_with("=true")));

    let report = dir.path().join("report.txt");
    let o = fbar(&["audit", s(&corpus), "--output", s(&report)]);
    assert!(o.status.success());
    let table = fs::read_to_string(&report).unwrap();
    assert!(table.contains("honest") && table.contains("paper") && table.contains("claims:"));
}

#[test]
fn export_batch_names() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("a");
    // 'A' = 01 00 00 01: rising pairs at 0 and 3
    fs::write(&input, b"A").unwrap();
    let o = fbar(&["export-batch", s(&input)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "QRAND00 QROR00\nQRAND03 QROR03\n");

    fs::write(&input, [0b1000_0000]).unwrap();
    let batch = dir.path().join("b.bat");
    let o = fbar(&["compress", s(&input), "--export-batch", s(&batch)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&batch).unwrap(), "QLAND00 QLOR00\n");
}
