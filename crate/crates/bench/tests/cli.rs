use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pbpqlp_bench::pgm::write_pgm;
use pbpqlp_core::DenseMatrix;

fn pbpqlp(args: &[&str], env_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pbpqlp"));
    cmd.args(args).env_remove("PBPQLP_OUT_DIR");
    if let Some(d) = env_dir {
        cmd.env("PBPQLP_OUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(pbpqlp(&["lowrank", "--n", "40", "--d", "5"], None).status.code(), Some(0));
    assert_eq!(pbpqlp(&["lowrank", "--frobnicate"], None).status.code(), Some(2));
    assert_eq!(pbpqlp(&["lowrank", "--alg", "qr_magic"], None).status.code(), Some(2));
    assert_eq!(pbpqlp(&["lowrank", "--n", "40", "--d", "41"], None).status.code(), Some(2));
    assert_eq!(pbpqlp(&["spectrum", "--n", "3000"], None).status.code(), Some(4));
    assert_eq!(pbpqlp(&["spectrum", "--n", "600", "--mem-cap", "1M"], None).status.code(), Some(4));
    let o = pbpqlp(&["image", "--matrix", "image:path=/definitely/missing.pgm", "--out", "/tmp/unused.dsv"], None);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(pbpqlp(&["--version"], None).status.code(), Some(0));
}

#[test]
fn verify_bounds_exit_status_follows_violations() {
    let ok = pbpqlp(
        &["verify-bounds", "--matrix", "lowrank:k=5,mu=0", "--n", "60", "--k", "5", "--d", "8", "--p", "2", "--q", "0", "--trials", "10"],
        None,
    );
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let text = stdout(&ok);
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        lines[0],
        "theorem\tlhs\trhs\tslack\tsatisfied\tseed\tn1\tn2\tk\td\tp\tq\tkind\tmatrix"
    );
    for l in &lines[1..] {
        let f: Vec<&str> = l.split('\t').collect();
        if f[12] == "hard" {
            assert_eq!(f[4], "true", "{l}");
            assert!(f[3].parse::<f64>().unwrap() >= 0.0, "{l}");
        }
    }

    let bad = pbpqlp(
        &["verify-bounds", "--n", "120", "--q", "1", "--trials", "2", "--corrupt-l"],
        None,
    );
    assert_eq!(bad.status.code(), Some(1));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains("bound violated: MS.L22"), "{err}");
}

#[test]
fn output_is_deterministic_with_header() {
    let args = ["spectrum", "--matrix", "stairs:len=5", "--n", "80", "--d", "12", "--q", "1", "--seed", "9"];
    let a = pbpqlp(&args, None);
    let b = pbpqlp(&args, None);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with(&format!("# pbpqlp {} spectrum ", env!("CARGO_PKG_VERSION"))), "{first}");
    assert!(first.contains("seed=9") && first.contains("matrix=stairs:len=5"), "{first}");
    assert!(text.lines().nth(1).unwrap().starts_with("experiment\tmatrix\talgorithm"));
}

#[test]
fn config_file_and_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small\nmatrix = fast\nn = 50\nd = 4,8\nq = 0\nalg = svd\n").unwrap();
    let o = pbpqlp(&["lowrank", "--config", cfg.to_str().unwrap(), "--d", "6"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("lowrank.dsv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("lowrank\tfast\tsvd\t50\t50\t6\t"), "{}", rows[0]);

    fs::write(&cfg, "matrix = fast\ncolour = blue\n").unwrap();
    let o = pbpqlp(&["lowrank", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn image_writes_reconstructions() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("grad.pgm");
    let m = DenseMatrix::from_fn(24, 32, |i, j| ((i * j) % 17) as f64 / 16.0).unwrap();
    write_pgm(&img, &m).unwrap();
    let before = fs::read(&img).unwrap();
    let spec = format!("image:path={}", img.display());
    let out = dir.path().join("res/image.csv");
    let o = pbpqlp(
        &["image", "--matrix", &spec, "--d", "24", "--alg", "svd", "--format", "csv", "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("res/grad.svd.q0.r24.pgm").exists());
    let table = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = table.lines().nth(2).unwrap().split(',').collect();
    let frob: f64 = row[9].parse().unwrap();
    assert!(frob <= (24.0f64 * 32.0).sqrt() / 255.0, "{frob}");
    assert_eq!(fs::read(&img).unwrap(), before);
    assert_eq!(pbpqlp(&["image", "--matrix", &spec], None).status.code(), Some(2));
}
