use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rss-mpl"))
}

fn run(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("spawn rss-mpl");
    assert!(
        out.status.success(),
        "rss-mpl {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn exact_mpl_csv() {
    let out = run(&["exact-mpl", "--dist", "exp1", "--grid", "0.25:0.75:0.25"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "q,t,K");
    assert_eq!(lines.len(), 4);
    let cols: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols[0], 0.5);
    assert!((cols[1] - 2f64.ln()).abs() < 1e-15);
    assert!((cols[2] - 0.386_294_361_119_890_6).abs() < 1e-9);
}

#[test]
fn exact_are_csv() {
    let out = run(&["exact-are", "--dist", "weibull(4,3)", "--model", "neighbor", "--p", "0.5", "--k", "3", "--grid", "0.1:0.9:0.4"]);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "dist,model,p,k,q,t,avar_srs,avar_rss,are");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(row.starts_with("\"weibull(4,3)\",neighbor,0.5,3,"), "{row}");
        let are: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(are >= 1.0);
    }
}

#[test]
fn simulate_re_is_thread_count_independent() {
    let args = |threads: &'static str| {
        vec![
            "simulate-re", "--dist", "rbeta", "--model", "random", "--p", "0.8", "--n", "15", "--k", "5",
            "--reps", "4000", "--seed", "42", "--batches", "20", "--threads", threads,
        ]
    };
    let one = run(&args("1"));
    let again = run(&args("1"));
    let eight = run(&args("8"));
    assert_eq!(one, again);
    assert_eq!(one, eight);
    let header = one.lines().next().unwrap();
    assert_eq!(header, "q,t,k_exact,mse_srs,mse_rss,re,re_stderr,zero_frac_srs,zero_frac_rss");
    assert_eq!(one.lines().count(), 20);
}

#[test]
fn simulate_re_rejects_bad_config() {
    let out = bin()
        .args(["simulate-re", "--dist", "exp1", "--n", "16", "--k", "3", "--reps", "10"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("multiple of k"));
}

#[test]
fn estimate_reads_rss_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    std::fs::copy(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/hiv_sample.csv"), &data).unwrap();
    let out = run(&["estimate", "--in", data.to_str().unwrap(), "--t-grid", "100:300:3", "--alpha", "0.05"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "t,estimate,count,variance,ci_lower,ci_upper");
    assert_eq!(lines[1], "100,0,0,,,");
    assert!(lines[2].starts_with("200,39.8,5,74.7274666666666"), "{}", lines[2]);
    assert!(lines[3].starts_with("300,71,"), "{}", lines[3]);
}

#[test]
fn hiv_demo_fixture_matches_bundled_files() {
    let dir = tempfile::tempdir().unwrap();
    run(&["hiv-demo", "--out", dir.path().to_str().unwrap()]);
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    for name in ["hiv_sample.csv", "hiv_estimate.csv"] {
        let got = std::fs::read(dir.path().join(name)).unwrap();
        let want = std::fs::read(fixtures.join(name)).unwrap();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn hiv_demo_seeded_writes_integer_sample() {
    let dir = tempfile::tempdir().unwrap();
    run(&["hiv-demo", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    let text = std::fs::read_to_string(dir.path().join("hiv_sample.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 30);
    for row in rows {
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v >= 1.0 && v.fract() == 0.0);
    }
}

#[test]
fn unknown_distribution_is_reported() {
    let out = bin().args(["exact-mpl", "--dist", "cauchy"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown distribution"));
}
