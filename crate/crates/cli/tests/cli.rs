use std::process::{Command, Output};

fn jespace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jespace")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn classify_exit_codes() {
    let out = jespace(&["classify", "--law", "builtin:gravitational:k=1", "--J", "1", "--E", "-0.5"]);
    assert_eq!(code(&out), 2);
    let text = stdout(&out);
    let s: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("uniform rotation witness: s = "))
        .expect("witness line")
        .parse()
        .unwrap();
    assert!((s - 1.0).abs() <= 1e-8);

    assert_eq!(code(&jespace(&["classify", "--law", "builtin:zero", "--J", "0", "--E", "0"])), 2);
    assert_eq!(code(&jespace(&["classify", "--law", "expr:-k/r:k=1", "--J", "1", "--E", "-0.6"])), 1);
    assert_eq!(code(&jespace(&["classify", "--law", "builtin:gravitational:k=1", "--J", "1", "--E", "-0.6"])), 1);
    assert_eq!(code(&jespace(&["classify", "--law", "builtin:hooke:k=1", "--J", "1", "--E", "2"])), 0);
}

#[test]
fn both_routes() {
    for (e, want) in [("-0.6", 1), ("-0.4", 0)] {
        let out = jespace(&["classify", "--law", "builtin:gravitational:k=1", "--J", "1", "--E", e, "--route", "both"]);
        assert_eq!(code(&out), want, "{}", stdout(&out));
        assert!(stdout(&out).contains("route W"));
    }
    let out = jespace(&["classify", "--law", "builtin:hooke:k=1", "--J", "1", "--E", "1.5", "--route", "W"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&jespace(&["classify", "--law", "builtin:gravitational:k=1", "--J", "1"])), 64);
    assert_eq!(code(&jespace(&["classify", "--law", "builtin:nope", "--J", "1", "--E", "0"])), 64);
    assert_eq!(code(&jespace(&["classify", "--law", "expr:r^x", "--J", "1", "--E", "0"])), 64);
    assert_eq!(code(&jespace(&["frobnicate"])), 64);
    assert_eq!(code(&jespace(&[])), 64);
    assert_eq!(code(&jespace(&["--help"])), 0);
}

#[test]
fn engine_errors_exit_3() {
    // ln(r - 2) is undefined on most of the bracket.
    let out = jespace(&["classify", "--law", "expr:ln(r-2)", "--J", "1", "--E", "0"]);
    assert_eq!(code(&out), 3);
    let out = jespace(&["simulate", "--law", "builtin:gravitational:k=1", "--r0", "1", "--J", "0", "--t-end", "5"]);
    assert_eq!(code(&out), 3, "radial infall collapses");
}

#[test]
fn full_plane_verdicts() {
    assert_eq!(stdout(&jespace(&["full-plane", "--law", "builtin:power:k=1,n=2"])).trim(), "entire-plane");
    assert_eq!(stdout(&jespace(&["full-plane", "--law", "expr:q*sin(1/r):q=1"])).trim(), "undecidable");
    assert_eq!(stdout(&jespace(&["full-plane", "--law", "builtin:hooke:k=1"])).trim(), "not-entire-plane");
    let tagged = jespace(&["full-plane", "--law", "expr:-k*r^3:k=1,asym0=0,asymInf=-inf"]);
    assert_eq!(stdout(&tagged).trim(), "entire-plane");
}

#[test]
fn radii_of_the_oscillatory_law() {
    let out = jespace(&["radii", "--law", "builtin:oscillatory:q=1", "--bracket", "0.01:1"]);
    assert_eq!(code(&out), 0);
    let pairs: Vec<(f64, f64)> = stdout(&out)
        .lines()
        .map(|l| {
            let (a, b) = l.split_once(' ').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let pi = std::f64::consts::PI;
    let n = pairs.len();
    let outer = [pairs[n - 2].0, pairs[n - 2].1, pairs[n - 1].0, pairs[n - 1].1];
    let want = [2.0 / (7.0 * pi), 2.0 / (5.0 * pi), 2.0 / (3.0 * pi), 2.0 / pi];
    for (a, b) in outer.iter().zip(want) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

#[test]
fn scan_files_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str, threads: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let pgm = dir.path().join(format!("{tag}.pgm"));
        let out = jespace(&[
            "scan",
            "--law",
            "builtin:gravitational:k=1",
            "--J-range",
            "-2:2:21",
            "--E-range",
            "-2:1:16",
            "--out",
            csv.to_str().unwrap(),
            "--pgm",
            pgm.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(code(&out), 0);
        (std::fs::read(csv).unwrap(), std::fs::read(pgm).unwrap())
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(a, b);
    let csv = String::from_utf8(a.0).unwrap();
    assert_eq!(csv.lines().next(), Some("J,E,member,boundary,ur,margin"));
    assert_eq!(csv.lines().count(), 21 * 16 + 1);
    assert!(a.1.starts_with(b"P2\n21 16\n255\n"));
}

#[test]
fn ur_curve_csv() {
    let out = jespace(&["ur-curve", "--law", "builtin:gravitational:k=1", "--s-range", "0.5:2:4"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,J,E,omega"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        // J^2 = k s, E = -k / (2 s), omega = J / s^2.
        assert!((v[1] * v[1] - v[0]).abs() < 1e-12);
        assert!((v[2] + 0.5 / v[0]).abs() < 1e-12);
        assert!((v[3] - v[1] / (v[0] * v[0])).abs() < 1e-12);
    }
}

#[test]
fn simulate_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orbit.csv");
    let out = jespace(&[
        "simulate", "--law", "builtin:gravitational:k=1", "--r0", "2", "--rdot0", "0", "--J", "1", "--t-end", "1",
        "--dt", "0.01", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("E0 = -0.375"));
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().next(), Some("t,r,r_dot,phi,J_resid,E_resid"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn oracle_checks() {
    for args in [["--law-case", "4.2", "--k", "1"], ["--law-case", "4.5", "--k", "1"]] {
        let mut full = vec!["check"];
        full.extend(args);
        let out = jespace(&full);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert!(stdout(&out).contains("disagreements: 0"));
    }
    let out = jespace(&["check", "--law-case", "4.8", "--q", "1", "--J-range", "-3:3:11", "--E-range", "-3:3:11"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("boundary-band cells:"));
    assert_eq!(code(&jespace(&["check", "--law-case", "4.2"])), 3, "missing --k");
}

#[test]
fn show_config_lists_defaults() {
    let out = jespace(&["--show-config"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for key in ["bracket = 1e-6:1e6", "grid = 2048", "rel_tol = 1e-9"] {
        assert!(text.contains(key), "{text}");
    }
}
