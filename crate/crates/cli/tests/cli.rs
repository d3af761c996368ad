use std::path::Path;
use std::process::{Command, Output};

use cgwitness::spheroidal::{crossover_gamma, ENTROPIC_CONSTANT};

fn cgwitness(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgwitness"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulate(dir: &Path, sp: &str, sm: &str, seed: &str) -> (String, String) {
    let out = dir.to_str().unwrap();
    stdout(&cgwitness(&[
        "simulate",
        "--sigma-plus",
        sp,
        "--sigma-minus",
        sm,
        "--seed",
        seed,
        "--total-counts",
        "1e5",
        "--output",
        out,
    ]));
    (
        dir.join("position.txt").to_str().unwrap().to_owned(),
        dir.join("momentum.txt").to_str().unwrap().to_owned(),
    )
}

#[test]
fn bound_table_header_first_row_and_shape() {
    let text = stdout(&cgwitness(&[
        "bound-table",
        "--gamma-max",
        "40",
        "--points",
        "161",
    ]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,C"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (g, c) = l.split_once(',').unwrap();
            (g.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 161);
    assert_eq!(rows[0].0, 0.0);
    assert_eq!(format!("{:.7}", rows[0].1), "0.0585498");
    assert!(rows.windows(2).all(|w| w[1].1 <= w[0].1));
    let first_below = rows.iter().position(|r| r.1 < ENTROPIC_CONSTANT).unwrap();
    let gs = crossover_gamma();
    assert!(rows[first_below - 1].0 <= gs && gs < rows[first_below].0);
}

#[test]
fn bound_table_log_spacing_and_bad_ranges() {
    let text = stdout(&cgwitness(&[
        "bound-table",
        "--gamma-min",
        "0.01",
        "--gamma-max",
        "100",
        "--points",
        "5",
        "--spacing",
        "log",
    ]));
    let gammas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    for (g, e) in gammas.iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
        assert!((g / e - 1.0).abs() < 1e-12);
    }
    for bad in [
        vec!["bound-table", "--gamma-min", "-1"],
        vec!["bound-table", "--gamma-min", "5", "--gamma-max", "1"],
        vec!["bound-table", "--gamma-min", "0", "--spacing", "log"],
        vec!["bound-table", "--points", "1"],
    ] {
        assert_eq!(cgwitness(&bad).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn simulate_then_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (x1, p1) = simulate(&dir.path().join("a"), "15.7", "3.93", "3");
    let (x2, p2) = simulate(&dir.path().join("b"), "15.7", "3.93", "3");
    assert_eq!(std::fs::read(&x1).unwrap(), std::fs::read(&x2).unwrap());
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    let run = |x: &str, p: &str| {
        stdout(&cgwitness(&[
            "sweep",
            "--position",
            x,
            "--momentum",
            p,
            "--errors",
            "on",
            "--replicates",
            "100",
            "--format",
            "json",
        ]))
    };
    assert_eq!(run(&x1, &p1), run(&x2, &p2));
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (x, p) = simulate(dir.path(), "15.7", "3.93", "1");
    let text = stdout(&cgwitness(&[
        "sweep",
        "--position",
        &x,
        "--momentum",
        &p,
        "--n-list",
        "1,3",
        "--m-list",
        "1,3,5",
        "--pairing",
        "pm",
    ]));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        [
            "section",
            "n",
            "m",
            "pairing",
            "witness",
            "delta_x",
            "delta_p",
            "value",
            "uncertainty",
            "detected"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let grid: Vec<_> = rows.iter().filter(|r| &r[0] == "grid").collect();
    let diag: Vec<_> = rows.iter().filter(|r| &r[0] == "diagonal").collect();
    assert_eq!(grid.len(), 2 * 3 * 2);
    assert_eq!(diag.len(), 2 * 2);
    for d in &diag {
        assert_eq!(&d[1], &d[2]);
        assert!(grid.iter().any(|g| g.iter().skip(1).eq(d.iter().skip(1))));
    }
    assert!(rows.iter().all(|r| &r[3] == "pm" && r[8].is_empty()));
}

#[test]
fn separable_sweep_detects_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (x, p) = simulate(dir.path(), "7.87", "7.87", "2");
    let text = stdout(&cgwitness(&["sweep", "--position", &x, "--momentum", &p]));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn sweep_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (x, p) = simulate(dir.path(), "15.7", "3.93", "1");
    // Swapped scans, even factors, unknown witness, missing file.
    for args in [
        vec!["sweep", "--position", &p, "--momentum", &x],
        vec!["sweep", "--position", &x, "--momentum", &p, "--n-list", "2"],
        vec![
            "sweep",
            "--position",
            &x,
            "--momentum",
            &p,
            "--witnesses",
            "nope",
        ],
        vec!["sweep", "--position", "/nonexistent", "--momentum", &p],
    ] {
        assert_eq!(cgwitness(&args).status.code(), Some(2), "{args:?}");
    }
    // A different geometry in one file.
    let text = std::fs::read_to_string(&p)
        .unwrap()
        .replace("# f3_mm=250", "# f3_mm=300");
    let p2 = dir.path().join("p2.txt");
    std::fs::write(&p2, text).unwrap();
    let o = cgwitness(&[
        "sweep",
        "--position",
        &x,
        "--momentum",
        p2.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("geometr"));
}

#[test]
fn failed_propagation_exits_with_numerical_code() {
    let dir = tempfile::tempdir().unwrap();
    let header = |pair: &str| {
        format!(
            "# variable_pair={pair}\n# step_mm=0.05\n# f1_mm=50\n# f2_mm=200\n# f3_mm=250\n\
             # lambda_mm=0.00065\n# s_x_mm=0.05\n# s_p_mm=0.02\n# micrometer_step_mm=0.01\n"
        )
    };
    let x = dir.path().join("x.txt");
    let p = dir.path().join("p.txt");
    // A single count: about a third of the Poisson replicates are empty.
    std::fs::write(&x, header("position") + "1\n").unwrap();
    std::fs::write(&p, header("momentum") + "1000\n").unwrap();
    let o = cgwitness(&[
        "sweep",
        "--position",
        x.to_str().unwrap(),
        "--momentum",
        p.to_str().unwrap(),
        "--errors",
        "on",
        "--replicates",
        "100",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn false_positive_demo() {
    let text = stdout(&cgwitness(&[
        "demo-false-positive",
        "--total-counts",
        "1e5",
    ]));
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let value: f64 = r[2].parse().unwrap();
        if r[1] == "naive_discrete" {
            assert!(value < 0.0 && r[3] == "true" && r[4] == "true");
        } else {
            assert!(value >= 0.0 && r[3] == "false" && r[4] == "false");
        }
    }
    let fine = stdout(&cgwitness(&[
        "demo-false-positive",
        "--multiplier",
        "0.1",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&fine).unwrap();
    for r in v.as_array().unwrap() {
        assert!(r["value"].as_f64().unwrap() >= 0.0, "{r}");
    }
    let o = cgwitness(&["demo-false-positive", "--sigma", "1", "--sigma-minus", "2"]);
    assert_eq!(o.status.code(), Some(2));
}
