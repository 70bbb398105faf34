use std::io::Write;
use std::process::{Command, Output};

use cascaded_relay::classifier::{default_classes, sample_class};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascaded-relay"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Parses the CSV body (skipping `#` lines) into a header and numeric rows.
fn table(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    assert!(!text.contains('\r'));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

/// Linear interpolation in log-outage of the 1e-3 crossing.
fn crossing(snr: &[f64], p: &[f64], target: f64) -> f64 {
    let k = p.iter().position(|v| *v < target).unwrap();
    let (a, b) = (p[k - 1].ln(), p[k].ln());
    snr[k - 1] + (target.ln() - a) / (b - a) * (snr[k] - snr[k - 1])
}

#[test]
fn outage_curve_crosses_at_calibration_point() {
    let out = stdout(&run(&[
        "outage", "--scheme", "sdf", "--n", "2", "--relays", "5", "--snr", "0:40:1", "--calibrate", "22.6",
    ]));
    assert!(out.contains("# calibrated gamma_o: "));
    let (header, rows) = table(&out);
    assert_eq!(header, ["snr_db", "p_out_analytic"]);
    assert_eq!(rows.len(), 41);
    let x = crossing(&column(&rows, 0), &column(&rows, 1), 1e-3);
    assert!((x - 22.6).abs() < 0.1, "{x}");
}

#[test]
fn single_rayleigh_baseline_decreases() {
    let (_, rows) = table(&stdout(&run(&["outage", "--relays", "1", "--n", "1", "--snr", "-5:30:1"])));
    let p = column(&rows, 1);
    assert!(p.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn analytic_and_simulated_columns_agree() {
    for scheme in ["sdf", "saf"] {
        let out = stdout(&run(&[
            "outage", "--scheme", scheme, "--n", "2", "--relays", "3", "--snr", "0:20:5", "--mode", "both",
            "--trials", "400000", "--channel", "gamma", "--seed", "3",
        ]));
        let (header, rows) = table(&out);
        assert_eq!(header, ["snr_db", "p_out_analytic", "p_out_mc", "mc_se"]);
        for r in rows {
            assert!((r[1] - r[2]).abs() <= 3.0 * r[3], "{scheme}: {r:?}");
        }
    }
}

#[test]
fn seeded_runs_are_bit_identical() {
    let args = ["outage", "--mode", "mc", "--trials", "100000", "--seed", "77", "--snr", "5:15:5"];
    let a = run(&args);
    let b = run(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("# base_seed: 77\n"));
    let t1 = run(&["table1", "--samples", "5000", "--seed", "4"]);
    let t2 = run(&["table1", "--samples", "5000", "--seed", "4"]);
    assert_eq!(stdout(&t1), stdout(&t2));
}

#[test]
fn diversity_slopes() {
    let slope = |args: &[&str]| {
        let (header, rows) = table(&stdout(&run(args)));
        assert_eq!(header, ["snr_db", "slope"]);
        *column(&rows, 1).last().unwrap()
    };
    let d = slope(&["diversity", "--n", "1", "--relays", "4", "--snr", "50:60:5"]);
    assert!((d - 4.0).abs() <= 0.08 * 4.0, "{d}");
    let d = slope(&["diversity", "--n", "2", "--relays", "2", "--snr", "50:60:5"]);
    assert!((d - 1.6467).abs() <= 0.05 * 1.6467, "{d}");
    let d = slope(&["diversity", "--power-law", "2.5", "--snr", "0:30:10"]);
    assert!((d - 2.5).abs() < 1e-9, "{d}");
}

#[test]
fn power_allocation_table() {
    let out = stdout(&run(&["pa", "--n", "2", "--lambda1", "1", "--lambda2", "1"]));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out.as_bytes());
    let rows: Vec<(String, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    for (method, rho) in &rows {
        assert!((rho - 0.5).abs() < 1e-6, "{method}: {rho}");
    }
    let out = stdout(&run(&["pa", "--n", "2", "--lambda2", "10", "--method", "fixed-point,oracle"]));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out.as_bytes());
    let rho: Vec<f64> = rdr.records().map(|r| r.unwrap()[1].parse().unwrap()).collect();
    assert!((rho[0] - rho[1]).abs() <= 0.02);
}

#[test]
fn distance_sweep_shapes() {
    let curve = |n: &str, sigma: &str| {
        let (_, rows) = table(&stdout(&run(&["distance", "--n", n, "--pathloss", sigma, "--snr", "20"])));
        (column(&rows, 0), column(&rows, 1))
    };
    let (d, p) = curve("2", "3");
    let k = (0..p.len()).min_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
    assert!((d[k] - 0.5).abs() < 0.05 + 1e-9);
    let (_, flat) = curve("2", "0");
    assert!(flat.iter().all(|v| (v - flat[0]).abs() < 1e-15));
    // Curvature at the midpoint in log-outage: larger n gives a flatter bowl.
    let second = |p: &[f64]| {
        let mid = p.len() / 2;
        p[mid - 1].log10() - 2.0 * p[mid].log10() + p[mid + 1].log10()
    };
    let (_, p1) = curve("1", "3");
    let (_, p4) = curve("4", "3");
    assert!(second(&p4) < second(&p1), "{} vs {}", second(&p4), second(&p1));
}

#[test]
fn table1_layout() {
    let out = stdout(&run(&["table1", "--samples", "20000", "--orders", "1,2"]));
    assert!(out.lines().any(|l| l == "n,sigma2,h_0.12,h_0.24,h_0.54,h_0.78,h_1.00,h_1.23"));
    let (_, rows) = table(&out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][1], 0.25);
}

fn write_temp(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn classify_recovers_generating_order() {
    let model = default_classes([2]).unwrap()[0];
    let seq = sample_class(&model, 1000, 12, 0).unwrap();
    let text: Vec<String> = seq.samples().iter().map(|h| h.to_string()).collect();
    let input = write_temp(&text.join("\n"));
    let out = stdout(&run(&["classify", "--input", input.path().to_str().unwrap()]));
    assert!(out.contains("# label: 2\n"));
    let (header, rows) = table(&out);
    assert_eq!(header, ["n", "sigma2", "prior", "log_score", "posterior", "selected"]);
    let chosen: Vec<f64> = rows.iter().filter(|r| r[5] == 1.0).map(|r| r[0]).collect();
    assert_eq!(chosen, [2.0]);
}

#[test]
fn classify_follows_overwhelming_prior() {
    let input = write_temp("0.6\n");
    let priors = write_temp("1,1e-12\n2,1e-12\n3,1\n4,1e-12\n");
    let out = stdout(&run(&[
        "classify", "--input", input.path().to_str().unwrap(), "--priors", priors.path().to_str().unwrap(),
    ]));
    assert!(out.contains("# label: 3\n"));
}

#[test]
fn usage_errors_exit_with_one() {
    let empty = write_temp("# nothing here\n");
    let out = run(&["classify", "--input", empty.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no amplitude samples"));
    for args in [
        &["outage", "--n", "0"][..],
        &["outage", "--snr", "5:1:1"],
        &["outage", "--gamma-o", "2", "--rate", "1"],
        &["bogus"],
        &["pa", "--method", "newton"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_sits_below_flags() {
    let cfg = write_temp("# defaults\nn = 3\nrelays=2\nsnr=10\ngamma_o=2\n");
    let path = cfg.path().to_str().unwrap();
    let from_file = stdout(&run(&["outage", "--config", path]));
    assert!(from_file.contains("# param: n=3\n") && from_file.contains("# param: gamma-o=2\n"));
    let overridden = stdout(&run(&["outage", "--config", path, "--n", "1"]));
    assert!(overridden.contains("# param: n=1\n") && overridden.contains("# param: relays=2\n"));
    let direct = stdout(&run(&["outage", "--n", "1", "--relays", "2", "--snr", "10", "--gamma-o", "2"]));
    assert_eq!(table(&overridden).1, table(&direct).1);
    let bad = write_temp("nonsense-key=1\n");
    assert_eq!(run(&["outage", "--config", bad.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn output_file_receives_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = run(&["outage", "--snr", "0:10:5", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# command: outage\n"));
    assert!(text.contains("# timestamp: 2023-11-14T22:13:20Z\n"));
    assert_eq!(table(&text).1.len(), 3);
}
