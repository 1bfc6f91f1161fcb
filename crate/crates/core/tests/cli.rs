use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const PARAMS: &str = r#"
[params]
b = 1000.0
delta_b = -100.0
j0 = 20.0
j1 = 20.0
omega = 200.0
"#;

fn xgate(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xgate"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{PARAMS}{body}")).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TRACE: &str = r#"
[trace]
t_end = 0.4
points = 201

[[trace.series]]
family = "iswap_plus"

[[trace.series]]
family = "cz_nres_plus"
label = "nres_270"
omega = 270.0
"#;

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TRACE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = xgate(
            &[
                "fidelity-trace",
                "--config",
                &cfg,
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);

    // worker count does not change the output
    let o = Command::new(env!("CARGO_BIN_EXE_xgate"))
        .args(["fidelity-trace", "--config", &cfg])
        .env("XGATE_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(o.stdout, a);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time_us,iswap_plus,nres_270"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[2], "0.6");
    assert_eq!(text.lines().count(), 202);
    assert!(text.ends_with('\n'));
    assert!(text.lines().last().unwrap().starts_with("0.4,"));
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let out_s = out.to_str().unwrap();

    let cases = [
        // drive amplitude above J0
        format!(
            "{}\n[evolve]\nt_end = 0.1\n",
            PARAMS.replace("j1 = 20.0", "j1 = 30.0")
        ),
        // missing time
        format!("{PARAMS}\n[evolve]\nframe = \"lab\"\n"),
        // unknown key
        format!("{PARAMS}\n[evolve]\nt_end = 0.1\nstep = 3\n"),
        // not TOML
        "this is = = not toml".to_string(),
    ];
    for body in cases {
        let cfg = dir.path().join("bad.toml");
        fs::write(&cfg, &body).unwrap();
        let o = xgate(
            &["evolve", "--config", cfg.to_str().unwrap(), "--out", out_s],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(2), "{body}\n{}", stderr(&o));
        assert!(stderr(&o).contains("error"), "{}", stderr(&o));
        assert!(!out.exists(), "{body}");
    }

    let cfg = write_config(
        dir.path(),
        "[noise]\nratios = [0.0]\n[[noise.recipe]]\nfamily = \"cz_res_minus\"\nn = 5\nm = 2\n",
    );
    let o = xgate(
        &[
            "noise-sweep",
            "--config",
            &cfg,
            "--out",
            out_s,
            "--quad-order",
            "40",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = xgate(&["evolve", "--out", out_s], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = xgate(
        &[
            "reproduce",
            "fig9",
            "--out",
            dir.path().join("r").to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_ne!(o.status.code(), Some(0));
    assert!(!dir.path().join("r").exists());
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = Command::new(env!("CARGO_BIN_EXE_xgate"))
        .args(["solve-gates", "--config", &cfg])
        .env("XGATE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("XGATE_THREADS"));
}

#[test]
fn solve_gates_lists_shortest_recipes_first() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solve]\nfilter = \"any\"\n");
    let o = xgate(&["solve-gates", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    let cz = rows.iter().find(|r| r[0].starts_with("cz_res")).unwrap();
    assert_eq!(&cz[..5], ["cz_res_minus", "5", "2", "0.785398163397", "16"]);
    let iswap = rows.iter().find(|r| r[0].starts_with("iswap")).unwrap();
    assert_eq!(
        &iswap[..5],
        ["iswap_plus", "2", "1", "0.314159265359", "20"]
    );
    assert!(rows.iter().all(|r| r[4].parse::<f64>().unwrap() <= 20.0));
}

#[test]
fn noise_sweep_zero_row_is_noiseless() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[noise]
ratios = [0.0, 0.1]
evolution = "analytic"

[[noise.recipe]]
family = "cz_res_minus"
n = 5
m = 2

[[noise.recipe]]
family = "cz_nres_plus"
label = "cz_const"
j1 = 0.0
omega = 270.0
n = 0
"#,
    );
    let out = dir.path().join("noise.csv");
    let o = xgate(
        &[
            "noise-sweep",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--check-convergence",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma_over_J0,cz_res_minus,cz_const"));
    // the closed forms are exact at their own gate times
    assert_eq!(lines.next(), Some("0,1,1"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let decay = |tau: f64| (3.0 + 2.0 * (-(2.0 * tau).powi(2) / 8.0).exp()) / 5.0;
    assert!((row[1] - decay(std::f64::consts::FRAC_PI_4)).abs() < 1e-6);
    assert!((row[2] - decay(std::f64::consts::PI / 20.0)).abs() < 1e-4);
}

#[test]
fn evolve_writes_sixteen_entries_and_checks_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[evolve]\nt_end = 0.1\nframe = \"rotating\"\n");
    let o = xgate(
        &["evolve", "--config", &cfg, "--check-convergence"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 17);
    let mut norm = 0.0;
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        norm += v[2] * v[2] + v[3] * v[3];
    }
    assert!((norm - 4.0).abs() < 1e-9);

    // far too few steps: the doubling check fails, exit 1 and no file
    let out = dir.path().join("u.csv");
    let o = xgate(
        &[
            "evolve",
            "--config",
            &cfg,
            "--steps",
            "3",
            "--check-convergence",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("converge"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn far_detuned_family_on_resonance_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[trace]\nt_end = 0.05\npoints = 3\n[[trace.series]]\nfamily = \"cz_nres_plus\"\n",
    );
    let o = xgate(&["fidelity-trace", "--config", &cfg], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning"), "{}", stderr(&o));
}

#[test]
fn reproduce_fig2_writes_stamped_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("repro");
    let o = xgate(
        &["reproduce", "fig2", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "fig2_fidelity_trace.csv",
        "fig2_gate_recipes.csv",
        "fig2_peaks.csv",
        "fig2_manifest.toml",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: toml::Table = fs::read_to_string(out.join("fig2_manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    let params = manifest["params"].as_table().unwrap();
    assert_eq!(params["b"].as_float(), Some(1000.0));
    assert_eq!(params["delta_b"].as_float(), Some(-100.0));
    assert_eq!(params["j0"].as_float(), Some(20.0));
    let series = manifest["series"].as_array().unwrap();
    let j1: Vec<f64> = series
        .iter()
        .map(|s| s["params"]["j1"].as_float().unwrap())
        .collect();
    assert!((j1[0] - 80.0 / 7.0).abs() < 1e-12);
    assert_eq!(&j1[1..], [16.0, 20.0, 10.0]);
    let trace = fs::read_to_string(out.join("fig2_fidelity_trace.csv")).unwrap();
    assert_eq!(
        trace.lines().next(),
        Some("time_us,cz_res_plus,cz_res_minus,iswap_plus,iswap_minus")
    );
    assert_eq!(trace.lines().count(), 2001);
}

#[test]
fn reproduce_fig3_manifest_records_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let o = xgate(&["reproduce", "fig3", "--out", "."], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: toml::Table = fs::read_to_string(dir.path().join("fig3_manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    let omegas: Vec<f64> = manifest["params"]["omega"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_float().unwrap())
        .collect();
    assert_eq!(omegas, [270.0, 400.0]);
    let series = manifest["series"].as_array().unwrap();
    assert!(series
        .iter()
        .any(|s| s["params"]["j1"].as_float() == Some(0.0)));
    let times = fs::read_to_string(dir.path().join("fig3_gate_times.csv")).unwrap();
    let konst: Vec<f64> = times
        .lines()
        .filter(|l| l.contains("_const"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let mut want: Vec<f64> = (0..3)
        .map(|n| (2 * n + 1) as f64 * std::f64::consts::PI / 20.0)
        .collect();
    let mut got = konst.clone();
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    assert_eq!(got.len(), 3);
    assert!(got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-11));
}
