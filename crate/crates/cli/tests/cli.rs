use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use trijunction::io::Scenario;
use trijunction::metric::hausdorff;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn trijunction(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trijunction")).args(args).output().unwrap()
}

fn run_in(sub: &str, name: &str, out: &Path, extra: &[&str]) -> Output {
    let s = scenario(name);
    let mut args = vec![sub, "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    trijunction(&args)
}

/// Header row and data rows of a table, without the `#` lines.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let i = table[0].iter().position(|c| c == name).unwrap();
    table[1..].iter().map(|r| r[i].clone()).collect()
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

#[test]
fn static_y_exits_cleanly_without_length_change() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("simulate", "y-static", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = rows(&dir.path().join("summary.tsv"));
    assert_eq!(column(&t, "status"), ["completed"]);
    let dl: f64 = column(&t, "length_change")[0].parse().unwrap();
    assert!(dl.abs() < 1e-12, "{dl}");
    let d = rows(&dir.path().join("diagnostics.tsv"));
    assert_eq!(d[0], ["t", "total_length", "sup_curvature", "min_junction_distance", "min_spacing", "angle_deviation"]);
}

#[test]
fn lens_exits_with_junction_collision() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("simulate", "lens", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(11));
    let t = rows(&dir.path().join("summary.tsv"));
    assert_eq!(column(&t, "stop"), ["junction-collision"]);
}

#[test]
fn circle_exits_with_edge_collapse_near_half() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("simulate", "circle", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(13));
    let t = rows(&dir.path().join("summary.tsv"));
    let at: f64 = column(&t, "t")[0].parse().unwrap();
    assert!((at - 0.5).abs() < 5e-3, "{at}");
}

#[test]
fn multiplicity_finds_the_vanishing_segment() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("multiplicity", "two-circles", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("vanishing: e2"));
    let report = std::fs::read_to_string(dir.path().join("multiplicity.tsv")).unwrap();
    assert!(report.contains("# cycle-check: pass") && report.contains("# vanishing: e2"));
    let reduced = Scenario::load(&dir.path().join("reduced.toml")).unwrap().network().unwrap();
    assert_eq!(reduced.edges.len(), 2);
}

#[test]
fn translated_segment_slices_equal_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("translate", "segment-translate", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let input = Scenario::load(&scenario("segment-translate")).unwrap().network().unwrap();
    let slices = files(&dir.path().join("slices"));
    assert_eq!(slices.len(), 3);
    for s in slices {
        let sc = Scenario::load(&s).unwrap();
        assert!(sc.t.is_some());
        assert!(hausdorff(&sc.network().unwrap(), &input) < 1e-12);
    }
}

#[test]
fn analyze_reports_triple_and_line_densities() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("analyze", "y-analyze", dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let t = rows(&dir.path().join("density.tsv"));
    let ratios: Vec<f64> = column(&t, "ratio").iter().map(|r| r.parse().unwrap()).collect();
    let centres = column(&t, "centre");
    for (c, r) in centres.iter().zip(&ratios) {
        let want = if c == "0" { 1.5 } else { 1.0 };
        assert!((r - want).abs() < 1e-6, "centre {c}: {r}");
    }
}

#[test]
fn missing_history_is_reported_per_centre() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in("analyze", "circle-analyze", dir.path(), &["--target-h", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    let t = rows(&dir.path().join("density-summary.tsv"));
    assert_eq!(column(&t, "status"), ["ok"]);
    // a centre after extinction needs slices the stopped run never reached
    let text = std::fs::read_to_string(scenario("circle-analyze"))
        .unwrap()
        .replace("centres = [[0.0, 0.0, 0.5]]", "centres = [[0.0, 0.0, 0.5], [0.0, 0.0, 0.9]]");
    let s = dir.path().join("late.toml");
    std::fs::write(&s, text).unwrap();
    let o = trijunction(&["analyze", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let t = rows(&dir.path().join("density-summary.tsv"));
    let status = column(&t, "status");
    assert_eq!(status[0], "ok");
    assert!(status[1].contains("history"), "{status:?}");
}

#[test]
fn flags_override_the_scenario_and_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        "simulate",
        "lens",
        dir.path(),
        &["--seed", "42", "--snapshots", "0.01,0.02", "--cfl", "0.1", "--zeta", "1.515"],
    );
    assert_eq!(o.status.code(), Some(11));
    let text = std::fs::read_to_string(dir.path().join("diagnostics.tsv")).unwrap();
    for line in ["# seed = 42", "# snapshots = [0.01, 0.02]", "# flow.cfl = 0.1", "# monitors.zeta = 1.515"] {
        assert!(text.lines().any(|l| l == line), "missing {line}");
    }
    // initial, two requested, final
    assert_eq!(files(&dir.path().join("snapshots")).len(), 4);
}

#[test]
fn malformed_scenarios_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("bad.toml");
    let good = std::fs::read_to_string(scenario("y-static")).unwrap();
    std::fs::write(&s, good.replace("[flow]", "[flow]\nstep_size = 0.1")).unwrap();
    let o = trijunction(&["simulate", "--scenario", s.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("step_size") && err.contains("line"), "{err}");

    let o = run_in("simulate", "y-static", dir.path(), &["--zeta", "1.6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zeta"));

    let o = trijunction(&["simulate", "--scenario", "/nonexistent/s.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/s.toml"));
}

#[test]
fn outputs_are_deterministic_and_carry_a_header() {
    let runs: Vec<(&str, &str)> = vec![
        ("simulate", "lens"),
        ("translate", "curved-triod-translate"),
        ("regularize", "triod-regularize"),
        ("convergence", "curved-triod-convergence"),
        ("analyze", "circle-analyze"),
        ("multiplicity", "two-circles"),
    ];
    for (sub, name) in runs {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let oa = run_in(sub, name, a.path(), &[]);
        let ob = run_in(sub, name, b.path(), &[]);
        assert_eq!(oa.status.code(), ob.status.code());
        assert_eq!(oa.stdout, ob.stdout);
        let fa = files(a.path());
        let fb = files(b.path());
        assert_eq!(fa.len(), fb.len());
        assert!(!fa.is_empty());
        for (x, y) in fa.iter().zip(&fb) {
            let bx = std::fs::read(x).unwrap();
            assert_eq!(bx, std::fs::read(y).unwrap(), "{sub}: {} differs", x.display());
            let text = String::from_utf8(bx).unwrap();
            assert!(text.starts_with("# format = trijunction/"), "{}", x.display());
            assert!(text.contains("\n# seed = 0\n"), "{}", x.display());
            assert!(!text.contains('\r'));
        }
    }
}
