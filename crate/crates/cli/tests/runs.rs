use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cuspforge_cli::ResultLine;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn result(&self) -> ResultLine {
        let last = self.stdout.lines().last().expect("no output");
        last.parse().unwrap_or_else(|e| panic!("{e}: {last}"))
    }

    fn metric(&self, key: &str) -> f64 {
        self.result().get(key).unwrap_or_else(|| panic!("no {key}")).parse().unwrap()
    }
}

fn cuspforge(args: &[&str], config: Option<&str>, out: &Path, env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cuspforge"));
    cmd.args(args).arg("--out").arg(out).env_remove("CUSPFORGE_MU1");
    for (k, v) in env {
        cmd.env(k, v);
    }
    if let Some(text) = config {
        let path = out.with_extension("conf");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    Run {
        code: status.code().unwrap(),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn cusp_csv_accumulates_the_volume() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("cusp");
    let r = cuspforge(&["cusp"], Some("[cusp]\nprofile = exp\nn = 3\na = 0\n"), &out, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = read(&out, "cusp.csv");
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,K_radial,K_tangential,cumulative_volume"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 1001);
    let last = rows.last().unwrap();
    assert!((last[3] - 0.5).abs() <= 1e-8, "{}", last[3]);
    // f = e^{-t}: K_radial = -1, K_tangential = -(e^{2t} + 1)
    for row in &rows {
        assert!((row[1] + 1.0).abs() < 1e-12);
        let want = -((2.0 * row[0]).exp() + 1.0);
        assert!(((row[2] - want) / want).abs() < 1e-12);
    }
    assert!(rows.windows(2).all(|w| w[1][3] >= w[0][3]));
    assert_eq!(r.result().to_string(), r.stdout.lines().last().unwrap());
    assert!(r.result().pass);
    assert_eq!(r.metric("volume"), 0.5);
    assert!(read(&out, "volume.csv").starts_with("segment,lo,hi,contribution,cumulative\n"));
}

#[test]
fn constant_schedule_on_the_tree_diverges() {
    let tmp = TempDir::new().unwrap();
    let r = cuspforge(
        &["assemble"],
        Some("[assemble]\ngraph = trivalent-tree\nschedule = constant\n"),
        &tmp.path().join("a"),
        &[],
    );
    assert_eq!(r.code, 2, "{}", r.stderr);
    let line = r.stdout.lines().last().unwrap();
    assert!(line.starts_with("RESULT assemble fail divergent-volume"), "{line}");
}

#[test]
fn default_assemblies_pass() {
    let tmp = TempDir::new().unwrap();
    // on the trees the 2^-k and 3^-k scales make the scaled diameters summable, so
    // completeness needs the unit-diameter truncations
    for (graph, unit) in [("line", false), ("chord", false), ("trivalent-tree", true), ("f2-cayley", true)] {
        let out = tmp.path().join(graph);
        let conf = format!("[assemble]\ngraph = {graph}\nunit_diameter = {unit}\n");
        let r = cuspforge(&["assemble"], Some(&conf), &out, &[]);
        assert_eq!(r.code, 0, "{graph}: {}", r.stdout);
        assert!(r.metric("max_matching_error") <= 1e-12);
        let edges = read(&out, "edges.csv");
        assert!(edges.lines().count() > 1);
    }
    let r = cuspforge(&["assemble"], Some("[assemble]\ngraph = trivalent-tree\n"), &tmp.path().join("t"), &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.result().tag.as_deref(), Some("incomplete"));
}

#[test]
fn infeasible_budget_exits_two() {
    let tmp = TempDir::new().unwrap();
    let r = cuspforge(&["plan-growth"], Some("[plan-growth]\nbudget = const:0.5\n"), &tmp.path().join("p"), &[]);
    assert_eq!(r.code, 2);
    assert_eq!(r.result().tag.as_deref(), Some("budget-infeasible"));
    assert!(r.metric("curvature") >= r.metric("budget"));
}

#[test]
fn growth_plan_serializes_to_config_syntax() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("p");
    let r = cuspforge(&["plan-growth"], None, &out, &[("CUSPFORGE_MU1", "0.1")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.metric("worst_margin") > 0.0);
    assert!(r.metric("mu_b") > 0.0);
    let conf = read(&out, "plan.conf");
    for line in conf.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let section = line.starts_with('[') && line.ends_with(']');
        let pair = line.split_once(" = ").is_some_and(|(k, v)| !k.is_empty() && !v.is_empty());
        assert!(section || pair, "{line}");
    }
    assert_eq!(conf.matches("[edge.").count(), 5);
    let envelope = read(&out, "envelope.csv");
    for row in envelope.lines().skip(1) {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] < v[2], "{row}");
    }
}

#[test]
fn margulis_constant_must_be_numeric() {
    let tmp = TempDir::new().unwrap();
    let r = cuspforge(&["plan-growth"], None, &tmp.path().join("p"), &[("CUSPFORGE_MU1", "lots")]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("CUSPFORGE_MU1"), "{}", r.stderr);
    assert_eq!(r.result().tag.as_deref(), Some("error"));
}

#[test]
fn invisibility_defaults_stay_within_the_curvature_bound() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("inv");
    let r = cuspforge(&["invisibility"], None, &out, &[]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.metric("max_abs_integral") <= 0.098696);
    assert!(r.metric("min_far_sum") >= r.metric("bound") - 1e-3);
    let svg = read(&out, "invisibility.svg");
    assert!(svg.contains(r#"viewBox="0 0 800 600""#));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(read(&out, "invisibility.csv").lines().count(), 4);
}

#[test]
fn config_errors_exit_one_and_list_everything() {
    let tmp = TempDir::new().unwrap();
    let r = cuspforge(&["cusp"], Some("tol = 1\n[cusp]\nwidth = 3\n"), &tmp.path().join("c"), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("2 config errors"), "{}", r.stderr);
    assert!(r.stderr.contains("[1e-12, 1e-4]"));
    assert!(r.stderr.contains("cusp.width"));
    assert_eq!(r.stdout.lines().last().unwrap(), "RESULT cusp fail config errors=2");
    assert!(!tmp.path().join("c").exists());

    let r = cuspforge(&["cusp", "--tol", "1"], None, &tmp.path().join("c"), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("--tol"));

    let r = cuspforge(&["smooth"], Some("subcommand = cusp\n"), &tmp.path().join("c"), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("run.subcommand"));
}

#[test]
fn runtime_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let r = cuspforge(&["cusp"], Some("[cusp]\nprofile = file:/nonexistent/profile.txt\n"), &tmp.path().join("c"), &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("cannot read profile"), "{}", r.stderr);
    assert_eq!(r.stdout.lines().last().unwrap(), "RESULT cusp fail error");
}

#[test]
fn profile_files_are_read() {
    let tmp = TempDir::new().unwrap();
    let profile = cuspforge::make_decay_profile(0.0, cuspforge::DecayMode::Exponential).unwrap();
    let path = tmp.path().join("profile.txt");
    fs::write(&path, profile.to_text()).unwrap();
    let file_run = cuspforge(
        &["cusp"],
        Some(&format!("[cusp]\nprofile = file:{}\n", path.display())),
        &tmp.path().join("f"),
        &[],
    );
    let named_run = cuspforge(&["cusp"], Some("[cusp]\nprofile = decay\n"), &tmp.path().join("n"), &[]);
    assert_eq!(file_run.code, named_run.code);
    assert_eq!(read(&tmp.path().join("f"), "cusp.csv"), read(&tmp.path().join("n"), "cusp.csv"));
}

#[test]
fn every_subcommand_ends_with_a_parsable_result() {
    let tmp = TempDir::new().unwrap();
    for name in [
        "cusp",
        "curvature",
        "smooth",
        "assemble",
        "plan-growth",
        "cgvd",
        "geodesic",
        "visibility",
        "invisibility",
    ] {
        let r = cuspforge(&[name], None, &tmp.path().join(name), &[]);
        let line = r.stdout.lines().last().unwrap();
        let parsed = r.result();
        assert_eq!(parsed.command.name(), name);
        assert_eq!(parsed.to_string(), line);
        assert_eq!(r.code, if parsed.pass { 0 } else { 2 }, "{line}");
        assert!(parsed.pass, "{line}");
        for entry in fs::read_dir(tmp.path().join(name)).unwrap() {
            let path = entry.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            assert!(!text.contains('\r'));
            if path.extension().is_some_and(|e| e == "csv") {
                assert!(text.lines().next().unwrap().chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == ','));
            }
            if path.extension().is_some_and(|e| e == "svg") {
                assert!(text.contains(r#"width="800" height="600""#));
            }
        }
    }
}

#[test]
fn other_modes_and_models() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("curvature", "[curvature]\nmetric = diagonal\n"),
        ("curvature", "[curvature]\nmetric = graph\nhalf_widths = 5, 10\n"),
        ("curvature", "[curvature]\nprofile = cosh\nn = 2\n"),
        ("cgvd", "[cgvd]\nmodel = planner\n"),
        ("geodesic", "[geodesic]\nmode = connect\n"),
        ("geodesic", "[geodesic]\nsurface = graph\nmode = connect\nstart = -1, -1\ntarget = 1.5, -0.5\n"),
        ("geodesic", "[geodesic]\nsurface = cylinder\nalpha = 0.7\nlength = 30\n"),
        ("assemble", "[assemble]\nschedule = cyclic:1,2\nn = 2\n"),
    ];
    for (i, (cmd, conf)) in cases.into_iter().enumerate() {
        let r = cuspforge(&[cmd], Some(conf), &tmp.path().join(format!("m{i}")), &[]);
        assert_eq!(r.code, 0, "{conf}: {}{}", r.stdout, r.stderr);
    }
}

#[test]
fn warped_curvature_reports_the_expected_extremes() {
    let tmp = TempDir::new().unwrap();
    let r = cuspforge(&["curvature"], Some("[curvature]\nspan = 3\n"), &tmp.path().join("k"), &[]);
    assert_eq!(r.metric("k_max"), -1.0);
    let want = -((6.0f64).exp() + 1.0);
    assert!(((r.metric("k_min") - want) / want).abs() < 1e-12);
}

#[test]
fn leaving_the_chart_is_a_verification_failure() {
    let tmp = TempDir::new().unwrap();
    let r = cuspforge(&["geodesic"], Some("[geodesic]\nalpha = pi\n"), &tmp.path().join("g"), &[]);
    assert_eq!(r.code, 2, "{}", r.stdout);
    assert_eq!(r.result().tag.as_deref(), Some("domain-exit"));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn same_config_gives_identical_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        ("geodesic", "[geodesic]\nmode = random\npairs = 8\n", "pairs.csv"),
        ("invisibility", "[invisibility]\nhorizons = 5, 10, 20\ncells = 40000\n", "invisibility.svg"),
        ("curvature", "[curvature]\nmetric = graph\n", "total_curvature.csv"),
    ];
    for (cmd, conf, name) in cases {
        let runs: Vec<_> = [("a", "1"), ("b", "4"), ("c", "4")]
            .iter()
            .map(|(tag, threads)| {
                let out = tmp.path().join(format!("{cmd}-{tag}"));
                let r = cuspforge(&[cmd, "--threads", threads, "--seed", "11"], Some(conf), &out, &[]);
                assert_eq!(r.code, 0, "{}", r.stdout);
                (r.stdout.lines().last().unwrap().to_string(), snapshot(&out))
            })
            .collect();
        assert!(runs[0].1.iter().any(|(n, _)| n == name));
        assert_eq!(runs[0], runs[1], "{cmd}");
        assert_eq!(runs[1], runs[2], "{cmd}");
    }
}

#[test]
fn seeds_change_the_sampled_pairs() {
    let tmp = TempDir::new().unwrap();
    let pairs = |seed: &str| {
        let out = tmp.path().join(format!("s{seed}"));
        let r = cuspforge(&["geodesic", "--seed", seed], Some("[geodesic]\nmode = random\npairs = 3\n"), &out, &[]);
        assert_eq!(r.code, 0);
        read(&out, "pairs.csv")
    };
    assert_ne!(pairs("1"), pairs("2"));
}
