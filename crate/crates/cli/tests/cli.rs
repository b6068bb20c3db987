use std::io::Write;
use std::process::{Command, Output};

fn prp_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prp-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn minimal_config_gives_one_row() {
    let cfg = config_file("node_count = 20\nsim_duration_s = 8\n");
    let out = prp_sim(&["run", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("node_count,flow_count,k_policy,protocol,seed"));
    assert!(lines[1].starts_with("20,1,random:3-7,prp,1,"));
}

#[test]
fn single_node_is_rejected() {
    let cfg = config_file("node_count = 1\n");
    let out = prp_sim(&["run", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("node_count"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn unknown_field_is_named() {
    let cfg = config_file("node_count = 20\nnode_cuont = 30\n");
    let out = prp_sim(&["run", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("node_cuont"), "{}", stderr(&out));
}

#[test]
fn missing_file_is_a_validation_error() {
    let out = prp_sim(&["run", "/nonexistent/prp.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/nonexistent/prp.toml"));
}

#[test]
fn unknown_preset_lists_the_available_ones() {
    let out = prp_sim(&["preset", "fig4"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    for name in ["fig3", "fig5_6", "fig7", "fig8"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn presets_are_listed() {
    let out = prp_sim(&["presets"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "fig3\nfig5_6\nfig7\nfig8\n");
}

#[test]
fn sweep_rows_match_cross_product_and_ignore_parallelism() {
    let spec = config_file(
        r#"
seeds = [1, 2]

[base]
sim_duration_s = 6

[axes]
node_count = [30, 20]
protocol = ["flood", "prp"]
"#,
    );
    let path = spec.path().to_str().unwrap();
    let one = prp_sim(&["sweep", path, "--parallel", "1"]);
    let four = prp_sim(&["sweep", path, "--parallel", "4"]);
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(stdout(&one), stdout(&four));
    let text = stdout(&one);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[0].starts_with("20,1,random:3-7,prp,1,"));
    assert!(rows[7].starts_with("30,1,random:3-7,flood,2,"));
}

#[test]
fn verbose_records_follow_the_summary() {
    let cfg = config_file("node_count = 20\nsim_duration_s = 8\n");
    let out = prp_sim(&["--verbose-records", "run", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let (summary, detail) = text.split_once("\n\n").expect("blank line between tables");
    assert_eq!(summary.lines().count(), 2);
    let mut detail = detail.lines();
    assert!(detail.next().unwrap().contains("origin,target,seq"));
    assert!(detail.count() >= 1);
}

#[test]
fn zero_parallelism_is_rejected() {
    let out = prp_sim(&["preset", "fig3", "--parallel", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
