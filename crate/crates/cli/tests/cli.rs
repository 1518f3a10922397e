use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn epinorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epinorm"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn normalize(data: &str, manifest: &str, extra: &[&str]) -> Output {
    let m = fixture(manifest);
    let d = fixture(data);
    let mut args = vec!["--manifest", path(&m)];
    args.extend_from_slice(extra);
    args.extend(["normalize", path(&d)]);
    epinorm(&args)
}

#[test]
fn normalize_countries_to_csv() {
    let out = normalize("countries.csv", "countries.manifest.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# interval_type=leading\n"));
    assert!(text.contains("2013-11-05,2013-11-12,US,all,confirmed,4\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn normalize_midnight_series_to_json() {
    let out = normalize(
        "weekly_midnight.csv",
        "weekly_midnight.manifest.json",
        &["--format", "json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let starts: Vec<&str> = v["observations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["interval_start"].as_str().unwrap())
        .collect();
    assert_eq!(
        starts,
        ["2014-08-01T00:00", "2014-08-08T00:00", "2014-08-15T00:00"]
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning:"));
}

#[test]
fn failed_normalize_leaves_output_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    std::fs::write(&target, "previous\n").unwrap();
    let out = normalize(
        "countries.csv",
        "no_interval.manifest.json",
        &["--output", path(&target)],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("interval_type"));
    assert_eq!(std::fs::read_to_string(&target).unwrap(), "previous\n");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn normalize_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let out = normalize(
        "countries.json",
        "countries_json.manifest.json",
        &["--output", path(&target)],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["observations"].as_array().unwrap().len(), 4);
}

fn lint(name: &str, extra: &[&str]) -> Output {
    let m = fixture(&format!("lint/{name}.manifest.json"));
    let d = fixture(&format!("lint/{name}.csv"));
    let mut args = vec!["--manifest", path(&m)];
    args.extend_from_slice(extra);
    args.extend(["lint", path(&d)]);
    epinorm(&args)
}

#[test]
fn lint_exit_codes() {
    assert_eq!(lint("clean", &[]).status.code(), Some(0));
    assert_eq!(lint("tz", &[]).status.code(), Some(1));
    for name in [
        "iso8601", "interval", "iso3166", "utf8", "casedef", "unknown",
    ] {
        let out = lint(name, &[]);
        assert_eq!(out.status.code(), Some(2), "{name}");
    }
}

#[test]
fn lint_json_names_the_rule() {
    let out = lint("unknown", &["--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["findings"][0]["rule"], "R-UNKNOWN");
}

#[test]
fn epiweek_labels() {
    let out = epinorm(&["epiweek", "2016-05-15"]);
    assert_eq!(stdout(&out), "2016, week 20\n");
    let out = epinorm(&["epiweek", "2015-10-03"]);
    assert_eq!(stdout(&out), "2015, week 39\n");
    let out = epinorm(&["--format", "json", "epiweek", "2016-05-15"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["interval_start"], "2016-05-15");
    assert_eq!(v["interval_end"], "2016-05-22");
    assert_eq!(epinorm(&["epiweek", "05/15/2016"]).status.code(), Some(2));
}

fn canonical(dir: &Path, name: &str, value: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(
        &p,
        format!(
            "# interval_type=leading\n# case_definition=confirmed\n\
             interval_start,interval_end,location_code,demographic,case_type,value\n\
             2016-01-03,2016-01-10,US,all,confirmed,{value}\n"
        ),
    )
    .unwrap();
    p
}

#[test]
fn publish_asof_and_diff() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let s = path(&store);
    let first = canonical(dir.path(), "a.csv", "2");
    let second = canonical(dir.path(), "b.csv", "4");
    assert_eq!(
        epinorm(&["publish", s, "2016-01-11", path(&first)])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        epinorm(&["publish", s, "2016-01-18", path(&second)])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        epinorm(&["publish", s, "2016-01-12", path(&first)])
            .status
            .code(),
        Some(2)
    );

    let value_as_of = |date: &str| {
        let out = epinorm(&["asof", s, date]);
        assert_eq!(out.status.code(), Some(0), "{date}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        v["observations"][0]["value"].as_u64().unwrap()
    };
    assert_eq!(value_as_of("2016-01-11"), 2);
    assert_eq!(value_as_of("2016-01-15"), 2);
    assert_eq!(value_as_of("2016-01-18"), 4);
    assert_eq!(value_as_of("2017-01-01"), 4);
    assert_eq!(epinorm(&["asof", s, "2016-01-01"]).status.code(), Some(2));

    let out = epinorm(&["diff", s, "2016-01-11", "2016-01-18"]);
    assert_eq!(
        stdout(&out),
        "US/all/confirmed [2016-01-03, 2016-01-10): 2 -> 4\n"
    );
    let out = epinorm(&["--format", "json", "diff", s, "2016-01-11", "2016-01-18"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["change"], "changed");
    assert_eq!(
        (v[0]["old"].as_u64(), v[0]["new"].as_u64()),
        (Some(2), Some(4))
    );
}

#[test]
fn merge_policies() {
    let dir = tempfile::tempdir().unwrap();
    let older = canonical(dir.path(), "a.csv", "3");
    let newer = canonical(dir.path(), "b.csv", "unknown");
    let out = epinorm(&[
        "merge",
        path(&older),
        path(&newer),
        "--policy",
        "prefer-newer",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).ends_with(",US,all,confirmed,3\n"));
    let out = epinorm(&["merge", path(&older), path(&newer)]);
    assert_eq!(out.status.code(), Some(2));
}
