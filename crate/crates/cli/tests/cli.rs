use std::path::Path;
use std::process::{Command, Output};

use distill_core::testkit::git::{evolution_fixture, FixtureRepo, ANN};
use tempfile::TempDir;

fn distill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distill"))
        .args(args)
        .env_remove("DISTILL_JOBS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn taxonomy_lists_26_labels_in_order() {
    let out = distill(&["taxonomy"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 26);
    assert_eq!(lines[0], "ADDITIONAL_CLASS");
    assert_eq!(lines[6], "PARAMETER_INSERT");
    assert_eq!(lines[25], "UNCLASSIFIED_CHANGE");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&distill(&[])), 1);
    assert_eq!(code(&distill(&["frobnicate"])), 1);
    assert_eq!(code(&distill(&["aggregate", "--out", "x.csv"])), 1);
    assert_eq!(code(&distill(&["bench", "--rows", "10", "--jobs", "0"])), 1);
    assert_eq!(
        code(&distill(&[
            "aggregate",
            "--inputs",
            "a",
            "--out",
            "b",
            "--level",
            "team"
        ])),
        1
    );
    let out = Command::new(env!("CARGO_BIN_EXE_distill"))
        .args(["bench", "--rows", "10"])
        .env("DISTILL_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("DISTILL_JOBS"));
    assert_eq!(code(&distill(&["--help"])), 0);
}

#[test]
fn data_and_io_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("agg.csv");
    let missing = distill(&[
        "aggregate",
        "--inputs",
        s(&dir.path().join("none.csv")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&missing), 3);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("none.csv"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "p#c#x#a#e#1#F.java#false#STATEMENT_INSERT#STATEMENT#s#A.m()#\nonly#three#cols\n",
    )
    .unwrap();
    let res = distill(&["aggregate", "--inputs", s(&bad), "--out", s(&out)]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains(":2:"));
    assert!(!out.exists());

    let res = distill(&["aggregate", "--inputs", s(&bad), "--out", s(&out), "--skip-malformed"]);
    assert_eq!(code(&res), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 2);

    let unknown = dir.path().join("unknown.csv");
    std::fs::write(
        &unknown,
        "p#c#x#a#e#1#F.java#false#STATEMENT_MOVED#STATEMENT#s#A.m()#\n",
    )
    .unwrap();
    let res = distill(&["aggregate", "--inputs", s(&unknown), "--out", s(&out)]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("STATEMENT_MOVED"));
}

#[test]
fn aggregate_two_inputs_as_one_dataset() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("ds1.csv");
    let b = dir.path().join("ds2.csv");
    let row = |ct: &str| format!("p#c1#c0#Ann#ann@x.org#100#A.java#false#{ct}#STATEMENT#s;#A.m()#T-1\n");
    std::fs::write(&a, row("STATEMENT_INSERT")).unwrap();
    std::fs::write(&b, row("STATEMENT_INSERT") + &row("STATEMENT_DELETE")).unwrap();
    let out = dir.path().join("agg.csv");
    assert_eq!(
        code(&distill(&["aggregate", "--inputs", s(&a), s(&b), "--out", s(&out)])),
        0
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<Vec<&str>> = text.lines().map(|l| l.split('#').collect()).collect();
    assert_eq!(lines.len(), 2);
    let col = |name: &str| lines[0].iter().position(|h| *h == name).unwrap();
    assert_eq!(lines[1][col("STATEMENT_INSERT")], "2");
    assert_eq!(lines[1][col("STATEMENT_DELETE")], "1");
    assert_eq!(lines[1][col("totalChanges")], "3");

    let global = dir.path().join("global.csv");
    let res = distill(&[
        "aggregate",
        "--inputs",
        s(&a),
        s(&b),
        "--out",
        s(&global),
        "--level",
        "global",
    ]);
    assert_eq!(code(&res), 0);
    let text = std::fs::read_to_string(&global).unwrap();
    assert!(text.starts_with("numCommits#ADDITIONAL_CLASS#"));
    assert!(text.lines().nth(1).unwrap().starts_with("1#0#"));
}

#[test]
fn mining_is_deterministic_end_to_end() {
    let dir = TempDir::new().unwrap();
    let repo = dir.path().join("calc");
    evolution_fixture(&repo);
    let list = dir.path().join("repos.txt");
    std::fs::write(&list, format!("# fixture\n\n{}\n", repo.display())).unwrap();

    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "2"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let res = distill(&["mine", "--repos", s(&list), "--out", s(&out), "--jobs", jobs]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        let stdout = String::from_utf8(res.stdout).unwrap();
        assert!(stdout.contains("calc: 7 commits"), "{stdout}");
        assert!(stdout.contains("9 rows"), "{stdout}");
        let agg = dir.path().join(format!("agg{i}.csv"));
        let inputs = out.join("calc.csv");
        assert_eq!(
            code(&distill(&[
                "aggregate",
                "--inputs",
                s(&inputs),
                "--out",
                s(&agg),
                "--jobs",
                jobs
            ])),
            0
        );
        outputs.push((std::fs::read(&inputs).unwrap(), std::fs::read(&agg).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn mining_reports_bad_repositories_and_continues() {
    let dir = TempDir::new().unwrap();
    let mut good = FixtureRepo::init(dir.path().join("good"));
    good.write("A.java", "class A { }");
    good.commit("one", ANN);
    good.write("A.java", "class A { int x; }");
    good.commit("two", ANN);
    let plain = dir.path().join("plain");
    std::fs::create_dir(&plain).unwrap();
    let out = dir.path().join("out");

    let res = distill(&["mine", "--repos", s(good.path()), s(&plain), "--out", s(&out)]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("not a git repository"));
    assert!(out.join("good.csv").exists());

    let res = distill(&["mine", "--repos", s(&dir.path().join("absent")), "--out", s(&out)]);
    assert_eq!(code(&res), 3);
}

#[test]
fn bench_verifies_equality() {
    let res = distill(&[
        "bench",
        "--rows",
        "2000",
        "--jobs",
        "3",
        "--seed",
        "11",
        "--projects",
        "4",
    ]);
    assert_eq!(code(&res), 0);
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("rows: 2000"));
    assert!(text.contains("parallel (3 workers)"));
    assert!(text.contains("speedup: "));
    assert!(text.contains("results identical: true"));
}
