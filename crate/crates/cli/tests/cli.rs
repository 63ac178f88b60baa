use std::fs;
use std::path::Path;
use std::process::Command as Process;

use memharvest_cli::{json_sibling, run_cli, Report, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use memharvest_core::{key_for_uri, Manifest, OutcomeClass, Store};
use memharvest_testkit::corpus::{base_documents, pathological, wrapped, Wrapper};
use memharvest_testkit::{scenarios, serve, ReplayServer, Route, Scenario, ScriptedResponse};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("memharvest").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

/// Three servable documents and one that is gone for good.
fn mixed_server() -> ReplayServer {
    let mut scenario = Scenario::new();
    for name in ["b1", "b2", "b3"] {
        scenario = scenario.route(Route::new(
            &format!("/{name}"),
            vec![ScriptedResponse::html(wrapped(name, Wrapper::Plain))],
        ));
    }
    serve(scenario.route(Route::new("/gone", vec![ScriptedResponse::new(404)]))).unwrap()
}

fn uri_file(dir: &Path, server: &ReplayServer) -> String {
    let path = dir.join("uris.txt");
    let text = format!(
        "# sample\n{}\n\n{}\n{}\n  {}  \n",
        server.url("/b1"),
        server.url("/gone"),
        server.url("/b2"),
        server.url("/b3"),
    );
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn golden(name: &str) -> &'static str {
    base_documents()
        .into_iter()
        .find(|b| b.name == name)
        .unwrap()
        .golden
}

#[test]
fn pipeline_then_report() {
    let server = mixed_server();
    let dir = tempfile::tempdir().unwrap();
    let input = uri_file(dir.path(), &server);
    let store = dir.path().join("store");
    let store_arg = store.to_str().unwrap();
    let report_path = dir.path().join("report.txt");

    let run = cli(&[
        "pipeline",
        "--input",
        &input,
        "--store",
        store_arg,
        "--rate",
        "100",
        "--workers",
        "2",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(run.code, EXIT_OK, "{}", run.err);
    assert!(
        run.out
            .lines()
            .any(|l| l.starts_with("problematic") && l.ends_with(" 25.0%")),
        "{}",
        run.out
    );

    let opened = Store::open(&store).unwrap();
    let manifest = Manifest::load(&opened).unwrap();
    assert_eq!(manifest.records().len(), 4);
    for name in ["b1", "b2", "b3"] {
        let uri = server.url(&format!("/{name}"));
        assert_eq!(
            manifest.latest_class(&key_for_uri(&uri)),
            Some(OutcomeClass::Ok)
        );
        let entry = opened.get(&key_for_uri(&uri)).unwrap().unwrap();
        assert_eq!(entry.text.as_deref(), Some(golden(name)));
    }
    let gone = key_for_uri(&server.url("/gone"));
    assert_eq!(
        manifest.latest_class(&gone),
        Some(OutcomeClass::NetworkError)
    );

    assert_eq!(fs::read_to_string(&report_path).unwrap(), run.out);
    let json: Report =
        serde_json::from_str(&fs::read_to_string(json_sibling(&report_path)).unwrap()).unwrap();
    assert_eq!(json.total, 4);
    assert_eq!(json.count(OutcomeClass::NetworkError), 1);

    let report = cli(&["report", "--store", store_arg]);
    assert_eq!(report.code, EXIT_OK);
    assert_eq!(report.out, run.out);
}

#[test]
fn rerun_only_fetches_unfinished_uris() {
    let server = mixed_server();
    let dir = tempfile::tempdir().unwrap();
    let input = uri_file(dir.path(), &server);
    let store = dir.path().join("store");
    let args = [
        "pipeline",
        "--input",
        &input,
        "--store",
        store.to_str().unwrap(),
        "--rate",
        "100",
    ];

    assert_eq!(cli(&args).code, EXIT_OK);
    let first = server.log().len();
    assert_eq!(first, 4);
    let rerun = cli(&args);
    assert_eq!(rerun.code, EXIT_OK);
    let log = server.log();
    assert_eq!(log.len(), 5);
    assert_eq!(log[4].url, "/gone");
    assert!(
        rerun.err.contains("1 attempted, 3 already done"),
        "{}",
        rerun.err
    );
}

#[test]
fn worker_count_does_not_change_results() {
    let mut results = Vec::new();
    for workers in ["1", "4"] {
        let server = serve(
            scenarios::http_chain()
                .route(Route::new(
                    "/faux",
                    vec![ScriptedResponse::html(pathological("noscript-faux.html"))],
                ))
                .route(Route::new(
                    "/corrupt",
                    vec![ScriptedResponse::html(pathological(
                        "noscript-corrupt.html",
                    ))],
                )),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("uris.txt");
        let paths = [
            "/start", "/final", "/faux", "/corrupt", "/missing", "/start",
        ];
        let uris: Vec<String> = paths.iter().map(|p| server.url(p)).collect();
        fs::write(&input, uris.join("\n")).unwrap();
        let store = dir.path().join("store");
        let run = cli(&[
            "pipeline",
            "--input",
            input.to_str().unwrap(),
            "--store",
            store.to_str().unwrap(),
            "--rate",
            "100",
            "--workers",
            workers,
        ]);
        assert_eq!(run.code, EXIT_OK, "{}", run.err);

        let opened = Store::open(&store).unwrap();
        let base = server.base_url().to_string();
        let mut rows: Vec<(String, u16, OutcomeClass, Option<String>)> = Manifest::load(&opened)
            .unwrap()
            .records()
            .iter()
            .map(|r| {
                let text = opened.get(&r.key).unwrap().and_then(|e| e.text);
                // The two runs differ only in the server port.
                (r.request_uri.replace(&base, ""), r.status, r.class, text)
            })
            .collect();
        rows.sort();
        results.push(rows);
    }
    assert_eq!(results[0].len(), 5);
    assert_eq!(results[0], results[1]);
    let classes: Vec<_> = results[0].iter().map(|r| (r.0.as_str(), r.2)).collect();
    assert!(classes.contains(&("/corrupt", OutcomeClass::NoscriptCorruption)));
    assert!(classes.contains(&("/missing", OutcomeClass::NetworkError)));
}

#[test]
fn redirect_limit_is_classified() {
    let server = serve(scenarios::redirect_chain(4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("uris.txt");
    fs::write(&input, server.url("/r/0")).unwrap();
    let store = dir.path().join("store");
    let run = cli(&[
        "pipeline",
        "--input",
        input.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
        "--rate",
        "100",
        "--max-redirects",
        "3",
    ]);
    assert_eq!(run.code, EXIT_OK);
    assert!(
        run.out
            .lines()
            .any(|l| l.starts_with("redirect-limit") && l.contains("100.0%")),
        "{}",
        run.out
    );
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["pipeline", "--bogus"][..],
        &[],
        &["frobnicate"],
        &["pipeline", "--input", "x", "--store", "y", "--workers", "0"],
        &["pipeline", "--input", "x", "--store", "y", "--rate", "-1"],
        &["fetch", "http://a/", "--timeout", "soon"],
        &["extract", &"a".repeat(64)],
    ] {
        let run = cli(args);
        assert_eq!(run.code, EXIT_USAGE, "{args:?}: {}", run.err);
        assert!(!run.err.is_empty());
    }
    let run = cli(&["pipeline", "--bogus"]);
    assert!(run.err.contains("--bogus"));
    let run = cli(&["pipeline", "--input", "x", "--store", "y", "--rate", "0"]);
    assert!(run.err.contains("--rate"));
}

#[test]
fn help_exits_0() {
    let run = cli(&["--help"]);
    assert_eq!(run.code, EXIT_OK);
    assert!(run.out.contains("pipeline"));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    let run = cli(&[
        "pipeline",
        "--input",
        missing.to_str().unwrap(),
        "--store",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.code, EXIT_FAILURE);
    assert!(run.err.contains("nope.txt"), "{}", run.err);

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "http://a/\nnot a uri\n").unwrap();
    let run = cli(&[
        "pipeline",
        "--input",
        bad.to_str().unwrap(),
        "--store",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.code, EXIT_FAILURE);
    assert!(run.err.contains("line 2"), "{}", run.err);

    let run = cli(&["report", "--store", missing.to_str().unwrap()]);
    assert_eq!(run.code, EXIT_FAILURE);

    let run = cli(&[
        "extract",
        &key_for_uri("http://a/").to_string(),
        "--store",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.code, EXIT_FAILURE);
    assert!(run.err.contains("no stored entry"));
}

#[test]
fn fetch_prints_the_chain() {
    let server = serve(scenarios::js_chain()).unwrap();
    let run = cli(&[
        "fetch",
        &server.url(scenarios::JS_CHAIN_START),
        "--rate",
        "100",
    ]);
    assert_eq!(run.code, EXIT_OK, "{}", run.err);
    let kinds: Vec<&str> = run
        .out
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(kinds, ["js-page", "js-page", "final"]);
    assert!(run.out.ends_with(&format!(
        "final\t200\t{}\n",
        server.url(scenarios::JS_CHAIN_FINAL)
    )));
}

#[test]
fn fetch_failure_exits_1() {
    let server = serve(scenarios::redirect_chain(3)).unwrap();
    let run = cli(&[
        "fetch",
        &server.url("/r/0"),
        "--rate",
        "100",
        "--max-redirects",
        "2",
    ]);
    assert_eq!(run.code, EXIT_FAILURE);
    assert!(run.err.contains("redirect limit"), "{}", run.err);
}

#[test]
fn extract_from_store_by_key_and_uri() {
    let server = mixed_server();
    let dir = tempfile::tempdir().unwrap();
    let input = uri_file(dir.path(), &server);
    let store = dir.path().join("store");
    let store_arg = store.to_str().unwrap();
    assert_eq!(
        cli(&["pipeline", "--input", &input, "--store", store_arg, "--rate", "100"]).code,
        EXIT_OK
    );
    let requests = server.log().len();

    let uri = server.url("/b2");
    let by_key = cli(&["extract", key_for_uri(&uri).as_str(), "--store", store_arg]);
    assert_eq!(by_key.code, EXIT_OK, "{}", by_key.err);
    assert_eq!(by_key.out, format!("{}\n", golden("b2")));
    let by_uri = cli(&["extract", &uri, "--store", store_arg]);
    assert_eq!(by_uri.out, by_key.out);
    assert_eq!(server.log().len(), requests);
}

#[test]
fn extract_reports_diagnostics() {
    let server = serve(Scenario::new().route(Route::new(
        "/n",
        vec![ScriptedResponse::new(200)
            .header("Content-Type", "text/html")
            .body(pathological("null-bytes.html"))],
    )))
    .unwrap();
    let run = cli(&["extract", &server.url("/n"), "--rate", "100"]);
    assert_eq!(run.code, EXIT_OK, "{}", run.err);
    assert!(
        run.err.contains("diagnostic null-bytes-removed (6)"),
        "{}",
        run.err
    );
    assert_eq!(
        run.out,
        format!(
            "{}\n",
            std::str::from_utf8(pathological("null-bytes.txt")).unwrap()
        )
    );
}

#[test]
fn rules_from_environment() {
    let server = serve(scenarios::webcite()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.json");
    fs::write(
        &rules,
        r#"{"rules":[{"archive_id":"webcite-local","hosts":["127.0.0.1"],"strip":[],"prefixes":[],"frame_select":"main"}]}"#,
    )
    .unwrap();
    let uri = server.url("/5rRjzl9dY");

    let without = Process::new(env!("CARGO_BIN_EXE_memharvest"))
        .args(["fetch", &uri, "--rate", "100"])
        .env_remove("MEMHARVEST_RULES")
        .output()
        .unwrap();
    assert_eq!(without.status.code(), Some(EXIT_FAILURE));

    let with = Process::new(env!("CARGO_BIN_EXE_memharvest"))
        .args(["extract", &uri, "--rate", "100"])
        .env("MEMHARVEST_RULES", &rules)
        .output()
        .unwrap();
    assert_eq!(
        with.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&with.stderr)
    );
    assert_eq!(
        String::from_utf8(with.stdout).unwrap(),
        format!("{}\n", golden("b3"))
    );
}
