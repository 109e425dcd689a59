mod common;

use std::fs;

use common::{read, stderr, topic_embed, train_args, write_synthetic};

fn with(mut args: Vec<String>, extra: &[&str]) -> Vec<String> {
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

fn set(mut args: Vec<String>, flag: &str, value: &str) -> Vec<String> {
    match args.iter().position(|a| a == flag) {
        Some(i) => args[i + 1] = value.to_string(),
        None => args.extend([flag.to_string(), value.to_string()]),
    }
    args
}

fn cmd(name: &str, args: Vec<String>) -> Vec<String> {
    std::iter::once(name.to_string()).chain(args).collect()
}

#[test]
fn train_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let (files, corpus, _) = write_synthetic(dir.path(), 5, 60, 200, 1);
    let out = dir.path().join("run");
    let r = topic_embed(cmd("train", train_args(&files, &out, 5)));
    assert!(r.status.success(), "{}", stderr(&r));
    for f in ["model.txt", "trace.tsv", "split.txt", "config.txt", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let trace = read(out.join("trace.tsv"));
    assert_eq!(trace.lines().next(), Some("iteration\trate\theldout_ll"));
    assert_eq!(trace.lines().count(), 1 + 3);
    let split = read(out.join("split.txt"));
    assert_eq!(
        split.lines().filter(|l| !l.starts_with('#')).count(),
        corpus.num_docs() / 10
    );

    let manifest: serde_json::Value = serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["config"]["k"], "5");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 3);
    let timings: Vec<&str> = manifest["timings"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t[0].as_str().unwrap())
        .collect();
    assert_eq!(timings, ["load", "train", "write"]);
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn beta_default_follows_k() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 4, 120, 60, 2);
    let out = dir.path().join("run");
    let mut args = train_args(&files, &out, 100);
    let i = args.iter().position(|a| a == "--m").unwrap();
    args.drain(i..i + 2);
    let args = set(set(args, "--test-frac", "0"), "--max-epochs", "1");
    let r = topic_embed(cmd("train", args));
    assert!(r.status.success(), "{}", stderr(&r));
    let config = read(out.join("config.txt"));
    assert!(config.lines().any(|l| l == "beta=1e-2"), "{config}");
    assert!(config.lines().any(|l| l == "m=50"));
    assert!(config.lines().any(|l| l == "ks=50"));
    assert!(config.lines().any(|l| l == "alpha=1e-1"));
}

#[test]
fn invalid_settings_are_listed_together() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 4, 60, 40, 3);
    let out = dir.path().join("run");
    let args = set(train_args(&files, &out, 10), "--m", "10");
    let r = topic_embed(cmd("train", with(args, &["--alpha", "-1", "--tau", "x"])));
    assert_eq!(r.status.code(), Some(3));
    let err = stderr(&r);
    assert!(err.starts_with("error[config]: 3 invalid setting(s)"), "{err}");
    assert!(err.contains("M must be < K (M=10, K=10)"));
    assert!(err.contains("alpha=-1"));
    assert!(err.contains("tau"));
    assert!(!out.exists());
}

#[test]
fn unknown_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 4, 60, 40, 3);
    let out = dir.path().join("run");
    let r = topic_embed(cmd("train", with(train_args(&files, &out, 4), &["--gamma", "2"])));
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).starts_with("error[usage]"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 4, 60, 80, 4);
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# test\nk = 6\ntau=2\nsamples=2\n").unwrap();
    let out = dir.path().join("run");
    let args: Vec<String> = train_args(&files, &out, 4)
        .into_iter()
        .collect::<Vec<_>>()
        .chunks(2)
        .filter(|p| p[0] != "--k")
        .flatten()
        .cloned()
        .collect();
    let r = topic_embed(cmd(
        "train",
        with(args, &["--config", conf.to_str().unwrap(), "--tau", "3"]),
    ));
    assert!(r.status.success(), "{}", stderr(&r));
    let config = read(out.join("config.txt"));
    assert!(config.contains("k=6\n"));
    assert!(config.contains("tau=3e0\n"));
    assert!(config.contains("samples=2\n"));

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "k=6\nwhat=1\n").unwrap();
    let r = topic_embed(cmd(
        "train",
        with(train_args(&files, &out, 4), &["--config", bad.to_str().unwrap()]),
    ));
    assert_eq!(r.status.code(), Some(3));
    assert!(stderr(&r).contains("unknown key \"what\""));
}

#[test]
fn resolved_config_reproduces_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 4, 60, 120, 5);
    let first = dir.path().join("a");
    let r = topic_embed(cmd("train", train_args(&files, &first, 4)));
    assert!(r.status.success(), "{}", stderr(&r));
    let second = dir.path().join("b");
    let r = topic_embed([
        "train",
        "--docword",
        files.docword.to_str().unwrap(),
        "--vocab",
        files.vocab.to_str().unwrap(),
        "--config",
        first.join("config.txt").to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    assert_eq!(
        fs::read(first.join("model.txt")).unwrap(),
        fs::read(second.join("model.txt")).unwrap()
    );
    assert_eq!(read(first.join("trace.tsv")), read(second.join("trace.tsv")));
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 4, 60, 200, 6);
    let seq = dir.path().join("seq");
    let par = dir.path().join("par");
    assert!(topic_embed(cmd("train", train_args(&files, &seq, 4))).status.success());
    let args = set(train_args(&files, &par, 4), "--workers", "3");
    assert!(topic_embed(cmd("train", args)).status.success());
    assert_eq!(
        fs::read(seq.join("model.txt")).unwrap(),
        fs::read(par.join("model.txt")).unwrap()
    );
}

#[test]
fn eval_metrics_and_retrieval() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 5, 60, 300, 7);
    let run = dir.path().join("run");
    assert!(topic_embed(cmd("train", train_args(&files, &run, 5))).status.success());
    let out = dir.path().join("eval");
    let base = [
        "eval",
        "--model",
        run.join("model.txt").to_str().unwrap(),
        "--docword",
        files.docword.to_str().unwrap(),
        "--vocab",
        files.vocab.to_str().unwrap(),
        "--split",
        run.join("split.txt").to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]
    .map(String::from)
    .to_vec();

    let r = topic_embed(with(
        base.clone(),
        &[
            "--labels",
            files.labels.to_str().unwrap(),
            "--retrieval",
            "--cutoffs",
            "1,10,100",
            "--features",
        ],
    ));
    assert!(r.status.success(), "{}", stderr(&r));
    let metrics = read(out.join("metrics.tsv"));
    let ll_line = metrics.lines().find(|l| l.starts_with("heldout_perword_ll\t")).unwrap();
    let value = ll_line.split('\t').nth(1).unwrap();
    let decimals = value.split('.').nth(1).unwrap();
    assert_eq!(decimals.len(), 6, "{value}");
    assert!(value.parse::<f64>().unwrap() < 0.0);

    let pr = read(out.join("pr.tsv"));
    assert_eq!(pr.lines().next(), Some("cutoff\trecall\tprecision"));
    let cutoffs: Vec<&str> = pr.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(cutoffs, ["1", "10", "100"]);
    let features = read(out.join("features.txt"));
    assert_eq!(features.lines().count(), 30);
    assert!(features.lines().all(|l| l.split(' ').count() == 3));

    let r = topic_embed(with(base.clone(), &["--retrieval"]));
    assert_ne!(r.status.code(), Some(0));
    assert!(
        stderr(&r).contains("--retrieval needs document labels"),
        "{}",
        stderr(&r)
    );
}

#[test]
fn lda_runs_share_the_trace_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 5, 60, 200, 8);
    let emb = dir.path().join("emb");
    let lda = dir.path().join("lda");
    assert!(topic_embed(cmd("train", train_args(&files, &emb, 5))).status.success());
    let r = topic_embed(cmd("lda", train_args(&files, &lda, 5)));
    assert!(r.status.success(), "{}", stderr(&r));
    let (a, b) = (read(emb.join("trace.tsv")), read(lda.join("trace.tsv")));
    assert_eq!(a.lines().next(), b.lines().next());
    assert_eq!(a.lines().count(), b.lines().count());
    assert_eq!(read(emb.join("split.txt")), read(lda.join("split.txt")));

    let eval = |model: &str, baseline: bool| {
        let mut args = vec![
            "eval".to_string(),
            "--model".into(),
            model.into(),
            "--docword".into(),
            files.docword.to_str().unwrap().into(),
            "--vocab".into(),
            files.vocab.to_str().unwrap().into(),
            "--out".into(),
            dir.path().join("eval").to_str().unwrap().into(),
        ];
        if baseline {
            args.push("--baseline".into());
        }
        topic_embed(args)
    };
    let lda_model = lda.join("model.txt");
    let r = eval(lda_model.to_str().unwrap(), false);
    assert_eq!(r.status.code(), Some(5));
    assert!(stderr(&r).starts_with("error[model]"), "{}", stderr(&r));
    assert!(stderr(&r).contains("lda"));
    assert!(eval(lda_model.to_str().unwrap(), true).status.success());
    let r = eval(emb.join("model.txt").to_str().unwrap(), true);
    assert_eq!(r.status.code(), Some(5));
}

#[test]
fn export_respects_threshold_and_label_count() {
    let dir = tempfile::tempdir().unwrap();
    let (files, _, _) = write_synthetic(dir.path(), 6, 60, 300, 9);
    let run = dir.path().join("run");
    assert!(topic_embed(cmd("train", train_args(&files, &run, 6))).status.success());
    let export = |threshold: &str, out: &str| {
        topic_embed([
            "export",
            "--model",
            run.join("model.txt").to_str().unwrap(),
            "--vocab",
            files.vocab.to_str().unwrap(),
            "--threshold",
            threshold,
            "--top-words",
            "10",
            "--out",
            dir.path().join(out).to_str().unwrap(),
        ])
    };
    let r = export("0.9", "strict");
    assert!(r.status.success(), "{}", stderr(&r));
    let strict = dir.path().join("strict");
    let edges = read(strict.join("graph.edges"));
    for line in edges.lines().filter(|l| !l.starts_with('#')) {
        let r: f64 = line.split(' ').nth(2).unwrap().parse().unwrap();
        assert!(r >= 0.9);
    }
    let gml = read(strict.join("graph.gml"));
    let labels: Vec<&str> = gml.lines().filter_map(|l| l.trim().strip_prefix("label ")).collect();
    assert_eq!(labels.len(), 6);
    assert!(labels.iter().all(|l| l.trim_matches('"').split(' ').count() == 10));
    assert_eq!(read(strict.join("embeddings.tsv")).lines().count(), 6);
    assert_eq!(read(strict.join("covariance.tsv")).lines().count(), 7);
    assert!(read(strict.join("topics.tsv"))
        .lines()
        .skip(1)
        .all(|l| l.split(' ').count() == 10));

    assert!(export("-1", "all").status.success());
    let all = read(dir.path().join("all").join("graph.edges"));
    assert_eq!(all.lines().filter(|l| !l.starts_with('#')).count(), 15);
    assert!(export("-1", "all2").status.success());
    assert_eq!(all, read(dir.path().join("all2").join("graph.edges")));
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let r = topic_embed([
        "train",
        "--docword",
        "/nonexistent/docword.txt",
        "--vocab",
        "/nonexistent/vocab.txt",
        "--k",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(4));
    assert!(stderr(&r).starts_with("error[io]"));
}
