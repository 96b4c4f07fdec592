//! End-to-end runs of the command layer and the binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command as Process;

use appdemog::cli::{dimred_scores, replay, run, Command, DataSource, DimredMethod, RunConfig};
use appdemog::dataset::{ingest, IngestManifest};
use appdemog::eval::{Protocol, DEFAULT_BIN_EDGES};
use appdemog::synth::{generate, SynthConfig};
use appdemog::{Attribute, TrainConfig};

fn small_source() -> DataSource {
    DataSource::Synth {
        config: SynthConfig::preset("small").unwrap(),
        seed: 1,
    }
}

fn config(command: Command) -> RunConfig {
    RunConfig {
        command,
        source: small_source(),
        attributes: vec![Attribute::Gender],
        train: TrainConfig::default(),
        seed: 7,
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn run_with_threads(cfg: &RunConfig, out: &Path, threads: usize) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| run(cfg, out)).unwrap();
}

fn all_commands() -> Vec<Command> {
    vec![
        Command::Cv { k: 10 },
        Command::TopApps { top: 10 },
        Command::Roc {
            k: 5,
            coverage: vec![0.5, 1.0],
        },
        Command::LearningCurve {
            sizes: vec![50, 200],
            reps: 4,
            protocol: Protocol::Holdout,
        },
        Command::Benchmark174 { reps: 6 },
        Command::Bins {
            k: 5,
            edges: DEFAULT_BIN_EDGES.to_vec(),
        },
        Command::Dimred {
            method: DimredMethod::All,
            k: 5,
            components: 10,
            min_share: 0.1,
        },
        Command::Synth,
    ]
}

#[test]
fn every_command_is_byte_identical_across_runs_and_thread_counts() {
    for command in all_commands() {
        let name = command.name();
        let cfg = config(command);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_with_threads(&cfg, a.path(), 1);
        run_with_threads(&cfg, b.path(), 4);
        let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
        assert!(sa.contains_key("report.json") && sa.contains_key("manifest.json"), "{name}");
        assert!(sa.keys().any(|k| k.ends_with(".csv")), "{name}");
        assert_eq!(sa, sb, "{name}");
    }
}

#[test]
fn replay_reproduces_outputs() {
    let cfg = config(Command::Roc {
        k: 4,
        coverage: vec![0.25, 1.0],
    });
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg, a.path()).unwrap();
    replay(&a.path().join("manifest.json"), b.path()).unwrap();
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}

#[test]
fn all_attributes_matches_single_attribute_runs() {
    let mut cfg = config(Command::Cv { k: 5 });
    cfg.attributes = Attribute::ALL.to_vec();
    let all = tempfile::tempdir().unwrap();
    run(&cfg, all.path()).unwrap();
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(all.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 6);

    cfg.attributes = vec![Attribute::Race];
    let one = tempfile::tempdir().unwrap();
    run(&cfg, one.path()).unwrap();
    let single: serde_json::Value = serde_json::from_slice(&std::fs::read(one.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(single["results"][0], report["results"][2]);
}

#[test]
fn synthetic_export_round_trips_through_ingest() {
    let s = generate(&SynthConfig::preset("small").unwrap(), 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    s.dataset.export(dir.path()).unwrap();
    let (back, summary) = ingest(&IngestManifest::in_dir(dir.path())).unwrap();
    assert_eq!(back, s.dataset);
    assert_eq!((summary.dropped_apps, summary.dropped_users), (0, 0));

    let loose = IngestManifest {
        min_users_per_app: 1,
        ..IngestManifest::in_dir(dir.path())
    };
    assert_eq!(ingest(&loose).unwrap().0.n_apps(), s.dataset.n_apps());
}

#[test]
fn commands_leave_input_files_untouched() {
    let data = tempfile::tempdir().unwrap();
    generate(&SynthConfig::preset("small").unwrap(), 2)
        .unwrap()
        .dataset
        .export(data.path())
        .unwrap();
    let before = snapshot(data.path());
    let mut cfg = config(Command::Bins {
        k: 4,
        edges: DEFAULT_BIN_EDGES.to_vec(),
    });
    cfg.source = DataSource::Csv {
        dir: data.path().to_path_buf(),
        min_users_per_app: 10,
    };
    let out = tempfile::tempdir().unwrap();
    run(&cfg, out.path()).unwrap();
    assert_eq!(before, snapshot(data.path()));
}

#[test]
fn dimred_scores_report_each_representation() {
    let s = generate(&SynthConfig::preset("small").unwrap(), 6).unwrap();
    let labeled = s.dataset.balanced_labels(Attribute::Gender, 1).unwrap();
    let scores = dimred_scores(&s.dataset, &labeled, DimredMethod::Svd, 10, 48, 0.1, &TrainConfig::default(), 4).unwrap();
    assert_eq!(scores.len(), 2);
    assert_eq!((scores[0].method, scores[1].method), ("none", "svd"));
    assert_eq!(scores[0].features, s.dataset.n_apps());
    assert_eq!(scores[1].features, 48);
    for sc in &scores {
        assert!(sc.mean_accuracy > 0.5 && sc.mean_accuracy < 1.0, "{sc:?}");
    }
}

#[test]
fn paper_scale_synth_command() {
    let cfg = RunConfig {
        source: DataSource::Synth {
            config: SynthConfig::preset("paper-scale").unwrap(),
            seed: 2,
        },
        ..config(Command::Synth)
    };
    let out = tempfile::tempdir().unwrap();
    let summary = run(&cfg, out.path()).unwrap();
    assert_eq!(summary.dataset.users + summary.dataset.dropped_users, 3760);
    assert_eq!(summary.dataset.apps + summary.dataset.dropped_apps, 8840);
    for f in ["users.csv", "usage.csv", "apps.csv", "ground_truth.json", "report.json", "manifest.json"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_appdemog"))
}

#[test]
fn binary_exit_codes_and_single_line_errors() {
    let out = tempfile::tempdir().unwrap();
    let ok = binary()
        .args(["cv", "--synth-preset", "small", "--k", "3", "--out"])
        .arg(out.path())
        .env("APPDEMOG_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.path().join("report.json").exists());

    let usage = binary().args(["cv", "--synth-preset", "nope"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));
    let msg = String::from_utf8(usage.stderr).unwrap();
    assert_eq!(msg.lines().count(), 1, "{msg}");
    assert!(msg.starts_with("error: "));

    let data = tempfile::tempdir().unwrap();
    std::fs::write(data.path().join("users.csv"), "user_id,gender\nu1,male\n").unwrap();
    std::fs::write(data.path().join("apps.csv"), "app_id,app_name,category\na,A,x\n").unwrap();
    std::fs::write(data.path().join("usage.csv"), "user_id,app_id\nu1,b\n").unwrap();
    let bad = binary().args(["cv", "--data"]).arg(data.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let msg = String::from_utf8(bad.stderr).unwrap();
    assert!(msg.contains("usage.csv:2:"), "{msg}");

    let missing = binary()
        .args(["cv", "--attribute", "income", "--min-users-per-app", "1", "--data"])
        .arg(data.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2), "dangling app id is still a data error");
}
