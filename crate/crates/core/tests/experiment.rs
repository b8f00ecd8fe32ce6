use std::fs;

use flowguard::classifiers::ModelSpec;
use flowguard::experiment::{
    run_experiment, ExperimentConfig, InputSource, Manifest, Mode, SmoteSection, Variant,
};

fn config(rows: usize) -> ExperimentConfig {
    ExperimentConfig {
        input: Some(InputSource::Synth { profile: None, rows: Some(rows) }),
        models: vec![ModelSpec::Gnb],
        cv_folds: 0,
        ..Default::default()
    }
}

fn counts(dir: &std::path::Path, variant: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(variant).join("class_counts.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn d1_and_d2_class_counts_at_desk_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let mut d1 = config(50_000);
    d1.mode = Mode::Paper;
    let mut d2 = d1.clone();
    d2.smote = SmoteSection { enabled: true, k_neighbors: 5 };

    run_experiment(&d1, &tmp.path().join("d1")).unwrap();
    run_experiment(&d2, &tmp.path().join("d2")).unwrap();

    let a = counts(&tmp.path().join("d1"), "d1");
    assert_eq!((a["input"]["botnet"].as_u64(), a["input"]["normal"].as_u64()), (Some(49_750), Some(250)));
    assert!(a["after_smote"].is_null());
    let b = counts(&tmp.path().join("d2"), "d2");
    assert_eq!((b["input"]["botnet"].as_u64(), b["input"]["normal"].as_u64()), (Some(49_750), Some(250)));
    assert_eq!(
        (b["after_smote"]["botnet"].as_u64(), b["after_smote"]["normal"].as_u64()),
        (Some(49_750), Some(49_750))
    );
    assert_eq!(b["smote_scope"], "full-dataset");
}

#[test]
fn empty_model_list_fails_before_any_work() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let mut c = config(10);
    c.models.clear();
    let err = run_experiment(&c, &out).unwrap_err();
    assert!(err.is_validation(), "{err}");
    assert!(!out.exists());
    assert!(!out.with_extension("partial").exists());
}

#[test]
fn manifest_records_stage_order_per_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(3_000);
    c.smote.enabled = true;
    c.cv_folds = 3;
    for (mode, want) in [
        (
            Mode::Default,
            vec!["split", "normalize", "score-features", "smote", "train", "evaluate", "cross-validate"],
        ),
        (
            Mode::Paper,
            vec!["normalize", "smote", "score-features", "split", "train", "evaluate", "cross-validate"],
        ),
    ] {
        c.mode = mode;
        let out = tmp.path().join(format!("{mode:?}"));
        run_experiment(&c, &out).unwrap();
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest.mode, mode);
        assert_eq!(manifest.variants[0].stages, want);
        assert_eq!(manifest.master_seed, c.seed);
        assert_eq!(manifest.stage_seeds.len(), 5);
        assert!(manifest.config.output_dir.is_none());
        for f in &manifest.files {
            assert!(out.join(f).is_file(), "{f}");
        }
    }
}

#[test]
fn stage_failure_leaves_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("one-class.csv");
    let mut text = String::from("pkts,bytes,dur,proto,state,spkts,dpkts,sbytes,dbytes,rate,srate,drate,attack\n");
    for i in 0..20 {
        text += &format!("{},{},1.0,tcp,CON,1,1,10,10,1.0,1.0,1.0,1\n", 2 + i, 20 + i);
    }
    fs::write(&csv, text).unwrap();
    let c = ExperimentConfig {
        input: Some(InputSource::Csv { path: csv, schema: None }),
        models: vec![ModelSpec::Gnb],
        cv_folds: 0,
        ..Default::default()
    };
    let out = tmp.path().join("out");
    let err = run_experiment(&c, &out).unwrap_err();
    assert!(!err.is_validation(), "{err}");
    assert!(err.to_string().contains("stage"), "{err}");
    assert!(!out.exists());
    assert!(!out.with_extension("partial").exists());
}

#[test]
fn reports_carry_metrics_roc_and_cv() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(2_000);
    c.models = vec![ModelSpec::Gnb, ModelSpec::Knn { k: 3 }];
    c.cv_folds = 5;
    c.variants = Some(vec![Variant::D1, Variant::D2]);
    c.smote.enabled = true;
    run_experiment(&c, tmp.path().join("r").as_path()).unwrap();
    let dir = tmp.path().join("r");
    for variant in ["d1", "d2"] {
        for model in ["gnb", "knn"] {
            let report: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(dir.join(format!("{variant}/reports/{model}.json"))).unwrap())
                    .unwrap();
            for field in ["accuracy", "precision", "recall", "f1", "roc_auc"] {
                assert!(report["holdout"]["metrics"][field].is_number(), "{variant}/{model} {field}");
            }
            assert_eq!(report["holdout"]["provenance"], "holdout-test");
            assert_eq!(report["cv"]["folds"].as_array().unwrap().len(), 5);
            let roc = fs::read_to_string(dir.join(format!("{variant}/roc/{model}.tsv"))).unwrap();
            assert!(roc.starts_with("fpr\ttpr\n0\t0\n"), "{roc}");
        }
        assert!(dir.join(variant).join("feature_scores.tsv").is_file());
    }
    let summary = fs::read_to_string(dir.join("summary.txt")).unwrap();
    assert_eq!(summary.lines().filter(|l| l.starts_with("gnb\t") || l.starts_with("knn\t")).count(), 4);
}

#[test]
fn config_paths_resolve_against_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("flows.csv"), "x").unwrap();
    fs::write(
        tmp.path().join("exp.toml"),
        "output_dir = \"out\"\n[input]\nsource = \"csv\"\npath = \"flows.csv\"\n[[models]]\nkind = \"gnb\"\n",
    )
    .unwrap();
    let c = ExperimentConfig::load(&tmp.path().join("exp.toml")).unwrap();
    assert_eq!(c.output_dir.as_deref(), Some(tmp.path().join("out").as_path()));
    c.validate().unwrap();
    match c.input {
        Some(InputSource::Csv { path, .. }) => assert_eq!(path, tmp.path().join("flows.csv")),
        other => panic!("{other:?}"),
    }
}
