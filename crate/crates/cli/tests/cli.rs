use std::path::Path;
use std::process::{Command, Output};

use hcrs_core::hog::fixture;
use hcrs_core::imaging::save_image;

fn hcrs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcrs")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hcrs(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_lists_every_subcommand() {
    let text = ok(&["--help"]);
    for sub in ["img-info", "detect", "train-svm", "extract", "cluster", "recommend", "gen-data", "evaluate", "baseline", "sweep"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn unknown_flag_and_subcommand_fail() {
    let out = hcrs(&["evaluate", "--bogus-flag", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus-flag"));
    assert!(!hcrs(&["frobnicate"]).status.success());
}

#[test]
fn missing_input_is_reported() {
    let out = hcrs(&["recommend", "--user", "u"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing --ratings"));
    assert!(!hcrs(&["img-info", "/nonexistent.ppm"]).status.success());
}

#[test]
fn generated_data_evaluates_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let gen = ok(&["gen-data", "--seed", "1", "--users", "60", "--items", "20", "--count", "500", "--out", s(&data)]);
    assert_eq!(gen, "users,items,ratings\n60,20,500\n");

    let eval = ["evaluate", "--data", s(&data), "--seed", "1", "--k", "4", "--neighbors", "10"];
    let first = ok(&eval);
    assert_eq!(first, ok(&eval));
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("k,N,w,scale_factor,seed,mae,pairs"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..5], ["4", "10", "0.5", "5", "1"]);
    assert!(row[5].parse::<f64>().unwrap() > 0.0);

    let base = ok(&["baseline", "--data", s(&data), "--seed", "1", "--neighbors", "10"]);
    let explicit = ok(&["evaluate", "--data", s(&data), "--seed", "1", "--neighbors", "10", "--k", "0", "--weight", "1"]);
    assert_eq!(base, explicit);
}

#[test]
fn config_file_fills_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["gen-data", "--users", "30", "--items", "12", "--count", "200", "--out", s(&data)]);
    let config = dir.path().join("run.json");
    std::fs::write(&config, format!(r#"{{"data": {:?}, "seed": 5, "k": 3, "neighbors": 7}}"#, s(&data))).unwrap();

    let from_file = ok(&["--config", s(&config), "evaluate"]);
    assert!(from_file.lines().nth(1).unwrap().starts_with("3,7,0.5,5,5,"));
    let overridden = ok(&["evaluate", "--config", s(&config), "--seed", "6"]);
    assert!(overridden.lines().nth(1).unwrap().starts_with("3,7,0.5,5,6,"));

    std::fs::write(&config, r#"{"seed": "five"}"#).unwrap();
    assert!(!hcrs(&["--config", s(&config), "evaluate", "--data", s(&data)]).status.success());
}

#[test]
fn sweep_writes_rows_in_grid_order_and_a_chart() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["gen-data", "--users", "40", "--items", "15", "--count", "300", "--out", s(&data)]);
    let (csv, svg) = (dir.path().join("sweep.csv"), dir.path().join("sweep.svg"));
    let args = ["sweep", "--data", s(&data), "--k-list", "2,4,6", "--neighbor-list", "5", "--out", s(&csv), "--svg", s(&svg)];
    let stdout = ok(&args);
    let ks: Vec<&str> = stdout.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["2", "4", "6"]);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), stdout);
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<circle").count(), 3);
    assert_eq!(ok(&args), stdout);
}

#[test]
fn image_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let fx = fixture::patch_fixture(3, 12, 12);
    for (name, set) in [("pos", &fx.positives), ("neg", &fx.negatives)] {
        std::fs::create_dir(root.join(name)).unwrap();
        for (i, img) in set.iter().enumerate() {
            save_image(img, root.join(name).join(format!("{i:02}.ppm"))).unwrap();
        }
    }
    let model = root.join("svm.json");
    let trained = ok(&["train-svm", "--positives", s(&root.join("pos")), "--negatives", s(&root.join("neg")), "--out", s(&model)]);
    assert!(trained.starts_with("positives,negatives,train_accuracy\n12,12,"));

    let items = root.join("items");
    std::fs::create_dir(&items).unwrap();
    for (i, pos) in [0, 1, 2].into_iter().enumerate() {
        let scene = fixture::paste(&fx.flat, &fx.positives[pos], 96, 64);
        save_image(&scene, items.join(format!("shirt{i}.ppm"))).unwrap();
    }
    let scene = items.join("shirt0.ppm");
    assert_eq!(ok(&["img-info", s(&scene)]), "256x256\n");

    let detections = ok(&["detect", "--image", s(&scene), "--model", s(&model), "--threshold", "0", "--stride", "8", "--scales", "1"]);
    let top: Vec<f64> = detections.lines().next().unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(top.len(), 6);
    assert_eq!(&top[..4], [96.0, 64.0, 64.0, 128.0]);

    let features = root.join("features.csv");
    let regions = ok(&["extract", "--images", s(&items), "--model", s(&model), "--out", s(&features)]);
    assert_eq!(regions.lines().count(), 4);
    assert!(regions.contains("shirt1,96,64,64,128,"));

    let groups = root.join("groups.csv");
    let clustered = ok(&["cluster", "--features", s(&features), "--k", "2", "--seed", "1", "--out", s(&groups)]);
    assert!(clustered.starts_with("k,iterations,sse\n2,"));
    assert!(std::fs::read_to_string(&groups).unwrap().starts_with("item_id,g0,g1\n"));
    assert!(root.join("groups.centers.csv").exists() && root.join("groups.centers.json").exists());

    let ratings = root.join("ratings.csv");
    std::fs::write(&ratings, "user_id,item_id,rating\nann,shirt0,5\nbo,shirt0,4\nbo,shirt1,2\nbo,shirt2,5\ncy,shirt1,1\ncy,shirt2,4\n").unwrap();
    let recs = ok(&["recommend", "--ratings", s(&ratings), "--groups", s(&groups), "--user", "ann", "--top", "5"]);
    let mut lines = recs.lines();
    assert_eq!(lines.next(), Some("rank,item_id,prediction"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "1");
    assert!(rows.iter().all(|r| (1.0..=5.0).contains(&r[2].parse::<f64>().unwrap())));
}
