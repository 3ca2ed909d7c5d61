use std::collections::HashMap;
use std::process::{Command, Output};

fn pdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(csv_text: &[u8]) -> Vec<HashMap<String, String>> {
    let mut r = csv::Reader::from_reader(csv_text);
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            header
                .iter()
                .zip(rec.unwrap().iter())
                .map(|(k, v)| (k.to_owned(), v.to_owned()))
                .collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

#[test]
fn media_list_has_the_five_media() {
    let out = pdl(&["media", "list"]);
    assert!(out.status.success());
    let table = rows(&out.stdout);
    let labels: Vec<_> = table.iter().map(|r| r["label"].as_str()).collect();
    assert_eq!(
        labels,
        ["nitrogen", "air", "oxygen", "carbon dioxide", "smf28e+"]
    );
    assert_eq!(num(&table[4], "beta_fs2_per_m"), -11500.0);
}

#[test]
fn broadening_in_air_at_200_km() {
    let out = pdl(&["broadening", "--l-km", "0,200"]);
    assert!(out.status.success());
    let table = rows(&out.stdout);
    assert_eq!(table.len(), 2);
    assert_eq!(num(&table[0], "gamma"), 1.0);
    assert!((num(&table[1], "gamma") - 1.0243).abs() < 1e-4);
    assert_eq!(table[1]["method"], "closed_form");
}

#[test]
fn numeric_broadening_agrees_with_closed_form() {
    let args = |m| pdl(&["broadening", "--l-km", "200", "--method", m]);
    let (a, b) = (args("closed-form"), args("numeric"));
    assert!(a.status.success() && b.status.success());
    let (a, b) = (
        num(&rows(&a.stdout)[0], "gamma"),
        num(&rows(&b.stdout)[0], "gamma"),
    );
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn keyrate_at_zero_length_is_loss_free() {
    let out = pdl(&["keyrate", "--l-km", "0"]);
    assert!(out.status.success());
    let row = &rows(&out.stdout)[0];
    assert_eq!(row["medium"], "smf28e+");
    assert!(num(row, "qber") < 1e-12);
    // the CSV carries nine significant figures
    assert!((num(row, "key_rate") - 0.5 * num(row, "p_sig")).abs() < 1e-8);
}

#[test]
fn keyrate_takes_several_windows() {
    let out = pdl(&["keyrate", "--l-km", "0,5", "--window-ps", "5,50,150"]);
    assert!(out.status.success());
    assert_eq!(rows(&out.stdout).len(), 6);
}

#[test]
fn unknown_medium_is_a_usage_error() {
    let out = pdl(&["broadening", "--medium", "vacuum", "--l-km", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("vacuum") && msg.contains("smf28e+"), "{msg}");
}

#[test]
fn missing_lengths_are_a_usage_error() {
    assert_eq!(pdl(&["broadening"]).status.code(), Some(1));
    assert_eq!(
        pdl(&["broadening", "--sigma-ps", "-1", "--l-km", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sweep_lists_every_preset() {
    let out = pdl(&["sweep", "--list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<_> = text
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(names.len(), 24);
    assert_eq!(names[0], "fig1");
    assert_eq!(names[23], "fig24");
}

#[test]
fn sweep_config_writes_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    let csv_path = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        r#"{"experiment": "smoke", "metric": "broadening", "mode": "sech",
            "chirp": [0, -1], "media": ["air"], "l-min-km": 0, "l-max-km": 100,
            "sigma-ps": [4.25], "l-points": 5}"#,
    )
    .unwrap();
    let out = pdl(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let table = rows(&std::fs::read(&csv_path).unwrap());
    assert_eq!(table.len(), 10);
    assert!(table
        .iter()
        .all(|r| r["experiment"] == "smoke" && r["error"].is_empty()));
}

#[test]
fn presets_run_on_a_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig7", "fig10", "fig16", "fig20"] {
        let path = dir.path().join(format!("{name}.csv"));
        let out = pdl(&[
            "sweep",
            "--preset",
            name,
            "--l-points",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let table = rows(&std::fs::read(&path).unwrap());
        assert!(!table.is_empty(), "{name}");
        assert!(table.iter().all(|r| r["experiment"] == name), "{name}");
    }
}
