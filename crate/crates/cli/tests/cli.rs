use std::path::Path;
use std::process::{Command, Output};

use kautz_cli::doc::{
    from_json, read_csv, spectra_from_csv, NecklaceDocument, SpectrumDocument, TablesDocument,
    VerifyDocument,
};
use kautz_core::transfer::CalibrationReport;

fn kautz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kautz"))
        .args(args)
        .env_remove("KAUTZ_EDGE_CAP")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn counts(doc: &SpectrumDocument) -> Vec<(usize, &str)> {
    doc.counts.iter().map(|(k, v)| (*k, v.as_str())).collect()
}

#[test]
fn spectrum_json() {
    let out = kautz(&[
        "spectrum", "--d", "2", "--D", "3", "--kind", "rho", "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    let doc: SpectrumDocument = from_json(&stdout(&out)).unwrap();
    assert_eq!(counts(&doc), [(1, "6"), (2, "6"), (3, "12")]);
    assert_eq!(doc.meta.d, 2);
    assert_eq!(doc.meta.diameter, Some(3));
    assert_eq!(doc.meta.method, "oracle");

    let out = kautz(&["spectrum", "--d", "2", "--D", "3", "--kind", "sigma"]);
    let doc: SpectrumDocument = from_json(&stdout(&out)).unwrap();
    assert_eq!(counts(&doc), [(1, "24"), (2, "42"), (3, "66")]);
}

#[test]
fn spectrum_methods_agree() {
    for kind in ["rho", "sigma"] {
        let a = kautz(&[
            "spectrum", "--d", "3", "--D", "6", "--kind", kind, "--method", "oracle", "--format",
            "csv",
        ]);
        let b = kautz(&[
            "spectrum",
            "--d",
            "3",
            "--D",
            "6",
            "--kind",
            kind,
            "--method",
            "recursion",
            "--format",
            "csv",
        ]);
        assert_eq!(code(&a), 0);
        assert_eq!(stdout(&a), stdout(&b));
    }
}

#[test]
fn csv_parses_back() {
    let out = kautz(&["spectrum", "--d", "2", "--D", "9", "--format", "csv"]);
    let text = stdout(&out);
    assert!(text.starts_with("d,D,k,kind,count\n"));
    let spectra = spectra_from_csv(&read_csv(text.as_bytes()).unwrap()).unwrap();
    let json = kautz(&["spectrum", "--d", "2", "--D", "9"]);
    let doc: SpectrumDocument = from_json(&stdout(&json)).unwrap();
    assert_eq!(spectra, vec![doc.spectrum().unwrap()]);
}

#[test]
fn output_is_byte_stable() {
    let args = ["spectrum", "--d", "2", "--D", "8", "--kind", "sigma"];
    assert_eq!(kautz(&args).stdout, kautz(&args).stdout);
}

#[test]
fn domain_errors_are_usage_errors() {
    let out = kautz(&["spectrum", "--d", "1", "--D", "3", "--kind", "rho"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("d must be ≥ 2"));
    assert!(out.stdout.is_empty());
    assert_eq!(code(&kautz(&["spectrum", "--d", "2"])), 2);
    assert_eq!(
        code(&kautz(&[
            "spectrum", "--d", "2", "--D", "3", "--kind", "delta"
        ])),
        2
    );
}

#[test]
fn resource_caps() {
    let out = kautz(&["spectrum", "--d", "2", "--D", "24"]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(
        err.contains("edge cap")
            && err.contains("--override-cap")
            && err.contains("KAUTZ_EDGE_CAP"),
        "{err}"
    );

    let out = Command::new(env!("CARGO_BIN_EXE_kautz"))
        .args(["spectrum", "--d", "2", "--D", "4"])
        .env("KAUTZ_EDGE_CAP", "20")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let out = Command::new(env!("CARGO_BIN_EXE_kautz"))
        .args(["spectrum", "--d", "2", "--D", "4", "--override-cap"])
        .env("KAUTZ_EDGE_CAP", "20")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn delta_oracle() {
    let out = kautz(&["delta", "--d", "2", "--D", "11", "--method", "oracle"]);
    assert_eq!(code(&out), 0);
    let doc: SpectrumDocument = from_json(&stdout(&out)).unwrap();
    let window: Vec<&str> = (7..=10).map(|k| doc.counts[&k].as_str()).collect();
    assert_eq!(window, ["6", "18", "96", "384"]);
    assert!(doc.per_start.is_none());

    let out = kautz(&["delta", "--d", "2", "--D", "3"]);
    let doc: SpectrumDocument = from_json(&stdout(&out)).unwrap();
    assert_eq!(counts(&doc), [(1, "0"), (2, "0"), (3, "12")]);
}

#[test]
fn delta_transfer_needs_calibration() {
    let out = kautz(&["delta", "--d", "2", "--D", "10", "--method", "transfer"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("calibrate"));
}

fn calibrate(dir: &Path, d_max: &str) -> (Output, String) {
    let path = dir.join("schedule.json");
    let out = kautz(&[
        "calibrate",
        "--d",
        "2",
        "--D-max",
        d_max,
        "--out",
        path.to_str().unwrap(),
    ]);
    let written = std::fs::read_to_string(&path).expect("report is written even on failure");
    (out, written)
}

#[test]
fn calibration_fails_but_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let (out, first) = calibrate(dir.path(), "12");
    assert_eq!(code(&out), 5);
    assert!(stdout(&out).lines().count() == 17);
    let report = CalibrationReport::from_json(&first).unwrap();
    assert_eq!(report.tested_range, [2, 12]);
    assert_eq!(report.candidates.len(), 16);
    assert!(report.chosen().is_none());
    let (_, second) = calibrate(dir.path(), "12");
    assert_eq!(first, second);

    // The unresolved report is not accepted as a schedule.
    let path = dir.path().join("schedule.json");
    let out = kautz(&[
        "delta",
        "--d",
        "2",
        "--D",
        "10",
        "--method",
        "transfer",
        "--schedule",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn hand_frozen_schedule_runs_the_transfer_route() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text) = calibrate(dir.path(), "6");
    let mut report = CalibrationReport::from_json(&text).unwrap();
    let pick = report
        .candidates
        .iter()
        .position(|c| c.descriptor == "s=D-k+j;as-written;mask-after;row+0")
        .unwrap();
    report.candidates[pick].chosen = true;
    let path = dir.path().join("frozen.json");
    std::fs::write(&path, report.to_json().unwrap()).unwrap();

    let out = kautz(&[
        "delta",
        "--d",
        "2",
        "--D",
        "10",
        "--method",
        "transfer",
        "--schedule",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: SpectrumDocument = from_json(&stdout(&out)).unwrap();
    assert_eq!(
        doc.meta.schedule.as_deref(),
        Some("s=D-k+j;as-written;mask-after;row+0")
    );
    let starts = doc.per_start.as_ref().unwrap();
    assert_eq!(starts.len(), 10);
    assert!(starts.values().all(|v| v.len() == 6));
    // Δ is 6 × the first start's count.
    for (k, v) in starts {
        let first: u64 = v[0].parse().unwrap();
        assert_eq!(doc.counts[k], (6 * first).to_string());
    }

    // Custom masks for d = 3 are needed; none are built in.
    let out = kautz(&[
        "delta",
        "--d",
        "3",
        "--D",
        "4",
        "--method",
        "transfer",
        "--schedule",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn custom_masks_file() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text) = calibrate(dir.path(), "4");
    let mut report = CalibrationReport::from_json(&text).unwrap();
    report.d = 3;
    report.candidates[0].chosen = true;
    let schedule = dir.path().join("frozen.json");
    std::fs::write(&schedule, report.to_json().unwrap()).unwrap();
    let ones = vec![1u8; 12];
    let mut masks = std::collections::BTreeMap::new();
    masks.insert(0usize, vec![0u8; 12]);
    masks.insert(1, ones.clone());
    let masks_path = dir.path().join("masks.json");
    std::fs::write(&masks_path, serde_json::to_string(&masks).unwrap()).unwrap();
    let out = kautz(&[
        "delta",
        "--d",
        "3",
        "--D",
        "4",
        "--method",
        "transfer",
        "--schedule",
        schedule.to_str().unwrap(),
        "--masks",
        masks_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: SpectrumDocument = from_json(&stdout(&out)).unwrap();
    // Unmasked walks: 3^k continuations from each of the 12 states.
    assert_eq!(doc.counts[&1], "36");
    assert_eq!(doc.counts[&2], "108");
}

#[test]
fn verify_passes() {
    for (d, d_max) in [("2", "10"), ("3", "6")] {
        let out = kautz(&["verify", "--d", d, "--D-max", d_max]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let doc: VerifyDocument = from_json(&stdout(&out)).unwrap();
        assert!(doc.pass && doc.failures.is_empty() && doc.checked > 0);
    }
}

#[test]
fn verify_catches_a_corrupted_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = kautz(&["tables", "--d", "2", "--D-max", "7"]);
    assert_eq!(code(&out), 0);
    let mut doc: TablesDocument = from_json(&stdout(&out)).unwrap();
    let path = dir.path().join("tables.json");
    std::fs::write(&path, stdout(&out)).unwrap();
    assert_eq!(
        code(&kautz(&["verify", "--tables", path.to_str().unwrap()])),
        0
    );

    let cell = doc.rows.get_mut(&5).unwrap().sigma.get_mut(&3).unwrap();
    *cell = (cell.parse::<u64>().unwrap() + 1).to_string();
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = kautz(&["verify", "--tables", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let report: VerifyDocument = from_json(&stdout(&out)).unwrap();
    assert!(!report.pass);
    assert!(
        report.failures.iter().all(|r| r.row == 5 || r.row == 6),
        "{:?}",
        report.failures
    );
    assert!(stderr(&out).contains("SigmaRecursion"));
}

#[test]
fn tables_methods_agree_on_cells() {
    let oracle = kautz(&["tables", "--d", "2", "--D-max", "8", "--method", "oracle"]);
    let recursion = kautz(&["tables", "--d", "2", "--D-max", "8"]);
    let a: TablesDocument = from_json(&stdout(&oracle)).unwrap();
    let b: TablesDocument = from_json(&stdout(&recursion)).unwrap();
    assert!(a.table_set().unwrap().same_cells(&b.table_set().unwrap()));
    assert_eq!(
        b.rows[&8].provenance[&kautz_core::oracle::SpectrumKind::Rho][&8].to_string(),
        "closure"
    );
}

#[test]
fn necklace_commands() {
    let out = kautz(&["necklace", "--n", "4", "--q", "3", "--method", "formula"]);
    let doc: NecklaceDocument = from_json(&stdout(&out)).unwrap();
    assert_eq!(
        (
            doc.primitive_count.as_str(),
            doc.oriented_edge_count.as_str()
        ),
        ("3", "12")
    );

    let out = kautz(&["necklace", "--n", "2", "--q", "3", "--method", "enumerate"]);
    let doc: NecklaceDocument = from_json(&stdout(&out)).unwrap();
    assert_eq!(doc.primitive_count, "3");

    let out = kautz(&["necklace", "--n", "2", "--q", "3", "--method", "formula"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("enumerate"));

    for n in 3..=9 {
        let n = n.to_string();
        let f = kautz(&["necklace", "--n", &n, "--q", "4"]);
        let e = kautz(&["necklace", "--n", &n, "--q", "4", "--method", "enumerate"]);
        let f: NecklaceDocument = from_json(&stdout(&f)).unwrap();
        let e: NecklaceDocument = from_json(&stdout(&e)).unwrap();
        assert_eq!(f.primitive_count, e.primitive_count);
    }
}

#[test]
fn search_masks_reports_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("masks.json");
    let out = kautz(&[
        "search-masks",
        "--d",
        "2",
        "--D-max",
        "9",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 5);
    assert!(!out_path.exists());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report["masks"].is_null());
}
