use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use compacta::read_frameset_csv;

fn compacta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compacta"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn compacta")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    /// 10 s at 100 Hz with unit impulses every second starting at 0.5 s.
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::from("time,value\n");
        for i in 0..1000 {
            let v = if i % 100 == 50 {
                1.0
            } else {
                0.05 * ((i % 7) as f64)
            };
            body.push_str(&format!("{},{v}\n", i as f64 / 100.0));
        }
        fs::write(dir.path().join("rec.csv"), body).unwrap();
        let peaks: String = (0..10).map(|k| format!("{}\n", 50 + 100 * k)).collect();
        fs::write(dir.path().join("peaks.csv"), format!("index\n{peaks}")).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn config(&self, name: &str, extra: &str) -> String {
        let body = format!(
            "sampling_rate_hz=100\nsignal={}\nout={}\nreport={}\n{extra}",
            self.s("rec.csv"),
            self.s("frames.csv"),
            self.s("report.txt")
        );
        fs::write(self.path(name), body).unwrap();
        self.s(name)
    }
}

fn report_value(path: &Path, key: &str) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from:\n{text}"))
        .to_string()
}

#[test]
fn run_time_slice_counts_frames_that_fit() {
    let f = Fixture::new();
    let peaks = f.s("peaks.csv");
    let cfg = f.config(
        "a.cfg",
        &format!("method=time_slice\nwindow_s=0.8\npeaks={peaks}\n"),
    );
    let o = compacta(&["run", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fs = read_frameset_csv(f.path("frames.csv")).unwrap();
    // the last peak at 950 leaves only 50 samples
    assert_eq!(fs.frame_count(), 9);
    assert_eq!(fs.frame_length(), 80);
    assert_eq!(fs.frame(0)[0], 1.0);
    assert_eq!(report_value(&f.path("report.txt"), "total"), "720");
    assert_eq!(report_value(&f.path("report.txt"), "maer"), "NA");
}

#[test]
fn run_detects_peaks_when_asked() {
    let f = Fixture::new();
    let cfg = f.config(
        "a.cfg",
        "method=rrif\nframe_length=16\ndetect_peaks=true\nmin_height=0.9\n",
    );
    let o = compacta(&["run", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fs = read_frameset_csv(f.path("frames.csv")).unwrap();
    assert_eq!(fs.frame_count(), 9);
    assert_eq!(fs.provenance()[0].anchor_index, 50);
}

#[test]
fn overrides_win_over_the_file() {
    let f = Fixture::new();
    let peaks = f.s("peaks.csv");
    let cfg = f.config(
        "a.cfg",
        &format!("method=time_slice\nwindow_s=0.8\npeaks={peaks}\n"),
    );
    let o = compacta(&[
        "run",
        "--config",
        &cfg,
        "--set",
        "window_s=0.2",
        "--set",
        "label=subject 1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fs = read_frameset_csv(f.path("frames.csv")).unwrap();
    assert_eq!(fs.frame_length(), 20);
    assert_eq!(fs.frame_count(), 10);
    assert_eq!(fs.label(3), "subject 1");
}

#[test]
fn single_peak_rrif_yields_an_empty_dataset() {
    let f = Fixture::new();
    fs::write(f.path("one.csv"), "120\n").unwrap();
    let cfg = f.config(
        "a.cfg",
        &format!("method=rrif\nframe_length=32\npeaks={}\n", f.s("one.csv")),
    );
    let o = compacta(&["run", "--config", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fs = read_frameset_csv(f.path("frames.csv")).unwrap();
    assert_eq!(fs.frame_count(), 0);
    assert_eq!(fs.frame_length(), 32);
    let report = fs::read_to_string(f.path("report.txt")).unwrap();
    assert!(report.contains("note=empty dataset"), "{report}");
    assert_eq!(report_value(&f.path("report.txt"), "total"), "0");
}

#[test]
fn missing_peaks_is_a_peaks_stage_error() {
    let f = Fixture::new();
    let cfg = f.config("a.cfg", "method=time_slice\nwindow_s=0.8\n");
    let o = compacta(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("[peaks]") && err.contains("detect_peaks is off"),
        "{err}"
    );
    assert!(!f.path("frames.csv").exists());
}

#[test]
fn config_errors_are_all_listed() {
    let f = Fixture::new();
    let cfg = f.config(
        "a.cfg",
        "method=time_slice\nwindow_s=0.8\nframe_length=10\neta=1.5\ncolour=red\n",
    );
    let o = compacta(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for needle in [
        "unknown key 'colour'",
        "frame_length not valid for time_slice",
        "eta out of [0,1]",
    ] {
        assert!(err.contains(needle), "missing {needle:?} in {err}");
    }

    let ok = f.config("b.cfg", "method=fixed\nstart_s=1\nduration_s=2\n");
    let o = compacta(&["validate", "--config", &ok]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: method=fixed records=1"));
}

#[test]
fn unreadable_signal_exits_with_io_code() {
    let f = Fixture::new();
    fs::write(f.path("bad.csv"), "1.0\n2.0\noops\n").unwrap();
    let cfg = f.config("a.cfg", "method=fixed\nstart_s=0\nduration_s=0.01\n");
    let o = compacta(&[
        "run",
        "--config",
        &cfg,
        "--set",
        &format!("signal={}", f.s("bad.csv")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));

    let o = compacta(&[
        "run",
        "--config",
        &cfg,
        "--set",
        "signal=/nonexistent/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!f.path("frames.csv").exists() && !f.path("report.txt").exists());
}

#[test]
fn zero_variance_standardization_fails_without_outputs() {
    let f = Fixture::new();
    fs::write(f.path("flat.csv"), "3\n".repeat(200)).unwrap();
    let cfg = f.config(
        "a.cfg",
        "method=fixed\nstart_s=0\nduration_s=1\nstandardize=true\n",
    );
    let o = compacta(&[
        "run",
        "--config",
        &cfg,
        "--set",
        &format!("signal={}", f.s("flat.csv")),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("[standardize]"), "{}", stderr(&o));
    assert!(!f.path("frames.csv").exists() && !f.path("report.txt").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let f = Fixture::new();
    let peaks = f.s("peaks.csv");
    let cfg = f.config(
        "a.cfg",
        &format!("method=rrif\nframe_length=24\npeaks={peaks}\nstandardize=true\neta=0.3\nreport_csv={}\n", f.s("r.csv")),
    );
    let mut seen = Vec::new();
    for _ in 0..2 {
        let o = compacta(&["run", "--config", &cfg]);
        assert!(o.status.success(), "{}", stderr(&o));
        seen.push(["frames.csv", "report.txt", "r.csv"].map(|n| fs::read(f.path(n)).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn subcommands_compose() {
    let f = Fixture::new();
    let o = compacta(&[
        "slice",
        "--method",
        "time_slice",
        "--fs",
        "100",
        "--signal",
        &f.s("rec.csv"),
        "--peaks",
        &f.s("peaks.csv"),
        "--window-s",
        "0.5",
        "--label",
        "s1",
        "--out",
        &f.s("sliced.csv"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = compacta(&[
        "standardize",
        "--data",
        &f.s("sliced.csv"),
        "--out",
        &f.s("std.csv"),
        "--bin-width",
        "exact",
        "--scale",
        "sd",
        "--model",
        &f.s("model.txt"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = fs::read_to_string(f.path("model.txt")).unwrap();
    assert!(model.contains("scale_convention=sd"), "{model}");

    let o = compacta(&[
        "metrics",
        "--data",
        &f.s("std.csv"),
        "--accepted-count",
        "8",
        "--accuracy",
        "0.5",
        "--report",
        &f.s("m.txt"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    // 8 of the 10 frames accepted at 50% accuracy
    assert_eq!(report_value(&f.path("m.txt"), "op"), "0.4");

    let o = compacta(&["inspect", "--data", &f.s("std.csv")]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.contains("frames=10\nframe_length=50\nvalues=500\n"),
        "{text}"
    );
    assert!(
        text.contains("record=rec method=TIME_SLICE frames=10"),
        "{text}"
    );
    assert!(text.contains("labels=1"), "{text}");
}

#[test]
fn slice_rejects_foreign_parameters() {
    let f = Fixture::new();
    let o = compacta(&[
        "slice",
        "--method",
        "fixed",
        "--fs",
        "100",
        "--signal",
        &f.s("rec.csv"),
        "--start-s",
        "0",
        "--duration-s",
        "1",
        "--window-s",
        "0.5",
        "--out",
        &f.s("x.csv"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("--window-s not valid for fixed"),
        "{}",
        stderr(&o)
    );
    assert!(!f.path("x.csv").exists());
}

#[test]
fn maer_against_references() {
    let f = Fixture::new();
    let o = compacta(&[
        "slice",
        "--method",
        "fixed",
        "--fs",
        "100",
        "--signal",
        &f.s("rec.csv"),
        "--start-s",
        "0.5",
        "--duration-s",
        "0.01",
        "--out",
        &f.s("one.csv"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::write(f.path("refs.csv"), "2\n").unwrap();
    let o = compacta(&[
        "metrics",
        "--data",
        &f.s("one.csv"),
        "--references",
        &f.s("refs.csv"),
        "--report",
        &f.s("m.txt"),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let maer: f64 = report_value(&f.path("m.txt"), "maer").parse().unwrap();
    assert!((maer - 0.5).abs() < 1e-9, "{maer}");
}
