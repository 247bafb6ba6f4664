//! CSV ingestion and emission.
//!
//! Inputs are comma separated with `#` comment lines. Reals are written with
//! Rust's shortest round-trip formatting so a write/read cycle is bit-exact.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use csv::{QuoteStyle, ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::error::{Error, Result};
use crate::signal::{check_sampling_rate, FrameSet, Method, Provenance, Signal};

const FRAME_META_COLUMNS: [&str; 4] = ["record_id", "anchor_index", "method", "label"];

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(Trim::All)
        .from_reader(file))
}

/// Iterates non-empty records as `(line number, record)`.
pub(crate) fn records(path: &Path) -> Result<Vec<(u64, StringRecord)>> {
    let mut rdr = open_reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!("{other:?}"),
        },
    }
}

pub(crate) fn parse_error(path: &Path, row: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn parse_real(path: &Path, row: u64, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_error(path, row, format!("non-numeric value '{field}'")))?;
    if !v.is_finite() {
        return Err(parse_error(
            path,
            row,
            format!("non-finite value '{field}'"),
        ));
    }
    Ok(v)
}

fn is_numeric_record(rec: &StringRecord) -> bool {
    rec.iter().all(|f| f.parse::<f64>().is_ok())
}

/// Reads a single-lead signal: one value per row, or `time,value` rows.
///
/// A first row that does not parse as numbers is taken as a header.
pub fn read_signal_csv(path: impl AsRef<Path>, sampling_rate_hz: f64) -> Result<Signal> {
    let path = path.as_ref();
    check_sampling_rate(sampling_rate_hz)?;
    let mut rdr = open_reader(path)?;
    let mut rec = StringRecord::new();
    let mut samples = Vec::new();
    let mut width = 0;
    let mut first = true;
    while rdr.read_record(&mut rec).map_err(|e| csv_error(path, e))? {
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        if first {
            first = false;
            if !is_numeric_record(&rec) {
                continue;
            }
        }
        if width == 0 {
            width = rec.len();
            if !(1..=2).contains(&width) {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected 1 or 2 columns, found {width}"),
                ));
            }
        }
        if rec.len() != width {
            return Err(parse_error(
                path,
                line,
                format!("expected {width} columns, found {}", rec.len()),
            ));
        }
        samples.push(parse_real(path, line, &rec[width - 1])?);
    }
    if samples.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    let record_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Signal::new(samples, sampling_rate_hz, record_id)
}

/// Reads one real per row (an optional non-numeric header is skipped).
pub fn read_values_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut rows = records(path)?;
    if rows.first().is_some_and(|(_, r)| !is_numeric_record(r)) {
        rows.remove(0);
    }
    rows.iter()
        .map(|(line, rec)| {
            if rec.len() != 1 {
                return Err(parse_error(path, *line, "expected a single column"));
            }
            parse_real(path, *line, &rec[0])
        })
        .collect()
}

/// Serializes a frame set to CSV text.
pub fn frameset_to_csv(fs: &FrameSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * (fs.values().len() + 4 * fs.frame_count() + 8));
    let mut header: Vec<String> = FRAME_META_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..fs.frame_length()).map(|j| format!("v{j}")));
    write_row(&mut out, &header);

    let mut row: Vec<String> = Vec::with_capacity(fs.frame_length() + 4);
    for (i, (frame, prov)) in fs.frames().zip(fs.provenance()).enumerate() {
        row.clear();
        row.push(prov.record_id.clone());
        row.push(prov.anchor_index.to_string());
        row.push(prov.method.tag().to_string());
        row.push(fs.label(i).to_string());
        row.extend(frame.iter().map(|v| v.to_string()));
        write_row(&mut out, &row);
    }
    out
}

// A row whose first field starts with '#' is fully quoted so readers do not
// mistake it for a comment line.
fn write_row(out: &mut Vec<u8>, fields: &[String]) {
    let style = if fields.first().is_some_and(|f| f.starts_with('#')) {
        QuoteStyle::Always
    } else {
        QuoteStyle::Necessary
    };
    let mut w = WriterBuilder::new()
        .quote_style(style)
        .buffer_capacity(1024)
        .from_writer(out);
    w.write_record(fields).expect("in-memory write");
    w.flush().expect("in-memory flush");
}

pub fn write_frameset_csv(fs: &FrameSet, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &frameset_to_csv(fs))
}

pub fn read_frameset_csv(path: impl AsRef<Path>) -> Result<FrameSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(file);
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    if header.len() <= FRAME_META_COLUMNS.len()
        || header
            .iter()
            .zip(FRAME_META_COLUMNS)
            .any(|(h, want)| h != want)
    {
        return Err(parse_error(
            path,
            1,
            "header must be record_id,anchor_index,method,label,v0,...",
        ));
    }
    let frame_length = header.len() - FRAME_META_COLUMNS.len();
    let mut fs = FrameSet::new(frame_length)?;
    let mut labels = Vec::new();
    let mut frame = Vec::with_capacity(frame_length);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let anchor_index = rec[1]
            .parse::<usize>()
            .map_err(|_| parse_error(path, line, format!("bad anchor_index '{}'", &rec[1])))?;
        let method: Method = rec[2]
            .parse()
            .map_err(|e: Error| parse_error(path, line, e.to_string()))?;
        frame.clear();
        for field in rec.iter().skip(FRAME_META_COLUMNS.len()) {
            frame.push(parse_real(path, line, field)?);
        }
        fs.push(
            &frame,
            Provenance {
                record_id: rec[0].to_string(),
                anchor_index,
                method,
            },
        )?;
        labels.push(rec[3].to_string());
    }
    fs.set_labels(Some(labels))?;
    Ok(fs)
}

/// Writes `bytes` to a temporary sibling and renames it into place, so a
/// failed write never leaves a truncated file at `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_sibling(path);
    let result = File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}
