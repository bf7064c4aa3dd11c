//! CSV persistence: fixed schema, deterministic float text, atomic
//! write-to-temp-then-rename so a failed run never leaves a partial file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use cbmm_core::metrics::RunRecord;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str =
    "iteration,elapsed_s,gap,gap_exact,dist_to_opt,train_loss,test_loss,robust_objective";

/// Shortest decimal text that parses back to the same bits. `Display` for
/// `f64` guarantees this, which is what makes repeated runs byte-identical.
pub fn format_float(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Every column after `iteration`, in header order; empty string for
/// fields the experiment does not populate.
fn record_fields(rec: &RunRecord) -> [String; 7] {
    [
        opt(rec.elapsed_seconds),
        opt(rec.gap),
        if rec.gap.is_some() {
            (rec.gap_exact as u8).to_string()
        } else {
            String::new()
        },
        opt(rec.dist_to_opt),
        opt(rec.train_loss),
        opt(rec.test_loss),
        opt(rec.robust_objective),
    ]
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> CliResult<()> {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for rec in records {
        text.push_str(&rec.iteration.to_string());
        for field in record_fields(rec) {
            text.push(',');
            text.push_str(&field);
        }
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

fn suffixed_columns(suffix: &str) -> String {
    CSV_HEADER
        .split(',')
        .skip(1)
        .map(|c| format!(",{c}{suffix}"))
        .collect()
}

/// Merges two traces on iteration number (missing side left empty) and
/// writes one CSV with `_a`/`_b` suffixed columns.
pub fn write_compare_csv(path: &Path, a: &[RunRecord], b: &[RunRecord]) -> CliResult<()> {
    let mut merged: BTreeMap<usize, (Option<&RunRecord>, Option<&RunRecord>)> = BTreeMap::new();
    for rec in a {
        merged.entry(rec.iteration).or_insert((None, None)).0 = Some(rec);
    }
    for rec in b {
        merged.entry(rec.iteration).or_insert((None, None)).1 = Some(rec);
    }
    let mut text = format!(
        "iteration{}{}\n",
        suffixed_columns("_a"),
        suffixed_columns("_b")
    );
    for (iteration, (ra, rb)) in &merged {
        text.push_str(&iteration.to_string());
        for side in [ra, rb] {
            match side {
                Some(rec) => {
                    for field in record_fields(rec) {
                        text.push(',');
                        text.push_str(&field);
                    }
                }
                None => text.push_str(",,,,,,,"),
            }
        }
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io_err = |e: std::io::Error| CliError::Data(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io_err)?;
    // Temp file in the target directory so the final rename stays on one
    // filesystem and is atomic.
    let mut tmp = NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path)
        .map_err(|e| CliError::Data(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(iteration: usize, gap: Option<f64>) -> RunRecord {
        let mut r = RunRecord::bare(iteration, None);
        r.gap = gap;
        r.gap_exact = gap.is_some();
        r.dist_to_opt = gap.map(|g| g / 2.0);
        r
    }

    #[test]
    fn header_and_empty_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&path, &[rec(1, Some(0.5)), rec(2, None)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "1,,0.5,1,0.25,,,");
        assert_eq!(lines[2], "2,,,,,,,");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn float_text_is_shortest_roundtrip() {
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(2.0), "2");
        let tricky = 0.1 + 0.2;
        assert_eq!(format_float(tricky).parse::<f64>().unwrap(), tricky);
    }

    #[test]
    fn compare_csv_merges_on_iteration() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cmp.csv");
        write_compare_csv(&path, &[rec(1, Some(1.0)), rec(3, Some(0.5))], &[rec(3, Some(0.4))])
            .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("iteration,elapsed_s_a,gap_a,"));
        assert!(lines[0].contains(",elapsed_s_b,gap_b,"));
        assert!(lines[1].starts_with("1,"));
        assert!(lines[1].ends_with(",,,,,,,"), "side b empty: {}", lines[1]);
        assert!(lines[2].starts_with("3,"));
        assert!(lines[2].contains(",0.4,"));
    }

    #[test]
    fn write_creates_parent_directories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/deeper/out.csv");
        write_csv(&path, &[rec(1, None)]).unwrap();
        assert!(path.exists());
    }

    #[test]
    fn rewrite_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.csv");
        let path_b = dir.path().join("b.csv");
        let records = [rec(1, Some(0.3)), rec(2, Some(0.1))];
        write_csv(&path_a, &records).unwrap();
        write_csv(&path_b, &records).unwrap();
        assert_eq!(
            std::fs::read(&path_a).unwrap(),
            std::fs::read(&path_b).unwrap()
        );
    }
}
