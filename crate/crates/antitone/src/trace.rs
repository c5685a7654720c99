//! CSV traces: header `iter,y1,...,yn`, one row per iterate.

use std::io::Write;
use std::path::{Path, PathBuf};

use antitone_core::vecorder::OrderedVector;

use crate::CliError;

pub fn write_trace<W: Write>(out: W, iterates: &[OrderedVector]) -> Result<(), CliError> {
    let n = iterates.first().map_or(0, |y| y.len());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_string()];
    header.extend((1..=n).map(|i| format!("y{i}")));
    w.write_record(&header)?;
    for (r, y) in iterates.iter().enumerate() {
        let mut row = vec![r.to_string()];
        row.extend(y.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(path: &Path, iterates: &[OrderedVector]) -> Result<(), CliError> {
    write_trace(std::fs::File::create(path)?, iterates)
}

/// `out.csv` → `out.lower.csv`.
pub fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_rows() {
        let ys = vec![OrderedVector::from_slice(&[1.0, 2.5]).unwrap(), OrderedVector::from_slice(&[0.1, 3.0]).unwrap()];
        let mut buf = Vec::new();
        write_trace(&mut buf, &ys).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iter,y1,y2\n0,1,2.5\n1,0.1,3\n");
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("dir/out.csv"), "lower"), PathBuf::from("dir/out.lower.csv"));
        assert_eq!(sibling(Path::new("trace"), "upper"), PathBuf::from("trace.upper"));
    }
}
