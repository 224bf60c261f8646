//! Dataset files: a CSV with header `y,x1,...,xp` and a `key = value`
//! metadata sidecar holding the generating config.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::dgp::{Dataset, DgpConfig};
use crate::error::{Error, Result};
use crate::kv::{self, KvMap};
use crate::linalg::Matrix;

/// Writes `ds` with LF line endings and 17 significant digits.
pub fn write_dataset_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let header: Vec<String> = std::iter::once("y".to_string())
        .chain((1..=ds.p()).map(|j| format!("x{j}")))
        .collect();
    w.write_record(&header).map_err(csv_io)?;
    for t in 0..ds.n() {
        let row: Vec<String> = std::iter::once(ds.y[t])
            .chain(ds.x.row(t).iter().copied())
            .map(|v| format!("{v:.16e}"))
            .collect();
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 0,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Parses a dataset. Errors name the one-based line and column of the first
/// bad cell.
pub fn read_dataset_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec.map_err(parse_error)?,
        None => return Err(Error::EmptyInput),
    };
    let p = header.len().saturating_sub(1);
    for (i, name) in header.iter().enumerate() {
        let expected = if i == 0 { "y".to_string() } else { format!("x{i}") };
        if name != expected {
            return Err(Error::Parse {
                line: 1,
                column: i + 1,
                message: format!("expected header `{expected}`, found `{name}`"),
            });
        }
    }
    if p == 0 {
        return Err(Error::Parse {
            line: 1,
            column: 2,
            message: "no covariate columns".into(),
        });
    }
    let mut y = Vec::new();
    let mut data = Vec::new();
    for rec in records {
        let rec = rec.map_err(parse_error)?;
        let line = rec.position().map_or(0, |pos| pos.line() as usize);
        if rec.len() != p + 1 {
            return Err(Error::Parse {
                line,
                column: rec.len().min(p + 1) + 1,
                message: format!("expected {} fields, found {}", p + 1, rec.len()),
            });
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| Error::Parse {
                line,
                column: c + 1,
                message: format!("`{field}` is not a finite number"),
            })?;
            if c == 0 {
                y.push(v);
            } else {
                data.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = y.len();
    Dataset::new(y, Matrix::new(n, p, data)?)
}

fn parse_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Parse {
            line,
            column: (len.min(expected_len) + 1) as usize,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Parse {
            line,
            column: 1,
            message: format!("{other:?}"),
        },
    }
}

/// `data.csv` → `data.csv.meta`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// The generating config plus the one-based true active set.
pub fn render_sidecar(cfg: &DgpConfig, ds: &Dataset) -> String {
    let mut kv = cfg.to_kv();
    if let Some(active) = &ds.true_active {
        let one_based: Vec<usize> = active.iter().map(|j| j + 1).collect();
        kv.insert("true_active", kv::join(&one_based));
    }
    format!("# generated by sparse-coint {}\n{}", env!("CARGO_PKG_VERSION"), kv.render())
}

/// Reads a sidecar back into its config and zero-based true active set.
pub fn parse_sidecar(text: &str) -> Result<(DgpConfig, Option<Vec<usize>>)> {
    let kv = KvMap::parse(text)?;
    let cfg = DgpConfig::from_kv(&kv)?;
    let active = kv
        .get_list::<usize>("true_active")?
        .map(|v| {
            v.into_iter()
                .map(|j| j.checked_sub(1).ok_or_else(|| Error::invalid("true_active", "indices are one-based")))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok((cfg, active))
}

/// Writes the CSV and its sidecar, creating parent directories.
pub fn save_dataset(path: &Path, cfg: &DgpConfig, ds: &Dataset) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    write_dataset_csv(ds, &mut buf)?;
    fs::write(path, buf)?;
    fs::write(sidecar_path(path), render_sidecar(cfg, ds))?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset_csv(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate, SignalPreset};

    #[test]
    fn csv_round_trip_is_exact() {
        let cfg = DgpConfig::simulation_design(&SignalPreset::Strong, 30, 6, 0.5, 3);
        let ds = simulate(&cfg).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("y,x1,x2,x3,x4,x5,x6\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 31);
        let back = read_dataset_csv(&buf[..]).unwrap();
        assert_eq!(back.y, ds.y);
        assert_eq!(back.x, ds.x);
    }

    #[test]
    fn parse_errors_locate_the_cell() {
        let err = read_dataset_csv("y,x1\n1,2\n3,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 2, .. }), "{err:?}");
        let err = read_dataset_csv("y,x2\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 2, .. }), "{err:?}");
        let err = read_dataset_csv("y,x1\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = read_dataset_csv("y,x1\n1,inf\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 2, .. }), "{err:?}");
        assert!(matches!(read_dataset_csv("".as_bytes()), Err(Error::EmptyInput)));
    }

    #[test]
    fn sidecar_round_trip() {
        let cfg = DgpConfig::simulation_design(&SignalPreset::Weak, 40, 7, 1.0, 11);
        let ds = simulate(&cfg).unwrap();
        let (back, active) = parse_sidecar(&render_sidecar(&cfg, &ds)).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(active, ds.true_active);
        assert_eq!(sidecar_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.meta"));
    }
}
