//! Plain-CSV dataset interchange.
//!
//! Layout: optional `# key: value` metadata lines, then a `x0,x1,...,x{m-1}`
//! header, then one row of decimal floats per point. Floats are written in
//! Rust's shortest round-trip form, so load(save(c)) reproduces c exactly.

use crate::cloud::{Meta, PointCloud};
use crate::CoreError;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Writes `cloud` to `path`: metadata comments, header, one row per point.
pub fn save_csv(cloud: &PointCloud, path: &Path) -> Result<(), CoreError> {
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(cloud, &mut w).map_err(|e| CoreError::io(path, e))
}

fn write_csv(cloud: &PointCloud, w: &mut impl Write) -> std::io::Result<()> {
    let meta = cloud.meta();
    if let Some(system) = &meta.system {
        writeln!(w, "# system: {system}")?;
    }
    if let Some(seed) = meta.seed {
        writeln!(w, "# seed: {seed}")?;
    }
    for (k, v) in &meta.params {
        writeln!(w, "# {k}: {v}")?;
    }
    write_header(w, "x", cloud.dim())?;
    let mut line = String::new();
    for p in cloud.points() {
        line.clear();
        for (j, v) in p.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            push_f64(&mut line, *v);
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

/// Reads a dataset written by [`save_csv`] (or any file matching the format).
pub fn load_csv(path: &Path) -> Result<PointCloud, CoreError> {
    let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
    let reader = BufReader::new(file);

    let parse_err = |line: usize, msg: String| CoreError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut meta = Meta::default();
    let mut dim: Option<usize> = None;
    let mut data: Vec<f64> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let raw = line.map_err(|e| CoreError::io(path, e))?;
        let line = raw.strip_suffix('\r').unwrap_or(&raw);
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once(':') {
                let (k, v) = (k.trim(), v.trim());
                match k {
                    "system" => meta.system = Some(v.to_string()),
                    "seed" => {
                        meta.seed = Some(v.parse().map_err(|_| {
                            parse_err(lineno, format!("seed `{v}` is not an integer"))
                        })?)
                    }
                    _ => {
                        meta.params.insert(k.to_string(), v.to_string());
                    }
                }
            }
            continue;
        }
        match dim {
            None => {
                let m = parse_header(line)
                    .ok_or_else(|| parse_err(lineno, format!("expected header x0,x1,..., got `{line}`")))?;
                dim = Some(m);
            }
            Some(m) => {
                let mut count = 0;
                for cell in line.split(',') {
                    let v: f64 = cell.trim().parse().map_err(|_| {
                        parse_err(lineno, format!("cell `{}` is not a number", cell.trim()))
                    })?;
                    if !v.is_finite() {
                        return Err(parse_err(lineno, format!("non-finite value `{cell}`")));
                    }
                    data.push(v);
                    count += 1;
                }
                if count != m {
                    return Err(parse_err(
                        lineno,
                        format!("row has {count} cells, header declares {m}"),
                    ));
                }
            }
        }
    }

    let dim = dim.ok_or_else(|| parse_err(0, "file has no header row".into()))?;
    if data.is_empty() {
        return Err(parse_err(0, "file has no data rows".into()));
    }
    PointCloud::from_flat(data, dim, meta)
}

/// Writes a generic numeric table (no metadata, arbitrary column names).
/// Used for latents, loss histories, and plot exports.
pub fn write_table(
    path: &Path,
    headers: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<(), CoreError> {
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let go = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{}", headers.join(","))?;
        let mut line = String::new();
        for row in rows {
            debug_assert_eq!(row.len(), headers.len());
            line.clear();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                push_f64(&mut line, *v);
            }
            writeln!(w, "{line}")?;
        }
        w.flush()
    };
    go(&mut w).map_err(|e| CoreError::io(path, e))
}

/// Reads a table written by [`write_table`]: returns headers and rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CoreError> {
    let file = File::open(path).map_err(|e| CoreError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut headers = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let raw = line.map_err(|e| CoreError::io(path, e))?;
        let line = raw.strip_suffix('\r').unwrap_or(&raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if headers.is_empty() {
            headers = line.split(',').map(|s| s.trim().to_string()).collect();
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| CoreError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: "non-numeric cell".into(),
        })?;
        rows.push(row);
    }
    Ok((headers, rows))
}

fn write_header(w: &mut impl Write, prefix: &str, dim: usize) -> std::io::Result<()> {
    let mut line = String::new();
    for j in 0..dim {
        if j > 0 {
            line.push(',');
        }
        line.push_str(prefix);
        line.push_str(&j.to_string());
    }
    writeln!(w, "{line}")
}

fn parse_header(line: &str) -> Option<usize> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    for (j, c) in cols.iter().enumerate() {
        let rest = c.strip_prefix('x')?;
        if rest.parse::<usize>().ok()? != j {
            return None;
        }
    }
    Some(cols.len())
}

/// Shortest decimal form that parses back to the same f64.
fn push_f64(out: &mut String, v: f64) {
    use std::fmt::Write as _;
    write!(out, "{v}").expect("formatting f64 cannot fail");
}
