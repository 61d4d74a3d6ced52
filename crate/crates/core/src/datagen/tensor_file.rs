//! Plain-text tensor format.
//!
//! ```text
//! MLPR-TENSOR 1
//! # optional comments anywhere after the first line
//! m n dense|sparse
//! <dense: n^(m-1) lines, one column of n values each>
//! <sparse: one line "nnz", then nnz lines "row col value", 1-based>
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{ColumnCheck, FlattenedTensor};

pub const TENSOR_MAGIC: &str = "MLPR-TENSOR 1";

/// Serializes `tensor`. Dense tensors are written as columns, everything else
/// (including a rank-one term, which is expanded) as triplets. Each comment
/// line is prefixed with `# `.
pub fn write_tensor(tensor: &FlattenedTensor, comments: &[&str]) -> String {
    let mut out = String::new();
    out.push_str(TENSOR_MAGIC);
    out.push('\n');
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let (m, n) = (tensor.order(), tensor.dim());
    if tensor.is_sparse() || tensor.rank_one().is_some() {
        let triplets = tensor.to_triplets();
        let _ = writeln!(out, "{m} {n} sparse");
        let _ = writeln!(out, "{}", triplets.len());
        for (r, c, v) in triplets {
            let _ = writeln!(out, "{} {} {v:?}", r + 1, c + 1);
        }
    } else {
        let _ = writeln!(out, "{m} {n} dense");
        for c in 0..tensor.cols() {
            let col: Vec<String> = tensor.column(c).iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&col.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn save_tensor(path: impl AsRef<Path>, tensor: &FlattenedTensor, comments: &[&str]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_tensor(tensor, comments)).map_err(|e| Error::from(e).in_file(path))
}

pub fn load_tensor(path: impl AsRef<Path>, check: ColumnCheck) -> Result<FlattenedTensor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_tensor(&text, check).map_err(|e| e.in_file(path))
}

fn number<T: std::str::FromStr>(line: usize, token: Option<&str>, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {token:?}")))
}

pub fn parse_tensor(text: &str, check: ColumnCheck) -> Result<FlattenedTensor> {
    let mut all = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match all.next() {
        Some((_, first)) if first == TENSOR_MAGIC => {}
        Some((line, first)) => {
            return Err(Error::parse(line, format!("expected header {TENSOR_MAGIC:?}, found {first:?}")))
        }
        None => return Err(Error::parse(1, "empty file")),
    }
    let mut lines = all.filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, shape) = lines.next().ok_or_else(|| Error::parse(2, "missing shape line"))?;
    let mut tokens = shape.split_whitespace();
    let m: usize = number(line, tokens.next(), "order")?;
    let n: usize = number(line, tokens.next(), "dimension")?;
    let kind = tokens
        .next()
        .ok_or_else(|| Error::parse(line, "missing storage kind"))?;
    if let Some(extra) = tokens.next() {
        return Err(Error::parse(line, format!("unexpected token {extra:?}")));
    }
    if m < 2 || n < 1 {
        return Err(Error::parse(line, format!("invalid shape m={m}, n={n}")));
    }
    let cols = u32::try_from(m - 1)
        .ok()
        .and_then(|e| n.checked_pow(e))
        .ok_or_else(|| Error::parse(line, "n^(m-1) overflows"))?;

    let tensor = match kind {
        "dense" => {
            let mut data = Vec::with_capacity(n * cols);
            for c in 0..cols {
                let (line, text) = lines
                    .next()
                    .ok_or_else(|| Error::parse(line, format!("expected {cols} columns, found {c}")))?;
                let before = data.len();
                for tok in text.split_whitespace() {
                    data.push(number::<f64>(line, Some(tok), "value")?);
                }
                if data.len() - before != n {
                    return Err(Error::parse(
                        line,
                        format!("column has {} values, expected {n}", data.len() - before),
                    ));
                }
            }
            if let Some((extra, _)) = lines.next() {
                return Err(Error::parse(extra, "trailing data after the last column"));
            }
            FlattenedTensor::dense_with(m, n, data, check)?
        }
        "sparse" => {
            let (nnz_line, text) = lines.next().ok_or_else(|| Error::parse(line, "missing nnz line"))?;
            let nnz: usize = number(nnz_line, Some(text), "nnz")?;
            let mut triplets = Vec::with_capacity(nnz);
            for k in 0..nnz {
                let (line, text) = lines
                    .next()
                    .ok_or_else(|| Error::parse(nnz_line, format!("expected {nnz} entries, found {k}")))?;
                let mut t = text.split_whitespace();
                let r: usize = number(line, t.next(), "row")?;
                let c: usize = number(line, t.next(), "column")?;
                let v: f64 = number(line, t.next(), "value")?;
                if t.next().is_some() {
                    return Err(Error::parse(line, "expected \"row col value\""));
                }
                if r == 0 || r > n || c == 0 || c > cols {
                    return Err(Error::parse(line, format!("index ({r}, {c}) outside {n} x {cols}")));
                }
                triplets.push((r - 1, c - 1, v));
            }
            if let Some((extra, _)) = lines.next() {
                return Err(Error::parse(extra, "trailing data after the last entry"));
            }
            FlattenedTensor::sparse_with(m, n, &triplets, None, check)?
        }
        other => return Err(Error::parse(line, format!("unknown storage kind {other:?}"))),
    };
    Ok(tensor)
}
