//! Text formats for data and covariance files.
//!
//! A datum file:
//!
//! ```text
//! # comments run to the end of the line
//! mode = rational          # or float (the default)
//! space dim=2
//! factor dim=1 c=2 rows=
//!   1 0
//! factor dim=1 c=-1/2 rows=
//!   0 1
//! kernel rows=             # optional, zero when absent
//!   1 0
//!   0 1
//! ```
//!
//! Numbers are decimal literals or fractions `p/q`.  In rational mode they
//! are read exactly.

use crate::error::{CliError, Result};
use ibl_core::linalg::exact::{RatMatrix, Q};
use ibl_core::linalg::{Mat, QuadForm};
use ibl_core::{ExactData, Factor, Problem};
use num_bigint::BigInt;
use num_traits::{Pow, Signed, Zero};
use std::fmt::Write as _;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Float,
    Rational,
}

/// How the kernel block is read: `Pi` takes it as `Q` in `exp(-pi <x, Q x>)`,
/// `Half` as `M` in `exp(-<x, M x> / 2)`, so `Q = M / (2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Pi,
    Half,
}

#[derive(Debug, Clone)]
struct Num {
    text: String,
    line: usize,
}

impl Num {
    fn float(&self) -> Result<f64> {
        let v = match self.text.split_once('/') {
            Some((p, q)) => parse_f64(p, self.line)? / parse_f64(q, self.line)?,
            None => parse_f64(&self.text, self.line)?,
        };
        if !v.is_finite() {
            return Err(CliError::parse(self.line, format!("number `{}` is not finite", self.text)));
        }
        Ok(v)
    }

    fn exact(&self) -> Result<Q> {
        parse_exact(&self.text).ok_or_else(|| CliError::parse(self.line, format!("`{}` is not an exact number", self.text)))
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    f64::from_str(s).map_err(|_| CliError::parse(line, format!("`{s}` is not a number")))
}

/// Exact value of a decimal literal or a fraction of two decimal literals.
pub fn parse_exact(s: &str) -> Option<Q> {
    match s.split_once('/') {
        Some((p, q)) => {
            let q = decimal(q)?;
            (!q.is_zero()).then(|| decimal(p).map(|p| p / q))?
        }
        None => decimal(s),
    }
}

fn decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], i64::from_str(&s[i + 1..]).ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all = format!("{int}{frac}");
    let mut v = Q::from_integer(BigInt::from_str(&all).ok()?);
    let shift = exp - frac.len() as i64;
    let ten = Q::from_integer(BigInt::from(10));
    let scale: Q = Pow::pow(&ten, shift.unsigned_abs());
    if shift >= 0 {
        v *= scale;
    } else {
        v /= scale;
    }
    Some(if neg { -v } else { v })
}

/// Tokens of a header line: the keyword and its `key=value` pairs.
fn header(line: &str, lineno: usize) -> Result<(String, Vec<(String, String)>)> {
    let mut s = line.to_string();
    while s.contains(" =") || s.contains("= ") {
        s = s.replace(" =", "=").replace("= ", "=");
    }
    let mut tokens = s.split_whitespace();
    let keyword = tokens.next().unwrap_or_default().to_string();
    let mut pairs = Vec::new();
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| CliError::parse(lineno, format!("expected key=value, found `{t}`")))?;
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok((keyword, pairs))
}

fn get<'a>(pairs: &'a [(String, String)], key: &str, line: usize) -> Result<&'a str> {
    pairs
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| CliError::parse(line, format!("missing `{key}=`")))
}

fn get_usize(pairs: &[(String, String)], key: &str, line: usize) -> Result<usize> {
    let v = get(pairs, key, line)?;
    usize::from_str(v).map_err(|_| CliError::parse(line, format!("`{key}={v}` is not a dimension")))
}

fn check_keys(pairs: &[(String, String)], allowed: &[&str], line: usize) -> Result<()> {
    match pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(CliError::parse(line, format!("unknown key `{k}`"))),
        None => Ok(()),
    }
}

/// Non-empty lines with comments removed, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn is_data_line(l: &str) -> bool {
    l.starts_with(|c: char| c.is_ascii_digit() || "+-.".contains(c))
}

struct Block {
    line: usize,
    rows: Vec<Vec<Num>>,
}

/// Reads `count` rows of `width` numbers following a header.
fn read_rows<'a>(
    it: &mut std::iter::Peekable<impl Iterator<Item = (usize, &'a str)>>,
    count: usize,
    width: usize,
    header_line: usize,
    what: &str,
) -> Result<Block> {
    let mut rows = Vec::with_capacity(count);
    for r in 0..count {
        let Some(&(line, l)) = it.peek() else {
            return Err(CliError::parse(header_line, format!("{what}: expected {count} rows, found {r}")));
        };
        if !is_data_line(l) {
            return Err(CliError::parse(line, format!("{what}: expected {count} rows, found {r}")));
        }
        it.next();
        let row: Vec<Num> = l.split_whitespace().map(|t| Num { text: t.to_string(), line }).collect();
        if row.len() != width {
            return Err(CliError::parse(line, format!("{what}: expected {width} numbers, found {}", row.len())));
        }
        rows.push(row);
    }
    Ok(Block { line: header_line, rows })
}

struct RawFactor {
    c: Num,
    block: Block,
}

/// Parses a datum file.  Positive exponents must come first.
pub fn parse_problem(text: &str, convention: Convention) -> Result<Problem> {
    let mut it = lines(text).peekable();
    let mut mode = None;
    let mut dim = None;
    let mut factors: Vec<RawFactor> = Vec::new();
    let mut kernel: Option<Block> = None;
    while let Some((line, l)) = it.next() {
        if is_data_line(l) {
            return Err(CliError::parse(line, "numbers outside a block"));
        }
        let (keyword, pairs) = header(l, line)?;
        match keyword.as_str() {
            "mode" | "mode=float" | "mode=rational" => {
                let value = keyword.strip_prefix("mode=").map(str::to_string).or_else(|| {
                    pairs.first().filter(|(k, _)| k.is_empty()).map(|(_, v)| v.clone())
                });
                mode = Some(match value.as_deref() {
                    Some("float") => Mode::Float,
                    Some("rational") => Mode::Rational,
                    _ => return Err(CliError::parse(line, "mode must be `float` or `rational`")),
                });
            }
            "space" => {
                check_keys(&pairs, &["dim"], line)?;
                if dim.is_some() {
                    return Err(CliError::parse(line, "duplicate `space`"));
                }
                dim = Some(get_usize(&pairs, "dim", line)?);
            }
            "factor" => {
                check_keys(&pairs, &["dim", "c", "rows"], line)?;
                let n = dim.ok_or_else(|| CliError::parse(line, "`factor` before `space`"))?;
                let k = get_usize(&pairs, "dim", line)?;
                let c = Num { text: get(&pairs, "c", line)?.to_string(), line };
                let block = read_rows(&mut it, k, n, line, "factor")?;
                factors.push(RawFactor { c, block });
            }
            "kernel" => {
                check_keys(&pairs, &["rows"], line)?;
                let n = dim.ok_or_else(|| CliError::parse(line, "`kernel` before `space`"))?;
                if kernel.is_some() {
                    return Err(CliError::parse(line, "duplicate `kernel`"));
                }
                kernel = Some(read_rows(&mut it, n, n, line, "kernel")?);
            }
            other => return Err(CliError::parse(line, format!("unknown section `{other}`"))),
        }
    }
    let n = dim.ok_or_else(|| CliError::parse(1, "missing `space dim=`"))?;
    let mode = mode.unwrap_or(Mode::Float);

    let mut seen_nonpositive = false;
    for f in &factors {
        let positive = match mode {
            Mode::Float => f.c.float()? > 0.0,
            Mode::Rational => f.c.exact()?.is_positive(),
        };
        if positive && seen_nonpositive {
            return Err(CliError::parse(f.block.line, "factors with positive exponents must come first"));
        }
        seen_nonpositive |= !positive;
    }

    match mode {
        Mode::Float => {
            let mut fs = Vec::with_capacity(factors.len());
            for f in &factors {
                fs.push(Factor::new(float_matrix(&f.block.rows, n)?, f.c.float()?));
            }
            let mut q = match &kernel {
                Some(b) => float_matrix(&b.rows, n)?,
                None => Mat::zeros(n, n),
            };
            if convention == Convention::Half {
                q /= 2.0 * std::f64::consts::PI;
            }
            let line = kernel.as_ref().map_or(1, |b| b.line);
            let q = QuadForm::new(q).map_err(|e| CliError::parse(line, e.to_string()))?;
            Ok(Problem::new(n, fs, q))
        }
        Mode::Rational => {
            if convention == Convention::Half {
                return Err(CliError::parse(1, "the half convention is irrational; use float mode"));
            }
            let mut maps = Vec::with_capacity(factors.len());
            let mut exponents = Vec::with_capacity(factors.len());
            for f in &factors {
                maps.push(exact_matrix(&f.block.rows, n)?);
                exponents.push(f.c.exact()?);
            }
            let kernel_m = match &kernel {
                Some(b) => exact_matrix(&b.rows, n)?,
                None => RatMatrix::zeros(n, n),
            };
            let line = kernel.as_ref().map_or(1, |b| b.line);
            Problem::from_exact(n, ExactData { maps, exponents, kernel: kernel_m })
                .map_err(|e| CliError::parse(line, e.to_string()))
        }
    }
}

fn float_matrix(rows: &[Vec<Num>], n: usize) -> Result<Mat> {
    let mut data = Vec::with_capacity(rows.len() * n);
    for r in rows {
        for x in r {
            data.push(x.float()?);
        }
    }
    Ok(Mat::from_row_slice(rows.len(), n, &data))
}

fn exact_matrix(rows: &[Vec<Num>], n: usize) -> Result<RatMatrix> {
    let mut data = Vec::with_capacity(rows.len() * n);
    for r in rows {
        for x in r {
            data.push(x.exact()?);
        }
    }
    Ok(RatMatrix::from_rows(rows.len(), n, data))
}

/// Writes a datum in the file format; exact data are written as fractions.
pub fn serialize_problem(p: &Problem) -> String {
    let mut out = String::new();
    let n = p.dim;
    match &p.exact {
        Some(e) => {
            out.push_str("mode = rational\n");
            let _ = writeln!(out, "space dim={n}");
            for (m, c) in e.maps.iter().zip(&e.exponents) {
                let _ = writeln!(out, "factor dim={} c={} rows=", m.nrows(), c);
                for i in 0..m.nrows() {
                    write_row(&mut out, m.row(i).iter().map(|x| x.to_string()));
                }
            }
            if !e.kernel.is_zero() {
                out.push_str("kernel rows=\n");
                for i in 0..n {
                    write_row(&mut out, e.kernel.row(i).iter().map(|x| x.to_string()));
                }
            }
        }
        None => {
            out.push_str("mode = float\n");
            let _ = writeln!(out, "space dim={n}");
            for f in &p.factors {
                let _ = writeln!(out, "factor dim={} c={} rows=", f.target_dim(), f.exponent);
                for i in 0..f.map.nrows() {
                    write_row(&mut out, f.map.row(i).iter().map(|x| x.to_string()));
                }
            }
            let q = p.kernel.matrix();
            if q.iter().any(|x| *x != 0.0) {
                out.push_str("kernel rows=\n");
                for i in 0..n {
                    write_row(&mut out, q.row(i).iter().map(|x| x.to_string()));
                }
            }
        }
    }
    out
}

fn write_row(out: &mut String, items: impl Iterator<Item = String>) {
    out.push_str("  ");
    out.push_str(&items.collect::<Vec<_>>().join(" "));
    out.push('\n');
}

/// Covariance of a Gaussian vector split into blocks with exponents `p_k`:
///
/// ```text
/// covariance dim=2 rows=
///   2 1
///   1 2
/// block dim=1 p=2
/// block dim=1 p=-1
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct CdpFile {
    pub sigma: Mat,
    pub blocks: Vec<usize>,
    pub p: Vec<f64>,
}

pub fn parse_cdp(text: &str) -> Result<CdpFile> {
    let mut it = lines(text).peekable();
    let mut sigma = None;
    let mut blocks = Vec::new();
    let mut p = Vec::new();
    while let Some((line, l)) = it.next() {
        if is_data_line(l) {
            return Err(CliError::parse(line, "numbers outside a block"));
        }
        let (keyword, pairs) = header(l, line)?;
        match keyword.as_str() {
            "covariance" => {
                check_keys(&pairs, &["dim", "rows"], line)?;
                if sigma.is_some() {
                    return Err(CliError::parse(line, "duplicate `covariance`"));
                }
                let n = get_usize(&pairs, "dim", line)?;
                let b = read_rows(&mut it, n, n, line, "covariance")?;
                sigma = Some(float_matrix(&b.rows, n)?);
            }
            "block" => {
                check_keys(&pairs, &["dim", "p"], line)?;
                blocks.push(get_usize(&pairs, "dim", line)?);
                p.push(Num { text: get(&pairs, "p", line)?.to_string(), line }.float()?);
            }
            other => return Err(CliError::parse(line, format!("unknown section `{other}`"))),
        }
    }
    let sigma = sigma.ok_or_else(|| CliError::parse(1, "missing `covariance`"))?;
    Ok(CdpFile { sigma, blocks, p })
}
