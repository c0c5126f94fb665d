//! Text formats for potentials, boundary matrices and scattering data.
//!
//! Lines starting with `#` and blank lines are ignored. Numbers are
//! comma-separated, complex entries are written as `re,im` pairs and every
//! float is printed with 17 significant digits so that write-then-read is
//! bit-exact.

use std::fmt::Write as _;

use marchenko::{BoundStateData, CMat, KGrid, PotentialSpec, ScatteringData, C64};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_float).collect::<Vec<_>>().join(",")
}

/// Non-comment lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    eof: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self { inner: it.peekable(), eof: text.lines().count() + 1 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.inner.next() {
            Some((n, l)) => Ok((n, l)),
            None => err(self.eof, format!("unexpected end of file, expected {what}")),
        }
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, l)| *l)
    }

    fn floats(&mut self, what: &str, count: usize) -> Result<(usize, Vec<f64>), ParseError> {
        let (n, l) = self.next(what)?;
        let v = parse_floats(n, l)?;
        if v.len() != count {
            return err(n, format!("{what}: expected {count} values, found {}", v.len()));
        }
        Ok((n, v))
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        match self.inner.next() {
            Some((n, _)) => err(n, "trailing content"),
            None => Ok(()),
        }
    }
}

fn parse_floats(line: usize, text: &str) -> Result<Vec<f64>, ParseError> {
    text.split(',')
        .map(|f| {
            let f = f.trim();
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => err(line, format!("non-finite value {f:?}")),
                Err(_) => err(line, format!("invalid number {f:?}")),
            }
        })
        .collect()
}

fn parse_usizes(line: usize, text: &str, count: usize) -> Result<Vec<usize>, ParseError> {
    let v: Vec<usize> = text
        .split(',')
        .map(|f| f.trim().parse::<usize>().or_else(|_| err(line, format!("invalid integer {:?}", f.trim()))))
        .collect::<Result<_, _>>()?;
    if v.len() != count {
        return err(line, format!("expected {count} integers, found {}", v.len()));
    }
    Ok(v)
}

fn matrix_from_row_major(n: usize, v: &[f64]) -> CMat {
    CMat::from_fn(n, n, |i, j| {
        let o = 2 * (i * n + j);
        C64::new(v[o], v[o + 1])
    })
}

fn row_major(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    (0..n).flat_map(|i| (0..n).flat_map(move |j| [m[(i, j)].re, m[(i, j)].im])).collect()
}

fn matrix_rows(out: &mut String, m: &CMat) {
    for i in 0..m.nrows() {
        let row = (0..m.ncols()).flat_map(|j| [m[(i, j)].re, m[(i, j)].im]);
        writeln!(out, "{}", join(row)).unwrap();
    }
}

fn read_matrix_rows(lines: &mut Lines<'_>, n: usize, what: &str) -> Result<CMat, ParseError> {
    let mut values = Vec::with_capacity(2 * n * n);
    for _ in 0..n {
        values.extend(lines.floats(what, 2 * n)?.1);
    }
    Ok(matrix_from_row_major(n, &values))
}

fn positive_dimension(line: usize, n: usize) -> Result<usize, ParseError> {
    if n == 0 {
        return err(line, "matrix size must be positive");
    }
    Ok(n)
}

/// Sampled potential: `(x_j, Q(x_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSamples {
    pub x: Vec<f64>,
    pub q: Vec<CMat>,
}

impl PotentialSamples {
    pub fn n(&self) -> usize {
        self.q.first().map_or(0, |q| q.nrows())
    }

    /// Identically zero samples give the exact free potential.
    pub fn to_spec(&self) -> marchenko::Result<PotentialSpec> {
        if !self.q.is_empty() && self.q.iter().all(|m| m.iter().all(|v| *v == C64::new(0.0, 0.0))) {
            return Ok(PotentialSpec::zero(self.n()));
        }
        PotentialSpec::sampled(self.x.clone(), self.q.clone())
    }
}

pub fn write_potential(p: &PotentialSamples) -> String {
    let n = p.n();
    let mut out = String::from("# potential: x, then Q row-major as re,im pairs\n");
    writeln!(out, "{n},{}", p.x.len()).unwrap();
    for (x, q) in p.x.iter().zip(&p.q) {
        writeln!(out, "{},{}", fmt_float(*x), join(row_major(q))).unwrap();
    }
    out
}

pub fn read_potential(text: &str) -> Result<PotentialSamples, ParseError> {
    let mut lines = Lines::new(text);
    let (h, header) = lines.next("header \"n,points\"")?;
    let dims = parse_usizes(h, header, 2)?;
    let n = positive_dimension(h, dims[0])?;
    let points = dims[1];
    let mut x = Vec::with_capacity(points);
    let mut q = Vec::with_capacity(points);
    for _ in 0..points {
        let (_, v) = lines.floats("potential sample", 1 + 2 * n * n)?;
        x.push(v[0]);
        q.push(matrix_from_row_major(n, &v[1..]));
    }
    lines.finish()?;
    Ok(PotentialSamples { x, q })
}

pub fn write_boundary(u: &CMat) -> String {
    let mut out = String::from("# boundary matrix U: n rows of re,im pairs\n");
    writeln!(out, "{}", u.nrows()).unwrap();
    matrix_rows(&mut out, u);
    out
}

pub fn read_boundary(text: &str) -> Result<CMat, ParseError> {
    let mut lines = Lines::new(text);
    let (h, header) = lines.next("header \"n\"")?;
    let n = positive_dimension(h, parse_usizes(h, header, 1)?[0])?;
    let u = read_matrix_rows(&mut lines, n, "boundary row")?;
    lines.finish()?;
    Ok(u)
}

pub fn write_scattering(sd: &ScatteringData) -> String {
    let n = sd.n();
    let mut out = String::from("# scattering data\n[kgrid]\n");
    writeln!(out, "{n},{}", sd.kgrid.len()).unwrap();
    for &k in sd.kgrid.values() {
        writeln!(out, "{}", fmt_float(k)).unwrap();
    }
    out.push_str("[S]\n");
    for s in &sd.s {
        writeln!(out, "{}", join(row_major(s))).unwrap();
    }
    out.push_str("[uhat]\n");
    matrix_rows(&mut out, &sd.uhat);
    out.push_str("[boundstates]\n");
    writeln!(out, "{}", sd.bound_states.len()).unwrap();
    for b in &sd.bound_states {
        writeln!(out, "{}", fmt_float(b.kappa)).unwrap();
        matrix_rows(&mut out, &b.c);
    }
    out
}

fn expect_section(lines: &mut Lines<'_>, name: &str) -> Result<(), ParseError> {
    let (n, l) = lines.next(name)?;
    if l != name {
        return err(n, format!("expected section {name}, found {l:?}"));
    }
    Ok(())
}

pub fn read_scattering(text: &str) -> Result<ScatteringData, ParseError> {
    let mut lines = Lines::new(text);
    expect_section(&mut lines, "[kgrid]")?;
    let (h, header) = lines.next("header \"n,nk\"")?;
    let dims = parse_usizes(h, header, 2)?;
    let n = positive_dimension(h, dims[0])?;
    let nk = dims[1];
    let mut k = Vec::with_capacity(nk);
    for _ in 0..nk {
        k.push(lines.floats("k value", 1)?.1[0]);
    }
    let kgrid = match KGrid::new(k) {
        Ok(g) => g,
        Err(e) => return err(h, e.to_string()),
    };
    expect_section(&mut lines, "[S]")?;
    let mut s = Vec::with_capacity(nk);
    for _ in 0..nk {
        s.push(matrix_from_row_major(n, &lines.floats("S sample", 2 * n * n)?.1));
    }
    expect_section(&mut lines, "[uhat]")?;
    let uhat = read_matrix_rows(&mut lines, n, "uhat row")?;
    let mut bound_states = Vec::new();
    if lines.peek().is_some() {
        expect_section(&mut lines, "[boundstates]")?;
        let (c, count) = lines.next("bound-state count")?;
        let count = parse_usizes(c, count, 1)?[0];
        for _ in 0..count {
            let kappa = lines.floats("kappa", 1)?.1[0];
            let c = read_matrix_rows(&mut lines, n, "normalization row")?;
            bound_states.push(BoundStateData { kappa, c });
        }
    }
    lines.finish()?;
    Ok(ScatteringData { kgrid, s, uhat, bound_states })
}
