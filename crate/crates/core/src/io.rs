//! Text formats.
//!
//! All formats are UTF-8 with `\n` line endings. Lines starting with `#` and
//! blank lines are ignored. Numbers are written with the shortest
//! representation that parses back to the same `f64`, so writing then
//! reading is bit-exact.
//!
//! Graphical hypergraph (`HGR 1`):
//!
//! ```text
//! HGR 1
//! <n> <k>
//! <weight> <size> <v_0> ... <v_{size-1}>      (k lines, 0-based vertices)
//! ```
//!
//! Matrix hypergraph (`MHG 1`):
//!
//! ```text
//! MHG 1
//! <m> <n> <k> <nnz>
//! <k group weights> | unit
//! <group id>                                  (m lines, one per row)
//! <row> <col> <value>                         (nnz lines, strictly increasing (row, col))
//! ```
//!
//! Group overestimates (`TAU 1`):
//!
//! ```text
//! TAU 1
//! <k> <m> <nu> <T>
//! <tau_i>                                     (k lines)
//! <w_j>                                       (m lines)
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};
use crate::hypergraph::{GraphicalHypergraph, MatrixHypergraph};
use crate::overestimates::{GroupOverestimates, SourceMode};
use crate::sparse::SparseRows;

pub const HGR_MAGIC: &str = "HGR 1";
pub const MHG_MAGIC: &str = "MHG 1";
pub const TAU_MAGIC: &str = "TAU 1";

/// Either kind of hypergraph file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyHypergraph {
    Graphical(GraphicalHypergraph),
    Matrix(MatrixHypergraph),
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next significant line as `(line number, tokens)`.
    fn next_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Ok((i + 1, t.split_whitespace().collect()));
        }
        Err(parse_err(self.last + 1, format!("unexpected end of input, expected {what}")))
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next_tokens("") {
            Ok((line, _)) => Err(parse_err(line, "unexpected trailing content")),
            Err(_) => Ok(()),
        }
    }
}

fn num<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| parse_err(line, format!("cannot parse {what} from `{tok}`")))
}

fn exact_len(line: usize, toks: &[&str], n: usize, what: &str) -> Result<()> {
    if toks.len() != n {
        return Err(parse_err(line, format!("expected {n} fields ({what}), found {}", toks.len())));
    }
    Ok(())
}

fn magic(lines: &mut Lines<'_>, expected: &str) -> Result<()> {
    let (line, toks) = lines.next_tokens("header")?;
    if toks.join(" ") != expected {
        return Err(parse_err(line, format!("expected header `{expected}`")));
    }
    Ok(())
}

/// Reads either format, chosen by the header line.
pub fn read_hypergraph(text: &str) -> Result<AnyHypergraph> {
    let mut lines = Lines::new(text);
    let (line, toks) = lines.next_tokens("header")?;
    match toks.join(" ").as_str() {
        HGR_MAGIC => read_hgr(text).map(AnyHypergraph::Graphical),
        MHG_MAGIC => read_mhg(text).map(AnyHypergraph::Matrix),
        other => Err(parse_err(line, format!("unrecognised header `{other}`"))),
    }
}

pub fn read_hgr(text: &str) -> Result<GraphicalHypergraph> {
    let mut lines = Lines::new(text);
    magic(&mut lines, HGR_MAGIC)?;
    let (line, toks) = lines.next_tokens("`<n> <k>`")?;
    exact_len(line, &toks, 2, "n k")?;
    let n: usize = num(line, toks[0], "n")?;
    let k: usize = num(line, toks[1], "k")?;
    let mut edges = Vec::with_capacity(k);
    for _ in 0..k {
        let (line, toks) = lines.next_tokens("a hyperedge line")?;
        if toks.len() < 2 {
            return Err(parse_err(line, "expected `<weight> <size> <vertices...>`"));
        }
        let w: f64 = num(line, toks[0], "weight")?;
        let size: usize = num(line, toks[1], "size")?;
        exact_len(line, &toks, size + 2, "weight, size and vertices")?;
        let vs = toks[2..].iter().map(|t| num::<usize>(line, t, "vertex")).collect::<Result<Vec<_>>>()?;
        let mut sorted = vs.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(parse_err(line, "hyperedge repeats a vertex"));
        }
        let single = GraphicalHypergraph::new(n.max(1), vec![(vs.clone(), w)]);
        if let Err(Error::InvalidArgument(msg)) = single {
            return Err(parse_err(line, msg.replace("hyperedge 0", "hyperedge")));
        }
        edges.push((vs, w));
    }
    lines.expect_end()?;
    GraphicalHypergraph::new(n, edges)
}

fn fmt_f64(out: &mut String, v: f64) {
    write!(out, "{v:?}").unwrap();
}

pub fn write_hgr(g: &GraphicalHypergraph) -> String {
    let mut s = format!("{HGR_MAGIC}\n{} {}\n", g.n(), g.num_hyperedges());
    for e in g.hyperedges() {
        fmt_f64(&mut s, e.weight());
        write!(s, " {}", e.len()).unwrap();
        for v in e.vertices() {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn read_mhg(text: &str) -> Result<MatrixHypergraph> {
    let mut lines = Lines::new(text);
    magic(&mut lines, MHG_MAGIC)?;
    let (line, toks) = lines.next_tokens("`<m> <n> <k> <nnz>`")?;
    exact_len(line, &toks, 4, "m n k nnz")?;
    let m: usize = num(line, toks[0], "m")?;
    let n: usize = num(line, toks[1], "n")?;
    let k: usize = num(line, toks[2], "k")?;
    let nnz: usize = num(line, toks[3], "nnz")?;

    let (line, toks) = lines.next_tokens("group weights or `unit`")?;
    let weights = if toks == ["unit"] {
        None
    } else {
        exact_len(line, &toks, k, "group weights")?;
        Some(toks.iter().map(|t| num::<f64>(line, t, "group weight")).collect::<Result<Vec<_>>>()?)
    };

    let mut row_group = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, toks) = lines.next_tokens("a group id")?;
        exact_len(line, &toks, 1, "group id")?;
        let gid: usize = num(line, toks[0], "group id")?;
        if gid >= k {
            return Err(parse_err(line, format!("group id {gid} out of range (k = {k})")));
        }
        row_group.push(gid);
    }

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut prev: Option<(usize, usize)> = None;
    for _ in 0..nnz {
        let (line, toks) = lines.next_tokens("a `<row> <col> <value>` entry")?;
        exact_len(line, &toks, 3, "row col value")?;
        let r: usize = num(line, toks[0], "row")?;
        let c: usize = num(line, toks[1], "column")?;
        let v: f64 = num(line, toks[2], "value")?;
        if r >= m || c >= n {
            return Err(parse_err(line, format!("entry ({r}, {c}) outside {m} x {n}")));
        }
        if !v.is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        if prev.is_some_and(|p| p >= (r, c)) {
            return Err(parse_err(line, "entries must be in strictly increasing (row, col) order"));
        }
        prev = Some((r, c));
        rows[r].push((c, v));
    }
    lines.expect_end()?;
    let rows = SparseRows::from_rows(n, rows)?;
    MatrixHypergraph::from_row_groups(rows, &row_group, k, weights)
}

pub fn write_mhg(g: &MatrixHypergraph) -> String {
    let mut s = format!("{MHG_MAGIC}\n{} {} {} {}\n", g.m(), g.n(), g.k(), g.rows().nnz());
    match g.weights() {
        None => s.push_str("unit"),
        Some(w) => {
            for (i, &v) in w.iter().enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                fmt_f64(&mut s, v);
            }
        }
    }
    s.push('\n');
    for &gid in g.row_groups() {
        writeln!(s, "{gid}").unwrap();
    }
    for j in 0..g.m() {
        for (c, v) in g.rows().row_entries(j) {
            write!(s, "{j} {c} ").unwrap();
            fmt_f64(&mut s, v);
            s.push('\n');
        }
    }
    s
}

pub fn read_tau(text: &str) -> Result<GroupOverestimates> {
    let mut lines = Lines::new(text);
    magic(&mut lines, TAU_MAGIC)?;
    let (line, toks) = lines.next_tokens("`<k> <m> <nu> <T>`")?;
    exact_len(line, &toks, 4, "k m nu T")?;
    let k: usize = num(line, toks[0], "k")?;
    let m: usize = num(line, toks[1], "m")?;
    let nu: f64 = num(line, toks[2], "nu")?;
    let t: usize = num(line, toks[3], "T")?;
    let mut read_vec = |len: usize, what: &str| -> Result<Vec<f64>> {
        (0..len)
            .map(|_| {
                let (line, toks) = lines.next_tokens(what)?;
                exact_len(line, &toks, 1, what)?;
                num(line, toks[0], what)
            })
            .collect()
    };
    let tau = read_vec(k, "tau")?;
    let witness_weights = read_vec(m, "witness weight")?;
    lines.expect_end()?;
    Ok(GroupOverestimates {
        tau,
        witness_weights,
        nu,
        iterations: t,
        source: SourceMode::Direct,
        sigma_sums: Vec::new(),
    })
}

pub fn write_tau(o: &GroupOverestimates) -> String {
    let mut s = format!("{TAU_MAGIC}\n{} {} ", o.tau.len(), o.witness_weights.len());
    fmt_f64(&mut s, o.nu);
    writeln!(s, " {}", o.iterations).unwrap();
    for &v in o.tau.iter().chain(&o.witness_weights) {
        fmt_f64(&mut s, v);
        s.push('\n');
    }
    s
}
