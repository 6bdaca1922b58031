//! Flat-file formats shared by the commands: matrices as
//! `(rows, cols, [(r, c, value), ...])` triplet text, submodule basis files,
//! and the CDGA presentation file.  Emission is canonical, so parse followed
//! by emit reproduces a well-formed file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use dgquot_core::cdga::{CdgaPresentation, Generator, Monomial, Poly};
use dgquot_core::dgla::{Label, Sort};
use dgquot_core::matrix::SparseMat;
use dgquot_core::scalar::Field;

use crate::config::FieldSpec;

/// Matrix shape plus entries with the scalars still in text form.
pub type MatrixText = (usize, usize, Vec<(usize, usize, String)>);

pub fn format_matrix_text(rows: usize, cols: usize, entries: &[(usize, usize, String)]) -> String {
    let mut out = format!("({rows}, {cols}, [");
    for (i, (r, c, v)) in entries.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "({r}, {c}, {v})");
    }
    out.push_str("])");
    out
}

pub fn format_matrix<F: Field>(field: &F, m: &SparseMat<F>) -> String {
    let mut entries: Vec<(usize, usize, String)> = m
        .entries()
        .map(|(r, c, v)| (r, c, field.format(v)))
        .collect();
    entries.sort();
    format_matrix_text(m.rows(), m.cols(), &entries)
}

/// Cursor-based reader for the triplet syntax.  Scalars are any run of
/// characters free of `,`, `(`, `)`, `[`, `]`, and whitespace.
struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor {
            s: s.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, ch: u8) -> Result<(), String> {
        self.skip_ws();
        if self.pos < self.s.len() && self.s[self.pos] == ch {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!(
                "expected `{}` at offset {} of the matrix literal",
                ch as char, self.pos
            ))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn token(&mut self) -> Result<&'a str, String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() {
            let b = self.s[self.pos];
            if b.is_ascii_whitespace() || matches!(b, b',' | b'(' | b')' | b'[' | b']') {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            return Err(format!("expected a value at offset {start}"));
        }
        core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| "invalid UTF-8".into())
    }

    fn number(&mut self) -> Result<usize, String> {
        let t = self.token()?;
        t.parse().map_err(|_| format!("`{t}` is not a count"))
    }

    fn done(&mut self) -> Result<(), String> {
        self.skip_ws();
        if self.pos == self.s.len() {
            Ok(())
        } else {
            Err(format!("trailing input at offset {}", self.pos))
        }
    }
}

pub fn parse_matrix_text(s: &str) -> Result<MatrixText, String> {
    let mut c = Cursor::new(s);
    c.expect(b'(')?;
    let rows = c.number()?;
    c.expect(b',')?;
    let cols = c.number()?;
    c.expect(b',')?;
    c.expect(b'[')?;
    let mut entries = Vec::new();
    loop {
        match c.peek() {
            Some(b']') => {
                c.expect(b']')?;
                break;
            }
            Some(b'(') => {
                c.expect(b'(')?;
                let r = c.number()?;
                c.expect(b',')?;
                let col = c.number()?;
                c.expect(b',')?;
                let v = c.token()?.to_owned();
                c.expect(b')')?;
                entries.push((r, col, v));
                if c.peek() == Some(b',') {
                    c.expect(b',')?;
                }
            }
            _ => return Err(format!("expected `(` or `]` at offset {}", c.pos)),
        }
    }
    c.expect(b')')?;
    c.done()?;
    Ok((rows, cols, entries))
}

pub fn parse_matrix<F: Field>(field: &F, s: &str) -> Result<SparseMat<F>> {
    let (rows, cols, entries) = parse_matrix_text(s).map_err(|e| anyhow!("{e}"))?;
    let mut realized = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        if r >= rows || c >= cols {
            bail!("matrix entry ({r}, {c}) lies outside the {rows} x {cols} shape");
        }
        let e = field
            .parse(&v)
            .map_err(|_| anyhow!("matrix entry `{v}` does not parse over the field"))?;
        realized.push((r, c, e));
    }
    SparseMat::from_triplets(field.clone(), rows, cols, realized).map_err(|e| anyhow!("{e}"))
}

/// Inverse of the `Label` display form `sort:k:s_out:p1,p2:d0,d1`.
pub fn parse_label(s: &str) -> Result<Label, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [tag, k, s_out, profile, digits] = parts.as_slice() else {
        return Err(format!("label `{s}` does not have five `:`-separated fields"));
    };
    let sort = Sort::from_tag(tag).ok_or_else(|| format!("unknown sort tag `{tag}`"))?;
    let k: usize = k.parse().map_err(|_| format!("bad degree in label `{s}`"))?;
    let s_out: i64 = s_out
        .parse()
        .map_err(|_| format!("bad output degree in label `{s}`"))?;
    let profile: Vec<i64> = profile
        .split(',')
        .map(|t| t.parse().map_err(|_| format!("bad profile in label `{s}`")))
        .collect::<Result<_, String>>()?;
    let digits: Vec<usize> = digits
        .split(',')
        .map(|t| t.parse().map_err(|_| format!("bad digits in label `{s}`")))
        .collect::<Result<_, String>>()?;
    Ok(Label {
        sort,
        k,
        s_out,
        profile,
        digits,
    })
}

/// Submodule basis file: `submodule v1`, a floor line, then one
/// `basis <s> = (rows, cols, [...])` line per consecutive degree.
pub fn load_submodule<F: Field>(field: &F, path: &Path) -> Result<(i64, Vec<SparseMat<F>>)> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| anyhow!("cannot read {origin}: {e}"))?;
    let mut floor: Option<i64> = None;
    let mut mats: Vec<(i64, SparseMat<F>)> = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let no = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "submodule v1" {
                bail!("{origin}:{no}: expected header `submodule v1`");
            }
            saw_header = true;
            continue;
        }
        let (lhs, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{origin}:{no}: expected `key = value`"))?;
        let value = value.trim();
        let toks: Vec<&str> = lhs.split_whitespace().collect();
        match toks.as_slice() {
            ["floor"] => {
                if floor.is_some() {
                    bail!("{origin}:{no}: duplicate key `floor`");
                }
                floor = Some(
                    value
                        .parse()
                        .map_err(|_| anyhow!("{origin}:{no}: `{value}` is not an integer"))?,
                );
            }
            ["basis", s] => {
                let s: i64 = s
                    .parse()
                    .map_err(|_| anyhow!("{origin}:{no}: `{s}` is not a degree"))?;
                let m = parse_matrix(field, value)
                    .map_err(|e| anyhow!("{origin}:{no}: {e}"))?;
                mats.push((s, m));
            }
            _ => bail!("{origin}:{no}: unknown key `{lhs}`", lhs = lhs.trim()),
        }
    }
    if !saw_header {
        bail!("{origin}: missing header `submodule v1`");
    }
    let floor = floor.ok_or_else(|| anyhow!("{origin}: missing required key `floor`"))?;
    if mats.is_empty() {
        bail!("{origin}: no `basis <s>` lines");
    }
    for (i, (s, _)) in mats.iter().enumerate() {
        if *s != floor + i as i64 {
            bail!("{origin}: basis degrees must run consecutively from the floor {floor}");
        }
    }
    Ok((floor, mats.into_iter().map(|(_, m)| m).collect()))
}

pub fn format_submodule<F: Field>(field: &F, floor: i64, mats: &[SparseMat<F>]) -> String {
    let mut out = String::from("submodule v1\n");
    let _ = writeln!(out, "floor = {floor}");
    for (i, m) in mats.iter().enumerate() {
        let _ = writeln!(out, "basis {} = {}", floor + i as i64, format_matrix(field, m));
    }
    out
}

/// Graded-lex order on monomials over the generator indices: total degree
/// first, then the flattened index multiset lexicographically.
fn flatten(m: &Monomial) -> Vec<u32> {
    let mut out = Vec::new();
    for &(id, e) in &m.0 {
        for _ in 0..e {
            out.push(id);
        }
    }
    out
}

fn graded_lex(a: &Monomial, b: &Monomial) -> core::cmp::Ordering {
    a.length()
        .cmp(&b.length())
        .then_with(|| flatten(a).cmp(&flatten(b)))
}

fn format_term<F: Field>(field: &F, m: &Monomial, c: &F::Elem) -> String {
    let ids = flatten(m);
    let mut out = String::from("[");
    for (i, id) in ids.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{id}");
    }
    let _ = write!(out, "] {}", field.format(c));
    out
}

pub struct CdgaHeader {
    pub instance: String,
    pub window: (i64, i64),
    pub field: FieldSpec,
}

/// Canonical CDGA file text.  Differential terms are sorted graded-lex; one
/// `d` line per generator keeps parsing positional and the round trip exact.
pub fn format_cdga<F: Field>(
    header: &CdgaHeader,
    pres: &CdgaPresentation<F>,
) -> String {
    let field = pres.field();
    let mut out = String::from("cdga v1\n");
    let _ = writeln!(out, "instance = {}", header.instance);
    let _ = writeln!(out, "window = {} {}", header.window.0, header.window.1);
    let _ = writeln!(out, "field = {}", header.field.canonical());
    let _ = writeln!(out, "generators = {}", pres.len());
    for (id, g) in pres.generators().iter().enumerate() {
        let _ = writeln!(out, "g {id} {} {}", g.degree, g.label);
    }
    out.push_str("differentials\n");
    for id in 0..pres.len() as u32 {
        let mut terms: Vec<(&Monomial, &F::Elem)> = pres.differential(id).terms.iter().collect();
        terms.sort_by(|x, y| graded_lex(x.0, y.0));
        let _ = write!(out, "d {id} =");
        for (i, (m, c)) in terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" ;");
            }
            let _ = write!(out, " {}", format_term(field, m, c));
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

pub fn parse_cdga_header(text: &str) -> Result<CdgaHeader> {
    let mut lines = text.lines();
    if lines.next() != Some("cdga v1") {
        bail!("line 1: expected header `cdga v1`");
    }
    let instance = expect_kv(lines.next(), 2, "instance")?;
    let window_text = expect_kv(lines.next(), 3, "window")?;
    let toks: Vec<&str> = window_text.split_whitespace().collect();
    let [a, t] = toks.as_slice() else {
        bail!("line 3: window needs two integers");
    };
    let a: i64 = a.parse().map_err(|_| anyhow!("line 3: bad window floor"))?;
    let t: i64 = t.parse().map_err(|_| anyhow!("line 3: bad window ceiling"))?;
    let field_text = expect_kv(lines.next(), 4, "field")?;
    let field = FieldSpec::parse(&field_text).map_err(|e| anyhow!("line 4: {e}"))?;
    Ok(CdgaHeader {
        instance,
        window: (a, t),
        field,
    })
}

fn expect_kv(line: Option<&str>, no: usize, key: &str) -> Result<String> {
    let line = line.ok_or_else(|| anyhow!("line {no}: unexpected end of file"))?;
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| anyhow!("line {no}: expected `{key} = ...`"))?;
    if k.trim() != key {
        bail!("line {no}: expected key `{key}`, found `{}`", k.trim());
    }
    Ok(v.trim().to_owned())
}

pub fn parse_cdga_body<F: Field>(field: F, text: &str) -> Result<CdgaPresentation<F>> {
    let mut lines = text.lines().enumerate().skip(4);
    let (no, count_line) = lines
        .next()
        .ok_or_else(|| anyhow!("unexpected end of file before the generator count"))?;
    let count_text = expect_kv(Some(count_line), no + 1, "generators")?;
    let count: usize = count_text
        .parse()
        .map_err(|_| anyhow!("line {}: bad generator count", no + 1))?;
    let mut gens = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, line) = lines
            .next()
            .ok_or_else(|| anyhow!("unexpected end of file in the generator table"))?;
        let no = no + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let ["g", id, degree, label] = toks.as_slice() else {
            bail!("line {no}: expected `g <id> <degree> <label>`");
        };
        let id: usize = id.parse().map_err(|_| anyhow!("line {no}: bad id"))?;
        if id != gens.len() {
            bail!("line {no}: generator ids must be consecutive from 0");
        }
        let degree: i64 = degree
            .parse()
            .map_err(|_| anyhow!("line {no}: bad degree"))?;
        let label = parse_label(label).map_err(|e| anyhow!("line {no}: {e}"))?;
        gens.push(Generator { degree, label });
    }
    let mut pres = CdgaPresentation::new(field.clone(), gens);
    let (no, sep) = lines
        .next()
        .ok_or_else(|| anyhow!("unexpected end of file before `differentials`"))?;
    if sep != "differentials" {
        bail!("line {}: expected `differentials`", no + 1);
    }
    for want in 0..count as u32 {
        let (no, line) = lines
            .next()
            .ok_or_else(|| anyhow!("unexpected end of file in the differential table"))?;
        let no = no + 1;
        let rest = line
            .strip_prefix("d ")
            .ok_or_else(|| anyhow!("line {no}: expected `d <id> = ...`"))?;
        let (id, rhs) = rest
            .split_once('=')
            .ok_or_else(|| anyhow!("line {no}: expected `d <id> = ...`"))?;
        let id: u32 = id
            .trim()
            .parse()
            .map_err(|_| anyhow!("line {no}: bad id"))?;
        if id != want {
            bail!("line {no}: differential lines must cover ids in order");
        }
        let rhs = rhs.trim();
        let mut poly = Poly::zero();
        if !rhs.is_empty() {
            for term in rhs.split(';') {
                let term = term.trim();
                let (mono, coeff) = parse_term(term).map_err(|e| anyhow!("line {no}: {e}"))?;
                let c = field
                    .parse(&coeff)
                    .map_err(|_| anyhow!("line {no}: coefficient `{coeff}` does not parse"))?;
                if poly.terms.insert(mono, c).is_some() {
                    bail!("line {no}: repeated monomial in one differential");
                }
            }
        }
        *pres.differential_mut(id) = poly;
    }
    let (no, end) = lines
        .next()
        .ok_or_else(|| anyhow!("unexpected end of file before `end`"))?;
    if end != "end" {
        bail!("line {}: expected `end`", no + 1);
    }
    if let Some((no, extra)) = lines.next() {
        if !extra.trim().is_empty() {
            bail!("line {}: trailing content after `end`", no + 1);
        }
    }
    Ok(pres)
}

fn parse_term(term: &str) -> Result<(Monomial, String), String> {
    let rest = term
        .strip_prefix('[')
        .ok_or_else(|| format!("term `{term}` must start with `[`"))?;
    let (ids, coeff) = rest
        .split_once(']')
        .ok_or_else(|| format!("term `{term}` is missing `]`"))?;
    let coeff = coeff.trim();
    if coeff.is_empty() {
        return Err(format!("term `{term}` is missing its coefficient"));
    }
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    let mut last: Option<u32> = None;
    for tok in ids.split_whitespace() {
        let id: u32 = tok
            .parse()
            .map_err(|_| format!("`{tok}` is not a generator id"))?;
        if let Some(prev) = last {
            if id < prev {
                return Err(format!("monomial ids in `{term}` must be sorted"));
            }
        }
        last = Some(id);
        *counts.entry(id).or_insert(0) += 1;
    }
    Ok((Monomial(counts.into_iter().collect()), coeff.to_owned()))
}
