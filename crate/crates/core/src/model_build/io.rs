//! Plain-text formats for vectors, matrices, densities, counts and
//! dependency triples.
//!
//! Blank lines and lines starting with `#` are ignored everywhere (the
//! counts format stores its vocabularies in `#row` / `#col` lines). Values
//! are written in shortest round-trip form, so store-then-load is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CooccurrenceCounts, Dependency, RelationalVerbMatrix, VectorStore};
use crate::composition::Relation;
use crate::error::{parse_err, Error, Result};
use crate::tensor::{DensityMatrix, Matrix, WordVector};

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Whitespace-separated fields with their 1-based columns.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn number<T: std::str::FromStr>(line: usize, col: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, col, format!("expected {what}, found `{s}`")))
}

fn value(line: usize, col: usize, s: &str) -> Result<f64> {
    let v: f64 = number(line, col, s, "a number")?;
    if !v.is_finite() {
        return Err(parse_err(line, col, format!("non-finite value `{s}`")));
    }
    Ok(v)
}

fn header<'a, I: Iterator<Item = (usize, &'a str)>>(
    lines: &mut I,
    keywords: &[&str],
    arity: usize,
) -> Result<(usize, String, Vec<usize>)> {
    let (ln, line) = lines
        .next()
        .ok_or_else(|| parse_err(1, 1, format!("missing `{}` header", keywords.join("|"))))?;
    let f = fields(line);
    let (col, kw) = f[0];
    if !keywords.contains(&kw) {
        return Err(parse_err(ln, col, format!("expected header `{}`, found `{kw}`", keywords.join("|"))));
    }
    if f.len() != arity + 1 {
        return Err(parse_err(
            ln,
            f.last().map(|x| x.0).unwrap_or(1),
            format!("header takes {arity} numbers"),
        ));
    }
    let nums = f[1..]
        .iter()
        .map(|&(c, s)| number(ln, c, s, "a count"))
        .collect::<Result<Vec<usize>>>()?;
    Ok((ln, kw.to_string(), nums))
}

fn write_value(out: &mut String, x: f64) {
    let _ = write!(out, " {x:?}");
}

// ---------------------------------------------------------------------------
// Vectors

pub fn format_vectors<'a>(dim: usize, vectors: impl IntoIterator<Item = &'a WordVector>) -> String {
    let mut out = format!("vectors {dim}\n");
    for v in vectors {
        out.push_str(&v.label);
        for &x in v.entries() {
            write_value(&mut out, x);
        }
        out.push('\n');
    }
    out
}

pub fn parse_vectors(text: &str) -> Result<VectorStore> {
    let mut lines = content_lines(text);
    let (_, _, nums) = header(&mut lines, &["vectors"], 1)?;
    let dim = nums[0];
    let mut store = VectorStore::new(dim);
    for (ln, line) in lines {
        let f = fields(line);
        if f.len() != dim + 1 {
            return Err(Error::HeaderMismatch(format!(
                "line {ln}: `{}` has {} values, header declares {dim}",
                f[0].1,
                f.len() - 1
            )));
        }
        let entries = f[1..]
            .iter()
            .map(|&(c, s)| value(ln, c, s))
            .collect::<Result<Vec<f64>>>()?;
        store.insert(WordVector::new(f[0].1, entries)?)?;
    }
    Ok(store)
}

pub fn save_vectors(path: &Path, store: &VectorStore) -> Result<()> {
    fs::write(path, format_vectors(store.dim(), store.iter()))?;
    Ok(())
}

pub fn load_vectors(path: &Path) -> Result<VectorStore> {
    parse_vectors(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Matrices and densities

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixKind {
    Matrix,
    Density,
}

impl MatrixKind {
    fn keyword(self) -> &'static str {
        match self {
            MatrixKind::Matrix => "matrix",
            MatrixKind::Density => "density",
        }
    }
}

pub fn format_matrices<'a>(
    kind: MatrixKind,
    dim: usize,
    items: impl IntoIterator<Item = (&'a str, &'a Matrix)>,
) -> String {
    let mut out = format!("{} {dim}\n", kind.keyword());
    for (label, m) in items {
        out.push_str(label);
        out.push('\n');
        for i in 0..m.rows() {
            let mut row = String::new();
            for &x in m.row(i) {
                write_value(&mut row, x);
            }
            out.push_str(row.trim_start());
            out.push('\n');
        }
    }
    out
}

/// Labelled `D×D` blocks; density blocks are validated as density matrices.
pub fn parse_matrices(text: &str) -> Result<(MatrixKind, Vec<(String, Matrix)>)> {
    let mut lines = content_lines(text).peekable();
    let (_, kw, nums) = header(&mut lines, &["matrix", "density"], 1)?;
    let kind = if kw == "density" {
        MatrixKind::Density
    } else {
        MatrixKind::Matrix
    };
    let dim = nums[0];
    let mut items = Vec::new();
    while let Some((ln, line)) = lines.next() {
        let f = fields(line);
        if f.len() != 1 {
            return Err(parse_err(ln, f[1].0, "expected a single label"));
        }
        let label = f[0].1.to_string();
        let mut data = Vec::with_capacity(dim * dim);
        let mut last_line = ln;
        for r in 0..dim {
            let (rl, row) = lines.next().ok_or_else(|| {
                parse_err(
                    last_line + 1,
                    1,
                    format!("truncated: `{label}` ends after {r} of {dim} rows"),
                )
            })?;
            last_line = rl;
            let rf = fields(row);
            if rf.len() != dim {
                return Err(Error::HeaderMismatch(format!(
                    "line {rl}: row of `{label}` has {} values, header declares {dim}",
                    rf.len()
                )));
            }
            for &(c, s) in &rf {
                data.push(value(rl, c, s)?);
            }
        }
        let m = Matrix::from_vec(dim, dim, data)?;
        if kind == MatrixKind::Density {
            DensityMatrix::new(label.clone(), m.clone()).map_err(|e| {
                parse_err(ln, 1, format!("`{label}` is not a density matrix: {e}"))
            })?;
        }
        items.push((label, m));
    }
    Ok((kind, items))
}

pub fn format_densities<'a>(dim: usize, items: impl IntoIterator<Item = &'a DensityMatrix>) -> String {
    format_matrices(
        MatrixKind::Density,
        dim,
        items.into_iter().map(|d| (d.label.as_str(), d.matrix())),
    )
}

pub fn parse_densities(text: &str) -> Result<Vec<DensityMatrix>> {
    let (kind, items) = parse_matrices(text)?;
    if kind != MatrixKind::Density {
        return Err(parse_err(1, 1, "expected a `density` file"));
    }
    items
        .into_iter()
        .map(|(label, m)| DensityMatrix::new(label, m))
        .collect()
}

pub fn save_densities(path: &Path, dim: usize, items: &[DensityMatrix]) -> Result<()> {
    fs::write(path, format_densities(dim, items))?;
    Ok(())
}

pub fn load_densities(path: &Path) -> Result<Vec<DensityMatrix>> {
    parse_densities(&fs::read_to_string(path)?)
}

pub fn save_verb_matrices(path: &Path, dim: usize, verbs: &[RelationalVerbMatrix]) -> Result<()> {
    let text = format_matrices(
        MatrixKind::Matrix,
        dim,
        verbs.iter().map(|v| (v.label.as_str(), v.matrix())),
    );
    fs::write(path, text)?;
    Ok(())
}

/// Stored verb matrices carry no constituents; phrases then use `Mᵀ n`.
pub fn load_verb_matrices(path: &Path) -> Result<Vec<RelationalVerbMatrix>> {
    let (_, items) = parse_matrices(&fs::read_to_string(path)?)?;
    items
        .into_iter()
        .map(|(label, m)| RelationalVerbMatrix::from_matrix(label, m))
        .collect()
}

// ---------------------------------------------------------------------------
// Counts

pub fn format_counts(c: &CooccurrenceCounts) -> String {
    let mut out = format!("counts {} {} {}\n", c.rows(), c.cols(), c.window);
    for (i, w) in c.vocab.iter().enumerate() {
        let _ = writeln!(out, "#row\t{i}\t{w}");
    }
    for (j, w) in c.context_vocab.iter().enumerate() {
        let _ = writeln!(out, "#col\t{j}\t{w}");
    }
    for (i, j, n) in c.nonzero() {
        let _ = writeln!(out, "{i} {j} {n}");
    }
    out
}

pub fn parse_counts(text: &str) -> Result<CooccurrenceCounts> {
    let mut lines = content_lines(text);
    let (_, _, nums) = header(&mut lines, &["counts"], 3)?;
    let (rows, cols, window) = (nums[0], nums[1], nums[2]);

    let mut vocab = vec![None; rows];
    let mut context = vec![None; cols];
    for (i, line) in text.lines().enumerate() {
        let parts: Vec<&str> = line.split('\t').collect();
        let target = match parts.first() {
            Some(&"#row") => &mut vocab,
            Some(&"#col") => &mut context,
            _ => continue,
        };
        if parts.len() != 3 {
            return Err(parse_err(i + 1, 1, "vocabulary line needs an index and a word"));
        }
        let idx: usize = number(i + 1, parts[0].len() + 2, parts[1], "an index")?;
        let slot = target.get_mut(idx).ok_or_else(|| {
            Error::HeaderMismatch(format!("line {}: index {idx} outside header bounds", i + 1))
        })?;
        *slot = Some(parts[2].to_string());
    }
    let named = |v: Vec<Option<String>>, what: &str| -> Result<Vec<String>> {
        v.into_iter()
            .enumerate()
            .map(|(i, w)| w.ok_or_else(|| Error::HeaderMismatch(format!("{what} {i} has no word"))))
            .collect()
    };
    let vocab = named(vocab, "row")?;
    let context = named(context, "column")?;

    let mut counts = CooccurrenceCounts::from_dense(vocab, context, window, vec![0; rows * cols])?;
    for (ln, line) in lines {
        let f = fields(line);
        if f.len() != 3 {
            return Err(parse_err(ln, 1, "expected `i j count`"));
        }
        let i: usize = number(ln, f[0].0, f[0].1, "a row index")?;
        let j: usize = number(ln, f[1].0, f[1].1, "a column index")?;
        let n: u64 = number(ln, f[2].0, f[2].1, "a count")?;
        if i >= rows || j >= cols {
            return Err(Error::HeaderMismatch(format!(
                "line {ln}: cell ({i}, {j}) outside {rows}×{cols}"
            )));
        }
        counts.set(i, j, n);
    }
    Ok(counts)
}

pub fn save_counts(path: &Path, c: &CooccurrenceCounts) -> Result<()> {
    fs::write(path, format_counts(c))?;
    Ok(())
}

pub fn load_counts(path: &Path) -> Result<CooccurrenceCounts> {
    parse_counts(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Dependencies

/// `verb<TAB>relation<TAB>noun<TAB>count` lines.
pub fn parse_dependencies(text: &str) -> Result<Vec<Dependency>> {
    let mut out = Vec::new();
    for (ln, line) in content_lines(text) {
        let parts: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if parts.len() != 4 {
            return Err(parse_err(ln, 1, format!("expected 4 tab-separated fields, found {}", parts.len())));
        }
        let col = |k: usize| parts[..k].iter().map(|p| p.len() + 1).sum::<usize>() + 1;
        let relation = Relation::parse(parts[1]).map_err(|_| {
            parse_err(ln, col(1), format!("relation must be subj or obj, found `{}`", parts[1]))
        })?;
        let count: u64 = number(ln, col(3), parts[3].trim(), "a count")?;
        out.push(Dependency {
            verb: parts[0].to_string(),
            relation,
            noun: parts[2].to_string(),
            count,
        });
    }
    Ok(out)
}

pub fn format_dependencies(deps: &[Dependency]) -> String {
    deps.iter().map(|d| format!("{d}\n")).collect()
}

pub fn load_dependencies(path: &Path) -> Result<Vec<Dependency>> {
    parse_dependencies(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_round_trip_exactly() {
        let store = VectorStore::from_vectors(
            3,
            [
                WordVector::new("a", vec![0.1, 1.0 / 3.0, 2e-300]).unwrap(),
                WordVector::new("b_NN", vec![0.0, 5.5, -1.25]).unwrap(),
            ],
        )
        .unwrap();
        let back = parse_vectors(&format_vectors(3, store.iter())).unwrap();
        assert_eq!(back, store);
    }

    #[test]
    fn vector_errors_name_lines() {
        let err = parse_vectors("vectors 2\na 1 2\nb 1 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 5, .. }), "{err}");
        let err = parse_vectors("vectors 2\na 1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::HeaderMismatch(_)), "{err}");
        assert!(matches!(parse_vectors(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_vectors("vector 2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn matrices_round_trip_and_truncation() {
        let m = Matrix::from_rows(&[[1.0, 0.25], [-3.0, 1e-17]]).unwrap();
        let text = format_matrices(MatrixKind::Matrix, 2, [("verb:obj", &m)]);
        let (kind, items) = parse_matrices(&text).unwrap();
        assert_eq!(kind, MatrixKind::Matrix);
        assert_eq!(items, vec![("verb:obj".to_string(), m)]);

        let truncated: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        let err = parse_matrices(&truncated).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let short_row = "matrix 2\nv\n1 2\n3\n";
        assert!(matches!(parse_matrices(short_row), Err(Error::HeaderMismatch(_))));
    }

    #[test]
    fn densities_validated_on_load() {
        let rho = DensityMatrix::new("cat", Matrix::from_diag(&[0.5, 0.5])).unwrap();
        let back = parse_densities(&format_densities(2, [&rho])).unwrap();
        assert_eq!(back, vec![rho]);
        let bad = "density 2\nx\n1 0\n0 1\n";
        assert!(matches!(parse_densities(bad), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn counts_round_trip() {
        let words = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
        let c = CooccurrenceCounts::from_dense(words("x y"), words("p q r"), 5, vec![0, 2, 0, 7, 0, 1])
            .unwrap();
        assert_eq!(parse_counts(&format_counts(&c)).unwrap(), c);
        let out_of_range = "counts 1 1 5\n#row\t0\ta\n#col\t0\tb\n0 3 1\n";
        assert!(matches!(parse_counts(out_of_range), Err(Error::HeaderMismatch(_))));
    }

    #[test]
    fn dependencies() {
        let deps = parse_dependencies("# comment\neat\tobj\tapple\t3\neat\tsubj\tman\t1\n").unwrap();
        assert_eq!(deps.len(), 2);
        assert_eq!(deps[1].relation, Relation::Subject);
        assert_eq!(parse_dependencies(&format_dependencies(&deps)).unwrap(), deps);
        let err = parse_dependencies("eat\tiobj\tapple\t3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, column: 5, .. }), "{err}");
        let err = parse_dependencies("eat\tobj\tapple\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
