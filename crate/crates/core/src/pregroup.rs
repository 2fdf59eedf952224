//! Pregroup types, a typed lexicon and planar reduction search.
//!
//! A reduction of a type string is a set of non-crossing ε-links between
//! adjacent-compatible factors (`x⁽ᶻ⁾ · x⁽ᶻ⁺¹⁾ → 1`), with the uncontracted
//! factors reading off the target type. Positions are 0-based indices into
//! the flattened factor string.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasicType(String);

impl BasicType {
    pub fn new(symbol: impl Into<String>) -> Self {
        BasicType(symbol.into())
    }

    pub fn symbol(&self) -> &str {
        &self.0
    }

    pub fn noun() -> Self {
        BasicType::new("n")
    }

    pub fn sentence() -> Self {
        BasicType::new("s")
    }
}

impl fmt::Display for BasicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A basic type with an iterated adjoint: `z < 0` left, `z > 0` right.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimpleType {
    pub base: BasicType,
    pub adjoint: i32,
}

impl SimpleType {
    pub fn plain(base: BasicType) -> Self {
        SimpleType { base, adjoint: 0 }
    }

    pub fn left(&self) -> Self {
        SimpleType {
            base: self.base.clone(),
            adjoint: self.adjoint - 1,
        }
    }

    pub fn right(&self) -> Self {
        SimpleType {
            base: self.base.clone(),
            adjoint: self.adjoint + 1,
        }
    }

    /// True when `self · other ≤ 1`, i.e. `other` is the right adjoint of `self`.
    pub fn contracts_with(&self, other: &SimpleType) -> bool {
        self.base == other.base && other.adjoint == self.adjoint + 1
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        let mark = if self.adjoint > 0 { "ʳ" } else { "ˡ" };
        for _ in 0..self.adjoint.unsigned_abs() {
            f.write_str(mark)?;
        }
        Ok(())
    }
}

/// Monoid product of simple types; the empty product is the unit `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PregroupType {
    factors: Vec<SimpleType>,
}

impl PregroupType {
    pub fn unit() -> Self {
        PregroupType::default()
    }

    pub fn new(factors: Vec<SimpleType>) -> Self {
        PregroupType { factors }
    }

    pub fn basic(base: BasicType) -> Self {
        PregroupType::new(vec![SimpleType::plain(base)])
    }

    pub fn factors(&self) -> &[SimpleType] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn concat(&self, other: &PregroupType) -> PregroupType {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        PregroupType { factors }
    }

    /// Parses strings such as `n^r.s.n^l` or `nʳ·s·nˡ`.
    ///
    /// Factors are separated by `.`, `·` or whitespace; each carries any
    /// number of `^r`/`ʳ` or `^l`/`ˡ` suffixes. `1` denotes the unit.
    pub fn parse(text: &str) -> Result<PregroupType> {
        let text = text.trim();
        if text == "1" || text.is_empty() {
            return Ok(PregroupType::unit());
        }
        let mut factors = Vec::new();
        for (pos, token) in text
            .split(|c: char| c == '.' || c == '·' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .enumerate()
        {
            factors.push(parse_simple(token).ok_or_else(|| {
                parse_err(1, pos + 1, format!("malformed simple type `{token}`"))
            })?);
        }
        Ok(PregroupType { factors })
    }
}

fn parse_simple(token: &str) -> Option<SimpleType> {
    let split = token
        .find(|c: char| c == '^' || c == 'ʳ' || c == 'ˡ')
        .unwrap_or(token.len());
    let (base, mut rest) = token.split_at(split);
    if base.is_empty() || !base.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return None;
    }
    let mut adjoint = 0i32;
    while !rest.is_empty() {
        if let Some(r) = rest.strip_prefix("^r").or_else(|| rest.strip_prefix('ʳ')) {
            adjoint += 1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix("^l").or_else(|| rest.strip_prefix('ˡ')) {
            adjoint -= 1;
            rest = r;
        } else {
            return None;
        }
    }
    Some(SimpleType {
        base: BasicType::new(base),
        adjoint,
    })
}

impl fmt::Display for PregroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, t) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("·")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Concatenation of all factors, preserving order.
pub fn flatten(types: &[PregroupType]) -> Vec<SimpleType> {
    types.iter().flat_map(|t| t.factors.iter().cloned()).collect()
}

/// Word categories of the standard English lexicon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Noun,
    Adjective,
    IntransitiveVerb,
    TransitiveVerb,
}

impl Category {
    pub fn from_name(name: &str) -> Result<Category> {
        match name.trim() {
            "noun" | "n" => Ok(Category::Noun),
            "adj" | "adjective" => Ok(Category::Adjective),
            "iverb" | "intransitive verb" | "intransitive_verb" => Ok(Category::IntransitiveVerb),
            "tverb" | "transitive verb" | "transitive_verb" => Ok(Category::TransitiveVerb),
            other => Err(Error::UnknownCategory(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Category::Noun => "noun",
            Category::Adjective => "adj",
            Category::IntransitiveVerb => "iverb",
            Category::TransitiveVerb => "tverb",
        }
    }

    /// `noun → n`, `adj → n·nˡ`, `iverb → nʳ·s`, `tverb → nʳ·s·nˡ`.
    pub fn pregroup_type(self) -> PregroupType {
        let n = SimpleType::plain(BasicType::noun());
        let s = SimpleType::plain(BasicType::sentence());
        match self {
            Category::Noun => PregroupType::new(vec![n]),
            Category::Adjective => PregroupType::new(vec![n.clone(), n.left()]),
            Category::IntransitiveVerb => PregroupType::new(vec![n.right(), s]),
            Category::TransitiveVerb => PregroupType::new(vec![n.right(), s, n.left()]),
        }
    }
}

/// Assignment of pregroup types to words (`R ⊆ T(B) × Σ`).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Lexicon {
    basic_types: BTreeSet<BasicType>,
    entries: BTreeMap<String, BTreeSet<PregroupType>>,
}

impl Lexicon {
    pub fn new(basic_types: impl IntoIterator<Item = BasicType>) -> Self {
        Lexicon {
            basic_types: basic_types.into_iter().collect(),
            entries: BTreeMap::new(),
        }
    }

    /// Empty lexicon over `basic_types`, which must contain `n` and `s`.
    pub fn standard(basic_types: impl IntoIterator<Item = BasicType>) -> Result<Self> {
        let lex = Lexicon::new(basic_types);
        for required in [BasicType::noun(), BasicType::sentence()] {
            if !lex.basic_types.contains(&required) {
                return Err(Error::UnknownBasicType(required.0));
            }
        }
        Ok(lex)
    }

    pub fn category(&self, name: &str) -> Result<PregroupType> {
        Ok(Category::from_name(name)?.pregroup_type())
    }

    pub fn basic_types(&self) -> &BTreeSet<BasicType> {
        &self.basic_types
    }

    pub fn add_category(&mut self, word: &str, category: &str) -> Result<()> {
        let ty = self.category(category)?;
        self.add_type(word, ty)
    }

    pub fn add_type(&mut self, word: &str, ty: PregroupType) -> Result<()> {
        if let Some(bad) = ty
            .factors()
            .iter()
            .find(|f| !self.basic_types.contains(&f.base))
        {
            return Err(Error::UnknownBasicType(bad.base.0.clone()));
        }
        self.entries.entry(word.to_string()).or_default().insert(ty);
        Ok(())
    }

    pub fn types_of(&self, word: &str) -> Option<&BTreeSet<PregroupType>> {
        self.entries.get(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `word<TAB>category` lines; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lex = Lexicon::standard([BasicType::noun(), BasicType::sentence()])?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let word = parts.next().unwrap_or("").trim();
            let Some(cat) = parts.next() else {
                return Err(parse_err(lineno + 1, line.len() + 1, "expected word<TAB>category"));
            };
            if word.is_empty() {
                return Err(parse_err(lineno + 1, 1, "empty word"));
            }
            lex.add_category(word, cat).map_err(|e| {
                parse_err(lineno + 1, word.len() + 2, e.to_string())
            })?;
        }
        Ok(lex)
    }

    /// Finds a grammatical reading of `words`, backtracking over lexical type
    /// choices in lexicon order. The first choice tuple that reduces wins.
    pub fn parse(&self, words: &[&str], target: &PregroupType) -> Result<Parse> {
        let mut options = Vec::with_capacity(words.len());
        for w in words {
            let types = self
                .types_of(w)
                .ok_or_else(|| Error::MissingWord(w.to_string()))?;
            options.push(types.iter().cloned().collect::<Vec<_>>());
        }
        let mut choice = vec![0usize; words.len()];
        let mut first: Option<Parse> = None;
        let mut readings = 0usize;
        let mut best_partial: Option<Reduction> = None;
        loop {
            let types: Vec<PregroupType> = choice
                .iter()
                .zip(&options)
                .map(|(&c, opts)| opts[c].clone())
                .collect();
            let all = reduce_all(&types, target);
            if all.is_empty() {
                let partial = greedy_partial(&flatten(&types));
                if best_partial
                    .as_ref()
                    .is_none_or(|b| partial.surviving.len() < b.surviving.len())
                {
                    best_partial = Some(partial);
                }
            } else {
                readings += all.len();
                if first.is_none() {
                    first = Some(Parse {
                        types,
                        reduction: all[0].clone(),
                        alternates: 0,
                    });
                }
            }
            if !advance(&mut choice, &options) {
                break;
            }
        }
        match first {
            Some(mut p) => {
                p.alternates = readings - 1;
                Ok(p)
            }
            None => Err(Error::Ungrammatical {
                best_partial: best_partial.unwrap_or_default(),
            }),
        }
    }
}

fn advance(choice: &mut [usize], options: &[Vec<PregroupType>]) -> bool {
    for i in (0..choice.len()).rev() {
        if choice[i] + 1 < options[i].len() {
            choice[i] += 1;
            for c in choice.iter_mut().skip(i + 1) {
                *c = 0;
            }
            return true;
        }
    }
    false
}

/// A grammatical reading: chosen types, the reduction, and how many other
/// readings exist (diagnostic only).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Parse {
    pub types: Vec<PregroupType>,
    pub reduction: Reduction,
    pub alternates: usize,
}

/// Planar ε-links over flattened factor positions plus the surviving factors.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Reduction {
    pub links: Vec<(usize, usize)>,
    pub surviving: Vec<usize>,
}

impl Reduction {
    pub fn identity(len: usize) -> Self {
        Reduction {
            links: Vec::new(),
            surviving: (0..len).collect(),
        }
    }

    /// Checks disjointness, planarity, adjoint compatibility, that no
    /// surviving factor sits under a link, and that survivors spell `target`.
    pub fn validate(&self, flat: &[SimpleType], target: &PregroupType) -> Result<()> {
        let bad = |m: String| Err(Error::InconsistentPlan(m));
        let mut seen = vec![false; flat.len()];
        for &(i, j) in &self.links {
            if i >= j || j >= flat.len() {
                return bad(format!("link ({i}, {j}) out of order or range"));
            }
            for k in [i, j] {
                if std::mem::replace(&mut seen[k], true) {
                    return bad(format!("position {k} used twice"));
                }
            }
            if !flat[i].contracts_with(&flat[j]) {
                return bad(format!("{} and {} do not contract", flat[i], flat[j]));
            }
        }
        for &s in &self.surviving {
            if s >= flat.len() || std::mem::replace(&mut seen[s], true) {
                return bad(format!("surviving position {s} invalid or reused"));
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("some position neither linked nor surviving".into());
        }
        for (a, &(i, j)) in self.links.iter().enumerate() {
            for &(k, l) in &self.links[a + 1..] {
                if (i < k && k < j && j < l) || (k < i && i < l && l < j) {
                    return bad(format!("links ({i}, {j}) and ({k}, {l}) cross"));
                }
            }
            if let Some(s) = self.surviving.iter().find(|&&s| i < s && s < j) {
                return bad(format!("surviving position {s} lies under link ({i}, {j})"));
            }
        }
        if !self.surviving.windows(2).all(|w| w[0] < w[1]) {
            return bad("surviving positions out of order".into());
        }
        let out: Vec<&SimpleType> = self.surviving.iter().map(|&s| &flat[s]).collect();
        if out.len() != target.len() || out.iter().zip(target.factors()).any(|(a, b)| *a != b) {
            return bad("surviving factors do not spell the target".into());
        }
        Ok(())
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let links: Vec<String> = self
            .links
            .iter()
            .map(|(i, j)| format!("({i},{j})"))
            .collect();
        write!(f, "links [{}] surviving {:?}", links.join(","), self.surviving)
    }
}

/// Reduces a type string to `target`.
///
/// Among all planar reductions the one with the lexicographically smallest
/// sorted link list is returned. Failure carries the greedy adjacent
/// cancellation as the best partial reduction.
pub fn reduce(types: &[PregroupType], target: &PregroupType) -> Result<Reduction> {
    let flat = flatten(types);
    match reduce_all(types, target).into_iter().next() {
        Some(r) => Ok(r),
        None => Err(Error::Ungrammatical {
            best_partial: greedy_partial(&flat),
        }),
    }
}

/// Every planar reduction of `types` to `target`, sorted by link list.
pub fn reduce_all(types: &[PregroupType], target: &PregroupType) -> Vec<Reduction> {
    let flat = flatten(types);
    let mut search = Search {
        flat: &flat,
        target: target.factors(),
        closed: HashMap::new(),
    };
    let mut out: Vec<Reduction> = search
        .tails(0, 0)
        .into_iter()
        .map(|(mut links, surviving)| {
            links.sort_unstable();
            Reduction { links, surviving }
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

type Links = Vec<(usize, usize)>;

struct Search<'a> {
    flat: &'a [SimpleType],
    target: &'a [SimpleType],
    /// Complete matchings of the half-open interval `[a, b)`.
    closed: HashMap<(usize, usize), Vec<Links>>,
}

impl Search<'_> {
    /// All ways to finish from position `pos` having matched `t` target factors.
    fn tails(&mut self, pos: usize, t: usize) -> Vec<(Links, Vec<usize>)> {
        let n = self.flat.len();
        if pos == n {
            return if t == self.target.len() {
                vec![(Vec::new(), Vec::new())]
            } else {
                Vec::new()
            };
        }
        let mut out = Vec::new();
        if t < self.target.len() && self.flat[pos] == self.target[t] {
            for (links, mut surv) in self.tails(pos + 1, t + 1) {
                surv.insert(0, pos);
                out.push((links, surv));
            }
        }
        let mut j = pos + 1;
        while j < n {
            if self.flat[pos].contracts_with(&self.flat[j]) {
                let inner = self.matchings(pos + 1, j);
                if !inner.is_empty() {
                    let rest = self.tails(j + 1, t);
                    for m in &inner {
                        for (links, surv) in &rest {
                            let mut l = Vec::with_capacity(1 + m.len() + links.len());
                            l.push((pos, j));
                            l.extend_from_slice(m);
                            l.extend_from_slice(links);
                            out.push((l, surv.clone()));
                        }
                    }
                }
            }
            j += 2;
        }
        out
    }

    /// Complete planar matchings of `[a, b)`.
    fn matchings(&mut self, a: usize, b: usize) -> Vec<Links> {
        if a >= b {
            return vec![Vec::new()];
        }
        if (b - a) % 2 == 1 {
            return Vec::new();
        }
        if let Some(hit) = self.closed.get(&(a, b)) {
            return hit.clone();
        }
        let mut out = Vec::new();
        let mut j = a + 1;
        while j < b {
            if self.flat[a].contracts_with(&self.flat[j]) {
                let inner = self.matchings(a + 1, j);
                if !inner.is_empty() {
                    let rest = self.matchings(j + 1, b);
                    for m in &inner {
                        for r in &rest {
                            let mut l = Vec::with_capacity(1 + m.len() + r.len());
                            l.push((a, j));
                            l.extend_from_slice(m);
                            l.extend_from_slice(r);
                            out.push(l);
                        }
                    }
                }
            }
            j += 2;
        }
        self.closed.insert((a, b), out.clone());
        out
    }
}

/// Stack-based adjacent cancellation, left to right.
fn greedy_partial(flat: &[SimpleType]) -> Reduction {
    let mut stack: Vec<usize> = Vec::new();
    let mut links = Vec::new();
    for (i, f) in flat.iter().enumerate() {
        match stack.last() {
            Some(&top) if flat[top].contracts_with(f) => {
                stack.pop();
                links.push((top, i));
            }
            _ => stack.push(i),
        }
    }
    links.sort_unstable();
    Reduction {
        links,
        surviving: stack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> PregroupType {
        PregroupType::parse(s).unwrap()
    }

    #[test]
    fn standard_categories() {
        let lex = Lexicon::standard([BasicType::noun(), BasicType::sentence()]).unwrap();
        assert_eq!(lex.category("intransitive verb").unwrap(), ty("n^r.s"));
        assert_eq!(lex.category("transitive verb").unwrap(), ty("n^r.s.n^l"));
        assert_eq!(lex.category("noun").unwrap(), ty("n"));
        assert_eq!(lex.category("adj").unwrap(), ty("n.n^l"));
        assert!(matches!(lex.category("adverb"), Err(Error::UnknownCategory(_))));
    }

    #[test]
    fn standard_requires_n_and_s() {
        assert!(matches!(
            Lexicon::standard([BasicType::noun()]),
            Err(Error::UnknownBasicType(_))
        ));
    }

    #[test]
    fn parse_and_display() {
        let t = ty("nʳ·s·nˡ");
        assert_eq!(t, ty("n^r.s.n^l"));
        assert_eq!(t.to_string(), "nʳ·s·nˡ");
        assert_eq!(ty("n^r^r").factors()[0].adjoint, 2);
        assert_eq!(ty("1"), PregroupType::unit());
        assert!(PregroupType::parse("n^x").is_err());
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(flatten(&[ty("n"), ty("n^r.s")]), ty("n.n^r.s").factors().to_vec());
        assert!(flatten(&[]).is_empty());
        assert_eq!(flatten(&[ty("n^r.s.n^l")]).len(), 3);
    }

    #[test]
    fn intransitive_sentence() {
        let r = reduce(&[ty("n"), ty("n^r.s")], &ty("s")).unwrap();
        assert_eq!(r.links, vec![(0, 1)]);
        assert_eq!(r.surviving, vec![2]);
    }

    #[test]
    fn adjective_noun() {
        let r = reduce(&[ty("n.n^l"), ty("n")], &ty("n")).unwrap();
        assert_eq!(r.links, vec![(1, 2)]);
        assert_eq!(r.surviving, vec![0]);
    }

    #[test]
    fn transitive_sentence() {
        let types = [ty("n"), ty("n^r.s.n^l"), ty("n")];
        let r = reduce(&types, &ty("s")).unwrap();
        assert_eq!(r.links, vec![(0, 1), (3, 4)]);
        assert_eq!(r.surviving, vec![2]);
        assert_eq!(reduce_all(&types, &ty("s")).len(), 1);
        r.validate(&flatten(&types), &ty("s")).unwrap();
    }

    #[test]
    fn single_word_is_identity() {
        let r = reduce(&[ty("n")], &ty("n")).unwrap();
        assert_eq!(r, Reduction::identity(1));
    }

    #[test]
    fn nested_links() {
        // s · nˡ · nˡ applied to two nouns: the inner pair closes first.
        let types = [ty("s.n^l.n^l"), ty("n"), ty("n")];
        let r = reduce(&types, &ty("s")).unwrap();
        assert_eq!(r.links, vec![(1, 4), (2, 3)]);
    }

    #[test]
    fn ungrammatical_reports_partial() {
        let err = reduce(&[ty("n"), ty("n")], &ty("s")).unwrap_err();
        match err {
            Error::Ungrammatical { best_partial } => {
                assert!(best_partial.links.is_empty());
                assert_eq!(best_partial.surviving, vec![0, 1]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lexicon_backtracks_over_types() {
        let mut lex = Lexicon::standard([BasicType::noun(), BasicType::sentence()]).unwrap();
        lex.add_category("dogs", "noun").unwrap();
        lex.add_category("bark", "tverb").unwrap();
        lex.add_category("bark", "iverb").unwrap();
        let p = lex.parse(&["dogs", "bark"], &ty("s")).unwrap();
        assert_eq!(p.types[1], ty("n^r.s"));
        assert_eq!(p.alternates, 0);
        assert!(matches!(
            lex.parse(&["dogs", "cats"], &ty("s")),
            Err(Error::MissingWord(_))
        ));
    }

    #[test]
    fn lexicon_file() {
        let text = "# demo\ncat\tnoun\nblack\tadj\nsleeps\tiverb  # trailing\n";
        let lex = Lexicon::from_text(text).unwrap();
        assert_eq!(lex.len(), 3);
        let p = lex.parse(&["black", "cat", "sleeps"], &ty("s")).unwrap();
        assert_eq!(p.reduction.links, vec![(0, 3), (1, 2)]);
        let err = Lexicon::from_text("cat\tverbish\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(matches!(Lexicon::from_text("cat\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn add_type_checks_basic_types() {
        let mut lex = Lexicon::standard([BasicType::noun(), BasicType::sentence()]).unwrap();
        assert!(matches!(
            lex.add_type("x", ty("q")),
            Err(Error::UnknownBasicType(_))
        ));
    }
}
