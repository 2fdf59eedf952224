//! Meanings of phrases from meanings of words.
//!
//! A pregroup [`Reduction`] is executed as a tensor contraction: every ε-link
//! sums over a pair of indices of the word tensors. The vector instantiation
//! contracts plain word tensors; the density instantiation doubles every
//! index (ket and bra) and contracts both copies. The closed forms for
//! two-word verb phrases live alongside and are cross-checked against the
//! engine in tests.
//!
//! A single base space of dimension `D` serves as both the noun and the
//! sentence space.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{representativeness_vn_with, support_inclusion_with, Tolerances};
use crate::model_build::RelationalVerbMatrix;
use crate::pregroup::{reduce, BasicType, PregroupType, Reduction, SimpleType};
use crate::tensor::{hadamard, normalize_l1, normalize_trace, DensityMatrix, Matrix, SymMatrix, WordVector};

/// Trace below which a composed density counts as degenerate.
pub const PHRASE_TRACE_TOL: f64 = 1e-14;

/// Order of the two words in a verb phrase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WordOrder {
    #[serde(rename = "verb-object")]
    VerbObject,
    #[serde(rename = "subject-verb")]
    SubjectVerb,
}

impl WordOrder {
    pub fn parse(s: &str) -> Result<WordOrder> {
        match s.trim() {
            "verb-object" | "vo" | "VO" => Ok(WordOrder::VerbObject),
            "subject-verb" | "sv" | "SV" => Ok(WordOrder::SubjectVerb),
            other => Err(Error::InvalidArgument(format!("unknown word order `{other}`"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WordOrder::VerbObject => "verb-object",
            WordOrder::SubjectVerb => "subject-verb",
        }
    }

    /// Grammatical relation linking the verb to its noun in this order.
    pub fn relation(self) -> Relation {
        match self {
            WordOrder::VerbObject => Relation::Object,
            WordOrder::SubjectVerb => Relation::Subject,
        }
    }

    /// Position of the verb among the two tokens.
    pub fn verb_position(self) -> usize {
        match self {
            WordOrder::VerbObject => 0,
            WordOrder::SubjectVerb => 1,
        }
    }

    /// Pregroup types of the two words: `s·nˡ, n` or `n, nʳ·s`.
    pub fn types(self) -> Vec<PregroupType> {
        let n = SimpleType::plain(BasicType::noun());
        let s = SimpleType::plain(BasicType::sentence());
        match self {
            WordOrder::VerbObject => vec![
                PregroupType::new(vec![s, n.left()]),
                PregroupType::new(vec![n]),
            ],
            WordOrder::SubjectVerb => vec![
                PregroupType::new(vec![n.clone()]),
                PregroupType::new(vec![n.right(), s]),
            ],
        }
    }
}

impl fmt::Display for WordOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "subj")]
    Subject,
    #[serde(rename = "obj")]
    Object,
}

impl Relation {
    pub fn parse(s: &str) -> Result<Relation> {
        match s.trim() {
            "subj" | "subject" => Ok(Relation::Subject),
            "obj" | "object" | "dobj" => Ok(Relation::Object),
            other => Err(Error::InvalidArgument(format!("unknown relation `{other}`"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Subject => "subj",
            Relation::Object => "obj",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense order-`k` tensor over a `D`-dimensional space, typed by a pregroup
/// type with `k` factors. Row-major index order follows the factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordTensor {
    pub ty: PregroupType,
    pub dim: usize,
    data: Vec<f64>,
}

impl WordTensor {
    pub fn new(ty: PregroupType, dim: usize, data: Vec<f64>) -> Result<Self> {
        let expected = dim.pow(ty.len() as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: data.len(),
            });
        }
        Ok(WordTensor { ty, dim, data })
    }

    pub fn from_vector(ty: PregroupType, v: &WordVector) -> Result<Self> {
        WordTensor::new(ty, v.dim(), v.entries().to_vec())
    }

    pub fn from_matrix(ty: PregroupType, m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        WordTensor::new(ty, m.rows(), m.as_slice().to_vec())
    }

    pub fn order(&self) -> usize {
        self.ty.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&self, s: f64) -> WordTensor {
        WordTensor {
            ty: self.ty.clone(),
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &WordTensor) -> Result<WordTensor> {
        if self.ty != other.ty || self.dim != other.dim {
            return Err(Error::InvalidArgument("tensor shapes differ".into()));
        }
        Ok(WordTensor {
            ty: self.ty.clone(),
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn to_vector(&self) -> Result<WordVector> {
        if self.order() != 1 {
            return Err(Error::InvalidArgument(format!(
                "tensor of order {} is not a vector",
                self.order()
            )));
        }
        WordVector::unlabelled(self.data.clone())
    }
}

/// The density (CPM) image of a word: an operator on `V^{⊗k}`, stored as an
/// order-`2k` tensor with the `k` ket indices first and the `k` bra indices after.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityTensor {
    pub ty: PregroupType,
    pub dim: usize,
    data: Vec<f64>,
}

impl DensityTensor {
    /// `op` is a `D^k × D^k` operator on the word's factor space.
    pub fn from_operator(ty: PregroupType, dim: usize, op: &Matrix) -> Result<Self> {
        let side = dim.pow(ty.len() as u32);
        if op.rows() != side || op.cols() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                got: op.rows(),
            });
        }
        Ok(DensityTensor {
            ty,
            dim,
            data: op.as_slice().to_vec(),
        })
    }

    pub fn from_density(ty: PregroupType, rho: &DensityMatrix) -> Result<Self> {
        if ty.len() != 1 {
            return Err(Error::InvalidArgument(
                "a D×D density matrix types a single factor".into(),
            ));
        }
        DensityTensor::from_operator(ty, rho.dim(), rho.matrix())
    }

    /// `|ψ⟩⟨ψ|` for a state `ψ` on the word's factor space.
    pub fn pure(ty: PregroupType, dim: usize, state: &[f64]) -> Result<Self> {
        let side = dim.pow(ty.len() as u32);
        if state.len() != side {
            return Err(Error::DimensionMismatch {
                expected: side,
                got: state.len(),
            });
        }
        let mut data = vec![0.0; side * side];
        for (i, &a) in state.iter().enumerate() {
            for (j, &b) in state.iter().enumerate() {
                data[i * side + j] = a * b;
            }
        }
        Ok(DensityTensor { ty, dim, data })
    }

    /// Lifts a `D×D` verb operator to its two-factor density tensor by taking
    /// the operator itself as a pure state on `S ⊗ N` (or `N ⊗ S`). Contracting
    /// it with a noun density gives `v̂ n̂ v̂ᵀ`.
    pub fn verb_lift(order: WordOrder, verb: &Matrix) -> Result<Self> {
        if !verb.is_square() {
            return Err(Error::DimensionMismatch {
                expected: verb.rows(),
                got: verb.cols(),
            });
        }
        let ty = order.types()[order.verb_position()].clone();
        let state = match order {
            WordOrder::VerbObject => verb.as_slice().to_vec(),
            WordOrder::SubjectVerb => verb.transpose().into_vec(),
        };
        DensityTensor::pure(ty, verb.rows(), &state)
    }

    pub fn factors(&self) -> usize {
        self.ty.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// The operator as a `D^k × D^k` matrix.
    pub fn operator(&self) -> Matrix {
        let side = self.dim.pow(self.factors() as u32);
        Matrix::from_vec(side, side, self.data.clone()).expect("shape checked at construction")
    }

    pub fn scale(&self, s: f64) -> DensityTensor {
        DensityTensor {
            ty: self.ty.clone(),
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &DensityTensor) -> Result<DensityTensor> {
        if self.ty != other.ty || self.dim != other.dim {
            return Err(Error::InvalidArgument("tensor shapes differ".into()));
        }
        Ok(DensityTensor {
            ty: self.ty.clone(),
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// Operator on the factor space, trace-normalized.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let sym = SymMatrix::new(symmetrized(&self.operator()))?;
        normalize_trace(&sym, PHRASE_TRACE_TOL)
            .map_err(|e| Error::DegeneratePhrase(e.to_string()))
    }
}

/// `(A + Aᵀ)/2`. Contractions of symmetric operators are symmetric in exact
/// arithmetic, but cancellation can leave rounding asymmetry far above the
/// relative check in [`SymMatrix::new`] when the result is tiny.
fn symmetrized(a: &Matrix) -> Matrix {
    a.add(&a.transpose()).expect("square").scale(0.5)
}

/// ε-links over flattened factor positions plus the surviving positions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionPlan {
    pub links: Vec<(usize, usize)>,
    pub output_indices: Vec<usize>,
}

impl ContractionPlan {
    pub fn from_reduction(r: &Reduction) -> Self {
        ContractionPlan {
            links: r.links.clone(),
            output_indices: r.surviving.clone(),
        }
    }

    pub fn identity(factors: usize) -> Self {
        ContractionPlan {
            links: Vec::new(),
            output_indices: (0..factors).collect(),
        }
    }

    /// Every position in `0..factors` must appear exactly once.
    pub fn validate(&self, factors: usize) -> Result<()> {
        let mut seen = vec![false; factors];
        let positions = self
            .links
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(self.output_indices.iter().copied());
        for p in positions {
            if p >= factors {
                return Err(Error::InconsistentPlan(format!(
                    "index {p} outside {factors} factors"
                )));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::InconsistentPlan(format!("index {p} used twice")));
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::InconsistentPlan(format!("index {p} never used")));
        }
        Ok(())
    }
}

/// Types and plan of a two-word verb phrase, obtained by reduction to `s`.
pub fn phrase_plan(order: WordOrder) -> (Vec<PregroupType>, ContractionPlan) {
    let types = order.types();
    let target = PregroupType::basic(BasicType::sentence());
    let r = reduce(&types, &target).expect("verb phrase types always reduce to s");
    (types, ContractionPlan::from_reduction(&r))
}

// ---------------------------------------------------------------------------
// Contraction engine

struct Labeled {
    labels: Vec<usize>,
    data: Vec<f64>,
}

/// Reorders axes so that new axis `k` is old axis `perm[k]`.
fn permute(data: &[f64], dim: usize, perm: &[usize]) -> Vec<f64> {
    let rank = perm.len();
    if rank <= 1 || perm.iter().enumerate().all(|(k, &p)| k == p) {
        return data.to_vec();
    }
    let mut old_stride = vec![1usize; rank];
    for a in (0..rank.saturating_sub(1)).rev() {
        old_stride[a] = old_stride[a + 1] * dim;
    }
    let strides: Vec<usize> = perm.iter().map(|&p| old_stride[p]).collect();
    let mut out = Vec::with_capacity(data.len());
    let mut idx = vec![0usize; rank];
    let mut offset = 0usize;
    for _ in 0..data.len() {
        out.push(data[offset]);
        for k in (0..rank).rev() {
            idx[k] += 1;
            offset += strides[k];
            if idx[k] < dim {
                break;
            }
            offset -= strides[k] * dim;
            idx[k] = 0;
        }
    }
    out
}

/// Sums over the diagonal of the axis pairs in `pairs` (positions within `t`).
fn self_trace(t: Labeled, dim: usize, pairs: &[(usize, usize)]) -> Labeled {
    if pairs.is_empty() {
        return t;
    }
    let traced: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    let free: Vec<usize> = (0..t.labels.len()).filter(|p| !traced.contains(p)).collect();
    let mut perm = free.clone();
    for &(a, b) in pairs {
        perm.push(a);
        perm.push(b);
    }
    let data = permute(&t.data, dim, &perm);
    let block = dim.pow(2 * pairs.len() as u32);
    // Offsets inside a traced block where every pair index agrees.
    let mut diag = vec![0usize];
    for _ in pairs {
        let mut next = Vec::with_capacity(diag.len() * dim);
        for &d in &diag {
            for i in 0..dim {
                next.push(d * dim * dim + i * dim + i);
            }
        }
        diag = next;
    }
    let out: Vec<f64> = data
        .chunks(block)
        .map(|chunk| diag.iter().map(|&d| chunk[d]).sum())
        .collect();
    Labeled {
        labels: free.iter().map(|&p| t.labels[p]).collect(),
        data: out,
    }
}

/// Contracts `a` and `b` over label pairs `(la, lb)`; free labels of `a` come first.
fn contract_two(a: Labeled, b: Labeled, dim: usize, pairs: &[(usize, usize)]) -> Labeled {
    let pos = |labels: &[usize], l: usize| labels.iter().position(|&x| x == l).expect("label present");
    let ca: Vec<usize> = pairs.iter().map(|&(la, _)| pos(&a.labels, la)).collect();
    let cb: Vec<usize> = pairs.iter().map(|&(_, lb)| pos(&b.labels, lb)).collect();
    let fa: Vec<usize> = (0..a.labels.len()).filter(|p| !ca.contains(p)).collect();
    let fb: Vec<usize> = (0..b.labels.len()).filter(|p| !cb.contains(p)).collect();

    let perm_a: Vec<usize> = fa.iter().chain(&ca).copied().collect();
    let perm_b: Vec<usize> = cb.iter().chain(&fb).copied().collect();
    let rows = dim.pow(fa.len() as u32);
    let inner = dim.pow(ca.len() as u32);
    let cols = dim.pow(fb.len() as u32);
    let ma = Matrix::from_vec(rows, inner, permute(&a.data, dim, &perm_a)).expect("shape");
    let mb = Matrix::from_vec(inner, cols, permute(&b.data, dim, &perm_b)).expect("shape");
    let product = ma.matmul(&mb).expect("inner dimensions agree");
    Labeled {
        labels: fa
            .iter()
            .map(|&p| a.labels[p])
            .chain(fb.iter().map(|&p| b.labels[p]))
            .collect(),
        data: product.into_vec(),
    }
}

/// Folds tensors left to right, contracting each link as soon as both ends
/// are present; the full tensor product is never materialised.
fn contract_network(
    dim: usize,
    tensors: Vec<Labeled>,
    pairs: &[(usize, usize)],
    output: &[usize],
) -> Vec<f64> {
    let mut acc: Option<Labeled> = None;
    for t in tensors {
        let internal: Vec<(usize, usize)> = pairs
            .iter()
            .filter_map(|&(x, y)| {
                let px = t.labels.iter().position(|&l| l == x)?;
                let py = t.labels.iter().position(|&l| l == y)?;
                Some((px, py))
            })
            .collect();
        let t = self_trace(t, dim, &internal);
        acc = Some(match acc {
            None => t,
            Some(cur) => {
                let cross: Vec<(usize, usize)> = pairs
                    .iter()
                    .filter_map(|&(x, y)| {
                        if cur.labels.contains(&x) && t.labels.contains(&y) {
                            Some((x, y))
                        } else if cur.labels.contains(&y) && t.labels.contains(&x) {
                            Some((y, x))
                        } else {
                            None
                        }
                    })
                    .collect();
                contract_two(cur, t, dim, &cross)
            }
        });
    }
    let acc = acc.unwrap_or(Labeled {
        labels: Vec::new(),
        data: vec![1.0],
    });
    let perm: Vec<usize> = output
        .iter()
        .map(|l| acc.labels.iter().position(|x| x == l).expect("output label survives"))
        .collect();
    permute(&acc.data, dim, &perm)
}

fn common_dim<'a>(dims: impl Iterator<Item = usize> + 'a) -> Result<usize> {
    let mut dim = None;
    for d in dims {
        match dim {
            None => dim = Some(d),
            Some(x) if x != d => {
                return Err(Error::DimensionMismatch { expected: x, got: d });
            }
            _ => {}
        }
    }
    dim.ok_or_else(|| Error::Empty("no tensors to contract".into()))
}

fn surviving_type(types: &[&PregroupType], output: &[usize]) -> PregroupType {
    let flat: Vec<SimpleType> = types.iter().flat_map(|t| t.factors().iter().cloned()).collect();
    PregroupType::new(output.iter().map(|&i| flat[i].clone()).collect())
}

/// Executes a contraction plan over vector-instantiation word tensors.
pub fn contract_vectors(tensors: &[WordTensor], plan: &ContractionPlan) -> Result<WordTensor> {
    let dim = common_dim(tensors.iter().map(|t| t.dim))?;
    let factors: usize = tensors.iter().map(WordTensor::order).sum();
    plan.validate(factors)?;
    let mut offset = 0;
    let labeled = tensors
        .iter()
        .map(|t| {
            let labels = (offset..offset + t.order()).collect();
            offset += t.order();
            Labeled {
                labels,
                data: t.data.clone(),
            }
        })
        .collect();
    let data = contract_network(dim, labeled, &plan.links, &plan.output_indices);
    let types: Vec<&PregroupType> = tensors.iter().map(|t| &t.ty).collect();
    WordTensor::new(surviving_type(&types, &plan.output_indices), dim, data)
}

/// Executes a plan in the density instantiation: each link contracts both
/// the ket and the bra copies of its two factors. The result is not normalized.
pub fn contract_density_tensors(
    tensors: &[DensityTensor],
    plan: &ContractionPlan,
) -> Result<DensityTensor> {
    let dim = common_dim(tensors.iter().map(|t| t.dim))?;
    let n: usize = tensors.iter().map(DensityTensor::factors).sum();
    plan.validate(n)?;
    let mut offset = 0;
    let labeled = tensors
        .iter()
        .map(|t| {
            let k = t.factors();
            let labels = (offset..offset + k).chain(n + offset..n + offset + k).collect();
            offset += k;
            Labeled {
                labels,
                data: t.data.clone(),
            }
        })
        .collect();
    let pairs: Vec<(usize, usize)> = plan
        .links
        .iter()
        .flat_map(|&(a, b)| [(a, b), (n + a, n + b)])
        .collect();
    let output: Vec<usize> = plan
        .output_indices
        .iter()
        .copied()
        .chain(plan.output_indices.iter().map(|&i| n + i))
        .collect();
    let data = contract_network(dim, labeled, &pairs, &output);
    let types: Vec<&PregroupType> = tensors.iter().map(|t| &t.ty).collect();
    Ok(DensityTensor {
        ty: surviving_type(&types, &plan.output_indices),
        dim,
        data,
    })
}

/// Density contraction followed by trace normalization; a vanishing trace is
/// a degenerate phrase.
pub fn contract_densities(tensors: &[DensityTensor], plan: &ContractionPlan) -> Result<DensityMatrix> {
    contract_density_tensors(tensors, plan)?.to_density()
}

/// Traces out the given factors of a density tensor (ket against bra).
pub fn partial_trace(t: &DensityTensor, traced: &[usize]) -> Result<DensityTensor> {
    let k = t.factors();
    if let Some(&bad) = traced.iter().find(|&&f| f >= k) {
        return Err(Error::InvalidArgument(format!("factor {bad} out of range")));
    }
    let labels: Vec<usize> = (0..2 * k).collect();
    let pairs: Vec<(usize, usize)> = traced.iter().map(|&f| (f, k + f)).collect();
    let kept: Vec<usize> = (0..k).filter(|f| !traced.contains(f)).collect();
    let traced_t = self_trace(
        Labeled {
            labels,
            data: t.data.clone(),
        },
        t.dim,
        &pairs,
    );
    let output: Vec<usize> = kept.iter().copied().chain(kept.iter().map(|&f| k + f)).collect();
    let perm: Vec<usize> = output
        .iter()
        .map(|l| traced_t.labels.iter().position(|x| x == l).expect("kept label"))
        .collect();
    let data = permute(&traced_t.data, t.dim, &perm);
    Ok(DensityTensor {
        ty: PregroupType::new(kept.iter().map(|&f| t.ty.factors()[f].clone()).collect()),
        dim: t.dim,
        data,
    })
}

/// Tensor product of two density tensors (types concatenate).
pub fn density_product(a: &DensityTensor, b: &DensityTensor) -> Result<DensityTensor> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let oa = a.operator();
    let ob = b.operator();
    let side = oa.rows() * ob.rows();
    let mut m = Matrix::zeros(side, side);
    for i in 0..oa.rows() {
        for j in 0..oa.cols() {
            let x = oa[(i, j)];
            for k in 0..ob.rows() {
                for l in 0..ob.cols() {
                    m[(i * ob.rows() + k, j * ob.cols() + l)] = x * ob[(k, l)];
                }
            }
        }
    }
    DensityTensor::from_operator(a.ty.concat(&b.ty), a.dim, &m)
}

// ---------------------------------------------------------------------------
// Closed forms

/// `v ⊙ Σᵢ ⟨n | nᵢ⟩ nᵢ`, unnormalized. Falls back to `Mᵀ n` when the verb
/// carries only its assembled matrix.
pub fn phrase_vector_raw(verb: &RelationalVerbMatrix, noun: &WordVector) -> Result<WordVector> {
    if noun.dim() != verb.dim() {
        return Err(Error::DimensionMismatch {
            expected: verb.dim(),
            got: noun.dim(),
        });
    }
    match verb.constituents() {
        Some((v, args)) => {
            let mut acc = vec![0.0; noun.dim()];
            for a in args {
                let w = noun.dot(a)?;
                for (x, y) in acc.iter_mut().zip(a.entries()) {
                    *x += w * y;
                }
            }
            hadamard(v, &WordVector::unlabelled(acc)?)
        }
        None => WordVector::unlabelled(verb.matrix().transpose().matvec(noun.entries())?),
    }
}

/// Closed-form phrase vector, L1-normalized. The formula is the same for
/// both word orders; a zero phrase is reported as degenerate.
pub fn compose_phrase_vector(
    verb: &RelationalVerbMatrix,
    noun: &WordVector,
    _order: WordOrder,
) -> Result<WordVector> {
    let raw = phrase_vector_raw(verb, noun)?;
    normalize_phrase(raw, &format!("{} {}", verb.label, noun.label))
}

fn normalize_phrase(raw: WordVector, label: &str) -> Result<WordVector> {
    if raw.is_zero() {
        return Err(Error::DegeneratePhrase(format!("`{label}` composes to zero")));
    }
    Ok(normalize_l1(&raw)?.with_label(label))
}

/// Word tensor of a relational verb in the given order: type `s·nˡ` holds
/// `Mᵀ`, type `nʳ·s` holds `M`, where `M = Σᵢ nᵢ ⊗ (v ⊙ nᵢ)`.
pub fn verb_tensor(verb: &RelationalVerbMatrix, order: WordOrder) -> Result<WordTensor> {
    let ty = order.types()[order.verb_position()].clone();
    let m = match order {
        WordOrder::VerbObject => verb.matrix().transpose(),
        WordOrder::SubjectVerb => verb.matrix().clone(),
    };
    WordTensor::from_matrix(ty, &m)
}

/// Vector-instantiation phrase through the contraction engine.
pub fn contract_phrase_vector(
    verb: &RelationalVerbMatrix,
    noun: &WordVector,
    order: WordOrder,
) -> Result<WordVector> {
    let (types, plan) = phrase_plan(order);
    let vt = verb_tensor(verb, order)?;
    let nt = WordTensor::from_vector(types[1 - order.verb_position()].clone(), noun)?;
    let tensors = match order {
        WordOrder::VerbObject => [vt, nt],
        WordOrder::SubjectVerb => [nt, vt],
    };
    contract_vectors(&tensors, &plan)?.to_vector()
}

/// `normalize_trace(v̂ n̂ v̂)`; identical for both word orders.
pub fn compose_phrase_density(verb: &DensityMatrix, noun: &DensityMatrix) -> Result<DensityMatrix> {
    if verb.dim() != noun.dim() {
        return Err(Error::DimensionMismatch {
            expected: verb.dim(),
            got: noun.dim(),
        });
    }
    let v = verb.matrix();
    let raw = v.transpose().matmul(noun.matrix())?.matmul(v)?;
    let label = format!("{} {}", verb.label, noun.label);
    let sym = SymMatrix::new(symmetrized(&raw))?;
    normalize_trace(&sym, PHRASE_TRACE_TOL)
        .map(|d| d.with_label(label.clone()))
        .map_err(|_| Error::DegeneratePhrase(format!("`{label}` composes to a zero operator")))
}

/// Density-instantiation phrase through the contraction engine, with the
/// verb lifted by [`DensityTensor::verb_lift`].
pub fn contract_phrase_density(
    verb: &DensityMatrix,
    noun: &DensityMatrix,
    order: WordOrder,
) -> Result<DensityMatrix> {
    let (types, plan) = phrase_plan(order);
    let vt = DensityTensor::verb_lift(order, verb.matrix())?;
    let nt = DensityTensor::from_density(types[1 - order.verb_position()].clone(), noun)?;
    let tensors = match order {
        WordOrder::VerbObject => [vt, nt],
        WordOrder::SubjectVerb => [nt, vt],
    };
    contract_densities(&tensors, &plan)
}

/// `Tr_N(v̂ ∘ (n̂ ⊗ 1_S))` for a verb operator on `N ⊗ S` (noun factor first).
pub fn trace_formula(verb_op: &DensityTensor, noun: &DensityMatrix) -> Result<DensityMatrix> {
    if verb_op.factors() != 2 || verb_op.dim != noun.dim() {
        return Err(Error::InvalidArgument(
            "verb operator must act on N ⊗ S over the noun's space".into(),
        ));
    }
    let dim = noun.dim();
    let id = Matrix::identity(dim);
    let n_ty = PregroupType::basic(BasicType::noun());
    let s_ty = PregroupType::basic(BasicType::sentence());
    let noun_t = DensityTensor::from_operator(n_ty, dim, noun.matrix())?;
    let id_t = DensityTensor::from_operator(s_ty, dim, &id)?;
    let lifted = density_product(&noun_t, &id_t)?;
    let composed = verb_op.operator().matmul(&lifted.operator())?;
    let composed = DensityTensor::from_operator(verb_op.ty.clone(), dim, &composed)?;
    partial_trace(&composed, &[0])?.to_density()
}

pub fn compose_additive(v: &WordVector, n: &WordVector) -> Result<WordVector> {
    check_nonnegative_pair(v, n)?;
    let sum = WordVector::unlabelled(
        v.entries().iter().zip(n.entries()).map(|(a, b)| a + b).collect(),
    )?;
    normalize_phrase(sum, &format!("{} {}", v.label, n.label))
}

pub fn compose_multiplicative(v: &WordVector, n: &WordVector) -> Result<WordVector> {
    check_nonnegative_pair(v, n)?;
    normalize_phrase(hadamard(v, n)?, &format!("{} {}", v.label, n.label))
}

fn check_nonnegative_pair(v: &WordVector, n: &WordVector) -> Result<()> {
    if v.dim() != n.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: n.dim(),
        });
    }
    for w in [v, n] {
        if let Some((index, &value)) = w.entries().iter().enumerate().find(|(_, &x)| x < 0.0) {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Randomized check that word-level entailment lifts to phrases

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PropositionConfig {
    pub trials: usize,
    pub dim: usize,
    pub phrase_len: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

impl PropositionConfig {
    pub fn new(trials: usize, dim: usize, phrase_len: usize, seed: u64) -> Self {
        PropositionConfig {
            trials,
            dim,
            phrase_len,
            seed,
            tol: Tolerances::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidArgument("dimension must be at least 2".into()));
        }
        if !(2..=3).contains(&self.phrase_len) {
            return Err(Error::InvalidArgument("phrase length must be 2 or 3".into()));
        }
        Ok(())
    }
}

/// Word types and plan of the sampled strings: a verb phrase for two words,
/// a transitive sentence for three.
pub fn proposition_grammar(phrase_len: usize) -> Result<(Vec<PregroupType>, ContractionPlan)> {
    let n = SimpleType::plain(BasicType::noun());
    let s = SimpleType::plain(BasicType::sentence());
    let types = match phrase_len {
        2 => vec![
            PregroupType::new(vec![s, n.left()]),
            PregroupType::new(vec![n]),
        ],
        3 => vec![
            PregroupType::new(vec![n.clone()]),
            PregroupType::new(vec![n.right(), s, n.left()]),
            PregroupType::new(vec![n]),
        ],
        other => {
            return Err(Error::InvalidArgument(format!(
                "phrase length {other} not supported"
            )))
        }
    };
    let r = reduce(&types, &PregroupType::basic(BasicType::sentence()))?;
    Ok((types, ContractionPlan::from_reduction(&r)))
}

/// Outcome of lifting one tuple of word pairs to the phrase level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftOutcome {
    pub included: bool,
    pub representativeness: f64,
    pub degenerate: bool,
}

impl LiftOutcome {
    pub fn holds(&self) -> bool {
        !self.degenerate && self.included && self.representativeness > 0.0
    }
}

/// Composes both strings with the same plan and checks phrase-level
/// support inclusion and `R_N > 0`.
pub fn check_lift(
    vs: &[DensityTensor],
    ws: &[DensityTensor],
    plan: &ContractionPlan,
    tol: Tolerances,
) -> Result<LiftOutcome> {
    let pv = contract_densities(vs, plan);
    let pw = contract_densities(ws, plan);
    let (pv, pw) = match (pv, pw) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(Error::DegeneratePhrase(_)), _) | (_, Err(Error::DegeneratePhrase(_))) => {
            return Ok(LiftOutcome {
                included: false,
                representativeness: 0.0,
                degenerate: true,
            })
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    Ok(LiftOutcome {
        included: support_inclusion_with(&pv, &pw, tol)?,
        representativeness: representativeness_vn_with(&pv, &pw, tol)?.value,
        degenerate: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub trial_seed: u64,
    /// Operators of the entailing string, one `D^k × D^k` matrix per word.
    pub entailing: Vec<Vec<Vec<f64>>>,
    pub entailed: Vec<Vec<Vec<f64>>>,
    pub outcome: LiftOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub trials: usize,
    pub dim: usize,
    pub phrase_len: usize,
    pub seed: u64,
    pub negative_control: bool,
    pub passed: usize,
    pub failed: usize,
    pub degenerate: usize,
    pub min_representativeness: Option<f64>,
    pub counterexample: Option<Counterexample>,
}

impl PropositionReport {
    pub fn to_text(&self) -> String {
        let kind = if self.negative_control {
            "negative control"
        } else {
            "proposition"
        };
        let mut out = format!(
            "{kind}: D={} n={} trials={} seed={}\npassed={} failed={} degenerate={}\n",
            self.dim, self.phrase_len, self.trials, self.seed, self.passed, self.failed, self.degenerate
        );
        if let Some(m) = self.min_representativeness {
            out.push_str(&format!("min R_N over passing trials = {m:.6e}\n"));
        }
        if let Some(c) = &self.counterexample {
            out.push_str(&format!(
                "first failing trial {} (trial seed {}): included={} R_N={:.6e}\n",
                c.trial, c.trial_seed, c.outcome.included, c.outcome.representativeness
            ));
        }
        out
    }
}

/// Deterministic per-trial seed (splitmix64 over the master seed and index).
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut z = master ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `G Gᵀ / Tr` for a Gaussian `side × rank` factor `G`.
fn random_positive(rng: &mut ChaCha8Rng, side: usize, rank: usize) -> Matrix {
    let mut g = Matrix::zeros(side, rank);
    for i in 0..side {
        for j in 0..rank {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let p = g.matmul(&g.transpose()).expect("shapes agree");
    let tr = p.trace();
    p.scale(1.0 / tr)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn operator_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

struct TrialWords {
    v: Vec<DensityTensor>,
    w: Vec<DensityTensor>,
}

fn sample_trial(cfg: &PropositionConfig, types: &[PregroupType], seed: u64) -> Result<TrialWords> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Vec::with_capacity(types.len());
    let mut w = Vec::with_capacity(types.len());
    for ty in types {
        let side = cfg.dim.pow(ty.len() as u32);
        let rank = rng.random_range(1..=side);
        let vi = random_positive(&mut rng, side, rank);
        // r ∈ (0, 1]
        let r: f64 = 1.0 - rng.random::<f64>();
        let wi = if rng.random_bool(0.2) {
            vi.scale(r)
        } else {
            let extra_rank = rng.random_range(1..=side);
            vi.scale(r).add(&random_positive(&mut rng, side, extra_rank))?
        };
        let tr = wi.trace();
        v.push(DensityTensor::from_operator(ty.clone(), cfg.dim, &vi)?);
        w.push(DensityTensor::from_operator(ty.clone(), cfg.dim, &wi.scale(1.0 / tr))?);
    }
    Ok(TrialWords { v, w })
}

/// Entailed operators whose support is strictly inside the entailing ones:
/// the longest word gets a full-rank `v̂` and a pure product state `ŵ`.
fn sample_broken_trial(
    cfg: &PropositionConfig,
    types: &[PregroupType],
    seed: u64,
) -> Result<TrialWords> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let head = (0..types.len())
        .max_by_key(|&i| (types[i].len(), usize::MAX - i))
        .unwrap_or(0);
    let mut v = Vec::with_capacity(types.len());
    let mut w = Vec::with_capacity(types.len());
    for (i, ty) in types.iter().enumerate() {
        let side = cfg.dim.pow(ty.len() as u32);
        if i == head {
            let vi = random_positive(&mut rng, side, side);
            let mut state = vec![1.0];
            for _ in 0..ty.len() {
                let u = random_unit(&mut rng, cfg.dim);
                state = state
                    .iter()
                    .flat_map(|&a| u.iter().map(move |&b| a * b))
                    .collect();
            }
            v.push(DensityTensor::from_operator(ty.clone(), cfg.dim, &vi)?);
            w.push(DensityTensor::pure(ty.clone(), cfg.dim, &state)?);
        } else {
            let rank = rng.random_range(1..=side);
            let vi = DensityTensor::from_operator(ty.clone(), cfg.dim, &random_positive(&mut rng, side, rank))?;
            w.push(vi.clone());
            v.push(vi);
        }
    }
    Ok(TrialWords { v, w })
}

fn run_trials(cfg: &PropositionConfig, broken: bool) -> Result<PropositionReport> {
    cfg.validate()?;
    let (types, plan) = proposition_grammar(cfg.phrase_len)?;
    let outcomes: Vec<Result<(usize, u64, TrialWords, LiftOutcome)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(cfg.seed, trial);
            let words = if broken {
                sample_broken_trial(cfg, &types, seed)?
            } else {
                sample_trial(cfg, &types, seed)?
            };
            let outcome = check_lift(&words.v, &words.w, &plan, cfg.tol)?;
            Ok((trial, seed, words, outcome))
        })
        .collect();

    let mut report = PropositionReport {
        trials: cfg.trials,
        dim: cfg.dim,
        phrase_len: cfg.phrase_len,
        seed: cfg.seed,
        negative_control: broken,
        passed: 0,
        failed: 0,
        degenerate: 0,
        min_representativeness: None,
        counterexample: None,
    };
    for item in outcomes {
        let (trial, seed, words, outcome) = item?;
        if outcome.degenerate {
            report.degenerate += 1;
        }
        if outcome.holds() {
            report.passed += 1;
            let m = report.min_representativeness.get_or_insert(f64::INFINITY);
            *m = m.min(outcome.representativeness);
        } else {
            report.failed += 1;
            if report.counterexample.is_none() {
                report.counterexample = Some(Counterexample {
                    trial,
                    trial_seed: seed,
                    entailing: words.v.iter().map(|t| operator_rows(&t.operator())).collect(),
                    entailed: words.w.iter().map(|t| operator_rows(&t.operator())).collect(),
                    outcome,
                });
            }
        }
    }
    Ok(report)
}

/// Samples `ŵᵢ = rᵢ v̂ᵢ + v̂ᵢ′` with `rᵢ ∈ (0, 1]` and positive `v̂ᵢ′`, composes
/// both strings and checks that the phrase-level entailment holds.
pub fn verify_proposition(cfg: &PropositionConfig) -> Result<PropositionReport> {
    run_trials(cfg, false)
}

/// Same pipeline on inputs that violate the hypothesis; every trial should fail.
pub fn verify_negative_control(cfg: &PropositionConfig) -> Result<PropositionReport> {
    run_trials(cfg, true)
}
