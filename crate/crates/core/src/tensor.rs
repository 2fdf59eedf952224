//! Dense real linear algebra for word meanings.
//!
//! Vectors and matrices are small (dimension in the low hundreds at most), so
//! everything is stored densely in row-major order. The symmetric
//! eigensolver is a cyclic Jacobi rotation scheme, which is all the spectral
//! machinery the entropy measures need.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative cutoff below which an eigenvalue is treated as an exact zero.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;

/// Roundoff slack allowed on the negative side of the spectrum, relative to the trace.
pub const PSD_SLACK: f64 = 1e-9;

/// Allowed deviation of a density matrix trace from one.
pub const TRACE_SLACK: f64 = 1e-9;

const SYMMETRY_SLACK: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest entry of `|A - Aᵀ|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:.6}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// A labelled dense real vector over the distributional basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordVector {
    pub label: String,
    entries: Vec<f64>,
}

impl WordVector {
    pub fn new(label: impl Into<String>, entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(WordVector {
            label: label.into(),
            entries,
        })
    }

    /// Builds an unlabelled vector; handy for intermediate results.
    pub fn unlabelled(entries: Vec<f64>) -> Result<Self> {
        WordVector::new("", entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &WordVector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|&x| x >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0.0)
    }

    /// Nonnegative with entries summing to one within `tol`.
    pub fn is_probabilistic(&self, tol: f64) -> bool {
        self.is_nonnegative() && (self.sum() - 1.0).abs() <= tol
    }

    pub fn normalize_l1(&self) -> Result<WordVector> {
        normalize_l1(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Real matrix validated to be symmetric; stored exactly symmetric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    /// Accepts `a` when `max|A − Aᵀ| ≤ 1e-10 · max|A|` and symmetrizes away the residue.
    pub fn new(a: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: a.cols(),
            });
        }
        if let Some(i) = a.as_slice().iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let asym = a.max_asymmetry();
        if asym > SYMMETRY_SLACK * a.max_abs() {
            return Err(Error::NotSymmetric(asym));
        }
        let n = a.rows();
        let mut s = a;
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (s[(i, j)] + s[(j, i)]);
                s[(i, j)] = m;
                s[(j, i)] = m;
            }
        }
        Ok(SymMatrix(s))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn eig(&self) -> Spectrum {
        eig_sym(self)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Eigendecomposition `A = V Λ Vᵀ` with eigenvalues sorted descending.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: Matrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `V · diag(f(λ)) · Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                if vik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)];
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(|l| l)
    }

    /// Indices of eigenvalues strictly above `tol · λ_max`; empty when `λ_max ≤ 0`.
    pub fn support_indices(&self, tol: f64) -> Vec<usize> {
        let top = self.max_eigenvalue();
        if top <= 0.0 {
            return Vec::new();
        }
        let cut = tol * top;
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > cut)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn support_basis(&self, tol: f64) -> Vec<Vec<f64>> {
        self.support_indices(tol)
            .into_iter()
            .map(|k| self.eigenvector(k))
            .collect()
    }

    /// Matrix logarithm restricted to the support: eigenvalues at or below
    /// `tol · λ_max` map to zero (the `0 ln 0 = 0` convention).
    pub fn log_on_support(&self, tol: f64) -> Result<Matrix> {
        let top = self.max_eigenvalue();
        if top <= 0.0 {
            return Err(Error::Degenerate(
                "logarithm of an operator with no positive eigenvalue".into(),
            ));
        }
        let cut = tol * top;
        Ok(self.reconstruct_with(|l| if l > cut { l.ln() } else { 0.0 }))
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi sweeps.
///
/// Sweeps continue until the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖A‖_F` or 100 sweeps have run. Eigenvalues come out descending and
/// each eigenvector is signed so its largest-magnitude component is positive.
pub fn eig_sym(a: &SymMatrix) -> Spectrum {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    let target = JACOBI_REL_TOL * scale;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&m);
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| m[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut lead = 0usize;
        for i in 0..n {
            if v[(i, src)].abs() > v[(lead, src)].abs() {
                lead = i;
            }
        }
        let sign = if v[(lead, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, dst)] = sign * v[(i, src)];
        }
    }
    Spectrum {
        eigenvalues,
        eigenvectors: vectors,
    }
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)] * m[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Applies `A ← Jᵀ A J`, `V ← V J` for the plane rotation in `(p, q)`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = c * akp - s * akq;
        m[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = c * apk - s * aqk;
        m[(q, k)] = s * apk + c * aqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Symmetric positive semi-definite matrix with unit trace.
///
/// The spectrum is computed lazily and cached; eigenvalues within the
/// roundoff slack below zero are clamped to zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub label: String,
    matrix: SymMatrix,
    #[serde(skip)]
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.matrix == other.matrix
    }
}

impl DensityMatrix {
    /// Validates an already trace-normalized operator.
    pub fn new(label: impl Into<String>, matrix: Matrix) -> Result<Self> {
        let sym = SymMatrix::new(matrix)?;
        let tr = sym.trace();
        if (tr - 1.0).abs() > TRACE_SLACK {
            return Err(Error::InvalidTrace(tr));
        }
        Self::checked(label.into(), sym)
    }

    /// Divides a PSD operator by its trace and validates the result.
    pub fn from_psd(label: impl Into<String>, matrix: Matrix, tol: f64) -> Result<Self> {
        let sym = SymMatrix::new(matrix)?;
        let normalized = normalize_trace(&sym, tol)?;
        Ok(normalized.with_label(label))
    }

    fn checked(label: String, matrix: SymMatrix) -> Result<Self> {
        let spectrum = eig_sym(&matrix);
        let tr = matrix.trace();
        let min = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_SLACK * tr.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositive(min));
        }
        let clamped = Spectrum {
            eigenvalues: spectrum.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
            eigenvectors: spectrum.eigenvectors,
        };
        let cell = OnceLock::new();
        let _ = cell.set(clamped);
        Ok(DensityMatrix {
            label,
            matrix,
            spectrum: cell,
        })
    }

    /// Diagonal embedding of a probability vector.
    pub fn from_diagonal(v: &WordVector) -> Result<Self> {
        DensityMatrix::new(v.label.clone(), Matrix::from_diag(v.entries()))
    }

    /// Maximally mixed state `I / D`.
    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix::new("", Matrix::identity(dim).scale(1.0 / dim as f64))
            .expect("identity over dimension is a valid density matrix")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        self.matrix.matrix()
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let spectrum = eig_sym(&self.matrix);
            Spectrum {
                eigenvalues: spectrum.eigenvalues.iter().map(|&l| l.max(0.0)).collect(),
                eigenvectors: spectrum.eigenvectors,
            }
        })
    }

    pub fn support_basis(&self, tol: f64) -> Vec<Vec<f64>> {
        support_basis(self, tol)
    }

    pub fn log_on_support(&self, tol: f64) -> Result<SymMatrix> {
        log_on_support(self, tol)
    }
}

/// Matrix logarithm of a density matrix on its support.
pub fn log_on_support(a: &DensityMatrix, tol: f64) -> Result<SymMatrix> {
    SymMatrix::new(a.spectrum().log_on_support(tol)?)
}

/// Eigenvectors spanning the support of `a` (eigenvalues above `tol · λ_max`).
pub fn support_basis(a: &DensityMatrix, tol: f64) -> Vec<Vec<f64>> {
    a.spectrum().support_basis(tol)
}

pub fn outer(u: &WordVector, v: &WordVector) -> Result<Matrix> {
    check_dims(u.dim(), v.dim())?;
    let n = u.dim();
    let mut m = Matrix::zeros(n, n);
    for (i, &a) in u.entries().iter().enumerate() {
        for (j, &b) in v.entries().iter().enumerate() {
            m[(i, j)] = a * b;
        }
    }
    Ok(m)
}

pub fn hadamard(u: &WordVector, v: &WordVector) -> Result<WordVector> {
    check_dims(u.dim(), v.dim())?;
    WordVector::unlabelled(
        u.entries()
            .iter()
            .zip(v.entries())
            .map(|(a, b)| a * b)
            .collect(),
    )
}

pub fn matvec(a: &Matrix, v: &WordVector) -> Result<WordVector> {
    WordVector::unlabelled(a.matvec(v.entries())?)
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.matmul(b)
}

pub fn trace(a: &Matrix) -> f64 {
    a.trace()
}

/// Divides by the trace; traces at or below `tol` are degenerate.
pub fn normalize_trace(a: &SymMatrix, tol: f64) -> Result<DensityMatrix> {
    let tr = a.trace();
    if !(tr > tol) {
        return Err(Error::Degenerate(format!("trace {tr:e} below {tol:e}")));
    }
    DensityMatrix::checked(String::new(), SymMatrix(a.matrix().scale(1.0 / tr)))
}

/// Divides by the entry sum; sums at or below `tol` are degenerate.
pub fn normalize_l1(v: &WordVector) -> Result<WordVector> {
    if let Some((index, &value)) = v.entries().iter().enumerate().find(|(_, &x)| x < 0.0) {
        return Err(Error::NegativeEntry { index, value });
    }
    let s = v.sum();
    if !(s > 0.0) {
        return Err(Error::Degenerate(format!("vector `{}` sums to {s:e}", v.label)));
    }
    WordVector::new(
        v.label.clone(),
        v.entries().iter().map(|x| x / s).collect(),
    )
}
