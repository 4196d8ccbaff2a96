//! Dense complex linear algebra for the small Hilbert spaces of the
//! swap-steering scenario: tensor products, subsystem permutations, partial
//! traces, Hermitian eigendecomposition, Schmidt decomposition and fidelity.
//!
//! Multi-index convention: a vector on subsystems with dimensions
//! `d_0, .., d_{n-1}` is stored row-major, the first factor being the most
//! significant digit of the flat index.

use std::ops::{Add, Deref, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

pub const STRUCTURAL_TOL: f64 = 1e-9;
pub const NORMALIZATION_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;
const DEGENERACY_TOL: f64 = 1e-9;
const CANONICAL_PIVOT: f64 = 1e-4;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by internal arithmetic on finite inputs.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(m)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            entries.extend(row.iter().map(|&x| re(x)));
        }
        Self::new(r, cols, entries)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &UnitVector) -> Self {
        Self(&v.0 * v.0.adjoint())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_square(&self) -> bool {
        self.0.is_square()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    /// Row-major copy of the entries.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.conjugate())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(re(factor))
    }

    /// Matrix power for `k >= 0`.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = DMatrix::identity(self.rows(), self.cols());
        for _ in 0..k {
            out = &out * &self.0;
        }
        Self(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (self * &self.adjoint()).max_abs_diff(&Self::identity(self.rows())) <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = hermitian_part(&self.0);
        SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Positive semidefinite, Hermitian, unit trace.
    pub fn is_density(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (self.trace() - re(1.0)).norm() <= tol && self.min_eigenvalue() >= -tol
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &DVector<C64>) -> C64 {
        v.dotc(&(&self.0 * v))
    }

    /// `Tr(M ρ)`.
    pub fn trace_with(&self, rho: &ComplexMatrix) -> C64 {
        // Tr(AB) = Σ_ij A_ij B_ji
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                acc += self.0[(i, j)] * rho.0[(j, i)];
            }
        }
        acc
    }
}

impl Deref for ComplexMatrix {
    type Target = DMatrix<C64>;
    fn deref(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector(DVector<C64>);

impl UnitVector {
    /// Accepts amplitudes whose squared magnitudes sum to one within `1e-12`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        Self::from_dvector(v)
    }

    pub fn from_dvector(v: DVector<C64>) -> Result<Self> {
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self(v))
    }

    /// Rescales nonzero amplitudes to unit norm.
    pub fn normalized(v: DVector<C64>) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::NotNormalized(n * n));
        }
        Self::from_dvector(v / re(n))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| re(x)).collect())
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = re(1.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<C64> {
        self.0
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &UnitVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn kron(&self, other: &UnitVector) -> UnitVector {
        UnitVector(self.0.kronecker(&other.0))
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(self)
    }

    pub fn conjugate(&self) -> UnitVector {
        UnitVector(self.0.conjugate())
    }
}

/// Ordered, labeled tensor factors of a Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemShape {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl SubsystemShape {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if dims.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dims for {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::DimensionMismatch("zero-dimensional factor".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DimensionMismatch(format!("duplicate label {l}")));
            }
        }
        Ok(Self { dims, labels })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if out.contains(&p) {
                return Err(Error::UnknownLabel(format!("{l} listed twice")));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Shape after reordering the factors as `order` (old positions).
    pub fn reordered(&self, order: &[usize]) -> SubsystemShape {
        SubsystemShape {
            dims: order.iter().map(|&i| self.dims[i]).collect(),
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Positions of `labels` followed by every remaining factor in shape order.
    fn order_with_front(&self, front: &[usize]) -> Vec<usize> {
        let mut order = front.to_vec();
        order.extend((0..self.dims.len()).filter(|i| !front.contains(i)));
        order
    }
}

/// Orthonormal Schmidt form `Σ_j λ_j |e_j⟩ ⊗ |f_j⟩`.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: Vec<UnitVector>,
    pub right: Vec<UnitVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > tol).count()
    }

    pub fn reconstruct(&self) -> DVector<C64> {
        let ld = self.left[0].dim();
        let rd = self.right[0].dim();
        let mut v = DVector::zeros(ld * rd);
        for ((l, e), f) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            v += e.as_dvector().kronecker(f.as_dvector()) * re(*l);
        }
        v
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for f in factors {
        out = kron(&out, f);
    }
    out
}

/// For every flat index of the original layout, its flat index once the
/// factors are reordered so that new position `p` holds old factor `order[p]`.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let mut new_strides = vec![1usize; n];
    for p in (0..n.saturating_sub(1)).rev() {
        new_strides[p] = new_strides[p + 1] * new_dims[p + 1];
    }
    // stride in the new layout of each old factor
    let mut stride_of_old = vec![0usize; n];
    for (p, &old) in order.iter().enumerate() {
        stride_of_old[old] = new_strides[p];
    }
    let mut map = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for (flat, slot) in map.iter_mut().enumerate() {
        let mut rem = flat;
        for k in (0..n).rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        *slot = digits.iter().zip(&stride_of_old).map(|(d, s)| d * s).sum();
    }
    map
}

fn check_order(dims: &[usize], order: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    if order.len() != dims.len() {
        return Err(Error::DimensionMismatch("permutation length".into()));
    }
    for &o in order {
        if o >= dims.len() || seen[o] {
            return Err(Error::DimensionMismatch("invalid permutation".into()));
        }
        seen[o] = true;
    }
    Ok(())
}

/// Reorders the tensor factors of a vector.
pub fn permute_vector(v: &DVector<C64>, dims: &[usize], order: &[usize]) -> Result<DVector<C64>> {
    check_order(dims, order)?;
    if v.len() != dims.iter().product::<usize>() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against factor dims {dims:?}",
            v.len()
        )));
    }
    let map = permutation_map(dims, order);
    let mut out = DVector::zeros(v.len());
    for (i, &m) in map.iter().enumerate() {
        out[m] = v[i];
    }
    Ok(out)
}

/// Reorders the tensor factors of an operator.
pub fn permute_operator(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    check_order(dims, order)?;
    let total: usize = dims.iter().product();
    if m.rows() != total || m.cols() != total {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator against factor dims {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    let map = permutation_map(dims, order);
    let mut out = DMatrix::zeros(total, total);
    for i in 0..total {
        for j in 0..total {
            out[(map[i], map[j])] = m.0[(i, j)];
        }
    }
    Ok(ComplexMatrix(out))
}

/// Reduced operator on the `keep` subsystems (kept in shape order).
pub fn partial_trace(m: &ComplexMatrix, shape: &SubsystemShape, keep: &[&str]) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != shape.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator against shape of total dimension {}",
            m.rows(),
            m.cols(),
            shape.total_dim()
        )));
    }
    let mut kept = shape.positions(keep)?;
    kept.sort_unstable();
    let order = shape.order_with_front(&kept);
    let permuted = permute_operator(m, shape.dims(), &order)?;
    let keep_dim: usize = kept.iter().map(|&i| shape.dims[i]).product();
    let rest = shape.total_dim() / keep_dim;
    let mut out = DMatrix::zeros(keep_dim, keep_dim);
    for i in 0..keep_dim {
        for j in 0..keep_dim {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..rest {
                acc += permuted.0[(i * rest + t, j * rest + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(ComplexMatrix(out))
}

/// Reduced state of `|v⟩⟨v|` on `keep` without forming the full projector.
pub fn reduced_state(v: &DVector<C64>, shape: &SubsystemShape, keep: &[&str]) -> Result<ComplexMatrix> {
    let mut kept = shape.positions(keep)?;
    kept.sort_unstable();
    let order = shape.order_with_front(&kept);
    let pv = permute_vector(v, shape.dims(), &order)?;
    let keep_dim: usize = kept.iter().map(|&i| shape.dims[i]).product();
    let rest = shape.total_dim() / keep_dim;
    let mat = DMatrix::from_row_slice(keep_dim, rest, pv.as_slice());
    Ok(ComplexMatrix(&mat * mat.adjoint()))
}

/// Applies `op` to the `targets` subsystems (in the listed order) of `v`.
pub fn apply_local(
    op: &ComplexMatrix,
    shape: &SubsystemShape,
    targets: &[&str],
    v: &DVector<C64>,
) -> Result<DVector<C64>> {
    let front = shape.positions(targets)?;
    let target_dim: usize = front.iter().map(|&i| shape.dims[i]).product();
    if op.rows() != target_dim || op.cols() != target_dim {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator on subsystems of dimension {target_dim}",
            op.rows(),
            op.cols()
        )));
    }
    let order = shape.order_with_front(&front);
    let pv = permute_vector(v, shape.dims(), &order)?;
    let rest = shape.total_dim() / target_dim;
    let mat = DMatrix::from_row_slice(target_dim, rest, pv.as_slice());
    let applied = &op.0 * mat;
    // back to a row-major flat vector
    let mut flat = DVector::zeros(shape.total_dim());
    for i in 0..target_dim {
        for r in 0..rest {
            flat[i * rest + r] = applied[(i, r)];
        }
    }
    let permuted_dims: Vec<usize> = order.iter().map(|&i| shape.dims[i]).collect();
    permute_vector(&flat, &permuted_dims, &invert(&order))
}

pub(crate) fn invert(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (p, &o) in order.iter().enumerate() {
        inv[o] = p;
    }
    inv
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * re(0.5)
}

/// Deterministic orthonormal basis of the span of `basis`: computational
/// basis vectors are projected onto the subspace in index order and
/// Gram-Schmidt orthonormalized. Each returned vector has a real positive
/// entry at the index that generated it.
fn canonical_basis(basis: &[DVector<C64>], dim: usize) -> Vec<DVector<C64>> {
    let k = basis.len();
    let mut out: Vec<DVector<C64>> = Vec::with_capacity(k);
    for idx in 0..dim {
        if out.len() == k {
            break;
        }
        let mut w = DVector::zeros(dim);
        for b in basis {
            w += b * b[idx].conj();
        }
        for o in &out {
            let overlap = o.dotc(&w);
            w -= o * overlap;
        }
        let n = w.norm();
        if n > CANONICAL_PIVOT {
            out.push(w / re(n));
        }
    }
    // Numerically degenerate spans fall back to the supplied basis.
    if out.len() < k {
        return basis.to_vec();
    }
    out
}

/// Completes `chosen` to `count` orthonormal vectors using computational
/// basis vectors in index order.
pub(crate) fn complete_basis(chosen: &[DVector<C64>], dim: usize, count: usize) -> Vec<DVector<C64>> {
    let mut out: Vec<DVector<C64>> = Vec::new();
    for idx in 0..dim {
        if out.len() == count {
            break;
        }
        let mut w: DVector<C64> = DVector::zeros(dim);
        w[idx] = re(1.0);
        for o in chosen.iter().chain(out.iter()) {
            let overlap = o.dotc(&w);
            w -= o * overlap;
        }
        let n = w.norm();
        if n > CANONICAL_PIVOT {
            out.push(w / re(n));
        }
    }
    out
}

/// Groups indices of a descending sequence into clusters of equal values.
fn clusters(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i - 1] - values[i]).abs() > DEGENERACY_TOL {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues in descending
/// order and a unitary whose columns are the matching eigenvectors.
/// Degenerate eigenspaces get a canonical basis.
pub fn eig_hermitian(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("eigendecomposition of a non-square matrix".into()));
    }
    if !h.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::NotHermitian(h.max_abs_diff(&h.adjoint())));
    }
    let n = h.rows();
    let eig = SymmetricEigen::new(hermitian_part(&h.0));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for range in clusters(&values) {
        let cols: Vec<DVector<C64>> = range.clone().map(|p| eig.eigenvectors.column(idx[p]).into_owned()).collect();
        for (p, v) in range.zip(canonical_basis(&cols, n)) {
            vectors.set_column(p, &v);
        }
    }
    Ok((values, ComplexMatrix(vectors)))
}

/// Function of a Hermitian matrix applied through its spectrum.
pub(crate) fn spectral_map(h: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = eig_hermitian(h)?;
    let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&x| re(f(x)))));
    Ok(ComplexMatrix(&vecs.0 * d * vecs.0.adjoint()))
}

/// Projector onto the span of eigenvectors with eigenvalue above `tol`.
pub fn support_projector(h: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    spectral_map(h, |x| if x > tol { 1.0 } else { 0.0 })
}

fn svd_descending(m: &DMatrix<C64>) -> (Vec<f64>, Vec<DVector<C64>>, Vec<DVector<C64>>) {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let k = svd.singular_values.len();
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let left = idx.iter().map(|&i| u.column(i).into_owned()).collect();
    let right = idx.iter().map(|&i| v_t.row(i).adjoint()).collect();
    (values, left, right)
}

/// Closest unitary to `m` in Frobenius norm (`W V†` from `m = W Σ V†`).
pub(crate) fn polar_unitary(m: &DMatrix<C64>) -> DMatrix<C64> {
    let svd = SVD::new(m.clone(), true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// Schmidt decomposition across `left | rest` with `left` factors taken in
/// the listed order and the remaining factors in shape order.
///
/// Coefficients are real, nonnegative and descending; the right basis
/// vectors carry a real positive leading entry and any phase lives in the
/// left basis. Degenerate coefficients get the canonical left basis of their
/// subspace.
pub fn schmidt_decompose(v: &UnitVector, shape: &SubsystemShape, left: &[&str]) -> Result<SchmidtDecomposition> {
    if v.dim() != shape.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of dim {} against shape of total dimension {}",
            v.dim(),
            shape.total_dim()
        )));
    }
    let front = shape.positions(left)?;
    if front.is_empty() || front.len() == shape.dims.len() {
        return Err(Error::DimensionMismatch("bipartition needs two nonempty sides".into()));
    }
    let order = shape.order_with_front(&front);
    let pv = permute_vector(v.as_dvector(), shape.dims(), &order)?;
    let left_dim: usize = front.iter().map(|&i| shape.dims[i]).product();
    schmidt_bipartite(&UnitVector(pv), left_dim, shape.total_dim() / left_dim)
}

/// Schmidt decomposition for a vector already ordered as `left ⊗ right`.
pub fn schmidt_bipartite(v: &UnitVector, left_dim: usize, right_dim: usize) -> Result<SchmidtDecomposition> {
    let n2 = v.as_dvector().norm_squared();
    if (n2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(n2));
    }
    if left_dim * right_dim != v.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{left_dim}x{right_dim} bipartition of a vector of dim {}",
            v.dim()
        )));
    }
    let mat = DMatrix::from_row_slice(left_dim, right_dim, v.amplitudes());
    let (values, lefts, _) = svd_descending(&mat);
    let mut coefficients = Vec::with_capacity(values.len());
    let mut left = Vec::with_capacity(values.len());
    let mut right: Vec<DVector<C64>> = Vec::with_capacity(values.len());
    for range in clusters(&values) {
        let cluster_left = canonical_basis(&lefts[range.clone()], left_dim);
        for (p, e) in range.zip(cluster_left) {
            let lambda = values[p];
            coefficients.push(lambda.max(0.0));
            if lambda > 1e-12 {
                // f[j] = Σ_i conj(e[i]) M[i,j] / λ
                let mut f = mat.tr_mul(&e.conjugate()) / re(lambda);
                let (e_fixed, f_fixed) = fix_right_phase(e, &mut f);
                left.push(e_fixed);
                right.push(f_fixed);
            } else {
                left.push(e);
                right.push(DVector::zeros(0));
            }
        }
    }
    // zero coefficients: complete the right basis deterministically
    let chosen: Vec<DVector<C64>> = right.iter().filter(|f| f.len() == right_dim).cloned().collect();
    let missing = right.iter().filter(|f| f.len() != right_dim).count();
    let mut fill = complete_basis(&chosen, right_dim, missing).into_iter();
    for f in right.iter_mut().filter(|f| f.len() != right_dim) {
        *f = fill.next().expect("enough complementary vectors");
    }
    let norm: f64 = coefficients.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut coefficients {
        *x /= norm;
    }
    Ok(SchmidtDecomposition {
        coefficients,
        left: left.into_iter().map(UnitVector).collect(),
        right: right.into_iter().map(UnitVector).collect(),
    })
}

/// Makes the first significant entry of `f` real positive, moving the phase
/// into `e` so that `e ⊗ f` is unchanged.
fn fix_right_phase(e: DVector<C64>, f: &mut DVector<C64>) -> (DVector<C64>, DVector<C64>) {
    let pivot = f.iter().position(|z| z.norm() > CANONICAL_PIVOT).unwrap_or(0);
    let z = f[pivot];
    if z.norm() == 0.0 {
        return (e, f.clone());
    }
    let phase = z / re(z.norm());
    (e * phase, &*f * phase.conj())
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`; reduces to `⟨ψ|σ|ψ⟩` when `ρ = |ψ⟩⟨ψ|`.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    for m in [rho, sigma] {
        if !m.is_square() || !m.is_density(STRUCTURAL_TOL) {
            return Err(Error::InvalidState("fidelity requires density operators".into()));
        }
    }
    if rho.rows() != sigma.rows() {
        return Err(Error::DimensionMismatch("fidelity of states on different spaces".into()));
    }
    // pure argument: F = ⟨ψ|ρ|ψ⟩, avoiding square roots of near-zero eigenvalues
    for (pure, other) in [(sigma, rho), (rho, sigma)] {
        let (vals, vecs) = eig_hermitian(pure)?;
        let idx = (0..vals.len()).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
        if vals[idx] >= 1.0 - STRUCTURAL_TOL {
            let v = vecs.0.column(idx).into_owned();
            return Ok(other.expectation(&v).re.clamp(0.0, 1.0));
        }
    }
    let sqrt_rho = spectral_map(rho, |x| x.max(0.0).sqrt())?;
    let inner = &(&sqrt_rho * sigma) * &sqrt_rho;
    let inner = ComplexMatrix(hermitian_part(&inner.0));
    let (vals, _) = eig_hermitian(&inner)?;
    let root: f64 = vals.iter().map(|&x| x.max(0.0).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}
