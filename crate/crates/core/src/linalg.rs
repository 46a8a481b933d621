//! Dense linear algebra over real or complex scalars: numerical rank,
//! minimum-norm least squares and left null spaces, all from the SVD.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::scalar::Scalar;

/// Rank threshold relative to the largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Singular values below this fraction of the largest are discarded when a
/// span is compressed. Far below any rank threshold in use.
const COMPRESS_FLOOR: f64 = 1e-14;

/// Thin SVD `a = u diag(s) v^*`, singular values in non-increasing order.
struct Thin<T: Scalar> {
    u: Option<DMatrix<T>>,
    s: Vec<f64>,
    v: Option<DMatrix<T>>,
}

fn lift<E: Copy, T: Scalar>(m: faer::MatRef<'_, E>, to: impl Fn(E) -> T) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| to(m[(i, j)]))
}

fn thin_svd<T: Scalar>(a: &DMatrix<T>, want_u: bool, want_v: bool) -> Thin<T> {
    let (rows, cols) = a.shape();
    let back = |z: Complex64| T::from_complex(z).expect("complex field");
    if T::IS_COMPLEX {
        let m = faer::Mat::<Complex64>::from_fn(rows, cols, |i, j| a[(i, j)].to_complex());
        let svd = m.thin_svd().expect("SVD converges");
        Thin {
            u: want_u.then(|| lift(svd.U(), back)),
            s: svd.S().column_vector().iter().map(|z| z.re).collect(),
            v: want_v.then(|| lift(svd.V(), back)),
        }
    } else {
        let m = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)].to_complex().re);
        let svd = m.thin_svd().expect("SVD converges");
        Thin {
            u: want_u.then(|| lift(svd.U(), T::from_re)),
            s: svd.S().column_vector().iter().copied().collect(),
            v: want_v.then(|| lift(svd.V(), T::from_re)),
        }
    }
}

pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    thin_svd(m, false, false).s
}

fn count_above(sv: &[f64], tol: f64) -> usize {
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Number of singular values above `tol` times the largest.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>, tol: f64) -> usize {
    count_above(&singular_values(m), tol)
}

/// Minimum-norm solution of `min |a x - b|_2`, discarding singular values
/// at or below `tol` times the largest.
pub fn lstsq_min_norm<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>, tol: f64) -> DVector<T> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    if a.nrows() == 0 {
        return DVector::zeros(a.ncols());
    }
    let svd = thin_svd(a, true, true);
    let max = svd.s.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return DVector::zeros(a.ncols());
    }
    let (u, v) = (svd.u.expect("left factor"), svd.v.expect("right factor"));
    let mut coeffs = u.adjoint() * b;
    for (k, &s) in svd.s.iter().enumerate() {
        coeffs[k] = if s > tol * max { coeffs[k].unscale(s) } else { T::zero() };
    }
    v * coeffs
}

/// Basis of `{mu : sum_r mu_r a[r, c] = 0 for every column c}`, the measures
/// annihilating every column under the bilinear pairing.
pub fn left_null_space<T: Scalar>(a: &DMatrix<T>, tol: f64) -> Vec<DVector<T>> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    // Pad to at least square so the SVD returns a full set of left vectors.
    let width = a.ncols().max(n);
    let mut padded = DMatrix::<T>::zeros(n, width);
    padded.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    let svd = thin_svd(&padded, true, false);
    let u = svd.u.expect("left factor was computed");
    let max = svd.s.iter().copied().fold(0.0, f64::max);
    svd.s
        .iter()
        .enumerate()
        .filter(|(_, &s)| max == 0.0 || s <= tol * max)
        .map(|(k, _)| u.column(k).map(|v| v.conjugate()))
        .collect()
}

/// Scales to unit l1 norm and rotates so the first significant entry is
/// real and positive.
pub fn normalize_witness<T: Scalar>(v: &DVector<T>) -> DVector<T> {
    let l1: f64 = v.iter().map(|x| x.abs_val()).sum();
    if l1 == 0.0 {
        return v.clone();
    }
    let max = v.iter().map(|x| x.abs_val()).fold(0.0, f64::max);
    let lead = v.iter().find(|x| x.abs_val() > 1e-8 * max).copied().unwrap_or_else(T::one);
    let phase = lead.conjugate().unscale(lead.abs_val());
    v.map(|x| x * phase.unscale(l1))
}

/// Streaming span of a column stream, kept as `U S` from the SVD of the
/// columns seen so far. `U S (U S)^* = D D^*` at every step, so rank and
/// left null space match the full matrix.
#[derive(Clone, Debug)]
pub struct SpanAccumulator<T: Scalar> {
    ambient: usize,
    tol: f64,
    basis: DMatrix<T>,
    pending: Vec<T>,
    pending_cols: usize,
    batch: usize,
    columns_seen: usize,
}

impl<T: Scalar> SpanAccumulator<T> {
    pub fn new(ambient: usize, tol: f64) -> Self {
        SpanAccumulator {
            ambient,
            tol,
            basis: DMatrix::zeros(ambient, 0),
            pending: Vec::new(),
            pending_cols: 0,
            batch: ambient.max(32),
            columns_seen: 0,
        }
    }

    pub fn push_column(&mut self, col: &[T]) {
        assert_eq!(col.len(), self.ambient, "column length must match the ambient dimension");
        self.pending.extend_from_slice(col);
        self.pending_cols += 1;
        self.columns_seen += 1;
        if self.pending_cols >= self.batch {
            self.compress();
        }
    }

    pub fn columns_seen(&self) -> usize {
        self.columns_seen
    }

    fn compress(&mut self) {
        if self.pending_cols == 0 {
            return;
        }
        let block = DMatrix::from_column_slice(self.ambient, self.pending_cols, &self.pending);
        let r = self.basis.ncols();
        let mut joined = DMatrix::<T>::zeros(self.ambient, r + self.pending_cols);
        joined.view_mut((0, 0), (self.ambient, r)).copy_from(&self.basis);
        joined.view_mut((0, r), (self.ambient, self.pending_cols)).copy_from(&block);
        self.pending.clear();
        self.pending_cols = 0;
        if self.ambient == 0 {
            return;
        }
        let svd = thin_svd(&joined, true, false);
        let u = svd.u.expect("left factor was computed");
        let max = svd.s.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.s.len()).filter(|&k| max > 0.0 && svd.s[k] > COMPRESS_FLOOR * max).collect();
        let mut basis = DMatrix::<T>::zeros(self.ambient, keep.len());
        for (j, &k) in keep.iter().enumerate() {
            let s = T::from_re(svd.s[k]);
            basis.set_column(j, &(u.column(k) * s));
        }
        self.basis = basis;
    }

    pub fn rank(&mut self) -> usize {
        self.compress();
        numerical_rank(&self.basis, self.tol)
    }

    /// True once the span is the whole ambient space.
    pub fn is_full(&mut self) -> bool {
        self.rank() == self.ambient
    }

    pub fn left_null_space(&mut self) -> Vec<DVector<T>> {
        self.compress();
        if self.basis.ncols() == 0 {
            return (0..self.ambient)
                .map(|k| {
                    let mut e = DVector::<T>::zeros(self.ambient);
                    e[k] = T::one();
                    e
                })
                .collect();
        }
        left_null_space(&self.basis, self.tol)
    }
}
