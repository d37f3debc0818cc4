//! Dense kernels shared by the tensor-network backends: a row-major complex
//! tensor, truncated SVD, and the reduced two-site gate update.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Singular values below this fraction of the largest are numerical zeros.
pub const ZERO_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("SVD did not converge on a {rows}x{cols} matrix")]
    SvdFailed { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    DimensionMismatch(String),
}

/// Row-major dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "shape {shape:?} vs {} entries", data.len());
        Self { shape, data }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    fn strides(shape: &[usize]) -> Vec<usize> {
        let mut s = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * shape[i + 1];
        }
        s
    }

    /// New tensor whose leg `i` is leg `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Tensor {
        assert_eq!(perm.len(), self.rank());
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        let old_strides = Self::strides(&self.shape);
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; shape.len()];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[offset]);
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                offset += src_strides[ax];
                if idx[ax] < shape[ax] {
                    break;
                }
                offset -= src_strides[ax] * shape[ax];
                idx[ax] = 0;
            }
        }
        Tensor { shape, data }
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Tensor {
        assert_eq!(shape.iter().product::<usize>(), self.data.len());
        self.shape = shape;
        self
    }

    /// Multiplies every slice along `leg` by `weights[i]`.
    pub fn scale_leg(&mut self, leg: usize, weights: &[f64]) {
        assert_eq!(self.shape[leg], weights.len());
        let inner: usize = self.shape[leg + 1..].iter().product();
        let d = self.shape[leg];
        for (i, z) in self.data.iter_mut().enumerate() {
            *z *= weights[(i / inner) % d];
        }
    }

    /// Flattens the first `row_legs` legs into rows and the rest into columns.
    pub fn to_matrix(&self, row_legs: usize) -> DMatrix<C64> {
        let rows: usize = self.shape[..row_legs].iter().product();
        let cols: usize = self.shape[row_legs..].iter().product();
        DMatrix::from_row_slice(rows, cols, &self.data)
    }

    pub fn from_matrix(m: &DMatrix<C64>, shape: Vec<usize>) -> Tensor {
        let data = m.transpose().as_slice().to_vec();
        Tensor::new(shape, data)
    }

    /// Contracts leg `la` of `self` with leg `lb` of `other`. The result keeps
    /// the remaining legs of `self` followed by those of `other`.
    pub fn contract(&self, la: &[usize], other: &Tensor, lb: &[usize]) -> Tensor {
        assert_eq!(la.len(), lb.len());
        for (&a, &b) in la.iter().zip(lb) {
            assert_eq!(self.shape[a], other.shape[b], "contracted legs differ in size");
        }
        let free_a: Vec<usize> = (0..self.rank()).filter(|i| !la.contains(i)).collect();
        let free_b: Vec<usize> = (0..other.rank()).filter(|i| !lb.contains(i)).collect();
        let pa: Vec<usize> = free_a.iter().chain(la).copied().collect();
        let pb: Vec<usize> = lb.iter().chain(&free_b).copied().collect();
        let ma = self.permute(&pa).to_matrix(free_a.len());
        let mb = other.permute(&pb).to_matrix(lb.len());
        let shape: Vec<usize> = free_a
            .iter()
            .map(|&i| self.shape[i])
            .chain(free_b.iter().map(|&i| other.shape[i]))
            .collect();
        Tensor::from_matrix(&(ma * mb), shape)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    pub chi_max: usize,
}

/// Thin SVD restricted to the kept singular values.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: DMatrix<C64>,
    /// Kept singular values, descending, renormalized to unit 2-norm.
    pub s: Vec<f64>,
    pub vt: DMatrix<C64>,
    /// Squared weight lost to the `chi_max` cap, as a fraction of the total.
    pub discarded: f64,
    /// Norm of the full singular-value vector before renormalization.
    pub norm: f64,
}

/// SVD that keeps at most `chi_max` values, ties broken by original index,
/// and drops numerical zeros.
pub fn truncated_svd(m: DMatrix<C64>, trunc: Truncation) -> Result<TruncatedSvd, LinalgError> {
    let (rows, cols) = m.shape();
    // nalgebra's complex SVD loses accuracy on strongly graded matrices,
    // which near-product states produce all the time
    let svd = faer::Mat::from_fn(rows, cols, |i, j| m[(i, j)])
        .thin_svd()
        .map_err(|_| LinalgError::SvdFailed { rows, cols })?;
    let (u, v) = (svd.U(), svd.V());
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|x| x.re).collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let total: f64 = sv.iter().map(|x| x * x).sum();
    let largest = order.first().map_or(0.0, |&i| sv[i]);
    let nonzero: Vec<usize> = order.into_iter().take_while(|&i| sv[i] > ZERO_CUTOFF * largest).collect();
    let keep = nonzero.len().min(trunc.chi_max.max(1));
    let kept_idx = &nonzero[..keep];
    let kept_sq: f64 = kept_idx.iter().map(|&i| sv[i] * sv[i]).sum();
    let nonzero_sq: f64 = nonzero.iter().map(|&i| sv[i] * sv[i]).sum();
    let discarded = if total > 0.0 { (nonzero_sq - kept_sq).max(0.0) / total } else { 0.0 };
    let kept_norm = kept_sq.sqrt();
    let s = kept_idx.iter().map(|&i| sv[i] / kept_norm).collect();
    let u = DMatrix::from_fn(rows, keep, |r, c| u[(r, kept_idx[c])]);
    let vt = DMatrix::from_fn(keep, cols, |r, c| v[(c, kept_idx[r])].conj());
    Ok(TruncatedSvd { u, s, vt, discarded, norm: total.sqrt() })
}

/// Elementwise pseudo-inverse of a positive weight vector.
pub fn pinv_weights(w: &[f64]) -> Vec<f64> {
    let max = w.iter().copied().fold(0.0, f64::max);
    w.iter().map(|&x| if x > ZERO_CUTOFF * max { 1.0 / x } else { 0.0 }).collect()
}

/// Result of a reduced two-site update.
#[derive(Debug, Clone)]
pub struct BondUpdate {
    /// Rows as the input `left`; columns `(phys, new bond)` with index
    /// `s * d + e`.
    pub left: DMatrix<C64>,
    pub right: DMatrix<C64>,
    pub weights: Vec<f64>,
    pub discarded: f64,
}

/// Applies a two-site gate across a bond.
///
/// `left` and `right` hold the two site tensors with their environments on
/// the rows and `(phys, bond)` on the columns (`s * d + e`). `gate` is indexed
/// `2 * s_left + s_right`. Each side is QR-reduced, the bond weights and the
/// gate are contracted into the reduced pair, and the result is split by a
/// truncated SVD whose isometries are reattached.
pub fn two_site_update(
    left: &DMatrix<C64>,
    right: &DMatrix<C64>,
    weights: &[f64],
    gate: &Matrix4<C64>,
    trunc: Truncation,
) -> Result<BondUpdate, LinalgError> {
    let d = weights.len();
    if left.ncols() != 2 * d || right.ncols() != 2 * d {
        return Err(LinalgError::DimensionMismatch(format!(
            "bond of size {d} against site matrices with {} and {} columns",
            left.ncols(),
            right.ncols()
        )));
    }
    let (qa, ra) = reduce(left);
    let (qb, rb) = reduce(right);
    let (ka, kb) = (ra.nrows(), rb.nrows());

    // blocks[sa][sb] = R_a[:, sa] diag(w) R_b[:, sb]^T
    let mut blocks = Vec::with_capacity(4);
    for sa in 0..2 {
        let mut a = ra.columns(sa * d, d).into_owned();
        for (e, &w) in weights.iter().enumerate() {
            a.column_mut(e).scale_mut(w);
        }
        for sb in 0..2 {
            blocks.push(&a * rb.columns(sb * d, d).transpose());
        }
    }
    let mut theta = DMatrix::zeros(2 * ka, 2 * kb);
    for ta in 0..2 {
        for tb in 0..2 {
            let mut acc = DMatrix::<C64>::zeros(ka, kb);
            for (sidx, block) in blocks.iter().enumerate() {
                let g = gate[(2 * ta + tb, sidx)];
                if g != C64::new(0.0, 0.0) {
                    acc += block * g;
                }
            }
            for i in 0..ka {
                for j in 0..kb {
                    theta[(i * 2 + ta, tb * kb + j)] = acc[(i, j)];
                }
            }
        }
    }
    let svd = truncated_svd(theta, trunc)?;
    let k = svd.s.len();
    // U[(i, ta), e] -> R_a'[i, ta * k + e]
    let ra_new = DMatrix::from_fn(ka, 2 * k, |i, c| svd.u[(i * 2 + c / k, c % k)]);
    // V^T[e, (tb, j)] -> R_b'[j, tb * k + e]
    let rb_new = DMatrix::from_fn(kb, 2 * k, |j, c| svd.vt[(c % k, (c / k) * kb + j)]);
    Ok(BondUpdate { left: qa * ra_new, right: qb * rb_new, weights: svd.s, discarded: svd.discarded })
}

/// Thin QR when it shrinks the problem, otherwise the identity split.
fn reduce(m: &DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    if m.nrows() > m.ncols() {
        let qr = m.clone().qr();
        (qr.q(), qr.r())
    } else {
        (DMatrix::identity(m.nrows(), m.nrows()), m.clone())
    }
}
