//! Orthogonal projection onto linear and affine subspaces of case space.
//!
//! Everything goes through a column-pivoted Householder factorization of the
//! spanning columns, `B P = Q R`. The projector onto the column span is
//! `Q_r Q_r^T` where `Q_r` holds the first `rank` columns of `Q`; the
//! explicit `B (B^T B)^{-1} B^T` form is never built.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Pivots (or singular values) below this fraction of the largest are zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
struct PivotedQr {
    /// Householder vectors, `v_j` occupying rows `j..n`.
    reflectors: Vec<DVector<f64>>,
    betas: Vec<f64>,
    r: DMatrix<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    fn factor(a: &DMatrix<f64>) -> Self {
        let (n, k) = a.shape();
        let steps = n.min(k);
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut reflectors = Vec::with_capacity(steps);
        let mut betas = Vec::with_capacity(steps);

        for j in 0..steps {
            let norm_below = |r: &DMatrix<f64>, c: usize| r.view((j, c), (n - j, 1)).norm();
            let mut pivot = j;
            let mut best = norm_below(&r, j);
            for c in (j + 1)..k {
                let nc = norm_below(&r, c);
                if nc > best {
                    best = nc;
                    pivot = c;
                }
            }
            if pivot != j {
                r.swap_columns(j, pivot);
                perm.swap(j, pivot);
            }

            let x: DVector<f64> = r.view((j, j), (n - j, 1)).column(0).into_owned();
            let xnorm = x.norm();
            if xnorm == 0.0 {
                reflectors.push(DVector::zeros(n - j));
                betas.push(0.0);
                continue;
            }
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            let mut v = x;
            v[0] -= alpha;
            let vnorm2 = v.norm_squared();
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };

            for c in (j + 1)..k {
                let mut col = r.view_mut((j, c), (n - j, 1));
                let s = beta * v.dot(&col);
                for (ci, vi) in col.iter_mut().zip(v.iter()) {
                    *ci -= s * vi;
                }
            }
            r[(j, j)] = alpha;
            for i in (j + 1)..n {
                r[(i, j)] = 0.0;
            }
            reflectors.push(v);
            betas.push(beta);
        }

        let lead = if steps > 0 { r[(0, 0)].abs() } else { 0.0 };
        let tol = RANK_TOLERANCE * lead;
        let rank = (0..steps).take_while(|&j| lead > 0.0 && r[(j, j)].abs() > tol).count();
        PivotedQr { reflectors, betas, r, perm, rank }
    }

    fn n(&self) -> usize {
        self.r.nrows()
    }

    /// `Q^T x`
    fn apply_qt(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = x.clone();
        for (j, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate() {
            if beta == 0.0 {
                continue;
            }
            let mut tail = y.rows_mut(j, v.len());
            let s = beta * v.dot(&tail);
            tail.axpy(-s, v, 1.0);
        }
        y
    }

    /// `Q y`
    fn apply_q(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut x = y.clone();
        for (j, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate().rev() {
            if beta == 0.0 {
                continue;
            }
            let mut tail = x.rows_mut(j, v.len());
            let s = beta * v.dot(&tail);
            tail.axpy(-s, v, 1.0);
        }
        x
    }

    fn full_q(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut q = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut e = DVector::zeros(n);
            e[c] = 1.0;
            q.set_column(c, &self.apply_q(&e));
        }
        q
    }

    /// Solve the leading `rank x rank` triangle, unpermuted. Only valid at full
    /// column rank.
    fn solve_full_rank(&self, qtx: &DVector<f64>) -> DVector<f64> {
        let k = self.perm.len();
        let mut z = DVector::zeros(k);
        for j in (0..k).rev() {
            let mut s = qtx[j];
            for c in (j + 1)..k {
                s -= self.r[(j, c)] * z[c];
            }
            z[j] = s / self.r[(j, j)];
        }
        let mut coef = DVector::zeros(k);
        for (j, &orig) in self.perm.iter().enumerate() {
            coef[orig] = z[j];
        }
        coef
    }
}

/// Columns spanning a subspace of `R^n`, factored once on construction.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    columns: DMatrix<f64>,
    qr: PivotedQr,
}

impl SubspaceBasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if columns.nrows() == 0 {
            return Err(Error::Shape("basis needs at least one row".into()));
        }
        if columns.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("basis contains non-finite values".into()));
        }
        let qr = PivotedQr::factor(&columns);
        Ok(SubspaceBasis { columns, qr })
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    pub fn k(&self) -> usize {
        self.columns.ncols()
    }

    pub fn rank(&self) -> usize {
        self.qr.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.qr.rank == self.k()
    }
}

/// Result of projecting a point onto a column span.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceProjection {
    pub projection: DVector<f64>,
    /// `projection = basis * coefficients`; minimum-norm when rank deficient.
    pub coefficients: DVector<f64>,
    pub rank: usize,
    /// Set when `rank < k`.
    pub rank_deficient: bool,
}

/// Closest point to `point` in the span of `basis`.
pub fn project_subspace(basis: &SubspaceBasis, point: &DVector<f64>) -> Result<SubspaceProjection> {
    if point.len() != basis.n() {
        return Err(Error::Shape(format!("point of length {} for basis with {} rows", point.len(), basis.n())));
    }
    let qr = &basis.qr;
    let mut qtx = qr.apply_qt(point);
    let coefficients = if basis.is_full_rank() {
        qr.solve_full_rank(&qtx)
    } else {
        generalized_inverse(&basis.columns) * point
    };
    for v in qtx.iter_mut().skip(qr.rank) {
        *v = 0.0;
    }
    let projection = qr.apply_q(&qtx);
    Ok(SubspaceProjection {
        projection,
        coefficients,
        rank: qr.rank,
        rank_deficient: !basis.is_full_rank(),
    })
}

/// `a + V`.
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    pub anchor: DVector<f64>,
    pub directions: SubspaceBasis,
}

impl AffineSubspace {
    pub fn new(anchor: DVector<f64>, directions: SubspaceBasis) -> Result<Self> {
        if anchor.len() != directions.n() {
            return Err(Error::Shape(format!("anchor of length {} for directions in R^{}", anchor.len(), directions.n())));
        }
        if anchor.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("anchor contains non-finite values".into()));
        }
        Ok(AffineSubspace { anchor, directions })
    }
}

/// Translate to the origin, project onto the direction space, translate
/// back. The returned coefficients are those of `point - anchor`.
pub fn project_affine_parts(space: &AffineSubspace, point: &DVector<f64>) -> Result<SubspaceProjection> {
    if point.len() != space.anchor.len() {
        return Err(Error::Shape(format!("point of length {} for affine space in R^{}", point.len(), space.anchor.len())));
    }
    let shifted = point - &space.anchor;
    let mut parts = project_subspace(&space.directions, &shifted)?;
    parts.projection += &space.anchor;
    Ok(parts)
}

/// Closest point to `point` in `a + V`.
pub fn project_affine(space: &AffineSubspace, point: &DVector<f64>) -> Result<DVector<f64>> {
    project_affine_parts(space, point).map(|p| p.projection)
}

/// Minimum-norm generalized inverse (Moore-Penrose), via SVD.
pub fn generalized_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = a.shape();
    if n == 0 || k == 0 {
        return DMatrix::zeros(k, n);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let tol = RANK_TOLERANCE * smax;
    let mut out = DMatrix::zeros(k, n);
    for (idx, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 0.0 {
            out += (v_t.row(idx).transpose() / s) * u.column(idx).transpose();
        }
    }
    out
}

/// Orthonormal bases of the span of `basis` (first block) and of its
/// orthogonal complement (second block). Together they form an
/// orthonormal basis of `R^n`.
pub fn split_basis(basis: &SubspaceBasis) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if basis.k() > basis.n() {
        return Err(Error::Rank(format!("{} columns in R^{}", basis.k(), basis.n())));
    }
    if !basis.is_full_rank() {
        return Err(Error::Rank(format!("basis has rank {} < {}", basis.rank(), basis.k())));
    }
    let q = basis.qr.full_q();
    let k = basis.k();
    let n = basis.n();
    Ok((q.columns(0, k).into_owned(), q.columns(k, n - k).into_owned()))
}
