//! Exact linear algebra over `k = GF(ℓ^r)` and over `W(k)/ℓ^m`.
//!
//! Over the field everything is classical Gaussian elimination. Over the
//! Witt ring, systems are solved by layer-wise lifting of mod-ℓ solutions:
//! the solver carries the kernel directions found at earlier layers so that
//! corrections at a later layer can reach back, and it reports the exact
//! layer at which an inconsistent system fails.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rings::{gcd, mult_order, FieldElem, FieldSpec, QOrbit, WittElem, WittSpec};
use crate::rng::SplitMix64;

// ---------------------------------------------------------------------------
// matrices over k
// ---------------------------------------------------------------------------

/// Dense row-major matrix over `GF(ℓ^r)`.
#[derive(Clone, PartialEq, Eq)]
pub struct MatK {
    spec: Arc<FieldSpec>,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl std::fmt::Debug for MatK {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "MatK {}x{} over GF({}^{})",
            self.rows,
            self.cols,
            self.spec.ell(),
            self.spec.r()
        )?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:?}", self.at(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl MatK {
    pub fn new(spec: &Arc<FieldSpec>, rows: usize, cols: usize, data: Vec<FieldElem>) -> MatK {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        MatK {
            spec: spec.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn zero(spec: &Arc<FieldSpec>, rows: usize, cols: usize) -> MatK {
        MatK {
            spec: spec.clone(),
            rows,
            cols,
            data: vec![FieldElem::zero(spec); rows * cols],
        }
    }

    pub fn identity(spec: &Arc<FieldSpec>, n: usize) -> MatK {
        let mut m = MatK::zero(spec, n, n);
        for i in 0..n {
            m.set(i, i, FieldElem::one(spec));
        }
        m
    }

    pub fn from_ints(spec: &Arc<FieldSpec>, rows: &[&[i64]]) -> MatK {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            for &v in *row {
                data.push(FieldElem::from_int(spec, v));
            }
        }
        MatK::new(spec, r, c, data)
    }

    pub fn from_fn<F: FnMut(usize, usize) -> FieldElem>(
        spec: &Arc<FieldSpec>,
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> MatK {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        MatK::new(spec, rows, cols, data)
    }

    pub fn spec(&self) -> &Arc<FieldSpec> {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &FieldElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.at(i, j).is_one()
                    } else {
                        self.at(i, j).is_zero()
                    }
                })
            })
    }

    pub fn add(&self, other: &MatK) -> MatK {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.add(b))
            .collect();
        MatK::new(&self.spec, self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &MatK) -> MatK {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub(b))
            .collect();
        MatK::new(&self.spec, self.rows, self.cols, data)
    }

    pub fn neg(&self) -> MatK {
        MatK::new(
            &self.spec,
            self.rows,
            self.cols,
            self.data.iter().map(|a| a.neg()).collect(),
        )
    }

    pub fn scalar_mul(&self, c: &FieldElem) -> MatK {
        MatK::new(
            &self.spec,
            self.rows,
            self.cols,
            self.data.iter().map(|a| a.mul(c)).collect(),
        )
    }

    pub fn mul(&self, other: &MatK) -> MatK {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = MatK::zero(&self.spec, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.at(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.at(i, j).add(&a.mul(other.at(l, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = FieldElem::zero(&self.spec);
                for j in 0..self.cols {
                    acc = acc.add(&self.at(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> MatK {
        MatK::from_fn(&self.spec, self.cols, self.rows, |i, j| {
            self.at(j, i).clone()
        })
    }

    pub fn pow(&self, mut e: u64) -> MatK {
        assert!(self.is_square());
        let mut acc = MatK::identity(&self.spec, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Kronecker product; with row-major vectorisation this satisfies
    /// `vec(A·M·B) = (A ⊗ Bᵀ)·vec(M)`.
    pub fn kron(&self, other: &MatK) -> MatK {
        let mut out = MatK::zero(&self.spec, self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.at(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            a.mul(other.at(i2, j2)),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(spec: &Arc<FieldSpec>, blocks: &[MatK]) -> MatK {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = MatK::zero(spec, n, c);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(ro + i, co + j, b.at(i, j).clone());
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatK {
        MatK::from_fn(&self.spec, rows, cols, |i, j| {
            self.at(r0 + i, c0 + j).clone()
        })
    }

    pub fn hstack(&self, other: &MatK) -> MatK {
        assert_eq!(self.rows, other.rows);
        MatK::from_fn(&self.spec, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j).clone()
            } else {
                other.at(i, j - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &MatK) -> MatK {
        assert_eq!(self.cols, other.cols);
        MatK::from_fn(&self.spec, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.at(i, j).clone()
            } else {
                other.at(i - self.rows, j).clone()
            }
        })
    }

    /// Row-major vectorisation.
    pub fn vec(&self) -> Vec<FieldElem> {
        self.data.clone()
    }

    pub fn from_vec(spec: &Arc<FieldSpec>, rows: usize, cols: usize, v: Vec<FieldElem>) -> MatK {
        MatK::new(spec, rows, cols, v)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (MatK, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = vec![];
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let mut pivot_row = None;
            for r in row..m.rows {
                if !m.at(r, col).is_zero() {
                    pivot_row = Some(r);
                    break;
                }
            }
            let Some(pr) = pivot_row else { continue };
            for j in 0..m.cols {
                let (a, b) = (m.at(row, j).clone(), m.at(pr, j).clone());
                m.set(row, j, b);
                m.set(pr, j, a);
            }
            let inv = m.at(row, col).inverse().expect("pivot is nonzero");
            for j in 0..m.cols {
                m.set(row, j, m.at(row, j).mul(&inv));
            }
            for r in 0..m.rows {
                if r != row && !m.at(r, col).is_zero() {
                    let factor = m.at(r, col).clone();
                    for j in 0..m.cols {
                        let v = m.at(r, j).sub(&factor.mul(m.at(row, j)));
                        m.set(r, j, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElem>> {
        let (r, pivots) = self.rref();
        let mut basis = vec![];
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![FieldElem::zero(&self.spec); self.cols];
            v[free] = FieldElem::one(&self.spec);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = r.at(row, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    pub fn det(&self) -> FieldElem {
        assert!(self.is_square());
        let mut m = self.clone();
        let mut det = FieldElem::one(&self.spec);
        for col in 0..m.cols {
            let mut pivot_row = None;
            for r in col..m.rows {
                if !m.at(r, col).is_zero() {
                    pivot_row = Some(r);
                    break;
                }
            }
            let Some(pr) = pivot_row else {
                return FieldElem::zero(&self.spec);
            };
            if pr != col {
                for j in 0..m.cols {
                    let (a, b) = (m.at(col, j).clone(), m.at(pr, j).clone());
                    m.set(col, j, b);
                    m.set(pr, j, a);
                }
                det = det.neg();
            }
            let p = m.at(col, col).clone();
            det = det.mul(&p);
            let inv = p.inverse().expect("pivot nonzero");
            for r in col + 1..m.rows {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = m.at(r, col).mul(&inv);
                for j in col..m.cols {
                    let v = m.at(r, j).sub(&factor.mul(m.at(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<MatK> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = self.hstack(&MatK::identity(&self.spec, n));
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return Err(Error::NotInvertible);
        }
        Ok(r.submatrix(0, n, n, n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && !self.det().is_zero()
    }
}

/// Outcome of solving `A·x = b` over `k`: a particular solution when the
/// system is consistent, plus a basis of `ker A`.
#[derive(Debug, Clone)]
pub struct SolveK {
    pub particular: Option<Vec<FieldElem>>,
    pub kernel: Vec<Vec<FieldElem>>,
}

pub fn solve_k(a: &MatK, b: &[FieldElem]) -> Result<SolveK> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} vs {} rows",
            b.len(),
            a.rows()
        )));
    }
    let spec = a.spec().clone();
    let bcol = MatK::new(&spec, b.len(), 1, b.to_vec());
    let aug = a.hstack(&bcol);
    let (r, pivots) = aug.rref();
    let particular = if pivots.contains(&a.cols()) {
        None // pivot in the rhs column: inconsistent
    } else {
        let mut x = vec![FieldElem::zero(&spec); a.cols()];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.at(row, a.cols()).clone();
        }
        Some(x)
    };
    Ok(SolveK {
        particular,
        kernel: a.kernel_basis(),
    })
}

// ---------------------------------------------------------------------------
// matrices over W(k)/ℓ^m
// ---------------------------------------------------------------------------

/// Dense row-major matrix over `W(k)/ℓ^m`.
#[derive(Clone, PartialEq, Eq)]
pub struct MatW {
    spec: Arc<WittSpec>,
    rows: usize,
    cols: usize,
    data: Vec<WittElem>,
}

impl std::fmt::Debug for MatW {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "MatW {}x{} over W(GF({}^{}))/{}^{}",
            self.rows,
            self.cols,
            self.spec.ell(),
            self.spec.r(),
            self.spec.ell(),
            self.spec.m()
        )?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:?}", self.at(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl MatW {
    pub fn new(spec: &Arc<WittSpec>, rows: usize, cols: usize, data: Vec<WittElem>) -> MatW {
        assert_eq!(data.len(), rows * cols);
        MatW {
            spec: spec.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn zero(spec: &Arc<WittSpec>, rows: usize, cols: usize) -> MatW {
        MatW {
            spec: spec.clone(),
            rows,
            cols,
            data: vec![WittElem::zero(spec); rows * cols],
        }
    }

    pub fn identity(spec: &Arc<WittSpec>, n: usize) -> MatW {
        let mut m = MatW::zero(spec, n, n);
        for i in 0..n {
            m.set(i, i, WittElem::one(spec));
        }
        m
    }

    pub fn from_ints(spec: &Arc<WittSpec>, rows: &[&[i64]]) -> MatW {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            for &v in *row {
                data.push(WittElem::from_int(spec, v));
            }
        }
        MatW::new(spec, r, c, data)
    }

    pub fn from_fn<F: FnMut(usize, usize) -> WittElem>(
        spec: &Arc<WittSpec>,
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> MatW {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        MatW::new(spec, rows, cols, data)
    }

    /// Entry-wise lift of a mod-ℓ matrix.
    pub fn lift(spec: &Arc<WittSpec>, m: &MatK) -> MatW {
        assert!(m.spec() == spec.field());
        MatW::from_fn(spec, m.rows(), m.cols(), |i, j| {
            WittElem::lift(spec, m.at(i, j))
        })
    }

    pub fn spec(&self) -> &Arc<WittSpec> {
        &self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &WittElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: WittElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.at(i, j).is_one()
                    } else {
                        self.at(i, j).is_zero()
                    }
                })
            })
    }

    /// Reduction mod ℓ.
    pub fn reduce(&self) -> MatK {
        MatK::from_fn(self.spec.field(), self.rows, self.cols, |i, j| {
            self.at(i, j).reduce()
        })
    }

    pub fn reduce_precision(&self, target: &Arc<WittSpec>) -> MatW {
        MatW::from_fn(target, self.rows, self.cols, |i, j| {
            self.at(i, j).reduce_precision(target)
        })
    }

    pub fn lift_precision(&self, target: &Arc<WittSpec>) -> MatW {
        MatW::from_fn(target, self.rows, self.cols, |i, j| {
            self.at(i, j).lift_precision(target)
        })
    }

    pub fn add(&self, other: &MatW) -> MatW {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.add(b))
            .collect();
        MatW::new(&self.spec, self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &MatW) -> MatW {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.sub(b))
            .collect();
        MatW::new(&self.spec, self.rows, self.cols, data)
    }

    pub fn scalar_mul(&self, c: &WittElem) -> MatW {
        MatW::new(
            &self.spec,
            self.rows,
            self.cols,
            self.data.iter().map(|a| a.mul(c)).collect(),
        )
    }

    pub fn mul(&self, other: &MatW) -> MatW {
        assert_eq!(self.cols, other.rows);
        let mut out = MatW::zero(&self.spec, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.at(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.at(i, j).add(&a.mul(other.at(l, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[WittElem]) -> Vec<WittElem> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = WittElem::zero(&self.spec);
                for j in 0..self.cols {
                    acc = acc.add(&self.at(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> MatW {
        MatW::from_fn(&self.spec, self.cols, self.rows, |i, j| {
            self.at(j, i).clone()
        })
    }

    pub fn pow(&self, mut e: u64) -> MatW {
        assert!(self.is_square());
        let mut acc = MatW::identity(&self.spec, self.rows);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn kron(&self, other: &MatW) -> MatW {
        let mut out = MatW::zero(&self.spec, self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.at(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            a.mul(other.at(i2, j2)),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(spec: &Arc<WittSpec>, blocks: &[MatW]) -> MatW {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = MatW::zero(spec, n, c);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(ro + i, co + j, b.at(i, j).clone());
                }
            }
            ro += b.rows;
            co += b.cols;
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatW {
        MatW::from_fn(&self.spec, rows, cols, |i, j| {
            self.at(r0 + i, c0 + j).clone()
        })
    }

    pub fn vec(&self) -> Vec<WittElem> {
        self.data.clone()
    }

    /// Newton lift of the residual inverse; errors when the reduction is
    /// singular (over the local ring, invertible iff invertible mod ℓ).
    pub fn inverse(&self) -> Result<MatW> {
        assert!(self.is_square());
        let res_inv = self.reduce().inverse()?;
        let mut x = MatW::lift(&self.spec, &res_inv);
        let two_i =
            MatW::identity(&self.spec, self.rows).scalar_mul(&WittElem::from_int(&self.spec, 2));
        let mut prec = 1u32;
        while prec < self.spec.m() {
            x = x.mul(&two_i.sub(&self.mul(&x)));
            prec *= 2;
        }
        if !self.mul(&x).is_identity() {
            return Err(Error::defect("matrix inverse Newton iteration failed"));
        }
        Ok(x)
    }

    /// Determinant by Laplace expansion; pair matrices stay small, and
    /// expansion avoids pivoting over the chain ring.
    pub fn det(&self) -> WittElem {
        assert!(self.is_square());
        let n = self.rows;
        assert!(n <= 8, "determinant expansion limited to n <= 8");
        if n == 0 {
            return WittElem::one(&self.spec);
        }
        let cols: Vec<usize> = (0..n).collect();
        self.det_expand(0, &cols)
    }

    fn det_expand(&self, row: usize, cols: &[usize]) -> WittElem {
        if cols.len() == 1 {
            return self.at(row, cols[0]).clone();
        }
        let mut acc = WittElem::zero(&self.spec);
        for (pos, &col) in cols.iter().enumerate() {
            let a = self.at(row, col);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&c| c != col).collect();
            let term = a.mul(&self.det_expand(row + 1, &rest));
            if pos % 2 == 0 {
                acc = acc.add(&term);
            } else {
                acc = acc.sub(&term);
            }
        }
        acc
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.reduce().is_invertible()
    }

    pub fn divisible_by_ell(&self) -> bool {
        self.data.iter().all(|e| e.divisible_by_ell())
    }

    pub fn div_exact_ell(&self, target: &Arc<WittSpec>) -> MatW {
        MatW::from_fn(target, self.rows, self.cols, |i, j| {
            self.at(i, j).div_exact_ell(target)
        })
    }
}

/// Solution of `A·x = b` over `W(k)/ℓ^m`: one particular solution and a
/// generating set for the solution module of the homogeneous system.
#[derive(Debug, Clone)]
pub struct SolveW {
    pub particular: Vec<WittElem>,
    pub kernel_gens: Vec<Vec<WittElem>>,
}

/// Layer-by-layer solver. At layer `j` the residual is divided by `ℓ^j`
/// and the correction is sought among both fresh mod-ℓ vectors and the
/// kernel directions discovered at earlier layers, so a poor particular
/// choice at one layer can be repaired later. Inconsistency is reported
/// with the failing layer.
pub fn solve_w(a: &MatW, b: &[WittElem]) -> Result<SolveW> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} vs {} rows",
            b.len(),
            a.rows()
        )));
    }
    let spec = a.spec().clone();
    let kspec = spec.field().clone();
    let m = spec.m();
    let ell = spec.ell();
    let abar = a.reduce();

    let mut x: Vec<WittElem> = vec![WittElem::zero(&spec); a.cols()];
    let mut gens: Vec<Vec<WittElem>> = vec![];
    let mut ell_pow = 1u64;

    for layer in 0..m {
        // residual, exactly divisible by ℓ^layer by construction
        let ax = a.apply(&x);
        let resid: Vec<WittElem> = b.iter().zip(&ax).map(|(bi, ai)| bi.sub(ai)).collect();
        let c: Vec<FieldElem> = resid
            .iter()
            .map(|e| {
                let coeffs: Vec<u64> = e
                    .coeffs()
                    .iter()
                    .map(|&v| {
                        debug_assert!(v % ell_pow == 0, "residual not divisible at layer {layer}");
                        (v / ell_pow) % ell
                    })
                    .collect();
                FieldElem::new(&kspec, coeffs)
            })
            .collect();

        // columns for earlier kernel directions: (A·g)/ℓ^layer mod ℓ
        let mut aug = MatK::zero(&kspec, a.rows(), gens.len() + a.cols());
        for (gi, g) in gens.iter().enumerate() {
            let ag = a.apply(g);
            for (row, e) in ag.iter().enumerate() {
                let coeffs: Vec<u64> = e.coeffs().iter().map(|&v| (v / ell_pow) % ell).collect();
                aug.set(row, gi, FieldElem::new(&kspec, coeffs));
            }
        }
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                aug.set(i, gens.len() + j, abar.at(i, j).clone());
            }
        }

        let sol = solve_k(&aug, &c)?;
        let Some(part) = sol.particular else {
            return Err(Error::InconsistentAtLayer { layer });
        };

        // apply the correction: coefficients on old directions, then ℓ^layer · fresh
        let scale = WittElem::from_int(&spec, ell_pow as i64);
        for (gi, g) in gens.iter().enumerate() {
            if part[gi].is_zero() {
                continue;
            }
            let t = WittElem::lift(&spec, &part[gi]);
            for (xi, gv) in x.iter_mut().zip(g) {
                *xi = xi.add(&t.mul(gv));
            }
        }
        for j in 0..a.cols() {
            let y = &part[gens.len() + j];
            if y.is_zero() {
                continue;
            }
            let t = WittElem::lift(&spec, y).mul(&scale);
            x[j] = x[j].add(&t);
        }

        // next layer's kernel directions
        let mut next: Vec<Vec<WittElem>> = vec![];
        for kv in &sol.kernel {
            let mut g_new = vec![WittElem::zero(&spec); a.cols()];
            for (gi, g) in gens.iter().enumerate() {
                if kv[gi].is_zero() {
                    continue;
                }
                let t = WittElem::lift(&spec, &kv[gi]);
                for (slot, gv) in g_new.iter_mut().zip(g) {
                    *slot = slot.add(&t.mul(gv));
                }
            }
            for j in 0..a.cols() {
                let y = &kv[gens.len() + j];
                if y.is_zero() {
                    continue;
                }
                g_new[j] = g_new[j].add(&WittElem::lift(&spec, y).mul(&scale));
            }
            if g_new.iter().any(|e| !e.is_zero()) {
                next.push(g_new);
            }
        }
        let ell_elem = WittElem::from_int(&spec, ell as i64);
        for g in &gens {
            let scaled: Vec<WittElem> = g.iter().map(|e| e.mul(&ell_elem)).collect();
            if scaled.iter().any(|e| !e.is_zero()) {
                next.push(scaled);
            }
        }
        gens = next;
        ell_pow *= ell;
    }

    debug_assert!(a.apply(&x).iter().zip(b).all(|(l, r)| l == r));
    Ok(SolveW {
        particular: x,
        kernel_gens: gens,
    })
}

// ---------------------------------------------------------------------------
// polynomials over k (dense, little-endian)
// ---------------------------------------------------------------------------

pub mod kpoly {
    use super::*;

    pub fn trim(mut f: Vec<FieldElem>) -> Vec<FieldElem> {
        while f.last().map(|c| c.is_zero()).unwrap_or(false) {
            f.pop();
        }
        f
    }

    pub fn mul(f: &[FieldElem], g: &[FieldElem], spec: &Arc<FieldSpec>) -> Vec<FieldElem> {
        if f.is_empty() || g.is_empty() {
            return vec![];
        }
        let mut out = vec![FieldElem::zero(spec); f.len() + g.len() - 1];
        for (i, a) in f.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in g.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        trim(out)
    }

    pub fn divrem(
        f: &[FieldElem],
        g: &[FieldElem],
        spec: &Arc<FieldSpec>,
    ) -> (Vec<FieldElem>, Vec<FieldElem>) {
        let g = trim(g.to_vec());
        assert!(!g.is_empty(), "division by zero polynomial");
        let lead_inv = g
            .last()
            .unwrap()
            .inverse()
            .expect("unit leading coefficient");
        let mut r = trim(f.to_vec());
        let mut q = vec![FieldElem::zero(spec); r.len().saturating_sub(g.len() - 1)];
        while r.len() >= g.len() {
            let k = r.len() - g.len();
            let c = r.last().unwrap().mul(&lead_inv);
            q[k] = c.clone();
            for (i, gc) in g.iter().enumerate() {
                r[k + i] = r[k + i].sub(&c.mul(gc));
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn gcd(f: &[FieldElem], g: &[FieldElem], spec: &Arc<FieldSpec>) -> Vec<FieldElem> {
        let mut a = trim(f.to_vec());
        let mut b = trim(g.to_vec());
        while !b.is_empty() {
            let (_, r) = divrem(&a, &b, spec);
            a = b;
            b = r;
        }
        if let Some(lead) = a.last().cloned() {
            let li = lead.inverse().expect("nonzero lead");
            for c in &mut a {
                *c = c.mul(&li);
            }
        }
        a
    }

    pub fn derivative(f: &[FieldElem], spec: &Arc<FieldSpec>) -> Vec<FieldElem> {
        let mut out = vec![];
        for (i, c) in f.iter().enumerate().skip(1) {
            out.push(c.mul(&FieldElem::from_int(spec, i as i64)));
        }
        trim(out)
    }

    pub fn eval(f: &[FieldElem], x: &FieldElem, spec: &Arc<FieldSpec>) -> FieldElem {
        let mut acc = FieldElem::zero(spec);
        for c in f.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Monic polynomial with the given roots (with multiplicity).
    pub fn from_roots(roots: &[FieldElem], spec: &Arc<FieldSpec>) -> Vec<FieldElem> {
        let mut f = vec![FieldElem::one(spec)];
        for root in roots {
            f = mul(&f, &[root.neg(), FieldElem::one(spec)], spec);
        }
        f
    }

    /// Evaluate `f` at a matrix (Horner).
    pub fn eval_matrix(f: &[FieldElem], t: &MatK) -> MatK {
        let spec = t.spec().clone();
        let n = t.rows();
        let mut acc = MatK::zero(&spec, n, n);
        for c in f.iter().rev() {
            acc = acc.mul(t);
            for i in 0..n {
                let v = acc.at(i, i).add(c);
                acc.set(i, i, v);
            }
        }
        acc
    }

    /// Minimal polynomial: lcm of the minimal annihilators of the standard
    /// basis vectors, each found by an incremental Krylov search.
    pub fn min_poly(t: &MatK) -> Vec<FieldElem> {
        let spec = t.spec().clone();
        let n = t.rows();
        let mut m = vec![FieldElem::one(&spec)];
        for i in 0..n {
            if m.len() == n + 1 {
                break;
            }
            let mut v = vec![FieldElem::zero(&spec); n];
            v[i] = FieldElem::one(&spec);
            let mut seq = vec![v];
            loop {
                let next = t.apply(seq.last().unwrap());
                let cols = seq.len();
                let a = MatK::from_fn(&spec, n, cols, |r, c| seq[c][r].clone());
                let sol = solve_k(&a, &next).expect("consistent dims");
                if let Some(coeffs) = sol.particular {
                    // annihilator of e_i: x^cols − Σ coeffs_j x^j
                    let mut p = vec![FieldElem::zero(&spec); cols + 1];
                    for (j, c) in coeffs.iter().enumerate() {
                        p[j] = c.neg();
                    }
                    p[cols] = FieldElem::one(&spec);
                    let g = gcd(&m, &p, &spec);
                    let (q, r) = divrem(&p, &g, &spec);
                    debug_assert!(r.is_empty());
                    m = mul(&m, &q, &spec);
                    break;
                }
                seq.push(next);
            }
        }
        m
    }

    /// Split off the roots lying in `k`: `(roots with multiplicity,
    /// root-free remainder)`.
    pub fn roots_in_field(
        f: &[FieldElem],
        spec: &Arc<FieldSpec>,
    ) -> (Vec<(FieldElem, usize)>, Vec<FieldElem>) {
        let mut rem = trim(f.to_vec());
        let mut roots = vec![];
        for idx in 0..spec.order() {
            if rem.len() <= 1 {
                break;
            }
            let alpha = FieldElem::from_index(spec, idx);
            let mut mult = 0;
            while rem.len() > 1 && eval(&rem, &alpha, spec).is_zero() {
                let (q, r) = divrem(&rem, &[alpha.neg(), FieldElem::one(spec)], spec);
                debug_assert!(r.is_empty());
                rem = q;
                mult += 1;
            }
            if mult > 0 {
                roots.push((alpha, mult));
            }
        }
        (roots, rem)
    }
}

// ---------------------------------------------------------------------------
// primary decomposition of the inertia action
// ---------------------------------------------------------------------------

/// Shape data of a `k[T]`-module: for each `q`-orbit of eigenvalues the
/// non-increasing exponent list of its primary part, plus a change of basis
/// to the block-companion standard form.
#[derive(Debug, Clone)]
pub struct PrimaryDecomposition {
    pub parts: Vec<(QOrbit, Vec<u32>)>,
    pub conjugator: MatK,
}

/// Companion matrix of a monic polynomial, acting as multiplication by `T`
/// on `k[T]/(f)` in the basis `1, T, …, T^(d−1)`.
pub fn companion(f: &[FieldElem], spec: &Arc<FieldSpec>) -> MatK {
    let d = f.len() - 1;
    assert!(
        d >= 1 && f[d].is_one(),
        "companion of a non-monic polynomial"
    );
    let mut m = MatK::zero(spec, d, d);
    for i in 0..d - 1 {
        m.set(i + 1, i, FieldElem::one(spec));
    }
    for i in 0..d {
        m.set(i, d - 1, f[i].neg());
    }
    m
}

/// Block-diagonal of companion matrices of `P̄_x^t`, one block per
/// `(orbit, exponent)` in the given order.
pub fn standard_inertia_matrix_k(parts: &[(QOrbit, Vec<u32>)], spec: &Arc<FieldSpec>) -> MatK {
    let mut blocks = vec![];
    for (orbit, exps) in parts {
        let p = kpoly::from_roots(orbit.elements(), spec);
        for &e in exps {
            let mut pe = vec![FieldElem::one(spec)];
            for _ in 0..e {
                pe = kpoly::mul(&pe, &p, spec);
            }
            blocks.push(companion(&pe, spec));
        }
    }
    MatK::block_diag(spec, &blocks)
}

pub fn primary_decomposition(t: &MatK, q: u64) -> Result<PrimaryDecomposition> {
    if !t.is_square() {
        return Err(Error::DimensionMismatch(
            "inertia matrix must be square".into(),
        ));
    }
    let spec = t.spec().clone();
    if gcd(q, spec.ell()) != 1 {
        return Err(Error::NotCoprime {
            a: q,
            b: spec.ell(),
        });
    }
    if !t.is_invertible() {
        return Err(Error::NotInvertible);
    }
    let n = t.rows();
    let minp = kpoly::min_poly(t);
    let (roots, rem) = kpoly::roots_in_field(&minp, &spec);
    if rem.len() > 1 {
        return Err(Error::EigenvalueOutsideField {
            needed: rem.len() - 1,
        });
    }
    let eigen: Vec<FieldElem> = roots.iter().map(|(a, _)| a.clone()).collect();
    let mut parts: Vec<(QOrbit, Vec<u32>)> = vec![];
    let mut claimed: Vec<u64> = vec![];
    for (alpha, _) in &roots {
        if claimed.contains(&alpha.index()) {
            continue;
        }
        let ord = mult_order(alpha)?;
        if gcd(ord, q) != 1 {
            return Err(Error::OrbitOrderSharesFactor { order: ord, q });
        }
        let orbit = QOrbit::of_element(alpha, q)?;
        for e in orbit.elements() {
            if !eigen.contains(e) {
                return Err(Error::OrbitNotClosed { q });
            }
            claimed.push(e.index());
        }
        // exponents from the kernel growth of P̄(T)^j
        let p = kpoly::from_roots(orbit.elements(), &spec);
        let pt = kpoly::eval_matrix(&p, t);
        let mut counts: Vec<usize> = vec![];
        let mut power = MatK::identity(&spec, n);
        let mut prev_dim = 0usize;
        loop {
            power = power.mul(&pt);
            let dim = n - power.rank();
            let grow = dim - prev_dim;
            if grow == 0 {
                break;
            }
            if !grow.is_multiple_of(orbit.len()) {
                return Err(Error::defect("kernel growth not a multiple of orbit size"));
            }
            counts.push(grow / orbit.len());
            prev_dim = dim;
        }
        let max_c = counts.first().copied().unwrap_or(0);
        let exps: Vec<u32> = (1..=max_c)
            .map(|i| counts.iter().filter(|&&c| c >= i).count() as u32)
            .collect();
        parts.push((orbit, exps));
    }
    parts.sort_by_key(|(o, _)| o.rep().index());
    let total: usize = parts
        .iter()
        .map(|(o, e)| o.len() * e.iter().map(|&x| x as usize).sum::<usize>())
        .sum();
    if total != n {
        return Err(Error::defect("primary components do not fill the space"));
    }

    // change of basis: an invertible solution of T·C = C·standard
    let standard = standard_inertia_matrix_k(&parts, &spec);
    let mut rng = SplitMix64::new(0);
    let conjugator = match conjugator_between(t, &standard, &mut rng)? {
        Some(c) => c,
        None => return Err(Error::defect("no conjugator to the standard form exists")),
    };
    debug_assert!(conjugator.inverse().unwrap().mul(t).mul(&conjugator) == standard);
    Ok(PrimaryDecomposition { parts, conjugator })
}

// ---------------------------------------------------------------------------
// intertwiners, invertible-element search, simultaneous similarity
// ---------------------------------------------------------------------------

/// Basis of `{X : X·A_i = B_i·X for all i}`.
pub fn intertwiner_basis(constraints: &[(&MatK, &MatK)]) -> Vec<MatK> {
    assert!(!constraints.is_empty());
    let spec = constraints[0].0.spec().clone();
    let rows_a = constraints[0].0.rows();
    let rows_b = constraints[0].1.rows();
    // X is rows_b × rows_a; stack (I ⊗ A_iᵀ − B_i ⊗ I)·vec(X) = 0
    let dim = rows_a * rows_b;
    let mut sys = MatK::zero(&spec, 0, dim);
    for (a, b) in constraints {
        let left = MatK::identity(&spec, rows_b).kron(&a.transpose());
        let right = b.kron(&MatK::identity(&spec, rows_a));
        sys = sys.vstack(&left.sub(&right));
    }
    sys.kernel_basis()
        .into_iter()
        .map(|v| MatK::from_vec(&spec, rows_b, rows_a, v))
        .collect()
}

pub enum InvertibleSearch {
    Found(MatK),
    /// The whole span was enumerated; every element is singular.
    ExhaustedNone,
    /// Sampling failed and the span is too large to enumerate.
    Undecided {
        space_dim: usize,
    },
}

/// Look for an invertible element in the span of `basis`: random draws
/// first, exhaustive enumeration when `ℓ^dim ≤ 10^5`, an extended sampling
/// round otherwise.
pub fn find_invertible_in_span(basis: &[MatK], rng: &mut SplitMix64) -> InvertibleSearch {
    if basis.is_empty() {
        return InvertibleSearch::ExhaustedNone;
    }
    let spec = basis[0].spec().clone();
    let order = spec.order();
    let s = basis.len();
    let combine = |coeffs: &[u64]| -> MatK {
        let mut acc = MatK::zero(&spec, basis[0].rows(), basis[0].cols());
        for (b, &c) in basis.iter().zip(coeffs) {
            if c != 0 {
                acc = acc.add(&b.scalar_mul(&FieldElem::from_index(&spec, c)));
            }
        }
        acc
    };
    for _ in 0..200 {
        let coeffs: Vec<u64> = (0..s).map(|_| rng.below(order)).collect();
        let cand = combine(&coeffs);
        if cand.is_invertible() {
            return InvertibleSearch::Found(cand);
        }
    }
    let space: u128 = (order as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if space <= 100_000 {
        for mut idx in 0..space {
            let mut coeffs = vec![0u64; s];
            for slot in coeffs.iter_mut() {
                *slot = (idx % order as u128) as u64;
                idx /= order as u128;
            }
            let cand = combine(&coeffs);
            if cand.is_invertible() {
                return InvertibleSearch::Found(cand);
            }
        }
        return InvertibleSearch::ExhaustedNone;
    }
    for _ in 0..10_000 {
        let coeffs: Vec<u64> = (0..s).map(|_| rng.below(order)).collect();
        let cand = combine(&coeffs);
        if cand.is_invertible() {
            return InvertibleSearch::Found(cand);
        }
    }
    InvertibleSearch::Undecided { space_dim: s }
}

/// Invertible `C` with `C⁻¹·A·C = B`, if one exists.
pub fn conjugator_between(a: &MatK, b: &MatK, rng: &mut SplitMix64) -> Result<Option<MatK>> {
    // C⁻¹AC = B ⟺ A·C = C·B: C intertwines B into A
    let basis = intertwiner_basis(&[(b, a)]);
    match find_invertible_in_span(&basis, rng) {
        InvertibleSearch::Found(c) => Ok(Some(c)),
        InvertibleSearch::ExhaustedNone => Ok(None),
        InvertibleSearch::Undecided { space_dim } => Err(Error::SimilarityUndecided { space_dim }),
    }
}

/// Invertible `C` with `C·T₁·C⁻¹ = T₂` and `C·S₁·C⁻¹ = S₂`, if one exists.
/// Absence is only reported when the intertwiner span is zero or was
/// exhausted; an oversized span with no sampled witness is an error.
pub fn simultaneous_conjugator(
    t1: &MatK,
    s1: &MatK,
    t2: &MatK,
    s2: &MatK,
    rng: &mut SplitMix64,
) -> Result<Option<MatK>> {
    let basis = intertwiner_basis(&[(t1, t2), (s1, s2)]);
    match find_invertible_in_span(&basis, rng) {
        InvertibleSearch::Found(c) => {
            debug_assert!(c.mul(t1) == t2.mul(&c) && c.mul(s1) == s2.mul(&c));
            Ok(Some(c))
        }
        InvertibleSearch::ExhaustedNone => Ok(None),
        InvertibleSearch::Undecided { space_dim } => Err(Error::SimilarityUndecided { space_dim }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rings::FieldSpec;

    fn f5() -> Arc<FieldSpec> {
        FieldSpec::new(5, 1, None).unwrap()
    }

    fn f7() -> Arc<FieldSpec> {
        FieldSpec::new(7, 1, None).unwrap()
    }

    fn w(ell: u64, m: u32) -> Arc<WittSpec> {
        WittSpec::new(&FieldSpec::new(ell, 1, None).unwrap(), m).unwrap()
    }

    #[test]
    fn vec_convention() {
        // vec(A·M·B) = (A ⊗ Bᵀ)·vec(M) in row-major convention
        let k = f5();
        let a = MatK::from_ints(&k, &[&[1, 2], &[3, 4]]);
        let m = MatK::from_ints(&k, &[&[0, 1], &[2, 3]]);
        let b = MatK::from_ints(&k, &[&[1, 1], &[0, 2]]);
        let lhs = a.mul(&m).mul(&b).vec();
        let rhs = a.kron(&b.transpose()).apply(&m.vec());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn solve_k_examples() {
        let k = f5();
        let a = MatK::identity(&k, 3);
        let b: Vec<FieldElem> = [1, 2, 3]
            .iter()
            .map(|&v| FieldElem::from_int(&k, v))
            .collect();
        let sol = solve_k(&a, &b).unwrap();
        assert_eq!(sol.particular.unwrap(), b);
        assert!(sol.kernel.is_empty());

        let a = MatK::zero(&k, 3, 3);
        let z = vec![FieldElem::zero(&k); 3];
        let sol = solve_k(&a, &z).unwrap();
        assert!(sol.particular.unwrap().iter().all(|e| e.is_zero()));
        assert_eq!(sol.kernel.len(), 3);

        let a = MatK::from_ints(&k, &[&[1, 1], &[2, 2]]);
        let b: Vec<FieldElem> = [1, 2].iter().map(|&v| FieldElem::from_int(&k, v)).collect();
        let sol = solve_k(&a, &b).unwrap();
        let x = sol.particular.unwrap();
        assert_eq!(a.apply(&x), b);
        assert_eq!(
            x,
            vec![FieldElem::from_int(&k, 1), FieldElem::from_int(&k, 0)]
        );
        assert_eq!(sol.kernel.len(), 1);
        let kv = &sol.kernel[0];
        assert_eq!(kv[0].neg(), kv[1]); // spanned by (1, −1)

        let b: Vec<FieldElem> = [1, 3].iter().map(|&v| FieldElem::from_int(&k, v)).collect();
        assert!(solve_k(&a, &b).unwrap().particular.is_none());
    }

    #[test]
    fn solve_w_examples() {
        let w25 = w(5, 2);
        let a = MatW::identity(&w25, 2);
        let b = vec![WittElem::from_int(&w25, 17), WittElem::from_int(&w25, 23)];
        let sol = solve_w(&a, &b).unwrap();
        assert_eq!(sol.particular, b);
        assert!(sol.kernel_gens.is_empty());

        // A = [5], b = [5]: particular 1, kernel = multiples of 5
        let a = MatW::from_ints(&w25, &[&[5]]);
        let b = vec![WittElem::from_int(&w25, 5)];
        let sol = solve_w(&a, &b).unwrap();
        assert_eq!(sol.particular[0], WittElem::from_int(&w25, 1));
        let mut reachable = std::collections::BTreeSet::new();
        reachable.insert(0u64);
        for g in &sol.kernel_gens {
            for t in 0..25 {
                let v = g[0].mul(&WittElem::from_int(&w25, t));
                reachable.insert(v.coeffs()[0]);
            }
        }
        assert_eq!(
            reachable.into_iter().collect::<Vec<_>>(),
            vec![0, 5, 10, 15, 20]
        );

        // A = [5], b = [1]: inconsistent at layer 0
        let b = vec![WittElem::from_int(&w25, 1)];
        match solve_w(&a, &b) {
            Err(Error::InconsistentAtLayer { layer: 0 }) => {}
            other => panic!("expected layer-0 failure, got {other:?}"),
        }
    }

    #[test]
    fn solve_w_agrees_with_enumeration() {
        // brute-force oracle on small systems over Z/25
        let w25 = w(5, 2);
        let cases: Vec<(Vec<Vec<i64>>, Vec<i64>)> = vec![
            (vec![vec![5]], vec![10]),
            (vec![vec![10]], vec![15]),
            (vec![vec![5, 1], vec![0, 5]], vec![10, 5]),
            (vec![vec![2, 3], vec![1, 4]], vec![7, 9]),
            (vec![vec![5, 5], vec![5, 5]], vec![10, 10]),
            (vec![vec![5, 5], vec![5, 5]], vec![10, 11]),
            (vec![vec![0, 5], vec![5, 0]], vec![5, 20]),
        ];
        for (am, bv) in cases {
            let rows: Vec<&[i64]> = am.iter().map(|r| r.as_slice()).collect();
            let a = MatW::from_ints(&w25, &rows);
            let b: Vec<WittElem> = bv.iter().map(|&v| WittElem::from_int(&w25, v)).collect();
            let n = a.cols();
            let mut truth = std::collections::BTreeSet::new();
            for idx in 0..25u64.pow(n as u32) {
                let mut x = vec![];
                let mut v = idx;
                for _ in 0..n {
                    x.push(WittElem::from_int(&w25, (v % 25) as i64));
                    v /= 25;
                }
                if a.apply(&x) == b {
                    truth.insert(x.iter().map(|e| e.coeffs()[0]).collect::<Vec<_>>());
                }
            }
            match solve_w(&a, &b) {
                Ok(sol) => {
                    assert!(
                        !truth.is_empty(),
                        "solver found a solution where none exists"
                    );
                    assert!(truth.contains(
                        &sol.particular
                            .iter()
                            .map(|e| e.coeffs()[0])
                            .collect::<Vec<_>>()
                    ));
                    // particular + kernel span reaches exactly the truth set
                    let mut reached = std::collections::BTreeSet::new();
                    let gens = &sol.kernel_gens;
                    let mut stack = vec![(0usize, sol.particular.clone())];
                    while let Some((gi, cur)) = stack.pop() {
                        if gi == gens.len() {
                            reached.insert(cur.iter().map(|e| e.coeffs()[0]).collect::<Vec<u64>>());
                            continue;
                        }
                        for t in 0..25 {
                            let mut nxt = cur.clone();
                            let te = WittElem::from_int(&w25, t);
                            for (slot, g) in nxt.iter_mut().zip(&gens[gi]) {
                                *slot = slot.add(&te.mul(g));
                            }
                            stack.push((gi + 1, nxt));
                        }
                    }
                    assert_eq!(reached, truth);
                }
                Err(Error::InconsistentAtLayer { .. }) => {
                    assert!(
                        truth.is_empty(),
                        "solver reported inconsistent but solutions exist"
                    );
                }
                Err(e) => panic!("unexpected error {e:?}"),
            }
        }
    }

    #[test]
    fn solve_w_reduction_property() {
        let w125 = w(5, 3);
        let a = MatW::from_ints(&w125, &[&[7, 5], &[25, 3]]);
        let b = vec![WittElem::from_int(&w125, 31), WittElem::from_int(&w125, 54)];
        let sol = solve_w(&a, &b).unwrap();
        for j in 1..=2u32 {
            let target = w125.with_precision(j).unwrap();
            let ar = a.reduce_precision(&target);
            let br: Vec<WittElem> = b.iter().map(|e| e.reduce_precision(&target)).collect();
            let xr: Vec<WittElem> = sol
                .particular
                .iter()
                .map(|e| e.reduce_precision(&target))
                .collect();
            assert_eq!(ar.apply(&xr), br);
        }
    }

    #[test]
    fn matw_inverse_and_det() {
        let w49 = w(7, 2);
        let a = MatW::from_ints(&w49, &[&[2, 3], &[1, 4]]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert_eq!(a.det(), WittElem::from_int(&w49, 5));
        // det ≡ 0 mod 7 is fine for det itself, just not invertible
        assert_eq!(
            MatW::from_ints(&w49, &[&[2, 3], &[1, 5]]).det(),
            WittElem::from_int(&w49, 7)
        );
        let b = MatW::from_ints(&w49, &[&[1, 2, 3], &[0, 1, 4], &[5, 6, 0]]);
        assert_eq!(b.det(), WittElem::from_int(&w49, 1));
        let singular = MatW::from_ints(&w49, &[&[7, 0], &[0, 1]]);
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn min_poly_and_roots() {
        let k = f5();
        let t = MatK::from_ints(&k, &[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let m = kpoly::min_poly(&t);
        let expected = kpoly::from_roots(&vec![FieldElem::from_int(&k, 1); 3], &k);
        assert_eq!(m, expected);
        let (roots, rem) = kpoly::roots_in_field(&m, &k);
        assert!(rem.len() <= 1);
        assert_eq!(roots, vec![(FieldElem::from_int(&k, 1), 3)]);
    }

    #[test]
    fn primary_decomposition_examples() {
        let k = f5();
        // identity: orbit {1}, exponents (1,…,1)
        let t = MatK::identity(&k, 3);
        let pd = primary_decomposition(&t, 2).unwrap();
        assert_eq!(pd.parts.len(), 1);
        assert_eq!(pd.parts[0].0.elements().len(), 1);
        assert!(pd.parts[0].0.rep().is_one());
        assert_eq!(pd.parts[0].1, vec![1, 1, 1]);

        // regular unipotent: single exponent 3
        let t = MatK::from_ints(&k, &[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let pd = primary_decomposition(&t, 2).unwrap();
        assert_eq!(pd.parts.len(), 1);
        assert_eq!(pd.parts[0].1, vec![3]);
        let std_m = standard_inertia_matrix_k(&pd.parts, &k);
        assert_eq!(
            pd.conjugator.inverse().unwrap().mul(&t).mul(&pd.conjugator),
            std_m
        );

        // diag(2,4) over F_7, q=2: orbit {2,4} exponent (1)
        let k7 = f7();
        let t = MatK::from_ints(&k7, &[&[2, 0], &[0, 4]]);
        let pd = primary_decomposition(&t, 2).unwrap();
        assert_eq!(pd.parts.len(), 1);
        let orbit_ints: Vec<u64> = pd.parts[0].0.elements().iter().map(|e| e.index()).collect();
        assert_eq!(orbit_ints, vec![2, 4]);
        assert_eq!(pd.parts[0].1, vec![1]);
    }

    #[test]
    fn primary_decomposition_errors() {
        let k7 = f7();
        // eigenvalue 2 with q=2 but 4 missing: orbit not closed
        let t = MatK::from_ints(&k7, &[&[2, 0], &[0, 1]]);
        assert!(matches!(
            primary_decomposition(&t, 2),
            Err(Error::OrbitNotClosed { .. })
        ));
        // eigenvalue of even order with q = 2
        let t = MatK::from_ints(&k7, &[&[3]]);
        assert!(matches!(
            primary_decomposition(&t, 2),
            Err(Error::OrbitOrderSharesFactor { order: 6, q: 2 })
        ));
        // irreducible quadratic over F_5: x² + 2 has no roots
        let k = f5();
        let t = MatK::from_ints(&k, &[&[0, -2], &[1, 0]]);
        assert!(matches!(
            primary_decomposition(&t, 3),
            Err(Error::EigenvalueOutsideField { .. })
        ));
    }

    #[test]
    fn primary_decomposition_conjugation_invariant() {
        let k7 = f7();
        let t = MatK::from_ints(&k7, &[&[2, 0, 0], &[0, 4, 0], &[0, 0, 1]]);
        let base = primary_decomposition(&t, 2).unwrap();
        let mut rng = SplitMix64::new(99);
        let mut done = 0;
        while done < 50 {
            let c = MatK::from_fn(&k7, 3, 3, |_, _| FieldElem::from_index(&k7, rng.below(7)));
            if !c.is_invertible() {
                continue;
            }
            done += 1;
            let conj = c.inverse().unwrap().mul(&t).mul(&c);
            let pd = primary_decomposition(&conj, 2).unwrap();
            assert_eq!(pd.parts.len(), base.parts.len());
            for (a, b) in pd.parts.iter().zip(&base.parts) {
                assert_eq!(a.0, b.0);
                assert_eq!(a.1, b.1);
            }
            let std_m = standard_inertia_matrix_k(&pd.parts, &k7);
            assert_eq!(
                pd.conjugator
                    .inverse()
                    .unwrap()
                    .mul(&conj)
                    .mul(&pd.conjugator),
                std_m
            );
        }
    }

    #[test]
    fn simultaneous_conjugator_roundtrip() {
        let k = f5();
        let t1 = MatK::from_ints(&k, &[&[1, 1], &[0, 1]]);
        let s1 = MatK::from_ints(&k, &[&[2, 0], &[0, 1]]);
        let c0 = MatK::from_ints(&k, &[&[1, 2], &[1, 3]]);
        assert!(c0.is_invertible());
        let t2 = c0.mul(&t1).mul(&c0.inverse().unwrap());
        let s2 = c0.mul(&s1).mul(&c0.inverse().unwrap());
        let mut rng = SplitMix64::new(1);
        let c = simultaneous_conjugator(&t1, &s1, &t2, &s2, &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(c.mul(&t1).mul(&c.inverse().unwrap()), t2);
        assert_eq!(c.mul(&s1).mul(&c.inverse().unwrap()), s2);
        // different residual data: no conjugator
        let t3 = MatK::identity(&k, 2);
        let none = simultaneous_conjugator(&t1, &s1, &t3, &s2, &mut rng).unwrap();
        assert!(none.is_none());
    }
}
