//! Banded square matrices with an LU factorization that does not pivot.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix with `lower` subdiagonals and `upper` superdiagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T> {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(n.saturating_sub(1));
        let upper = upper.min(n.saturating_sub(1));
        Self {
            n,
            lower,
            upper,
            data: vec![T::zero(); n * (lower + upper + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    /// Column range stored for row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.n)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.lower + self.upper + 1) + (j + self.lower - i)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            T::zero()
        }
    }

    /// Panics outside the band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// Stored entries of row `i`, starting at column `row_range(i).start`.
    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        let r = self.row_range(i);
        let s = self.idx(i, r.start);
        &self.data[s..s + r.len()]
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_range(i);
            let mut s = T::zero();
            for (a, xv) in self.row(i).iter().zip(&x[r]) {
                s += *a * *xv;
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Applies `f(i, j, a_ij)` to every stored entry.
    pub fn map_entries(&mut self, f: impl Fn(usize, usize, T) -> T) {
        for i in 0..self.n {
            for j in self.row_range(i) {
                let k = self.idx(i, j);
                self.data[k] = f(i, j, self.data[k]);
            }
        }
    }

    /// LU factorization without pivoting; valid for nonsingular M-matrices.
    pub fn lu(mut self) -> Result<BandedLu<T>> {
        let n = self.n;
        for k in 0..n {
            let piv = self.data[self.idx(k, k)];
            if !(piv > T::zero()) || !piv.is_finite() {
                return Err(Error::NonFinite(format!(
                    "pivot {piv} at row {k} in unpivoted LU"
                )));
            }
            let i_end = (k + self.lower + 1).min(n);
            let j_end = (k + self.upper + 1).min(n);
            for i in k + 1..i_end {
                let ik = self.idx(i, k);
                let m = self.data[ik] / piv;
                self.data[ik] = m;
                if m == T::zero() {
                    continue;
                }
                let len = j_end - (k + 1);
                let (ks, is) = (self.idx(k, k + 1), self.idx(i, k + 1));
                // row k precedes row i in storage
                let (head, tail) = self.data.split_at_mut(is);
                for (a, b) in tail[..len].iter_mut().zip(&head[ks..ks + len]) {
                    *a -= m * *b;
                }
            }
        }
        Ok(BandedLu { m: self })
    }
}

/// Packed L (unit diagonal) and U factors.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    m: BandedMatrix<T>,
}

impl<T: Scalar> BandedLu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let m = &self.m;
        let n = m.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in i.saturating_sub(m.lower)..i {
                s -= m.data[m.idx(i, j)] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..(i + m.upper + 1).min(n) {
                s -= m.data[m.idx(i, j)] * y[j];
            }
            y[i] = s / m.data[m.idx(i, i)];
        }
        y
    }
}
