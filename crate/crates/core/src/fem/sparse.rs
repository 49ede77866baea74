//! Compressed-row Hermitian matrices and an envelope Cholesky factorization.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in the order they appear in `triplets`.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len() / 4);
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len() / 4);
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Overwrites the upper triangle with the conjugate of the lower one and
    /// zeroes imaginary parts on the diagonal. The pattern must be symmetric.
    pub fn hermitize(&mut self) {
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                if c == r {
                    self.vals[k].im = 0.0;
                } else if c > r {
                    self.vals[k] = self.get(c, r).conj();
                }
            }
        }
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).all(|k| self.vals[k] == self.get(self.cols[k], r).conj())
        })
    }

    pub fn mul_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.n != other.n {
            return Err(Error::Assembly("matrix dimensions differ".into()));
        }
        if self.row_ptr == other.row_ptr && self.cols == other.cols {
            let vals = self.vals.iter().zip(&other.vals).map(|(a, b)| a + b * alpha).collect();
            return Ok(CsrMatrix {
                vals,
                ..self.clone()
            });
        }
        let mut t = Vec::with_capacity(self.vals.len() + other.vals.len());
        for (m, scale) in [(self, 1.0), (other, alpha)] {
            for r in 0..m.n {
                for k in m.row_ptr[r]..m.row_ptr[r + 1] {
                    t.push((r, m.cols[k], m.vals[k] * scale));
                }
            }
        }
        Ok(CsrMatrix::from_triplets(self.n, t))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                d[(r, self.cols[k])] = self.vals[k];
            }
        }
        d
    }
}

/// `A = L Lᴴ` with `L` stored row by row from its first nonzero column.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    ptr: Vec<usize>,
    data: Vec<Complex64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.n;
        let mut first = Vec::with_capacity(n);
        let mut ptr = Vec::with_capacity(n + 1);
        ptr.push(0);
        for r in 0..n {
            let lo = a.cols[a.row_ptr[r]..a.row_ptr[r + 1]]
                .first()
                .copied()
                .unwrap_or(r)
                .min(r);
            first.push(lo);
            ptr.push(ptr[r] + (r - lo + 1));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); ptr[n]];
        for r in 0..n {
            let base = ptr[r];
            for k in a.row_ptr[r]..a.row_ptr[r + 1] {
                let c = a.cols[k];
                if c <= r {
                    data[base + c - first[r]] = a.vals[k];
                }
            }
            let fr = first[r];
            for c in fr..r {
                let lo = fr.max(first[c]);
                let (done, row) = data.split_at_mut(base);
                let lc = &done[ptr[c]..ptr[c + 1]];
                let fc = first[c];
                let mut s = row[c - fr];
                for k in lo..c {
                    s -= row[k - fr] * lc[k - fc].conj();
                }
                row[c - fr] = s / lc[c - fc].re;
            }
            let row = &mut data[base..ptr[r + 1]];
            let mut d = row[r - fr].re;
            for v in &row[..r - fr] {
                d -= v.norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Assembly(format!(
                    "shifted operator is not positive definite at row {r} (pivot {d:e})"
                )));
            }
            row[r - fr] = Complex64::new(d.sqrt(), 0.0);
        }
        Ok(EnvelopeCholesky { first, ptr, data })
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = self.len();
        for r in 0..n {
            let fr = self.first[r];
            let row = &self.data[self.ptr[r]..self.ptr[r + 1]];
            let mut s = x[r];
            for (k, v) in row[..r - fr].iter().enumerate() {
                s -= v * x[fr + k];
            }
            x[r] = s / row[r - fr].re;
        }
        for r in (0..n).rev() {
            let fr = self.first[r];
            let row = &self.data[self.ptr[r]..self.ptr[r + 1]];
            let xr = x[r] / row[r - fr].re;
            x[r] = xr;
            for (k, v) in row[..r - fr].iter().enumerate() {
                x[fr + k] -= v.conj() * xr;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> CsrMatrix {
        let t = vec![
            (0, 0, c(4.0, 0.0)),
            (0, 1, c(1.0, 1.0)),
            (1, 0, c(1.0, -1.0)),
            (1, 1, c(5.0, 0.0)),
            (1, 3, c(0.0, 2.0)),
            (3, 1, c(0.0, -2.0)),
            (2, 2, c(3.0, 0.0)),
            (2, 3, c(1.0, 0.0)),
            (3, 2, c(1.0, 0.0)),
            (3, 3, c(6.0, 0.0)),
            (3, 3, c(0.5, 0.0)),
        ];
        CsrMatrix::from_triplets(4, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = sample();
        assert_eq!(a.get(3, 3), c(6.5, 0.0));
        assert_eq!(a.get(0, 2), c(0.0, 0.0));
        assert!(a.is_hermitian());
    }

    #[test]
    fn cholesky_solves_against_dense() {
        let a = sample();
        let f = EnvelopeCholesky::factor(&a).unwrap();
        let b = vec![c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5), c(0.3, 0.0)];
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let ax = a.apply(&x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(2.0, 0.0)), (1, 1, c(1.0, 0.0))]);
        assert!(EnvelopeCholesky::factor(&a).is_err());
    }
}
