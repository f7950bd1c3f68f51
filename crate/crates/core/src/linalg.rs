//! Dense complex matrices stored as split real/imaginary planes.
//!
//! The receiver spends almost all of its time in three kernels: rank-one
//! updates `Y += a bᵀ`, left products `φᴴ Y` and right products `Y xᴴ`.
//! Keeping the real and imaginary parts in separate row-major planes lets each
//! of them run as plain `f64` loops over contiguous rows.

use alloc::vec;
use alloc::vec::Vec;

pub use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            re: vec![0.0; rows * cols],
            im: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from a row-major slice of complex entries.
    pub fn from_rows(rows: usize, cols: usize, data: &[C64]) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self {
            rows,
            cols,
            re: data.iter().map(|z| z.re).collect(),
            im: data.iter().map(|z| z.im).collect(),
        }
    }

    /// `a bᵀ` as a fresh matrix.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        m.add_outer(a, b);
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        let i = r * self.cols + c;
        C64::new(self.re[i], self.im[i])
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        let i = r * self.cols + c;
        self.re[i] = z.re;
        self.im[i] = z.im;
    }

    pub fn row(&self, r: usize) -> Vec<C64> {
        let s = r * self.cols;
        (s..s + self.cols)
            .map(|i| C64::new(self.re[i], self.im[i]))
            .collect()
    }

    pub fn row_planes(&self, r: usize) -> (&[f64], &[f64]) {
        let s = r * self.cols;
        (&self.re[s..s + self.cols], &self.im[s..s + self.cols])
    }

    pub fn row_planes_mut(&mut self, r: usize) -> (&mut [f64], &mut [f64]) {
        let s = r * self.cols;
        (
            &mut self.re[s..s + self.cols],
            &mut self.im[s..s + self.cols],
        )
    }

    /// Whole real and imaginary planes, row-major.
    pub fn planes_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.re, &mut self.im)
    }

    pub fn to_rows(&self) -> Vec<C64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite())
    }

    /// Sum of squared magnitudes of all entries.
    pub fn energy(&self) -> f64 {
        self.re.iter().chain(&self.im).map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(a, b)| libm::hypot(*a, *b))
            .fold(0.0, f64::max)
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.re.iter_mut().zip(&other.re) {
            *a += b;
        }
        for (a, b) in self.im.iter_mut().zip(&other.im) {
            *a += b;
        }
    }

    /// `self -= other`.
    pub fn sub_assign(&mut self, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.re.iter_mut().zip(&other.re) {
            *a -= b;
        }
        for (a, b) in self.im.iter_mut().zip(&other.im) {
            *a -= b;
        }
    }

    /// `self += a bᵀ` where `a` has one entry per row and `b` one per column.
    pub fn add_outer(&mut self, a: &[C64], b: &[C64]) {
        self.rank_one(a, b, 1.0);
    }

    /// `self -= a bᵀ`.
    pub fn sub_outer(&mut self, a: &[C64], b: &[C64]) {
        self.rank_one(a, b, -1.0);
    }

    fn rank_one(&mut self, a: &[C64], b: &[C64], sign: f64) {
        assert_eq!(a.len(), self.rows, "column vector length");
        assert_eq!(b.len(), self.cols, "row vector length");
        let (br, bi) = split(b);
        for (r, ar) in a.iter().enumerate() {
            let (pr, pi) = (sign * ar.re, sign * ar.im);
            if pr == 0.0 && pi == 0.0 {
                continue;
            }
            let (yr, yi) = self.row_planes_mut(r);
            for n in 0..br.len() {
                yr[n] += pr * br[n] - pi * bi[n];
                yi[n] += pr * bi[n] + pi * br[n];
            }
        }
    }

    /// `φᴴ · self`, a row vector with one entry per column.
    pub fn left_mul_conj(&self, phi: &[C64]) -> Vec<C64> {
        assert_eq!(phi.len(), self.rows);
        let mut fr = vec![0.0; self.cols];
        let mut fi = vec![0.0; self.cols];
        for (r, p) in phi.iter().enumerate() {
            let (pr, pi) = (p.re, p.im);
            let (yr, yi) = self.row_planes(r);
            // conj(p) * y = (pr*yr + pi*yi) + i(pr*yi - pi*yr)
            for n in 0..self.cols {
                fr[n] += pr * yr[n] + pi * yi[n];
                fi[n] += pr * yi[n] - pi * yr[n];
            }
        }
        join(&fr, &fi)
    }

    /// `self · xᴴ`, a column vector with one entry per row.
    pub fn right_mul_conj(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        let (xr, xi) = split(x);
        (0..self.rows)
            .map(|r| {
                let (yr, yi) = self.row_planes(r);
                // y * conj(x) = (yr*xr + yi*xi) + i(yi*xr - yr*xi)
                let mut acc_re = [0.0f64; 4];
                let mut acc_im = [0.0f64; 4];
                let chunks = self.cols / 4;
                for c in 0..chunks {
                    for l in 0..4 {
                        let n = 4 * c + l;
                        acc_re[l] += yr[n] * xr[n] + yi[n] * xi[n];
                        acc_im[l] += yi[n] * xr[n] - yr[n] * xi[n];
                    }
                }
                for n in 4 * chunks..self.cols {
                    acc_re[0] += yr[n] * xr[n] + yi[n] * xi[n];
                    acc_im[0] += yi[n] * xr[n] - yr[n] * xi[n];
                }
                C64::new(acc_re.iter().sum(), acc_im.iter().sum())
            })
            .collect()
    }

    /// Applies an unnormalised fast Walsh–Hadamard transform to every row in
    /// place. Row `r` becomes `row_r · H` with `H` the Sylvester matrix of
    /// order `cols`.
    pub fn fwht_rows(&mut self) {
        assert!(self.cols.is_power_of_two(), "FWHT needs power-of-two width");
        for r in 0..self.rows {
            let (yr, yi) = self.row_planes_mut(r);
            fwht_in_place(yr);
            fwht_in_place(yi);
        }
    }

    /// `conj(self) · b`, where `self` is `K × M` and `b` is `M × N`.
    pub fn conj_mul(&self, b: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, b.rows, "inner dimensions");
        let n = b.cols;
        let mut out = CMatrix::zeros(self.rows, n);
        for m in 0..self.cols {
            let (br, bi) = b.row_planes(m);
            for k in 0..self.rows {
                let i = k * self.cols + m;
                let (pr, pi) = (self.re[i], self.im[i]);
                let or = &mut out.re[k * n..(k + 1) * n];
                let oi = &mut out.im[k * n..(k + 1) * n];
                for c in 0..n {
                    or[c] += pr * br[c] + pi * bi[c];
                    oi[c] += pr * bi[c] - pi * br[c];
                }
            }
        }
        out
    }

    /// Squared norm of row `r`.
    pub fn row_norm_sq(&self, r: usize) -> f64 {
        let (re, im) = self.row_planes(r);
        re.iter().zip(im).map(|(a, b)| a * a + b * b).sum()
    }

    pub fn transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                let j = c * self.rows + r;
                t.re[j] = self.re[i];
                t.im[j] = self.im[i];
            }
        }
        t
    }
}

pub(crate) fn fwht_in_place(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let a = v[i];
                let b = v[i + h];
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn split(v: &[C64]) -> (Vec<f64>, Vec<f64>) {
    (
        v.iter().map(|z| z.re).collect(),
        v.iter().map(|z| z.im).collect(),
    )
}

fn join(re: &[f64], im: &[f64]) -> Vec<C64> {
    re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect()
}

/// `aᴴ b`.
pub fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `a -= s · b`.
pub fn axpy_sub(a: &mut [C64], s: C64, b: &[C64]) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x -= s * y;
    }
}
