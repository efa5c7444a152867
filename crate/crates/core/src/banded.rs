//! Banded linear algebra: symmetric banded storage with a Sturm-count
//! bisection eigensolver, and a partially pivoted banded LU factorization.

use num_complex::ComplexFloat;

use crate::error::{Error, Result};

/// Real symmetric matrix with half-bandwidth `b`; `off[d - 1][i]` holds `A[i][i + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBanded {
    diag: Vec<f64>,
    off: Vec<Vec<f64>>,
}

impl SymmetricBanded {
    pub fn new(diag: Vec<f64>, off: Vec<Vec<f64>>) -> Result<Self> {
        let n = diag.len();
        for (d, band) in off.iter().enumerate() {
            if band.len() != n.saturating_sub(d + 1) {
                return Err(Error::InvalidInput(format!(
                    "band {} has length {}, expected {}",
                    d + 1,
                    band.len(),
                    n.saturating_sub(d + 1)
                )));
            }
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn half_bandwidth(&self) -> usize {
        self.off.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn band(&self, d: usize) -> &[f64] {
        &self.off[d - 1]
    }

    /// `A[i][j]`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.diag[lo],
            d if d <= self.off.len() => self.off[d - 1][lo],
            _ => 0.0,
        }
    }

    pub fn apply<T: ComplexFloat<Real = f64>>(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = x.iter().zip(&self.diag).map(|(&v, &a)| v * T::from(a).unwrap()).collect();
        for (d0, band) in self.off.iter().enumerate() {
            let d = d0 + 1;
            for i in 0..n - d {
                let a = T::from(band[i]).unwrap();
                y[i] = y[i] + a * x[i + d];
                y[i + d] = y[i + d] + a * x[i];
            }
        }
        y
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r: f64 = (0..n.min(i + self.off.len() + 1))
                .skip(i.saturating_sub(self.off.len()))
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `shift`, from the inertia of the
    /// `LDLᵀ` factorization of `A − shift·I`.
    pub fn count_below(&self, shift: f64) -> usize {
        let n = self.dim();
        let b = self.half_bandwidth();
        let tiny = f64::EPSILON * self.scale();
        let mut d = vec![0.0; n];
        // l[i * b + m - 1] = L[i][i - m]
        let mut l = vec![0.0; n * b.max(1)];
        let mut negatives = 0;
        for i in 0..n {
            let first = i.saturating_sub(b);
            for j in first..i {
                let mut s = self.get(i, j);
                for k in first..j {
                    if j - k <= b {
                        s -= l[i * b + (i - k) - 1] * l[j * b + (j - k) - 1] * d[k];
                    }
                }
                l[i * b + (i - j) - 1] = s / d[j];
            }
            let mut di = self.diag[i] - shift;
            for k in first..i {
                let lik = l[i * b + (i - k) - 1];
                di -= lik * lik * d[k];
            }
            if di == 0.0 {
                di = -tiny;
            }
            if di < 0.0 {
                negatives += 1;
            }
            d[i] = di;
        }
        negatives
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection on the Sturm count.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-8 * self.scale();
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        (0..k).map(|i| self.eigenvalue(i)).collect()
    }

    /// The `k` smallest eigenpairs. Eigenvectors are unit vectors in the plain
    /// Euclidean norm, found by inverse iteration at the bisected eigenvalues.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(Error::InvalidInput(format!("cannot compute {k} eigenpairs of a {n}x{n} matrix")));
        }
        let scale = self.scale();
        let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
        for index in 0..k {
            let lambda = self.eigenvalue(index);
            let lu = BandLu::factor(self, lambda)?;
            let mut v: Vec<f64> = (0..n)
                .map(|j| 1.0 + 0.25 * (1.7 * j as f64 + index as f64).sin())
                .collect();
            for _ in 0..4 {
                lu.solve_in_place(&mut v);
                for _ in 0..2 {
                    for (_, prev) in &pairs {
                        let c: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
                        v.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm.is_finite() && norm > 0.0) {
                    return Err(Error::NumericalFailure(format!(
                        "inverse iteration collapsed for eigenvalue {index} at {lambda}"
                    )));
                }
                v.iter_mut().for_each(|x| *x /= norm);
            }
            let hv = self.apply(&v);
            let residual = hv.iter().zip(&v).map(|(h, x)| (h - lambda * x).powi(2)).sum::<f64>().sqrt();
            if residual > 1e-8_f64.max(1e-12 * scale) {
                return Err(Error::NumericalFailure(format!(
                    "eigenpair {index} residual {residual:.3e} at eigenvalue {lambda} (matrix scale {scale:.3e})"
                )));
            }
            pairs.push((lambda, v));
        }
        Ok(pairs)
    }
}

/// Banded LU with partial pivoting of `A − shift·I` for a banded `A` with
/// equal lower and upper half-bandwidth `b` (fill-in widens U to `2b`).
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    b: usize,
    // Row i stores columns i - b ..= i + 2b.
    rows: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: ComplexFloat<Real = f64>> BandLu<T> {
    fn width(b: usize) -> usize {
        3 * b + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * Self::width(self.b) + (j + self.b - i)
    }

    /// Factors a general banded matrix given as a closure over the band,
    /// `entry(i, j)` for `|i − j| ≤ b`.
    pub fn factor_with(n: usize, b: usize, entry: impl Fn(usize, usize) -> T) -> Result<Self> {
        let w = Self::width(b);
        let mut lu = Self {
            n,
            b,
            rows: vec![T::zero(); n * w],
            pivots: vec![0; n],
        };
        let mut max_entry: f64 = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(b)..n.min(i + b + 1) {
                let v = entry(i, j);
                max_entry = max_entry.max(v.abs());
                let at = lu.idx(i, j);
                lu.rows[at] = v;
            }
        }
        let tiny = T::from(f64::EPSILON * max_entry.max(f64::MIN_POSITIVE)).unwrap();
        for k in 0..n {
            let last = n.min(k + b + 1);
            let mut p = k;
            let mut best = lu.rows[lu.idx(k, k)].abs();
            for i in k + 1..last {
                let m = lu.rows[lu.idx(i, k)].abs();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            lu.pivots[k] = p;
            let hi = n.min(k + 2 * b + 1);
            if p != k {
                for j in k..hi {
                    // Row p can only reach column p + 2b >= k + 2b.
                    let (a, c) = (lu.idx(k, j), lu.idx(p, j));
                    lu.rows.swap(a, c);
                }
            }
            let mut pivot = lu.rows[lu.idx(k, k)];
            if pivot.abs() == 0.0 {
                pivot = tiny;
                let at = lu.idx(k, k);
                lu.rows[at] = pivot;
            }
            if !pivot.abs().is_finite() {
                return Err(Error::NumericalFailure("non-finite pivot in banded LU".into()));
            }
            for i in k + 1..last {
                let at = lu.idx(i, k);
                let factor = lu.rows[at] / pivot;
                lu.rows[at] = factor;
                if factor.abs() == 0.0 {
                    continue;
                }
                for j in k + 1..hi {
                    let src = lu.rows[lu.idx(k, j)];
                    let dst = lu.idx(i, j);
                    lu.rows[dst] = lu.rows[dst] - factor * src;
                }
            }
        }
        Ok(lu)
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let (n, b) = (self.n, self.b);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..n.min(k + b + 1) {
                x[i] = x[i] - self.rows[self.idx(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n.min(k + 2 * b + 1) {
                s = s - self.rows[self.idx(k, j)] * x[j];
            }
            x[k] = s / self.rows[self.idx(k, k)];
        }
    }
}

impl BandLu<f64> {
    pub fn factor(a: &SymmetricBanded, shift: f64) -> Result<Self> {
        Self::factor_with(a.dim(), a.half_bandwidth(), |i, j| {
            a.get(i, j) - if i == j { shift } else { 0.0 }
        })
    }
}
