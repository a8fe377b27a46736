//! Direct factorizations for banded matrices.
//!
//! [`BandCholesky`] handles the symmetric positive definite systems of the
//! Galerkin scheme; [`BandLu`] (partial pivoting, LAPACK `gbtrf` layout)
//! handles the non-symmetric expanded-form scheme.

use super::sparse::CsrMatrix;

/// Zero or negative pivot encountered at this row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorError {
    pub pivot: usize,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// `A = L Lᵀ` with `L` stored row-wise: row `r` keeps columns `r-bw ..= r`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Factors the lower triangle of `a`; the upper triangle is ignored.
    pub fn factor(a: &CsrMatrix) -> Result<Self, FactorError> {
        let n = a.dim();
        let bw = a.bandwidths().0;
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c <= r {
                    l[r * w + (c + bw - r)] = v;
                }
            }
        }
        for r in 0..n {
            let first = r.saturating_sub(bw);
            for c in first..=r {
                // L[r][k] at r*w + k + bw - r, L[c][k] at c*w + k + bw - c.
                let ro = r * w + bw - r;
                let co = c * w + bw - c;
                let k0 = first.max(c.saturating_sub(bw));
                let s = l[ro + c] - dot(&l[ro + k0..ro + c], &l[co + k0..co + c]);
                if c < r {
                    l[ro + c] = s / l[co + c];
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(FactorError { pivot: r });
                    }
                    l[ro + r] = s.sqrt();
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for r in 0..n {
            let first = r.saturating_sub(bw);
            let ro = r * w + bw - r;
            let s = dot(&self.l[ro + first..ro + r], &y[first..r]);
            y[r] = (y[r] - s) / self.l[ro + r];
        }
        for r in (0..n).rev() {
            let first = r.saturating_sub(bw);
            let ro = r * w + bw - r;
            y[r] /= self.l[ro + r];
            let xr = y[r];
            for k in first..r {
                y[k] -= self.l[ro + k] * xr;
            }
        }
        y
    }
}

/// `P A = L U` for a band matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self, FactorError> {
        let n = a.dim();
        let (kl, ku) = a.bandwidths();
        let ldab = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; n * ldab],
            ipiv: vec![0; n],
        };
        for r in 0..n {
            for (c, v) in a.row(r) {
                let k = lu.at(r, c);
                lu.ab[k] = v;
            }
        }
        let kv = kl + ku;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = 0;
            let mut best = 0.0f64;
            for i in 0..=km {
                let v = lu.ab[lu.at(j + i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.ipiv[j] = j + p;
            if best == 0.0 || !best.is_finite() {
                return Err(FactorError { pivot: j });
            }
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let (x, y) = (lu.at(j, c), lu.at(j + p, c));
                    lu.ab.swap(x, y);
                }
            }
            let piv = lu.ab[lu.at(j, j)];
            let col = lu.at(j, j);
            for i in 1..=km {
                lu.ab[col + i] /= piv;
            }
            for c in j + 1..=ju {
                let ujc = lu.ab[lu.at(j, c)];
                if ujc == 0.0 {
                    continue;
                }
                // Column c holds rows j+1..=j+km contiguously.
                let dst = lu.at(j + 1, c);
                debug_assert!(kv + j + 1 >= c);
                for i in 0..km {
                    lu.ab[dst + i] -= lu.ab[col + 1 + i] * ujc;
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let col = self.at(j, j);
            let xj = x[j];
            for i in 1..=km {
                x[j + i] -= self.ab[col + i] * xj;
            }
        }
        let kv = self.kl + self.ku;
        for j in (0..n).rev() {
            x[j] /= self.ab[self.at(j, j)];
            let xj = x[j];
            for i in j.saturating_sub(kv)..j {
                x[i] -= self.ab[self.at(i, j)] * xj;
            }
        }
        x
    }
}
