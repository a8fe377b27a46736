//! Fourier-space Darcy operator on a small periodic grid and its
//! mode-elimination (Schur complement) reduction.
//!
//! Wavenumbers are `k = 2π (p, q)` with `p, q ∈ [-n/2, n/2)`, enumerated by
//! `(q, p)` ascending. The operator is `M(k, k′) = k · â(k − k′) · k′` with
//! `â(κ) = n⁻² Σ_x a(x) e^{−iκ·x}` and wrapped index differences. The
//! `k = 0` row and column vanish identically; they are dropped, fixing the
//! mean of `φ` to zero.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::TensorField;

pub const MAX_N: usize = 32;

/// Integer wavenumber `(p, q)`.
pub type Mode = (i64, i64);

#[derive(Debug, Clone)]
pub struct SpectralOperator {
    pub n: usize,
    /// Row/column labels of `matrix` (all modes except `(0, 0)`).
    pub modes: Vec<Mode>,
    pub matrix: DMatrix<Complex64>,
}

fn centred(i: usize, n: usize) -> i64 {
    let i = i as i64;
    let n = n as i64;
    if i >= n / 2 {
        i - n
    } else {
        i
    }
}

/// Normalized DFT of one component on the index lattice.
fn dft(n: usize, vals: &[f64]) -> Vec<Complex64> {
    let w = TAU / n as f64;
    let scale = 1.0 / (n * n) as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    // Separable: along x, then along y.
    let mut rows = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for p in 0..n {
            rows[j * n + p] = (0..n)
                .map(|i| Complex64::from_polar(vals[j * n + i], -w * ((p * i) % n) as f64))
                .sum();
        }
    }
    for q in 0..n {
        for p in 0..n {
            out[q * n + p] = (0..n)
                .map(|j| rows[j * n + p] * Complex64::from_polar(scale, -w * ((q * j) % n) as f64))
                .sum();
        }
    }
    out
}

pub fn build_spectral(field: &TensorField) -> Result<SpectralOperator> {
    let n = field.n();
    if n > MAX_N {
        return Err(Error::Shape {
            n,
            reason: "spectral operator is dense; n must be <= 32",
        });
    }
    let xx = dft(n, field.a_xx());
    let xy = dft(n, field.a_xy());
    let yy = dft(n, field.a_yy());
    let mut modes = Vec::with_capacity(n * n - 1);
    for q in 0..n {
        for p in 0..n {
            let m = (centred(p, n), centred(q, n));
            if m != (0, 0) {
                modes.push(m);
            }
        }
    }
    modes.sort_by_key(|&(p, q)| (q, p));
    let ni = n as i64;
    let wrap = |d: i64| d.rem_euclid(ni) as usize;
    let matrix = DMatrix::from_fn(modes.len(), modes.len(), |r, c| {
        let (p, q) = modes[r];
        let (pp, qq) = modes[c];
        let idx = wrap(q - qq) * n + wrap(p - pp);
        let (kx, ky) = (TAU * p as f64, TAU * q as f64);
        let (lx, ly) = (TAU * pp as f64, TAU * qq as f64);
        xx[idx] * (kx * lx) + xy[idx] * (kx * ly + ky * lx) + yy[idx] * (ky * ly)
    });
    Ok(SpectralOperator { n, modes, matrix })
}

impl SpectralOperator {
    /// Whether a mode lies in the retained set `|p| <= kc ∧ |q| <= kc`.
    pub fn is_low(mode: Mode, kc: i64) -> bool {
        mode.0.abs() <= kc && mode.1.abs() <= kc
    }

    /// Indices into `modes` of the retained and eliminated sets.
    pub fn partition(&self, kc: i64) -> (Vec<usize>, Vec<usize>) {
        (0..self.modes.len()).partition(|&i| Self::is_low(self.modes[i], kc))
    }

    /// `‖M − M†‖_F / ‖M‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.matrix)
    }
}

pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).norm() / m.norm()
}

fn select(m: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

fn smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Schur complement `m_<< − m_<> m_>>⁻¹ m_><` for a split of `m`'s indices.
pub fn schur_complement(
    m: &DMatrix<Complex64>,
    low: &[usize],
    high: &[usize],
) -> Result<DMatrix<Complex64>> {
    let ll = select(m, low, low);
    if high.is_empty() {
        return Ok(ll);
    }
    let lh = select(m, low, high);
    let hl = select(m, high, low);
    let hh = select(m, high, high);
    let lu = hh.clone().lu();
    let x = lu.solve(&hl).ok_or_else(|| {
        Error::Domain(format!(
            "eliminated block is singular (smallest singular value {:e})",
            smallest_singular_value(&hh)
        ))
    })?;
    Ok(ll - lh * x)
}

/// Reduced operator over the retained modes.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub kc: i64,
    pub modes: Vec<Mode>,
    pub matrix: DMatrix<Complex64>,
}

pub fn reduce_operator(op: &SpectralOperator, kc: i64) -> Result<Reduced> {
    let (low, high) = op.partition(kc);
    if low.is_empty() {
        return Err(Error::Domain(format!("cutoff {kc} retains no modes")));
    }
    Ok(Reduced {
        kc,
        modes: low.iter().map(|&i| op.modes[i]).collect(),
        matrix: schur_complement(&op.matrix, &low, &high)?,
    })
}

impl Reduced {
    /// Eliminates further modes of an already reduced operator.
    pub fn reduce(&self, kc: i64) -> Result<Reduced> {
        let (low, high): (Vec<usize>, Vec<usize>) =
            (0..self.modes.len()).partition(|&i| SpectralOperator::is_low(self.modes[i], kc));
        Ok(Reduced {
            kc,
            modes: low.iter().map(|&i| self.modes[i]).collect(),
            matrix: schur_complement(&self.matrix, &low, &high)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactnessReport {
    pub n: usize,
    pub kc: i64,
    pub retained_modes: usize,
    /// `max_{K_<} |φ_full − φ_reduced| / max_{K_<} |φ_full|`.
    pub relative_deviation: f64,
    pub hermitian_defect: f64,
    pub reduced_hermitian_defect: f64,
    pub condition_full: f64,
    pub condition_reduced: f64,
}

fn condition(m: &DMatrix<Complex64>) -> f64 {
    let s = m.clone().singular_values();
    let hi = s.iter().copied().fold(0.0, f64::max);
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Solves the full system `M φ = s` and the reduced one, comparing `φ` on
/// the retained modes. `source` maps modes to values; modes not listed are
/// zero. Any source power outside `K_<` breaks the premise of the reduction
/// and shows up as a deviation.
pub fn verify_low_mode_exactness(
    field: &TensorField,
    kc: i64,
    source: &[(Mode, Complex64)],
) -> Result<ExactnessReport> {
    let op = build_spectral(field)?;
    let red = reduce_operator(&op, kc)?;
    let mut s = DVector::from_element(op.modes.len(), Complex64::new(0.0, 0.0));
    for &(m, v) in source {
        let i = op
            .modes
            .iter()
            .position(|&x| x == m)
            .ok_or_else(|| Error::Domain(format!("source mode {m:?} is not on the lattice")))?;
        s[i] += v;
    }
    let full = op
        .matrix
        .clone()
        .lu()
        .solve(&s)
        .ok_or_else(|| Error::Domain("full spectral operator is singular".into()))?;
    let (low, _) = op.partition(kc);
    let s_low = DVector::from_iterator(low.len(), low.iter().map(|&i| s[i]));
    let phi_low = red
        .matrix
        .clone()
        .lu()
        .solve(&s_low)
        .ok_or_else(|| Error::Domain("reduced operator is singular".into()))?;
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for (r, &i) in low.iter().enumerate() {
        dev = dev.max((full[i] - phi_low[r]).norm());
        scale = scale.max(full[i].norm());
    }
    Ok(ExactnessReport {
        n: op.n,
        kc,
        retained_modes: low.len(),
        relative_deviation: if scale > 0.0 { dev / scale } else { dev },
        hermitian_defect: op.hermitian_defect(),
        reduced_hermitian_defect: hermitian_defect(&red.matrix),
        condition_full: condition(&op.matrix),
        condition_reduced: condition(&red.matrix),
    })
}
