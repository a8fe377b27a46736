//! Mode-elimination decimation of one periodic tile in the Fourier basis.
//!
//! On an `nb × nb` periodic tile the pressure is a macroscopic gradient
//! `G·x` plus a periodic fluctuation. Fluctuation mode `k ≠ 0` carries the
//! discrete gradient symbol `d(k) = (e^{ik_x} − 1, e^{ik_y} − 1)`; the two
//! gradient modes form the retained low-wavenumber set with symbols `e_x`,
//! `e_y`. The operator couples modes through the spectrum of the tile,
//!
//! `M(k, k′) = d(k)* · â(k′ − k) · d(k′)`,
//!
//! and the Schur complement `M_<< − M_<> M_>>⁻¹ M_><`, divided by the cell
//! count, is the effective tensor. For 2×2 tiles without cross terms this
//! reproduces [`mg_decimate_2x2`](super::mg_decimate_2x2).
//!
//! The subtraction cancels badly at high contrast (the effective value can
//! sit six decades below `M_<<`). The complement is therefore evaluated in
//! its equivalent energy form `n⁻² Σ_x g_iᴴ a g_j` with the corrected
//! gradients `g_i = e_i + Σ_k d(k) χ_i(k) e^{ik·x}`, `χ_i = −M_>>⁻¹ M_>< e_i`:
//! a sum of non-negative terms whose error is quadratic in that of `χ`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::Tile;
use crate::error::{Error, Result};
use crate::field::Tensor;

/// Relative pivot size below which `M_>>` is treated as singular.
const SINGULAR_RATIO: f64 = 1e-14;

/// Effective tensor plus how far the reduced operator was from a real
/// symmetric 2×2 matrix before symmetrization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralDecimation {
    pub tensor: Tensor,
    pub asymmetry: f64,
}

/// Spectrum `â(κ) = Σ_cells a(x) e^{iκ·x}` of each tensor component.
fn spectrum(tile: &Tile) -> Vec<[Complex64; 3]> {
    let nb = tile.nb;
    let w = TAU / nb as f64;
    let mut out = vec![[Complex64::new(0.0, 0.0); 3]; nb * nb];
    for q in 0..nb {
        for p in 0..nb {
            let mut s = [Complex64::new(0.0, 0.0); 3];
            for r in 0..nb {
                for c in 0..nb {
                    let e = Complex64::from_polar(1.0, w * ((p * c + q * r) % nb) as f64);
                    let t = tile.at(r, c);
                    s[0] += e * t.xx;
                    s[1] += e * t.xy;
                    s[2] += e * t.yy;
                }
            }
            out[q * nb + p] = s;
        }
    }
    out
}

/// `u* · A · v` for a 2×2 symmetric tensor with complex entries.
#[inline]
fn form(u: [Complex64; 2], a: [Complex64; 3], v: [Complex64; 2]) -> Complex64 {
    let (u0, u1) = (u[0].conj(), u[1].conj());
    u0 * (a[0] * v[0] + a[1] * v[1]) + u1 * (a[1] * v[0] + a[2] * v[1])
}

pub fn mg_decimate_general(tile: &Tile) -> Result<GeneralDecimation> {
    let nb = tile.nb;
    let w = TAU / nb as f64;
    let spec = spectrum(tile);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // Mode list: the two gradient modes first, then every k ≠ 0.
    let mut modes: Vec<((usize, usize), [Complex64; 2])> = vec![((0, 0), [one, zero]), ((0, 0), [zero, one])];
    for q in 0..nb {
        for p in 0..nb {
            if (p, q) != (0, 0) {
                let d = [
                    Complex64::from_polar(1.0, w * p as f64) - one,
                    Complex64::from_polar(1.0, w * q as f64) - one,
                ];
                modes.push(((p, q), d));
            }
        }
    }
    let m = modes.len();
    let op = DMatrix::from_fn(m, m, |i, j| {
        let ((pi, qi), di) = modes[i];
        let ((pj, qj), dj) = modes[j];
        let kx = (pj + nb - pi) % nb;
        let ky = (qj + nb - qi) % nb;
        form(di, spec[ky * nb + kx], dj)
    });
    let low = op.view((0, 0), (2, 2)).into_owned();
    let lh = op.view((0, 2), (2, m - 2)).into_owned();
    let hl = op.view((2, 0), (m - 2, 2)).into_owned();
    let hh = op.view((2, 2), (m - 2, m - 2)).into_owned();

    let diag: Vec<f64> = (0..m - 2).map(|i| hh[(i, i)].re).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let chol = hh.cholesky().ok_or_else(|| Error::SingularBlock {
        pivot_ratio: diag.iter().copied().fold(f64::INFINITY, f64::min) / dmax,
    })?;
    let lmin = (0..m - 2)
        .map(|i| chol.l_dirty()[(i, i)].re.powi(2))
        .fold(f64::INFINITY, f64::min);
    if !(lmin / dmax > SINGULAR_RATIO) {
        return Err(Error::SingularBlock {
            pivot_ratio: lmin / dmax,
        });
    }
    let chi = -chol.solve(&hl);
    let cells = Complex64::new((nb * nb) as f64, 0.0);
    let direct = (low - lh * &chi) / cells;
    // Corrected gradients g_i at every cell, then the energy form.
    let mut e = [[0.0f64; 2]; 2];
    for r in 0..nb {
        for c in 0..nb {
            let mut g = [[one, zero], [zero, one]];
            for (h, &((p, q), d)) in modes[2..].iter().enumerate() {
                let phase = Complex64::from_polar(1.0, w * ((p * c + q * r) % nb) as f64);
                for (i, gi) in g.iter_mut().enumerate() {
                    let amp = chi[(h, i)] * phase;
                    gi[0] += d[0] * amp;
                    gi[1] += d[1] * amp;
                }
            }
            let t = tile.at(r, c);
            let a = [Complex64::from(t.xx), Complex64::from(t.xy), Complex64::from(t.yy)];
            for i in 0..2 {
                for j in 0..2 {
                    e[i][j] += form(g[i], a, g[j]).re;
                }
            }
        }
    }
    let nc = (nb * nb) as f64;
    let asymmetry = (direct[(0, 1)] - direct[(1, 0)]).norm()
        + direct.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(GeneralDecimation {
        tensor: Tensor::new(e[0][0] / nc, 0.5 * (e[0][1] + e[1][0]) / nc, e[1][1] / nc),
        asymmetry,
    })
}
