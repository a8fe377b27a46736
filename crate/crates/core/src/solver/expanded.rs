//! Expanded (non-conservative) form of the Darcy operator
//!
//! `(∂x a_xx + ∂y a_xy) ∂xφ + (∂x a_xy + ∂y a_yy) ∂yφ
//!   + a_xx ∂²xφ + a_yy ∂²yφ + 2 a_xy ∂x∂yφ = 0`
//!
//! with centred fourth-order stencils. Nodes next to the Dirichlet columns
//! drop to second order in `x`; the Neumann rows use mirrored ghost nodes.
//! Coefficient derivatives use fourth-order stencils, one-sided at every
//! edge. Accurate for resolved smooth coefficients; it does not conserve
//! flux across coefficient jumps.

use std::collections::BTreeMap;

use super::galerkin::{unknown, unknown_count};
use super::sparse::CsrMatrix;
use super::stencil::{
    d1_fourth_order, Stencil, D1_CENTRED2, D1_CENTRED4, D2_CENTRED2, D2_CENTRED4,
};
use crate::field::{PressureField, Tensor, TensorField};

/// Tensor coefficients sampled on the `(n+1)²` node lattice.
#[derive(Debug, Clone)]
pub struct NodalCoeffs {
    n: usize,
    vals: Vec<Tensor>,
}

impl NodalCoeffs {
    /// Node value = mean of the (up to four) cells sharing the node.
    pub fn from_field(field: &TensorField) -> Self {
        let n = field.n();
        let mut vals = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                let mut acc = Tensor::default();
                let mut cnt = 0.0;
                for cj in j.saturating_sub(1)..=j.min(n - 1) {
                    for ci in i.saturating_sub(1)..=i.min(n - 1) {
                        let t = field.tensor(ci, cj);
                        acc.xx += t.xx;
                        acc.xy += t.xy;
                        acc.yy += t.yy;
                        cnt += 1.0;
                    }
                }
                vals.push(Tensor::new(acc.xx / cnt, acc.xy / cnt, acc.yy / cnt));
            }
        }
        NodalCoeffs { n, vals }
    }

    /// Samples `a(x, y)` at node coordinates `(i/n, j/n)`.
    pub fn from_fn(n: usize, a: impl Fn(f64, f64) -> Tensor) -> Self {
        let h = 1.0 / n as f64;
        let vals = (0..=n)
            .flat_map(|j| (0..=n).map(move |i| (i, j)))
            .map(|(i, j)| a(i as f64 * h, j as f64 * h))
            .collect();
        NodalCoeffs { n, vals }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Tensor {
        self.vals[j * (self.n + 1) + i]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// (∂x a, ∂y a) at node `(i, j)`.
    fn gradient(&self, i: usize, j: usize) -> (Tensor, Tensor) {
        let n = self.n;
        let h = 1.0 / n as f64;
        let mut dx = Tensor::default();
        for &(o, w) in d1_fourth_order(i, n) {
            let t = self.at((i as isize + o) as usize, j);
            dx.xx += w * t.xx / h;
            dx.xy += w * t.xy / h;
            dx.yy += w * t.yy / h;
        }
        let mut dy = Tensor::default();
        for &(o, w) in d1_fourth_order(j, n) {
            let t = self.at(i, (j as isize + o) as usize);
            dy.xx += w * t.xx / h;
            dy.xy += w * t.xy / h;
            dy.yy += w * t.yy / h;
        }
        (dx, dy)
    }
}

/// Ghost-node folding for the zero-Neumann rows.
#[inline]
fn fold(j: isize, n: usize) -> usize {
    let n = n as isize;
    if j < 0 {
        (-j) as usize
    } else if j > n {
        (2 * n - j) as usize
    } else {
        j as usize
    }
}

fn x_stencils(i: usize, n: usize) -> (Stencil, Stencil) {
    if i == 1 || i + 1 == n {
        (D1_CENTRED2, D2_CENTRED2)
    } else {
        (D1_CENTRED4, D2_CENTRED4)
    }
}

/// Row weights of the discrete operator at unknown node `(i, j)`, keyed by
/// lattice node (after ghost folding).
fn operator_row(c: &NodalCoeffs, i: usize, j: usize) -> BTreeMap<(usize, usize), f64> {
    let n = c.n;
    let h = 1.0 / n as f64;
    let a = c.at(i, j);
    let (ga_x, ga_y) = c.gradient(i, j);
    let cx = ga_x.xx + ga_y.xy;
    let cy = ga_x.xy + ga_y.yy;
    let (d1x, d2x) = x_stencils(i, n);
    let mut row = BTreeMap::new();
    let mut add = |ii: isize, jj: isize, w: f64| {
        *row.entry((ii as usize, fold(jj, n))).or_insert(0.0) += w;
    };
    let (ii, jj) = (i as isize, j as isize);
    for &(o, w) in d1x {
        add(ii + o, jj, cx * w / h);
    }
    for &(o, w) in d2x {
        add(ii + o, jj, a.xx * w / (h * h));
    }
    for &(o, w) in D1_CENTRED4 {
        add(ii, jj + o, cy * w / h);
    }
    for &(o, w) in D2_CENTRED4 {
        add(ii, jj + o, a.yy * w / (h * h));
    }
    for &(ox, wx) in d1x {
        for &(oy, wy) in D1_CENTRED4 {
            add(ii + ox, jj + oy, 2.0 * a.xy * wx * wy / (h * h));
        }
    }
    row
}

pub(crate) fn assemble(
    c: &NodalCoeffs,
    left: f64,
    right: f64,
    source: Option<&dyn Fn(f64, f64) -> f64>,
) -> (CsrMatrix, Vec<f64>) {
    let n = c.n;
    let h = 1.0 / n as f64;
    let mut rhs = vec![0.0; unknown_count(n)];
    let mut trip = Vec::with_capacity(45 * unknown_count(n));
    for j in 0..=n {
        for i in 1..n {
            let r = unknown(n, i, j);
            for ((ni, nj), w) in operator_row(c, i, j) {
                if w == 0.0 {
                    continue;
                }
                if ni == 0 {
                    rhs[r] -= w * left;
                } else if ni == n {
                    rhs[r] -= w * right;
                } else {
                    trip.push((r, unknown(n, ni, nj), w));
                }
            }
            if let Some(s) = source {
                rhs[r] += s(i as f64 * h, j as f64 * h);
            }
        }
    }
    (CsrMatrix::from_triplets(unknown_count(n), trip), rhs)
}

/// Discrete operator applied to a full nodal field, at unknown node `(i, j)`.
#[cfg(test)]
pub(crate) fn apply_operator(c: &NodalCoeffs, phi: &PressureField, i: usize, j: usize) -> f64 {
    operator_row(c, i, j)
        .into_iter()
        .map(|((ni, nj), w)| w * phi.at(ni, nj))
        .sum()
}

/// Per-node-column flux `-∫ (a_xx ∂xφ + a_xy ∂yφ) dy`, trapezoidal in `y`.
pub(crate) fn column_fluxes(c: &NodalCoeffs, phi: &PressureField) -> Vec<f64> {
    let n = c.n;
    let h = 1.0 / n as f64;
    (0..=n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..=n {
                let dphix: f64 = d1_fourth_order(i, n)
                    .iter()
                    .map(|&(o, w)| w * phi.at((i as isize + o) as usize, j))
                    .sum::<f64>()
                    / h;
                let dphiy: f64 = D1_CENTRED4
                    .iter()
                    .map(|&(o, w)| w * phi.at(i, fold(j as isize + o, n)))
                    .sum::<f64>()
                    / h;
                let a = c.at(i, j);
                let wy = if j == 0 || j == n { 0.5 * h } else { h };
                s += wy * (a.xx * dphix + a.xy * dphiy);
            }
            -s
        })
        .collect()
}
