//! Bilinear (Q1) Galerkin discretization with one constant tensor per cell.
//!
//! Pressure unknowns sit on the corner lattice; the `x = 0` and `x = 1` node
//! columns are Dirichlet and eliminated into the right-hand side. The `y`
//! faces carry the natural (zero normal flux) condition. The resulting matrix
//! is symmetric positive definite and the discrete flux through every
//! vertical strip is identical up to solver residual.

use std::sync::OnceLock;

use super::sparse::CsrMatrix;
use crate::field::{PressureField, TensorField};

/// Element stiffness pieces on the unit square, local node order
/// `(0,0), (1,0), (0,1), (1,1)`. The Q1 stiffness is independent of `h` in 2-D.
struct Templates {
    xx: [[f64; 4]; 4],
    yy: [[f64; 4]; 4],
    xy: [[f64; 4]; 4],
}

fn templates() -> &'static Templates {
    static T: OnceLock<Templates> = OnceLock::new();
    T.get_or_init(|| {
        let g = 0.5 / 3f64.sqrt();
        let pts = [0.5 - g, 0.5 + g];
        let mut t = Templates {
            xx: [[0.0; 4]; 4],
            yy: [[0.0; 4]; 4],
            xy: [[0.0; 4]; 4],
        };
        for &x in &pts {
            for &y in &pts {
                let dx = [-(1.0 - y), 1.0 - y, -y, y];
                let dy = [-(1.0 - x), -x, 1.0 - x, x];
                for a in 0..4 {
                    for b in 0..4 {
                        t.xx[a][b] += 0.25 * dx[a] * dx[b];
                        t.yy[a][b] += 0.25 * dy[a] * dy[b];
                        t.xy[a][b] += 0.25 * (dx[a] * dy[b] + dy[a] * dx[b]);
                    }
                }
            }
        }
        t
    })
}

/// Unknown numbering: node `(i, j)` with `1 <= i <= n-1`, `0 <= j <= n`.
#[inline]
pub(crate) fn unknown(n: usize, i: usize, j: usize) -> usize {
    j * (n - 1) + (i - 1)
}

pub(crate) fn unknown_count(n: usize) -> usize {
    (n - 1) * (n + 1)
}

/// Assembles `A φ = b`. `source`, when given, is the right-hand side `s` of
/// `∇·(a∇φ) = s`, applied with a lumped load vector.
pub(crate) fn assemble(
    field: &TensorField,
    left: f64,
    right: f64,
    source: Option<&dyn Fn(f64, f64) -> f64>,
) -> (CsrMatrix, Vec<f64>) {
    let n = field.n();
    let t = templates();
    let mut rhs = vec![0.0; unknown_count(n)];
    let mut trip = Vec::with_capacity(16 * n * n);
    let dirichlet = |i: usize| -> Option<f64> {
        if i == 0 {
            Some(left)
        } else if i == n {
            Some(right)
        } else {
            None
        }
    };
    for cj in 0..n {
        for ci in 0..n {
            let a = field.tensor(ci, cj);
            let nodes = [(ci, cj), (ci + 1, cj), (ci, cj + 1), (ci + 1, cj + 1)];
            for (p, &(ip, jp)) in nodes.iter().enumerate() {
                if dirichlet(ip).is_some() {
                    continue;
                }
                let row = unknown(n, ip, jp);
                for (q, &(iq, jq)) in nodes.iter().enumerate() {
                    let k = a.xx * t.xx[p][q] + a.yy * t.yy[p][q] + a.xy * t.xy[p][q];
                    match dirichlet(iq) {
                        Some(g) => rhs[row] -= k * g,
                        None => trip.push((row, unknown(n, iq, jq), k)),
                    }
                }
            }
        }
    }
    if let Some(s) = source {
        let h = field.shape().h();
        for j in 0..=n {
            let wy = if j == 0 || j == n { 0.5 } else { 1.0 };
            for i in 1..n {
                rhs[unknown(n, i, j)] -= wy * h * h * s(i as f64 * h, j as f64 * h);
            }
        }
    }
    (CsrMatrix::from_triplets(unknown_count(n), trip), rhs)
}

pub(crate) fn scatter(n: usize, x: &[f64], left: f64, right: f64) -> Vec<f64> {
    let p = n + 1;
    let mut phi = vec![0.0; p * p];
    for j in 0..p {
        phi[j * p] = left;
        phi[j * p + n] = right;
        for i in 1..n {
            phi[j * p + i] = x[unknown(n, i, j)];
        }
    }
    phi
}

/// Mean Darcy flux through each of the `n` vertical element strips.
pub(crate) fn strip_fluxes(field: &TensorField, phi: &PressureField) -> Vec<f64> {
    let n = field.n();
    (0..n)
        .map(|ci| {
            let mut s = 0.0;
            for cj in 0..n {
                let a = field.tensor(ci, cj);
                let p00 = phi.at(ci, cj);
                let p10 = phi.at(ci + 1, cj);
                let p01 = phi.at(ci, cj + 1);
                let p11 = phi.at(ci + 1, cj + 1);
                let dx = 0.5 * ((p10 - p00) + (p11 - p01));
                let dy = 0.5 * ((p01 - p00) + (p11 - p10));
                s += a.xx * dx + a.xy * dy;
            }
            -s
        })
        .collect()
}
