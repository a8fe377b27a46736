//! Closed-form 2×2 decimators and the component-wise mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Tensor, TensorField};

/// An `nb × nb` tile of cell tensors, `cells[r * nb + c]` with row `r`
/// along `y` and column `c` along `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub nb: usize,
    pub cells: Vec<Tensor>,
}

impl Tile {
    pub fn new(nb: usize, cells: Vec<Tensor>) -> Self {
        assert_eq!(cells.len(), nb * nb, "tile needs nb² cells");
        Tile { nb, cells }
    }

    /// Tile `(tx, ty)` of `field`.
    pub fn from_field(field: &TensorField, nb: usize, tx: usize, ty: usize) -> Self {
        let cells = (0..nb)
            .flat_map(|r| (0..nb).map(move |c| (c, r)))
            .map(|(c, r)| field.tensor(tx * nb + c, ty * nb + r))
            .collect();
        Tile { nb, cells }
    }

    pub fn uniform(nb: usize, t: Tensor) -> Self {
        Tile::new(nb, vec![t; nb * nb])
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Tensor {
        self.cells[r * self.nb + c]
    }

    pub fn has_zero_xy(&self) -> bool {
        self.cells.iter().all(|t| t.xy == 0.0)
    }

    /// x↔y relabelling: cell `(r, c)` moves to `(c, r)` and each tensor is
    /// transposed.
    pub fn transposed(&self) -> Self {
        let nb = self.nb;
        let cells = (0..nb)
            .flat_map(|r| (0..nb).map(move |c| (r, c)))
            .map(|(r, c)| self.at(c, r).transposed())
            .collect();
        Tile { nb, cells }
    }
}

/// The twelve coefficients of a 2×2 block: `a` = xx, `b` = yy, `c` = xy,
/// each indexed `[row (y)][column (x)]`, so `a[0][1]` is `a₁₂`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlockTensors {
    pub a: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
    pub c: [[f64; 2]; 2],
}

impl BlockTensors {
    pub fn from_tile(tile: &Tile) -> Self {
        assert_eq!(tile.nb, 2, "BlockTensors needs a 2×2 tile");
        let mut bt = BlockTensors::default();
        for r in 0..2 {
            for c in 0..2 {
                let t = tile.at(r, c);
                bt.a[r][c] = t.xx;
                bt.b[r][c] = t.yy;
                bt.c[r][c] = t.xy;
            }
        }
        bt
    }

    pub fn to_tile(&self) -> Tile {
        let cells = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| Tensor::new(self.a[r][c], self.c[r][c], self.b[r][c]))
            .collect();
        Tile::new(2, cells)
    }

    fn check_positive(&self) -> Result<()> {
        let ok = self.a.iter().chain(&self.b).flatten().all(|&v| v > 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("block diagonal entries must be positive: {self:?}")))
        }
    }
}

/// Mode-elimination decimation of a 2×2 block without cross terms, in
/// closed form.
pub fn mg_decimate_2x2(block: &BlockTensors) -> Result<Tensor> {
    block.check_positive()?;
    if block.c.iter().flatten().any(|&v| v != 0.0) {
        return Err(Error::Domain("closed-form MG needs zero xy entries".into()));
    }
    let [[a11, a12], [a21, a22]] = block.a;
    let [[b11, b12], [b21, b22]] = block.b;
    let sa = a11 + a12 + a21 + a22;
    let sb = b11 + b12 + b21 + b22;
    let d = (a11 + a12) * (a21 + a22) * sb + sa * (b11 + b21) * (b12 + b22);
    let n1 = (a11 * a12 * a21 + a11 * a12 * a22 + a11 * a21 * a22 + a12 * a21 * a22) * sb
        + (a11 + a21) * (a12 + a22) * (b11 + b21) * (b12 + b22);
    let n2 = (a11 + a12) * (a21 + a22) * (b11 + b12) * (b21 + b22)
        + (b11 * b12 * b21 + b11 * b12 * b22 + b11 * b21 * b22 + b12 * b21 * b22) * sa;
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Domain(format!("MG denominator is {d}")));
    }
    let xy = -(a11 * a22 - a12 * a21) * (b11 * b22 - b12 * b21) / d;
    Ok(Tensor::new(n1 / d, xy, n2 / d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KkVariant {
    /// Second fraction inverted and `b₂₁` in the `yy` grouping, so uniform
    /// blocks are fixed points.
    #[default]
    Corrected,
    /// The historical formula verbatim; maps a uniform `c` to `1/c`.
    AsPrinted,
}

/// KK effective conductivity of a 2×2 block. Cross terms are ignored and
/// the result has `xy = 0`.
pub fn kk_decimate_2x2(block: &BlockTensors, variant: KkVariant) -> Result<Tensor> {
    block.check_positive()?;
    let [[a11, a12], [a21, a22]] = block.a;
    let [[b11, b12], [b21, b22]] = block.b;
    let sa = a11 + a12 + a21 + a22;
    let sb = b11 + b12 + b21 + b22;
    let ga = (a11 + a21) * (a12 + a22) / ((a11 + a12) * (a21 + a22));
    let gb = (b11 + b12) * (b21 + b22) / ((b11 + b21) * (b12 + b22));
    let pa = a11 * a12 * (a21 + a22) + a21 * a22 * (a11 + a12);
    let (xx, yy) = match variant {
        KkVariant::Corrected => {
            let pb = b11 * b21 * (b12 + b22) + b12 * b22 * (b11 + b21);
            ((ga * pa / sa).sqrt(), (gb * pb / sb).sqrt())
        }
        KkVariant::AsPrinted => {
            let pb = b11 * b21 * (b12 + b22) + b12 * b22 * (b11 + a21);
            ((ga * sa / pa).sqrt(), (gb * sb / pb).sqrt())
        }
    };
    Ok(Tensor::new(xx, 0.0, yy))
}

/// Component-wise arithmetic mean over the tile.
pub fn mean_decimate(tile: &Tile) -> Tensor {
    let k = tile.cells.len() as f64;
    let mut m = Tensor::new(0.0, 0.0, 0.0);
    for t in &tile.cells {
        m.xx += t.xx;
        m.xy += t.xy;
        m.yy += t.yy;
    }
    Tensor::new(m.xx / k, m.xy / k, m.yy / k)
}
