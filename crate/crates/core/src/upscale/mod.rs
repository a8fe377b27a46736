//! Block decimation of tensor permeability fields.
//!
//! A plan reduces an `n × n` field to `n_target × n_target` through `K`
//! sweeps, each replacing every `n_block × n_block` tile by one tensor:
//! mode elimination ([`Method::Mg`]), the KK combination of arithmetic and
//! geometric means ([`Method::Kk`], 2×2 only) or the component-wise
//! arithmetic mean ([`Method::Mean`]).

mod block;
mod schur;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use block::{kk_decimate_2x2, mean_decimate, mg_decimate_2x2, BlockTensors, KkVariant, Tile};
pub use schur::{mg_decimate_general, GeneralDecimation};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{GridShape, Tensor, TensorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Mg,
    Kk,
    Mean,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mg, Method::Kk, Method::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mg => "mg",
            Method::Kk => "kk",
            Method::Mean => "mean",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mg" => Ok(Method::Mg),
            "kk" => Ok(Method::Kk),
            "mean" => Ok(Method::Mean),
            _ => Err(Error::Plan(format!("unknown method {s:?} (mg, kk, mean)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpscalePlan {
    pub method: Method,
    pub n_block: usize,
    pub n_target: usize,
    #[serde(default)]
    pub kk_variant: KkVariant,
}

impl UpscalePlan {
    pub fn new(method: Method, n_block: usize, n_target: usize) -> Result<Self> {
        if n_block < 2 {
            return Err(Error::Plan(format!("n_block must be at least 2, got {n_block}")));
        }
        if method == Method::Kk && n_block != 2 {
            return Err(Error::Plan(format!("KK handles only 2×2 blocks, got n_block = {n_block}")));
        }
        Ok(UpscalePlan {
            method,
            n_block,
            n_target,
            kk_variant: KkVariant::Corrected,
        })
    }

    pub fn with_kk_variant(mut self, v: KkVariant) -> Self {
        self.kk_variant = v;
        self
    }

    /// `K = log_{n_block}(n / n_target)`; errors unless it is a positive
    /// integer.
    pub fn sweeps(&self, n: usize) -> Result<usize> {
        let bad = || {
            Error::Plan(format!(
                "n = {n} does not reduce to n_target = {} in whole sweeps of n_block = {}",
                self.n_target, self.n_block
            ))
        };
        if self.n_target == 0 || !n.is_multiple_of(self.n_target) || self.n_target >= n {
            return Err(bad());
        }
        let mut ratio = n / self.n_target;
        let mut k = 0;
        while ratio > 1 {
            if !ratio.is_multiple_of(self.n_block) {
                return Err(bad());
            }
            ratio /= self.n_block;
            k += 1;
        }
        Ok(k)
    }

    /// Notes recorded alongside results produced with this plan.
    pub fn notes(&self) -> Vec<String> {
        match (self.method, self.kk_variant) {
            (Method::Kk, KkVariant::Corrected) => vec![
                "KK: second fraction inverted so uniform blocks are fixed points".into(),
                "KK: yy grouping uses (b11 + b21)".into(),
                "KK: input xy ignored, output xy = 0".into(),
            ],
            (Method::Kk, KkVariant::AsPrinted) => vec![
                "KK: literal historical formula; uniform c maps to 1/c".into(),
            ],
            _ => Vec::new(),
        }
    }
}

/// Decimates one tile with the plan's method.
pub fn decimate_tile(tile: &Tile, plan: &UpscalePlan) -> Result<(Tensor, f64)> {
    match plan.method {
        Method::Mean => Ok((mean_decimate(tile), 0.0)),
        Method::Kk => Ok((kk_decimate_2x2(&BlockTensors::from_tile(tile), plan.kk_variant)?, 0.0)),
        Method::Mg if tile.nb == 2 && tile.has_zero_xy() => {
            Ok((mg_decimate_2x2(&BlockTensors::from_tile(tile))?, 0.0))
        }
        Method::Mg => mg_decimate_general(tile).map(|d| (d.tensor, d.asymmetry)),
    }
}

/// One sweep `n → n / n_block`.
pub fn sweep(field: &TensorField, plan: &UpscalePlan, exec: Execution) -> Result<(TensorField, f64)> {
    let nb = plan.n_block;
    let n = field.n();
    if !n.is_multiple_of(nb) {
        return Err(Error::Plan(format!("n_block {nb} does not divide n = {n}")));
    }
    let m = n / nb;
    let shape = GridShape::new(m)?;
    let out: Vec<Result<(Tensor, f64)>> = exec.map(m * m, |k| {
        decimate_tile(&Tile::from_field(field, nb, k % m, k / m), plan)
    });
    let mut cells = Vec::with_capacity(m * m);
    let mut asym = 0.0f64;
    for r in out {
        let (t, a) = r?;
        cells.push(t);
        asym = asym.max(a);
    }
    let coarse = TensorField::new(
        shape,
        cells.iter().map(|t| t.xx).collect(),
        cells.iter().map(|t| t.xy).collect(),
        cells.iter().map(|t| t.yy).collect(),
    )?;
    Ok((coarse, asym))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTiming {
    pub from: usize,
    pub to: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct Upscaled {
    /// Output of every sweep; the last one is at `n_target`.
    pub levels: Vec<TensorField>,
    pub timings: Vec<SweepTiming>,
    /// Largest MG-general asymmetry diagnostic over all tiles.
    pub max_asymmetry: f64,
}

impl Upscaled {
    pub fn field(&self) -> &TensorField {
        self.levels.last().expect("at least one sweep")
    }

    pub fn into_field(mut self) -> TensorField {
        self.levels.pop().expect("at least one sweep")
    }
}

pub fn run_plan(field: &TensorField, plan: &UpscalePlan) -> Result<Upscaled> {
    run_plan_with(field, plan, Execution::default())
}

pub fn run_plan_with(field: &TensorField, plan: &UpscalePlan, exec: Execution) -> Result<Upscaled> {
    let k = plan.sweeps(field.n())?;
    let mut levels: Vec<TensorField> = Vec::with_capacity(k);
    let mut timings = Vec::with_capacity(k);
    let mut max_asymmetry = 0.0f64;
    for _ in 0..k {
        let src = levels.last().unwrap_or(field);
        let start = Instant::now();
        let (next, asym) = sweep(src, plan, exec)?;
        timings.push(SweepTiming {
            from: src.n(),
            to: next.n(),
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        max_asymmetry = max_asymmetry.max(asym);
        levels.push(next);
    }
    Ok(Upscaled {
        levels,
        timings,
        max_asymmetry,
    })
}

/// Predicted operation count: `N² N_b^p Σ_{k<K} N_b^{-2k}` with `p = 4` for
/// MG (one `N_b² × N_b²` inversion per tile) and `p = 2` for KK and Mean.
pub fn cost_model(n: usize, n_block: usize, n_target: usize, method: Method) -> Result<f64> {
    let plan = UpscalePlan {
        method,
        n_block,
        n_target,
        kk_variant: KkVariant::Corrected,
    };
    let k = plan.sweeps(n)?;
    let nb = n_block as f64;
    let sum: f64 = (0..k).map(|i| nb.powi(-2 * i as i32)).sum();
    let p = if method == Method::Mg { 4 } else { 2 };
    Ok((n as f64).powi(2) * nb.powi(p) * sum)
}
