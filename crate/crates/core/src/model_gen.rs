//! Random channelized permeability models.
//!
//! A channel is a left-to-right random walk of overlapping pieces laid over a
//! `10⁻⁶` background. Each piece is an oriented rectangle from one joint to
//! the next; a disk of the piece width covers every joint, so the channel is
//! a thick polyline whose width never drops below the piece width.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridShape, Tensor, TensorField};

/// Background `a_xx = a_yy` ("water level").
pub const BACKGROUND: f64 = 1e-6;
/// Default percolation threshold: log-midpoint of background and `O(1)`.
pub const PERCOLATION_THRESHOLD: f64 = 1e-3;
pub const MIN_WIDTH: f64 = 6.0;
pub const MAX_ATTEMPTS: u32 = 100;
/// Recorded in survey provenance.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XyMode {
    #[default]
    Zero,
    Finite,
}

impl std::str::FromStr for XyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(XyMode::Zero),
            "finite" => Ok(XyMode::Finite),
            _ => Err(Error::ChannelSpec(format!("unknown xy mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    /// Piece length in cells; `None` picks `[n/20, n/10]` for the grid.
    #[serde(default)]
    pub piece_len_range: Option<[f64; 2]>,
    /// Length-to-width ratio. The 6-cell width floor takes precedence.
    pub aspect_range: [f64; 2],
    /// Radians from the `x` axis.
    pub incline_range: [f64; 2],
    pub magnitude_range: [f64; 2],
    pub xy_mode: XyMode,
    /// `a_xy / sqrt(a_xx a_yy)` in finite mode.
    pub xy_fraction_range: [f64; 2],
}

impl Default for ChannelSpec {
    fn default() -> Self {
        ChannelSpec {
            piece_len_range: None,
            aspect_range: [2.0, 8.0],
            incline_range: [-PI / 3.0, PI / 3.0],
            magnitude_range: [0.1, 2.0],
            xy_mode: XyMode::Zero,
            xy_fraction_range: [-0.5, 0.5],
        }
    }
}

fn ordered(name: &str, r: [f64; 2]) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
        return Err(Error::ChannelSpec(format!("{name} {r:?} is not an ordered finite range")));
    }
    Ok(())
}

impl ChannelSpec {
    pub fn with_xy_mode(mut self, mode: XyMode) -> Self {
        self.xy_mode = mode;
        self
    }

    /// Effective piece-length range on an `n × n` grid.
    pub fn piece_len(&self, n: usize) -> [f64; 2] {
        let cap = n as f64 / 10.0;
        self.piece_len_range
            .unwrap_or([(n as f64 / 20.0).max(MIN_WIDTH).min(cap), cap])
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let len = self.piece_len(n);
        ordered("piece_len_range", len)?;
        ordered("aspect_range", self.aspect_range)?;
        ordered("incline_range", self.incline_range)?;
        ordered("magnitude_range", self.magnitude_range)?;
        ordered("xy_fraction_range", self.xy_fraction_range)?;
        if len[1] > n as f64 / 10.0 {
            return Err(Error::ChannelSpec(format!(
                "piece length {} exceeds n/10 = {}",
                len[1],
                n as f64 / 10.0
            )));
        }
        if len[0] < 1.0 {
            return Err(Error::ChannelSpec("piece length must be at least one cell".into()));
        }
        if self.aspect_range[0] <= 0.0 {
            return Err(Error::ChannelSpec("aspect ratio must be positive".into()));
        }
        // |θ| < π/2 keeps the x-progress of every piece positive.
        if self.incline_range[0] <= -PI / 2.0 || self.incline_range[1] >= PI / 2.0 {
            return Err(Error::ChannelSpec(format!(
                "incline_range {:?} must lie inside (-π/2, π/2)",
                self.incline_range
            )));
        }
        let [lo, hi] = self.magnitude_range;
        if lo <= BACKGROUND || hi > 2.0 {
            return Err(Error::ChannelSpec(format!(
                "magnitude_range {:?} must lie inside (1e-6, 2]",
                self.magnitude_range
            )));
        }
        let [rl, rh] = self.xy_fraction_range;
        if rl <= -0.9 || rh >= 0.9 {
            return Err(Error::ChannelSpec(format!(
                "xy_fraction_range {:?} must lie inside (-0.9, 0.9)",
                self.xy_fraction_range
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub shape: GridShape,
    pub channel: ChannelSpec,
    pub seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, seed: u64, channel: ChannelSpec) -> Result<Self> {
        Ok(ModelParams {
            shape: GridShape::new(n)?,
            channel,
            seed,
        })
    }
}

/// One straight channel piece in cell units (`x, y ∈ [0, n]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub width: f64,
    pub tensor: Tensor,
}

impl Piece {
    /// Whether point `p` lies in the rectangle or the disk at the start joint.
    fn covers(&self, p: (f64, f64)) -> bool {
        let (dx, dy) = (self.end.0 - self.start.0, self.end.1 - self.start.1);
        let len = dx.hypot(dy);
        let (ux, uy) = (dx / len, dy / len);
        let (px, py) = (p.0 - self.start.0, p.1 - self.start.1);
        let along = px * ux + py * uy;
        let across = (-px * uy + py * ux).abs();
        let r = 0.5 * self.width;
        ((0.0..=len).contains(&along) && across <= r) || px.hypot(py) <= r
    }
}

/// Channel centreline pieces for one attempt.
fn draw_pieces(rng: &mut ChaCha8Rng, n: usize, spec: &ChannelSpec) -> Vec<Piece> {
    let nf = n as f64;
    let len = spec.piece_len(n);
    let uniform = |r: [f64; 2], rng: &mut ChaCha8Rng| {
        if r[0] == r[1] {
            r[0]
        } else {
            rng.random_range(r[0]..r[1])
        }
    };
    let mut pieces = Vec::new();
    let mut pos = (0.0, uniform([0.25 * nf, 0.75 * nf], rng));
    while pos.0 < nf {
        let l = uniform(len, rng);
        let width = (l / uniform(spec.aspect_range, rng)).max(MIN_WIDTH);
        let mut theta = uniform(spec.incline_range, rng);
        let margin = 0.5 * width;
        let y_end = |t: f64| pos.1 + l * t.sin();
        // Keep the centreline far enough from the walls to hold the full width.
        if !(margin..=nf - margin).contains(&y_end(theta)) {
            theta = -theta;
            if !(margin..=nf - margin).contains(&y_end(theta)) {
                theta = 0.0;
            }
        }
        let end = (pos.0 + l * theta.cos(), y_end(theta));
        let xx = uniform(spec.magnitude_range, rng);
        let yy = uniform(spec.magnitude_range, rng);
        let xy = match spec.xy_mode {
            XyMode::Zero => 0.0,
            XyMode::Finite => uniform(spec.xy_fraction_range, rng) * (xx * yy).sqrt(),
        };
        pieces.push(Piece {
            start: pos,
            end,
            width,
            tensor: Tensor::new(xx, xy, yy),
        });
        pos = end;
    }
    pieces
}

fn rasterize(shape: GridShape, pieces: &[Piece]) -> Result<TensorField> {
    let background = Tensor::isotropic(BACKGROUND);
    TensorField::from_fn(shape, |i, j| {
        let c = (i as f64 + 0.5, j as f64 + 0.5);
        // Later pieces overwrite earlier ones.
        pieces
            .iter()
            .rev()
            .find(|p| p.covers(c))
            .map_or(background, |p| p.tensor)
    })
}

/// A generated model together with the pieces that built it.
#[derive(Debug, Clone)]
pub struct Model {
    pub field: TensorField,
    pub pieces: Vec<Piece>,
    pub attempts: u32,
}

pub fn generate_model(params: &ModelParams) -> Result<TensorField> {
    generate_model_detailed(params).map(|m| m.field)
}

pub fn generate_model_detailed(params: &ModelParams) -> Result<Model> {
    let n = params.shape.n();
    if n < 64 {
        return Err(Error::Shape {
            n,
            reason: "model generation needs n >= 64",
        });
    }
    params.channel.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for attempt in 1..=MAX_ATTEMPTS {
        let pieces = draw_pieces(&mut rng, n, &params.channel);
        let field = rasterize(params.shape, &pieces)?;
        if percolation_check(&field, PERCOLATION_THRESHOLD) {
            return Ok(Model {
                field,
                pieces,
                attempts: attempt,
            });
        }
    }
    Err(Error::Percolation {
        seed: params.seed,
        attempts: MAX_ATTEMPTS,
    })
}

/// Whether cells with `a_xx > threshold` connect column 0 to column `n-1`
/// through edge-adjacent neighbours.
pub fn percolation_check(field: &TensorField, threshold: f64) -> bool {
    let n = field.n();
    let a = field.a_xx();
    let open = |i: usize, j: usize| a[j * n + i] > threshold;
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::new();
    for j in 0..n {
        if open(0, j) {
            seen[j * n] = true;
            queue.push_back((0, j));
        }
    }
    while let Some((i, j)) = queue.pop_front() {
        if i == n - 1 {
            return true;
        }
        let nbrs = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        for (ni, nj) in nbrs {
            if ni < n && nj < n && !seen[nj * n + ni] && open(ni, nj) {
                seen[nj * n + ni] = true;
                queue.push_back((ni, nj));
            }
        }
    }
    false
}
