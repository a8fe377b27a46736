/// Centred fourth-order finite-difference weights (unit spacing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

pub const FOURTH_ORDER: StencilCoeffs = StencilCoeffs {
    a1: 8.0 / 12.0,
    a2: -1.0 / 12.0,
    b0: -30.0 / 12.0,
    b1: 16.0 / 12.0,
    b2: -1.0 / 12.0,
};

/// (offset, weight) pairs; multiply by `1/h` or `1/h²` at use.
pub type Stencil = &'static [(isize, f64)];

pub const D1_CENTRED4: Stencil = &[
    (-2, 1.0 / 12.0),
    (-1, -8.0 / 12.0),
    (1, 8.0 / 12.0),
    (2, -1.0 / 12.0),
];
pub const D2_CENTRED4: Stencil = &[
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];
pub const D1_CENTRED2: Stencil = &[(-1, -0.5), (1, 0.5)];
pub const D2_CENTRED2: Stencil = &[(-1, 1.0), (0, -2.0), (1, 1.0)];

const D1_EDGE0: Stencil = &[
    (0, -25.0 / 12.0),
    (1, 48.0 / 12.0),
    (2, -36.0 / 12.0),
    (3, 16.0 / 12.0),
    (4, -3.0 / 12.0),
];
const D1_EDGE1: Stencil = &[
    (-1, -3.0 / 12.0),
    (0, -10.0 / 12.0),
    (1, 18.0 / 12.0),
    (2, -6.0 / 12.0),
    (3, 1.0 / 12.0),
];
const D1_EDGE_LAST1: Stencil = &[
    (1, 3.0 / 12.0),
    (0, 10.0 / 12.0),
    (-1, -18.0 / 12.0),
    (-2, 6.0 / 12.0),
    (-3, -1.0 / 12.0),
];
const D1_EDGE_LAST0: Stencil = &[
    (0, 25.0 / 12.0),
    (-1, -48.0 / 12.0),
    (-2, 36.0 / 12.0),
    (-3, -16.0 / 12.0),
    (-4, 3.0 / 12.0),
];

/// Fourth-order first derivative at point `k` of `0..=last`, one-sided
/// within two points of either end.
pub fn d1_fourth_order(k: usize, last: usize) -> Stencil {
    match k {
        0 => D1_EDGE0,
        1 => D1_EDGE1,
        _ if k + 1 == last => D1_EDGE_LAST1,
        _ if k == last => D1_EDGE_LAST0,
        _ => D1_CENTRED4,
    }
}
