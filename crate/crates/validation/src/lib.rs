//! Pinned tolerances and a small pass/fail ledger for the acceptance run.
//!
//! The harness lives in `tests/acceptance.rs`; this package exists so that
//! it runs after every other test target in the workspace.

use std::fmt;

/// Uniform media: `f` against `a_xx`, and `ratio − 1`.
pub const UNIFORM_TOL: f64 = 1e-10;
/// Layered media against the harmonic / arithmetic means.
pub const LAYERED_TOL: f64 = 1e-2;
/// Closed-form vs Fourier-space MG on 2×2 blocks, per component.
pub const MG_EQUIVALENCE_TOL: f64 = 1e-12;
/// Uniform blocks must reproduce themselves (rounding only).
pub const FIXED_POINT_TOL: f64 = 1e-14;
/// Reduced vs full spectral solutions on the retained modes.
pub const SPECTRAL_TOL: f64 = 1e-9;
/// The uniform spectral operator is diagonal; only rounding remains.
pub const SPECTRAL_UNIFORM_TOL: f64 = 1e-12;
/// Bootstrap confidence for the survey comparisons.
pub const CONFIDENCE: f64 = 0.95;
/// Admissibility threshold for the full-scale smoke run.
pub const RATIO_TOL: f64 = 1.05;

/// `|x − y| / |y|`, or `|x|` when `y` vanishes.
pub fn rel(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        x.abs()
    } else {
        ((x - y) / y).abs()
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<34} {}", self.name, self.detail)
    }
}

/// Collects outcomes and prints each as it arrives.
#[derive(Debug, Default)]
pub struct Ledger {
    pub outcomes: Vec<Outcome>,
}

impl Ledger {
    pub fn record(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        let o = Outcome {
            name,
            passed,
            detail: detail.into(),
        };
        println!("{o}");
        self.outcomes.push(o);
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| !o.passed).count()
    }
}
