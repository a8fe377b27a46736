//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero
//! exit if any fails. Tolerances live in the library half of this package.
//!
//! The survey block (desk-scale ensembles in both cross-term modes, then a
//! repeat for determinism, then five full-size models) dominates the run
//! time.

use std::time::Instant;

use darcy_upscale::model_gen::{generate_model, ChannelSpec, ModelParams, XyMode};
use darcy_upscale::solver;
use darcy_upscale::spectral::{verify_low_mode_exactness, Mode, SpectralOperator};
use darcy_upscale::survey::stats::{bootstrap, median, median_abs, one_sided_bounds};
use darcy_upscale::survey::{emit_report, run_survey, SurveyConfig, SurveyReport, BOOTSTRAP_SEED};
use darcy_upscale::upscale::{
    cost_model, kk_decimate_2x2, mg_decimate_2x2, mg_decimate_general, run_plan, BlockTensors, KkVariant, Method,
    Tile, UpscalePlan,
};
use darcy_upscale::{GridShape, Tensor, TensorField};
use darcy_upscale_validation::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn shape(n: usize) -> GridShape {
    GridShape::new(n).expect("power of two")
}

fn uniform_flow(l: &mut Ledger) {
    let mut worst_f = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut err = None;
    for c in [1e-6, 0.7, 2.0] {
        let field = TensorField::uniform(shape(64), Tensor::isotropic(c)).unwrap();
        match solver::solve(&field) {
            Ok(r) => {
                worst_f = worst_f.max(rel(r.f, c));
                worst_ratio = worst_ratio.max(r.validation_ratio - 1.0);
            }
            Err(e) => err = Some(e.to_string()),
        }
    }
    let ok = err.is_none() && worst_f <= UNIFORM_TOL && worst_ratio <= UNIFORM_TOL;
    l.record(
        "uniform media, n=64",
        ok,
        format!(
            "max rel(f, a) = {worst_f:.2e}, max ratio-1 = {worst_ratio:.2e} (tol {UNIFORM_TOL:e}){}",
            err.map(|e| format!("; {e}")).unwrap_or_default()
        ),
    );
}

fn layered_flow(l: &mut Ledger) {
    let (p, q) = (1.0, 0.01);
    let n = 128;
    // Layers stacked along the flow (series) and across it (parallel).
    let series = TensorField::from_fn(shape(n), |i, _| Tensor::isotropic(if i < n / 2 { p } else { q })).unwrap();
    let parallel = TensorField::from_fn(shape(n), |_, j| Tensor::isotropic(if j < n / 2 { p } else { q })).unwrap();
    let fs = solver::solve(&series).map(|r| r.f).unwrap_or(f64::NAN);
    let fp = solver::solve(&parallel).map(|r| r.f).unwrap_or(f64::NAN);
    let es = rel(fs, 2.0 * p * q / (p + q));
    let ep = rel(fp, 0.5 * (p + q));
    l.record(
        "two-layer media, n=128",
        es <= LAYERED_TOL && ep <= LAYERED_TOL,
        format!("series rel = {es:.2e}, parallel rel = {ep:.2e} (tol {LAYERED_TOL:e})"),
    );
}

fn mg_equivalence(l: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut diag, mut xy) = (0.0f64, 0.0f64);
    let mut failures = 0;
    let top = 2f64.log10();
    for _ in 0..1000 {
        let mut bt = BlockTensors::default();
        for r in 0..2 {
            for c in 0..2 {
                bt.a[r][c] = 10f64.powf(rng.random_range(-6.0..top));
                bt.b[r][c] = 10f64.powf(rng.random_range(-6.0..top));
            }
        }
        match (mg_decimate_2x2(&bt), mg_decimate_general(&bt.to_tile())) {
            (Ok(c), Ok(g)) => {
                let g = g.tensor;
                diag = diag.max(rel(g.xx, c.xx)).max(rel(g.yy, c.yy));
                xy = xy.max(rel(g.xy, c.xy));
            }
            _ => failures += 1,
        }
    }
    let mut fixed = 0.0f64;
    for t in [Tensor::isotropic(1e-6), Tensor::new(0.7, 0.0, 0.3), Tensor::isotropic(2.0)] {
        let tile = Tile::uniform(2, t);
        let c = mg_decimate_2x2(&BlockTensors::from_tile(&tile)).unwrap();
        fixed = fixed.max(rel(c.xx, t.xx)).max(rel(c.yy, t.yy)).max(c.xy.abs());
    }
    for t in [Tensor::new(0.7, -0.2, 0.4), Tensor::new(1.5, 0.9, 0.6)] {
        let g = mg_decimate_general(&Tile::uniform(2, t)).unwrap().tensor;
        fixed = fixed.max(rel(g.xx, t.xx)).max(rel(g.yy, t.yy)).max(rel(g.xy, t.xy));
    }
    l.record(
        "MG closed form vs Fourier Schur",
        failures == 0 && diag <= MG_EQUIVALENCE_TOL && xy <= MG_EQUIVALENCE_TOL && fixed <= FIXED_POINT_TOL,
        format!(
            "1000 blocks: diag {diag:.1e}, xy {xy:.1e} (tol {MG_EQUIVALENCE_TOL:e}); fixed points {fixed:.1e}; errors {failures}"
        ),
    );
}

fn random_periodic_field(rng: &mut ChaCha8Rng, n: usize) -> TensorField {
    TensorField::from_fn(shape(n), |_, _| {
        let xx = 10f64.powf(rng.random_range(-1.0..1.0));
        let yy = 10f64.powf(rng.random_range(-1.0..1.0));
        let rho = rng.random_range(-0.5..0.5);
        Tensor::new(xx, rho * (xx * yy).sqrt(), yy)
    })
    .unwrap()
}

fn low_source(rng: &mut ChaCha8Rng, kc: i64) -> Vec<(Mode, Complex64)> {
    let mut s = Vec::new();
    for q in -kc..=kc {
        for p in -kc..=kc {
            if (p, q) != (0, 0) && SpectralOperator::is_low((p, q), kc) {
                s.push(((p, q), Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
            }
        }
    }
    s
}

fn spectral_oracle(l: &mut Ledger) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let kc = 2;
    let mut worst = 0.0f64;
    let mut err = None;
    for _ in 0..10 {
        let field = random_periodic_field(&mut rng, 8);
        let src = low_source(&mut rng, kc);
        match verify_low_mode_exactness(&field, kc, &src) {
            Ok(r) => worst = worst.max(r.relative_deviation),
            Err(e) => err = Some(e.to_string()),
        }
    }
    let uniform = TensorField::uniform(shape(8), Tensor::new(0.7, 0.2, 0.4)).unwrap();
    let src = low_source(&mut rng, kc);
    let u = verify_low_mode_exactness(&uniform, kc, &src)
        .map(|r| r.relative_deviation)
        .unwrap_or(f64::INFINITY);
    l.record(
        "spectral low-mode exactness, 8x8",
        err.is_none() && worst <= SPECTRAL_TOL && u <= SPECTRAL_UNIFORM_TOL,
        format!(
            "10 random fields, kc={kc}: max dev {worst:.1e} (tol {SPECTRAL_TOL:e}); uniform {u:.1e}{}",
            err.map(|e| format!("; {e}")).unwrap_or_default()
        ),
    );
}

fn kk_orientation(l: &mut Ledger) {
    let mut corrected = 0.0f64;
    let mut printed = f64::INFINITY;
    for t in [Tensor::isotropic(0.7), Tensor::new(0.3, 0.0, 1.8), Tensor::isotropic(1e-6)] {
        let b = BlockTensors::from_tile(&Tile::uniform(2, t));
        let c = kk_decimate_2x2(&b, KkVariant::Corrected).unwrap();
        corrected = corrected.max(rel(c.xx, t.xx)).max(rel(c.yy, t.yy));
        let p = kk_decimate_2x2(&b, KkVariant::AsPrinted).unwrap();
        printed = printed.min(rel(p.xx, t.xx).max(rel(p.yy, t.yy)));
    }
    // The verbatim formula maps a uniform c to 1/c, so every case above
    // (none has c = 1) must move by a wide margin.
    l.record(
        "KK uniform fixed point",
        corrected <= FIXED_POINT_TOL && printed > 0.1,
        format!("corrected dev {corrected:.1e}; as-printed min dev {printed:.2}"),
    );
}

fn sweeps_and_cost(l: &mut Ledger) {
    let field = generate_model(&ModelParams::new(512, 0, ChannelSpec::default()).unwrap()).unwrap();
    let mut sizes = Vec::new();
    let mut sweeps_ok = true;
    for m in Method::ALL {
        match run_plan(&field, &UpscalePlan::new(m, 2, 32).unwrap()) {
            Ok(up) => {
                sweeps_ok &= up.timings.len() == 4;
                sizes = up.levels.iter().map(|f| f.n()).collect();
                sweeps_ok &= sizes == [256, 128, 64, 32];
            }
            Err(_) => sweeps_ok = false,
        }
    }
    // Independent count: one (N_b²)³ inversion per tile for MG, and the
    // stated N² N_b² per-sweep scaling otherwise, in exact integers.
    let mut cost_ok = true;
    for k in 1..=4u32 {
        let target = 512usize >> k;
        for m in Method::ALL {
            let mut exact: u128 = 0;
            for s in 0..k {
                let side = 512u128 >> s;
                exact += match m {
                    Method::Mg => (side / 2).pow(2) * 4u128.pow(3),
                    _ => side.pow(2) * 4,
                };
            }
            cost_ok &= cost_model(512, 2, target, m).map(|c| c == exact as f64).unwrap_or(false);
        }
    }
    l.record(
        "sweep count and cost model",
        sweeps_ok && cost_ok,
        format!("512->32 levels {sizes:?}, 4 sweeps per method: {sweeps_ok}; cost K=1..4 exact: {cost_ok}"),
    );
}

/// Admissible records carrying every (method, resolution) error.
fn complete_rows(report: &SurveyReport) -> Vec<Vec<f64>> {
    let keys = keys(report);
    report
        .models
        .iter()
        .filter(|m| m.admissible)
        .filter_map(|m| keys.iter().map(|&(me, r)| m.epsilon(me, r)).collect::<Option<Vec<_>>>())
        .collect()
}

fn keys(report: &SurveyReport) -> Vec<(Method, usize)> {
    let mut k = Vec::new();
    for &m in &report.config.methods {
        for r in report.config.ladder() {
            k.push((m, r));
        }
    }
    k
}

struct Paired {
    keys: Vec<(Method, usize)>,
    rows: Vec<Vec<f64>>,
}

impl Paired {
    fn new(report: &SurveyReport) -> Self {
        Paired {
            keys: keys(report),
            rows: complete_rows(report),
        }
    }

    fn col(&self, m: Method, r: usize, idx: &[usize]) -> Vec<f64> {
        let k = self.keys.iter().position(|&x| x == (m, r)).expect("panel");
        idx.iter().map(|&i| self.rows[i][k]).collect()
    }

    fn boot(&self, seed: u64, resamples: usize, stat: impl Fn(&Paired, &[usize]) -> f64) -> Vec<f64> {
        bootstrap(self.rows.len(), resamples, seed, |idx| stat(self, idx))
    }

    fn all(&self) -> Vec<usize> {
        (0..self.rows.len()).collect()
    }
}

fn survey_comparisons(l: &mut Ledger, zero: &SurveyReport, finite: &SurveyReport) {
    let b = zero.config.bootstrap_resamples;
    let z = Paired::new(zero);
    let f = Paired::new(finite);
    let lo = 32;
    let hi = 64;
    let mabs = |p: &Paired, m, r, idx: &[usize]| median_abs(&p.col(m, r, idx));
    let mut parts = Vec::new();
    let mut ok = true;

    // MG no worse than either alternative (zero-xy, coarsest level).
    let mut a_ok = true;
    let mut a_txt = Vec::new();
    for other in [Method::Kk, Method::Mean] {
        let d = z.boot(BOOTSTRAP_SEED, b, |p, ix| mabs(p, Method::Mg, lo, ix) - mabs(p, other, lo, ix));
        let (_, upper) = one_sided_bounds(&d, CONFIDENCE);
        a_ok &= upper <= 0.0;
        let point = mabs(&z, Method::Mg, lo, &z.all()) - mabs(&z, other, lo, &z.all());
        a_txt.push(format!("MG-{} {point:+.2} (ub {upper:+.2})", other.name().to_uppercase()));
    }
    ok &= a_ok;
    parts.push(format!("[a {}] {}", mark(a_ok), a_txt.join(", ")));

    // The KK-MG gap widens once cross terms are present.
    let gap = |p: &Paired, ix: &[usize]| mabs(p, Method::Kk, lo, ix) - mabs(p, Method::Mg, lo, ix);
    let gz = z.boot(BOOTSTRAP_SEED, b, gap);
    let gf = f.boot(BOOTSTRAP_SEED ^ 1, b, gap);
    let widening: Vec<f64> = gf.iter().zip(&gz).map(|(x, y)| x - y).collect();
    let (w_lower, _) = one_sided_bounds(&widening, CONFIDENCE);
    let (gf_lower, _) = one_sided_bounds(&gf, CONFIDENCE);
    let b_ok = w_lower > 0.0 && gf_lower > 0.0;
    ok &= b_ok;
    parts.push(format!(
        "[b {}] gap zero {:+.2}, finite {:+.2} (lb {gf_lower:+.2}); widening lb {w_lower:+.2}",
        mark(b_ok),
        gap(&z, &z.all()),
        gap(&f, &f.all())
    ));

    // Overprediction: median ε below zero for every method and mode.
    let mut c_ok = true;
    let mut c_txt = Vec::new();
    for (tag, p) in [("zero", &z), ("finite", &f)] {
        for &m in &Method::ALL {
            let d = p.boot(BOOTSTRAP_SEED, b, |p, ix| median(&p.col(m, lo, ix)));
            let (_, upper) = one_sided_bounds(&d, CONFIDENCE);
            c_ok &= upper < 0.0;
            c_txt.push(format!("{tag}/{} {:+.2} (ub {upper:+.2})", m.name(), median(&p.col(m, lo, &p.all()))));
        }
    }
    ok &= c_ok;
    parts.push(format!("[c {}] median eps {}", mark(c_ok), c_txt.join(", ")));

    // Coarser targets are never better.
    let mut d_ok = true;
    let mut d_txt = Vec::new();
    for (tag, p) in [("zero", &z), ("finite", &f)] {
        for &m in &Method::ALL {
            let d = p.boot(BOOTSTRAP_SEED, b, |p, ix| mabs(p, m, lo, ix) - mabs(p, m, hi, ix));
            let (lower, _) = one_sided_bounds(&d, CONFIDENCE);
            d_ok &= lower >= 0.0;
            d_txt.push(format!("{tag}/{} lb {lower:+.2}", m.name()));
        }
    }
    ok &= d_ok;
    parts.push(format!("[d {}] |eps| 32 minus 64: {}", mark(d_ok), d_txt.join(", ")));

    l.record(
        "desk survey comparisons, 95% boot",
        ok,
        format!(
            "{} / {} paired models; {}",
            z.rows.len(),
            f.rows.len(),
            parts.join("; ")
        ),
    );
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn artifacts(report: &SurveyReport) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().expect("tempdir");
    let paths = emit_report(report, dir.path()).expect("emit");
    paths
        .iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read(p).expect("read back"))
        })
        .collect()
}

fn determinism(l: &mut Ledger, first: &SurveyReport) {
    let again = match run_survey(&first.config) {
        Ok(r) => r,
        Err(e) => {
            l.record("repeated survey is byte-identical", false, e.to_string());
            return;
        }
    };
    let a = artifacts(first);
    let b = artifacts(&again);
    let json_same = a.iter().zip(&b).any(|(x, y)| x.0 == "report.json" && x.1 == y.1);
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x.1 != y.1).map(|(x, _)| x.0.as_str()).collect();
    let len = a.iter().find(|x| x.0 == "report.json").map(|x| x.1.len()).unwrap_or(0);
    l.record(
        "repeated survey is byte-identical",
        json_same,
        format!("report.json {len} bytes; differing artifacts: {differing:?}"),
    );
}

fn full_scale_smoke(l: &mut Ledger) {
    let mut cfg = SurveyConfig::paper(XyMode::Zero);
    cfg.n_models = 5;
    cfg.ratio_tol = RATIO_TOL;
    match run_survey(&cfg) {
        Ok(r) => {
            let ratios: Vec<String> = r
                .models
                .iter()
                .map(|m| m.validation_ratio.map_or("-".into(), |v| format!("{v:.4}")))
                .collect();
            let emitted = artifacts(&r).len();
            let failed_panels = r.models.iter().flat_map(|m| &m.results).filter(|p| p.epsilon.is_none()).count();
            l.record(
                "full-scale preset smoke (5 x 512)",
                r.summary.admissible == 5 && failed_panels == 0 && emitted == 5,
                format!(
                    "admissible {}/5 at {RATIO_TOL}, ratios [{}], failed panels {failed_panels}, artifacts {emitted}",
                    r.summary.admissible,
                    ratios.join(", ")
                ),
            );
        }
        Err(e) => l.record("full-scale preset smoke (5 x 512)", false, e.to_string()),
    }
}

fn main() {
    let start = Instant::now();
    let mut l = Ledger::default();
    uniform_flow(&mut l);
    layered_flow(&mut l);
    mg_equivalence(&mut l);
    spectral_oracle(&mut l);
    kk_orientation(&mut l);
    sweeps_and_cost(&mut l);

    let t = Instant::now();
    let zero = run_survey(&SurveyConfig::desk(XyMode::Zero));
    let finite = run_survey(&SurveyConfig::desk(XyMode::Finite));
    eprintln!("desk surveys: {:.0} s", t.elapsed().as_secs_f64());
    match (&zero, &finite) {
        (Ok(z), Ok(f)) => survey_comparisons(&mut l, z, f),
        (Err(e), _) | (_, Err(e)) => l.record("desk survey comparisons, 95% boot", false, e.to_string()),
    }
    match &zero {
        Ok(z) => determinism(&mut l, z),
        Err(e) => l.record("repeated survey is byte-identical", false, e.to_string()),
    }
    full_scale_smoke(&mut l);

    let fails = l.failures();
    println!(
        "{} of {} criteria passed in {:.0} s",
        l.outcomes.len() - fails,
        l.outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if fails > 0 {
        std::process::exit(1);
    }
}
