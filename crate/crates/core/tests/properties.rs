use darcy_upscale::io;
use darcy_upscale::model_gen::{percolation_check, PERCOLATION_THRESHOLD};
use darcy_upscale::survey::stats::{bootstrap, cdf_table, histogram, median};
use darcy_upscale::upscale::{
    decimate_tile, kk_decimate_2x2, mean_decimate, mg_decimate_2x2, mg_decimate_general, BlockTensors, KkVariant,
    Method, Tile, UpscalePlan,
};
use darcy_upscale::{GridShape, PressureField, Tensor, TensorField};
use proptest::prelude::*;

fn positive() -> impl Strategy<Value = f64> {
    (-6.0f64..0.3).prop_map(|e| 10f64.powf(e))
}

fn tensor() -> impl Strategy<Value = Tensor> {
    (positive(), positive(), -0.9f64..0.9).prop_map(|(xx, yy, rho)| Tensor::new(xx, rho * (xx * yy).sqrt(), yy))
}

fn diagonal_block() -> impl Strategy<Value = BlockTensors> {
    (prop::array::uniform4(positive()), prop::array::uniform4(positive())).prop_map(|(a, b)| BlockTensors {
        a: [[a[0], a[1]], [a[2], a[3]]],
        b: [[b[0], b[1]], [b[2], b[3]]],
        c: [[0.0; 2]; 2],
    })
}

fn tile(nb: usize) -> impl Strategy<Value = Tile> {
    prop::collection::vec(tensor(), nb * nb).prop_map(move |c| Tile::new(nb, c))
}

fn field(n: usize) -> impl Strategy<Value = TensorField> {
    prop::collection::vec(tensor(), n * n).prop_map(move |cells| {
        let s = GridShape::new(n).unwrap();
        TensorField::from_fn(s, |i, j| cells[j * n + i]).unwrap()
    })
}

fn wiener(vals: &[f64]) -> (f64, f64) {
    let k = vals.len() as f64;
    let h = k / vals.iter().map(|v| 1.0 / v).sum::<f64>();
    let m = vals.iter().sum::<f64>() / k;
    (h, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_files_round_trip_bit_exactly(f in field(8)) {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("f.fld");
        io::write_field(&f, &p).unwrap();
        prop_assert_eq!(io::read_field(&p).unwrap(), f);
    }

    #[test]
    fn pressure_files_round_trip(vals in prop::collection::vec(-1e3f64..1e3, 81)) {
        let phi = PressureField::new(GridShape::new(8).unwrap(), vals).unwrap();
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("p.fld");
        io::write_pressure(&phi, &p).unwrap();
        prop_assert_eq!(io::read_pressure(&p).unwrap(), phi);
    }

    #[test]
    fn closed_form_and_fourier_mg_agree(bt in diagonal_block()) {
        let c = mg_decimate_2x2(&bt).unwrap();
        let g = mg_decimate_general(&bt.to_tile()).unwrap().tensor;
        prop_assert!(((g.xx - c.xx) / c.xx).abs() < 1e-12);
        prop_assert!(((g.yy - c.yy) / c.yy).abs() < 1e-12);
        prop_assert!((g.xy - c.xy).abs() <= 1e-12 * c.xy.abs().max(1e-300));
    }

    #[test]
    fn isotropic_blocks_respect_wiener_bounds(vals in prop::array::uniform4(positive())) {
        let (h, m) = wiener(&vals);
        let t = Tile::new(2, vals.iter().map(|&v| Tensor::isotropic(v)).collect());
        let bt = BlockTensors::from_tile(&t);
        let slack = 1e-12;
        for r in [
            mg_decimate_2x2(&bt).unwrap(),
            kk_decimate_2x2(&bt, KkVariant::Corrected).unwrap(),
            mean_decimate(&t),
        ] {
            for v in [r.xx, r.yy] {
                prop_assert!(h * (1.0 - slack) <= v && v <= m * (1.0 + slack), "{} not in [{}, {}]", v, h, m);
            }
        }
    }

    #[test]
    fn every_method_preserves_positive_definiteness(t in tile(2), t4 in tile(4)) {
        for m in Method::ALL {
            let plan = UpscalePlan::new(m, 2, 8).unwrap();
            let (r, _) = decimate_tile(&t, &plan).unwrap();
            prop_assert!(r.is_positive_definite(), "{:?} {:?}", m, r);
        }
        let g = mg_decimate_general(&t4).unwrap().tensor;
        prop_assert!(g.is_positive_definite());
        prop_assert!(mean_decimate(&t4).is_positive_definite());
    }

    #[test]
    fn mg_commutes_with_transposition(t in tile(4)) {
        let a = mg_decimate_general(&t).unwrap().tensor;
        let b = mg_decimate_general(&t.transposed()).unwrap().tensor.transposed();
        let scale = (a.xx * a.yy).sqrt();
        prop_assert!((a.xx - b.xx).abs() < 1e-10 * a.xx);
        prop_assert!((a.yy - b.yy).abs() < 1e-10 * a.yy);
        prop_assert!((a.xy - b.xy).abs() < 1e-10 * scale);
    }

    #[test]
    fn mg_never_exceeds_the_mean(t in tile(2)) {
        // Energy of the minimiser is at most that of the uniform gradient.
        let g = mg_decimate_general(&t).unwrap().tensor;
        let m = mean_decimate(&t);
        let d = Tensor::new(m.xx - g.xx, m.xy - g.xy, m.yy - g.yy);
        let tol = 1e-12 * (m.xx + m.yy);
        prop_assert!(d.xx >= -tol && d.yy >= -tol && d.det() >= -tol * (m.xx + m.yy));
    }

    #[test]
    fn mean_is_componentwise_convex(t in tile(2)) {
        let m = mean_decimate(&t);
        for (get, v) in [
            (Box::new(|x: &Tensor| x.xx) as Box<dyn Fn(&Tensor) -> f64>, m.xx),
            (Box::new(|x: &Tensor| x.xy), m.xy),
            (Box::new(|x: &Tensor| x.yy), m.yy),
        ] {
            let lo = t.cells.iter().map(&get).fold(f64::INFINITY, f64::min);
            let hi = t.cells.iter().map(&get).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-15 * hi.abs() <= v && v <= hi + 1e-15 * hi.abs());
        }
    }

    #[test]
    fn percolation_agrees_with_union_find(bits in prop::collection::vec(prop::bool::weighted(0.55), 64)) {
        let n = 8;
        let f = TensorField::from_fn(GridShape::new(n).unwrap(), |i, j| {
            Tensor::isotropic(if bits[j * n + i] { 1.0 } else { 1e-6 })
        })
        .unwrap();
        prop_assert_eq!(percolation_check(&f, PERCOLATION_THRESHOLD), union_find_spans(&bits, n));
    }

    #[test]
    fn cdf_is_monotone_and_bounded(errs in prop::collection::vec(-50.0f64..50.0, 1..60)) {
        let top = errs.iter().map(|e| e.abs()).fold(0.0, f64::max) * 1.01 + 1e-9;
        let grid: Vec<f64> = (0..=40).map(|k| top * k as f64 / 40.0).collect();
        let p = cdf_table(&errs, &grid).unwrap();
        prop_assert_eq!(p[0], 0.0);
        prop_assert_eq!(*p.last().unwrap(), 1.0);
        prop_assert!(p.windows(2).all(|w| w[0] <= w[1]));
        let h = histogram(&errs).unwrap();
        prop_assert!((h.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_medians_stay_within_the_data(data in prop::collection::vec(-10.0f64..10.0, 1..30), seed in any::<u64>()) {
        let lo = data.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dist = bootstrap(data.len(), 50, seed, |ix| median(&ix.iter().map(|&i| data[i]).collect::<Vec<_>>()));
        prop_assert!(dist.iter().all(|&m| lo <= m && m <= hi));
        prop_assert_eq!(dist, bootstrap(data.len(), 50, seed, |ix| median(&ix.iter().map(|&i| data[i]).collect::<Vec<_>>())));
    }
}

/// Edge-adjacent connectivity from column 0 to column n-1 via union-find.
fn union_find_spans(open: &[bool], n: usize) -> bool {
    let (left, right) = (n * n, n * n + 1);
    let mut parent: Vec<usize> = (0..n * n + 2).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    let union = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        p[ra] = rb;
    };
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if !open[k] {
                continue;
            }
            if i == 0 {
                union(&mut parent, k, left);
            }
            if i == n - 1 {
                union(&mut parent, k, right);
            }
            if i + 1 < n && open[k + 1] {
                union(&mut parent, k, k + 1);
            }
            if j + 1 < n && open[k + n] {
                union(&mut parent, k, k + n);
            }
        }
    }
    find(&mut parent, left) == find(&mut parent, right)
}
