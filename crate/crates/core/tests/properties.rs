use evsched_core::milp::{parse_lp, write_lp, Sense, VarKind};
use evsched_core::*;
use proptest::prelude::*;

fn preset_instance(series: Series, seed: u64, triangle: TriangleMode) -> Instance {
    generate_instance(&series.full().config(seed, triangle)).unwrap()
}

fn raw_instance() -> impl Strategy<Value = Instance> {
    (0..3usize, any::<u64>())
        .prop_map(|(s, seed)| preset_instance(Series::ALL[s], seed, TriangleMode::Raw))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_metric_idempotent_and_never_longer(inst in raw_instance()) {
        let closed = inst.metric_closure();
        prop_assert!(closed.satisfies_triangle());
        let twice = closed.metric_closure();
        for l in 0..inst.num_machines() {
            for &u in inst.machine_techs(l) {
                for &q in inst.machine_techs(l) {
                    prop_assert!(closed.setup(l, u, q) <= inst.setup(l, u, q) + 1e-12);
                    prop_assert!((twice.setup(l, u, q) - closed.setup(l, u, q)).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn lp_text_round_trip_is_a_fixed_point(inst in raw_instance(), n in 1..4usize, tri in any::<bool>()) {
        let variant = if tri { Variant::Triangle } else { Variant::General };
        let built = build(&inst, EventPointConfig::new(n).unwrap(), variant);
        let text = write_lp(&built.model);
        let parsed = parse_lp(&text).unwrap();
        prop_assert_eq!(parsed.stats(), built.model.stats());
        prop_assert_eq!(write_lp(&parsed), text);
    }

    #[test]
    fn json_round_trip(inst in raw_instance()) {
        prop_assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn simplex_matches_vertex_enumeration(
        c in prop::collection::vec(-5i32..=5, 3),
        rows in prop::collection::vec((prop::collection::vec(-4i32..=4, 3), 0usize..3, -6i32..=10), 1..4),
    ) {
        let mut m = LinearModel::new();
        let cols: Vec<_> = (0..3)
            .map(|j| m.add_column(format!("x{j}"), 0.0, 4.0, VarKind::Continuous).unwrap())
            .collect();
        let mut dense = Vec::new();
        for (i, (a, s, b)) in rows.iter().enumerate() {
            let sense = [Sense::Le, Sense::Ge, Sense::Eq][*s];
            let coeffs: Vec<f64> = a.iter().map(|&x| x as f64).collect();
            m.add_row(format!("r{i}"), cols.iter().copied().zip(coeffs.iter().copied()), sense, *b as f64).unwrap();
            dense.push((coeffs, sense, *b as f64));
        }
        let obj: Vec<f64> = c.iter().map(|&x| x as f64).collect();
        m.set_objective(cols.iter().copied().zip(obj.iter().copied())).unwrap();

        let lp = solve_lp(&m);
        match vertex_optimum(&obj, &dense) {
            Some(best) => {
                prop_assert!((lp.objective - best).abs() < 1e-6, "simplex {} vs vertices {best}", lp.objective);
                prop_assert!(m.max_violation(&lp.values) < 1e-7);
            }
            None => prop_assert!(!lp.objective.is_finite()),
        }
    }
}

/// Minimum of `c·x` over `{0 ≤ x ≤ 4} ∩ rows` by enumerating every basic
/// solution of three tight constraints. The box keeps the region bounded.
fn vertex_optimum(c: &[f64], rows: &[(Vec<f64>, Sense, f64)]) -> Option<f64> {
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..3 {
        let mut e = vec![0.0; 3];
        e[j] = 1.0;
        planes.push((e.clone(), 0.0));
        planes.push((e, 4.0));
    }
    let feasible = |x: &[f64]| {
        x.iter().all(|&v| (-1e-9..=4.0 + 1e-9).contains(&v))
            && rows.iter().all(|(a, s, b)| {
                let act: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                match s {
                    Sense::Le => act <= b + 1e-9,
                    Sense::Ge => act >= b - 1e-9,
                    Sense::Eq => (act - b).abs() <= 1e-9,
                }
            })
    };
    let mut best: Option<f64> = None;
    let p = planes.len();
    for i in 0..p {
        for j in i + 1..p {
            for k in j + 1..p {
                if let Some(x) = solve3([&planes[i], &planes[j], &planes[k]]) {
                    if feasible(&x) {
                        let v: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
                        best = Some(best.map_or(v, |b| b.min(v)));
                    }
                }
            }
        }
    }
    best
}

fn solve3(planes: [&(Vec<f64>, f64); 3]) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = planes
        .iter()
        .map(|(r, b)| vec![r[0], r[1], r[2], *b])
        .collect();
    for col in 0..3 {
        let piv = (col..3).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    Some((0..3).map(|i| a[i][3] / a[i][i]).collect())
}

#[test]
fn generator_respects_ranges() {
    for series in Series::ALL {
        let p = series.full();
        for seed in 0..1000 {
            let raw = preset_instance(series, seed, TriangleMode::Raw);
            assert_eq!(raw.num_products(), p.products);
            assert_eq!(raw.num_machines(), p.machines);
            let d = raw.num_technologies();
            assert!(p.products <= d && d <= p.products * p.max_techs);
            for prod in raw.products() {
                assert!((1..=p.max_techs).contains(&prod.technologies.len()));
                assert!((1.0..=p.max_volume).contains(&prod.volume));
            }
            for t in raw.technologies() {
                let v = raw.products()[t.product].volume;
                assert!(1.0 <= t.rate && t.rate <= (v / 2.0).max(1.0));
                assert!(!t.machines.is_empty() && t.machines.len() <= p.machines);
                assert!(t.machines.windows(2).all(|w| w[0] < w[1]));
            }
            for l in 0..raw.num_machines() {
                for &u in raw.machine_techs(l) {
                    for &q in raw.machine_techs(l) {
                        assert!((0.0..=p.max_setup).contains(&raw.setup(l, u, q)));
                    }
                }
            }
            assert!(preset_instance(series, seed, TriangleMode::MetricClosure).satisfies_triangle());
        }
    }
}

#[test]
fn predicted_sizes_match_built_models() {
    for series in Series::ALL {
        let p = series.full();
        let cfg = EventPointConfig::new(p.event_points).unwrap();
        for seed in 0..100 {
            let inst = preset_instance(series, seed, TriangleMode::MetricClosure);
            for variant in Variant::BOTH {
                let built = build(&inst, cfg, variant);
                assert_eq!(
                    built.model.stats(),
                    predict_stats(&inst, cfg, variant),
                    "{series:?} seed {seed} {variant}"
                );
            }
        }
    }
}

#[test]
fn horizon_bounds_small_optima() {
    let base = Series::S1.desk();
    for seed in 0..10 {
        let mut cfg = base.config(seed, TriangleMode::Raw);
        cfg.event_points = 2;
        let inst = generate_instance(&cfg).unwrap();
        let built = build_general(&inst, EventPointConfig::new(2).unwrap());
        let sol = solve_milp(&built.model, &SolveConfig::default()).unwrap();
        assert!(sol.objective.unwrap() <= inst.horizon() + 1e-6);
    }
}
