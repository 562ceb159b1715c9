use asymmetry_core::egarch::{egarch_filter, EgarchParams, VARIANCE_FLOOR};
use asymmetry_core::events::{replay_events, shortable_dummy, ShortSaleEvent};
use asymmetry_core::market_data::{
    aggregate_returns, compute_returns, PriceSeries, ReturnKind, ReturnMethod, ReturnSeries,
    TradingCalendar,
};
use asymmetry_core::ols::{design_with_intercept, ols_fit};
use asymmetry_core::panel::{fe_ols_columns, StdErrorKind};
use asymmetry_core::stats::{
    distribution_data, one_sample_t_test, return_volatility_correlation, signed_rank_statistic,
    skewness,
};
use asymmetry_core::windows::{calendar_windows, Windowing};
use asymmetry_core::Error;
use chrono::{Days, NaiveDate};
use proptest::prelude::*;

fn day(i: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + Days::new(i)
}

fn sample(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, min..max)
}

fn spread(x: &[f64]) -> bool {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo > 1e-3
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn skewness_is_affine_invariant(x in sample(3, 80), a in 0.01f64..100.0, b in -50.0f64..50.0) {
        prop_assume!(spread(&x));
        let s = skewness(&x).unwrap();
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!(rel_close(skewness(&y).unwrap(), s, 1e-8));
    }

    #[test]
    fn skewness_is_odd(x in sample(3, 80)) {
        prop_assume!(spread(&x));
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert!(rel_close(skewness(&neg).unwrap(), -skewness(&x).unwrap(), 1e-10));
    }

    #[test]
    fn correlation_is_bounded(x in sample(3, 120)) {
        prop_assume!(spread(&x));
        if let Ok(c) = return_volatility_correlation(&x) {
            prop_assert!((-1.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn t_and_signed_rank_are_scale_invariant(x in sample(5, 60), a in 0.01f64..100.0) {
        prop_assume!(spread(&x));
        let y: Vec<f64> = x.iter().map(|v| a * v).collect();
        let (tx, ty) = (one_sample_t_test(&x, 0.0).unwrap().t, one_sample_t_test(&y, 0.0).unwrap().t);
        prop_assert!(rel_close(tx, ty, 1e-10));
        prop_assert_eq!(signed_rank_statistic(&x, 0.0), signed_rank_statistic(&y, 0.0));
    }

    #[test]
    fn ecdf_is_monotone_and_ends_at_one(x in sample(10, 200), bins in 1usize..50) {
        let d = distribution_data(&x, bins).unwrap();
        prop_assert!(d.ecdf.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        prop_assert_eq!(d.ecdf.last().unwrap().1, 1.0);
        // Right-continuity: F at a sample point counts that point.
        let n = x.len() as f64;
        for (v, f) in &d.ecdf {
            let at = x.iter().filter(|y| *y <= v).count() as f64 / n;
            prop_assert_eq!(*f, at);
        }
        let width = d.density.get(1).map_or(1.0, |b| b.0 - d.density[0].0);
        let mass: f64 = d.density.iter().map(|b| b.1).sum::<f64>() * width;
        prop_assert!(bins == 1 || (mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_returns_round_trip_prices(steps in prop::collection::vec(-0.1f64..0.1, 2..300), p0 in 0.5f64..500.0) {
        let mut p = p0;
        let mut obs = vec![(day(0), p0)];
        for (i, s) in steps.iter().enumerate() {
            p *= s.exp();
            obs.push((day(i as u64 + 1), p));
        }
        let prices = PriceSeries::new("S", obs).unwrap();
        let r = compute_returns(&prices, ReturnMethod::Log).unwrap();
        let rebuilt = p0 * r.values().iter().sum::<f64>().exp();
        prop_assert!(rel_close(rebuilt, p, 1e-12));
    }

    #[test]
    fn aggregation_preserves_sums(v in prop::collection::vec(-0.1f64..0.1, 1..200), k in 1usize..12) {
        let dates = (0..v.len() as u64).map(day).collect();
        let r = ReturnSeries::new("S", ReturnKind::Raw, dates, v.clone()).unwrap();
        let agg = aggregate_returns(&r, k).unwrap();
        if k == 1 {
            prop_assert_eq!(&agg, &r);
        }
        let full = k * (v.len() / k);
        prop_assert_eq!(agg.len(), v.len() / k);
        let expected: f64 = v[..full].iter().sum();
        prop_assert!((agg.values().iter().sum::<f64>() - expected).abs() < 1e-12);
    }

    #[test]
    fn egarch_filter_respects_floor_and_is_deterministic(
        eps in prop::collection::vec(-0.2f64..0.2, 1..300),
        gamma in -0.99f64..0.99,
        eta in -0.5f64..0.5,
        xi in -0.5f64..0.5,
    ) {
        let p = EgarchParams::new(-0.4 * (1.0 - gamma), gamma, eta, xi).unwrap();
        let a = egarch_filter(&p, &eps, 0.0004);
        // Explosive parameter draws may overflow; that outcome must be reproducible too.
        prop_assert_eq!(&a, &egarch_filter(&p, &eps, 0.0004));
        if let Ok(a) = a {
            prop_assert_eq!(a.sigma.len(), eps.len());
            prop_assert!(a.sigma.iter().all(|s| s * s >= VARIANCE_FLOOR * (1.0 - 1e-12)));
        }
    }

    #[test]
    fn windows_tile_any_span(start in 0u64..2000, len in 1u64..4000, half in any::<bool>()) {
        let w = if half { Windowing::HalfYear } else { Windowing::Quarter };
        let ws = calendar_windows(day(start), day(start + len), w);
        prop_assert_eq!(ws.first().unwrap().start, day(start));
        prop_assert_eq!(ws.last().unwrap().end, day(start + len + 1));
        prop_assert!(ws.windows(2).all(|p| p[0].end == p[1].start));
        prop_assert!(ws.iter().enumerate().all(|(i, x)| x.index == i && x.start < x.end));
    }
}

/// Random add/delete schedules: per stock, a sorted list of distinct toggle
/// days (add, delete, add, ...).
fn schedules() -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::btree_set(0u64..200, 0..6), 1..12)
        .prop_map(|v| v.into_iter().map(|s| s.into_iter().collect()).collect())
}

fn events_of(sched: &[Vec<u64>]) -> Vec<ShortSaleEvent> {
    let mut ev = Vec::new();
    for (i, days) in sched.iter().enumerate() {
        for (j, d) in days.iter().enumerate() {
            let id = format!("S{i}");
            ev.push(if j % 2 == 0 {
                ShortSaleEvent::add(day(*d), id)
            } else {
                ShortSaleEvent::delete(day(*d), id)
            });
        }
    }
    ev
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn replay_counts_match_membership(sched in schedules()) {
        let tl = replay_events(&events_of(&sched)).unwrap();
        for c in tl.counts() {
            let covering = tl
                .intervals()
                .values()
                .flatten()
                .filter(|m| m.contains(c.date))
                .count();
            prop_assert_eq!(c.on_list, covering);
        }
        let added: usize = tl.counts().iter().map(|c| c.added).sum();
        let deleted: usize = tl.counts().iter().map(|c| c.deleted).sum();
        prop_assert_eq!(tl.counts().last().map_or(0, |c| c.on_list), added - deleted);
        for ms in tl.intervals().values() {
            prop_assert!(ms.windows(2).all(|w| w[0].end.is_some_and(|e| e <= w[1].start)));
        }
    }

    #[test]
    fn replay_ignores_input_order(sched in schedules(), seed in any::<u64>()) {
        let ev = events_of(&sched);
        let mut shuffled = ev.clone();
        // Deterministic permutation from the seed.
        let n = shuffled.len();
        let mut s = seed | 1;
        for i in (1..n).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        prop_assert_eq!(replay_events(&ev).unwrap(), replay_events(&shuffled).unwrap());
    }

    #[test]
    fn shortable_dummy_is_monotone(add in 0u64..150, len in 1u64..100, extend in 0u64..60, w0 in 0u64..150, wl in 1u64..120) {
        let calendar = TradingCalendar::new((0..300).map(day).collect()).unwrap();
        let narrow = replay_events(&[
            ShortSaleEvent::add(day(add + extend), "A"),
            ShortSaleEvent::delete(day(add + extend + len), "A"),
        ])
        .unwrap();
        let wide = replay_events(&[
            ShortSaleEvent::add(day(add), "A"),
            ShortSaleEvent::delete(day(add + extend + len + extend), "A"),
        ])
        .unwrap();
        let (s, e) = (day(w0), day(w0 + wl));
        let u_narrow = shortable_dummy("A", s, e, &narrow, &calendar);
        let u_wide = shortable_dummy("A", s, e, &wide, &calendar);
        prop_assert!(u_wide >= u_narrow);
    }
}

fn lcg_column(seed: &mut u64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            *seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn irrelevant_regressor_never_lowers_r2(seed in any::<u64>(), n in 12usize..80) {
        let mut s = seed;
        let x = lcg_column(&mut s, n);
        let z = lcg_column(&mut s, n);
        let noise = lcg_column(&mut s, n);
        let y: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| 2.0 * a + e).collect();
        let small = ols_fit(&y, &design_with_intercept(&[&x])).unwrap();
        let big = ols_fit(&y, &design_with_intercept(&[&x, &z])).unwrap();
        prop_assert!(big.diagnostics.r_squared >= small.diagnostics.r_squared - 1e-12);
    }

    #[test]
    fn within_transformation_matches_dummies(seed in any::<u64>(), n in 40usize..120, g in 2usize..5, t in 2usize..6) {
        let mut s = seed;
        let x1 = lcg_column(&mut s, n);
        let x2 = lcg_column(&mut s, n);
        let e = lcg_column(&mut s, n);
        let ind: Vec<usize> = (0..n).map(|i| i % g).collect();
        let tim: Vec<usize> = (0..n).map(|i| (i / g) % t).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| x1[i] - 0.5 * x2[i] + 0.3 * ind[i] as f64 - 0.2 * tim[i] as f64 + 0.1 * e[i])
            .collect();
        let fe = fe_ols_columns(&y, &[x1.clone(), x2.clone()], &["x1", "x2"], &ind, &tim, StdErrorKind::Classical, None)
            .unwrap();
        let dummies: Vec<Vec<f64>> = (1..g)
            .map(|l| ind.iter().map(|v| f64::from(*v == l)).collect())
            .chain((1..t).map(|l| tim.iter().map(|v| f64::from(*v == l)).collect()))
            .collect();
        let mut cols: Vec<&[f64]> = vec![&x1, &x2];
        cols.extend(dummies.iter().map(Vec::as_slice));
        let full = ols_fit(&y, &design_with_intercept(&cols)).unwrap();
        for j in 0..2 {
            prop_assert!(rel_close(fe.coefficients[j], full.coefficients[j + 1], 1e-8));
            prop_assert!(rel_close(fe.t_stats[j], full.diagnostics.t_stats[j + 1], 1e-8));
        }
        prop_assert!(rel_close(fe.r_squared, full.diagnostics.r_squared, 1e-8));
    }

    #[test]
    fn constant_column_is_collinear_not_nan(seed in any::<u64>(), c in -5.0f64..5.0) {
        let mut s = seed;
        let n = 30;
        let x = lcg_column(&mut s, n);
        let y = lcg_column(&mut s, n);
        let ind: Vec<usize> = (0..n).map(|i| i % 3).collect();
        let tim: Vec<usize> = (0..n).map(|i| (i / 3) % 2).collect();
        let err = fe_ols_columns(&y, &[x, vec![c; n]], &["x", "k"], &ind, &tim, StdErrorKind::Classical, None)
            .unwrap_err();
        prop_assert_eq!(err, Error::Collinear { column: "k".into() });
    }
}
