//! Cross-module consistency: sums, predictions and statistics computed by
//! different modules must fit together.

use gpy_core::bv::{estar_aggregate, BvConfig};
use gpy_core::oracle::{g00, main_term_t4, MainTermParams, Scope};
use gpy_core::prime_engine::{ap_error_star_many, sieve_range};
use gpy_core::sieve_weights::{pair_sum_direct, WeightParams};
use gpy_core::singular_series::singular_series;
use gpy_core::tuple_core::{regular_class_count, regular_classes, small_prime_product, TupleH};

fn t(v: &[u64]) -> TupleH {
    TupleH::new(v.iter().copied()).unwrap()
}

#[test]
fn class_sums_add_up_to_the_aggregate() {
    let (h1, h2) = (t(&[0, 2]), t(&[0, 6]));
    let w = WeightParams::new(2, 1, 25.0, 5, 30_000).unwrap();
    let total = pair_sum_direct(&h1, &h2, 1, 1, &w, None).unwrap();
    let classes = regular_classes(&h1.union(&h2), 5).unwrap();
    let by_class: f64 = classes
        .members()
        .iter()
        .map(|&a| pair_sum_direct(&h1, &h2, 1, 1, &w, Some(a)).unwrap())
        .sum();
    assert!((total - by_class).abs() <= 1e-10 * total);
}

#[test]
fn per_class_prediction_times_class_count_is_aggregate() {
    let (h1, h2) = (t(&[0, 2, 6]), t(&[0, 6, 8]));
    let h = h1.union(&h2);
    for v in [2, 3, 5, 7, 11] {
        let p = MainTermParams::new(h1.clone(), h2.clone(), 1, 2, 1e3, 1_000_000, v).unwrap().with_cutoff(50_000);
        let agg = main_term_t4(&p, Scope::Aggregate).unwrap().value.mid;
        let per = main_term_t4(&p, Scope::PerClass).unwrap().value.mid;
        let a = regular_class_count(&h, v).unwrap() as f64;
        assert!((per * a - agg).abs() <= 1e-12 * agg, "V={v}");
        let g = g00(&h, v, 50_000).unwrap();
        let s = singular_series(&h, 50_000).unwrap();
        let back = g.mid * a / small_prime_product(v).unwrap() as f64;
        assert!((back - s.mid).abs() <= s.rad + 1e-14);
    }
}

#[test]
fn estar_aggregate_matches_per_modulus_scans() {
    let x = 200_000;
    let mut cfg = BvConfig::new(x, 30, 10).unwrap();
    cfg.use_estar = true;
    let rep = estar_aggregate(&cfg).unwrap();
    let table = sieve_range(0, x).unwrap();
    let moduli: Vec<u64> = rep.rows.iter().map(|r| 10 * r.q).collect();
    let direct = ap_error_star_many(&table, x, &moduli).unwrap();
    for (row, d) in rep.rows.iter().zip(direct) {
        assert!((row.max_a_deviation - d).abs() <= 1e-9 * d.max(1.0), "q={}", row.q);
    }
}
