//! Cross-checks against naive reimplementations and property tests for the
//! network dynamics and chart model.

use std::collections::HashMap;

use proptest::prelude::*;

use spcluster::clustering;
use spcluster::hopfield::{self, BipolarState, ConnectionMatrix, DEFAULT_MAX_SWEEPS};
use spcluster::spchart::{self, parse_chart, ScoreVector, SpChart};

/// w_ij straight from the summation, no shared code with the library.
fn naive_hebb(patterns: &[Vec<u8>]) -> Vec<Vec<i32>> {
    let n = patterns[0].len();
    let mut w = vec![vec![0i32; n]; n];
    for (i, row) in w.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            for r in patterns {
                *cell += (2 * r[i] as i32 - 1) * (2 * r[j] as i32 - 1);
            }
        }
    }
    w
}

fn naive_sweep(x: &mut [i32], w: &[Vec<i32>]) {
    for i in 0..x.len() {
        let mut h = 0;
        for k in 0..x.len() {
            h += w[i][k] * x[k];
        }
        x[i] = if h >= 0 { 1 } else { -1 };
    }
}

/// Basin targets from a full table of the sweep map, iterated to its fixed point.
fn trajectory_table_targets(w: &[Vec<i32>]) -> Vec<u32> {
    let n = w.len();
    let decode = |c: u32| -> Vec<i32> {
        (0..n)
            .map(|j| if c >> j & 1 == 1 { 1 } else { -1 })
            .collect()
    };
    let encode = |x: &[i32]| -> u32 {
        x.iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(j, _)| 1u32 << j)
            .sum()
    };
    let table: Vec<u32> = (0..1u32 << n)
        .map(|c| {
            let mut x = decode(c);
            naive_sweep(&mut x, w);
            encode(&x)
        })
        .collect();
    (0..1u32 << n)
        .map(|mut c| {
            while table[c as usize] != c {
                c = table[c as usize];
            }
            c
        })
        .collect()
}

fn patterns(max_m: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    (1..=max_m, 1..=max_n)
        .prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(0..2u8, n), m))
}

fn symmetric(max_n: usize) -> impl Strategy<Value = ConnectionMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-6..=6i32, n * n).prop_map(move |vals| {
            let mut w = ConnectionMatrix::zeros(n);
            for i in 0..n {
                for j in i + 1..n {
                    w.set(i, j, vals[i * n + j]);
                    w.set(j, i, vals[i * n + j]);
                }
            }
            w
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hebb_matches_naive_summation(ps in patterns(6, 9)) {
        let w = hopfield::hebbian_learn(&ps).unwrap();
        prop_assert_eq!(w.to_rows(), naive_hebb(&ps));
        prop_assert!(w.check_stability_condition().is_ok());
        let m = ps.len() as i32;
        for i in 0..w.size() {
            for j in 0..w.size() {
                if i != j {
                    prop_assert!(w.get(i, j).abs() <= m);
                    prop_assert_eq!((w.get(i, j) - m).rem_euclid(2), 0);
                }
            }
        }
    }

    #[test]
    fn local_field_matches_double_loop(w in symmetric(10), seed in any::<u32>()) {
        let n = w.size();
        let s = BipolarState::from_code(seed & ((1 << n) - 1), n);
        for (i, row) in w.to_rows().iter().enumerate() {
            let mut h = 0i64;
            for (k, &wik) in row.iter().enumerate() {
                h += wik as i64 * s.values()[k] as i64;
            }
            prop_assert_eq!(hopfield::local_field(&s, &w, i), h);
        }
    }

    #[test]
    fn basin_map_matches_trajectory_table(w in symmetric(8)) {
        let map = hopfield::basin_map(&w, DEFAULT_MAX_SWEEPS).unwrap();
        let oracle = trajectory_table_targets(&w.to_rows());
        for (code, &target) in oracle.iter().enumerate() {
            prop_assert_eq!(map.target_code(code as u32), target);
        }
        let mut fixed = hopfield::enumerate_fixed_points(&w).unwrap();
        for a in map.attractors() {
            prop_assert!(fixed.contains(&a));
            prop_assert_eq!(map.fixed_point_of(&a), a);
        }
        fixed.retain(|p| map.basin(p).is_empty());
        prop_assert!(fixed.is_empty(), "every fixed point lies in its own basin");
    }

    #[test]
    fn converge_is_idempotent(w in symmetric(10), seed in any::<u32>()) {
        let n = w.size();
        let s = BipolarState::from_code(seed & ((1 << n) - 1), n);
        let r = hopfield::converge(&s, &w, DEFAULT_MAX_SWEEPS).unwrap();
        prop_assert!(r.converged);
        prop_assert!(r.sweeps_used <= 1 << n);
        let again = hopfield::converge(&r.fixed_point, &w, DEFAULT_MAX_SWEEPS).unwrap();
        prop_assert_eq!(again.sweeps_used, 1);
        prop_assert_eq!(again.fixed_point, r.fixed_point);
    }

    #[test]
    fn complement_of_strict_fixed_point_is_fixed(w in symmetric(9)) {
        for p in hopfield::enumerate_fixed_points(&w).unwrap() {
            let strict = (0..w.size()).all(|i| hopfield::local_field(&p, &w, i) != 0);
            if strict {
                let (next, changed) = hopfield::sweep(&p.negated(), &w);
                prop_assert!(!changed);
                prop_assert_eq!(next, p.negated());
            }
        }
    }

    #[test]
    fn caution_against_binary_rates_is_hamming(pairs in prop::collection::vec((0..2u8, 0..2u8), 1..30)) {
        let (bits, rates): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let hamming = bits.iter().zip(&rates).filter(|(a, b)| a != b).count();
        let rates: Vec<f64> = rates.into_iter().map(f64::from).collect();
        let g = spchart::caution_index(&bits, &rates).unwrap();
        prop_assert_eq!(g, hamming as f64 / bits.len() as f64);
    }

    #[test]
    fn csv_round_trip(
        m in (1..12usize, 1..8usize).prop_flat_map(|(l, n)| prop::collection::vec(prop::collection::vec(0..2u8, n), l)),
        names in prop::collection::vec("[a-z][a-z ,\"]{0,6}", 12),
    ) {
        let n = m[0].len();
        let rows: Vec<ScoreVector> = m
            .iter()
            .enumerate()
            .map(|(i, bits)| ScoreVector::new(format!("{}{i}", names[i]), bits.clone()).unwrap())
            .collect();
        let problems = (0..n).map(|j| format!("q{j}")).collect();
        let chart = SpChart::new(rows, problems).unwrap();
        let text = chart.to_csv();
        let back = parse_chart(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &chart);
        prop_assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn rnn_cluster_is_deterministic(
        m in (2..30usize, 2..10usize).prop_flat_map(|(l, n)| prop::collection::vec(prop::collection::vec(0..2u8, n), l)),
        pick in prop::collection::vec(any::<prop::sample::Index>(), 1..5),
    ) {
        let chart = SpChart::from_matrix(m).unwrap();
        let mut reps: Vec<usize> = pick.iter().map(|ix| ix.index(chart.students())).collect();
        reps.dedup();
        let a = clustering::rnn_cluster(&chart, &reps).unwrap();
        let b = clustering::rnn_cluster(&chart, &reps).unwrap();
        prop_assert_eq!(&a, &b);
        // clusters are keyed by distinct fixed points
        let mut seen = HashMap::new();
        for c in &a.clusters {
            prop_assert!(seen.insert(c.fixed_point.clone(), ()).is_none());
        }
        let f2 = clustering::f2(&a).unwrap();
        let homogeneous = a.clusters.iter().all(|c| c.members.iter().all(|&i| chart.row(i) == chart.row(c.members[0])));
        prop_assert_eq!(f2 == 0.0, homogeneous);
    }
}
