//! Brute-force oracles and property checks across module boundaries.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::{BTreeSet, HashMap};

use common::{all_pairs_path_sum, brute_force_min, brute_force_mst, cr_reference, for_each_path};
use leadlag::alignment::optimal_path_for_window;
use leadlag::baselines::{dtw_path, top_lead_lag, TopConfig};
use leadlag::network::{
    build_distance_matrix, minimum_spanning_tree, network_metrics, triangle_audit, DistanceMatrix, MsTree, PathGraph,
};
use leadlag::synthetic::gen_ar1;
use leadlag::{normalize, returns, AcConfig, ReturnSeries, TimeSeries};
use proptest::prelude::*;

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn pinned_path_count_is_central_delannoy() {
    for m in 1..=8usize {
        let mut count = 0u64;
        for_each_path(m, m, 0, |_| count += 1);
        let k = m as u64 - 1;
        let delannoy: u64 = (0..=k).map(|j| binom(k, j) * binom(k + j, j)).sum();
        assert_eq!(count, delannoy, "m = {m}");
    }
}

#[test]
fn relaxed_path_count_grows_with_psi() {
    let mut prev = 0;
    for psi in 0..5 {
        let mut count = 0u64;
        for_each_path(6, 6, psi, |_| count += 1);
        assert!(count > prev);
        prev = count;
    }
}

fn shifted_pair(shift: usize, n: usize, seed: u64) -> (TimeSeries, TimeSeries) {
    let base = gen_ar1(n + shift, 0.7, 1.0, seed).unwrap();
    let x = TimeSeries::new("x", base.values()[shift..].to_vec()).unwrap();
    let y = TimeSeries::new("y", base.values()[..n].to_vec()).unwrap();
    (normalize(&x).unwrap(), normalize(&y).unwrap())
}

fn modal(lags: &[i64]) -> i64 {
    let mut counts: HashMap<i64, usize> = HashMap::new();
    for &l in lags {
        *counts.entry(l).or_default() += 1;
    }
    counts.into_iter().max_by_key(|&(l, c)| (c, -l)).unwrap().0
}

#[test]
fn shift_by_three_is_recovered() {
    for seed in 0..5 {
        let (x, y) = shifted_pair(3, 60, seed);
        let (rx, ry) = (returns(&x).unwrap(), returns(&y).unwrap());
        let w = optimal_path_for_window(&rx, &ry, 5, 5).unwrap();
        assert_eq!(modal(&w.path.lags()), 3, "AC seed {seed}");
        let (d, _) = dtw_path(&x, &y, 5).unwrap();
        assert_eq!(modal(&d.lags()), 3, "DTW seed {seed}");
    }
}

/// Zero-temperature limit of the thermal average: on every anti-diagonal, the
/// offset of the cell with the least forward energy, blended 1/4, 1/2, 1/4.
fn ground_state_profile(x: &[f64], y: &[f64], psi: usize) -> Vec<f64> {
    let n = x.len();
    let mut e = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut best = if i <= psi && j <= psi { 0.0 } else { f64::INFINITY };
            if i > 0 {
                best = best.min(e[i - 1][j]);
            }
            if j > 0 {
                best = best.min(e[i][j - 1]);
            }
            if i > 0 && j > 0 {
                best = best.min(e[i - 1][j - 1]);
            }
            e[i][j] = best + (x[i] - y[j]).abs();
        }
    }
    let diag: Vec<f64> = (0..2 * n - 1)
        .map(|s| {
            let lo = s.saturating_sub(n - 1);
            let i = (lo..=s.min(n - 1)).min_by(|&a, &b| e[a][s - a].partial_cmp(&e[b][s - b]).unwrap()).unwrap();
            (s - i) as f64 - i as f64
        })
        .collect();
    (0..n)
        .map(|t| {
            let (mut acc, mut w) = (0.0, 0.0);
            for (k, wt) in [(2 * t as isize - 1, 0.25), (2 * t as isize, 0.5), (2 * t as isize + 1, 0.25)] {
                if k >= 0 && (k as usize) < diag.len() {
                    acc += wt * diag[k as usize];
                    w += wt;
                }
            }
            acc / w
        })
        .collect()
}

#[test]
fn cold_top_approaches_ground_state() {
    for seed in [31, 32, 33] {
        let (x, y) = shifted_pair(5, 200, seed);
        let ground = ground_state_profile(x.values(), y.values(), TopConfig::DEFAULT_PSI);
        let gaps: Vec<f64> = [0.01, 0.001, 0.0001, 0.00001]
            .iter()
            .map(|&t| {
                let p = top_lead_lag(&x, &y, &TopConfig::new(t)).unwrap();
                p.iter().zip(&ground).map(|(a, b)| (a - b).abs()).sum::<f64>() / 200.0
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {gaps:?}");
        assert!(gaps[3] < 1e-6, "seed {seed}: {gaps:?}");
    }
}

fn random_matrix(weights: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            d[i][j] = weights[k];
            d[j][i] = weights[k];
            k += 1;
        }
    }
    d
}

fn edge_set(t: &MsTree) -> BTreeSet<(usize, usize)> {
    t.edges.iter().map(|e| (e.source.min(e.target), e.source.max(e.target))).collect()
}

fn matrix(d: Vec<Vec<f64>>) -> DistanceMatrix {
    let labels = (0..d.len()).map(|k| format!("N{k}")).collect();
    DistanceMatrix::from_rows(labels, d).unwrap()
}

fn matrix_strategy(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(0.01f64..2.0, n * (n - 1) / 2).prop_map(move |w| random_matrix(&w, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_matches_enumeration(
        x in proptest::collection::vec(-3.0f64..3.0, 3..=7),
        y_seed in proptest::collection::vec(-3.0f64..3.0, 7),
        psi in 0usize..6,
        wide in any::<bool>(),
    ) {
        let m = x.len();
        let y = &y_seed[..m];
        let psi = psi.min(m - 1);
        let p = if wide && m > 5 { 5 } else { 3 };
        let got = optimal_path_for_window(&ReturnSeries::from_values(x.clone()), &ReturnSeries::from_values(y.to_vec()), p, psi).unwrap();
        let want = brute_force_min(m, m, psi, |i, j| cr_reference(&x, y, i, j, p));
        prop_assert!((got.total_cost - want).abs() < 1e-9);
        prop_assert!(got.path.satisfies_boundary(m, m, psi));
    }

    #[test]
    fn mst_matches_enumeration(d in matrix_strategy(6)) {
        let n = d.len();
        let m = matrix(d.clone());
        let t = minimum_spanning_tree(&m);
        prop_assert_eq!(t.edges.len(), n - 1);
        prop_assert!((t.total_weight() - brute_force_mst(&d)).abs() < 1e-12);
        let metrics = network_metrics(&m, &t, PathGraph::Tree).unwrap();
        prop_assert!((metrics.normalized_tree_length * (n - 1) as f64 - t.total_weight()).abs() < 1e-12);
        if n >= 3 {
            prop_assert!(metrics.non_leaf_nodes >= 1 && metrics.non_leaf_nodes <= n - 2);
        }
    }

    #[test]
    fn tree_path_length_matches_floyd(d in matrix_strategy(8)) {
        let n = d.len();
        let m = matrix(d);
        let t = minimum_spanning_tree(&m);
        let edges: Vec<_> = t.edges.iter().map(|e| (e.source, e.target, e.weight)).collect();
        let want = all_pairs_path_sum(n, &edges) / (n * (n - 1)) as f64;
        let got = network_metrics(&m, &t, PathGraph::Tree).unwrap().characterized_path_length;
        prop_assert!((got - want).abs() < 1e-9);
        let full = network_metrics(&m, &t, PathGraph::Complete).unwrap().characterized_path_length;
        prop_assert!(full <= got + 1e-12);
    }

    #[test]
    fn constant_offset_keeps_tree(d in matrix_strategy(7), eps in 0.001f64..1.0) {
        let n = d.len();
        let base = matrix(d.clone());
        let shifted: Vec<Vec<f64>> = d
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, v)| if i == j { 0.0 } else { v + eps }).collect())
            .collect();
        let moved = matrix(shifted);
        let (t0, t1) = (minimum_spanning_tree(&base), minimum_spanning_tree(&moved));
        prop_assert_eq!(edge_set(&t0), edge_set(&t1));
        let m0 = network_metrics(&base, &t0, PathGraph::Tree).unwrap();
        let m1 = network_metrics(&moved, &t1, PathGraph::Tree).unwrap();
        prop_assert!((m1.mean_dissimilarity - m0.mean_dissimilarity - eps).abs() < 1e-12 * n as f64);
    }

    #[test]
    fn relabeling_permutes_tree(d in matrix_strategy(7), seed in any::<u64>()) {
        let n = d.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        // node k of the permuted matrix is node perm[k] of the original
        let permuted: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| d[perm[a]][perm[b]]).collect()).collect();
        let t0 = minimum_spanning_tree(&matrix(d));
        let t1 = minimum_spanning_tree(&matrix(permuted));
        let mapped: BTreeSet<(usize, usize)> = edge_set(&t1)
            .into_iter()
            .map(|(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
            .collect();
        prop_assert_eq!(mapped, edge_set(&t0));
    }
}

#[test]
fn random_panels_keep_pair_invariants() {
    let cfg = AcConfig::default();
    let mut total_violations = 0;
    for panel_seed in 0..3u64 {
        let panel: Vec<TimeSeries> = (0..10)
            .map(|k| {
                normalize(&gen_ar1(250, 0.5, 1.0, 1000 * panel_seed + k).unwrap().relabel(format!("S{k}"))).unwrap()
            })
            .collect();
        let m = build_distance_matrix(&panel, &cfg).unwrap();
        assert_eq!(m.pair_stats().len(), 45);
        for s in m.pair_stats() {
            assert!(s.aligned_correlation >= s.zero_lag_correlation, "{} vs {}", s.x_label, s.y_label);
            assert_eq!(m.get(s.i, s.j), s.ac_distance);
        }
        let audit = triangle_audit(&m);
        assert_eq!(audit.triples_checked, 120);
        total_violations += audit.violations;
    }
    println!("triangle violations over 3 random panels: {total_violations}");
}
