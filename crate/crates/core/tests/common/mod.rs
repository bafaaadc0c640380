//! Independent reference implementations shared by the integration suites.
#![allow(dead_code, clippy::type_complexity)]

use std::fmt::Display;

/// Prints one verdict line and returns `pass`.
pub fn report(criterion: u32, name: &str, pass: bool, detail: impl Display) -> bool {
    println!("criterion {criterion} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Plain windowed uncentered correlation cost with zero padding.
pub fn cr_reference(rx: &[f64], ry: &[f64], i: usize, j: usize, p: usize) -> f64 {
    let h = (p / 2) as isize;
    let get = |v: &[f64], k: isize| if k < 0 || k >= v.len() as isize { 0.0 } else { v[k as usize] };
    let mut a = Vec::new();
    let mut b = Vec::new();
    for k in -h..=h {
        a.push(get(rx, i as isize + k));
        b.push(get(ry, j as isize + k));
    }
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 2.0;
    }
    let dot: f64 = a.iter().zip(&b).map(|(u, v)| u * v).sum();
    2.0 * (1.0 - dot / (na * nb))
}

/// Visits every monotone unit-step path through a `rows x cols` grid that starts
/// in the `psi` box at the origin and ends in the `psi` box at the far corner.
pub fn for_each_path(rows: usize, cols: usize, psi: usize, mut visit: impl FnMut(&[(usize, usize)])) {
    fn walk(
        rows: usize,
        cols: usize,
        psi: usize,
        path: &mut Vec<(usize, usize)>,
        visit: &mut dyn FnMut(&[(usize, usize)]),
    ) {
        let &(i, j) = path.last().unwrap();
        if i + 1 + psi >= rows && j + 1 + psi >= cols {
            visit(path);
        }
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            if i + di < rows && j + dj < cols {
                path.push((i + di, j + dj));
                walk(rows, cols, psi, path, visit);
                path.pop();
            }
        }
    }
    for i in 0..=psi.min(rows - 1) {
        for j in 0..=psi.min(cols - 1) {
            let mut path = vec![(i, j)];
            walk(rows, cols, psi, &mut path, &mut visit);
        }
    }
}

/// Minimum total cell cost over all admissible paths.
pub fn brute_force_min(rows: usize, cols: usize, psi: usize, cost: impl Fn(usize, usize) -> f64) -> f64 {
    let mut best = f64::INFINITY;
    for_each_path(rows, cols, psi, |p| {
        let c: f64 = p.iter().map(|&(i, j)| cost(i, j)).sum();
        best = best.min(c);
    });
    best
}

/// Minimum spanning-tree weight by enumerating all `n - 1` edge subsets.
pub fn brute_force_mst(d: &[Vec<f64>]) -> f64 {
    let n = d.len();
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let m = edges.len();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut comp: Vec<usize> = (0..n).collect();
        let find = |c: &Vec<usize>, mut x: usize| {
            while c[x] != x {
                x = c[x];
            }
            x
        };
        let mut ok = true;
        let mut w = 0.0;
        for (k, &(i, j)) in edges.iter().enumerate() {
            if mask & (1 << k) != 0 {
                let (a, b) = (find(&comp, i), find(&comp, j));
                if a == b {
                    ok = false;
                    break;
                }
                comp[a] = b;
                w += d[i][j];
            }
        }
        if ok {
            best = best.min(w);
        }
    }
    best
}

/// Sum over ordered pairs of shortest path lengths in the graph given by `edges`.
pub fn all_pairs_path_sum(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        d[a][b] = d[a][b].min(w);
        d[b][a] = d[b][a].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.iter().flatten().sum()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Price panel CSV with ISO timestamps, one column per series.
pub fn panel_csv(labels: &[String], columns: &[Vec<f64>]) -> String {
    let mut s = String::from("timestamp");
    for l in labels {
        s.push(',');
        s.push_str(l);
    }
    s.push('\n');
    let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    for t in 0..columns[0].len() {
        let ts = start + chrono::Duration::minutes(10 * t as i64);
        s.push_str(&ts.format("%Y-%m-%dT%H:%M:%S").to_string());
        for c in columns {
            s.push_str(&format!(",{}", c[t]));
        }
        s.push('\n');
    }
    s
}
