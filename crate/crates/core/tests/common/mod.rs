//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::PathBuf;

use qpp_core::fusion::ScoreTable;
use qpp_core::seed::rng_from_seed;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn toy_config_path() -> PathBuf {
    repo_root().join("data/toy/toy.conf")
}

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i:03}")).collect()
}

pub fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("x{j}")).collect()
}

/// n×m standard-normal columns with y = Xβ + noise·ε and β_j = j + 1.
pub fn random_table(n: usize, m: usize, noise: f64, seed: u64) -> ScoreTable {
    let mut rng = rng_from_seed(seed);
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            (0..m).map(|j| (j as f64 + 1.0) * cols[j][i]).sum::<f64>() + noise * e
        })
        .collect();
    ScoreTable::new(ids(n), names(m), cols, Some(y)).unwrap()
}

/// Centered columns with unit norm that are mutually orthogonal
/// (Gram–Schmidt on random draws), plus a random target.
pub fn orthonormal_table(n: usize, m: usize, seed: u64) -> ScoreTable {
    let mut rng = rng_from_seed(seed);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < m {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        for u in &cols {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    ScoreTable::new(ids(n), names(m), cols, Some(y)).unwrap()
}

/// Σ x_j (y − ȳ) for each column: the OLS coefficients under an orthonormal design.
pub fn orthonormal_ols(table: &ScoreTable) -> Vec<f64> {
    let y = table.target().unwrap();
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    (0..table.num_columns())
        .map(|j| table.column(j).iter().zip(y).map(|(x, v)| x * (v - ybar)).sum())
        .collect()
}

pub fn soft(z: f64, g: f64) -> f64 {
    z.signum() * (z.abs() - g).max(0.0)
}

/// τ_b by counting every pair.
pub fn kendall_brute(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == 0.0 {
                tie_a += 1;
            }
            if db == 0.0 {
                tie_b += 1;
            }
            if da != 0.0 && db != 0.0 {
                if (da > 0.0) == (db > 0.0) {
                    conc += 1;
                } else {
                    disc += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let t = (conc - disc) as f64 / (((n0 - tie_a) as f64) * ((n0 - tie_b) as f64)).sqrt();
    t.clamp(-1.0, 1.0)
}

/// Mid-ranks by counting, O(n²).
pub fn ranks_brute(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let equal = v.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn smare_brute(pred: &[f64], ap: &[f64]) -> f64 {
    let n = pred.len() as f64;
    let rp = ranks_brute(pred);
    let ra = ranks_brute(ap);
    rp.iter().zip(&ra).map(|(p, a)| (p - a).abs()).sum::<f64>() / (n * n)
}

/// Tied integer-valued vector of length `n` drawn from `0..levels`.
pub fn tied_vector(rng: &mut impl Rng, n: usize, levels: u32) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0..levels) as f64).collect()
}

/// Values of the frozen toy oracle: header names and rows keyed by query id.
pub fn toy_oracle() -> (Vec<String>, Vec<(String, Vec<f64>)>) {
    let text = std::fs::read_to_string(repo_root().join("crates/core/tests/fixtures/toy_oracle.tsv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split('\t').skip(1).map(String::from).collect();
    let rows = lines
        .map(|l| {
            let mut f = l.split('\t');
            let id = f.next().unwrap().to_string();
            (id, f.map(|v| v.parse().unwrap()).collect())
        })
        .collect();
    (header, rows)
}
