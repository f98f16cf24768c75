//! Shared helpers for the integration and acceptance suites: a small
//! deterministic RNG and an independent least-squares oracle that avoids the
//! library's eigendecomposition path entirely.

use mep::plan::MainEffectPlan;

/// SplitMix64; deterministic across platforms.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u = (1.0 - self.uniform()).max(f64::MIN_POSITIVE);
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.gaussian()).collect()
    }
}

/// Residual sum of squares of the full additive model, fitted by modified
/// Gram-Schmidt with one reorthogonalization pass. Independent of the
/// library's projector/pseudo-inverse route.
pub fn residual_ss_oracle(plan: &MainEffectPlan, y: &[f64]) -> f64 {
    let n = plan.n();
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for i in 0..plan.m() {
        for level in 0..plan.levels(i) {
            columns.push(
                (0..n)
                    .map(|u| if plan.rows[i][u] == level { 1.0 } else { 0.0 })
                    .collect(),
            );
        }
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for col in columns {
        let mut v = col.clone();
        let orig = norm(&v);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * orig.max(1.0) {
            for vi in v.iter_mut() {
                *vi /= nv;
            }
            basis.push(v);
        }
    }
    let mut r = y.to_vec();
    for q in &basis {
        let c = dot(q, &r);
        for (ri, qi) in r.iter_mut().zip(q) {
            *ri -= c * qi;
        }
    }
    dot(&r, &r)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A random plan with every declared level used at least once. Not
/// necessarily connected; callers filter.
pub fn random_plan(rng: &mut Rng, m: usize, n: usize, max_levels: usize) -> MainEffectPlan {
    let rows: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let a = 2 + rng.below(max_levels - 1);
            loop {
                let row: Vec<usize> = (0..n).map(|_| rng.below(a)).collect();
                let used = row.iter().collect::<std::collections::BTreeSet<_>>().len();
                if used == a {
                    return row;
                }
            }
        })
        .collect();
    MainEffectPlan::from_rows("random", rows)
}
