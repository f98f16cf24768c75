//! Orthogonal array generation and strength verification.
//!
//! The generator is the classical Rao-Hamming construction over a finite
//! field: runs are the pairs `(x, y)` in GF(s)^2 and the factor rows are
//! `y`, `x`, and `x + lam*y` for nonzero `lam`, giving an OA(s^2, m, s, 2)
//! for any `m <= s + 1`.

use crate::error::{Error, Result};
use crate::plan::{Factor, MainEffectPlan};

/// Finite field of order `q <= 9` with explicit addition and multiplication
/// tables. Prime orders are the integers mod `q`; the prime-power orders use
/// fixed irreducible polynomials with polynomial-coefficient element codes:
///
/// * GF(4):  x^2 + x + 1 over GF(2)
/// * GF(8):  x^3 + x + 1 over GF(2)
/// * GF(9):  x^2 + x + 2 over GF(3)
#[derive(Debug, Clone)]
pub struct GaloisField {
    pub order: usize,
    add: Vec<Vec<u8>>,
    mul: Vec<Vec<u8>>,
}

pub const SUPPORTED_ORDERS: [usize; 7] = [2, 3, 4, 5, 7, 8, 9];

impl GaloisField {
    pub fn new(q: usize) -> Result<GaloisField> {
        let (p, k, modulus): (usize, u32, &[usize]) = match q {
            2 | 3 | 5 | 7 => (q, 1, &[]),
            4 => (2, 2, &[1, 1, 1]),    // x^2 + x + 1
            8 => (2, 3, &[1, 1, 0, 1]), // x^3 + x + 1
            9 => (3, 2, &[2, 1, 1]),    // x^2 + x + 2
            _ => {
                return Err(Error::BadParams(format!(
                    "unsupported field order {q}; supported: {SUPPORTED_ORDERS:?}"
                )))
            }
        };
        let mut add = vec![vec![0u8; q]; q];
        let mut mul = vec![vec![0u8; q]; q];
        for a in 0..q {
            for b in 0..q {
                add[a][b] = poly_add(a, b, p, k) as u8;
                mul[a][b] = poly_mul(a, b, p, k, modulus) as u8;
            }
        }
        let field = GaloisField { order: q, add, mul };
        field.verify_axioms()?;
        Ok(field)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a][b] as usize
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b] as usize
    }

    /// Exhaustive check of the field axioms on the tables: commutativity,
    /// associativity, identities, inverses and distributivity.
    fn verify_axioms(&self) -> Result<()> {
        let q = self.order;
        let fail = |law: &str| Err(Error::BadParams(format!("field axiom failed: {law}")));
        for a in 0..q {
            if self.add(a, 0) != a {
                return fail("additive identity");
            }
            if self.mul(a, 1) != a {
                return fail("multiplicative identity");
            }
            if !(0..q).any(|b| self.add(a, b) == 0) {
                return fail("additive inverse");
            }
            if a != 0 && !(0..q).any(|b| self.mul(a, b) == 1) {
                return fail("multiplicative inverse");
            }
            for b in 0..q {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return fail("commutativity");
                }
                for c in 0..q {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return fail("additive associativity");
                    }
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return fail("multiplicative associativity");
                    }
                    if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                        return fail("distributivity");
                    }
                }
            }
        }
        Ok(())
    }
}

fn to_digits(mut a: usize, p: usize, k: u32) -> Vec<usize> {
    let mut d = vec![0; k as usize];
    for digit in d.iter_mut() {
        *digit = a % p;
        a /= p;
    }
    d
}

fn from_digits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &x| acc * p + x)
}

fn poly_add(a: usize, b: usize, p: usize, k: u32) -> usize {
    let da = to_digits(a, p, k);
    let db = to_digits(b, p, k);
    let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
    from_digits(&sum, p)
}

fn poly_mul(a: usize, b: usize, p: usize, k: u32, modulus: &[usize]) -> usize {
    if k == 1 {
        return (a * b) % p;
    }
    let da = to_digits(a, p, k);
    let db = to_digits(b, p, k);
    let mut prod = vec![0usize; 2 * k as usize];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // reduce modulo the irreducible polynomial (monic, degree k):
    // x^k = -(modulus[0] + modulus[1] x + ... + modulus[k-1] x^{k-1})
    for i in (k as usize..prod.len()).rev() {
        let coeff = prod[i];
        if coeff == 0 {
            continue;
        }
        prod[i] = 0;
        for (j, &mj) in modulus.iter().take(k as usize).enumerate() {
            let sub = (coeff * mj) % p;
            prod[i - k as usize + j] = (prod[i - k as usize + j] + p - sub) % p;
        }
    }
    from_digits(&prod[..k as usize], p)
}

/// Parameters of a (possibly mixed-level) orthogonal array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalArraySpec {
    pub runs: usize,
    pub factors: usize,
    pub levels: Vec<usize>,
    pub strength: usize,
}

impl OrthogonalArraySpec {
    pub fn symmetric(runs: usize, factors: usize, s: usize, strength: usize) -> Result<Self> {
        if strength > factors {
            return Err(Error::BadParams("strength exceeds factor count".into()));
        }
        if !runs.is_multiple_of(s.pow(strength as u32)) {
            return Err(Error::BadParams(format!(
                "{runs} runs not divisible by {s}^{strength}"
            )));
        }
        Ok(OrthogonalArraySpec {
            runs,
            factors,
            levels: vec![s; factors],
            strength,
        })
    }

    pub fn of_plan(plan: &MainEffectPlan, strength: usize) -> OrthogonalArraySpec {
        OrthogonalArraySpec {
            runs: plan.n(),
            factors: plan.m(),
            levels: plan.factors.iter().map(|f| f.levels).collect(),
            strength,
        }
    }

    pub fn matches(&self, plan: &MainEffectPlan) -> bool {
        plan.n() == self.runs
            && plan.m() == self.factors
            && plan.factors.iter().map(|f| f.levels).collect::<Vec<_>>() == self.levels
            && verify_strength(plan, self.strength)
    }
}

/// Rao-Hamming OA(s^2, m, s, 2) for prime-power `s <= 9` and `2 <= m <= s+1`.
///
/// Run `u = x*s + y` carries factor values `y`, `x`, `x + lam*y`
/// (`lam = 1, .., s-1` in field-code order), truncated to the first `m`.
pub fn build_oa(s: usize, m: usize) -> Result<MainEffectPlan> {
    let field = GaloisField::new(s)?;
    if !(2..=s + 1).contains(&m) {
        return Err(Error::BadParams(format!(
            "factor count {m} out of range 2..={} for {s}-level Rao-Hamming array",
            s + 1
        )));
    }
    let n = s * s;
    let mut rows = vec![vec![0usize; n]; m];
    for x in 0..s {
        for y in 0..s {
            let u = x * s + y;
            rows[0][u] = y;
            if m > 1 {
                rows[1][u] = x;
            }
            for lam in 1..s {
                if lam + 1 >= m {
                    break;
                }
                rows[lam + 1][u] = field.add(x, field.mul(lam, y));
            }
        }
    }
    let factors = (0..m)
        .map(|i| Factor::new(format!("F{}", i + 1), s))
        .collect();
    Ok(MainEffectPlan::new(
        format!("OA({n},{m},{s},2)"),
        factors,
        rows,
    ))
}

/// True iff in every `t`-subset of rows each level `t`-tuple occurs exactly
/// `n / prod(levels)` times. Handles mixed level counts.
pub fn verify_strength(plan: &MainEffectPlan, t: usize) -> bool {
    let m = plan.m();
    if t > m {
        return false;
    }
    if t == 0 {
        return true;
    }
    let mut subset: Vec<usize> = (0..t).collect();
    loop {
        if !strength_on_rows(plan, &subset) {
            return false;
        }
        // next t-combination of {0..m-1}
        let mut i = t;
        loop {
            if i == 0 {
                return true;
            }
            i -= 1;
            if subset[i] != i + m - t {
                subset[i] += 1;
                for j in i + 1..t {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn strength_on_rows(plan: &MainEffectPlan, rows: &[usize]) -> bool {
    let mut cells = 1usize;
    for &i in rows {
        cells = match cells.checked_mul(plan.levels(i)) {
            Some(c) => c,
            None => return false,
        };
    }
    if !plan.n().is_multiple_of(cells) {
        return false;
    }
    let expected = (plan.n() / cells) as u64;
    let mut counts = vec![0u64; cells];
    for u in 0..plan.n() {
        let mut idx = 0usize;
        for &i in rows {
            idx = idx * plan.levels(i) + plan.rows[i][u];
        }
        counts[idx] += 1;
    }
    counts.iter().all(|&c| c == expected)
}
