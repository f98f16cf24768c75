//! Linear-model analysis of main effect plans.
//!
//! The additive fixed-effects model treats the general mean as an extra
//! factor block, so index sets below range over `0..=m` where `m` (the value
//! returned by [`mean_index`]) denotes the all-ones block. The central
//! objects are the reduced-normal-equation matrices
//! `C_{S,T;U} = X_S' (I - P_U) X_T` and vectors `Q_{S;U} = X_S' (I - P_U) Y`,
//! from which adjusted sums of squares, ANOVA tables, connectedness and BLUE
//! covariances are all derived. Rank decisions use the eigendecomposition
//! kernel in [`linalg`] with its relative threshold.

pub mod linalg;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ortho;
use crate::plan::{ClassPartition, MainEffectPlan};
use linalg::{dot, pinv_sym, projector, solve, sym_rank, Mat};

/// Index of the all-ones (general mean) block of a plan.
pub fn mean_index(plan: &MainEffectPlan) -> usize {
    plan.m()
}

/// Design blocks and raw totals for a plan/response pair.
pub struct ModelMatrix {
    /// `blocks[i]` is the n x a_i 0/1 design matrix of factor `i`;
    /// `blocks[m]` is the all-ones column.
    pub blocks: Vec<Mat>,
    /// Horizontal concatenation of all blocks (mean last).
    pub full: Mat,
    pub y: Vec<f64>,
    /// Raw level totals `T_i = X_i' Y`; `totals[m]` has the single entry `G`.
    pub totals: Vec<Vec<f64>>,
    pub grand_total: f64,
}

impl ModelMatrix {
    pub fn new(plan: &MainEffectPlan, y: &[f64]) -> Result<ModelMatrix> {
        if y.len() != plan.n() {
            return Err(Error::DataMismatch(format!(
                "{} responses for {} runs",
                y.len(),
                plan.n()
            )));
        }
        let mut blocks = Vec::with_capacity(plan.m() + 1);
        for i in 0..plan.m() {
            blocks.push(design_block(plan, i));
        }
        blocks.push(ones_block(plan.n()));
        let full = hconcat(&blocks.iter().collect::<Vec<_>>());
        let totals: Vec<Vec<f64>> = blocks.iter().map(|b| b.transpose().mul_vec(y)).collect();
        let grand_total = y.iter().sum();
        Ok(ModelMatrix {
            blocks,
            full,
            y: y.to_vec(),
            totals,
            grand_total,
        })
    }
}

fn design_block(plan: &MainEffectPlan, i: usize) -> Mat {
    let mut x = Mat::zeros(plan.n(), plan.levels(i));
    for (u, &v) in plan.rows[i].iter().enumerate() {
        x[(u, v)] = 1.0;
    }
    x
}

fn ones_block(n: usize) -> Mat {
    let mut x = Mat::zeros(n, 1);
    for i in 0..n {
        x[(i, 0)] = 1.0;
    }
    x
}

fn hconcat(blocks: &[&Mat]) -> Mat {
    let rows = blocks.first().map(|b| b.rows).unwrap_or(0);
    let cols = blocks.iter().map(|b| b.cols).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                out[(i, off + j)] = b[(i, j)];
            }
        }
        off += b.cols;
    }
    out
}

fn block_width(plan: &MainEffectPlan, i: usize) -> usize {
    if i == mean_index(plan) {
        1
    } else {
        plan.levels(i)
    }
}

fn check_set(plan: &MainEffectPlan, set: &[usize], what: &'static str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &i in set {
        if i > mean_index(plan) {
            return Err(Error::IndexOutOfRange {
                what,
                index: i,
                len: mean_index(plan) + 1,
            });
        }
        if !seen.insert(i) {
            return Err(Error::DuplicateIndex { what, index: i });
        }
    }
    Ok(())
}

fn design_for_set(plan: &MainEffectPlan, set: &[usize]) -> Mat {
    let blocks: Vec<Mat> = set
        .iter()
        .map(|&i| {
            if i == mean_index(plan) {
                ones_block(plan.n())
            } else {
                design_block(plan, i)
            }
        })
        .collect();
    if blocks.is_empty() {
        Mat::zeros(plan.n(), 0)
    } else {
        hconcat(&blocks.iter().collect::<Vec<_>>())
    }
}

/// `I - P_U` applied from scratch. An empty `U` gives the identity.
fn residual_projector(plan: &MainEffectPlan, u_set: &[usize]) -> Mat {
    let n = plan.n();
    if u_set.is_empty() {
        return Mat::identity(n);
    }
    Mat::identity(n).sub(&projector(&design_for_set(plan, u_set)))
}

/// Orthogonal projector onto the column space of an arbitrary real matrix.
pub fn plan_projector(m: &Mat) -> Mat {
    projector(m)
}

/// The block matrix `C_{S,T;U}` with its row/column block layout.
pub struct CMatrix {
    pub matrix: Mat,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub u: Vec<usize>,
    s_offsets: Vec<usize>,
    t_offsets: Vec<usize>,
}

impl CMatrix {
    /// The `(i, j)` block for `i` in S, `j` in T (given by position).
    pub fn block(&self, si: usize, tj: usize, plan: &MainEffectPlan) -> Mat {
        let (r0, rw) = (self.s_offsets[si], block_width(plan, self.s[si]));
        let (c0, cw) = (self.t_offsets[tj], block_width(plan, self.t[tj]));
        let mut out = Mat::zeros(rw, cw);
        for i in 0..rw {
            for j in 0..cw {
                out[(i, j)] = self.matrix[(r0 + i, c0 + j)];
            }
        }
        out
    }
}

fn offsets(plan: &MainEffectPlan, set: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(set.len());
    let mut off = 0;
    for &i in set {
        out.push(off);
        off += block_width(plan, i);
    }
    out
}

/// `C_{S,T;U} = X_S' (I - P_U) X_T`.
///
/// Requires `S` and `U` disjoint, `T` and `U` disjoint, and either `S = T`
/// or `S` and `T` disjoint.
pub fn c_matrix(plan: &MainEffectPlan, s: &[usize], t: &[usize], u: &[usize]) -> Result<CMatrix> {
    check_set(plan, s, "S")?;
    check_set(plan, t, "T")?;
    check_set(plan, u, "U")?;
    let su: BTreeSet<_> = s.iter().collect();
    let tu: BTreeSet<_> = t.iter().collect();
    let uu: BTreeSet<_> = u.iter().collect();
    if su.intersection(&uu).next().is_some() || tu.intersection(&uu).next().is_some() {
        return Err(Error::BadParams("S and T must be disjoint from U".into()));
    }
    if su != tu && su.intersection(&tu).next().is_some() {
        return Err(Error::BadParams("S and T must be equal or disjoint".into()));
    }
    let r = residual_projector(plan, u);
    let xs = design_for_set(plan, s);
    let xt = design_for_set(plan, t);
    let matrix = xs.transpose().mul(&r).mul(&xt);
    Ok(CMatrix {
        matrix,
        s: s.to_vec(),
        t: t.to_vec(),
        u: u.to_vec(),
        s_offsets: offsets(plan, s),
        t_offsets: offsets(plan, t),
    })
}

/// `Q_{S;U} = X_S' (I - P_U) Y`, blocked like the rows of `C_{S,*;U}`.
pub struct QVector {
    pub vector: Vec<f64>,
    pub s: Vec<usize>,
    pub u: Vec<usize>,
    s_offsets: Vec<usize>,
}

impl QVector {
    pub fn block(&self, si: usize, plan: &MainEffectPlan) -> Vec<f64> {
        let off = self.s_offsets[si];
        let w = block_width(plan, self.s[si]);
        self.vector[off..off + w].to_vec()
    }
}

pub fn q_vector(plan: &MainEffectPlan, y: &[f64], s: &[usize], u: &[usize]) -> Result<QVector> {
    check_set(plan, s, "S")?;
    check_set(plan, u, "U")?;
    if y.len() != plan.n() {
        return Err(Error::DataMismatch(format!(
            "{} responses for {} runs",
            y.len(),
            plan.n()
        )));
    }
    let r = residual_projector(plan, u);
    let xs = design_for_set(plan, s);
    let vector = xs.transpose().mul_vec(&r.mul_vec(y));
    Ok(QVector {
        vector,
        s: s.to_vec(),
        u: u.to_vec(),
        s_offsets: offsets(plan, s),
    })
}

/// Sum of squares for the combined factors of `S`, adjusted for the factors
/// of `T`: `SS_{S;T} = Q'_{S;T} (C_{S,S;T})^- Q_{S;T}`.
pub fn adjusted_ss(plan: &MainEffectPlan, y: &[f64], s: &[usize], t: &[usize]) -> Result<f64> {
    let c = c_matrix(plan, s, s, t)?;
    let q = q_vector(plan, y, s, t)?;
    let sol = pinv_sym(&c.matrix).mul_vec(&q.vector);
    Ok(dot(&q.vector, &sol))
}

/// Same quantity through a bordered solve instead of the pseudo-inverse:
/// the singular system `C x = Q` is augmented with one zero-sum constraint
/// per factor block. Exists to cross-check g-inverse invariance.
pub fn adjusted_ss_bordered(
    plan: &MainEffectPlan,
    y: &[f64],
    s: &[usize],
    t: &[usize],
) -> Result<f64> {
    let c = c_matrix(plan, s, s, t)?;
    let q = q_vector(plan, y, s, t)?;
    let k = c.matrix.rows;
    let nb = s.len();
    let mut a = Mat::zeros(k + nb, k + nb);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = c.matrix[(i, j)];
        }
    }
    for (bi, &fi) in s.iter().enumerate() {
        let off = c.s_offsets[bi];
        for j in 0..block_width(plan, fi) {
            a[(k + bi, off + j)] = 1.0;
            a[(off + j, k + bi)] = 1.0;
        }
    }
    let mut rhs = q.vector.clone();
    rhs.extend(std::iter::repeat_n(0.0, nb));
    let x = solve(&a, &rhs).ok_or_else(|| {
        Error::Precondition("bordered system singular; factor set not connected".into())
    })?;
    Ok(dot(&q.vector, &x[..k]))
}

/// Everything except factor `i` (mean included).
fn all_others(plan: &MainEffectPlan, i: usize) -> Vec<usize> {
    (0..plan.m())
        .filter(|&j| j != i)
        .chain([mean_index(plan)])
        .collect()
}

/// A solution of the reduced normal equations `C_{i;i-bar} a = Q_{i;i-bar}`
/// for factor `i`. Only zero-sum contrasts of the result are estimable.
pub fn reduced_normal_solution(plan: &MainEffectPlan, y: &[f64], i: usize) -> Result<Vec<f64>> {
    let others = all_others(plan, i);
    let c = c_matrix(plan, &[i], &[i], &others)?;
    let rank = sym_rank(&c.matrix);
    if rank != plan.levels(i) - 1 {
        return Err(Error::NotConnected {
            factor: plan.factors[i].name.clone(),
            rank,
            expected: plan.levels(i) - 1,
        });
    }
    let q = q_vector(plan, y, &[i], &others)?;
    Ok(pinv_sym(&c.matrix).mul_vec(&q.vector))
}

/// BLUE of the contrast `l' alpha` given a reduced-normal-equation solution.
pub fn contrast_estimate(solution: &[f64], l: &[f64]) -> Result<f64> {
    if l.len() != solution.len() {
        return Err(Error::DimensionMismatch(
            "contrast length differs from level count".into(),
        ));
    }
    let scale = l.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if l.iter().sum::<f64>().abs() > 1e-12 * scale {
        return Err(Error::Precondition(
            "only zero-sum contrasts are estimable".into(),
        ));
    }
    Ok(dot(solution, l))
}

/// Per-factor connectedness: `rank(C_{i;i-bar}) = a_i - 1`.
pub fn is_connected(plan: &MainEffectPlan) -> Result<Vec<bool>> {
    let mut out = Vec::with_capacity(plan.m());
    for i in 0..plan.m() {
        let c = c_matrix(plan, &[i], &[i], &all_others(plan, i))?;
        out.push(sym_rank(&c.matrix) == plan.levels(i) - 1);
    }
    Ok(out)
}

fn require_connected(plan: &MainEffectPlan) -> Result<()> {
    for (i, ok) in is_connected(plan)?.iter().enumerate() {
        if !ok {
            return Err(Error::NotConnected {
                factor: plan.factors[i].name.clone(),
                rank: 0,
                expected: plan.levels(i) - 1,
            });
        }
    }
    Ok(())
}

/// One source line of an ANOVA table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaRow {
    pub source: String,
    pub df: usize,
    /// Sum of squares adjusted for all other factors.
    pub ss_adj_all: f64,
    /// Sum of squares adjusted for the factors after this one (and the mean).
    pub ss_adj_next: f64,
    /// `(ss_adj_all / df) / (ss_error / error_df)`; absent on saturated plans.
    pub f_stat: Option<f64>,
}

/// ANOVA table for an additive main-effects model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
    pub ss_sub: f64,
    pub ss_error: f64,
    pub ss_total: f64,
    pub error_df: usize,
    /// `ss_error / error_df`; absent when the plan is saturated.
    pub variance_estimate: Option<f64>,
    pub saturated: bool,
}

impl AnovaTable {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let w = self
            .rows
            .iter()
            .map(|r| r.source.len())
            .max()
            .unwrap_or(6)
            .max(6);
        out.push_str(&format!(
            "{:w$}  {:>4}  {:>14}  {:>14}  {:>10}\n",
            "source", "df", "SS(adj all)", "SS(adj next)", "F"
        ));
        for r in &self.rows {
            let f = r
                .f_stat
                .map(|v| format!("{v:10.4}"))
                .unwrap_or_else(|| format!("{:>10}", "-"));
            out.push_str(&format!(
                "{:w$}  {:>4}  {:14.6}  {:14.6}  {}\n",
                r.source, r.df, r.ss_adj_all, r.ss_adj_next, f
            ));
        }
        out.push_str(&format!(
            "{:w$}  {:>4}  {:>14}  {:14.6}\n",
            "(sub)", "", "", self.ss_sub
        ));
        out.push_str(&format!(
            "{:w$}  {:>4}  {:>14}  {:14.6}\n",
            "error", self.error_df, "", self.ss_error
        ));
        out.push_str(&format!(
            "{:w$}  {:>4}  {:>14}  {:14.6}\n",
            "total",
            self.rows.iter().map(|r| r.df).sum::<usize>() + self.error_df,
            "",
            self.ss_total
        ));
        match self.variance_estimate {
            Some(v) => out.push_str(&format!("variance estimate: {v:.6}\n")),
            None => out.push_str("saturated plan: no error degrees of freedom\n"),
        }
        out
    }
}

fn ss_total_of(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let g: f64 = y.iter().sum();
    y.iter().map(|v| v * v).sum::<f64>() - g * g / n
}

fn table_from_parts(
    plan: &MainEffectPlan,
    ss_all: Vec<f64>,
    ss_next: Vec<f64>,
    ss_total: f64,
) -> AnovaTable {
    let m = plan.m();
    let sum_df: usize = plan.factors.iter().map(|f| f.levels - 1).sum();
    let e = plan.n() - 1 - sum_df;
    let ss_sub: f64 = ss_next.iter().sum();
    let ss_error = ss_total - ss_sub;
    let saturated = e == 0;
    let variance = if saturated {
        None
    } else {
        Some(ss_error / e as f64)
    };
    let rows = (0..m)
        .map(|i| {
            let df = plan.levels(i) - 1;
            let f_stat = variance
                .filter(|&v| v != 0.0)
                .map(|v| (ss_all[i] / df as f64) / v);
            AnovaRow {
                source: plan.factors[i].name.clone(),
                df,
                ss_adj_all: ss_all[i],
                ss_adj_next: ss_next[i],
                f_stat,
            }
        })
        .collect();
    AnovaTable {
        rows,
        ss_sub,
        ss_error,
        ss_total,
        error_df: e,
        variance_estimate: variance,
        saturated,
    }
}

fn check_error_df(plan: &MainEffectPlan) -> Result<()> {
    let sum_df: usize = plan.factors.iter().map(|f| f.levels - 1).sum();
    if plan.n() < 1 + sum_df {
        return Err(Error::Precondition(format!(
            "negative error degrees of freedom: n-1 = {} < sum of factor df = {}",
            plan.n() - 1,
            sum_df
        )));
    }
    Ok(())
}

/// General ANOVA of a connected plan: per factor the fully adjusted and the
/// adjusted-for-the-next-ones sums of squares, the subtraction row, and the
/// error line `SS_E = SS_tot - SS_sub`.
pub fn anova(plan: &MainEffectPlan, y: &[f64]) -> Result<AnovaTable> {
    plan.validate()?;
    check_error_df(plan)?;
    require_connected(plan)?;
    let m = plan.m();
    let mean = mean_index(plan);
    let mut ss_all = Vec::with_capacity(m);
    let mut ss_next = Vec::with_capacity(m);
    for i in 0..m {
        ss_all.push(adjusted_ss(plan, y, &[i], &all_others(plan, i))?);
        let next: Vec<usize> = ((i + 1)..m).chain([mean]).collect();
        ss_next.push(adjusted_ss(plan, y, &[i], &next)?);
    }
    Ok(table_from_parts(plan, ss_all, ss_next, ss_total_of(y)))
}

/// Simplifications available for factor `i` (Addelman-style collapse and
/// orthogonality through the last factor).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simplification {
    /// `SS_{i;all} = SS_{i;mean}` holds iff factor `i` satisfies the
    /// proportional frequency condition with every other factor.
    pub pfc_collapse: bool,
    /// `SS_{i;all} = SS_{i;last}` holds iff `N_ij = N_im R_m^{-1} N_mj` for
    /// every other non-last factor `j`. `None` when `i` is the last factor
    /// or the plan has fewer than three factors.
    pub through_last: Option<bool>,
}

pub fn check_simplification(plan: &MainEffectPlan, i: usize) -> Result<Simplification> {
    let m = plan.m();
    if i >= m {
        return Err(Error::IndexOutOfRange {
            what: "factor",
            index: i,
            len: m,
        });
    }
    let mut pfc_collapse = true;
    for j in 0..m {
        if j != i && !ortho::check_pfc(plan, i, j)? {
            pfc_collapse = false;
            break;
        }
    }
    let last = m - 1;
    let through_last = if m < 3 || i == last {
        None
    } else {
        let mut ok = true;
        for j in 0..last {
            if j != i && !ortho::orthogonal_through(plan, i, j, last)? {
                ok = false;
                break;
            }
        }
        Some(ok)
    };
    Ok(Simplification {
        pfc_collapse,
        through_last,
    })
}

/// Direct incidence-arithmetic form of the two-factor reduced equations:
/// `C_{i;j} = R_i - N_ij R_j^{-1} N_ji` and
/// `Q_{i;j} = T_i - N_ij R_j^{-1} T_j`.
pub fn reduced_equation_direct(
    plan: &MainEffectPlan,
    y: &[f64],
    i: usize,
    j: usize,
) -> Result<(Mat, Vec<f64>)> {
    let inc = plan.incidence(i, j)?;
    for (lv, &r) in inc.r_b.iter().enumerate() {
        if r == 0 {
            return Err(Error::UnusedLevel {
                factor: plan.factors[j].name.clone(),
                level: lv,
            });
        }
    }
    let (a, b) = (plan.levels(i), plan.levels(j));
    let mut c = Mat::zeros(a, a);
    for p in 0..a {
        c[(p, p)] = inc.r_a[p] as f64;
        for q in 0..a {
            let mut s = 0.0;
            for k in 0..b {
                s += inc.n_ab[p][k] as f64 * inc.n_ab[q][k] as f64 / inc.r_b[k] as f64;
            }
            c[(p, q)] -= s;
        }
    }
    let model = ModelMatrix::new(plan, y)?;
    let ti = &model.totals[i];
    let tj = &model.totals[j];
    let mut q = ti.clone();
    for p in 0..a {
        for k in 0..b {
            q[p] -= inc.n_ab[p][k] as f64 / inc.r_b[k] as f64 * tj[k];
        }
    }
    Ok((c, q))
}

/// Shortcut ANOVA for a plan in which every pair of non-last factors is
/// orthogonal through the last factor: each such factor is adjusted for the
/// last factor only, and the error line is
/// `SS_E = SS_tot - sum_j SS_{j;last} - SS_{last;mean}`.
/// The table equals the general [`anova`] table cell by cell.
pub fn analyze_through(plan: &MainEffectPlan, y: &[f64], through: usize) -> Result<AnovaTable> {
    plan.validate()?;
    let m = plan.m();
    if through != m - 1 {
        return Err(Error::Precondition(
            "the through-factor must be the last factor; reorder with subarray first".into(),
        ));
    }
    for i in 0..m - 1 {
        for j in (i + 1)..m - 1 {
            if !ortho::orthogonal_through(plan, i, j, through)? {
                return Err(Error::Precondition(format!(
                    "factors {} and {} are not orthogonal through {}; use the general anova",
                    plan.factors[i].name, plan.factors[j].name, plan.factors[through].name
                )));
            }
        }
    }
    check_error_df(plan)?;
    require_connected(plan)?;
    let mean = mean_index(plan);
    let mut ss_all = vec![0.0; m];
    let mut ss_next = vec![0.0; m];
    for i in 0..m - 1 {
        let (c, q) = reduced_equation_direct(plan, y, i, through)?;
        let sol = pinv_sym(&c).mul_vec(&q);
        let ss = dot(&q, &sol);
        ss_all[i] = ss;
        ss_next[i] = ss;
    }
    ss_next[through] = adjusted_ss(plan, y, &[through], &[mean])?;
    ss_all[through] = adjusted_ss(plan, y, &[through], &all_others(plan, through))?;
    Ok(table_from_parts(plan, ss_all, ss_next, ss_total_of(y)))
}

/// Shortcut ANOVA for an inter-class orthogonal plan: every factor is
/// adjusted only within its own class, and the error line subtracts the
/// class totals from the total sum of squares. With the partition's classes
/// laid out along the plan's factor order the table equals the general
/// [`anova`] table cell by cell.
pub fn analyze_interclass(
    plan: &MainEffectPlan,
    partition: &ClassPartition,
    y: &[f64],
) -> Result<AnovaTable> {
    plan.validate()?;
    partition.validate(plan.m())?;
    if !ortho::verify_interclass(plan, partition)? {
        return Err(Error::Precondition(
            "partition is not inter-class orthogonal".into(),
        ));
    }
    check_error_df(plan)?;
    require_connected(plan)?;
    let m = plan.m();
    let mean = mean_index(plan);
    let mut ss_all = vec![0.0; m];
    let mut ss_next = vec![0.0; m];
    for class in &partition.classes {
        for &f in class {
            let others: Vec<usize> = class
                .iter()
                .copied()
                .filter(|&g| g != f)
                .chain([mean])
                .collect();
            ss_all[f] = adjusted_ss(plan, y, &[f], &others)?;
            let next: Vec<usize> = class
                .iter()
                .copied()
                .filter(|&g| g > f)
                .chain([mean])
                .collect();
            ss_next[f] = adjusted_ss(plan, y, &[f], &next)?;
        }
    }
    Ok(table_from_parts(plan, ss_all, ss_next, ss_total_of(y)))
}

/// Class total of one class of an inter-class orthogonal plan whose members
/// are all orthogonal through the class's last factor:
/// `SS_total = sum_j SS_{j;last} + SS_{last;mean}`.
pub fn class_total_through(plan: &MainEffectPlan, class: &[usize], y: &[f64]) -> Result<f64> {
    let &last = class
        .last()
        .ok_or_else(|| Error::BadParams("empty class".into()))?;
    let mean = mean_index(plan);
    let mut total = adjusted_ss(plan, y, &[last], &[mean])?;
    for &f in &class[..class.len() - 1] {
        let (c, q) = reduced_equation_direct(plan, y, f, last)?;
        let sol = pinv_sym(&c).mul_vec(&q);
        total += dot(&q, &sol);
    }
    Ok(total)
}

/// A factorial effect for the general-factorial extension of the ANOVA:
/// either a main effect or a two-factor interaction, whose design block is
/// the row-wise product pattern of the two factors' blocks (one column per
/// level pair).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectSpec {
    Main(usize),
    Interaction(usize, usize),
}

impl EffectSpec {
    fn label(&self, plan: &MainEffectPlan) -> String {
        match *self {
            EffectSpec::Main(i) => plan.factors[i].name.clone(),
            EffectSpec::Interaction(i, j) => {
                format!("{}x{}", plan.factors[i].name, plan.factors[j].name)
            }
        }
    }

    fn block(&self, plan: &MainEffectPlan) -> Mat {
        match *self {
            EffectSpec::Main(i) => design_block(plan, i),
            EffectSpec::Interaction(i, j) => {
                let (ai, aj) = (plan.levels(i), plan.levels(j));
                let mut x = Mat::zeros(plan.n(), ai * aj);
                for u in 0..plan.n() {
                    x[(u, plan.rows[i][u] * aj + plan.rows[j][u])] = 1.0;
                }
                x
            }
        }
    }
}

/// ANOVA over an explicit list of factorial effects, treated exactly like
/// factors: per effect the fully adjusted and next-adjusted sums of squares,
/// and `SS_E = SS_tot - sum SS_next`. Degrees of freedom are the computed
/// ranks of the next-adjusted blocks, which telescope to the model span
/// whatever the overlap between effects. Note that a main effect listed
/// alongside an interaction containing it is spanned by that interaction,
/// so its fully-adjusted sum of squares is necessarily zero; list
/// interactions first to read sequential sums of squares.
pub fn anova_effects(
    plan: &MainEffectPlan,
    y: &[f64],
    effects: &[EffectSpec],
) -> Result<AnovaTable> {
    plan.validate()?;
    if effects.is_empty() {
        return Err(Error::BadParams("no effects listed".into()));
    }
    for e in effects {
        let check = |i: usize| -> Result<()> {
            if i >= plan.m() {
                return Err(Error::IndexOutOfRange {
                    what: "factor",
                    index: i,
                    len: plan.m(),
                });
            }
            Ok(())
        };
        match *e {
            EffectSpec::Main(i) => check(i)?,
            EffectSpec::Interaction(i, j) => {
                check(i)?;
                check(j)?;
                if i == j {
                    return Err(Error::SameFactor);
                }
            }
        }
    }
    if y.len() != plan.n() {
        return Err(Error::DataMismatch(format!(
            "{} responses for {} runs",
            y.len(),
            plan.n()
        )));
    }
    let n = plan.n();
    let blocks: Vec<Mat> = effects.iter().map(|e| e.block(plan)).collect();
    let ones = ones_block(n);
    let identity = Mat::identity(n);
    // SS of block k adjusted for the listed blocks in `others` plus the
    // mean. Rank uses an absolute floor on top of the relative threshold:
    // a block fully spanned by the adjustment set leaves a C of pure
    // rounding noise, which must rank as zero.
    let ss_for = |k: usize, others: &[usize]| -> (f64, usize) {
        let mut parts: Vec<&Mat> = others.iter().map(|&o| &blocks[o]).collect();
        parts.push(&ones);
        let resid = identity.sub(&projector(&hconcat(&parts)));
        let c = blocks[k].transpose().mul(&resid).mul(&blocks[k]);
        let q = blocks[k].transpose().mul_vec(&resid.mul_vec(y));
        let sol = pinv_sym(&c).mul_vec(&q);
        let eig = linalg::sym_eigen(&c);
        let max = eig.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let floor = (linalg::RANK_TOL * max).max(1e-9 * n as f64);
        let rank = eig.values.iter().filter(|&&v| v.abs() > floor).count();
        (dot(&q, &sol), rank)
    };
    let mut ss_all = Vec::new();
    let mut ss_next = Vec::new();
    let mut dfs = Vec::new();
    for k in 0..effects.len() {
        let others: Vec<usize> = (0..effects.len()).filter(|&o| o != k).collect();
        ss_all.push(ss_for(k, &others).0);
        let next: Vec<usize> = (k + 1..effects.len()).collect();
        let (next_ss, df) = ss_for(k, &next);
        ss_next.push(next_ss);
        dfs.push(df);
    }
    let ss_total = ss_total_of(y);
    let ss_sub: f64 = ss_next.iter().sum();
    let ss_error = ss_total - ss_sub;
    let used_df: usize = dfs.iter().sum();
    if n < 1 + used_df {
        return Err(Error::Precondition(
            "more effect degrees of freedom than runs".into(),
        ));
    }
    let e = n - 1 - used_df;
    let variance = if e == 0 {
        None
    } else {
        Some(ss_error / e as f64)
    };
    let rows = effects
        .iter()
        .enumerate()
        .map(|(k, eff)| AnovaRow {
            source: eff.label(plan),
            df: dfs[k],
            ss_adj_all: ss_all[k],
            ss_adj_next: ss_next[k],
            f_stat: variance
                .filter(|&v| v != 0.0 && dfs[k] > 0)
                .map(|v| (ss_all[k] / dfs[k] as f64) / v),
        })
        .collect();
    Ok(AnovaTable {
        rows,
        ss_sub,
        ss_error,
        ss_total,
        error_df: e,
        variance_estimate: variance,
        saturated: e == 0,
    })
}

/// Covariances (in units of sigma^2) between orthonormal contrast bases of
/// two factors' BLUEs, from the relevant block of the Moore-Penrose inverse
/// of the full information matrix.
#[derive(Debug, Clone)]
pub struct ContrastCovariance {
    /// `(a-1) x (b-1)` covariance matrix between the Helmert contrast bases.
    pub matrix: Mat,
    /// Dimension of the subspace of the first factor's contrasts whose BLUEs
    /// are uncorrelated with every contrast BLUE of the second factor.
    pub zero_dim_a: usize,
    /// Same, with the roles swapped.
    pub zero_dim_b: usize,
}

/// Orthonormal zero-sum (Helmert) contrast basis as an `a x (a-1)` matrix.
fn helmert(a: usize) -> Mat {
    let mut h = Mat::zeros(a, a - 1);
    for j in 1..a {
        let norm = (j as f64 * (j + 1) as f64).sqrt();
        for i in 0..j {
            h[(i, j - 1)] = 1.0 / norm;
        }
        h[(j, j - 1)] = -(j as f64) / norm;
    }
    h
}

pub fn blue_covariance(plan: &MainEffectPlan, a: usize, b: usize) -> Result<ContrastCovariance> {
    if a == b {
        return Err(Error::SameFactor);
    }
    for &i in &[a, b] {
        let c = c_matrix(plan, &[i], &[i], &all_others(plan, i))?;
        let rank = sym_rank(&c.matrix);
        if rank != plan.levels(i) - 1 {
            return Err(Error::NotConnected {
                factor: plan.factors[i].name.clone(),
                rank,
                expected: plan.levels(i) - 1,
            });
        }
    }
    let model = ModelMatrix::new(plan, &vec![0.0; plan.n()])?;
    let g = pinv_sym(&model.full.gram());
    let off_a: usize = (0..a).map(|i| plan.levels(i)).sum();
    let off_b: usize = (0..b).map(|i| plan.levels(i)).sum();
    let (la, lb) = (plan.levels(a), plan.levels(b));
    let mut gab = Mat::zeros(la, lb);
    for i in 0..la {
        for j in 0..lb {
            gab[(i, j)] = g[(off_a + i, off_b + j)];
        }
    }
    let (ha, hb) = (helmert(la), helmert(lb));
    let v = ha.transpose().mul(&gab).mul(&hb);
    // Rank against the scale of the information-matrix inverse, not of V
    // itself: an exactly-zero covariance matrix is pure rounding noise and
    // must rank as zero. Eigenvalue noise of the Gram matrix sits near
    // scale^2 * machine epsilon, so the singular-value floor is 1e-6 * scale.
    let floor = 1e-6 * g.max_abs();
    let eig = linalg::sym_eigen(&v.gram());
    let rank = eig
        .values
        .iter()
        .filter(|&&l| l > floor * floor)
        .count()
        .min(la - 1)
        .min(lb - 1);
    Ok(ContrastCovariance {
        zero_dim_a: la - 1 - rank,
        zero_dim_b: lb - 1 - rank,
        matrix: v,
    })
}

/// Parse a delimited dataset against a plan.
///
/// The header row names the columns: every factor of the plan, the response
/// `y`, and optionally `run` (0-based run indices). Rows map to plan columns
/// by the run index when present, otherwise by position, and the factor
/// levels of every row must equal the plan's settings for that run.
pub fn parse_dataset(text: &str, plan: &MainEffectPlan) -> Result<Vec<f64>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dataset".into()))?;
    let split = |l: &str| -> Vec<String> {
        if l.contains(',') {
            l.split(',').map(|t| t.trim().to_string()).collect()
        } else {
            l.split_whitespace().map(|t| t.to_string()).collect()
        }
    };
    let names = split(header);
    let mut factor_cols = Vec::with_capacity(plan.m());
    for f in &plan.factors {
        let col = names
            .iter()
            .position(|n| *n == f.name)
            .ok_or_else(|| Error::DataMismatch(format!("missing column for factor {}", f.name)))?;
        factor_cols.push(col);
    }
    let y_col = names
        .iter()
        .position(|n| n == "y")
        .ok_or_else(|| Error::DataMismatch("missing response column 'y'".into()))?;
    let run_col = names.iter().position(|n| n == "run");

    let mut y = vec![f64::NAN; plan.n()];
    let mut filled = vec![false; plan.n()];
    for (pos, line) in lines.enumerate() {
        let fields = split(line);
        if fields.len() != names.len() {
            return Err(Error::Parse(format!(
                "data row {pos}: {} fields, header has {}",
                fields.len(),
                names.len()
            )));
        }
        let u = match run_col {
            Some(c) => fields[c]
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("data row {pos}: bad run index")))?,
            None => pos,
        };
        if u >= plan.n() {
            return Err(Error::DataMismatch(format!(
                "data row {pos}: run {u} out of range for {} runs",
                plan.n()
            )));
        }
        if filled[u] {
            return Err(Error::DataMismatch(format!("run {u} appears twice")));
        }
        for (i, &c) in factor_cols.iter().enumerate() {
            let lv = fields[c]
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("data row {pos}: bad level code")))?;
            if lv != plan.rows[i][u] {
                return Err(Error::DataMismatch(format!(
                    "data row {pos}: factor {} at level {} but run {} of the plan has level {}",
                    plan.factors[i].name, lv, u, plan.rows[i][u]
                )));
            }
        }
        y[u] = fields[y_col]
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("data row {pos}: bad response value")))?;
        filled[u] = true;
    }
    if let Some(u) = filled.iter().position(|&f| !f) {
        return Err(Error::DataMismatch(format!("no data row for run {u}")));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::oa::build_oa;

    fn rng_next(state: &mut u64) -> f64 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_y(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n).map(|_| rng_next(&mut s) * 4.0 - 2.0).collect()
    }

    #[test]
    fn c_matrix_reproduces_displayed_two_factor_matrices() {
        // the 2x2 block is the same for both four-run replacers
        let expect_b = [[0.5, -0.5], [-0.5, 0.5]];
        for name in ["A_4(1)", "A_4(2)"] {
            let plan = catalog::get(name).unwrap().plan.clone();
            let three = (0..2).find(|&i| plan.levels(i) == 3).unwrap();
            let two = 1 - three;
            let c = c_matrix(&plan, &[two], &[two], &[three, mean_index(&plan)]).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!((c.matrix[(i, j)] - expect_b[i][j]).abs() < 1e-12, "{name}");
                }
            }
        }
        let plan = catalog::get("A_4(1)").unwrap().plan.clone();
        let c = c_matrix(&plan, &[1], &[1], &[0, mean_index(&plan)]).unwrap();
        let expect = [
            [2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0],
            [-1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0],
            [-1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((c.matrix[(i, j)] - expect[i][j]).abs() < 1e-12);
            }
        }
        let plan = catalog::get("A_4(2)").unwrap().plan.clone();
        let c = c_matrix(&plan, &[0], &[0], &[1, mean_index(&plan)]).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((c.matrix[(i, j)] - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn c_matrix_row_sums_zero_and_psd_when_mean_adjusted() {
        let plan = catalog::get("A_12(4)").unwrap().plan.clone();
        for i in 0..plan.m() {
            let c = c_matrix(&plan, &[i], &[i], &all_others(&plan, i)).unwrap();
            for r in 0..c.matrix.rows {
                let s: f64 = (0..c.matrix.cols).map(|j| c.matrix[(r, j)]).sum();
                assert!(s.abs() < 1e-10);
            }
            let eig = linalg::sym_eigen(&c.matrix);
            let max = eig.values.iter().cloned().fold(0.0f64, f64::max);
            assert!(eig.values.iter().all(|&v| v >= -1e-10 * max));
        }
    }

    #[test]
    fn c_matrix_rejects_overlapping_sets() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        assert!(c_matrix(&plan, &[0], &[0], &[0]).is_err());
        assert!(c_matrix(&plan, &[0, 1], &[1, 2], &[3]).is_err());
    }

    #[test]
    fn q_vector_blocks_sum_to_zero_when_mean_adjusted() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        let y = random_y(8, 1);
        let q = q_vector(&plan, &y, &[0, 1], &[2, mean_index(&plan)]).unwrap();
        let b0 = q.block(0, &plan);
        let b1 = q.block(1, &plan);
        assert!(b0.iter().sum::<f64>().abs() < 1e-10);
        assert!(b1.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn unadjusted_ss_identity() {
        let plan = catalog::get("A_12(1)").unwrap().plan.clone();
        let y = random_y(12, 5);
        let m = mean_index(&plan);
        let last = plan.m() - 1;
        let ss = adjusted_ss(&plan, &y, &[last], &[m]).unwrap();
        // T' R^{-1} T - G^2/n
        let model = ModelMatrix::new(&plan, &y).unwrap();
        let r = plan.replication_vector(last).unwrap();
        let direct: f64 = model.totals[last]
            .iter()
            .zip(&r)
            .map(|(t, &c)| t * t / c as f64)
            .sum::<f64>()
            - model.grand_total * model.grand_total / plan.n() as f64;
        assert!((ss - direct).abs() < 1e-10);
    }

    #[test]
    fn adjusted_ss_zero_for_zero_response() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        let y = vec![0.0; 8];
        assert_eq!(
            adjusted_ss(&plan, &y, &[0], &[mean_index(&plan)]).unwrap(),
            0.0
        );
    }

    #[test]
    fn orthogonal_plan_collapses_adjustment() {
        let oa = build_oa(3, 4).unwrap();
        let y = random_y(9, 9);
        let m = mean_index(&oa);
        for i in 0..4 {
            let full = adjusted_ss(&oa, &y, &[i], &all_others(&oa, i)).unwrap();
            let unadj = adjusted_ss(&oa, &y, &[i], &[m]).unwrap();
            assert!((full - unadj).abs() < 1e-9);
        }
    }

    #[test]
    fn bordered_route_agrees_with_pseudo_inverse() {
        let plan = catalog::get("A_12(2)").unwrap().plan.clone();
        let y = random_y(12, 17);
        for i in 0..plan.m() {
            let a = adjusted_ss(&plan, &y, &[i], &all_others(&plan, i)).unwrap();
            let b = adjusted_ss_bordered(&plan, &y, &[i], &all_others(&plan, i)).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
        // multi-factor S as well
        let a = adjusted_ss(&plan, &y, &[0, 1], &[2, 3, mean_index(&plan)]).unwrap();
        let b = adjusted_ss_bordered(&plan, &y, &[0, 1], &[2, 3, mean_index(&plan)]).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn reduced_solution_single_factor_is_centred_level_means() {
        // one factor, balanced: solution recovers level means minus grand mean
        let plan = MainEffectPlan::from_rows("one", vec![vec![0, 0, 1, 1, 2, 2]]);
        let y = vec![1.0, 3.0, 10.0, 12.0, 100.0, 104.0];
        let sol = reduced_normal_solution(&plan, &y, 0).unwrap();
        let grand = y.iter().sum::<f64>() / 6.0;
        let means = [2.0, 11.0, 102.0];
        for (s, m) in sol.iter().zip(means) {
            assert!((s - (m - grand)).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_solution_two_factor_matches_direct_form() {
        let full = catalog::get("A_8(4)").unwrap().plan.clone();
        let plan = full.select_factors(&[0, 1]).unwrap();
        let y = random_y(8, 23);
        let sol = reduced_normal_solution(&plan, &y, 0).unwrap();
        let (c, q) = reduced_equation_direct(&plan, &y, 0, 1).unwrap();
        let direct = pinv_sym(&c).mul_vec(&q);
        for (a, b) in sol.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn synthetic_truth_contrasts_recovered() {
        let plan = catalog::get("A_12(1)").unwrap().plan.clone();
        // build noiseless data from known effects
        let beta: Vec<Vec<f64>> = plan
            .factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                (0..f.levels)
                    .map(|l| ((i + 2) * (l + 1)) as f64 * 0.25)
                    .collect()
            })
            .collect();
        let mu = 1.5;
        let y: Vec<f64> = (0..plan.n())
            .map(|u| mu + (0..plan.m()).map(|i| beta[i][plan.rows[i][u]]).sum::<f64>())
            .collect();
        for i in 0..plan.m() {
            let sol = reduced_normal_solution(&plan, &y, i).unwrap();
            let a = plan.levels(i);
            for l1 in 0..a {
                for l2 in (l1 + 1)..a {
                    let mut l = vec![0.0; a];
                    l[l1] = 1.0;
                    l[l2] = -1.0;
                    let est = contrast_estimate(&sol, &l).unwrap();
                    let truth = beta[i][l1] - beta[i][l2];
                    assert!((est - truth).abs() < 1e-8, "factor {i} pair {l1},{l2}");
                }
            }
        }
    }

    #[test]
    fn contrast_estimate_rejects_non_contrast() {
        assert!(contrast_estimate(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn anova_on_saturated_plan_has_zero_error() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        let y = random_y(8, 31);
        let t = anova(&plan, &y).unwrap();
        assert!(t.saturated);
        assert_eq!(t.error_df, 0);
        assert!(t.f_stat_absent());
        assert!(t.ss_error.abs() <= 1e-8 * t.ss_total.max(1.0));
    }

    impl AnovaTable {
        fn f_stat_absent(&self) -> bool {
            self.rows.iter().all(|r| r.f_stat.is_none())
        }
    }

    #[test]
    fn connectedness_examples() {
        for name in ["A_8(1)", "A_12(1)", "A_12(3)", "A_15", "A_6(1)"] {
            let plan = catalog::get(name).unwrap().plan.clone();
            assert!(
                is_connected(&plan).unwrap().iter().all(|&b| b),
                "{name} should be connected"
            );
        }
        // aliased factors are disconnected
        let plan = MainEffectPlan::from_rows(
            "aliased",
            vec![vec![0, 1, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1]],
        );
        let conn = is_connected(&plan).unwrap();
        assert_eq!(conn, vec![false, false, true]);
        // single factor with all levels present
        let single = MainEffectPlan::from_rows("single", vec![vec![0, 1, 2, 0]]);
        assert_eq!(is_connected(&single).unwrap(), vec![true]);
    }

    #[test]
    fn simplification_flags() {
        let plan = catalog::get("A_5(1)").unwrap().plan.clone();
        // A is orthogonal to B through C (the last factor)
        let s = check_simplification(&plan, 0).unwrap();
        assert_eq!(s.through_last, Some(true));
        assert!(!s.pfc_collapse);
        let oa = build_oa(3, 4).unwrap();
        assert!(check_simplification(&oa, 1).unwrap().pfc_collapse);
        let a8 = catalog::get("A_8(1)").unwrap().plan.clone();
        assert!(!check_simplification(&a8, 0).unwrap().pfc_collapse);
    }

    #[test]
    fn analyze_through_matches_general_anova() {
        for (name, through) in [("A_5(1)", 2usize), ("A_5(2)", 3usize)] {
            let plan = catalog::get(name).unwrap().plan.clone();
            let y = random_y(plan.n(), 71 + through as u64);
            let fast = analyze_through(&plan, &y, through).unwrap();
            let general = anova(&plan, &y).unwrap();
            assert_tables_close(&fast, &general, 1e-9);
        }
        // precondition failure points back at the general anova
        let a8 = catalog::get("A_8(1)").unwrap().plan.clone();
        let y = random_y(8, 3);
        assert!(analyze_through(&a8, &y, 4).is_err());
    }

    #[test]
    fn analyze_interclass_matches_general_anova() {
        let plan = catalog::get("A_12(1)").unwrap().plan.clone();
        let part = ClassPartition::from_slices(&[&[0, 1, 2], &[3, 4]]);
        let y = random_y(12, 101);
        let fast = analyze_interclass(&plan, &part, &y).unwrap();
        let general = anova(&plan, &y).unwrap();
        assert_tables_close(&fast, &general, 1e-9);

        // all-singleton partition on an OA reduces to the orthogonal analysis
        let oa = build_oa(3, 4).unwrap();
        let y = random_y(9, 103);
        let fast = analyze_interclass(&oa, &ClassPartition::singletons(4), &y).unwrap();
        let general = anova(&oa, &y).unwrap();
        assert_tables_close(&fast, &general, 1e-9);

        // rejected when the partition is not inter-class orthogonal
        let bad = ClassPartition::singletons(plan.m());
        let y12 = random_y(12, 107);
        assert!(analyze_interclass(&plan, &bad, &y12).is_err());
    }

    pub(crate) fn assert_tables_close(a: &AnovaTable, b: &AnovaTable, tol: f64) {
        let scale = b.ss_total.abs().max(1.0);
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.df, rb.df);
            assert!(
                (ra.ss_adj_all - rb.ss_adj_all).abs() <= tol * scale,
                "{}: {} vs {}",
                ra.source,
                ra.ss_adj_all,
                rb.ss_adj_all
            );
            assert!(
                (ra.ss_adj_next - rb.ss_adj_next).abs() <= tol * scale,
                "{}: {} vs {}",
                ra.source,
                ra.ss_adj_next,
                rb.ss_adj_next
            );
        }
        assert!((a.ss_error - b.ss_error).abs() <= tol * scale);
        assert!((a.ss_total - b.ss_total).abs() <= tol * scale);
    }

    #[test]
    fn anova_with_interaction_effect() {
        // a replicated 3x2 factorial: the interaction block soaks up the
        // remaining cell degrees of freedom
        let plan = MainEffectPlan::from_rows(
            "3x2 replicated",
            vec![
                vec![0, 0, 1, 1, 2, 2, 0, 0, 1, 1, 2, 2],
                vec![0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 0],
            ],
        );
        let y = random_y(12, 77);
        // interaction first so the sequential columns read cleanly
        let effects = [
            EffectSpec::Interaction(0, 1),
            EffectSpec::Main(0),
            EffectSpec::Main(1),
        ];
        let table = anova_effects(&plan, &y, &effects).unwrap();
        assert_eq!(
            table.rows.iter().map(|r| r.df).collect::<Vec<_>>(),
            vec![2, 2, 1]
        );
        assert_eq!(table.error_df, 12 - 1 - 5);
        // the error SS is the within-cell variation: compute directly
        let mut cells: std::collections::BTreeMap<(usize, usize), Vec<f64>> = Default::default();
        for u in 0..12 {
            cells
                .entry((plan.rows[0][u], plan.rows[1][u]))
                .or_default()
                .push(y[u]);
        }
        let within: f64 = cells
            .values()
            .map(|v| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            })
            .sum();
        assert!((table.ss_error - within).abs() < 1e-9 * table.ss_total.max(1.0));
        // effects-only table with just the mains reproduces the plain anova
        let mains = anova_effects(&plan, &y, &[EffectSpec::Main(0), EffectSpec::Main(1)]).unwrap();
        let plain = anova(&plan, &y).unwrap();
        for (a, b) in mains.rows.iter().zip(&plain.rows) {
            assert_eq!(a.df, b.df);
            assert!((a.ss_adj_all - b.ss_adj_all).abs() < 1e-10);
            assert!((a.ss_adj_next - b.ss_adj_next).abs() < 1e-10);
        }
        assert!((mains.ss_error - plain.ss_error).abs() < 1e-10);
        // bad specs
        assert!(anova_effects(&plan, &y, &[]).is_err());
        assert!(anova_effects(&plan, &y, &[EffectSpec::Interaction(0, 0)]).is_err());
    }

    #[test]
    fn blue_covariance_zero_for_orthogonal_pair() {
        let oa = build_oa(4, 3).unwrap();
        let cov = blue_covariance(&oa, 0, 1).unwrap();
        assert!(cov.matrix.max_abs() < 1e-12);
        assert_eq!(cov.zero_dim_a, 3);
        assert_eq!(cov.zero_dim_b, 3);
    }

    #[test]
    fn blue_covariance_detects_the_single_orthogonal_contrast() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        let pair = plan.select_factors(&[0, 1]).unwrap();
        let cov = blue_covariance(&pair, 0, 1).unwrap();
        assert_eq!(cov.zero_dim_a, 1);
        assert_eq!(cov.zero_dim_b, 1);
        // the orthogonal direction is 2a0 - a1 - a2, i.e. Helmert direction
        // (1,1,-2)/sqrt(6) should be... check via explicit contrast: the
        // covariance of (2,-1,-1) with any contrast of B is zero. Project
        // (2,-1,-1) onto the Helmert basis and check it lies in the left
        // null space of the covariance matrix.
        let h = helmert(3);
        let l = [2.0, -1.0, -1.0];
        let coords: Vec<f64> = (0..2)
            .map(|j| (0..3).map(|i| h[(i, j)] * l[i]).sum())
            .collect();
        let prod: Vec<f64> = (0..2)
            .map(|j| coords[0] * cov.matrix[(0, j)] + coords[1] * cov.matrix[(1, j)])
            .collect();
        assert!(prod.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn five_run_plan_keeps_the_four_run_precisions() {
        // dropping the extra run and factor gives the 4-run orthogonal array;
        // the C matrices of the three surviving factors coincide
        let a52 = catalog::get("A_5(2)").unwrap().plan.clone();
        let oa = a52.subarray(&[0, 1, 2], &[0, 1, 2, 3], false).unwrap().plan;
        for q in 0..3 {
            let in_big = c_matrix(&a52, &[q], &[q], &all_others(&a52, q)).unwrap();
            let in_oa = c_matrix(&oa, &[q], &[q], &all_others(&oa, q)).unwrap();
            assert!(in_big.matrix.sub(&in_oa.matrix).max_abs() < 1e-10);
        }
    }

    #[test]
    fn dataset_parsing_and_alignment() {
        let plan = catalog::get("A_5(1)").unwrap().plan.clone();
        let csv = "A,B,C,y\n0,0,0,1.5\n1,1,0,2.5\n0,1,1,3.5\n1,0,1,4.5\n0,0,2,5.5\n";
        let y = parse_dataset(csv, &plan).unwrap();
        assert_eq!(y, vec![1.5, 2.5, 3.5, 4.5, 5.5]);
        // with run indices, order can be shuffled
        let csv = "run,A,B,C,y\n4,0,0,2,5.5\n0,0,0,0,1.5\n2,0,1,1,3.5\n1,1,1,0,2.5\n3,1,0,1,4.5\n";
        let y = parse_dataset(csv, &plan).unwrap();
        assert_eq!(y, vec![1.5, 2.5, 3.5, 4.5, 5.5]);
        // level mismatch is an error, not a warning
        let csv = "A,B,C,y\n0,0,0,1.5\n1,1,0,2.5\n0,1,1,3.5\n1,0,1,4.5\n0,1,2,5.5\n";
        assert!(parse_dataset(csv, &plan).is_err());
        // missing run
        let csv = "A,B,C,y\n0,0,0,1.5\n";
        assert!(parse_dataset(csv, &plan).is_err());
        // whitespace delimiting and comment lines
        let tsv = "# five runs\nA B C y\n0 0 0 1.5\n1 1 0 2.5\n0 1 1 3.5\n1 0 1 4.5\n0 0 2 5.5\n";
        let y = parse_dataset(tsv, &plan).unwrap();
        assert_eq!(y, vec![1.5, 2.5, 3.5, 4.5, 5.5]);
        // missing response column
        let csv = "A,B,C,value\n0,0,0,1.5\n";
        assert!(parse_dataset(csv, &plan).is_err());
    }
}
