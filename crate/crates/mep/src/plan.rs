//! Plan data model and array surgery.
//!
//! A main effect plan is an `m x n` integer array: rows are factors, columns
//! are runs, and entry `(i, u)` is the level of factor `i` in run `u`. Level
//! codes are 0-based consecutive integers. All counting here is exact integer
//! arithmetic; nothing in this module touches floating point.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One factor of a plan: a short name and its number of levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub levels: usize,
}

impl Factor {
    pub fn new(name: impl Into<String>, levels: usize) -> Self {
        Factor {
            name: name.into(),
            levels,
        }
    }
}

/// An `m`-factor main effect plan on `n` runs.
///
/// Serialized form (the canonical plan document used by the CLI and all
/// file interfaces):
///
/// ```json
/// { "name": "...", "runs": n, "factors": [{"name": "A", "levels": 3}, ...],
///   "rows": [[...], ...] }
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MainEffectPlan {
    pub name: String,
    pub runs: usize,
    pub factors: Vec<Factor>,
    pub rows: Vec<Vec<usize>>,
}

/// Plan equality ignores the name: two plans are equal when their factor
/// specs and level arrays coincide, column order significant.
impl PartialEq for MainEffectPlan {
    fn eq(&self, other: &Self) -> bool {
        self.runs == other.runs && self.factors == other.factors && self.rows == other.rows
    }
}
impl Eq for MainEffectPlan {}

impl fmt::Display for MainEffectPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}  ({} factors, {} runs)",
            self.name,
            self.m(),
            self.runs
        )?;
        let name_w = self.factors.iter().map(|x| x.name.len()).max().unwrap_or(1);
        for (i, row) in self.rows.iter().enumerate() {
            write!(f, "  {:name_w$} |", self.factors[i].name)?;
            for v in row {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl MainEffectPlan {
    pub fn new(
        name: impl Into<String>,
        factors: Vec<Factor>,
        rows: Vec<Vec<usize>>,
    ) -> MainEffectPlan {
        let runs = rows.first().map(|r| r.len()).unwrap_or(0);
        MainEffectPlan {
            name: name.into(),
            runs,
            factors,
            rows,
        }
    }

    /// Build a plan from rows alone, naming factors A, B, C, ... and taking
    /// each factor's level count as `max(row) + 1`.
    pub fn from_rows(name: impl Into<String>, rows: Vec<Vec<usize>>) -> MainEffectPlan {
        let factors = rows
            .iter()
            .enumerate()
            .map(|(i, row)| Factor::new(default_name(i), row.iter().max().map_or(1, |&v| v + 1)))
            .collect();
        MainEffectPlan::new(name, factors, rows)
    }

    /// Number of factors.
    pub fn m(&self) -> usize {
        self.factors.len()
    }

    /// Number of runs.
    pub fn n(&self) -> usize {
        self.runs
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn levels(&self, i: usize) -> usize {
        self.factors[i].levels
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// Degrees of freedom fill the runs: `sum(levels - 1) = n - 1`.
    pub fn is_saturated(&self) -> bool {
        let df: usize = self.factors.iter().map(|f| f.levels - 1).sum();
        df == self.runs - 1
    }

    fn check_factor(&self, i: usize) -> Result<()> {
        if i >= self.m() {
            return Err(Error::IndexOutOfRange {
                what: "factor",
                index: i,
                len: self.m(),
            });
        }
        Ok(())
    }

    /// Check every plan invariant, reporting the first violation with its
    /// row/column coordinates.
    pub fn validate(&self) -> Result<()> {
        if self.m() == 0 {
            return Err(invalid("plan has no factors", None, None));
        }
        if self.runs == 0 {
            return Err(invalid("plan has no runs", None, None));
        }
        if self.rows.len() != self.m() {
            return Err(invalid(
                &format!(
                    "{} factors declared but {} rows present",
                    self.m(),
                    self.rows.len()
                ),
                None,
                None,
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, f) in self.factors.iter().enumerate() {
            if f.levels < 2 {
                return Err(invalid(
                    &format!(
                        "factor {} declares {} levels; at least 2 required",
                        f.name, f.levels
                    ),
                    Some(i),
                    None,
                ));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(invalid(
                    &format!("duplicate factor name {:?}", f.name),
                    Some(i),
                    None,
                ));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.runs {
                return Err(invalid(
                    &format!("row has {} entries, expected {}", row.len(), self.runs),
                    Some(i),
                    None,
                ));
            }
            let a = self.factors[i].levels;
            for (u, &v) in row.iter().enumerate() {
                if v >= a {
                    return Err(invalid(
                        &format!(
                            "level code {} of factor {} outside [0, {})",
                            v, self.factors[i].name, a
                        ),
                        Some(i),
                        Some(u),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Replication vector of factor `a`: entry `i` counts the runs with the
    /// factor at level `i`.
    pub fn replication_vector(&self, a: usize) -> Result<Vec<u64>> {
        self.check_factor(a)?;
        let mut r = vec![0u64; self.levels(a)];
        for &v in &self.rows[a] {
            r[v] += 1;
        }
        Ok(r)
    }

    /// Incidence summary of the ordered factor pair `(a, b)`.
    pub fn incidence(&self, a: usize, b: usize) -> Result<IncidenceSummary> {
        self.check_factor(a)?;
        self.check_factor(b)?;
        if a == b {
            return Err(Error::SameFactor);
        }
        let (la, lb) = (self.levels(a), self.levels(b));
        let mut n_ab = vec![vec![0u64; lb]; la];
        for u in 0..self.runs {
            n_ab[self.rows[a][u]][self.rows[b][u]] += 1;
        }
        Ok(IncidenceSummary {
            n_ab,
            r_a: self.replication_vector(a)?,
            r_b: self.replication_vector(b)?,
            n: self.runs as u64,
        })
    }

    /// Select rows and columns, in the given order. Level codes are kept
    /// verbatim (a level may become unused); pass `relabel = true` to
    /// recompact each surviving factor's levels to the codes actually used,
    /// in order of first appearance of the old codes.
    pub fn subarray(
        &self,
        row_idx: &[usize],
        col_idx: &[usize],
        relabel: bool,
    ) -> Result<Subarray> {
        if row_idx.is_empty() || col_idx.is_empty() {
            return Err(Error::BadParams("subarray selection is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for &i in row_idx {
            self.check_factor(i)?;
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex {
                    what: "row",
                    index: i,
                });
            }
        }
        seen.clear();
        for &u in col_idx {
            if u >= self.runs {
                return Err(Error::IndexOutOfRange {
                    what: "column",
                    index: u,
                    len: self.runs,
                });
            }
            if !seen.insert(u) {
                return Err(Error::DuplicateIndex {
                    what: "column",
                    index: u,
                });
            }
        }

        let mut factors = Vec::with_capacity(row_idx.len());
        let mut rows = Vec::with_capacity(row_idx.len());
        let mut relabelings = Vec::with_capacity(row_idx.len());
        for &i in row_idx {
            let picked: Vec<usize> = col_idx.iter().map(|&u| self.rows[i][u]).collect();
            if relabel {
                let mut map: Vec<Option<usize>> = vec![None; self.levels(i)];
                let mut next = 0usize;
                let mut new_row = Vec::with_capacity(picked.len());
                for v in picked {
                    let code = *map[v].get_or_insert_with(|| {
                        let c = next;
                        next += 1;
                        c
                    });
                    new_row.push(code);
                }
                factors.push(Factor::new(self.factors[i].name.clone(), next.max(2)));
                rows.push(new_row);
                relabelings.push(map);
            } else {
                factors.push(self.factors[i].clone());
                rows.push(picked);
                relabelings.push((0..self.levels(i)).map(Some).collect());
            }
        }
        let plan = MainEffectPlan::new(format!("{}[sub]", self.name), factors, rows);
        Ok(Subarray {
            plan,
            level_maps: relabelings,
        })
    }

    /// Convenience: subarray keeping all columns.
    pub fn select_factors(&self, row_idx: &[usize]) -> Result<MainEffectPlan> {
        let cols: Vec<usize> = (0..self.runs).collect();
        Ok(self.subarray(row_idx, &cols, false)?.plan)
    }

    /// Replace the factor names, keeping everything else.
    pub fn renamed_factors(mut self, names: &[&str]) -> Result<MainEffectPlan> {
        if names.len() != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "{} names supplied for {} factors",
                names.len(),
                self.m()
            )));
        }
        for (f, &n) in self.factors.iter_mut().zip(names) {
            f.name = n.to_string();
        }
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> MainEffectPlan {
        self.name = name.into();
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse and strictly validate a plan document.
    pub fn from_json(text: &str) -> Result<MainEffectPlan> {
        let plan: MainEffectPlan = serde_json::from_str(text)?;
        if plan.rows.first().map(|r| r.len()).unwrap_or(0) != plan.runs {
            return Err(Error::Parse(format!(
                "declared runs {} does not match row length {}",
                plan.runs,
                plan.rows.first().map(|r| r.len()).unwrap_or(0)
            )));
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MainEffectPlan> {
        MainEffectPlan::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

pub(crate) fn default_name(i: usize) -> String {
    // A, B, ..., Z, F26, F27, ...
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("F{i}")
    }
}

fn invalid(reason: &str, row: Option<usize>, col: Option<usize>) -> Error {
    Error::InvalidPlan {
        reason: reason.to_string(),
        row,
        col,
    }
}

/// Result of `subarray`: the selected plan plus, per selected factor, the
/// old-level -> new-level map (identity when `relabel` was false).
#[derive(Debug, Clone)]
pub struct Subarray {
    pub plan: MainEffectPlan,
    pub level_maps: Vec<Vec<Option<usize>>>,
}

/// Incidence matrix `N_ab` of a factor pair together with both replication
/// vectors and the run count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceSummary {
    /// `n_ab[i][j]` = number of runs with the first factor at level `i` and
    /// the second at level `j`.
    pub n_ab: Vec<Vec<u64>>,
    pub r_a: Vec<u64>,
    pub r_b: Vec<u64>,
    pub n: u64,
}

impl IncidenceSummary {
    pub fn transposed(&self) -> IncidenceSummary {
        let (la, lb) = (self.r_a.len(), self.r_b.len());
        let mut t = vec![vec![0u64; la]; lb];
        for i in 0..la {
            for j in 0..lb {
                t[j][i] = self.n_ab[i][j];
            }
        }
        IncidenceSummary {
            n_ab: t,
            r_a: self.r_b.clone(),
            r_b: self.r_a.clone(),
            n: self.n,
        }
    }
}

/// A partition of the factor indices `{0, .., m-1}` into disjoint classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPartition {
    pub classes: Vec<BTreeSet<usize>>,
}

impl ClassPartition {
    pub fn new(classes: Vec<BTreeSet<usize>>) -> ClassPartition {
        ClassPartition { classes }
    }

    pub fn from_slices(classes: &[&[usize]]) -> ClassPartition {
        ClassPartition {
            classes: classes
                .iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        }
    }

    pub fn singletons(m: usize) -> ClassPartition {
        ClassPartition {
            classes: (0..m).map(|i| BTreeSet::from([i])).collect(),
        }
    }

    /// Classes must be disjoint and cover `{0, .., m-1}`.
    pub fn validate(&self, m: usize) -> Result<()> {
        let mut seen = BTreeSet::new();
        for class in &self.classes {
            for &i in class {
                if i >= m {
                    return Err(Error::IndexOutOfRange {
                        what: "factor",
                        index: i,
                        len: m,
                    });
                }
                if !seen.insert(i) {
                    return Err(Error::BadParams(format!(
                        "factor {i} appears in two classes"
                    )));
                }
            }
        }
        if seen.len() != m {
            return Err(Error::BadParams(
                "partition does not cover every factor".into(),
            ));
        }
        Ok(())
    }

    pub fn max_class_size(&self) -> usize {
        self.classes.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Index of the class containing factor `i`.
    pub fn class_of(&self, i: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(&i))
    }
}

/// Assemble a block matrix of plans.
///
/// Within a grid row every block must have the same factor count and the
/// same per-factor level counts (the compatibility condition for replacing
/// arrays); within a grid column every block must have the same run count.
/// Factor names and level counts are taken from the first block of each grid
/// row, and the resulting factor list is the concatenation of the grid rows'
/// factor lists.
pub fn juxtapose(grid: &[Vec<&MainEffectPlan>]) -> Result<MainEffectPlan> {
    if grid.is_empty() || grid[0].is_empty() {
        return Err(Error::BadParams("empty juxtaposition grid".into()));
    }
    let cols = grid[0].len();
    if grid.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged juxtaposition grid".into()));
    }
    // column blocks must agree on runs
    for j in 0..cols {
        for row in grid {
            if row[j].runs != grid[0][j].runs {
                return Err(Error::DimensionMismatch(format!(
                    "grid column {} mixes run counts {} and {}",
                    j, grid[0][j].runs, row[j].runs
                )));
            }
        }
    }
    let mut factors = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (i, grid_row) in grid.iter().enumerate() {
        let first = grid_row[0];
        for blk in grid_row.iter() {
            if blk.m() != first.m() {
                return Err(Error::DimensionMismatch(format!(
                    "grid row {} mixes factor counts {} and {}",
                    i,
                    first.m(),
                    blk.m()
                )));
            }
            for k in 0..first.m() {
                if blk.levels(k) != first.levels(k) {
                    return Err(Error::DimensionMismatch(format!(
                        "grid row {i} factor {k}: incompatible level counts {} and {}",
                        first.levels(k),
                        blk.levels(k)
                    )));
                }
            }
        }
        for k in 0..first.m() {
            factors.push(first.factors[k].clone());
            let mut row = Vec::new();
            for blk in grid_row.iter() {
                row.extend_from_slice(&blk.rows[k]);
            }
            rows.push(row);
        }
    }
    let mut names = BTreeSet::new();
    for f in &factors {
        if !names.insert(f.name.as_str()) {
            return Err(Error::BadParams(format!(
                "juxtaposition would duplicate factor name {:?}; rename blocks first",
                f.name
            )));
        }
    }
    Ok(MainEffectPlan::new("juxtaposed", factors, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn validate_accepts_printed_plan() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        plan.validate().unwrap();
    }

    #[test]
    fn validate_accepts_minimal_plan() {
        let plan = MainEffectPlan::new("tiny", vec![Factor::new("A", 2)], vec![vec![0]]);
        plan.validate().unwrap();
    }

    #[test]
    fn validate_reports_out_of_range_level_with_coordinates() {
        let mut plan = catalog::get("A_8(1)").unwrap().plan.clone();
        plan.rows[1][4] = 3; // ternary row
        match plan.validate() {
            Err(Error::InvalidPlan { row, col, .. }) => {
                assert_eq!(row, Some(1));
                assert_eq!(col, Some(4));
            }
            other => panic!("expected InvalidPlan, got {other:?}"),
        }
    }

    #[test]
    fn incidence_matches_printed_tables() {
        // N_AB of A_8(1) with its marginals.
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        let inc = plan.incidence(0, 1).unwrap();
        assert_eq!(inc.n_ab, vec![vec![2, 1, 1], vec![1, 1, 0], vec![1, 0, 1]]);
        assert_eq!(inc.r_a, vec![4, 2, 2]);
        assert_eq!(inc.r_b, vec![4, 2, 2]);
        assert_eq!(inc.n, 8);

        // N_DE of A_12(1).
        let plan = catalog::get("A_12(1)").unwrap().plan.clone();
        let inc = plan.incidence(3, 4).unwrap();
        assert_eq!(inc.n_ab, vec![vec![2, 1, 1], vec![0, 2, 2], vec![2, 1, 1]]);
        assert_eq!(inc.r_a, vec![4, 4, 4]);
        assert_eq!(inc.r_b, vec![4, 4, 4]);
    }

    #[test]
    fn incidence_rejects_equal_indices() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        assert!(matches!(plan.incidence(2, 2), Err(Error::SameFactor)));
    }

    #[test]
    fn replication_vectors() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        assert_eq!(plan.replication_vector(0).unwrap(), vec![4, 2, 2]);
        let plan = catalog::get("A_12(1)").unwrap().plan.clone();
        assert_eq!(plan.replication_vector(1).unwrap(), vec![3, 3, 3, 3]);
        let tiny = MainEffectPlan::new("tiny", vec![Factor::new("A", 3)], vec![vec![0]]);
        assert_eq!(tiny.replication_vector(0).unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn incidence_marginals_and_transpose() {
        let plan = catalog::get("A_12(4)").unwrap().plan.clone();
        for a in 0..plan.m() {
            for b in 0..plan.m() {
                if a == b {
                    continue;
                }
                let inc = plan.incidence(a, b).unwrap();
                let row_sums: Vec<u64> = inc.n_ab.iter().map(|r| r.iter().sum()).collect();
                assert_eq!(row_sums, inc.r_a);
                let mut col_sums = vec![0u64; inc.r_b.len()];
                for r in &inc.n_ab {
                    for (j, &v) in r.iter().enumerate() {
                        col_sums[j] += v;
                    }
                }
                assert_eq!(col_sums, inc.r_b);
                assert_eq!(inc.r_a.iter().sum::<u64>(), inc.n);
                assert_eq!(inc.transposed(), plan.incidence(b, a).unwrap());
            }
        }
    }

    #[test]
    fn subarray_full_selection_is_identity() {
        let plan = catalog::get("A_12(2)").unwrap().plan.clone();
        let rows: Vec<usize> = (0..plan.m()).collect();
        let cols: Vec<usize> = (0..plan.n()).collect();
        let sub = plan.subarray(&rows, &cols, false).unwrap();
        assert_eq!(sub.plan, plan);
    }

    #[test]
    fn subarray_rejects_duplicates() {
        let plan = catalog::get("A_8(1)").unwrap().plan.clone();
        assert!(plan.subarray(&[0, 0], &[0, 1], false).is_err());
        assert!(plan.subarray(&[0], &[0, 7, 7], false).is_err());
        assert!(plan.subarray(&[9], &[0], false).is_err());
    }

    #[test]
    fn subarray_keeps_levels_unless_relabelled() {
        let r7 = catalog::get("R^7").unwrap().plan.clone();
        // 0-based column reading: row 2 of the selection uses only 3 of its
        // 4 declared levels.
        let sub = r7
            .subarray(&[0, 1], &[2, 3, 7, 8, 10, 12, 13], false)
            .unwrap();
        assert_eq!(sub.plan.levels(1), 4);
        let used: BTreeSet<usize> = sub.plan.rows[1].iter().copied().collect();
        assert_eq!(used.len(), 3);
        // Recompacting maps the used levels to 0..3 in order of appearance.
        let sub = r7
            .subarray(&[0, 1], &[2, 3, 7, 8, 10, 12, 13], true)
            .unwrap();
        assert_eq!(sub.plan.rows[1], vec![0, 1, 1, 0, 2, 0, 1]);
        assert_eq!(sub.level_maps[1], vec![None, Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn juxtapose_duplication_doubles_replication() {
        let a8 = catalog::get("A_8(1)").unwrap().plan.clone();
        let b = a8.clone();
        let twice = juxtapose(&[vec![&a8, &b]]).unwrap();
        assert_eq!(twice.m(), 5);
        assert_eq!(twice.n(), 16);
        for i in 0..5 {
            let doubled: Vec<u64> = a8
                .replication_vector(i)
                .unwrap()
                .iter()
                .map(|&v| 2 * v)
                .collect();
            assert_eq!(twice.replication_vector(i).unwrap(), doubled);
        }
    }

    #[test]
    fn juxtapose_row_sums_incidence() {
        let a = catalog::get("A_8(1)").unwrap().plan.clone();
        let b = catalog::get("A_8(3)").unwrap().plan.clone().with_name("b");
        let joined = juxtapose(&[vec![&a, &b]]).unwrap();
        let inc = joined.incidence(0, 1).unwrap();
        let ia = a.incidence(0, 1).unwrap();
        let ib = b.incidence(0, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(inc.n_ab[i][j], ia.n_ab[i][j] + ib.n_ab[i][j]);
            }
        }
    }

    #[test]
    fn juxtapose_rejects_mismatches() {
        let a8 = catalog::get("A_8(1)").unwrap().plan.clone();
        let a12 = catalog::get("A_12(1)").unwrap().plan.clone();
        // same factor count but different run counts in one grid column
        assert!(juxtapose(&[vec![&a8], vec![&a12]]).is_err());
        // different level counts in one grid row
        assert!(juxtapose(&[vec![&a8, &a12]]).is_err());
    }

    #[test]
    fn plan_document_round_trip() {
        let plan = catalog::get("A_12(3)").unwrap().plan.clone();
        let text = plan.to_json().unwrap();
        let back = MainEffectPlan::from_json(&text).unwrap();
        assert_eq!(back, plan);
        assert_eq!(back.name, plan.name);
    }

    #[test]
    fn plan_document_rejects_bad_runs() {
        let text = r#"{"name":"x","runs":3,"factors":[{"name":"A","levels":2}],"rows":[[0,1]]}"#;
        assert!(MainEffectPlan::from_json(text).is_err());
    }
}
