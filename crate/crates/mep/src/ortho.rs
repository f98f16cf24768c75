//! Exact-arithmetic orthogonality checkers and the plan-wide orthogonality
//! graph.
//!
//! Two factors are orthogonal when their incidence matrix satisfies the
//! proportional frequency condition (PFC) of Addelman:
//! `n * n_ab(i,j) = r_a(i) * r_b(j)` for every level pair. All incidence
//! checks here cross-multiply in 64-bit integers (with overflow detection),
//! so the decisions are exact, never tolerance-based. Partial orthogonality
//! of one factor toward another is decided by the BLUE covariance test on
//! the pair-plus-mean submodel; level and level-pair PFC witnesses are
//! attached as human-readable evidence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::error::{Error, Result};
use crate::plan::{ClassPartition, IncidenceSummary, MainEffectPlan};

fn mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn pfc_of_incidence(inc: &IncidenceSummary) -> Result<bool> {
    for (i, row) in inc.n_ab.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if mul(inc.n, c)? != mul(inc.r_a[i], inc.r_b[j])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Proportional frequency condition for the pair `(a, b)`.
pub fn check_pfc(plan: &MainEffectPlan, a: usize, b: usize) -> Result<bool> {
    pfc_of_incidence(&plan.incidence(a, b)?)
}

/// PFC of the single level `i` of factor `a` with factor `b`:
/// `n * n_ab(i, j) = r_a(i) * r_b(j)` for all `j`.
pub fn level_pfc(plan: &MainEffectPlan, a: usize, i: usize, b: usize) -> Result<bool> {
    let inc = plan.incidence(a, b)?;
    if i >= inc.r_a.len() {
        return Err(Error::IndexOutOfRange {
            what: "level",
            index: i,
            len: inc.r_a.len(),
        });
    }
    for (j, &c) in inc.n_ab[i].iter().enumerate() {
        if mul(inc.n, c)? != mul(inc.r_a[i], inc.r_b[j])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// PFC of the level pair `{i, k}` of factor `a` with factor `b`, in the
/// cross-multiplied exact form `r_a(k) * n_ab(i,j) = r_a(i) * n_ab(k,j)`.
pub fn pair_pfc(plan: &MainEffectPlan, a: usize, i: usize, k: usize, b: usize) -> Result<bool> {
    if i == k {
        return Err(Error::BadParams("level pair must be distinct".into()));
    }
    let inc = plan.incidence(a, b)?;
    for &lv in &[i, k] {
        if lv >= inc.r_a.len() {
            return Err(Error::IndexOutOfRange {
                what: "level",
                index: lv,
                len: inc.r_a.len(),
            });
        }
    }
    for j in 0..inc.r_b.len() {
        if mul(inc.r_a[k], inc.n_ab[i][j])? != mul(inc.r_a[i], inc.n_ab[k][j])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Orthogonality of `a` to `b` through `c`:
/// `N_ac (R_c)^{-1} N_cb = N_ab`, evaluated in exact rational arithmetic
/// over a common denominator.
pub fn orthogonal_through(plan: &MainEffectPlan, a: usize, b: usize, c: usize) -> Result<bool> {
    if a == b || a == c || b == c {
        return Err(Error::BadParams("factors must be distinct".into()));
    }
    let n_ac = plan.incidence(a, c)?;
    let n_cb = plan.incidence(c, b)?;
    let n_ab = plan.incidence(a, b)?;
    let r_c = &n_ac.r_b;
    for (lv, &r) in r_c.iter().enumerate() {
        if r == 0 {
            return Err(Error::UnusedLevel {
                factor: plan.factors[c].name.clone(),
                level: lv,
            });
        }
    }
    let mut denom: i128 = 1;
    for &r in r_c {
        denom = lcm(denom, r as i128);
    }
    let la = plan.levels(a);
    let lb = plan.levels(b);
    for i in 0..la {
        for j in 0..lb {
            let mut lhs: i128 = 0;
            for (k, &r) in r_c.iter().enumerate() {
                lhs += n_ac.n_ab[i][k] as i128 * n_cb.n_ab[k][j] as i128 * (denom / r as i128);
            }
            if lhs != n_ab.n_ab[i][j] as i128 * denom {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i128, b: i128) -> i128 {
    a / gcd(a, b) * b
}

/// How one factor relates to another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationKind {
    Orthogonal,
    Partial,
    NonOrthogonal,
}

impl std::fmt::Display for RelationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RelationKind::Orthogonal => "orthogonal",
            RelationKind::Partial => "partial",
            RelationKind::NonOrthogonal => "non-orthogonal",
        };
        write!(f, "{s}")
    }
}

/// The relation of factor `a` toward factor `b`, with evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedRelation {
    pub kind: RelationKind,
    /// Levels of `a` satisfying the single-level PFC with `b`.
    pub level_witnesses: Vec<usize>,
    /// Level pairs of `a` satisfying the pairwise PFC with `b`.
    pub pair_witnesses: Vec<(usize, usize)>,
    /// Dimension of the subspace of `a`'s contrasts whose BLUEs are
    /// uncorrelated with every contrast BLUE of `b` in the pair-plus-mean
    /// submodel. `None` when that submodel is not connected.
    pub zero_covariance_dim: Option<usize>,
}

/// Classify the ordered relation of `a` toward `b`.
///
/// The pair is orthogonal iff it satisfies PFC. Otherwise `a` is partially
/// orthogonal to `b` iff the dimension of the zero-covariance contrast
/// subspace is strictly between 0 and `levels(a) - 1` (the covariance test
/// subsumes the level / level-pair witnesses, which are reported alongside).
pub fn partial_orthogonality(
    plan: &MainEffectPlan,
    a: usize,
    b: usize,
) -> Result<DirectedRelation> {
    let orthogonal = check_pfc(plan, a, b)?;
    let la = plan.levels(a);
    let mut level_witnesses = Vec::new();
    let mut pair_witnesses = Vec::new();
    for i in 0..la {
        if level_pfc(plan, a, i, b)? {
            level_witnesses.push(i);
        }
    }
    for i in 0..la {
        for k in (i + 1)..la {
            if pair_pfc(plan, a, i, k, b)? {
                pair_witnesses.push((i, k));
            }
        }
    }
    if orthogonal {
        return Ok(DirectedRelation {
            kind: RelationKind::Orthogonal,
            level_witnesses,
            pair_witnesses,
            zero_covariance_dim: Some(la - 1),
        });
    }
    let pair_plan = plan.select_factors(&[a, b])?;
    match analysis::blue_covariance(&pair_plan, 0, 1) {
        Ok(cov) => {
            let z = cov.zero_dim_a;
            let kind = if z > 0 && z < la - 1 {
                RelationKind::Partial
            } else {
                RelationKind::NonOrthogonal
            };
            Ok(DirectedRelation {
                kind,
                level_witnesses,
                pair_witnesses,
                zero_covariance_dim: Some(z),
            })
        }
        Err(Error::NotConnected { .. }) => Ok(DirectedRelation {
            kind: RelationKind::NonOrthogonal,
            level_witnesses,
            pair_witnesses,
            zero_covariance_dim: None,
        }),
        Err(e) => Err(e),
    }
}

/// Symmetric relation of an unordered factor pair. `kind` is `Orthogonal`
/// iff the pair satisfies PFC and `Partial` iff the two factors are
/// partially orthogonal to each other (both directions); a one-way partial
/// relation classifies as `NonOrthogonal` and keeps its directional
/// evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRelation {
    pub kind: RelationKind,
    pub a_toward_b: DirectedRelation,
    pub b_toward_a: DirectedRelation,
}

/// Pairwise relations of a plan plus the induced class partition: classes
/// are the connected components of the graph whose edges are the pairs that
/// are not (fully) orthogonal.
#[derive(Debug, Clone)]
pub struct OrthogonalityGraph {
    pub relations: BTreeMap<(usize, usize), PairRelation>,
    pub partition: ClassPartition,
    pub max_class_size: usize,
}

impl OrthogonalityGraph {
    pub fn relation(&self, a: usize, b: usize) -> &PairRelation {
        &self.relations[&(a.min(b), a.max(b))]
    }

    pub fn kind(&self, a: usize, b: usize) -> RelationKind {
        self.relation(a, b).kind
    }
}

pub fn orthogonality_graph(plan: &MainEffectPlan) -> Result<OrthogonalityGraph> {
    let m = plan.m();
    let mut relations = BTreeMap::new();
    let mut dsu: Vec<usize> = (0..m).collect();
    fn find(dsu: &mut Vec<usize>, i: usize) -> usize {
        if dsu[i] != i {
            let root = find(dsu, dsu[i]);
            dsu[i] = root;
        }
        dsu[i]
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let ab = partial_orthogonality(plan, a, b)?;
            let ba = partial_orthogonality(plan, b, a)?;
            let kind = if ab.kind == RelationKind::Orthogonal {
                RelationKind::Orthogonal
            } else if ab.kind == RelationKind::Partial && ba.kind == RelationKind::Partial {
                RelationKind::Partial
            } else {
                RelationKind::NonOrthogonal
            };
            if kind != RelationKind::Orthogonal {
                let (ra, rb) = (find(&mut dsu, a), find(&mut dsu, b));
                if ra != rb {
                    dsu[ra] = rb;
                }
            }
            relations.insert(
                (a, b),
                PairRelation {
                    kind,
                    a_toward_b: ab,
                    b_toward_a: ba,
                },
            );
        }
    }
    let mut classes: BTreeMap<usize, std::collections::BTreeSet<usize>> = BTreeMap::new();
    for i in 0..m {
        let root = find(&mut dsu, i);
        classes.entry(root).or_default().insert(i);
    }
    let mut classes: Vec<_> = classes.into_values().collect();
    classes.sort_by_key(|c| *c.iter().next().unwrap());
    let partition = ClassPartition::new(classes);
    let max_class_size = partition.max_class_size();
    Ok(OrthogonalityGraph {
        relations,
        partition,
        max_class_size,
    })
}

/// True iff every cross-class factor pair of the claimed partition
/// satisfies PFC.
pub fn verify_interclass(plan: &MainEffectPlan, claimed: &ClassPartition) -> Result<bool> {
    claimed.validate(plan.m())?;
    for (ci, class_a) in claimed.classes.iter().enumerate() {
        for class_b in claimed.classes.iter().skip(ci + 1) {
            for &a in class_a {
                for &b in class_b {
                    if !check_pfc(plan, a, b)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Serialized form of an orthogonality graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub plan: String,
    pub pairs: Vec<GraphPair>,
    pub classes: Vec<Vec<String>>,
    pub max_class_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphPair {
    pub a: String,
    pub b: String,
    pub kind: RelationKind,
    pub witnesses: GraphWitnesses,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphWitnesses {
    pub a_toward_b: DirectedRelation,
    pub b_toward_a: DirectedRelation,
}

pub fn graph_document(plan: &MainEffectPlan, graph: &OrthogonalityGraph) -> GraphDocument {
    GraphDocument {
        plan: plan.name.clone(),
        pairs: graph
            .relations
            .iter()
            .map(|(&(a, b), rel)| GraphPair {
                a: plan.factors[a].name.clone(),
                b: plan.factors[b].name.clone(),
                kind: rel.kind,
                witnesses: GraphWitnesses {
                    a_toward_b: rel.a_toward_b.clone(),
                    b_toward_a: rel.b_toward_a.clone(),
                },
            })
            .collect(),
        classes: graph
            .partition
            .classes
            .iter()
            .map(|c| c.iter().map(|&i| plan.factors[i].name.clone()).collect())
            .collect(),
        max_class_size: graph.max_class_size,
    }
}

/// DOT rendering in which adjacency means orthogonality: solid edges join
/// orthogonal pairs, dashed edges mutually partially orthogonal pairs, and
/// non-orthogonal pairs are not joined.
pub fn graph_to_dot(plan: &MainEffectPlan, graph: &OrthogonalityGraph) -> String {
    let mut out = String::new();
    out.push_str(&format!("graph \"{}\" {{\n", plan.name));
    for f in &plan.factors {
        out.push_str(&format!("  \"{}\";\n", f.name));
    }
    for (&(a, b), rel) in &graph.relations {
        match rel.kind {
            RelationKind::Orthogonal => out.push_str(&format!(
                "  \"{}\" -- \"{}\";\n",
                plan.factors[a].name, plan.factors[b].name
            )),
            RelationKind::Partial => out.push_str(&format!(
                "  \"{}\" -- \"{}\" [style=dashed];\n",
                plan.factors[a].name, plan.factors[b].name
            )),
            RelationKind::NonOrthogonal => {}
        }
    }
    out.push_str("}\n");
    out
}
