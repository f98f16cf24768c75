//! Embedded library of small main effect plans and replacing arrays.
//!
//! Every entry carries the plan itself, the expected orthogonality graph
//! (pairs that are mutually partial or non-orthogonal; all other pairs are
//! orthogonal), and structural tags. The expected graphs are enforced
//! against the computed ones by the test suite, not at load time. Entries
//! are frozen verbatim; oddities of individual arrays are recorded in their
//! `notes`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::plan::{Factor, MainEffectPlan};

/// Structural annotations of a catalog entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tags {
    /// Degrees of freedom fill the runs: `sum(a_i - 1) = n - 1`.
    pub saturated: bool,
    /// Every factor is equally replicated.
    pub equal_frequency: bool,
    /// Largest class of the computed partition.
    pub class_size: usize,
    /// Shape signature `rho(n,m; classes)` with per-class level lists.
    pub signature: &'static str,
}

/// Expected orthogonality relations: the listed pairs (by factor name) are
/// mutually partial or non-orthogonal, every unlisted pair is orthogonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedGraph {
    pub partial: &'static [(&'static str, &'static str)],
    pub non_orthogonal: &'static [(&'static str, &'static str)],
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub plan: MainEffectPlan,
    pub expected: ExpectedGraph,
    pub tags: Tags,
    pub notes: &'static str,
}

/// Two-factor replacing array on `s` runs with `p` and `q` levels
/// (`p + q = s + 1`): the first row holds `q` zeros then `1..p-1`, the
/// second `0..q-1` then `p-1` zeros, so each run pairs a nonzero level of
/// one factor with level 0 of the other.
pub fn two_factor_replacer_plan(s: usize, p: usize, q: usize) -> Result<MainEffectPlan> {
    if p < 2 || q < 2 {
        return Err(Error::BadParams(format!(
            "both level counts must be at least 2 (got p={p}, q={q})"
        )));
    }
    if p + q != s + 1 {
        return Err(Error::BadParams(format!(
            "a 2-factor replacer on {s} runs needs p + q = {} (got p={p}, q={q})",
            s + 1
        )));
    }
    let mut row1 = vec![0usize; q];
    row1.extend(1..p);
    let mut row2: Vec<usize> = (0..q).collect();
    row2.extend(std::iter::repeat_n(0, p - 1));
    Ok(MainEffectPlan::new(
        format!("A_{s}(1)[{p}.{q}]"),
        vec![Factor::new("A", p), Factor::new("B", q)],
        vec![row1, row2],
    ))
}

/// The `rho(2p, 3; {p^2}.2)` family: two `p`-level rows (the second a
/// cyclic shift of the first on the second half) and one binary row.
pub fn family_a2p_plan(p: usize) -> Result<MainEffectPlan> {
    if p < 2 {
        return Err(Error::BadParams("family needs p >= 2".into()));
    }
    let row1: Vec<usize> = (0..p).chain(0..p).collect();
    let row2: Vec<usize> = (0..p).chain((0..p).map(|i| (i + 1) % p)).collect();
    let row3: Vec<usize> = std::iter::repeat_n(0, p)
        .chain(std::iter::repeat_n(1, p))
        .collect();
    Ok(MainEffectPlan::new(
        format!("A_{}(2p)[p={p}]", 2 * p),
        vec![
            Factor::new("A", p),
            Factor::new("B", p),
            Factor::new("C", 2),
        ],
        vec![row1, row2, row3],
    ))
}

/// Instantiate a parameterized family: `"A_2p(1)"` takes `[p]`,
/// `"A_s(1)"` takes `[s, p, q]`.
pub fn instantiate_family(name: &str, params: &[usize]) -> Result<MainEffectPlan> {
    match (name, params) {
        ("A_2p(1)", [p]) => family_a2p_plan(*p),
        ("A_s(1)", [s, p, q]) => two_factor_replacer_plan(*s, *p, *q),
        ("A_2p(1)", _) => Err(Error::BadParams("A_2p(1) takes one parameter p".into())),
        ("A_s(1)", _) => Err(Error::BadParams("A_s(1) takes parameters s, p, q".into())),
        _ => Err(Error::UnknownEntry {
            name: name.to_string(),
            suggestion: nearest(name, &["A_2p(1)", "A_s(1)"]),
        }),
    }
}

fn named_plan(name: &str, levels: &[usize], rows: &[&[usize]]) -> MainEffectPlan {
    let factors = levels
        .iter()
        .enumerate()
        .map(|(i, &a)| Factor::new(crate::plan::default_name(i), a))
        .collect();
    MainEffectPlan::new(name, factors, rows.iter().map(|r| r.to_vec()).collect())
}

fn build_entries() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    let mut push = |name: &'static str,
                    aliases: &'static [&'static str],
                    plan: MainEffectPlan,
                    partial: &'static [(&'static str, &'static str)],
                    non_orthogonal: &'static [(&'static str, &'static str)],
                    tags: Tags,
                    notes: &'static str| {
        out.push(CatalogEntry {
            name,
            aliases,
            plan,
            expected: ExpectedGraph {
                partial,
                non_orthogonal,
            },
            tags,
            notes,
        });
    };

    push(
        "A_8(1)",
        &["A_8(3)"],
        named_plan(
            "A_8(1)",
            &[3, 3, 2, 2, 2],
            &[
                &[0, 1, 0, 2, 0, 1, 0, 2],
                &[0, 0, 1, 2, 2, 1, 0, 0],
                &[0, 0, 0, 0, 1, 1, 1, 1],
                &[0, 1, 1, 1, 0, 0, 1, 0],
                &[0, 1, 1, 0, 1, 0, 0, 1],
            ],
        ),
        &[("A", "B")],
        &[("C", "D")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(8,5; {3^2}.{2^2}.2)",
        },
        "Level 0 of A satisfies the level condition with B and conversely, \
         so the ternary pair is mutually partial.",
    );

    push(
        "A_12(1)",
        &[],
        named_plan(
            "A_12(1)",
            &[2, 4, 4, 3, 3],
            &[
                &[0, 1, 0, 1, 0, 1, 1, 0, 1, 0, 1, 0],
                &[0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3],
                &[1, 2, 3, 2, 3, 0, 3, 0, 1, 0, 1, 2],
                &[0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2],
                &[0, 1, 2, 2, 1, 0, 0, 2, 1, 1, 2, 0],
            ],
        ),
        &[("D", "E")],
        &[("A", "B"), ("A", "C"), ("B", "C")],
        Tags {
            saturated: true,
            equal_frequency: true,
            class_size: 3,
            signature: "rho(12,5; {2.4^2}.{3^2})",
        },
        "B and C form a balanced incomplete block pattern between \
         themselves; levels {0,2} of D satisfy the pair condition with E.",
    );

    push(
        "A_5(1)",
        &[],
        named_plan(
            "A_5(1)",
            &[2, 2, 3],
            &[&[0, 1, 0, 1, 0], &[0, 1, 1, 0, 0], &[0, 0, 1, 1, 2]],
        ),
        &[],
        &[("A", "B"), ("A", "C"), ("B", "C")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 3,
            signature: "rho(5,3; {2^2.3})",
        },
        "No pair is orthogonal outright, but A is orthogonal to B through C.",
    );

    push(
        "A_5(2)",
        &[],
        named_plan(
            "A_5(2)",
            &[2, 2, 2, 2],
            &[
                &[0, 0, 1, 1, 0],
                &[0, 1, 0, 1, 0],
                &[0, 1, 1, 0, 0],
                &[0, 0, 0, 0, 1],
            ],
        ),
        &[],
        &[
            ("A", "B"),
            ("A", "C"),
            ("A", "D"),
            ("B", "C"),
            ("B", "D"),
            ("C", "D"),
        ],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 4,
            signature: "rho(5,4; {2^4})",
        },
        "Every factor in {A,B,C} is orthogonal to every other through D; \
         dropping run 4 and factor D leaves the four-run strength-2 array.",
    );

    push(
        "A_4(1)",
        &[],
        two_factor_replacer_plan(4, 2, 3)
            .unwrap()
            .with_name("A_4(1)"),
        &[],
        &[("A", "B")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(4,2; {2.3})",
        },
        "Two-factor replacer with p=2, q=3; the pair {1,2} of B is \
         orthogonal toward A, the reverse direction has no partial contrast.",
    );

    push(
        "A_4(2)",
        &[],
        named_plan("A_4(2)", &[3, 2], &[&[0, 1, 0, 2], &[0, 1, 1, 0]]),
        &[],
        &[("A", "B")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(4,2; {3.2})",
        },
        "Level 0 of A satisfies the level condition with B, so A is \
         one-way partial toward B; both contrasts of A are not equally \
         precise, unlike in A_4(1).",
    );

    push(
        "A_5(3)",
        &[],
        two_factor_replacer_plan(5, 4, 2)
            .unwrap()
            .with_name("A_5(3)"),
        &[],
        &[("A", "B")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(5,2; {4.2})",
        },
        "",
    );

    push(
        "A_5(4)",
        &[],
        two_factor_replacer_plan(5, 3, 3)
            .unwrap()
            .with_name("A_5(4)"),
        &[("A", "B")],
        &[],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(5,2; {3^2})",
        },
        "p = q = 3 on five runs (p + q = s + 1); every nonzero-level pair \
         of each factor is a witness, so the pair is mutually partial.",
    );

    push(
        "A_7(1)",
        &[],
        two_factor_replacer_plan(7, 6, 2)
            .unwrap()
            .with_name("A_7(1)"),
        &[],
        &[("A", "B")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(7,2; {6.2})",
        },
        "",
    );

    push(
        "A_7(2)",
        &[],
        named_plan(
            "A_7(2)",
            &[3, 3, 3],
            &[
                &[0, 0, 0, 1, 1, 2, 2],
                &[0, 1, 2, 0, 1, 0, 2],
                &[0, 1, 2, 1, 2, 2, 0],
            ],
        ),
        &[],
        &[("A", "B"), ("A", "C"), ("B", "C")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 3,
            signature: "rho(7,3; {3^3})",
        },
        "",
    );

    // Rows 1-2 of R^7 restricted to seven columns. The two column readings
    // are both kept; the level counts decide which one realizes {4^2}.
    push(
        "A_7(3)/1based",
        &["A_7(3)"],
        named_plan(
            "A_7(3)",
            &[4, 4],
            &[&[0, 0, 1, 1, 2, 2, 3], &[0, 1, 1, 2, 1, 3, 1]],
        ),
        &[],
        &[("A", "B")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(7,2; {4^2})",
        },
        "Column numbers read 1-based; both rows use all four levels.",
    );

    push(
        "A_7(3)/0based",
        &[],
        named_plan(
            "A_7(3)/0based",
            &[4, 4],
            &[&[0, 0, 1, 2, 2, 3, 3], &[1, 2, 2, 1, 3, 1, 2]],
        ),
        &[],
        &[("A", "B")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(7,2; {4.3+})",
        },
        "Column numbers read 0-based; level 0 of the second row is unused, \
         so this candidate is not connected and does not realize {4^2}.",
    );

    push(
        "R^4",
        &[],
        named_plan(
            "R^4",
            &[2, 3, 2, 3],
            &[
                &[0, 0, 1, 0, 0, 1, 1, 1],
                &[0, 1, 0, 2, 0, 1, 0, 2],
                &[1, 0, 0, 1, 0, 1, 1, 0],
                &[2, 1, 0, 0, 0, 0, 1, 2],
            ],
        ),
        &[("B", "D")],
        &[],
        Tags {
            saturated: false,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(8,4; {3^2}.2^2)",
        },
        "Replacing array for the two-stage build with s=4; its two ternary \
         rows carry the same incidence pattern as A and B of A_8(1).",
    );

    push(
        "R^5",
        &[],
        named_plan(
            "R^5",
            &[3, 3, 3, 3],
            &[
                &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2],
                &[0, 0, 1, 2, 0, 0, 1, 2, 1, 2],
                &[0, 1, 0, 2, 2, 0, 1, 0, 2, 1],
                &[0, 1, 2, 0, 2, 0, 0, 1, 1, 2],
            ],
        ),
        &[
            ("A", "B"),
            ("A", "C"),
            ("A", "D"),
            ("B", "C"),
            ("B", "D"),
            ("C", "D"),
        ],
        &[],
        Tags {
            saturated: false,
            equal_frequency: false,
            class_size: 4,
            signature: "rho(10,4; {3^4})",
        },
        "Replacing array for the two-stage build with s=5; rows 2-4 are \
         pairwise orthogonal through row 1.",
    );

    push(
        "R^7",
        &[],
        named_plan(
            "R^7",
            &[4, 4, 4, 4],
            &[
                &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 3, 3],
                &[0, 0, 1, 2, 0, 0, 1, 2, 1, 1, 3, 3, 1, 2],
                &[0, 1, 0, 2, 2, 0, 1, 0, 1, 3, 1, 3, 2, 1],
                &[0, 1, 2, 0, 2, 0, 0, 1, 1, 3, 3, 1, 1, 2],
            ],
        ),
        &[
            ("A", "B"),
            ("A", "C"),
            ("A", "D"),
            ("B", "C"),
            ("B", "D"),
            ("C", "D"),
        ],
        &[],
        Tags {
            saturated: false,
            equal_frequency: false,
            class_size: 4,
            signature: "rho(14,4; {4^4})",
        },
        "Replacing array for the two-stage build with s=7; rows 2-4 are \
         pairwise orthogonal through row 1.",
    );

    push(
        "A_6(1)",
        &[],
        named_plan(
            "A_6(1)",
            &[3, 2, 2, 2],
            &[
                &[0, 0, 1, 1, 2, 2],
                &[0, 1, 0, 0, 1, 0],
                &[0, 1, 0, 1, 0, 1],
                &[0, 1, 1, 0, 0, 1],
            ],
        ),
        &[],
        &[("A", "B"), ("C", "D")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(6,4; {3.2}.{2^2})",
        },
        "The contrast a0 - a2 of A is orthogonal toward B, but the single \
         contrast of B is not orthogonal back, so the pair classifies as \
         non-orthogonal rather than mutually partial.",
    );

    push(
        "A_8(2)",
        &[],
        named_plan(
            "A_8(2)",
            &[3, 2, 2, 2, 2, 2],
            &[
                &[0, 1, 2, 0, 0, 2, 1, 0],
                &[0, 0, 0, 0, 1, 1, 1, 1],
                &[0, 0, 1, 1, 0, 0, 1, 1],
                &[0, 1, 0, 1, 0, 1, 0, 1],
                &[0, 1, 1, 0, 1, 0, 0, 1],
                &[0, 0, 0, 1, 1, 0, 0, 0],
            ],
        ),
        &[],
        &[("A", "F")],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(8,6; {3.2}.2^4)",
        },
        "An unequally replicated binary factor F added to an eight-run \
         array; F stays orthogonal to everything except A.",
    );

    push(
        "A_8(4)",
        &[],
        family_a2p_plan(4).unwrap().with_name("A_8(4)"),
        &[("A", "B")],
        &[],
        Tags {
            saturated: true,
            equal_frequency: true,
            class_size: 2,
            signature: "rho(8,3; {4^2}.2)",
        },
        "The four-level rows form a group divisible pattern; their mutual \
         partial orthogonality has no single-level or level-pair witness \
         and is certified by the covariance test alone.",
    );

    push(
        "A_8(5)",
        &[],
        named_plan(
            "A_8(5)",
            &[4, 3, 2, 2],
            &[
                &[0, 1, 2, 3, 0, 1, 2, 3],
                &[0, 1, 2, 0, 2, 0, 0, 1],
                &[0, 1, 0, 1, 1, 0, 1, 0],
                &[0, 0, 0, 0, 1, 1, 1, 1],
            ],
        ),
        &[("A", "B")],
        &[],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(8,4; {4.3}.2^2)",
        },
        "",
    );

    push(
        "A_10",
        &[],
        family_a2p_plan(5).unwrap().with_name("A_10"),
        &[],
        &[("A", "B")],
        Tags {
            saturated: true,
            equal_frequency: true,
            class_size: 2,
            signature: "rho(10,3; {5^2}.2)",
        },
        "The five-level rows form a symmetric cyclic partially balanced \
         pattern.",
    );

    push(
        "A_12(2)",
        &[],
        named_plan(
            "A_12(2)",
            &[3, 3, 3, 4],
            &[
                &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2],
                &[0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2],
                &[0, 1, 2, 0, 0, 0, 1, 2, 1, 2, 0, 0],
                &[0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3],
            ],
        ),
        &[],
        &[("A", "B"), ("C", "D")],
        Tags {
            saturated: false,
            equal_frequency: false,
            class_size: 2,
            signature: "rho(12,4; {3^2}.{3.4})",
        },
        "D is one-way partial toward C (contrast d1 - d2), C is \
         non-orthogonal to D; A and B form a balanced block pattern.",
    );

    push(
        "A_12(3)",
        &[],
        named_plan(
            "A_12(3)",
            &[2, 2, 2, 2, 3, 3, 3],
            &[
                &[0, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1],
                &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
                &[0, 0, 1, 1, 1, 1, 0, 0, 0, 1, 1, 0],
                &[0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 0],
                &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2],
                &[0, 1, 0, 2, 1, 2, 2, 0, 2, 0, 1, 1],
                &[0, 1, 1, 2, 2, 0, 1, 2, 2, 1, 0, 0],
            ],
        ),
        &[],
        &[("E", "F"), ("E", "G"), ("F", "G")],
        Tags {
            saturated: false,
            equal_frequency: true,
            class_size: 3,
            signature: "rho(12,7; 2^4.{3^3})",
        },
        "",
    );

    push(
        "A_12(4)",
        &[],
        named_plan(
            "A_12(4)",
            &[3, 3, 3, 3, 3, 2],
            &[
                &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2],
                &[2, 1, 2, 0, 0, 2, 1, 1, 0, 1, 0, 2],
                &[0, 1, 2, 1, 0, 2, 1, 2, 1, 2, 0, 0],
                &[0, 0, 1, 2, 0, 0, 1, 2, 0, 0, 1, 2],
                &[2, 1, 0, 0, 0, 1, 0, 2, 2, 0, 1, 0],
                &[0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1],
            ],
        ),
        &[],
        &[
            ("A", "B"),
            ("A", "C"),
            ("B", "C"),
            ("D", "E"),
            ("D", "F"),
            ("E", "F"),
        ],
        Tags {
            saturated: true,
            equal_frequency: false,
            class_size: 3,
            signature: "rho(12,6; {3^3}.{3^2.2})",
        },
        "D and E are one-way partial toward F (level 0 witnesses); the \
         binary factor cannot be partial back.",
    );

    push(
        "A_15",
        &[],
        named_plan(
            "A_15",
            &[3, 3, 5, 5],
            &[
                &[0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2],
                &[0, 1, 2, 2, 0, 1, 1, 2, 0, 0, 1, 2, 2, 0, 1],
                &[0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4],
                &[0, 1, 2, 1, 2, 3, 2, 3, 4, 3, 4, 0, 4, 0, 1],
            ],
        ),
        &[("B", "D")],
        &[("A", "B"), ("C", "D")],
        Tags {
            saturated: false,
            equal_frequency: true,
            class_size: 4,
            signature: "rho(15,4; {3^2.5^2})",
        },
        "As transcribed, B and D are mutually partial rather than \
         orthogonal (level 2 of B and levels 2,3,4 of D are witnesses), so \
         all four factors fall in one class; the plan is also two degrees \
         of freedom short of saturation.",
    );

    out
}

fn entries() -> &'static [CatalogEntry] {
    static ENTRIES: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    ENTRIES.get_or_init(build_entries)
}

/// Look up an entry by name or alias. Unknown names get a nearest-name
/// suggestion.
pub fn get(name: &str) -> Result<&'static CatalogEntry> {
    for e in entries() {
        if e.name == name || e.aliases.contains(&name) {
            return Ok(e);
        }
    }
    let names: Vec<&str> = entries()
        .iter()
        .flat_map(|e| std::iter::once(e.name).chain(e.aliases.iter().copied()))
        .collect();
    Err(Error::UnknownEntry {
        name: name.to_string(),
        suggestion: nearest(name, &names),
    })
}

fn nearest(name: &str, candidates: &[&str]) -> Option<String> {
    candidates
        .iter()
        .map(|c| (edit_distance(name, c), *c))
        .min()
        .map(|(_, c)| c.to_string())
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1];
        for (j, &cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            cur.push((prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1));
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Filter for [`list`]. Unset fields match everything.
#[derive(Debug, Clone, Default)]
pub struct ListFilter {
    pub saturated: Option<bool>,
    pub equal_frequency: Option<bool>,
    pub class_size: Option<usize>,
}

/// All entries matching the filter, in stable (insertion) order.
pub fn list(filter: &ListFilter) -> Vec<&'static CatalogEntry> {
    entries()
        .iter()
        .filter(|e| {
            filter.saturated.is_none_or(|v| e.tags.saturated == v)
                && filter
                    .equal_frequency
                    .is_none_or(|v| e.tags.equal_frequency == v)
                && filter.class_size.is_none_or(|v| e.tags.class_size == v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ortho::{self, RelationKind};

    #[test]
    fn every_entry_validates() {
        for e in entries() {
            e.plan.validate().unwrap_or_else(|err| {
                panic!("{} fails validation: {err}", e.name);
            });
        }
    }

    #[test]
    fn saturation_tag_matches_the_degree_count() {
        for e in entries() {
            let df: usize = e.plan.factors.iter().map(|f| f.levels - 1).sum();
            assert_eq!(
                e.tags.saturated,
                df == e.plan.n() - 1,
                "{}: df {} on {} runs",
                e.name,
                df,
                e.plan.n()
            );
        }
    }

    #[test]
    fn equal_frequency_tag_matches_the_replication_vectors() {
        for e in entries() {
            let ef = (0..e.plan.m()).all(|i| {
                let r = e.plan.replication_vector(i).unwrap();
                r.iter().all(|&c| c == r[0])
            });
            assert_eq!(e.tags.equal_frequency, ef, "{}", e.name);
        }
    }

    #[test]
    fn expected_graph_pairs_name_real_factors() {
        for e in entries() {
            for (a, b) in e.expected.partial.iter().chain(e.expected.non_orthogonal) {
                assert!(e.plan.factor_index(a).is_some(), "{}: {a}", e.name);
                assert!(e.plan.factor_index(b).is_some(), "{}: {b}", e.name);
            }
        }
    }

    #[test]
    fn computed_graphs_match_stored_expected_graphs() {
        for e in entries() {
            let g = ortho::orthogonality_graph(&e.plan).unwrap();
            for a in 0..e.plan.m() {
                for b in (a + 1)..e.plan.m() {
                    let (na, nb) = (&e.plan.factors[a].name, &e.plan.factors[b].name);
                    let stored = if e
                        .expected
                        .partial
                        .iter()
                        .any(|(x, y)| (x == na && y == nb) || (x == nb && y == na))
                    {
                        RelationKind::Partial
                    } else if e
                        .expected
                        .non_orthogonal
                        .iter()
                        .any(|(x, y)| (x == na && y == nb) || (x == nb && y == na))
                    {
                        RelationKind::NonOrthogonal
                    } else {
                        RelationKind::Orthogonal
                    };
                    assert_eq!(g.kind(a, b), stored, "{}: pair ({na},{nb})", e.name);
                }
            }
            assert_eq!(g.max_class_size, e.tags.class_size, "{}", e.name);
        }
    }

    #[test]
    fn aliases_resolve_to_the_same_array() {
        assert_eq!(get("A_8(3)").unwrap().plan, get("A_8(1)").unwrap().plan);
        assert_eq!(
            get("A_7(3)").unwrap().plan,
            get("A_7(3)/1based").unwrap().plan
        );
    }

    #[test]
    fn unknown_name_suggests_nearest() {
        match get("A_8(7)") {
            Err(Error::UnknownEntry { suggestion, .. }) => {
                assert!(suggestion.is_some());
            }
            other => panic!("expected UnknownEntry, got {other:?}"),
        }
    }

    #[test]
    fn list_filters() {
        let saturated: Vec<&str> = list(&ListFilter {
            saturated: Some(true),
            ..Default::default()
        })
        .iter()
        .map(|e| e.name)
        .collect();
        for name in ["A_8(1)", "A_12(1)", "A_12(4)"] {
            assert!(saturated.contains(&name), "{name}");
        }
        for name in ["A_12(2)", "A_12(3)"] {
            assert!(!saturated.contains(&name), "{name}");
        }
        let size3: Vec<&str> = list(&ListFilter {
            class_size: Some(3),
            ..Default::default()
        })
        .iter()
        .map(|e| e.name)
        .collect();
        for name in ["A_12(1)", "A_12(3)", "A_12(4)"] {
            assert!(size3.contains(&name), "{name}");
        }
        for name in ["A_8(1)", "A_15", "A_12(2)"] {
            assert!(!size3.contains(&name), "{name}");
        }
        assert_eq!(list(&ListFilter::default()).len(), entries().len());
    }

    #[test]
    fn family_instances() {
        // p = 4 gives the two four-level rows plus a binary row on 8 runs
        let a84 = instantiate_family("A_2p(1)", &[4]).unwrap();
        assert_eq!(a84, get("A_8(4)").unwrap().plan);
        // p = 5 is the ten-run entry with two five-level rows
        let a10 = instantiate_family("A_2p(1)", &[5]).unwrap();
        assert_eq!(a10, get("A_10").unwrap().plan);
        // p = 3: levels of A form a balanced incomplete block pattern with B
        let a6 = instantiate_family("A_2p(1)", &[3]).unwrap();
        let inc = a6.incidence(0, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if (i == j) || (j == (i + 1) % 3) { 1 } else { 0 };
                assert_eq!(inc.n_ab[i][j], expect);
            }
        }
        // smallest instance
        let a4 = instantiate_family("A_2p(1)", &[2]).unwrap();
        assert_eq!(a4.n(), 4);
        assert_eq!(
            a4.factors.iter().map(|f| f.levels).collect::<Vec<_>>(),
            vec![2, 2, 2]
        );
        assert!(instantiate_family("A_2p(1)", &[1]).is_err());
        assert!(instantiate_family("B_2p", &[2]).is_err());
    }

    #[test]
    fn four_level_pair_of_a12_1_is_balanced_incomplete() {
        let plan = &get("A_12(1)").unwrap().plan;
        let inc = plan.incidence(1, 2).unwrap();
        for i in 0..4 {
            assert_eq!(inc.n_ab[i][i], 0);
            for j in 0..4 {
                if i != j {
                    assert_eq!(inc.n_ab[i][j], 1);
                }
            }
        }
    }

    #[test]
    fn ternary_pair_of_a12_2_is_balanced_block() {
        let plan = &get("A_12(2)").unwrap().plan;
        let inc = plan.incidence(0, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 2 } else { 1 };
                assert_eq!(inc.n_ab[i][j], expect);
            }
        }
    }

    #[test]
    fn seven_run_four_level_candidate_is_decided_by_level_usage() {
        let good = &get("A_7(3)/1based").unwrap().plan;
        for i in 0..2 {
            let used = good.rows[i]
                .iter()
                .collect::<std::collections::BTreeSet<_>>()
                .len();
            assert_eq!(used, 4);
        }
        let bad = &get("A_7(3)/0based").unwrap().plan;
        let used = bad.rows[1]
            .iter()
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        assert_eq!(used, 3);
        // the winning candidate really is a usable {4^2} replacing array
        let conn = crate::analysis::is_connected(good).unwrap();
        assert!(conn.iter().all(|&b| b));
        let conn = crate::analysis::is_connected(bad).unwrap();
        assert!(!conn[1]);
    }

    #[test]
    fn two_factor_replacer_parameter_checks() {
        assert!(two_factor_replacer_plan(5, 3, 2).is_err());
        assert!(two_factor_replacer_plan(4, 1, 4).is_err());
        let a5_4 = two_factor_replacer_plan(5, 3, 3).unwrap();
        assert_eq!(a5_4.rows[0], vec![0, 0, 0, 1, 2]);
        assert_eq!(a5_4.rows[1], vec![0, 1, 2, 0, 0]);
    }
}
