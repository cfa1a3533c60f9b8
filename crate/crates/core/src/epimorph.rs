//! Enumeration of graph epimorphisms: homomorphisms surjective on both
//! vertices and edges. The maps from an order-1 factor graph onto an (L,M)
//! block graph are exactly the candidate substitutions of the factor-list
//! procedures.

use std::collections::BTreeSet;

use crate::graphs::FactorGraph;
use crate::subst::Substitution;
use crate::{Error, Result};

/// A vertex assignment that is an epimorphism, together with the substitution
/// it induces: each source vertex (a letter) is sent to the word labelling its
/// target vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpiCandidate {
    pub assignment: Vec<usize>,
    pub induced: Substitution,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub pruned_t1: u64,
    pub pruned_t2: u64,
    pub pruned_t3: u64,
    pub pruned_cycles: u64,
    pub candidates_found: u64,
}

#[derive(Debug, Clone)]
pub struct EpiOptions {
    /// Disable the fast-fail checks and cycle pruning (for oracle testing).
    pub pruning: bool,
}

impl Default for EpiOptions {
    fn default() -> Self {
        EpiOptions { pruning: true }
    }
}

/// All epimorphisms from `g1` onto `glm`, canonically ordered by assignment.
pub fn enumerate_epis(
    g1: &FactorGraph,
    glm: &FactorGraph,
) -> Result<(Vec<EpiCandidate>, SearchStats)> {
    enumerate_epis_with(g1, glm, &EpiOptions::default())
}

pub fn enumerate_epis_with(
    g1: &FactorGraph,
    glm: &FactorGraph,
    opts: &EpiOptions,
) -> Result<(Vec<EpiCandidate>, SearchStats)> {
    check_letter_source(g1)?;
    let mut stats = SearchStats::default();
    let ns = g1.vertex_count();
    let nt = glm.vertex_count();

    if opts.pruning {
        // T1: a surjection needs at least as many source vertices.
        if nt > ns {
            stats.pruned_t1 += 1;
            return Ok((Vec::new(), stats));
        }
        // T2: a source loop must land on a target loop.
        if g1.has_loop() && !glm.has_loop() {
            stats.pruned_t2 += 1;
            return Ok((Vec::new(), stats));
        }
        // T3: on equal vertex counts the map is a bijection, so edge
        // surjectivity needs at least as many source edges.
        if ns == nt && g1.edge_count() < glm.edge_count() {
            stats.pruned_t3 += 1;
            return Ok((Vec::new(), stats));
        }
    }

    // Per-vertex domains. With a loop-free target, vertices on 2-cycles
    // (resp. 3-cycles) can only map to vertices on 2-cycles (resp. 3-cycles).
    let mut domains: Vec<Vec<usize>> = vec![(0..nt).collect(); ns];
    for v in 0..ns {
        if g1.has_edge(v, v) {
            domains[v].retain(|&t| glm.has_edge(t, t));
        }
    }
    if opts.pruning && !glm.has_loop() {
        for k in [2usize, 3] {
            let on = |g: &FactorGraph| -> Result<Vec<bool>> {
                let mut flag = vec![false; g.vertex_count()];
                for cyc in g.cycle_census(k)? {
                    for v in cyc {
                        flag[v] = true;
                    }
                }
                Ok(flag)
            };
            let src_on = on(g1)?;
            let tgt_on = on(glm)?;
            for v in 0..ns {
                if src_on[v] {
                    let before = domains[v].len();
                    domains[v].retain(|&t| tgt_on[t]);
                    stats.pruned_cycles += (before - domains[v].len()) as u64;
                }
            }
        }
    }

    // Assign high-degree vertices first; they are the most constrained.
    let mut order: Vec<usize> = (0..ns).collect();
    order.sort_by_key(|&v| std::cmp::Reverse((g1.out_degree(v) + g1.in_degree(v), ns - v)));

    let mut assignment = vec![usize::MAX; ns];
    let mut hit_count = vec![0usize; nt];
    let mut unhit = nt;
    let mut found: Vec<Vec<usize>> = Vec::new();
    backtrack(
        g1,
        glm,
        &order,
        &domains,
        0,
        &mut assignment,
        &mut hit_count,
        &mut unhit,
        &mut found,
        &mut stats,
    );

    found.sort();
    let mut out = Vec::with_capacity(found.len());
    for assignment in found {
        let induced = induced_substitution(g1, glm, &assignment)?;
        out.push(EpiCandidate {
            assignment,
            induced,
        });
    }
    stats.candidates_found = out.len() as u64;
    Ok((out, stats))
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    g1: &FactorGraph,
    glm: &FactorGraph,
    order: &[usize],
    domains: &[Vec<usize>],
    depth: usize,
    assignment: &mut Vec<usize>,
    hit_count: &mut Vec<usize>,
    unhit: &mut usize,
    found: &mut Vec<Vec<usize>>,
    stats: &mut SearchStats,
) {
    if depth == order.len() {
        if *unhit == 0 && edge_surjective(g1, glm, assignment) {
            found.push(assignment.clone());
        }
        return;
    }
    // Each remaining source vertex can cover at most one new target vertex.
    if *unhit > order.len() - depth {
        return;
    }
    let v = order[depth];
    'values: for &t in &domains[v] {
        // Edge consistency against everything already assigned.
        for &u in &order[..depth] {
            let tu = assignment[u];
            if (g1.has_edge(v, u) && !glm.has_edge(t, tu))
                || (g1.has_edge(u, v) && !glm.has_edge(tu, t))
            {
                continue 'values;
            }
        }
        stats.nodes_expanded += 1;
        assignment[v] = t;
        if hit_count[t] == 0 {
            *unhit -= 1;
        }
        hit_count[t] += 1;
        backtrack(
            g1, glm, order, domains, depth + 1, assignment, hit_count, unhit, found, stats,
        );
        hit_count[t] -= 1;
        if hit_count[t] == 0 {
            *unhit += 1;
        }
        assignment[v] = usize::MAX;
    }
}

fn edge_surjective(g1: &FactorGraph, glm: &FactorGraph, assignment: &[usize]) -> bool {
    let image: BTreeSet<(usize, usize)> = g1
        .edges()
        .iter()
        .map(|&(u, v)| (assignment[u], assignment[v]))
        .collect();
    image.len() == glm.edge_count() && image.is_subset(glm.edges())
}

/// Full re-check of the epimorphism conditions, independent of the search.
pub fn is_epimorphism(g1: &FactorGraph, glm: &FactorGraph, assignment: &[usize]) -> bool {
    if assignment.len() != g1.vertex_count() {
        return false;
    }
    if assignment.iter().any(|&t| t >= glm.vertex_count()) {
        return false;
    }
    if g1
        .edges()
        .iter()
        .any(|&(u, v)| !glm.has_edge(assignment[u], assignment[v]))
    {
        return false;
    }
    let hit: BTreeSet<usize> = assignment.iter().copied().collect();
    if hit.len() != glm.vertex_count() {
        return false;
    }
    edge_surjective(g1, glm, assignment)
}

/// Exhaustive reference enumeration over all vertex maps.
pub fn brute_force_epis(
    g1: &FactorGraph,
    glm: &FactorGraph,
    budget: u64,
) -> Result<Vec<EpiCandidate>> {
    check_letter_source(g1)?;
    let ns = g1.vertex_count() as u32;
    let nt = glm.vertex_count() as u64;
    if nt == 0 {
        return Ok(Vec::new());
    }
    let total = nt
        .checked_pow(ns)
        .filter(|&n| n <= budget)
        .ok_or_else(|| {
            Error::Unsupported(format!(
                "brute force over {nt}^{ns} maps exceeds the budget of {budget}"
            ))
        })?;
    let mut found = Vec::new();
    for code in 0..total {
        let mut rem = code;
        let assignment: Vec<usize> = (0..ns)
            .map(|_| {
                let t = (rem % nt) as usize;
                rem /= nt;
                t
            })
            .collect();
        if is_epimorphism(g1, glm, &assignment) {
            found.push(assignment);
        }
    }
    found.sort();
    let mut out = Vec::with_capacity(found.len());
    for assignment in found {
        let induced = induced_substitution(g1, glm, &assignment)?;
        out.push(EpiCandidate {
            assignment,
            induced,
        });
    }
    Ok(out)
}

fn check_letter_source(g1: &FactorGraph) -> Result<()> {
    let ok = g1.vertex_count() == g1.alphabet().size()
        && g1
            .vertices()
            .iter()
            .enumerate()
            .all(|(i, w)| w.len() == 1 && w[0] as usize == i);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(
            "source graph must be an order-1 factor graph with every letter present".into(),
        ))
    }
}

fn induced_substitution(
    g1: &FactorGraph,
    glm: &FactorGraph,
    assignment: &[usize],
) -> Result<Substitution> {
    let images = assignment
        .iter()
        .map(|&t| glm.vertices()[t].clone())
        .collect();
    Substitution::new(g1.alphabet().clone(), images)
}
