//! Factor graphs of a projected system, built exactly from the substitutive
//! hierarchy. The order-1 graph records which letters follow which; the
//! (L,M) graphs record the L-blocks occurring at positions M mod L and their
//! adjacency.

use std::collections::{BTreeMap, BTreeSet};

use crate::blocks::ProjectedSystem;
use crate::subst::{Alphabet, Letter, Word};
use crate::{Error, Result};

/// Finite directed simple graph over word-labelled vertices, vertices sorted
/// lexicographically. Loops allowed, parallel edges not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    alphabet: Alphabet,
    vertices: Vec<Word>,
    edges: BTreeSet<(usize, usize)>,
}

impl FactorGraph {
    pub fn new(alphabet: Alphabet, vertices: Vec<Word>, edges: BTreeSet<(usize, usize)>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges
            .iter()
            .all(|&(u, v)| u < vertices.len() && v < vertices.len()));
        FactorGraph {
            alphabet,
            vertices,
            edges,
        }
    }

    /// The alphabet the vertex words are over.
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    pub fn vertex_label(&self, v: usize) -> String {
        self.alphabet.render_word(&self.vertices[v])
    }

    pub fn vertex_index(&self, word: &[Letter]) -> Option<usize> {
        self.vertices.binary_search_by(|w| w.as_slice().cmp(word)).ok()
    }

    /// Number of vertices carrying a loop.
    pub fn loop_count(&self) -> usize {
        (0..self.vertices.len())
            .filter(|&v| self.has_edge(v, v))
            .count()
    }

    pub fn has_loop(&self) -> bool {
        self.edges.iter().any(|&(u, v)| u == v)
    }

    /// All k-cycles for k in {2, 3}, each in canonical rotation (smallest
    /// vertex first). Vertices on a cycle are distinct; loops do not count.
    pub fn cycle_census(&self, k: usize) -> Result<Vec<Vec<usize>>> {
        let n = self.vertices.len();
        let mut out = Vec::new();
        match k {
            2 => {
                for u in 0..n {
                    for v in (u + 1)..n {
                        if self.has_edge(u, v) && self.has_edge(v, u) {
                            out.push(vec![u, v]);
                        }
                    }
                }
            }
            3 => {
                for u in 0..n {
                    for v in 0..n {
                        if v == u || !self.has_edge(u, v) {
                            continue;
                        }
                        for w in 0..n {
                            if w == u || w == v || !self.has_edge(v, w) || !self.has_edge(w, u) {
                                continue;
                            }
                            if u < v && u < w {
                                out.push(vec![u, v, w]);
                            }
                        }
                    }
                }
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "cycle census supports k = 2 or 3, got {k}"
                )))
            }
        }
        Ok(out)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(u, _)| u == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(_, w)| w == v).count()
    }

    /// DOT export with deterministic vertex order.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        for v in 0..self.vertices.len() {
            out.push_str(&format!("  n{} [label=\"{}\"];\n", v, self.vertex_label(v)));
        }
        for &(u, v) in &self.edges {
            out.push_str(&format!("  n{u} -> n{v};\n"));
        }
        out.push_str("}\n");
        out
    }

    /// JSON export: `{vertices: [word], edges: [[i, j]]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": (0..self.vertices.len())
                .map(|v| self.vertex_label(v))
                .collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(u, v)| vec![u, v]).collect::<Vec<_>>(),
        })
    }

    fn from_words(alphabet: Alphabet, vertex_words: BTreeSet<Word>, pairs: BTreeSet<(Word, Word)>) -> Self {
        let vertices: Vec<Word> = vertex_words.into_iter().collect();
        let index: BTreeMap<&Word, usize> =
            vertices.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let edges = pairs
            .iter()
            .map(|(u, v)| (index[u], index[v]))
            .collect();
        FactorGraph::new(alphabet, vertices, edges)
    }
}

/// The factor graph of order 1 of the projected system: vertices are the
/// target letters, edges the projections of the 2-blocks.
pub fn letter_graph(p: &ProjectedSystem) -> Result<FactorGraph> {
    let lang2 = p.generator.language(2)?;
    let mut vertex_words: BTreeSet<Word> = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    for w in &lang2 {
        let pw = p.project_word(w);
        vertex_words.insert(vec![pw[0]]);
        vertex_words.insert(vec![pw[1]]);
        pairs.insert((vec![pw[0]], vec![pw[1]]));
    }
    Ok(FactorGraph::from_words(p.target_alphabet(), vertex_words, pairs))
}

/// The (L,M) factor graph: vertices are the L-blocks of the projected fixed
/// point at positions M mod L, edges come from the 2L-blocks at those
/// positions. Computed exactly from the window identities: a window of
/// length 2L at a position M mod L lies inside the image of a 3-block of the
/// generator fixed point.
pub fn block_graph(p: &ProjectedSystem, l_target: usize, m: usize) -> Result<FactorGraph> {
    let l = p.generator.length();
    let mut r = 0u32;
    let mut pow = 1usize;
    while pow < l_target {
        pow *= l;
        r += 1;
    }
    if pow != l_target || r == 0 {
        return Err(Error::Unsupported(format!(
            "block length {l_target} is not a positive power of the generator length {l}"
        )));
    }
    if m >= l_target {
        return Err(Error::InvalidInput(format!(
            "residue {m} out of range 0..{l_target}"
        )));
    }
    let genr = p.generator.power(r as usize)?;
    let mut vertex_words: BTreeSet<Word> = BTreeSet::new();
    for w in p.generator.language(2)? {
        let v = p.project_word(&genr.apply(&w)?);
        vertex_words.insert(v[m..m + l_target].to_vec());
    }
    let mut pairs = BTreeSet::new();
    for w in p.generator.language(3)? {
        let v = p.project_word(&genr.apply(&w)?);
        let a = v[m..m + l_target].to_vec();
        let b = v[m + l_target..m + 2 * l_target].to_vec();
        debug_assert!(vertex_words.contains(&a) && vertex_words.contains(&b));
        pairs.insert((a, b));
    }
    Ok(FactorGraph::from_words(p.target_alphabet(), vertex_words, pairs))
}
