//! Certificates deciding whether a candidate substitution generates a
//! projected system: a positive intertwining certificate, an explicit word
//! refuting language equality, or an honest "undecided up to length k".

use std::collections::BTreeSet;

use crate::blocks::{block_coding, hat_with_coding, ProjectedSystem};
use crate::graphs::{block_graph, letter_graph};
use crate::epimorph::enumerate_epis;
use crate::letter_map::LetterMap;
use crate::subst::{Substitution, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// `projection ∘ hatᵖ = candidateᵖ ∘ projection` for the hat of the base
    /// substitution at lag `m` (or for the generator itself when the system
    /// has no recorded base).
    Intertwining {
        p: usize,
        m: usize,
        projection: LetterMap,
    },
    /// A word witnessing that the two exact factor sets differ.
    WordRefutation {
        word: Word,
        length: usize,
        direction: RefutationDirection,
    },
    Undecided { checked_up_to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefutationDirection {
    /// The word occurs in the projected system but not in the candidate's.
    MissingFromCandidate,
    /// The word occurs in the candidate's system but not in the projected one.
    MissingFromSystem,
}

impl Certificate {
    pub fn is_positive(&self) -> bool {
        matches!(self, Certificate::Intertwining { .. })
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Certificate::WordRefutation { .. })
    }
}

/// Default word-refutation depth for a candidate of length `l` on `c` letters.
pub fn default_k_max(l: usize, c: usize) -> usize {
    2 * l * c * c
}

/// Decide whether `candidate` generates the projected system.
pub fn verify_factor(p_sys: &ProjectedSystem, candidate: &Substitution) -> Result<Certificate> {
    let k_max = default_k_max(candidate.length(), candidate.size());
    verify_factor_with(p_sys, candidate, k_max)
}

pub fn verify_factor_with(
    p_sys: &ProjectedSystem,
    candidate: &Substitution,
    k_max: usize,
) -> Result<Certificate> {
    if !candidate.is_primitive() {
        return Err(Error::InvalidInput(
            "candidate substitution must be primitive".into(),
        ));
    }
    if candidate.size() != p_sys.projection.target_size() {
        return Err(Error::InvalidInput(
            "candidate alphabet must match the projected alphabet".into(),
        ));
    }
    let family = hat_family(p_sys)?;
    let p_max = p_sys.generator.size();

    // Small powers almost always suffice; try them before the language scan,
    // and only then fall back on the expensive larger powers.
    for p in 1..=p_max.min(2) {
        if let Some(cert) = positive_at_power(p_sys, candidate, &family, p)? {
            return Ok(cert);
        }
    }
    if let Some(cert) = refute_by_language(p_sys, candidate, k_max)? {
        return Ok(cert);
    }
    for p in 3..=p_max {
        if let Some(cert) = positive_at_power(p_sys, candidate, &family, p)? {
            return Ok(cert);
        }
    }
    Ok(Certificate::Undecided {
        checked_up_to: k_max,
    })
}

/// The substitutions against which the intertwining equation is tried,
/// labelled by lag: the whole hat family of the base when one is recorded,
/// otherwise just the generator.
fn hat_family(p_sys: &ProjectedSystem) -> Result<Vec<(usize, Substitution)>> {
    match &p_sys.base {
        Some(base) => {
            let coding = block_coding(&base.substitution, base.n)?;
            if coding.size() != p_sys.generator.size() {
                return Err(Error::InvalidInput(
                    "recorded base does not generate the system's coded alphabet".into(),
                ));
            }
            let l = base.substitution.length();
            let mut out = Vec::new();
            for m in 0..=(l - 1) * (base.n - 1) {
                out.push((m, hat_with_coding(&base.substitution, &coding, m)?));
            }
            Ok(out)
        }
        None => Ok(vec![(0, p_sys.generator.clone())]),
    }
}

fn positive_at_power(
    p_sys: &ProjectedSystem,
    candidate: &Substitution,
    family: &[(usize, Substitution)],
    p: usize,
) -> Result<Option<Certificate>> {
    let cand_p = candidate.power(p)?;
    for (m, hat) in family {
        let hat_p = hat.power(p)?;
        if intertwines(&hat_p, &cand_p, &p_sys.projection) {
            return Ok(Some(Certificate::Intertwining {
                p,
                m: *m,
                projection: p_sys.projection.clone(),
            }));
        }
    }
    Ok(None)
}

/// `projection(source(a)) == target(projection(a))` for every letter `a`.
fn intertwines(source: &Substitution, target: &Substitution, projection: &LetterMap) -> bool {
    (0..source.size()).all(|a| {
        let lhs = projection.apply(source.image(a as crate::subst::Letter));
        let rhs = target.image(projection.class_of(a as crate::subst::Letter));
        lhs == *rhs
    })
}

fn refute_by_language(
    p_sys: &ProjectedSystem,
    candidate: &Substitution,
    k_max: usize,
) -> Result<Option<Certificate>> {
    for k in 2..=k_max {
        let sys_lang = p_sys.language(k)?;
        let cand_lang: BTreeSet<Word> = candidate.language(k)?;
        if sys_lang == cand_lang {
            continue;
        }
        let (word, direction) = match sys_lang.difference(&cand_lang).next() {
            Some(w) => (w.clone(), RefutationDirection::MissingFromCandidate),
            None => (
                cand_lang.difference(&sys_lang).next().unwrap().clone(),
                RefutationDirection::MissingFromSystem,
            ),
        };
        return Ok(Some(Certificate::WordRefutation {
            length: word.len(),
            word,
            direction,
        }));
    }
    Ok(None)
}

/// Replay a certificate from scratch. `Ok(true)` means the certificate's
/// claim checks out (an `Undecided` only claims agreement up to its bound).
pub fn check_certificate(
    p_sys: &ProjectedSystem,
    candidate: &Substitution,
    cert: &Certificate,
) -> Result<bool> {
    match cert {
        Certificate::Intertwining { p, m, projection } => {
            let family = hat_family(p_sys)?;
            let hat = family
                .iter()
                .find(|(fm, _)| fm == m)
                .map(|(_, h)| h)
                .ok_or_else(|| Error::InvalidInput(format!("lag {m} outside the hat family")))?;
            Ok(intertwines(&hat.power(*p)?, &candidate.power(*p)?, projection))
        }
        Certificate::WordRefutation {
            word,
            length,
            direction,
        } => {
            if word.len() != *length || *length < 2 {
                return Ok(false);
            }
            let in_sys = p_sys.language(*length)?.contains(word);
            let in_cand = candidate.language(*length)?.contains(word);
            Ok(match direction {
                RefutationDirection::MissingFromCandidate => in_sys && !in_cand,
                RefutationDirection::MissingFromSystem => in_cand && !in_sys,
            })
        }
        Certificate::Undecided { checked_up_to } => {
            for k in 2..=*checked_up_to {
                if p_sys.language(k)? != candidate.language(k)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// `candidate` is an amalgamation of `source` under `projection`:
/// `projection ∘ source = candidate ∘ projection`.
pub fn is_amalgamation_of(
    candidate: &Substitution,
    source: &Substitution,
    projection: &LetterMap,
) -> bool {
    projection.source_size() == source.size()
        && projection.target_size() == candidate.size()
        && candidate.length() == source.length()
        && intertwines(source, candidate, projection)
}

/// One tested case of the no-epimorphism ladder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderEntry {
    pub n: u32,
    pub m: usize,
    pub loop_count: usize,
    pub epi_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonSubstEvidence {
    pub entries: Vec<LadderEntry>,
}

impl NonSubstEvidence {
    /// True when no tested block graph admits an epimorphism, i.e. no
    /// substitution of any tested length can generate the system.
    pub fn no_epimorphism_anywhere(&self) -> bool {
        self.entries.iter().all(|e| e.epi_count == 0)
    }
}

/// For each n ≤ n_max and each residue M, count the loops of the (Lⁿ,M)
/// block graph and the epimorphisms onto it from the order-1 graph.
pub fn non_substitutive_evidence(
    p_sys: &ProjectedSystem,
    n_max: u32,
) -> Result<NonSubstEvidence> {
    let g1 = letter_graph(p_sys)?;
    let l = p_sys.generator.length();
    let mut entries = Vec::new();
    for n in 1..=n_max {
        let block_len = l.pow(n);
        for m in 0..block_len {
            let glm = block_graph(p_sys, block_len, m)?;
            let (epis, _) = enumerate_epis(&g1, &glm)?;
            entries.push(LadderEntry {
                n,
                m,
                loop_count: glm.loop_count(),
                epi_count: epis.len(),
            });
        }
    }
    Ok(NonSubstEvidence { entries })
}
