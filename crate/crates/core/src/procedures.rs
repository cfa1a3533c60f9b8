//! The headline procedures: the complete factor list and conjugacy list of a
//! primitive aperiodic constant-length substitution, with provenance,
//! certificates and a persistent catalog.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::blocks::hat_substitution;
use crate::epimorph::{enumerate_epis, EpiCandidate};
use crate::graphs::{block_graph, letter_graph};
use crate::letter_map::LetterMap;
use crate::subst::{Alphabet, Aperiodicity, Letter, Substitution};
use crate::verify::{default_k_max, verify_factor_with, Certificate, RefutationDirection};
use crate::{Error, ProjectedSystem, Result};

#[derive(Debug, Clone)]
pub struct FactorOptions {
    /// Quotient the partition grid by the automorphisms of the 3-block
    /// substitution. Lossless; only affects the amount of work.
    pub symmetry: bool,
    /// Override the word-refutation depth (default depends on the candidate).
    pub k_max: Option<usize>,
    /// Override the aperiodicity-check depth.
    pub aperiodicity_bound: Option<usize>,
    /// Largest power tried by the conjugacy shortcut.
    pub shortcut_power_max: usize,
    /// Wall-clock cap; remaining cases are skipped and the result is marked
    /// incomplete.
    pub budget: Option<std::time::Duration>,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            symmetry: true,
            k_max: None,
            aperiodicity_bound: None,
            shortcut_power_max: 4,
            budget: None,
        }
    }
}

/// Where a catalog entry came from: the partition and residue of the case and
/// the epimorphism that produced the candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub partition: LetterMap,
    pub m: usize,
    pub epimorphism: EpiCandidate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub standard_form: Substitution,
    pub alphabet_size: usize,
    pub provenance: Provenance,
    pub certificate: Certificate,
    pub injective: bool,
    pub primitive: bool,
    pub aperiodic: Aperiodicity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorList {
    /// Standard form of the injectivized input.
    pub source: Substitution,
    pub entries: Vec<CatalogEntry>,
    /// Candidates neither certified nor refuted; reported, never dropped.
    pub undecided: Vec<CatalogEntry>,
    pub partitions_examined: usize,
    pub cases_examined: usize,
    /// False when a budget cut the search short.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyList {
    pub source: Substitution,
    pub entries: Vec<CatalogEntry>,
    pub undecided: Vec<CatalogEntry>,
    /// False when any contributing factor list was cut short by a budget.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjugacyAnswer {
    Conjugate,
    NotConjugate,
    Undecided,
}

/// All alphabet permutations commuting with the substitution
/// (`P ∘ s = s ∘ P`), as `old letter -> new letter` tables. Always contains
/// the identity; for a primitive substitution the image of one letter
/// determines the whole permutation, so the search is linear per seed.
pub fn substitution_automorphisms(s: &Substitution) -> Vec<Vec<Letter>> {
    let c = s.size();
    let mut out = Vec::new();
    'seed: for b in 0..c as Letter {
        let mut perm: Vec<Option<Letter>> = vec![None; c];
        perm[0] = Some(b);
        let mut queue = vec![0 as Letter];
        while let Some(a) = queue.pop() {
            let pa = perm[a as usize].unwrap();
            let img_a = s.image(a);
            let img_pa = s.image(pa);
            for (x, y) in img_a.iter().zip(img_pa.iter()) {
                match perm[*x as usize] {
                    None => {
                        perm[*x as usize] = Some(*y);
                        queue.push(*x);
                    }
                    Some(prev) if prev != *y => continue 'seed,
                    _ => {}
                }
            }
        }
        let Some(full) = perm.into_iter().collect::<Option<Vec<Letter>>>() else {
            // can only happen for reducible substitutions
            continue;
        };
        let mut seen = vec![false; c];
        for &v in &full {
            if std::mem::replace(&mut seen[v as usize], true) {
                continue 'seed;
            }
        }
        let commutes = (0..c as Letter).all(|a| {
            s.image(full[a as usize])
                .iter()
                .zip(s.image(a))
                .all(|(&y, &x)| y == full[x as usize])
        });
        if commutes {
            out.push(full);
        }
    }
    out
}

/// All set partitions of the alphabet in restricted-growth-string order; with
/// symmetries, one representative (the lex-least growth string) per orbit.
pub fn partition_stream(alphabet: &Alphabet, symmetries: &[Vec<Letter>]) -> Vec<LetterMap> {
    let c = alphabet.size();
    let mut out = Vec::new();
    let mut rgs = vec![0usize; c];
    generate_rgs(&mut rgs, 1, 0, &mut |rgs| {
        if symmetries
            .iter()
            .all(|p| permuted_rgs(rgs, p) >= rgs.to_vec())
        {
            out.push(LetterMap::from_rgs(alphabet, rgs).expect("generated string is valid"));
        }
    });
    out
}

fn generate_rgs(rgs: &mut Vec<usize>, pos: usize, max: usize, sink: &mut impl FnMut(&[usize])) {
    if pos == rgs.len() {
        sink(rgs);
        return;
    }
    for v in 0..=max + 1 {
        rgs[pos] = v;
        generate_rgs(rgs, pos + 1, max.max(v), sink);
    }
    rgs[pos] = 0;
}

/// The growth string of the partition obtained by pushing every class through
/// the permutation.
fn permuted_rgs(rgs: &[usize], perm: &[Letter]) -> Vec<usize> {
    let c = rgs.len();
    // class (under the old numbering) of each new letter
    let mut old_class_at = vec![0usize; c];
    for a in 0..c {
        old_class_at[perm[a] as usize] = rgs[a];
    }
    let mut renumber: HashMap<usize, usize> = HashMap::new();
    old_class_at
        .iter()
        .map(|&cl| {
            let next = renumber.len();
            *renumber.entry(cl).or_insert(next)
        })
        .collect()
}

/// Procedure: the complete list of injective primitive substitutions of the
/// same length generating a factor of the system of `alpha`.
pub fn factor_list(alpha: &Substitution, opts: &FactorOptions) -> Result<FactorList> {
    factor_list_with_progress(alpha, opts, None)
}

/// As [`factor_list`], reporting `(cases done, cases total)` as the grid is
/// consumed.
pub fn factor_list_with_progress(
    alpha: &Substitution,
    opts: &FactorOptions,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<FactorList> {
    if !alpha.is_primitive() {
        return Err(Error::InvalidInput("substitution must be primitive".into()));
    }
    if alpha.length() < 2 {
        return Err(Error::Unsupported("substitution length must be at least 2".into()));
    }
    if alpha.is_aperiodic(opts.aperiodicity_bound).is_periodic() {
        return Err(Error::Unsupported(
            "the substitution generates a periodic (finite) system".into(),
        ));
    }
    let a_inj = alpha.injectivize().substitution;
    let (source_std, _) = a_inj.standard_form();
    let beta_hat = hat_substitution(&a_inj, 3, 0)?;
    let l = a_inj.length();

    let symmetries = if opts.symmetry {
        substitution_automorphisms(&beta_hat)
    } else {
        Vec::new()
    };
    let partitions = partition_stream(beta_hat.alphabet(), &symmetries);
    let grid: Vec<(LetterMap, usize)> = partitions
        .iter()
        .flat_map(|pi| (0..l).map(move |m| (pi.clone(), m)))
        .collect();

    let deadline = opts.budget.map(|b| std::time::Instant::now() + b);
    let done = std::sync::atomic::AtomicUsize::new(0);
    let total = grid.len();
    let per_case: Vec<Option<Vec<CatalogEntry>>> = grid
        .par_iter()
        .map(|(pi, m)| {
            if deadline.is_some_and(|d| std::time::Instant::now() > d) {
                return Ok(None);
            }
            let out = examine_case(&a_inj, &beta_hat, pi, *m, opts)?;
            let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            if let Some(report) = progress {
                report(n, total);
            }
            Ok(Some(out))
        })
        .collect::<Result<_>>()?;
    let complete = per_case.iter().all(Option::is_some);

    let mut best: BTreeMap<String, CatalogEntry> = BTreeMap::new();
    for entry in per_case.into_iter().flatten().flatten() {
        let key = entry.standard_form.rules_string();
        match best.get(&key) {
            // a positive certificate beats an undecided one; otherwise keep
            // the first (the grid order is deterministic)
            Some(prev) if prev.certificate.is_positive() || !entry.certificate.is_positive() => {}
            _ => {
                best.insert(key, entry);
            }
        }
    }
    let mut entries = Vec::new();
    let mut undecided = Vec::new();
    for (_, e) in best {
        if e.certificate.is_positive() {
            entries.push(e);
        } else {
            undecided.push(e);
        }
    }
    let sort_key =
        |e: &CatalogEntry| (e.alphabet_size, e.standard_form.characteristic_word());
    entries.sort_by_key(sort_key);
    undecided.sort_by_key(sort_key);
    Ok(FactorList {
        source: source_std,
        entries,
        undecided,
        partitions_examined: partitions.len(),
        cases_examined: grid.len(),
        complete,
    })
}

fn examine_case(
    a_inj: &Substitution,
    beta_hat: &Substitution,
    pi: &LetterMap,
    m: usize,
    opts: &FactorOptions,
) -> Result<Vec<CatalogEntry>> {
    let sys = ProjectedSystem::new(beta_hat.clone(), pi.clone())?
        .with_base(a_inj.clone(), 3);
    let g1 = letter_graph(&sys)?;
    let glm = block_graph(&sys, a_inj.length(), m)?;
    let (epis, _) = enumerate_epis(&g1, &glm)?;
    let mut out = Vec::new();
    for epi in epis {
        let candidate = &epi.induced;
        if !candidate.is_primitive() {
            continue;
        }
        let aperiodic = candidate.is_aperiodic(opts.aperiodicity_bound);
        if aperiodic.is_periodic() {
            // a degenerate projection can equate the languages of an
            // aperiodic system and a periodic candidate (e.g. everything to
            // one letter), so the aperiodicity filter must come first
            continue;
        }
        let k_max = opts
            .k_max
            .unwrap_or_else(|| default_k_max(candidate.length(), candidate.size()));
        let certificate = verify_factor_with(&sys, candidate, k_max)?;
        if certificate.is_negative() {
            continue;
        }
        let inj = candidate.injectivize();
        let (standard_form, _) = inj.substitution.standard_form();
        out.push(CatalogEntry {
            alphabet_size: standard_form.size(),
            injective: standard_form.is_injective(),
            primitive: standard_form.is_primitive(),
            aperiodic,
            standard_form,
            provenance: Provenance {
                partition: pi.clone(),
                m,
                epimorphism: epi,
            },
            certificate,
        });
    }
    Ok(out)
}

/// Procedure: the complete list of injective substitutions generating a
/// system conjugate to that of `alpha`.
pub fn conjugacy_list(alpha: &Substitution, opts: &FactorOptions) -> Result<ConjugacyList> {
    conjugacy_list_with(alpha, opts, None)
}

pub fn conjugacy_list_with(
    alpha: &Substitution,
    opts: &FactorOptions,
    mut catalog: Option<&mut Catalog>,
) -> Result<ConjugacyList> {
    let flist = factor_list(alpha, opts)?;
    let source = flist.source.clone();
    let mut memo: HashMap<String, FactorList> = HashMap::new();
    let mut entries = Vec::new();
    let mut undecided = flist.undecided.clone();
    let mut complete = flist.complete;

    for entry in &flist.entries {
        let beta = &entry.standard_form;
        // Quick route: exhibit an amalgamation of beta whose system is the
        // source system. Together with beta being a factor, coalescence
        // makes the two systems conjugate.
        if shortcut_conjugate(beta, &source, opts.shortcut_power_max)? {
            entries.push(entry.clone());
            continue;
        }
        // Full route: the source must appear on beta's own factor list.
        let key = catalog_key(beta);
        let sublist = match memo.get(&key) {
            Some(f) => f.clone(),
            None => {
                let f = match catalog.as_deref().and_then(|c| c.get(&key)) {
                    Some(f) => f,
                    None => {
                        let f = factor_list(beta, opts)?;
                        if let Some(c) = catalog.as_deref_mut() {
                            c.put(key.clone(), &f);
                        }
                        f
                    }
                };
                memo.insert(key.clone(), f.clone());
                f
            }
        };
        complete &= sublist.complete;
        if sublist.entries.iter().any(|e| e.standard_form == source) {
            entries.push(entry.clone());
        } else if !sublist.undecided.is_empty() {
            undecided.push(entry.clone());
        }
    }
    if let Some(c) = catalog.as_deref_mut() {
        c.save()?;
    }
    Ok(ConjugacyList {
        source,
        entries,
        undecided,
        complete,
    })
}

/// Look for a partition of beta's alphabet whose amalgamation, after
/// injectivization, generates the same system as the source substitution
/// (equal standard forms of some power).
fn shortcut_conjugate(beta: &Substitution, source: &Substitution, p_max: usize) -> Result<bool> {
    for pi in partition_stream(beta.alphabet(), &[]) {
        let Some(t) = beta.amalgamate(&pi) else {
            continue;
        };
        if !t.is_primitive() {
            continue;
        }
        let t_inj = t.injectivize().substitution;
        if t_inj.size() != source.size() {
            continue;
        }
        for p in 1..=p_max {
            if t_inj.power(p)?.standard_form().0 == source.power(p)?.standard_form().0 {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Decide conjugacy of the two generated systems. The lengths must agree;
/// reduce by taking powers beforehand if they are powers of a common base.
pub fn decide_conjugate(
    alpha: &Substitution,
    beta: &Substitution,
    opts: &FactorOptions,
) -> Result<ConjugacyAnswer> {
    if alpha.length() != beta.length() {
        return Err(Error::Unsupported(
            "lengths differ; reduce to a common length with powers first".into(),
        ));
    }
    if !beta.is_primitive() {
        return Err(Error::InvalidInput("substitution must be primitive".into()));
    }
    if beta.is_aperiodic(opts.aperiodicity_bound).is_periodic() {
        return Err(Error::Unsupported(
            "the substitution generates a periodic (finite) system".into(),
        ));
    }
    let (beta_std, _) = beta.injectivize().substitution.standard_form();
    let list = conjugacy_list(alpha, opts)?;
    if list.entries.iter().any(|e| e.standard_form == beta_std) {
        Ok(ConjugacyAnswer::Conjugate)
    } else if list.undecided.iter().any(|e| e.standard_form == beta_std) {
        Ok(ConjugacyAnswer::Undecided)
    } else {
        Ok(ConjugacyAnswer::NotConjugate)
    }
}

// ---------------------------------------------------------------------------
// catalog persistence

pub fn catalog_key(source_std: &Substitution) -> String {
    format!("L{} {}", source_std.length(), source_std.rules_string())
}

/// File-backed store of factor lists keyed by their source's standard form.
#[derive(Debug)]
pub struct Catalog {
    path: PathBuf,
    map: BTreeMap<String, Value>,
    dirty: bool,
}

impl Catalog {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let map = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("corrupt catalog file: {e}")))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(Error::InvalidInput(format!("cannot read catalog: {e}"))),
        };
        Ok(Catalog {
            path,
            map,
            dirty: false,
        })
    }

    pub fn get(&self, key: &str) -> Option<FactorList> {
        self.map
            .get(key)
            .and_then(|v| factor_list_from_json(v).ok())
    }

    pub fn put(&mut self, key: String, list: &FactorList) {
        self.map.insert(key, factor_list_to_json(list));
        self.dirty = true;
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn save(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        let text = serde_json::to_string_pretty(&self.map)
            .map_err(|e| Error::InvalidInput(format!("cannot serialize catalog: {e}")))?;
        let tmp = self.path.with_extension("tmp");
        std::fs::write(&tmp, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write catalog: {e}")))?;
        std::fs::rename(&tmp, &self.path)
            .map_err(|e| Error::InvalidInput(format!("cannot replace catalog: {e}")))?;
        self.dirty = false;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON encoding (stable field order, numeric letter indices)

pub fn substitution_to_json(s: &Substitution) -> Value {
    json!({
        "names": s.alphabet().names(),
        "images": s.images(),
        "rules": s.rules_string(),
    })
}

pub fn substitution_from_json(v: &Value) -> Result<Substitution> {
    let names: Vec<String> = field(v, "names")?;
    let images: Vec<Vec<Letter>> = field(v, "images")?;
    Substitution::new(Alphabet::with_names(names)?, images)
}

pub fn letter_map_to_json(m: &LetterMap) -> Value {
    json!({
        "source_names": m.source_names(),
        "rgs": m.rgs(),
        "partition": m.partition_string(),
    })
}

pub fn letter_map_from_json(v: &Value) -> Result<LetterMap> {
    let names: Vec<String> = field(v, "source_names")?;
    let rgs: Vec<usize> = field(v, "rgs")?;
    LetterMap::from_rgs(&Alphabet::with_names(names)?, &rgs)
}

pub fn certificate_to_json(c: &Certificate) -> Value {
    match c {
        Certificate::Intertwining { p, m, projection } => json!({
            "type": "intertwining",
            "p": p,
            "m": m,
            "projection": letter_map_to_json(projection),
        }),
        Certificate::WordRefutation {
            word,
            length,
            direction,
        } => json!({
            "type": "word_refutation",
            "word": word,
            "length": length,
            "direction": match direction {
                RefutationDirection::MissingFromCandidate => "missing_from_candidate",
                RefutationDirection::MissingFromSystem => "missing_from_system",
            },
        }),
        Certificate::Undecided { checked_up_to } => json!({
            "type": "undecided",
            "checked_up_to": checked_up_to,
        }),
    }
}

pub fn certificate_from_json(v: &Value) -> Result<Certificate> {
    let kind: String = field(v, "type")?;
    match kind.as_str() {
        "intertwining" => Ok(Certificate::Intertwining {
            p: field(v, "p")?,
            m: field(v, "m")?,
            projection: letter_map_from_json(
                v.get("projection")
                    .ok_or_else(|| Error::InvalidInput("missing projection".into()))?,
            )?,
        }),
        "word_refutation" => Ok(Certificate::WordRefutation {
            word: field(v, "word")?,
            length: field(v, "length")?,
            direction: match field::<String>(v, "direction")?.as_str() {
                "missing_from_candidate" => RefutationDirection::MissingFromCandidate,
                "missing_from_system" => RefutationDirection::MissingFromSystem,
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown refutation direction `{other}`"
                    )))
                }
            },
        }),
        "undecided" => Ok(Certificate::Undecided {
            checked_up_to: field(v, "checked_up_to")?,
        }),
        other => Err(Error::InvalidInput(format!(
            "unknown certificate type `{other}`"
        ))),
    }
}

fn aperiodicity_to_json(a: &Aperiodicity) -> Value {
    match a {
        Aperiodicity::Periodic { witness_n } => json!({"periodic": witness_n}),
        Aperiodicity::CertifiedUpTo(b) => json!({"aperiodic_up_to": b}),
        Aperiodicity::Unknown => json!("unknown"),
    }
}

fn aperiodicity_from_json(v: &Value) -> Result<Aperiodicity> {
    if v == "unknown" {
        Ok(Aperiodicity::Unknown)
    } else if let Some(n) = v.get("periodic").and_then(Value::as_u64) {
        Ok(Aperiodicity::Periodic {
            witness_n: n as usize,
        })
    } else if let Some(b) = v.get("aperiodic_up_to").and_then(Value::as_u64) {
        Ok(Aperiodicity::CertifiedUpTo(b as usize))
    } else {
        Err(Error::InvalidInput("malformed aperiodicity value".into()))
    }
}

pub fn entry_to_json(e: &CatalogEntry) -> Value {
    json!({
        "standard_form": substitution_to_json(&e.standard_form),
        "alphabet_size": e.alphabet_size,
        "provenance": {
            "partition": letter_map_to_json(&e.provenance.partition),
            "m": e.provenance.m,
            "epimorphism": {
                "assignment": e.provenance.epimorphism.assignment,
                "induced": substitution_to_json(&e.provenance.epimorphism.induced),
            },
        },
        "certificate": certificate_to_json(&e.certificate),
        "flags": {
            "injective": e.injective,
            "primitive": e.primitive,
            "aperiodic": aperiodicity_to_json(&e.aperiodic),
        },
    })
}

pub fn entry_from_json(v: &Value) -> Result<CatalogEntry> {
    let get = |path: &[&str]| -> Result<&Value> {
        let mut cur = v;
        for p in path {
            cur = cur
                .get(p)
                .ok_or_else(|| Error::InvalidInput(format!("missing field `{p}`")))?;
        }
        Ok(cur)
    };
    let flags = get(&["flags"])?;
    Ok(CatalogEntry {
        standard_form: substitution_from_json(get(&["standard_form"])?)?,
        alphabet_size: field(v, "alphabet_size")?,
        provenance: Provenance {
            partition: letter_map_from_json(get(&["provenance", "partition"])?)?,
            m: field(get(&["provenance"])?, "m")?,
            epimorphism: EpiCandidate {
                assignment: field(get(&["provenance", "epimorphism"])?, "assignment")?,
                induced: substitution_from_json(get(&["provenance", "epimorphism", "induced"])?)?,
            },
        },
        certificate: certificate_from_json(get(&["certificate"])?)?,
        injective: field(flags, "injective")?,
        primitive: field(flags, "primitive")?,
        aperiodic: aperiodicity_from_json(
            flags
                .get("aperiodic")
                .ok_or_else(|| Error::InvalidInput("missing field `aperiodic`".into()))?,
        )?,
    })
}

pub fn factor_list_to_json(f: &FactorList) -> Value {
    json!({
        "source": substitution_to_json(&f.source),
        "length": f.source.length(),
        "entries": f.entries.iter().map(entry_to_json).collect::<Vec<_>>(),
        "undecided": f.undecided.iter().map(entry_to_json).collect::<Vec<_>>(),
        "partitions_examined": f.partitions_examined,
        "cases_examined": f.cases_examined,
        "complete": f.complete,
        "tool_version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn factor_list_from_json(v: &Value) -> Result<FactorList> {
    let arr = |name: &str| -> Result<Vec<CatalogEntry>> {
        v.get(name)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput(format!("missing list `{name}`")))?
            .iter()
            .map(entry_from_json)
            .collect()
    };
    Ok(FactorList {
        source: substitution_from_json(
            v.get("source")
                .ok_or_else(|| Error::InvalidInput("missing source".into()))?,
        )?,
        entries: arr("entries")?,
        undecided: arr("undecided")?,
        partitions_examined: field(v, "partitions_examined")?,
        cases_examined: field(v, "cases_examined")?,
        complete: field(v, "complete")?,
    })
}

pub fn conjugacy_list_to_json(c: &ConjugacyList) -> Value {
    json!({
        "source": substitution_to_json(&c.source),
        "length": c.source.length(),
        "entries": c.entries.iter().map(entry_to_json).collect::<Vec<_>>(),
        "undecided": c.undecided.iter().map(entry_to_json).collect::<Vec<_>>(),
        "complete": c.complete,
        "tool_version": env!("CARGO_PKG_VERSION"),
    })
}

fn field<T: serde::de::DeserializeOwned>(v: &Value, name: &str) -> Result<T> {
    let inner = v
        .get(name)
        .ok_or_else(|| Error::InvalidInput(format!("missing field `{name}`")))?;
    serde_json::from_value(inner.clone())
        .map_err(|e| Error::InvalidInput(format!("bad field `{name}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Substitution {
        Substitution::parse(s).unwrap()
    }

    fn std_rules(list: &[CatalogEntry]) -> Vec<String> {
        list.iter().map(|e| e.standard_form.rules_string()).collect()
    }

    #[test]
    fn partition_counts_are_bell_numbers() {
        for (c, bell) in [(1, 1), (2, 2), (3, 5), (5, 52), (6, 203)] {
            assert_eq!(
                partition_stream(&Alphabet::canonical(c), &[]).len(),
                bell,
                "c={c}"
            );
        }
    }

    #[test]
    fn mirror_automorphism_of_thue_morse_hat() {
        let beta_hat = hat_substitution(&parse("0->01,1->10"), 3, 0).unwrap();
        let autos = substitution_automorphisms(&beta_hat);
        assert_eq!(autos.len(), 2);
        assert!(autos.contains(&vec![0, 1, 2, 3, 4, 5]));
        assert!(autos.contains(&vec![5, 4, 3, 2, 1, 0]));

        let reduced = partition_stream(beta_hat.alphabet(), &autos);
        assert!(reduced.len() < 203);
        // the mirror halves the grid: at most 406 cases overall
        assert!(2 * reduced.len() <= 406);
    }

    #[test]
    fn symmetry_reduction_is_lossless_on_partitions() {
        // every partition is the image of some representative
        let beta_hat = hat_substitution(&parse("0->01,1->10"), 3, 0).unwrap();
        let autos = substitution_automorphisms(&beta_hat);
        let all = partition_stream(beta_hat.alphabet(), &[]);
        let reduced = partition_stream(beta_hat.alphabet(), &autos);
        let mut covered: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
        for m in &reduced {
            for p in &autos {
                covered.insert(permuted_rgs(m.rgs(), p));
            }
        }
        assert_eq!(covered.len(), all.len());
    }

    #[test]
    fn toeplitz_factor_list() {
        let list = factor_list(&parse("0->01,1->00"), &FactorOptions::default()).unwrap();
        assert_eq!(
            std_rules(&list.entries),
            vec!["1->12,2->11", "1->21,2->11", "1->23,2->13,3->12"]
        );
        assert!(list.undecided.is_empty());
        assert_eq!(list.source, parse("1->12,2->11"));
    }

    #[test]
    fn factor_list_is_reflexive() {
        for text in ["0->01,1->00", "1->23,2->13,3->12"] {
            let s = parse(text);
            let list = factor_list(&s, &FactorOptions::default()).unwrap();
            assert!(
                list.entries.iter().any(|e| e.standard_form == list.source),
                "{text}"
            );
        }
    }

    #[test]
    fn toeplitz_conjugacy_class() {
        let list = conjugacy_list(&parse("0->01,1->00"), &FactorOptions::default()).unwrap();
        assert_eq!(
            std_rules(&list.entries),
            vec!["1->12,2->11", "1->21,2->11", "1->23,2->13,3->12"]
        );
        assert!(list.undecided.is_empty());
    }

    #[test]
    fn decide_conjugate_examples() {
        let opts = FactorOptions::default();
        let tau = parse("0->01,1->00");
        assert_eq!(
            decide_conjugate(&tau, &parse("1->21,2->11"), &opts).unwrap(),
            ConjugacyAnswer::Conjugate
        );
        assert_eq!(
            decide_conjugate(&tau, &tau, &opts).unwrap(),
            ConjugacyAnswer::Conjugate
        );
        assert_eq!(
            decide_conjugate(&tau, &parse("0->01,1->10"), &opts).unwrap(),
            ConjugacyAnswer::NotConjugate
        );
        assert!(decide_conjugate(&tau, &parse("1->123,2->231,3->312"), &opts).is_err());
    }

    #[test]
    fn rejects_periodic_input() {
        assert!(matches!(
            factor_list(&parse("0->01,1->01"), &FactorOptions::default()),
            Err(Error::Unsupported(_)) | Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn entries_certificates_revalidate() {
        let tau = parse("0->01,1->00");
        let list = factor_list(&tau, &FactorOptions::default()).unwrap();
        let a_inj = tau.injectivize().substitution;
        let beta_hat = hat_substitution(&a_inj, 3, 0).unwrap();
        for e in &list.entries {
            let sys = ProjectedSystem::new(beta_hat.clone(), e.provenance.partition.clone())
                .unwrap()
                .with_base(a_inj.clone(), 3);
            let ok = crate::verify::check_certificate(
                &sys,
                &e.provenance.epimorphism.induced,
                &e.certificate,
            )
            .unwrap();
            assert!(ok, "{}", e.standard_form.rules_string());
        }
    }

    #[test]
    fn symmetry_toggle_does_not_change_toeplitz_list() {
        let tau = parse("0->01,1->00");
        let with = factor_list(&tau, &FactorOptions::default()).unwrap();
        let without = factor_list(
            &tau,
            &FactorOptions {
                symmetry: false,
                ..FactorOptions::default()
            },
        )
        .unwrap();
        assert_eq!(std_rules(&with.entries), std_rules(&without.entries));
        assert_eq!(std_rules(&with.undecided), std_rules(&without.undecided));
    }

    #[test]
    fn zero_budget_marks_incomplete() {
        let opts = FactorOptions {
            budget: Some(std::time::Duration::ZERO),
            ..FactorOptions::default()
        };
        let list = factor_list(&parse("0->01,1->00"), &opts).unwrap();
        assert!(!list.complete);
        assert!(factor_list(&parse("0->01,1->00"), &FactorOptions::default())
            .unwrap()
            .complete);
    }

    #[test]
    fn catalog_round_trip() {
        let tau = parse("0->01,1->00");
        let list = factor_list(&tau, &FactorOptions::default()).unwrap();
        let back = factor_list_from_json(&factor_list_to_json(&list)).unwrap();
        assert_eq!(back, list);

        let dir = std::env::temp_dir().join(format!("substconj-cat-{}", std::process::id()));
        let _ = std::fs::remove_file(&dir);
        let mut cat = Catalog::open(&dir).unwrap();
        let key = catalog_key(&list.source);
        cat.put(key.clone(), &list);
        cat.save().unwrap();
        let reopened = Catalog::open(&dir).unwrap();
        assert_eq!(reopened.get(&key), Some(list));
        let _ = std::fs::remove_file(&dir);
    }
}
