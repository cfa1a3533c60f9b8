//! Constant-length substitutions on a canonical alphabet and the letter-level
//! operations: application, iteration, primitivity, injectivity,
//! injectivization, language extraction, standard forms, amalgamation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::letter_map::LetterMap;
use crate::{Error, Result};

/// Internal letters are 0-based indices; the canonical display names are
/// `1..=c` unless the input declared other symbol tokens.
pub type Letter = u8;

/// A finite word over some alphabet, stored as canonical letters.
pub type Word = Vec<Letter>;

/// Alphabet of `c` distinct symbol tokens. Canonical letter `i` carries
/// `names[i]`; all internal computation is on the indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    /// Alphabet `1..=size` with numeric letter names.
    pub fn canonical(size: usize) -> Self {
        Alphabet {
            names: (1..=size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn with_names(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidInput("alphabet must be nonempty".into()));
        }
        if names.len() > u8::MAX as usize {
            return Err(Error::InvalidInput(format!(
                "alphabet too large ({} symbols)",
                names.len()
            )));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::InvalidInput("alphabet symbols must be distinct".into()));
        }
        Ok(Alphabet { names })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, letter: Letter) -> &str {
        &self.names[letter as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, token: &str) -> Option<Letter> {
        self.names.iter().position(|n| n == token).map(|i| i as Letter)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.names.len() as u8).map(|i| i as Letter)
    }

    pub fn render_word(&self, word: &[Letter]) -> String {
        word.iter().map(|&l| self.name(l)).collect()
    }
}

/// Verdict of the Morse-Hedlund periodicity test. `CertifiedUpTo(n)` means
/// the factor complexity satisfied p(k) > k for every k <= n; it is not a
/// proof of aperiodicity beyond that bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aperiodicity {
    Periodic { witness_n: usize },
    CertifiedUpTo(usize),
    Unknown,
}

impl Aperiodicity {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Aperiodicity::Periodic { .. })
    }
}

/// Incidence matrix: `entries[a][b]` counts occurrences of letter `a` in the
/// image of letter `b`. Every column sums to the substitution length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub entries: Vec<Vec<u64>>,
}

impl IncidenceMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn multiply(&self, other: &IncidenceMatrix) -> IncidenceMatrix {
        let n = self.size();
        let mut out = vec![vec![0u64; n]; n];
        for i in 0..n {
            for k in 0..n {
                let x = self.entries[i][k];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i][j] += x.saturating_mul(other.entries[k][j]);
                }
            }
        }
        IncidenceMatrix { entries: out }
    }
}

/// A substitution of constant length `L`: one image word of length `L` per
/// letter of the alphabet.
#[derive(Debug, Clone)]
pub struct Substitution {
    alphabet: Alphabet,
    length: usize,
    images: Vec<Word>,
}

/// Equality ignores display names: two substitutions are the same object of
/// study when their canonical rules coincide.
impl PartialEq for Substitution {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.images == other.images
    }
}
impl Eq for Substitution {}

impl std::hash::Hash for Substitution {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.length.hash(state);
        self.images.hash(state);
    }
}

impl Substitution {
    pub fn new(alphabet: Alphabet, images: Vec<Word>) -> Result<Self> {
        if images.len() != alphabet.size() {
            return Err(Error::InvalidInput(format!(
                "expected {} images, got {}",
                alphabet.size(),
                images.len()
            )));
        }
        let length = images.first().map(|w| w.len()).unwrap_or(0);
        if length == 0 {
            return Err(Error::InvalidInput("images must be nonempty".into()));
        }
        for (a, img) in images.iter().enumerate() {
            if img.len() != length {
                return Err(Error::InvalidInput(format!(
                    "image of {} has length {}, expected constant length {}",
                    alphabet.name(a as Letter),
                    img.len(),
                    length
                )));
            }
            for &l in img {
                if (l as usize) >= alphabet.size() {
                    return Err(Error::InvalidInput(format!(
                        "letter index {} out of alphabet of size {}",
                        l,
                        alphabet.size()
                    )));
                }
            }
        }
        Ok(Substitution {
            alphabet,
            length,
            images,
        })
    }

    /// Parse the rule text format, e.g. `1->1233,2->2313,3->3123`. Rules are
    /// separated by commas or whitespace; symbol tokens are single
    /// alphanumeric characters. The alphabet is the sorted set of left-hand
    /// sides.
    pub fn parse(input: &str) -> Result<Self> {
        let mut rules: Vec<(char, Vec<char>, usize)> = Vec::new();
        for (offset, rule) in split_rules(input) {
            let col = |i: usize| offset + i + 1;
            let chars: Vec<char> = rule.chars().collect();
            if chars.len() < 4 || chars[1] != '-' || chars[2] != '>' {
                return Err(Error::Parse {
                    col: col(0),
                    msg: format!("expected rule of the form X->W, got `{rule}`"),
                });
            }
            if !chars[0].is_alphanumeric() {
                return Err(Error::Parse {
                    col: col(0),
                    msg: format!("symbol token `{}` is not alphanumeric", chars[0]),
                });
            }
            for (i, &ch) in chars[3..].iter().enumerate() {
                if !ch.is_alphanumeric() {
                    return Err(Error::Parse {
                        col: col(3 + i),
                        msg: format!("symbol token `{ch}` is not alphanumeric"),
                    });
                }
            }
            rules.push((chars[0], chars[3..].to_vec(), offset));
        }
        if rules.is_empty() {
            return Err(Error::Parse {
                col: 1,
                msg: "no rules found".into(),
            });
        }
        let mut lhs: Vec<char> = rules.iter().map(|r| r.0).collect();
        lhs.sort_unstable();
        for w in lhs.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Parse {
                    col: 1,
                    msg: format!("duplicate left-hand side `{}`", w[0]),
                });
            }
        }
        let alphabet = Alphabet::with_names(lhs.iter().map(|c| c.to_string()).collect())?;
        let mut images = vec![Vec::new(); alphabet.size()];
        let mut lengths: BTreeSet<usize> = BTreeSet::new();
        for (sym, image, offset) in &rules {
            let a = alphabet.index_of(&sym.to_string()).unwrap();
            let mut word = Vec::with_capacity(image.len());
            for (i, ch) in image.iter().enumerate() {
                match alphabet.index_of(&ch.to_string()) {
                    Some(l) => word.push(l),
                    None => {
                        return Err(Error::Parse {
                            col: offset + 3 + i + 1,
                            msg: format!("symbol `{ch}` has no rule"),
                        })
                    }
                }
            }
            lengths.insert(word.len());
            images[a as usize] = word;
        }
        if lengths.len() != 1 {
            return Err(Error::Parse {
                col: 1,
                msg: format!("images have differing lengths {lengths:?}; constant length required"),
            });
        }
        Substitution::new(alphabet, images)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a as usize]
    }

    /// Replace display names, keeping the rules.
    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<Self> {
        Substitution::new(alphabet, self.images.clone())
    }

    /// Extend to words by juxtaposition: the image of `w1..wk` is the
    /// concatenation of the letter images.
    pub fn apply(&self, word: &[Letter]) -> Result<Word> {
        let mut out = Vec::with_capacity(word.len() * self.length);
        for &l in word {
            if (l as usize) >= self.size() {
                return Err(Error::InvalidInput(format!(
                    "letter index {} out of alphabet of size {}",
                    l,
                    self.size()
                )));
            }
            out.extend_from_slice(&self.images[l as usize]);
        }
        Ok(out)
    }

    /// The n-th iterate, a substitution of length `L^n`.
    pub fn power(&self, n: usize) -> Result<Substitution> {
        if n == 0 {
            return Err(Error::InvalidInput(
                "power 0 is the identity, which is not of constant length L".into(),
            ));
        }
        let mut images = self.images.clone();
        for _ in 1..n {
            images = images
                .iter()
                .map(|w| self.apply(w))
                .collect::<Result<Vec<_>>>()?;
        }
        Substitution::new(self.alphabet.clone(), images)
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        let c = self.size();
        let mut entries = vec![vec![0u64; c]; c];
        for (b, img) in self.images.iter().enumerate() {
            for &a in img {
                entries[a as usize][b] += 1;
            }
        }
        IncidenceMatrix { entries }
    }

    /// Primitivity via positivity of the incidence matrix raised to the
    /// Wielandt bound `(c-1)^2 + 1`, which is sound and complete for
    /// nonnegative matrices.
    pub fn is_primitive(&self) -> bool {
        let c = self.size();
        let bound = (c - 1) * (c - 1) + 1;
        let adj: Vec<Vec<bool>> = self
            .incidence()
            .entries
            .iter()
            .map(|row| row.iter().map(|&e| e > 0).collect())
            .collect();
        let mut acc = adj.clone();
        let mut base = adj;
        let mut n = bound - 1; // acc == adj == base^1 already
        while n > 0 {
            if n & 1 == 1 {
                acc = bool_mul(&acc, &base);
            }
            base = bool_mul(&base, &base);
            n >>= 1;
        }
        acc.iter().all(|row| row.iter().all(|&b| b))
    }

    /// Letter-injectivity: all images are pairwise distinct words.
    pub fn is_injective(&self) -> bool {
        let set: BTreeSet<&Word> = self.images.iter().collect();
        set.len() == self.images.len()
    }

    /// Iteratively identify letters with equal images, merging each
    /// equal-image class to its smallest member. The result is injective and
    /// an amalgamation of `self`.
    pub fn injectivize(&self) -> Injectivization {
        let mut current = self.clone();
        // overall map: original letter -> current letter
        let mut overall: Vec<usize> = (0..self.size()).collect();
        let mut rounds = 0;
        loop {
            let mut by_image: HashMap<&Word, Vec<Letter>> = HashMap::new();
            for a in current.alphabet.letters() {
                by_image.entry(current.image(a)).or_default().push(a);
            }
            if by_image.values().all(|v| v.len() == 1) {
                break;
            }
            rounds += 1;
            // current letter -> representative (smallest member of its class)
            let mut rep = vec![0 as Letter; current.size()];
            for group in by_image.values() {
                let r = *group.iter().min().unwrap();
                for &a in group {
                    rep[a as usize] = r;
                }
            }
            let mut reps: Vec<Letter> = rep.clone();
            reps.sort_unstable();
            reps.dedup();
            let new_of_rep: HashMap<Letter, Letter> = reps
                .iter()
                .enumerate()
                .map(|(i, &r)| (r, i as Letter))
                .collect();
            let names = reps
                .iter()
                .map(|&r| current.alphabet.name(r).to_string())
                .collect();
            let images = reps
                .iter()
                .map(|&r| {
                    current.image(r)
                        .iter()
                        .map(|&l| new_of_rep[&rep[l as usize]])
                        .collect()
                })
                .collect();
            let next = Substitution::new(Alphabet { names }, images)
                .expect("merge preserves constant length");
            for slot in overall.iter_mut() {
                *slot = new_of_rep[&rep[*slot]] as usize;
            }
            current = next;
        }
        let map = LetterMap::from_class_of(
            self.alphabet.clone(),
            overall,
            current.alphabet.names().to_vec(),
        )
        .expect("injectivization classes form a partition");
        Injectivization {
            substitution: current,
            map,
            rounds,
        }
    }

    /// The exact set of length-`n` factors of the minimal system, by monotone
    /// fixpoint over factors of images of shorter factors.
    pub fn language(&self, n: usize) -> Result<BTreeSet<Word>> {
        if !self.is_primitive() {
            return Err(Error::Unsupported(
                "language extraction requires a primitive substitution".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidInput("factor length must be positive".into()));
        }
        Ok(self.language_unchecked(n))
    }

    fn language_unchecked(&self, n: usize) -> BTreeSet<Word> {
        if n == 1 {
            // primitivity: every letter occurs in the minimal system
            return self.alphabet.letters().map(|l| vec![l]).collect();
        }
        if n == 2 || self.length == 1 {
            let mut set: BTreeSet<Word> = BTreeSet::new();
            for img in &self.images {
                for w in img.windows(2) {
                    set.insert(w.to_vec());
                }
            }
            if self.length == 1 {
                // length-1 substitutions have no interior windows; fall back
                // to iterating on letter pairs of the full alphabet
                for a in self.alphabet.letters() {
                    for b in self.alphabet.letters() {
                        set.insert(vec![a, b]);
                    }
                }
            }
            loop {
                let mut next = set.clone();
                for w in &set {
                    let v = self.apply(w).expect("letters in range");
                    for win in v.windows(2) {
                        next.insert(win.to_vec());
                    }
                }
                if next.len() == set.len() {
                    return set;
                }
                set = next;
            }
        }
        // an n-window of the image of a word spans at most m consecutive
        // letters of that word
        let m = (n - 2) / self.length + 2;
        let shorter = self.language_unchecked(m);
        let mut out = BTreeSet::new();
        for w in &shorter {
            let v = self.apply(w).expect("letters in range");
            for win in v.windows(n) {
                out.insert(win.to_vec());
            }
        }
        out
    }

    /// Factor complexity `p(n) = |language(n)|`.
    pub fn factor_complexity(&self, n: usize) -> Result<usize> {
        Ok(self.language(n)?.len())
    }

    /// Morse-Hedlund test: periodic iff `p(n) <= n` for some `n`, checked up
    /// to `bound` (default `L*c^2 + 1`).
    pub fn is_aperiodic(&self, bound: Option<usize>) -> Aperiodicity {
        if !self.is_primitive() {
            return Aperiodicity::Unknown;
        }
        let c = self.size();
        let bound = bound.unwrap_or(self.length * c * c + 1);
        for n in 1..=bound {
            if self.language_unchecked(n).len() <= n {
                return Aperiodicity::Periodic { witness_n: n };
            }
        }
        Aperiodicity::CertifiedUpTo(bound)
    }

    /// The word `α(1)...α(c)` of length `L*c`.
    pub fn characteristic_word(&self) -> Word {
        self.images.iter().flatten().copied().collect()
    }

    /// Among all relabelings of the alphabet, the one with the
    /// lexicographically smallest characteristic word, together with the
    /// witnessing permutation (old letter -> new letter). Ties between
    /// equal-image letters break to the smallest permutation.
    pub fn standard_form(&self) -> (Substitution, Vec<Letter>) {
        let c = self.size();
        let id_word = self.characteristic_word();
        let mut best = StandardFormSearch {
            subst: self,
            best_word: id_word,
            best_perm: (0..c as Letter).collect(),
            slot_of: vec![None; c],
        };
        // seed: identity relabeling
        best.best_word = rename_char_word(self, &(0..c as Letter).collect::<Vec<_>>());
        let mut slots: Vec<Option<Letter>> = vec![None; c];
        best.search(&mut slots, 0);
        let perm = best.best_perm.clone();
        let images: Vec<Word> = (0..c).map(|new| {
            let old = perm.iter().position(|&p| p as usize == new).unwrap();
            self.images[old].iter().map(|&l| perm[l as usize]).collect()
        })
        .collect();
        let sub = Substitution::new(Alphabet::canonical(c), images)
            .expect("relabeling preserves shape");
        (sub, perm)
    }

    /// The unique substitution `t` with `π∘self = t∘π`, if one exists.
    pub fn amalgamate(&self, map: &LetterMap) -> Option<Substitution> {
        if map.source_size() != self.size() {
            return None;
        }
        let k = map.target_size();
        let mut images: Vec<Option<Word>> = vec![None; k];
        for a in self.alphabet.letters() {
            let t = map.class_of(a) as usize;
            let projected = map.apply(self.image(a));
            match &images[t] {
                None => images[t] = Some(projected),
                Some(existing) if *existing == projected => {}
                Some(_) => return None,
            }
        }
        let images: Vec<Word> = images.into_iter().map(|w| w.unwrap()).collect();
        let alphabet = Alphabet::with_names(map.target_names().to_vec()).ok()?;
        Substitution::new(alphabet, images).ok()
    }

    /// Render in the rule text format using the alphabet's symbol tokens.
    pub fn rules_string(&self) -> String {
        self.alphabet
            .letters()
            .map(|a| {
                format!(
                    "{}->{}",
                    self.alphabet.name(a),
                    self.alphabet.render_word(self.image(a))
                )
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rules_string())
    }
}

/// Result of iterated equal-image merging.
pub struct Injectivization {
    pub substitution: Substitution,
    pub map: LetterMap,
    pub rounds: usize,
}

/// Summary of the basic classification of one substitution.
#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub primitive: bool,
    pub injective: bool,
    pub aperiodic: Aperiodicity,
    pub standard_form: Substitution,
    pub characteristic_word: Word,
}

pub fn analyze(s: &Substitution, aperiodicity_bound: Option<usize>) -> AnalysisReport {
    let (standard_form, _) = s.standard_form();
    AnalysisReport {
        primitive: s.is_primitive(),
        injective: s.is_injective(),
        aperiodic: s.is_aperiodic(aperiodicity_bound),
        characteristic_word: standard_form.characteristic_word(),
        standard_form,
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] {
                for j in 0..n {
                    if b[k][j] {
                        out[i][j] = true;
                    }
                }
            }
        }
    }
    out
}

/// Split rule text on commas and whitespace, keeping the character offset of
/// each rule for error reporting.
fn split_rules(input: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in input.char_indices() {
        if ch == ',' || ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &input[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &input[s..]));
    }
    out
}

fn rename_char_word(s: &Substitution, perm: &[Letter]) -> Word {
    // characteristic word of the relabeled substitution, perm: old -> new
    let c = s.size();
    let mut out = Vec::with_capacity(c * s.length());
    for new in 0..c as Letter {
        let old = perm.iter().position(|&p| p == new).unwrap();
        out.extend(s.images()[old].iter().map(|&l| perm[l as usize]));
    }
    out
}

/// Branch-and-bound over relabelings: slots are the new letters in order;
/// assigning old letters to slots determines a prefix of the characteristic
/// word, which prunes against the best complete relabeling found so far.
struct StandardFormSearch<'a> {
    subst: &'a Substitution,
    best_word: Word,
    best_perm: Vec<Letter>,
    slot_of: Vec<Option<Letter>>, // old letter -> new letter
}

impl<'a> StandardFormSearch<'a> {
    fn search(&mut self, slots: &mut Vec<Option<Letter>>, depth: usize) {
        let c = self.subst.size();
        if depth == c {
            let word = self.determined_prefix(slots);
            debug_assert_eq!(word.len(), c * self.subst.length());
            let perm: Vec<Letter> = (0..c)
                .map(|old| self.slot_of[old].unwrap())
                .collect();
            if word < self.best_word || (word == self.best_word && perm < self.best_perm) {
                self.best_word = word;
                self.best_perm = perm;
            }
            return;
        }
        for old in 0..c as Letter {
            if self.slot_of[old as usize].is_some() {
                continue;
            }
            slots[depth] = Some(old);
            self.slot_of[old as usize] = Some(depth as Letter);
            let prefix = self.determined_prefix(slots);
            if prefix.as_slice() <= &self.best_word[..prefix.len()] {
                self.search(slots, depth + 1);
            }
            slots[depth] = None;
            self.slot_of[old as usize] = None;
        }
    }

    /// Characteristic-word prefix determined by the current partial
    /// assignment: stops at the first letter whose new name is unknown.
    fn determined_prefix(&self, slots: &[Option<Letter>]) -> Word {
        let mut out = Vec::new();
        for slot in slots {
            let Some(old) = slot else { break };
            for &l in &self.subst.images()[*old as usize] {
                match self.slot_of[l as usize] {
                    Some(new) => out.push(new),
                    None => return out,
                }
            }
        }
        out
    }
}
