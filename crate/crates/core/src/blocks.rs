//! N-block alphabets, the hat-substitution family with lag, and
//! letter-to-letter projections defining projected systems.

use std::collections::HashMap;

use crate::letter_map::LetterMap;
use crate::subst::{Alphabet, Letter, Substitution, Word};
use crate::{Error, Result};

/// Ordered dictionary between the N-words of a language and a canonical coded
/// alphabet: block `i` (in lexicographic order) is coded letter `i`.
#[derive(Debug, Clone)]
pub struct BlockCoding {
    base_alphabet: Alphabet,
    n: usize,
    blocks: Vec<Word>,
    index: HashMap<Word, Letter>,
}

impl BlockCoding {
    pub fn base_alphabet(&self) -> &Alphabet {
        &self.base_alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Word] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.blocks.len()
    }

    pub fn coded_alphabet(&self) -> Alphabet {
        Alphabet::canonical(self.size())
    }

    pub fn code_of(&self, block: &[Letter]) -> Option<Letter> {
        self.index.get(block).copied()
    }

    pub fn word_of(&self, code: Letter) -> &Word {
        &self.blocks[code as usize]
    }
}

/// Code the length-N factors of the minimal system in lexicographic order.
pub fn block_coding(s: &Substitution, n: usize) -> Result<BlockCoding> {
    let blocks: Vec<Word> = s.language(n)?.into_iter().collect();
    if blocks.len() > u8::MAX as usize {
        return Err(Error::Unsupported(format!(
            "block alphabet of size {} exceeds the letter type",
            blocks.len()
        )));
    }
    let index = blocks
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as Letter))
        .collect();
    Ok(BlockCoding {
        base_alphabet: s.alphabet().clone(),
        n,
        blocks,
        index,
    })
}

/// The hat substitution with lag `M`: the image of block `a_0..a_{N-1}` is
/// read off as the `L` consecutive N-windows of `s(a_0..a_{N-1})` starting at
/// offset `M`. Any admissible lag generates the N-block presentation.
pub fn hat_substitution(s: &Substitution, n: usize, m: usize) -> Result<Substitution> {
    let coding = block_coding(s, n)?;
    hat_with_coding(s, &coding, m)
}

/// Same as [`hat_substitution`] but reusing an existing coding, so that hats
/// of different lags share one coded alphabet.
pub fn hat_with_coding(s: &Substitution, coding: &BlockCoding, m: usize) -> Result<Substitution> {
    let l = s.length();
    let n = coding.n();
    if m > (l - 1) * (n - 1) {
        return Err(Error::InvalidInput(format!(
            "lag {m} out of range 0..={} for length {l}, block size {n}",
            (l - 1) * (n - 1)
        )));
    }
    let mut images = Vec::with_capacity(coding.size());
    for block in coding.blocks() {
        let v = s.apply(block)?;
        let mut image = Vec::with_capacity(l);
        for i in 0..l {
            let window = &v[m + i..m + i + n];
            let code = coding.code_of(window).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "window at lag {m} is not a language block; is the coding for this substitution?"
                ))
            })?;
            image.push(code);
        }
        images.push(image);
    }
    Substitution::new(coding.coded_alphabet(), images)
}

/// Lag of the composition of two hat substitutions of the same base:
/// `H_{N,M} ∘ H_{N,M'}` has lag `M'·L + M` over the squared base.
pub fn compose_lags(m: usize, m_prime: usize, l: usize) -> usize {
    m_prime * l + m
}

/// Cumulative lag of the n-th iterate of a hat with lag `M`:
/// `M(L^n - 1)/(L - 1)`.
pub fn iterated_lag(m: usize, l: usize, n: u32) -> usize {
    m * ((l.pow(n) - 1) / (l - 1))
}

/// A minimal system presented as a letterwise projection of a primitive
/// substitution system. When the generator is a hat substitution, `base`
/// remembers where it came from, so verification can range over the whole
/// lag family.
#[derive(Debug, Clone)]
pub struct ProjectedSystem {
    pub generator: Substitution,
    pub projection: LetterMap,
    pub base: Option<HatBase>,
}

#[derive(Debug, Clone)]
pub struct HatBase {
    pub substitution: Substitution,
    pub n: usize,
}

impl ProjectedSystem {
    pub fn new(generator: Substitution, projection: LetterMap) -> Result<Self> {
        if projection.source_size() != generator.size() {
            return Err(Error::InvalidInput(
                "projection source must match the generator alphabet".into(),
            ));
        }
        Ok(ProjectedSystem {
            generator,
            projection,
            base: None,
        })
    }

    pub fn with_base(mut self, substitution: Substitution, n: usize) -> Self {
        self.base = Some(HatBase { substitution, n });
        self
    }

    pub fn target_alphabet(&self) -> Alphabet {
        self.projection.target_alphabet()
    }

    /// Letterwise image of a word under the projection.
    pub fn project_word(&self, word: &[Letter]) -> Word {
        self.projection.apply(word)
    }

    /// Exact factor set of the projected system: the projection of the
    /// generator's factor set.
    pub fn language(&self, n: usize) -> Result<std::collections::BTreeSet<Word>> {
        Ok(self
            .generator
            .language(n)?
            .iter()
            .map(|w| self.project_word(w))
            .collect())
    }
}
