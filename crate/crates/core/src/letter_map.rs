//! Surjective letter-to-letter maps, stored as partitions of the source
//! alphabet. Classes are ordered by smallest member; the induced map sends a
//! source letter to the index of its class.

use crate::subst::{Alphabet, Letter, Word};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LetterMap {
    source_names: Vec<String>,
    class_of: Vec<usize>,
    target_names: Vec<String>,
}

impl LetterMap {
    /// Build from explicit classes. They must be disjoint, nonempty and cover
    /// the source alphabet. The target class names default to the name of
    /// each class's smallest member.
    pub fn from_classes(source: &Alphabet, classes: &[Vec<Letter>]) -> Result<Self> {
        let c = source.size();
        let mut sorted: Vec<Vec<Letter>> = classes.to_vec();
        for class in sorted.iter_mut() {
            if class.is_empty() {
                return Err(Error::InvalidInput("empty partition class".into()));
            }
            class.sort_unstable();
        }
        sorted.sort_by_key(|class| class[0]);
        let mut class_of = vec![usize::MAX; c];
        for (i, class) in sorted.iter().enumerate() {
            for &a in class {
                if (a as usize) >= c {
                    return Err(Error::InvalidInput(format!(
                        "partition letter index {a} out of alphabet"
                    )));
                }
                if class_of[a as usize] != usize::MAX {
                    return Err(Error::InvalidInput(format!(
                        "letter {} occurs in two classes",
                        source.name(a)
                    )));
                }
                class_of[a as usize] = i;
            }
        }
        if class_of.contains(&usize::MAX) {
            return Err(Error::InvalidInput(
                "partition does not cover the alphabet".into(),
            ));
        }
        let target_names = sorted
            .iter()
            .map(|class| source.name(class[0]).to_string())
            .collect();
        Ok(LetterMap {
            source_names: source.names().to_vec(),
            class_of,
            target_names,
        })
    }

    /// Build from a restricted growth string: `rgs[a]` is the class of letter
    /// `a`, with classes numbered in order of first occurrence.
    pub fn from_rgs(source: &Alphabet, rgs: &[usize]) -> Result<Self> {
        if rgs.len() != source.size() {
            return Err(Error::InvalidInput("growth string length mismatch".into()));
        }
        let mut max = 0usize;
        for (i, &v) in rgs.iter().enumerate() {
            if v > max + 1 || (i == 0 && v != 0) {
                return Err(Error::InvalidInput(format!(
                    "not a restricted growth string: {rgs:?}"
                )));
            }
            max = max.max(v);
        }
        let k = max + 1;
        let mut target_names = vec![String::new(); k];
        for (a, &v) in rgs.iter().enumerate() {
            if target_names[v].is_empty() {
                target_names[v] = source.name(a as Letter).to_string();
            }
        }
        Ok(LetterMap {
            source_names: source.names().to_vec(),
            class_of: rgs.to_vec(),
            target_names,
        })
    }

    /// Used when class indices are already ordered by smallest member, with
    /// explicit target names (e.g. from injectivization).
    pub fn from_class_of(
        source: Alphabet,
        class_of: Vec<usize>,
        target_names: Vec<String>,
    ) -> Result<Self> {
        let k = target_names.len();
        let mut seen_order = Vec::new();
        for &v in &class_of {
            if v >= k {
                return Err(Error::InvalidInput("class index out of range".into()));
            }
            if !seen_order.contains(&v) {
                seen_order.push(v);
            }
        }
        if seen_order.len() != k || seen_order.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput(
                "classes must be numbered in order of smallest member".into(),
            ));
        }
        Ok(LetterMap {
            source_names: source.names().to_vec(),
            class_of,
            target_names,
        })
    }

    pub fn identity(source: Alphabet) -> Self {
        LetterMap {
            class_of: (0..source.size()).collect(),
            target_names: source.names().to_vec(),
            source_names: source.names().to_vec(),
        }
    }

    /// Parse the usual partition notation, e.g.
    /// `{1,2,3}{4,5,6}`. Commas between letters are optional.
    pub fn parse(text: &str, source: &Alphabet) -> Result<Self> {
        let mut classes: Vec<Vec<Letter>> = Vec::new();
        let mut current: Option<Vec<Letter>> = None;
        for ch in text.chars() {
            match ch {
                '{' => {
                    if current.is_some() {
                        return Err(Error::InvalidInput("nested `{` in partition".into()));
                    }
                    current = Some(Vec::new());
                }
                '}' => match current.take() {
                    Some(class) => classes.push(class),
                    None => {
                        return Err(Error::InvalidInput("unmatched `}` in partition".into()))
                    }
                },
                ',' | ' ' => {}
                _ => {
                    let class = current.as_mut().ok_or_else(|| {
                        Error::InvalidInput("letters outside braces in partition".into())
                    })?;
                    let letter = source.index_of(&ch.to_string()).ok_or_else(|| {
                        Error::InvalidInput(format!("unknown symbol `{ch}` in partition"))
                    })?;
                    class.push(letter);
                }
            }
        }
        if current.is_some() {
            return Err(Error::InvalidInput("unterminated `{` in partition".into()));
        }
        LetterMap::from_classes(source, &classes)
    }

    pub fn source_size(&self) -> usize {
        self.class_of.len()
    }

    pub fn target_size(&self) -> usize {
        self.target_names.len()
    }

    pub fn class_of(&self, a: Letter) -> Letter {
        self.class_of[a as usize] as Letter
    }

    pub fn source_names(&self) -> &[String] {
        &self.source_names
    }

    pub fn target_names(&self) -> &[String] {
        &self.target_names
    }

    pub fn target_alphabet(&self) -> Alphabet {
        Alphabet::with_names(self.target_names.clone()).expect("target names are distinct")
    }

    pub fn is_bijective(&self) -> bool {
        self.target_size() == self.source_size()
    }

    /// Letterwise image of a word; same length.
    pub fn apply(&self, word: &[Letter]) -> Word {
        word.iter().map(|&l| self.class_of(l)).collect()
    }

    pub fn classes(&self) -> Vec<Vec<Letter>> {
        let mut out = vec![Vec::new(); self.target_size()];
        for (a, &v) in self.class_of.iter().enumerate() {
            out[v].push(a as Letter);
        }
        out
    }

    /// Render the partition as `{1,2,3}{4,5,6}`.
    pub fn partition_string(&self) -> String {
        self.classes()
            .iter()
            .map(|class| {
                let members: Vec<&str> = class
                    .iter()
                    .map(|&a| self.source_names[a as usize].as_str())
                    .collect();
                format!("{{{}}}", members.join(","))
            })
            .collect()
    }

    /// Growth-string form: class index per source letter.
    pub fn rgs(&self) -> &[usize] {
        &self.class_of
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let a = Alphabet::canonical(6);
        let m = LetterMap::parse("{1,2,3}{4,5,6}", &a).unwrap();
        assert_eq!(m.target_size(), 2);
        assert_eq!(m.partition_string(), "{1,2,3}{4,5,6}");
        assert_eq!(m.apply(&[0, 3, 5]), vec![0, 1, 1]);
    }

    #[test]
    fn classes_ordered_by_smallest_member() {
        let a = Alphabet::canonical(4);
        let m = LetterMap::parse("{3,4}{1,2}", &a).unwrap();
        assert_eq!(m.partition_string(), "{1,2}{3,4}");
        assert_eq!(m.class_of(0), 0);
        assert_eq!(m.class_of(2), 1);
        assert_eq!(m.target_names(), &["1", "3"]);
    }

    #[test]
    fn rejects_bad_partitions() {
        let a = Alphabet::canonical(3);
        assert!(LetterMap::parse("{1,2}", &a).is_err());
        assert!(LetterMap::parse("{1,2}{2,3}", &a).is_err());
        assert!(LetterMap::parse("{1,2}{3", &a).is_err());
        assert!(LetterMap::parse("{1,2}{9}", &a).is_err());
    }

    #[test]
    fn rgs_round_trip() {
        let a = Alphabet::canonical(4);
        let m = LetterMap::from_rgs(&a, &[0, 1, 0, 2]).unwrap();
        assert_eq!(m.partition_string(), "{1,3}{2}{4}");
        assert!(LetterMap::from_rgs(&a, &[0, 2, 0, 1]).is_err());
    }
}
