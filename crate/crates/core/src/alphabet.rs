//! Output labels and the words built from them.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Index of a label inside its [`Alphabet`].
pub type Letter = u8;

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = 256;

/// An ordered set of distinct output labels.
///
/// Labels map bijectively onto the letters `0..len()`. Words are rendered by
/// joining labels with the separator, which defaults to the empty string when
/// every label is a single character and to `"."` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    separator: String,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let separator = if labels.iter().all(|l| l.chars().count() == 1) {
            String::new()
        } else {
            ".".to_owned()
        };
        Self::with_separator(labels, separator)
    }

    pub fn with_separator(labels: Vec<String>, separator: impl Into<String>) -> Result<Self> {
        let separator = separator.into();
        if labels.is_empty() {
            return Err(Error::invalid("alphabet needs at least one label"));
        }
        if labels.len() > MAX_ALPHABET {
            return Err(Error::invalid(format!(
                "alphabet has {} labels, at most {MAX_ALPHABET} are supported",
                labels.len()
            )));
        }
        if separator.chars().any(char::is_whitespace) {
            return Err(Error::invalid("word separator must not contain whitespace"));
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::invalid(format!(
                    "label {label:?} is empty or contains whitespace"
                )));
            }
            if !separator.is_empty() && label.contains(separator.as_str()) {
                return Err(Error::invalid(format!(
                    "label {label:?} contains the separator {separator:?}"
                )));
            }
            if labels[..i].contains(label) {
                return Err(Error::invalid(format!("duplicate label {label:?}")));
            }
        }
        if separator.is_empty() && labels.iter().any(|l| l.chars().count() != 1) {
            return Err(Error::invalid(
                "multi-character labels need a non-empty separator",
            ));
        }
        Ok(Self { labels, separator })
    }

    /// Labels `"0"`, `"1"`, … up to `n - 1`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn separator(&self) -> &str {
        &self.separator
    }

    pub fn label(&self, letter: Letter) -> Option<&str> {
        self.labels.get(letter as usize).map(String::as_str)
    }

    pub fn letter(&self, label: &str) -> Option<Letter> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as Letter)
    }

    pub fn contains_letter(&self, letter: Letter) -> bool {
        (letter as usize) < self.labels.len()
    }

    pub fn render(&self, word: &[Letter]) -> String {
        let mut out = String::new();
        for (i, &c) in word.iter().enumerate() {
            if i > 0 {
                out.push_str(&self.separator);
            }
            out.push_str(&self.labels[c as usize]);
        }
        out
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        if text.is_empty() {
            return Ok(Word::default());
        }
        let lookup = |label: &str| {
            self.letter(label)
                .ok_or_else(|| Error::Parse(format!("word {text:?}: unknown label {label:?}")))
        };
        let letters = if self.separator.is_empty() {
            let mut buf = [0u8; 4];
            text.chars()
                .map(|c| lookup(c.encode_utf8(&mut buf)))
                .collect::<Result<Vec<_>>>()?
        } else {
            text.split(self.separator.as_str())
                .map(lookup)
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Word(letters))
    }
}

/// A finite sequence of letters. Ordering is lexicographic by letter index.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    /// Drops the first letter and appends `next`, keeping the length.
    pub fn shifted(&self, next: Letter) -> Word {
        shift_window(&self.0, next)
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }
}

pub(crate) fn shift_window(window: &[Letter], next: Letter) -> Word {
    let mut letters = Vec::with_capacity(window.len());
    if let Some(rest) = window.get(1..) {
        letters.extend_from_slice(rest);
    }
    letters.push(next);
    Word(letters)
}

impl Deref for Word {
    type Target = [Letter];

    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl Borrow<[Letter]> for Word {
    fn borrow(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(letters: Vec<Letter>) -> Self {
        Word(letters)
    }
}

impl From<&[Letter]> for Word {
    fn from(letters: &[Letter]) -> Self {
        Word(letters.to_vec())
    }
}

impl<const N: usize> From<[Letter; N]> for Word {
    fn from(letters: [Letter; N]) -> Self {
        Word(letters.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_char_labels_have_no_separator() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        assert_eq!(ab.separator(), "");
        assert_eq!(ab.render(&[0, 1, 1]), "abb");
        assert_eq!(ab.parse("abb").unwrap().letters(), &[0, 1, 1]);
    }

    #[test]
    fn multi_char_labels_use_dot() {
        let ab = Alphabet::new(["lo", "hi"]).unwrap();
        assert_eq!(ab.separator(), ".");
        assert_eq!(ab.render(&[1, 0]), "hi.lo");
        assert_eq!(ab.parse("hi.lo").unwrap().letters(), &[1, 0]);
    }

    #[test]
    fn rejects_duplicates_and_unknown_labels() {
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::new(["a b"]).is_err());
        let ab = Alphabet::new(["a", "b"]).unwrap();
        assert!(matches!(ab.parse("abc"), Err(Error::Parse(_))));
    }

    #[test]
    fn label_index_bijection() {
        let digits = Alphabet::numbered(9).unwrap();
        for i in 0..9u8 {
            assert_eq!(digits.letter(digits.label(i).unwrap()), Some(i));
        }
        assert_eq!(digits.label(9), None);
    }

    #[test]
    fn shift_drops_first_letter() {
        let w = Word::from([0, 1, 1]);
        assert_eq!(w.shifted(0), Word::from([1, 1, 0]));
        assert!(Word::from([0, 1]) < Word::from([1, 0]));
    }
}
