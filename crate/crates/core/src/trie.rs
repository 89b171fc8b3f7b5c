//! Prefix trie over words, used as a support membership structure.

use alloc::vec;
use alloc::vec::Vec;

use crate::alphabet::Letter;

#[derive(Clone, Debug, Default)]
struct Node {
    // Sorted by letter; alphabets are small so a linear scan wins.
    children: Vec<(Letter, u32)>,
    terminal: bool,
}

/// A set of words stored with shared prefixes.
#[derive(Clone, Debug)]
pub struct WordTrie {
    nodes: Vec<Node>,
    words: usize,
}

impl Default for WordTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl WordTrie {
    pub fn new() -> Self {
        Self {
            nodes: vec![Node::default()],
            words: 0,
        }
    }

    /// Inserts `word`; returns `true` if it was not present.
    pub fn insert(&mut self, word: &[Letter]) -> bool {
        let mut at = 0usize;
        for &c in word {
            let children = &self.nodes[at].children;
            at = match children.binary_search_by_key(&c, |&(l, _)| l) {
                Ok(i) => children[i].1 as usize,
                Err(i) => {
                    let next = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[at].children.insert(i, (c, next as u32));
                    next
                }
            };
        }
        let fresh = !self.nodes[at].terminal;
        self.nodes[at].terminal = true;
        self.words += usize::from(fresh);
        fresh
    }

    pub fn contains(&self, word: &[Letter]) -> bool {
        let mut at = 0usize;
        for &c in word {
            let children = &self.nodes[at].children;
            match children.binary_search_by_key(&c, |&(l, _)| l) {
                Ok(i) => at = children[i].1 as usize,
                Err(_) => return false,
            }
        }
        self.nodes[at].terminal
    }

    /// Number of distinct words stored.
    pub fn len(&self) -> usize {
        self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

impl<'a> FromIterator<&'a [Letter]> for WordTrie {
    fn from_iter<T: IntoIterator<Item = &'a [Letter]>>(iter: T) -> Self {
        let mut trie = WordTrie::new();
        for w in iter {
            trie.insert(w);
        }
        trie
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn prefixes_are_not_members() {
        let mut t = WordTrie::new();
        assert!(t.insert(&[0, 1, 1]));
        assert!(!t.insert(&[0, 1, 1]));
        assert!(t.contains(&[0, 1, 1]));
        assert!(!t.contains(&[0, 1]));
        assert!(!t.contains(&[0, 1, 1, 0]));
        assert_eq!(t.len(), 1);
        assert_eq!(t.node_count(), 4);
    }

    proptest! {
        #[test]
        fn agrees_with_btreeset(words in proptest::collection::vec(proptest::collection::vec(0u8..4, 0..6), 0..30),
                                probes in proptest::collection::vec(proptest::collection::vec(0u8..4, 0..6), 0..30)) {
            let trie: WordTrie = words.iter().map(Vec::as_slice).collect();
            let set: BTreeSet<_> = words.iter().cloned().collect();
            prop_assert_eq!(trie.len(), set.len());
            for p in probes.iter().chain(words.iter()) {
                prop_assert_eq!(trie.contains(p), set.contains(p));
            }
        }
    }
}
