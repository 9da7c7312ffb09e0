use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;

/// Dense token identifier. `UNK` is a vocabulary member; `BOS` and `EOS`
/// are padding pseudo-tokens outside the vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenId(pub u32);

impl TokenId {
    pub const UNK: TokenId = TokenId(0);
    pub const BOS: TokenId = TokenId(u32::MAX);
    pub const EOS: TokenId = TokenId(u32::MAX - 1);

    pub fn is_pseudo(self) -> bool {
        self == Self::BOS || self == Self::EOS
    }
}

pub const UNK_SURFACE: &str = "<unk>";
pub const BOS_SURFACE: &str = "<s>";
pub const EOS_SURFACE: &str = "</s>";

#[derive(Clone, PartialEq, Eq)]
pub struct Vocabulary {
    items: Vec<String>,
    index: HashMap<String, u32>,
}

impl fmt::Debug for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Vocabulary").field("len", &self.items.len()).finish()
    }
}

impl Vocabulary {
    /// Build from token surfaces. Items are sorted so that the id
    /// assignment does not depend on input order.
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = tokens
            .into_iter()
            .map(|s| s.as_ref().to_string())
            .filter(|s| s != UNK_SURFACE)
            .collect();
        let mut items = Vec::with_capacity(set.len() + 1);
        items.push(UNK_SURFACE.to_string());
        items.extend(set);
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        Self { items, index }
    }

    pub fn from_sentences<'a, I>(sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a Sentence>,
    {
        Self::new(sentences.into_iter().flat_map(|s| s.tokens().iter()))
    }

    /// Number of members, `UNK` included.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> TokenId {
        self.index.get(token).map_or(TokenId::UNK, |&i| TokenId(i))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn surface(&self, id: TokenId) -> &str {
        match id {
            TokenId::BOS => BOS_SURFACE,
            TokenId::EOS => EOS_SURFACE,
            TokenId(i) => self.items.get(i as usize).map_or(UNK_SURFACE, String::as_str),
        }
    }

    /// Map a sentence to ids, unknown tokens becoming `UNK`.
    pub fn encode(&self, sentence: &Sentence) -> Vec<TokenId> {
        sentence.tokens().iter().map(|t| self.id(t)).collect()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub(crate) fn from_items(items: Vec<String>) -> Option<Self> {
        if items.first().map(String::as_str) != Some(UNK_SURFACE) {
            return None;
        }
        let index: HashMap<String, u32> = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        (index.len() == items.len()).then_some(Self { items, index })
    }
}
