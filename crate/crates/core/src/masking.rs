//! Topic masking: keep function tokens, replace content tokens by a
//! placeholder for their part of speech.
//!
//! A token survives verbatim (lower-cased) when its surface is in the
//! lexicon's retain set or its POS is a function class. Content tokens
//! (nouns, verbs, adjectives, adverbs, numerals, symbols) become their
//! placeholder glyph. Placeholders are fixed points, so masking is
//! idempotent.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::{Document, DocumentSource, Pos, Sentence, TaggedDocument, TaggedToken};
use crate::error::{Error, Result};

const DEFAULT_LEXICON: &str = include_str!("../data/default.lex");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaskingLexicon {
    retain: HashSet<String>,
    placeholders: BTreeMap<Pos, String>,
    glyphs: HashSet<String>,
}

impl MaskingLexicon {
    pub fn new(
        retain: impl IntoIterator<Item = String>,
        placeholders: BTreeMap<Pos, String>,
    ) -> Result<Self> {
        let retain: HashSet<String> = retain.into_iter().map(|s| s.to_lowercase()).collect();
        for (pos, glyph) in &placeholders {
            if glyph.is_empty() {
                return Err(Error::Config(format!("empty placeholder for {pos}")));
            }
            if retain.contains(glyph) || retain.contains(&glyph.to_lowercase()) {
                return Err(Error::Config(format!(
                    "placeholder {glyph:?} for {pos} collides with a retained token"
                )));
            }
        }
        if let Some(pos) = Pos::CONTENT.iter().find(|p| !placeholders.contains_key(p)) {
            return Err(Error::Config(format!("no placeholder for content label {pos}")));
        }
        let glyphs = placeholders.values().cloned().collect();
        Ok(Self {
            retain,
            placeholders,
            glyphs,
        })
    }

    /// The lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("built-in lexicon is valid")
    }

    /// Parse the lexicon text format: a `[retain]` section with one surface
    /// per line and a `[placeholders]` section of `POS<TAB>glyph` lines.
    /// Lines starting with `;;` are comments.
    pub fn parse(text: &str) -> Result<Self> {
        enum Section {
            None,
            Retain,
            Placeholders,
        }
        let mut section = Section::None;
        let mut retain = Vec::new();
        let mut placeholders = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(";;") {
                continue;
            }
            match trimmed {
                "[retain]" => section = Section::Retain,
                "[placeholders]" => section = Section::Placeholders,
                _ => match section {
                    Section::None => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: "entry outside of a section".into(),
                        })
                    }
                    Section::Retain => retain.push(trimmed.to_string()),
                    Section::Placeholders => {
                        let (pos, glyph) = trimmed.split_once('\t').ok_or(Error::Parse {
                            line: line_no,
                            message: "expected POS<TAB>glyph".into(),
                        })?;
                        let pos = Pos::from_str(pos.trim()).map_err(|message| Error::Parse {
                            line: line_no,
                            message,
                        })?;
                        placeholders.insert(pos, glyph.trim().to_string());
                    }
                },
            }
        }
        Self::new(retain, placeholders)
    }

    pub fn retains(&self, surface: &str) -> bool {
        self.retain.contains(&surface.to_lowercase())
    }

    pub fn placeholder(&self, pos: Pos) -> Option<&str> {
        self.placeholders.get(&pos).map(String::as_str)
    }

    pub fn is_placeholder(&self, token: &str) -> bool {
        self.glyphs.contains(token)
    }

    pub fn retain_len(&self) -> usize {
        self.retain.len()
    }

    fn mask_token(&self, tok: &TaggedToken) -> Result<String> {
        let surface = tok.surface();
        if self.glyphs.contains(surface) {
            return Ok(surface.to_string());
        }
        let folded = surface.to_lowercase();
        if self.retain.contains(&folded) || !tok.pos().is_content() {
            return Ok(folded);
        }
        self.placeholder(tok.pos())
            .map(str::to_string)
            .ok_or_else(|| Error::Config(format!("no placeholder for {}", tok.pos())))
    }
}

impl Default for MaskingLexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

pub fn load_lexicon(path: &Path) -> Result<MaskingLexicon> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    MaskingLexicon::parse(&text).map_err(|e| Error::load(path.display().to_string(), e.to_string()))
}

/// Mask one sentence token by token; the output has the input's length.
pub fn mask_sentence(tokens: &[TaggedToken], lex: &MaskingLexicon) -> Result<Sentence> {
    let masked = tokens
        .iter()
        .map(|t| lex.mask_token(t))
        .collect::<Result<Vec<_>>>()?;
    Sentence::new(masked)
}

pub fn mask_document(doc: &TaggedDocument, lex: &MaskingLexicon) -> Result<Document> {
    let sentences = doc
        .sentences
        .iter()
        .map(|s| mask_sentence(s, lex))
        .collect::<Result<Vec<_>>>()?;
    Document::new(doc.id.clone(), sentences)
}

/// Masked view of a corpus document; pre-masked documents pass through.
pub fn masked(doc: &DocumentSource, lex: &MaskingLexicon) -> Result<Document> {
    match doc {
        DocumentSource::Masked(d) => Ok(d.clone()),
        DocumentSource::Tagged(d) => mask_document(d, lex),
    }
}
