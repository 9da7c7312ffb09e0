//! Documents, verification problems and corpora.
//!
//! Two on-disk formats are handled here:
//!
//! * the tagged-token format: one `surface<TAB>POS` pair per line, a blank
//!   line is a hard sentence break and a literal `<NL>` line marks a newline
//!   in the original text;
//! * the corpus format: JSON Lines with one verification problem per line,
//!   reference documents in a sidecar file of document objects.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coarse part-of-speech labels accepted in tagged input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Propn,
    Verb,
    Adj,
    Adv,
    Pron,
    Det,
    Adp,
    Conj,
    Part,
    Num,
    Punct,
    Sym,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 14] = [
        Pos::Noun,
        Pos::Propn,
        Pos::Verb,
        Pos::Adj,
        Pos::Adv,
        Pos::Pron,
        Pos::Det,
        Pos::Adp,
        Pos::Conj,
        Pos::Part,
        Pos::Num,
        Pos::Punct,
        Pos::Sym,
        Pos::Other,
    ];

    /// Labels whose tokens carry content and are masked unless retained.
    pub const CONTENT: [Pos; 7] = [
        Pos::Noun,
        Pos::Propn,
        Pos::Verb,
        Pos::Adj,
        Pos::Adv,
        Pos::Num,
        Pos::Sym,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Propn => "PROPN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Pron => "PRON",
            Pos::Det => "DET",
            Pos::Adp => "ADP",
            Pos::Conj => "CONJ",
            Pos::Part => "PART",
            Pos::Num => "NUM",
            Pos::Punct => "PUNCT",
            Pos::Sym => "SYM",
            Pos::Other => "OTHER",
        }
    }

    pub fn is_content(self) -> bool {
        Self::CONTENT.contains(&self)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Pos::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown POS label {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    surface: String,
    pos: Pos,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, pos: Pos) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err(Error::Argument("token surface must be non-empty".into()));
        }
        Ok(Self { surface, pos })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn pos(&self) -> Pos {
        self.pos
    }
}

/// One element of a tagged token stream before segmentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StreamItem {
    Token(TaggedToken),
    /// Newline in the source text; always a sentence boundary.
    Newline,
}

/// Surfaces that close a sentence. ASCII `...` is normalised to `…` on parse.
pub const TERMINATORS: [&str; 4] = [".", "!", "?", "…"];

pub fn is_terminator(surface: &str) -> bool {
    TERMINATORS.contains(&surface)
}

/// Split a token stream into sentences.
///
/// A boundary follows every terminal punctuation token (which stays in its
/// sentence) and every newline marker (which is consumed). Empty segments
/// are dropped.
pub fn segment_sentences<I>(items: I) -> Vec<Vec<TaggedToken>>
where
    I: IntoIterator<Item = StreamItem>,
{
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for item in items {
        match item {
            StreamItem::Token(tok) => {
                let ends = is_terminator(tok.surface());
                current.push(tok);
                if ends {
                    sentences.push(std::mem::take(&mut current));
                }
            }
            StreamItem::Newline => {
                if !current.is_empty() {
                    sentences.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// A document that has been tagged but not yet masked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedDocument {
    pub id: String,
    pub sentences: Vec<Vec<TaggedToken>>,
    /// Path as written in the corpus file, kept for re-serialisation.
    pub source: Option<String>,
}

/// Parse a tagged-token stream into a segmented document.
pub fn parse_tagged_document(raw: &str, id: &str) -> Result<TaggedDocument> {
    let mut items = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line == "<NL>" {
            items.push(StreamItem::Newline);
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        }
        let surface = match fields[0] {
            "..." => "…",
            s => s,
        };
        if surface.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty token surface".into(),
            });
        }
        let pos = Pos::from_str(fields[1].trim()).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        items.push(StreamItem::Token(TaggedToken {
            surface: surface.to_string(),
            pos,
        }));
    }
    let sentences = segment_sentences(items);
    if sentences.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(TaggedDocument {
        id: id.to_string(),
        sentences,
        source: None,
    })
}

pub fn read_tagged_document(path: &Path, id: &str) -> Result<TaggedDocument> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tagged_document(&raw, id).map_err(|e| match e {
        Error::Parse { line, message } => {
            Error::load(path.display().to_string(), format!("line {line}: {message}"))
        }
        Error::EmptyDocument => Error::load(path.display().to_string(), "empty document"),
        other => other,
    })
}

/// A masked sentence: a non-empty sequence of grammar tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Sentence(Vec<String>);

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Argument("sentence must contain at least one token".into()));
        }
        if tokens.iter().any(|t| t.is_empty()) {
            return Err(Error::Argument("sentence tokens must be non-empty".into()));
        }
        Ok(Self(tokens))
    }

    /// Convenience constructor splitting on whitespace; panics on empty input.
    pub fn from_words(text: &str) -> Self {
        Self::new(text.split_whitespace().map(str::to_string).collect())
            .expect("non-empty sentence")
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<String>> for Sentence {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        Sentence::new(tokens)
    }
}

impl From<Sentence> for Vec<String> {
    fn from(s: Sentence) -> Self {
        s.0
    }
}

/// A masked document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(id: impl Into<String>, sentences: Vec<Sentence>) -> Result<Self> {
        let id = id.into();
        if sentences.is_empty() {
            return Err(Error::Data(format!("document {id} has no sentences")));
        }
        Ok(Self { id, sentences })
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }
}

/// A document as it appears in a corpus: already masked, or tagged and
/// awaiting masking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DocumentSource {
    Masked(Document),
    Tagged(TaggedDocument),
}

impl DocumentSource {
    pub fn id(&self) -> &str {
        match self {
            DocumentSource::Masked(d) => &d.id,
            DocumentSource::Tagged(d) => &d.id,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawDocument {
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentences: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tagged: Option<String>,
}

impl RawDocument {
    fn from_source(doc: &DocumentSource) -> Self {
        match doc {
            DocumentSource::Masked(d) => RawDocument {
                id: Some(d.id.clone()),
                sentences: Some(d.sentences.iter().map(|s| s.tokens().to_vec()).collect()),
                tagged: None,
            },
            DocumentSource::Tagged(d) => RawDocument {
                id: Some(d.id.clone()),
                sentences: None,
                tagged: Some(d.source.clone().unwrap_or_else(|| format!("{}.tsv", d.id))),
            },
        }
    }

    fn resolve(self, base_dir: &Path) -> std::result::Result<DocumentSource, String> {
        let id = self.id.ok_or("document missing required field \"id\"")?;
        match (self.sentences, self.tagged) {
            (Some(sentences), None) => {
                let sentences = sentences
                    .into_iter()
                    .map(Sentence::new)
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| format!("document {id}: {e}"))?;
                let doc = Document::new(id, sentences).map_err(|e| e.to_string())?;
                Ok(DocumentSource::Masked(doc))
            }
            (None, Some(path)) => {
                let full = base_dir.join(&path);
                let mut doc = read_tagged_document(&full, &id).map_err(|e| e.to_string())?;
                doc.source = Some(path);
                Ok(DocumentSource::Tagged(doc))
            }
            (Some(_), Some(_)) => Err(format!(
                "document {id} has both \"sentences\" and \"tagged\""
            )),
            (None, None) => Err(format!(
                "document {id} missing required field \"sentences\" or \"tagged\""
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Y,
    N,
}

impl Label {
    pub fn is_same_author(self) -> bool {
        self == Label::Y
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Y => "Y",
            Label::N => "N",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    #[default]
    Test,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationProblem {
    pub id: String,
    /// Candidate author, used to enforce author-disjoint splits.
    pub author: Option<String>,
    pub unknown: Vec<DocumentSource>,
    pub known: Vec<DocumentSource>,
    pub label: Option<Label>,
}

impl VerificationProblem {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.unknown.is_empty() {
            return Err(format!("problem {}: \"unknown\" is empty", self.id));
        }
        if self.known.is_empty() {
            return Err(format!("problem {}: \"known\" is empty", self.id));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawProblem {
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    author: Option<String>,
    unknown: Option<Vec<RawDocument>>,
    known: Option<Vec<RawDocument>>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partition: Option<Partition>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub problems: Vec<VerificationProblem>,
    pub reference_docs: Vec<DocumentSource>,
    pub partition: Partition,
}

impl Corpus {
    pub fn new(
        problems: Vec<VerificationProblem>,
        reference_docs: Vec<DocumentSource>,
        partition: Partition,
    ) -> Result<Self> {
        let corpus = Self {
            problems,
            reference_docs,
            partition,
        };
        corpus.validate().map_err(Error::Data)?;
        Ok(corpus)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let mut ids = HashSet::new();
        let mut doc_ids = HashSet::new();
        for p in &self.problems {
            p.validate()?;
            if !ids.insert(p.id.as_str()) {
                return Err(format!("duplicate problem id {:?}", p.id));
            }
            for d in p.unknown.iter().chain(&p.known) {
                doc_ids.insert(d.id());
            }
        }
        for d in &self.reference_docs {
            if doc_ids.contains(d.id()) {
                return Err(format!(
                    "reference document {:?} also appears in a problem",
                    d.id()
                ));
            }
        }
        Ok(())
    }

    /// Replace the reference population, re-checking disjointness.
    pub fn with_reference_docs(mut self, docs: Vec<DocumentSource>) -> Result<Self> {
        self.reference_docs = docs;
        self.validate().map_err(Error::Data)?;
        Ok(self)
    }

    pub fn labels(&self) -> Vec<Option<Label>> {
        self.problems.iter().map(|p| p.label).collect()
    }

    /// Problems as JSON Lines (reference documents are not included).
    pub fn problems_to_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.problems {
            let raw = RawProblem {
                id: Some(p.id.clone()),
                author: p.author.clone(),
                unknown: Some(p.unknown.iter().map(RawDocument::from_source).collect()),
                known: Some(p.known.iter().map(RawDocument::from_source).collect()),
                label: p.label.map(|l| l.to_string()),
                partition: Some(self.partition),
            };
            out.push_str(&serde_json::to_string(&raw).expect("serialisable problem"));
            out.push('\n');
        }
        out
    }

    /// Parse problems from JSON Lines. Tagged document paths resolve against
    /// `base_dir`; `origin` names the input in error messages.
    pub fn from_jsonl(text: &str, base_dir: &Path, origin: &str) -> Result<Self> {
        let mut problems = Vec::new();
        let mut partition: Option<Partition> = None;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let at = |msg: String| Error::load(origin, format!("line {}: {msg}", idx + 1));
            let raw: RawProblem =
                serde_json::from_str(line).map_err(|e| at(format!("invalid JSON: {e}")))?;
            let id = raw
                .id
                .ok_or_else(|| at("missing required field \"id\"".into()))?;
            let label = match raw.label.as_deref() {
                None => None,
                Some("Y") => Some(Label::Y),
                Some("N") => Some(Label::N),
                Some(other) => {
                    return Err(at(format!("invalid label {other:?} (expected \"Y\", \"N\" or null)")))
                }
            };
            let resolve_all = |docs: Option<Vec<RawDocument>>, field: &str| {
                docs.ok_or_else(|| at(format!("missing required field {field:?}")))?
                    .into_iter()
                    .map(|d| d.resolve(base_dir).map_err(&at))
                    .collect::<Result<Vec<_>>>()
            };
            let unknown = resolve_all(raw.unknown, "unknown")?;
            let known = resolve_all(raw.known, "known")?;
            if let Some(p) = raw.partition {
                match partition {
                    Some(prev) if prev != p => {
                        return Err(at("mixed partition tags in one corpus file".into()))
                    }
                    _ => partition = Some(p),
                }
            }
            problems.push(VerificationProblem {
                id,
                author: raw.author,
                unknown,
                known,
                label,
            });
        }
        let corpus = Corpus {
            problems,
            reference_docs: Vec::new(),
            partition: partition.unwrap_or_default(),
        };
        corpus.validate().map_err(|m| Error::load(origin, m))?;
        Ok(corpus)
    }
}

/// Documents as JSON Lines (the reference sidecar format).
pub fn documents_to_jsonl(docs: &[DocumentSource]) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&serde_json::to_string(&RawDocument::from_source(d)).expect("serialisable"));
        out.push('\n');
    }
    out
}

pub fn documents_from_jsonl(text: &str, base_dir: &Path, origin: &str) -> Result<Vec<DocumentSource>> {
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::load(origin, format!("line {}: {msg}", idx + 1));
        let raw: RawDocument =
            serde_json::from_str(line).map_err(|e| at(format!("invalid JSON: {e}")))?;
        let doc = raw.resolve(base_dir).map_err(at)?;
        if !ids.insert(doc.id().to_string()) {
            return Err(Error::load(
                origin,
                format!("line {}: duplicate document id {:?}", idx + 1, doc.id()),
            ));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Sidecar path holding reference documents for a corpus file:
/// `dir/name.jsonl` → `dir/name.ref.jsonl`.
pub fn reference_sidecar(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.ref.jsonl"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or_else(|| Path::new("."))
}

/// Load a corpus file plus its reference sidecar, if one exists.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let origin = path.display().to_string();
    let corpus = Corpus::from_jsonl(&read(path)?, base_dir(path), &origin)?;
    let sidecar = reference_sidecar(path);
    if sidecar.exists() {
        let refs = load_documents(&sidecar)?;
        return corpus
            .with_reference_docs(refs)
            .map_err(|e| Error::load(origin, e.to_string()));
    }
    Ok(corpus)
}

pub fn load_documents(path: &Path) -> Result<Vec<DocumentSource>> {
    documents_from_jsonl(&read(path)?, base_dir(path), &path.display().to_string())
}

/// Write problems to `path` and, when present, reference documents to the
/// sidecar next to it.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    fs::write(path, corpus.problems_to_jsonl()).map_err(|e| Error::io(path, e))?;
    if !corpus.reference_docs.is_empty() {
        let sidecar = reference_sidecar(path);
        fs::write(&sidecar, documents_to_jsonl(&corpus.reference_docs))
            .map_err(|e| Error::io(&sidecar, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(s: &str) -> StreamItem {
        StreamItem::Token(TaggedToken::new(s, Pos::Other).unwrap())
    }

    fn surfaces(sentences: &[Vec<TaggedToken>]) -> Vec<Vec<&str>> {
        sentences
            .iter()
            .map(|s| s.iter().map(TaggedToken::surface).collect())
            .collect()
    }

    #[test]
    fn two_tokens_and_blank_line() {
        let doc = parse_tagged_document("the\tDET\ncat\tNOUN\n\n", "d").unwrap();
        assert_eq!(doc.sentences.len(), 1);
        assert_eq!(doc.sentences[0].len(), 2);
        assert_eq!(doc.sentences[0][1].pos(), Pos::Noun);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(parse_tagged_document("", "d"), Err(Error::EmptyDocument)));
        assert!(matches!(parse_tagged_document("\n<NL>\n\n", "d"), Err(Error::EmptyDocument)));
    }

    #[test]
    fn three_fields_names_the_line() {
        let err = parse_tagged_document("the\tDET\na\tb\tc\n", "d").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_pos_is_a_parse_error() {
        let err = parse_tagged_document("the\tDETERMINER\n", "d").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn ascii_ellipsis_is_normalised_and_terminal() {
        let doc = parse_tagged_document("well\tADV\n...\tPUNCT\nso\tADV\n", "d").unwrap();
        assert_eq!(surfaces(&doc.sentences), vec![vec!["well", "…"], vec!["so"]]);
    }

    #[test]
    fn newline_marker_breaks_without_emitting() {
        let doc = parse_tagged_document("a\tDET\n<NL>\nb\tDET\n", "d").unwrap();
        assert_eq!(surfaces(&doc.sentences), vec![vec!["a"], vec!["b"]]);
    }

    #[test]
    fn segment_on_terminators() {
        let s = segment_sentences(vec![tok("a"), tok("."), tok("b"), tok(".")]);
        assert_eq!(surfaces(&s), vec![vec!["a", "."], vec!["b", "."]]);
    }

    #[test]
    fn trailing_segment_kept() {
        let s = segment_sentences(vec![tok("a"), tok("b")]);
        assert_eq!(surfaces(&s), vec![vec!["a", "b"]]);
    }

    #[test]
    fn lone_terminator_forms_its_own_sentence() {
        let s = segment_sentences(vec![tok("a"), tok("."), tok("."), tok("b")]);
        assert_eq!(surfaces(&s), vec![vec!["a", "."], vec!["."], vec!["b"]]);
    }

    #[test]
    fn sentence_rejects_empty() {
        assert!(Sentence::new(vec![]).is_err());
        assert!(serde_json::from_str::<Sentence>("[]").is_err());
    }

    const TWO: &str = r#"{"id":"p1","unknown":[{"id":"u1","sentences":[["the","N","."]]}],"known":[{"id":"k1","sentences":[["a","V"]]}],"label":"Y"}
{"id":"p2","unknown":[{"id":"u2","sentences":[["of","N"]]}],"known":[{"id":"k2","sentences":[["N"]]}],"label":null}
"#;

    #[test]
    fn load_two_problems() {
        let c = Corpus::from_jsonl(TWO, Path::new("."), "mem").unwrap();
        assert_eq!(c.problems.len(), 2);
        assert_eq!(c.problems[0].label, Some(Label::Y));
        assert_eq!(c.problems[1].label, None);
        assert_eq!(c.partition, Partition::Test);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = TWO.replace("\"p2\"", "\"p1\"");
        let err = Corpus::from_jsonl(&text, Path::new("."), "mem").unwrap_err();
        assert!(err.to_string().contains("duplicate problem id"), "{err}");
    }

    #[test]
    fn bad_label_rejected() {
        let text = TWO.replace("\"label\":\"Y\"", "\"label\":\"MAYBE\"");
        let err = Corpus::from_jsonl(&text, Path::new("."), "mem").unwrap_err();
        assert!(err.to_string().contains("invalid label"), "{err}");
    }

    #[test]
    fn missing_field_rejected() {
        let text = r#"{"id":"p1","unknown":[{"id":"u1","sentences":[["a"]]}],"label":"N"}"#;
        let err = Corpus::from_jsonl(text, Path::new("."), "mem").unwrap_err();
        assert!(err.to_string().contains("\"known\""), "{err}");
    }

    #[test]
    fn reference_overlap_rejected() {
        let c = Corpus::from_jsonl(TWO, Path::new("."), "mem").unwrap();
        let dup = c.problems[0].known[0].clone();
        assert!(c.with_reference_docs(vec![dup]).is_err());
    }

    #[test]
    fn tagged_documents_resolve_relative_to_corpus() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("k.tsv"), "the\tDET\ncat\tNOUN\n.\tPUNCT\n").unwrap();
        let text = r#"{"id":"p","unknown":[{"id":"u","sentences":[["N"]]}],"known":[{"id":"k","tagged":"k.tsv"}],"label":"N"}"#;
        let path = dir.path().join("c.jsonl");
        fs::write(&path, text).unwrap();
        let c = load_corpus(&path).unwrap();
        match &c.problems[0].known[0] {
            DocumentSource::Tagged(d) => {
                assert_eq!(d.sentences[0].len(), 3);
                assert_eq!(d.source.as_deref(), Some("k.tsv"));
            }
            other => panic!("expected tagged doc, got {other:?}"),
        }
        // Round trip keeps the relative path.
        assert!(c.problems_to_jsonl().contains("\"tagged\":\"k.tsv\""));
    }
}
