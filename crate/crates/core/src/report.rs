//! Sentence rankings and token highlighting for analysts.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambdag::LambdaTrace;
use crate::ngram::EOS_SURFACE;

/// Highlight strength of a token, from its z-scored λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bin {
    None,
    Light,
    Medium,
    Dark,
}

impl Bin {
    /// `z > 2` dark, `1 < z ≤ 2` medium, `0.5 < z ≤ 1` light.
    pub fn from_z(z: f64) -> Self {
        if z > 2.0 {
            Bin::Dark
        } else if z > 1.0 {
            Bin::Medium
        } else if z > 0.5 {
            Bin::Light
        } else {
            Bin::None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighlightToken {
    pub token: String,
    pub lambda: f64,
    pub z: f64,
    pub bin: Bin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighlightSentence {
    pub index: usize,
    pub lambda: f64,
    pub tokens: Vec<HighlightToken>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighlightDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    pub total: f64,
    /// In document order.
    pub sentences: Vec<HighlightSentence>,
    /// Sentence indices, highest λ first.
    pub ranking: Vec<usize>,
}

impl HighlightDoc {
    pub fn tokens(&self) -> impl Iterator<Item = &HighlightToken> {
        self.sentences.iter().flat_map(|s| &s.tokens)
    }

    pub fn top(&self, k: usize) -> &[usize] {
        &self.ranking[..k.min(self.ranking.len())]
    }
}

/// Sentence indices sorted by score, highest first; equal scores keep
/// document order.
pub fn rank_sentences(trace: &LambdaTrace) -> Vec<usize> {
    let s = &trace.sentence_scores;
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    idx
}

/// z-score every token λ against the whole document (population sd) and
/// bin it.
pub fn zscore_bins(trace: &LambdaTrace) -> HighlightDoc {
    let lambdas: Vec<f64> = trace.token_scores.iter().map(|t| t.lambda).collect();
    let n = lambdas.len() as f64;
    let mean = lambdas.iter().sum::<f64>() / n;
    let sd = (lambdas.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let usable = lambdas.len() >= 2 && sd > 0.0 && sd.is_finite();
    if !usable {
        log::warn!("token scores have no spread; nothing is highlighted");
    }

    let mut sentences: Vec<HighlightSentence> = trace
        .sentence_scores
        .iter()
        .enumerate()
        .map(|(index, &lambda)| HighlightSentence {
            index,
            lambda,
            tokens: Vec::new(),
        })
        .collect();
    for t in &trace.token_scores {
        let z = if usable { (t.lambda - mean) / sd } else { 0.0 };
        let bin = if usable { Bin::from_z(z) } else { Bin::None };
        if let Some(s) = sentences.get_mut(t.sentence) {
            s.tokens.push(HighlightToken {
                token: t.token.clone(),
                lambda: t.lambda,
                z,
                bin,
            });
        }
    }
    HighlightDoc {
        problem: trace.problem.clone(),
        total: trace.total,
        sentences,
        ranking: rank_sentences(trace),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Html,
    Ansi,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "html" => Ok(Format::Html),
            "ansi" | "text" => Ok(Format::Ansi),
            other => Err(Error::Argument(format!("unknown report format `{other}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Html => "html",
            Format::Ansi => "ansi",
        })
    }
}

pub fn render(doc: &HighlightDoc, format: Format) -> String {
    match format {
        Format::Html => render_html(doc),
        Format::Ansi => render_ansi(doc),
    }
}

fn display_token(t: &str) -> &str {
    if t == EOS_SURFACE {
        "[EOS]"
    } else {
        t
    }
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn html_shade(bin: Bin) -> Option<(&'static str, &'static str)> {
    match bin {
        Bin::None => None,
        Bin::Light => Some(("light", "#f8c9c4")),
        Bin::Medium => Some(("medium", "#ee8379")),
        Bin::Dark => Some(("dark", "#c62828;color:#fff")),
    }
}

fn render_html(doc: &HighlightDoc) -> String {
    let mut out = String::new();
    let title = doc.problem.as_deref().unwrap_or("questioned document");
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n</head>\n\
         <body style=\"font-family:sans-serif;max-width:60em;margin:2em auto;line-height:1.6\">\n",
        escape_html(title)
    );
    let _ = writeln!(out, "<h1>{}</h1>", escape_html(title));
    let _ = writeln!(out, "<p>Total score: {:.4}</p>", doc.total);

    let _ = writeln!(out, "<h2>Highest scoring sentences</h2>\n<ol>");
    for &i in doc.top(5) {
        let s = &doc.sentences[i];
        let _ = writeln!(
            out,
            "<li>sentence {} ({:.4}): {}</li>",
            i + 1,
            s.lambda,
            escape_html(&plain_sentence(s))
        );
    }
    let _ = writeln!(out, "</ol>\n<h2>Document</h2>");
    for s in &doc.sentences {
        out.push_str("<p>");
        for (k, t) in s.tokens.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let text = escape_html(display_token(&t.token));
            match html_shade(t.bin) {
                Some((class, style)) => {
                    let _ = write!(
                        out,
                        "<span class=\"{class}\" style=\"background:{style}\">{text}</span>"
                    );
                }
                None => out.push_str(&text),
            }
        }
        out.push_str("</p>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

fn plain_sentence(s: &HighlightSentence) -> String {
    s.tokens
        .iter()
        .map(|t| display_token(&t.token))
        .collect::<Vec<_>>()
        .join(" ")
}

fn render_ansi(doc: &HighlightDoc) -> String {
    let mut out = String::new();
    for s in &doc.sentences {
        let _ = write!(out, "[{:>8.3}] ", s.lambda);
        for (k, t) in s.tokens.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let text = display_token(&t.token);
            match t.bin {
                Bin::None => out.push_str(text),
                Bin::Light => {
                    let _ = write!(out, "\x1b[2;31m{text}\x1b[0m");
                }
                Bin::Medium => {
                    let _ = write!(out, "\x1b[31m{text}\x1b[0m");
                }
                Bin::Dark => {
                    let _ = write!(out, "\x1b[1;31m{text}\x1b[0m");
                }
            }
        }
        out.push('\n');
    }
    out
}
