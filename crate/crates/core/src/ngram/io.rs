//! Binary model container and a plain-text dump.
//!
//! Layout (little endian):
//!
//! ```text
//! "GLRM" | version u8 | order u32 | discount mode u8 | d1 d2 d3 f64
//!        | sentences u64 | vocab len u32 | (len u32, utf-8 bytes)*
//!        | per order n = 1..=N: entries u64 | (n × id u32, count u64)*
//!        | crc32 of everything before it
//! ```
//!
//! Only raw counts are stored; derived statistics are rebuilt on load.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::model::{DiscountSchedule, GrammarModel, MAX_ORDER};
use super::vocab::{TokenId, Vocabulary};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GLRM";
pub const FORMAT_VERSION: u8 = 1;

pub fn serialize_model(m: &GrammarModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(m.order() as u32).to_le_bytes());
    let (mode, d) = match m.discounts() {
        DiscountSchedule::Constant { d } => (0u8, [d, d, d]),
        DiscountSchedule::Modified { d1, d2, d3 } => (1u8, [d1, d2, d3]),
    };
    out.push(mode);
    for x in d {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&m.sentence_count().to_le_bytes());
    let items = m.vocab().items();
    out.extend_from_slice(&(items.len() as u32).to_le_bytes());
    for item in items {
        out.extend_from_slice(&(item.len() as u32).to_le_bytes());
        out.extend_from_slice(item.as_bytes());
    }
    for table in m.raw_tables() {
        out.extend_from_slice(&(table.len() as u64).to_le_bytes());
        for (ngram, count) in table {
            for t in ngram {
                out.extend_from_slice(&t.0.to_le_bytes());
            }
            out.extend_from_slice(&count.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::load("model", "unexpected end of data"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn deserialize_model(bytes: &[u8]) -> Result<GrammarModel> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(Error::load("model", "not a grammar model file (bad magic)"));
    }
    let version = *bytes.get(4).ok_or(Error::Checksum)?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    if bytes.len() < 9 {
        return Err(Error::Checksum);
    }
    let (body, crc) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().unwrap()) {
        return Err(Error::Checksum);
    }

    let mut r = Reader { buf: body, pos: 5 };
    let order = r.u32()? as usize;
    if order == 0 || order > MAX_ORDER {
        return Err(Error::load("model", format!("invalid order {order}")));
    }
    let mode = r.u8()?;
    let d = [r.f64()?, r.f64()?, r.f64()?];
    let discounts = match mode {
        0 => DiscountSchedule::Constant { d: d[0] },
        1 => DiscountSchedule::Modified {
            d1: d[0],
            d2: d[1],
            d3: d[2],
        },
        other => return Err(Error::load("model", format!("unknown discount mode {other}"))),
    };
    discounts.validate()?;
    let sentences = r.u64()?;
    let n_items = r.u32()? as usize;
    let mut items = Vec::with_capacity(n_items.min(1 << 20));
    for _ in 0..n_items {
        let len = r.u32()? as usize;
        let s = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::load("model", "vocabulary entry is not UTF-8"))?;
        items.push(s.to_string());
    }
    let vocab = Vocabulary::from_items(items)
        .ok_or_else(|| Error::load("model", "malformed vocabulary"))?;
    let mut raw = Vec::with_capacity(order);
    for n in 1..=order {
        let entries = r.u64()? as usize;
        let mut table = HashMap::with_capacity(entries.min(1 << 24));
        for _ in 0..entries {
            let mut key = Vec::with_capacity(n);
            for _ in 0..n {
                key.push(TokenId(r.u32()?));
            }
            table.insert(key.into_boxed_slice(), r.u64()?);
        }
        raw.push(table);
    }
    if r.pos != body.len() {
        return Err(Error::load("model", "trailing bytes after count tables"));
    }
    Ok(GrammarModel::from_raw_counts(
        order,
        Arc::new(vocab),
        discounts,
        sentences,
        raw,
    ))
}

pub fn save_model(m: &GrammarModel, path: &Path) -> Result<()> {
    fs::write(path, serialize_model(m)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<GrammarModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    deserialize_model(&bytes)
}

/// Human-readable listing: a header, then one `n-gram<TAB>c<TAB>c_KN` line
/// per stored n-gram, sorted within each order.
pub fn dump_model(m: &GrammarModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# order {}", m.order());
    let _ = writeln!(out, "# discounts {:?}", m.discounts());
    let _ = writeln!(out, "# sentences {}", m.sentence_count());
    let _ = writeln!(out, "# vocabulary {}", m.vocab().len());
    let vocab = m.vocab();
    for (k, table) in m.raw_tables().enumerate() {
        let _ = writeln!(out, "\n\\{}-grams: {}", k + 1, table.len());
        let mut lines: Vec<String> = table
            .iter()
            .map(|(ngram, count)| {
                let words: Vec<&str> = ngram.iter().map(|&t| vocab.surface(t)).collect();
                format!("{}\t{}\t{}", words.join(" "), count, m.kn_count(ngram))
            })
            .collect();
        lines.sort();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;
    use crate::ngram::DiscountSetting;
    use rand::{Rng, SeedableRng};

    fn sample_model(setting: DiscountSetting) -> GrammarModel {
        let sents: Vec<Sentence> = ["the N V of the N .", "N V the N", "of N , the N V ."]
            .iter()
            .map(|s| Sentence::from_words(s))
            .collect();
        let vocab = Arc::new(Vocabulary::from_sentences(&sents));
        GrammarModel::train(&sents, 3, setting, vocab).unwrap()
    }

    #[test]
    fn round_trip_preserves_probabilities() {
        for setting in [DiscountSetting::default(), DiscountSetting::EstimatedModified] {
            let m = sample_model(setting);
            let back = deserialize_model(&serialize_model(&m)).unwrap();
            assert_eq!(back.discounts(), m.discounts());
            assert_eq!(serialize_model(&back), serialize_model(&m));
            let v = m.vocab().len() as u32;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            for _ in 0..1000 {
                let pick = |rng: &mut rand_chacha::ChaCha8Rng| match rng.random_range(0..v + 1) {
                    x if x == v => TokenId::EOS,
                    x => TokenId(x),
                };
                let t = pick(&mut rng);
                let ctx: Vec<TokenId> = (0..rng.random_range(0..3))
                    .map(|_| {
                        if rng.random_bool(0.2) {
                            TokenId::BOS
                        } else {
                            TokenId(rng.random_range(0..v))
                        }
                    })
                    .collect();
                assert_eq!(m.prob_id(t, &ctx).unwrap(), back.prob_id(t, &ctx).unwrap());
            }
        }
    }

    #[test]
    fn truncated_file_fails_checksum() {
        let bytes = serialize_model(&sample_model(DiscountSetting::default()));
        for cut in [bytes.len() - 1, bytes.len() / 2, 9, 6] {
            assert!(matches!(deserialize_model(&bytes[..cut]), Err(Error::Checksum)), "cut {cut}");
        }
    }

    #[test]
    fn wrong_version_is_reported() {
        let mut bytes = serialize_model(&sample_model(DiscountSetting::default()));
        bytes[4] = 9;
        assert!(matches!(
            deserialize_model(&bytes),
            Err(Error::Version { found: 9, expected: 1 })
        ));
    }

    #[test]
    fn flipped_payload_byte_fails_checksum() {
        let mut bytes = serialize_model(&sample_model(DiscountSetting::default()));
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(matches!(deserialize_model(&bytes), Err(Error::Checksum)));
    }

    #[test]
    fn dump_lists_every_order() {
        let text = dump_model(&sample_model(DiscountSetting::default()));
        assert!(text.contains("\\1-grams:"));
        assert!(text.contains("\\3-grams:"));
        assert!(text.contains("<s> <s> the\t"));
    }
}
