//! Train a Kneser-Ney model, query it and round-trip it through bytes.

use std::sync::Arc;

use grammarlr::ngram::{deserialize_model, serialize_model};
use grammarlr::{DiscountSetting, GrammarModel, Sentence, Vocabulary};

fn main() -> grammarlr::Result<()> {
    let sentences: Vec<Sentence> = ["the N V the N .", "the N V .", "a N V of the N ."]
        .iter()
        .map(|t| Sentence::from_words(t))
        .collect();
    let vocab = Arc::new(Vocabulary::from_sentences(&sentences));
    let model = GrammarModel::train(&sentences, 3, DiscountSetting::default(), vocab)?;

    println!("p(V | the N)  = {:.4}", model.kn_prob("V", &["the", "N"])?);
    println!("p(of | the N) = {:.4}", model.kn_prob("of", &["the", "N"])?);
    let probe = Sentence::from_words("the N V of the N .");
    println!("log p({}) = {:.4}", probe.tokens().join(" "), model.sentence_logprob(&probe));

    let restored = deserialize_model(&serialize_model(&model))?;
    assert_eq!(restored.sentence_logprob(&probe), model.sentence_logprob(&probe));
    println!("{} n-grams survive serialisation", restored.ngram_total());
    Ok(())
}
