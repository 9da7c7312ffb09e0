//! Swap reference populations between two corpora with disjoint alphabets.

use grammarlr::{crossgenre, split_by_author, synth_corpus_with, GenreCorpus, Harness, LambdaConfig, SynthOptions};

fn genre(name: &str, seed: u64, tag: &str) -> grammarlr::Result<GenreCorpus> {
    let opts = SynthOptions::new(seed, 12, 4, 0.5).with_alphabet_tag(tag);
    let (train, test) = split_by_author(&synth_corpus_with(&opts)?, 0.5)?;
    Ok(GenreCorpus { name: name.into(), train, test })
}

fn main() -> grammarlr::Result<()> {
    let corpora = [genre("letters", 21, "a:")?, genre("essays", 22, "b:")?];
    let harness = Harness::new(LambdaConfig { order: 5, refs: 20, seed: 3, ..LambdaConfig::default() });
    print!("{}", crossgenre(&corpora, &harness)?.to_csv());
    Ok(())
}
