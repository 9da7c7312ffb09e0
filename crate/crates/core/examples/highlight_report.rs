//! Write an HTML highlight report and print the ANSI version.

use grammarlr::{render, synth_corpus, verify_problem, zscore_bins, Format, LambdaConfig, MaskingLexicon};

fn main() -> grammarlr::Result<()> {
    let corpus = synth_corpus(9, 3, 1, 0.5)?;
    let problem = &corpus.problems[0];
    let cfg = LambdaConfig { order: 4, refs: 20, seed: 1, ..LambdaConfig::default() };
    let trace = verify_problem(problem, &corpus.reference_docs, &cfg, &MaskingLexicon::builtin())?;
    let doc = zscore_bins(&trace);
    print!("{}", render(&doc, Format::Ansi));
    println!("most author-like sentences: {:?}", doc.top(3));

    let path = std::env::temp_dir().join("grammarlr_highlight.html");
    std::fs::write(&path, render(&doc, Format::Html)).map_err(|source| grammarlr::Error::Io { path: path.clone(), source })?;
    println!("wrote {}", path.display());
    Ok(())
}
