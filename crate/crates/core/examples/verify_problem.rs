//! Score one synthetic verification problem and show its sentence scores.

use grammarlr::{synth_corpus, verify_problem, LambdaConfig, MaskingLexicon};

fn main() -> grammarlr::Result<()> {
    let corpus = synth_corpus(5, 4, 2, 0.5)?;
    let cfg = LambdaConfig { order: 5, refs: 30, seed: 11, ..LambdaConfig::default() };
    let lex = MaskingLexicon::builtin();
    for problem in corpus.problems.iter().take(4) {
        let trace = verify_problem(problem, &corpus.reference_docs, &cfg, &lex)?;
        let scores: Vec<String> = trace.sentence_scores.iter().map(|s| format!("{s:.1}")).collect();
        println!(
            "{} label {:?}: lambda {:.2} over sentences [{}]",
            problem.id,
            problem.label,
            trace.total,
            scores.join(", ")
        );
    }
    Ok(())
}
