//! Fit calibration on one set of authors and evaluate on another.

use grammarlr::{evaluate, split_by_author, synth_corpus, Harness, LambdaConfig};

fn main() -> grammarlr::Result<()> {
    let corpus = synth_corpus(1, 20, 5, 0.5)?;
    let (train, test) = split_by_author(&corpus, 0.5)?;
    let harness = Harness::new(LambdaConfig { order: 5, refs: 30, seed: 3, ..LambdaConfig::default() });
    let ev = evaluate(&train, &test, None, &harness)?;
    let c = &ev.calibration;
    println!("calibration: log LR = {:.3} + {:.3} * lambda", c.intercept, c.slope);
    println!("{}", ev.metrics_json());
    Ok(())
}
