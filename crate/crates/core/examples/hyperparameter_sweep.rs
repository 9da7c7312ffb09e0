//! Grid over n-gram order and number of reference models.

use grammarlr::experiment::sweep_csv;
use grammarlr::{split_by_author, sweep, synth_corpus, Harness, LambdaConfig};

fn main() -> grammarlr::Result<()> {
    let corpus = synth_corpus(2, 12, 4, 0.5)?;
    let (train, test) = split_by_author(&corpus, 0.5)?;
    let harness = Harness::new(LambdaConfig { seed: 4, ..LambdaConfig::default() });
    let cells = sweep(&train, &test, &[2, 4, 6], &[1, 10, 30], &harness)?;
    print!("{}", sweep_csv(&cells));
    Ok(())
}
