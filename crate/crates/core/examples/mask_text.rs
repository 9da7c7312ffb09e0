//! Reduce a tagged text to its grammatical skeleton.

use grammarlr::{mask_document, parse_tagged_document, MaskingLexicon};

const TAGGED: &str = "\
The\tDET
old\tADJ
sailor\tNOUN
walked\tVERB
slowly\tADV
to\tADP
Lisbon\tPROPN
.\tPUNCT
";

fn main() -> grammarlr::Result<()> {
    let doc = parse_tagged_document(TAGGED, "sailor")?;
    let masked = mask_document(&doc, &MaskingLexicon::builtin())?;
    for s in &masked.sentences {
        println!("{}", s.tokens().join(" "));
    }
    Ok(())
}
