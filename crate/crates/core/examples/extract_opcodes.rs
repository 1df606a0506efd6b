//! Assembles two small DEX files, extracts their opcode histograms and
//! writes the features CSV that the rest of the pipeline consumes.
//!
//!     cargo run --example extract_opcodes

use std::error::Error;
use std::fs;

use droidlens::dataset::{extract_corpus, read_features, write_features, ExtractOptions};
use droidlens::dex::{opcode, opcode_histogram, parse_dex, ClassBuilder, DexBuilder};

fn main() -> Result<(), Box<dyn Error>> {
    // const/4 v0, #0 ; const/4 v1, #1 ; add-int/2addr v0, v1 ; return v0
    let arithmetic = DexBuilder::new()
        .class(ClassBuilder::new().direct_method(vec![0x0012, 0x1112, 0x10b0, 0x000f]))
        .build();
    // fill-array-data v0, +4 ; return-void ; payload (2 x 4-byte elements)
    let with_payload = DexBuilder::new()
        .class(ClassBuilder::new().virtual_method(vec![
            0x0026, 0x0004, 0x0000, 0x000e, 0x0300, 0x0004, 0x0002, 0x0000, 1, 0, 2, 0,
        ]))
        .build();

    let parsed = parse_dex(&arithmetic)?;
    let hist = opcode_histogram(&parsed)?;
    println!(
        "dex version {:03}, {} class(es), {} instructions",
        parsed.version,
        parsed.class_defs.len(),
        hist.total()
    );
    for (op, n) in hist.top(4) {
        println!("  {:#04x} {:<18} {n}", op, opcode(op).name);
    }

    let corpus = tempfile::tempdir()?;
    fs::write(corpus.path().join("arithmetic.dex"), &arithmetic)?;
    // a directory is one multi-dex app; its files are summed
    fs::create_dir(corpus.path().join("multidex_app"))?;
    fs::write(corpus.path().join("multidex_app/classes.dex"), &arithmetic)?;
    fs::write(
        corpus.path().join("multidex_app/classes2.dex"),
        &with_payload,
    )?;

    let out = extract_corpus(corpus.path(), ExtractOptions::default())?;
    let csv = corpus.path().join("features.csv");
    write_features(&out.ids, &out.rows(), &csv)?;
    let (ids, rows) = read_features(&csv)?;
    for (id, row) in ids.iter().zip(&rows) {
        let nonzero: Vec<String> = row
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(op, v)| format!("op_{op:02x}={v}"))
            .collect();
        println!("{id}: {}", nonzero.join(" "));
    }
    Ok(())
}
