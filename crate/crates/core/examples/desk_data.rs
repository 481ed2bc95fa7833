//! Regenerates the shipped desk-scale data under `data/`:
//! `digits.csv`, `gaze.csv` and the seed corpus in `seeds/`.
//!
//! ```text
//! cargo run --example desk_data -- [output-dir]
//! ```

use std::path::PathBuf;

use metisforge::digit::{synth_digit_dataset, synth_seed_corpus, write_svg};
use metisforge::eye::{synth_gaze_dataset, EyeSchema, DEFAULT_SCHEMA};

const DIGIT_SEED: u64 = 20_240_501;
const CORPUS_SEED: u64 = 7;
const GAZE_SEED: u64 = 11;

fn main() -> metisforge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    let seeds_dir = out.join("seeds");
    std::fs::create_dir_all(&seeds_dir).map_err(|e| metisforge::Error::io(&seeds_dir, e))?;

    synth_digit_dataset(400, 100, DIGIT_SEED)?.save(&out.join("digits.csv"), 255.0)?;

    for rec in synth_seed_corpus(5, CORPUS_SEED)? {
        let path = seeds_dir.join(format!("{}.svg", rec.id));
        let text = write_svg(&rec.model, &[("id", rec.id.clone()), ("label", rec.label.to_string())]);
        std::fs::write(&path, text).map_err(|e| metisforge::Error::io(&path, e))?;
    }

    let schema = EyeSchema::parse(DEFAULT_SCHEMA)?;
    synth_gaze_dataset(&schema, 1000, 200, GAZE_SEED)?.save(&out.join("gaze.csv"), 1.0)?;
    println!("wrote desk data to {}", out.display());
    Ok(())
}
