//! Export a dataset to the three-file CSV layout and read it back.
//!
//! Pass a directory to ingest your own `users.csv`, `usage.csv` and
//! `apps.csv` instead.

use appdemog::dataset::{ingest, IngestManifest};
use appdemog::synth::{generate, SynthConfig};

fn main() -> appdemog::Result<()> {
    let dir = match std::env::args().nth(1) {
        Some(d) => std::path::PathBuf::from(d),
        None => {
            let dir = std::env::temp_dir().join("appdemog-csv-example");
            let data = generate(&SynthConfig::preset("small")?, 1)?;
            data.dataset.export(&dir)?;
            println!("wrote {}", dir.display());
            dir
        }
    };
    let (ds, summary) = ingest(&IngestManifest::in_dir(&dir))?;
    println!("{summary:?}");
    println!("attributes present: {:?}", ds.schema.iter().map(|a| a.name()).collect::<Vec<_>>());
    Ok(())
}
