//! Samples inputs on the sphere under the separation condition, saves the
//! dataset with its metadata sidecar and reloads it.
//!
//! `cargo run --release --example dataset_generation -- [out.csv]`

use std::path::PathBuf;

use reslab::data::{sample_sphere_dataset, AssumptionParams, Dataset, DEFAULT_MAX_RETRIES};
use reslab::Error;

fn main() -> reslab::Result<()> {
    let path = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("reslab_dataset.csv"), PathBuf::from);
    let (n, d, c0) = (3, 1024, 0.1);
    let p = AssumptionParams::new(c0, n, d, 64)?;
    println!("separation threshold for N={n}, c0={c0}: {:.4e}", p.separation_threshold());
    match sample_sphere_dataset(n, d, 11, &p, DEFAULT_MAX_RETRIES) {
        Ok(data) => {
            println!("accepted separation {:.4e}", data.separation);
            data.save(&path, Some(c0))?;
            let back = Dataset::load(&path)?;
            println!("wrote {} (round trip equal: {})", path.display(), back == data);
        }
        Err(Error::Infeasible { achieved, threshold, attempts }) => {
            println!("no draw met the threshold in {attempts} attempts: best {achieved:.4e} > {threshold:.4e}");
        }
        Err(e) => return Err(e),
    }
    Ok(())
}
