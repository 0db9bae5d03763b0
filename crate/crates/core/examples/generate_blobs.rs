//! Sample a blob dataset, save it as CSV, read it back and split its
//! columns across three agents.
//!
//! cargo run --example generate_blobs -- /tmp/blobs.csv

use ascii_learn::data::{generate_blobs, load_csv, partition_vertical, write_csv, BlobSpec, CsvOptions, PartitionStrategy};
use ascii_learn::Result;

fn main() -> Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("blobs.csv").display().to_string());
    let spec = BlobSpec { n: 300, d_informative: 4, d_redundant: 2, num_classes: 3, cluster_std: 1.5, center_box: (-10.0, 10.0), seed: 9 };
    let ds = generate_blobs(&spec)?;
    write_csv(&ds, &out, ',')?;

    let back = load_csv(&out, &CsvOptions::new("label").id_column("id"))?;
    assert_eq!(back.sample_ids, ds.sample_ids);
    println!("wrote {} rows, {} features, {} classes to {out}", back.len(), back.num_features(), back.num_classes());

    for (m, slice) in partition_vertical(&back, &PartitionStrategy::Random { seed: 1 }, 3)?.iter().enumerate() {
        let names = slice.features.column_names().map(|c| c.join(", ")).unwrap_or_default();
        println!("agent {m} holds {names}");
    }
    Ok(())
}
