//! Writes a synthetic Gaussian-blob classification dataset as CSV.
//!
//! Usage: `cargo run -p ahsc-core --example generate_blobs -- OUT.csv`
//!
//! This is how the repository's bundled `data/blobs150.csv` was produced:
//! 50 samples per class, 3 classes, 4 features, center separation 4.0,
//! noise standard deviation 1.0, seed 42.

use ahsc_core::data::synthetic_blobs;

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "blobs150.csv".to_string());
    let data = synthetic_blobs(50, 3, 4, 4.0, 1.0, 42).expect("valid blob parameters");
    let names = ["alpha".to_string(), "beta".to_string(), "gamma".to_string()];
    std::fs::write(&out, data.to_csv_string(Some(&names))).expect("write CSV");
    println!(
        "wrote {} rows x {} features to {out}",
        data.len(),
        data.n_features()
    );
}
