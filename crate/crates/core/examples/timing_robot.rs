//! Convert the synthetic 35-link timing robot and print the stage table.

use std::path::PathBuf;

use urdd_core::fixtures::write_timing_robot;
use urdd_core::pipeline::{convert_file, ConvertOptions};

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("urdd_timing"));
    let urdf = write_timing_robot(&dir.join("src")).expect("write fixture");
    let report = convert_file(&urdf, &dir.join("out"), &ConvertOptions::default()).expect("convert");
    print!("{}", report.timing_table());
}
