//! Load a scenario file and print its report.
//!
//! ```text
//! cargo run --example run_scenario -- fixtures/solitons.toml json
//! ```

use warpcert::scenario::{emit, load_scenario, run, Format, RunOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/gaussian_soliton.toml").into());
    let format: Format = args.next().as_deref().unwrap_or("text").parse().unwrap_or_else(|e| panic!("{e}"));

    let scenario = match load_scenario(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let report = run(&scenario, &RunOptions::default());
    print!("{}", emit(&report, format));
    std::process::exit(report.exit_code());
}
