//! Spreadness of the named lattice and code-based parameter sets, and the
//! exact value for a toy scheme found by enumeration.

use fo_lab::cli::spread_row;
use fo_lab::config::scheme_preset;
use fo_lab::oracle::stream;
use fo_lab::pke::PkeScheme;
use fo_lab::toy::{gamma_exact_toy, preset, PRESET_NAMES};

fn main() -> fo_lab::Result<()> {
    println!("{:<11} {:>10} {:>8} {:>10}", "set", "gamma", "floor", "budget");
    for name in PRESET_NAMES {
        let row = spread_row(name, preset(name).unwrap())?;
        println!("{:<11} {:>10.2} {:>8} {:>10}", row.name, row.gamma, row.gamma_floor, row.budget);
    }
    for name in ["correct", "micro-lwe"] {
        let scheme = scheme_preset(name).unwrap();
        let keys = scheme.keygen(&mut stream(0, "example/spread"));
        let t = gamma_exact_toy(&scheme, &keys)?;
        println!(
            "{name}: gamma {:.3} (a ciphertext repeats {} of {} randomness values)",
            t.gamma, t.max_multiplicity, t.randomness_size
        );
    }
    Ok(())
}
