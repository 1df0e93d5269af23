//! Builds a GHZ state from two EPR pairs and prints every intermediate state.

use entnet::protocols::{protocol_one_ghz, protocol_one_setup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let report = protocol_one_ghz(protocol_one_setup()?, &mut rng)?;
    for s in &report.intermediate_states {
        println!("{}: {}", s.label, s.state);
    }
    println!("final: {}", report.final_state.register());
    println!("cbits: {}", report.cbits_used);
    Ok(())
}
