//! Merges the GHZ states of a hypergraph into one CAT state, and shows that
//! a disconnected hypergraph is refused.

use entnet::netgraph::EntangledHypergraph;
use entnet::protocols::protocol_three_hypergraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = EntangledHypergraph::new(6, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5]], false)?;
    let r = protocol_three_hypergraph(&h, &mut rng)?;
    println!("state: {}", r.final_state.register_by_agent(6)?);
    println!("cbits: {}", r.cbits_used);

    let split = EntangledHypergraph::new(4, vec![vec![0, 1], vec![2, 3]], false)?;
    match protocol_three_hypergraph(&split, &mut rng) {
        Err(e) => println!("disconnected: {e}"),
        Ok(_) => unreachable!("a disconnected hypergraph cannot yield a CAT state"),
    }
    Ok(())
}
