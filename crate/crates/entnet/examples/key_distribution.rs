//! One classical key round on a tree, what an eavesdropper learns from it,
//! and full pipeline runs with and without noise.

use entnet::keydist::{
    classical_nkd_round, eve_consistent_configs, nqkd_pipeline, random_efficiency, LinearCode,
    NqkdOutcome,
};
use entnet::netgraph::{AgentId, SpanningTree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let tree = SpanningTree::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)])?;

    let round = classical_nkd_round(&tree, &mut rng)?;
    let bits: Vec<u8> = (0..5)
        .map(|a| round.reconstruct(AgentId(a)))
        .collect::<entnet::Result<_>>()?;
    println!("shared bit {} reconstructed as {bits:?}", round.shared_bit);
    let eve = eve_consistent_configs(&tree, &round.public())?;
    println!(
        "eve keeps {} configurations, split {:?}",
        eve.configurations.len(),
        eve.shared_bit_counts
    );

    let code = LinearCode::hamming74();
    for p in [0.0, 0.02, 0.4] {
        match nqkd_pipeline(&tree, &code, p, &mut rng)?.outcome {
            NqkdOutcome::Key { keys, agreed } => println!("p={p}: key {:?}, agreed {agreed}", keys[0]),
            NqkdOutcome::Aborted { error_rate } => println!("p={p}: aborted at error rate {error_rate:.3}"),
        }
    }
    println!("efficiency for n=5, m=7, k=4: {}", random_efficiency(5, 7, 4)?);
    Ok(())
}
