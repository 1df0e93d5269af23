//! Keys between two groups from a shared CAT state, and trust groups
//! reduced to a graph of agents that can relay keys.

use std::collections::BTreeSet;

use entnet::keydist::{
    group_error_prob, reduce_security_hypergraph, two_group_round, SecurityHypergraph,
};
use entnet::netgraph::AgentId;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let group: BTreeSet<AgentId> = [0, 1].into_iter().map(AgentId).collect();
    let agree = (0..200)
        .map(|_| two_group_round(5, &group, &mut rng))
        .collect::<entnet::Result<Vec<_>>>()?
        .iter()
        .filter(|r| r.effective_bit_a == r.effective_bit_b)
        .count();
    println!("group bits agreed in {agree} of 200 rounds");
    for s in 1..=3 {
        println!("error with {s} noisy members at p=0.1: {:.4}", group_error_prob(s, 0.1)?);
    }

    let groups = vec![vec![0, 1, 2], vec![2, 3, 5, 6], vec![3, 4, 6, 7, 8, 9]];
    let reduced = reduce_security_hypergraph(&SecurityHypergraph::new(10, groups)?)?;
    println!("relays: {:?}", reduced.survivors.iter().map(|a| a.0).collect::<Vec<_>>());
    for e in reduced.graph.edges() {
        println!("  {e}");
    }
    Ok(())
}
