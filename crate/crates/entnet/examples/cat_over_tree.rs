//! CAT states over every spanning tree of K_5, with the classical cost of each.

use std::collections::BTreeMap;

use entnet::netgraph::{enumerate_spanning_trees, EprGraph};
use entnet::protocols::protocol_two_ncat;
use entnet::statevec::Register;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let n = 5;
    let trees = enumerate_spanning_trees(&EprGraph::complete(n)?)?;
    let want = Register::cat(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // cbits -> number of trees
    let mut by_cost: BTreeMap<usize, usize> = BTreeMap::new();
    for t in &trees {
        let r = protocol_two_ncat(t, &mut rng)?;
        let got = r.final_state.register_by_agent(n)?;
        assert!(got.fidelity(&want) > 1.0 - 1e-9);
        *by_cost.entry(r.cbits_used).or_default() += 1;
    }
    println!("{} spanning trees on {n} agents", trees.len());
    for (cbits, count) in by_cost {
        println!("  {count:4} trees use {cbits} cbits");
    }
    Ok(())
}
