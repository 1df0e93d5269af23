//! Runs a copy plan: several copies of one EPR tree, with entanglement
//! swapping, yield another tree.

use entnet::locc::{copy_bounds, execute_copy_plan};
use entnet::netgraph::SpanningTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let source = SpanningTree::new(3, [(0, 1), (1, 2)])?;
    let target = SpanningTree::new(3, [(0, 2), (1, 2)])?;
    let bounds = copy_bounds(&source, &target)?;
    println!("bounds {}..={}", bounds.lower, bounds.upper);
    for s in &bounds.plan.swaps {
        println!("swap along {:?} for {}", s.path.iter().map(|a| a.0).collect::<Vec<_>>(), s.target_edge);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let run = execute_copy_plan(&bounds.plan, &mut rng)?;
    println!("copies used: {}", bounds.plan.copies());
    println!("target reproduced: {}", run.reproduces_target(1e-9)?);
    println!("cbits: {}", run.report.cbits_used);
    Ok(())
}
