//! Bicolored merging: certificates that one entanglement structure cannot
//! be turned into another by local operations.

use entnet::locc::{copy_bounds, find_witness, selective_teleportation_impossible, Verdict};
use entnet::netgraph::{EntangledHypergraph, SpanningTree};

fn show(label: &str, v: &Verdict) {
    match v {
        Verdict::ImpossibleWithWitness { witness } => {
            let c: String = witness.coloring.colors().iter().map(|c| format!("{c:?}")).collect();
            println!(
                "{label}: impossible, coloring {c} gives {} vs {} pairs",
                witness.count_source.0, witness.count_target.0
            );
        }
        Verdict::NoWitnessFound { colorings_checked } => {
            println!("{label}: no witness in {colorings_checked} colorings");
        }
    }
}

fn main() -> entnet::Result<()> {
    let w = selective_teleportation_impossible()?;
    println!("GHZ -> two EPR pairs refuted by {:?}", w.coloring.colors());

    let path = SpanningTree::path(4)?;
    let star = SpanningTree::star(4, 0)?;
    show("path -> star", &find_witness(&path, &star)?);
    show("star -> path", &find_witness(&star, &path)?);

    let h1 = EntangledHypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3, 4]], false)?;
    let h2 = EntangledHypergraph::new(5, vec![vec![0, 1, 3], vec![2, 3, 4]], false)?;
    show("hypertree h1 -> h2", &find_witness(&h1, &h2)?);

    let b = copy_bounds(&path, &star)?;
    println!(
        "copies of the path needed for the star: between {} and {} (quantum distance {})",
        b.lower, b.upper, b.quantum_distance
    );
    Ok(())
}
