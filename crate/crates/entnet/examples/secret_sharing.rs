//! Compressed quantum secret sharing: as few quantum players as possible,
//! with the dealer keeping resident shares. Each plan is simulated over
//! every coalition.

use entnet::qss::{compress_plan, compress_threshold, min_q_players, AccessStructure};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (n, text) in [(5, "ABC, DE"), (6, "ABC, AD, AEF"), (7, "ABC, DE, AFG")] {
        let a = AccessStructure::parse(n, text)?;
        let (m, hit) = min_q_players(&a)?;
        println!("{a}: {m} quantum players {hit:?}");
    }

    let plan = compress_plan(&AccessStructure::parse(5, "ABC, DE")?)?;
    print!("{}", plan.diagram);
    let report = plan.simulate(&mut rng)?;
    println!("{} coalitions simulated, all checks hold: {}", report.coalitions.len(), report.holds());

    let plan = compress_threshold(2, 3)?;
    print!("{}", plan.diagram);
    println!("simulation holds: {}", plan.simulate(&mut rng)?.holds());
    Ok(())
}
