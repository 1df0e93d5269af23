//! Dilutes a qubit into a reservoir and counts the orderings that undo it.

use entnet::qss::{count_restoring_orderings, homogenize, unwound_system, DEFAULT_THETA};
use entnet::statevec::{c64, Register};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let secret = Register::new(vec![2], vec![c64(0.6, 0.0), c64(0.0, 0.8)])?;
    for n in 0..=5 {
        let h = homogenize(&secret, n, DEFAULT_THETA, &mut rng)?;
        let rho = unwound_system(&h.register, &h.ordering, DEFAULT_THETA)?;
        let (good, total) = count_restoring_orderings(&secret, n, DEFAULT_THETA, &h.ordering)?;
        println!(
            "N={n}: key {:?} restores p(1)={:.3}; {good} of {total} orderings work",
            h.ordering,
            rho[(1, 1)].re
        );
    }
    Ok(())
}
