//! Twin-threshold sharing: separate thresholds for quantum and classical
//! players, optionally with players who must always take part.

use std::collections::BTreeSet;

use entnet::qss::{plan_twin_threshold, TwinThresholdSpec, TwinVariant, DEFAULT_THETA};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> entnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cases = [
        (
            TwinThresholdSpec { k_c: 2, k_q: 2, n: 5, q: 3, common_set: BTreeSet::new() },
            TwinVariant::Scheme1,
        ),
        (
            TwinThresholdSpec { k_c: 1, k_q: 3, n: 5, q: 4, common_set: BTreeSet::from([0]) },
            TwinVariant::Scheme2 { k1_over_common_c_only: false },
        ),
        (
            TwinThresholdSpec { k_c: 1, k_q: 2, n: 4, q: 2, common_set: BTreeSet::from([0, 1]) },
            TwinVariant::Scheme3 { reservoir: 3, theta: DEFAULT_THETA },
        ),
    ];
    for (spec, variant) in cases {
        let plan = plan_twin_threshold(&spec, variant)?;
        println!("{} for {}", plan.name, plan.access);
        print!("{}", plan.diagram);
        let report = plan.simulate(&mut rng)?;
        let worst = report.coalitions.iter().filter_map(|c| c.leak).fold(0.0, f64::max);
        println!("holds: {}, largest leak {worst:.3e}\n", report.holds());
    }
    Ok(())
}
