//! Acceptance criteria 1 to 11. Each prints one PASS or FAIL line with its
//! runtime; the test fails if any criterion does.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use entnet::keydist::{
    diagonal_parity_holds, eve_consistent_configs, group_error_prob, nkd_round_with,
    nqkd_pipeline, random_efficiency, two_group_round, EdgeKeyTable, LinearCode, NqkdOutcome,
};
use entnet::locc::{
    copy_bounds, execute_copy_plan, find_witness, verify_cat_copy_lower_bound,
    verify_pendant_theorem, verify_runiform_theorem, verify_tree_incomparability, Color, Verdict,
};
use entnet::netgraph::{
    enumerate_hypertrees, enumerate_spanning_trees, quantum_distance, AgentId,
    EntangledHypergraph, EprGraph, SpanningTree,
};
use entnet::protocols::{
    protocol_one_ghz, protocol_one_setup, protocol_three_hypergraph, protocol_two_ncat,
    protocol_two_on_graph,
};
use entnet::qss::{
    assisted_params, min_q_players, pauli_average, qts23_decode, qts23_encode, AccessStructure,
};
use entnet::statevec::{c64, ForcedOutcomes, Register, C64};
use entnet::Error;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Expected state from `(labels, amplitude)` terms over qubits.
fn ket(n: usize, terms: &[(&str, f64)]) -> Vec<C64> {
    let mut v = vec![c64(0.0, 0.0); 1 << n];
    for (label, a) in terms {
        v[usize::from_str_radix(label, 2).unwrap()] = c64(*a, 0.0);
    }
    v
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// The n-agent CAT state, built by hand.
fn cat_oracle(n: usize) -> Register {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = vec![c64(0.0, 0.0); 1 << n];
    v[0] = c64(h, 0.0);
    v[(1 << n) - 1] = c64(h, 0.0);
    Register::new(vec![2; n], v).unwrap()
}

fn leaves(t: &SpanningTree) -> usize {
    (0..t.n()).filter(|&v| t.graph().degree(AgentId(v)) == 1).count()
}

// Sites are (a1, b, a3, a2, c).
fn criterion_1() -> Outcome {
    let (h, q) = (0.5, std::f64::consts::FRAC_1_SQRT_2);
    for m2 in 0..2usize {
        for m1 in 0..2usize {
            let phi3: &[(&str, f64)] = if m2 == 0 {
                &[("00000", q), ("11101", q)]
            } else {
                &[("00011", q), ("11110", q)]
            };
            let phi4: &[(&str, f64)] = if m2 == 0 {
                &[("00000", h), ("00100", h), ("11001", h), ("11101", -h)]
            } else {
                &[("00011", h), ("00111", h), ("11010", h), ("11110", -h)]
            };
            let (phi5, phi6, phi7): (&[(&str, f64)], &[(&str, f64)], &[(&str, f64)]) = match (m2, m1) {
                (0, 0) => (
                    &[("00000", q), ("11001", q)],
                    &[("00000", q), ("11001", q)],
                    &[("00000", q), ("11001", q)],
                ),
                (0, _) => (
                    &[("00100", q), ("11101", -q)],
                    &[("00100", q), ("11101", -q)],
                    &[("00100", q), ("11101", q)],
                ),
                (_, 0) => (
                    &[("00011", q), ("11010", q)],
                    &[("11011", q), ("00010", q)],
                    &[("11011", q), ("00010", q)],
                ),
                _ => (
                    &[("00111", q), ("11110", -q)],
                    &[("11111", q), ("00110", -q)],
                    &[("11111", -q), ("00110", -q)],
                ),
            };
            let expected: Vec<Vec<C64>> = vec![
                ket(5, &[("00000", h), ("00011", h), ("11100", h), ("11111", h)]),
                ket(5, &[("00000", h), ("00011", h), ("11110", h), ("11101", h)]),
                ket(5, phi3),
                ket(5, phi4),
                ket(5, phi5),
                ket(5, phi6),
                ket(5, phi7),
            ];
            let mut forced = ForcedOutcomes::new([m2, m1]);
            let r = protocol_one_ghz(protocol_one_setup().map_err(err)?, &mut forced).map_err(err)?;
            ensure(r.cbits_used == 2, || format!("cbits {}", r.cbits_used))?;
            ensure(r.intermediate_states.len() == 7, || "expected seven states".into())?;
            for (i, (got, want)) in r.intermediate_states.iter().zip(&expected).enumerate() {
                let d = max_diff(got.state.amplitudes(), want);
                ensure(d < 1e-10, || {
                    format!("branch M2={m2} M1={m1}: phi{} off by {d:e}", i + 1)
                })?;
            }
        }
    }
    Ok("4 branches x 7 states amplitude-exact, 2 cbits".into())
}

fn criterion_2() -> Outcome {
    let mut runs = 0;
    for n in 3..=6 {
        let trees = enumerate_spanning_trees(&EprGraph::complete(n).map_err(err)?).map_err(err)?;
        let want = cat_oracle(n);
        for t in &trees {
            let expected_cbits = 2 * n + leaves(t) - 4;
            ensure(expected_cbits <= 3 * n - 5, || format!("bound fails for {t:?}"))?;
            for seed in 0..4 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let r = protocol_two_ncat(t, &mut rng).map_err(err)?;
                let got = r.final_state.register_by_agent(n).map_err(err)?;
                ensure(got.fidelity(&want) >= 1.0 - 1e-9, || format!("wrong state on {t:?}"))?;
                ensure(r.cbits_used == expected_cbits, || {
                    format!("{t:?}: {} cbits, expected {expected_cbits}", r.cbits_used)
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs over 1440 trees"))
}

fn connected(n: usize, groups: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for g in groups.iter().filter(|g| g.contains(&v)) {
            for &u in g {
                if !std::mem::replace(&mut seen[u], true) {
                    queue.push_back(u);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut yes, mut no) = (0, 0);
    for i in 0..200 {
        let n = rng.gen_range(2..=7);
        let groups: Vec<Vec<usize>> = if i % 2 == 0 {
            let p = rng.gen_range(0.15..0.6);
            (0..n)
                .flat_map(|a| ((a + 1)..n).map(move |b| vec![a, b]))
                .filter(|_| rng.gen_bool(p))
                .collect()
        } else {
            let mut set = BTreeSet::new();
            for _ in 0..rng.gen_range(1..=4) {
                let size = rng.gen_range(2..=n.min(4));
                let mut e: Vec<usize> = rand::seq::index::sample(&mut rng, n, size).into_vec();
                e.sort_unstable();
                set.insert(e);
            }
            set.into_iter().collect()
        };
        let expect = connected(n, &groups);
        let result = if i % 2 == 0 {
            let g = EprGraph::new(n, groups.iter().map(|e| (e[0], e[1]))).map_err(err)?;
            protocol_two_on_graph(&g, &mut rng)
        } else {
            let h = EntangledHypergraph::new(n, groups.clone(), false).map_err(err)?;
            protocol_three_hypergraph(&h, &mut rng)
        };
        match (expect, result) {
            (true, Ok(r)) => {
                let got = r.final_state.register_by_agent(n).map_err(err)?;
                ensure(got.fidelity(&cat_oracle(n)) >= 1.0 - 1e-9, || format!("bad CAT on {groups:?}"))?;
                yes += 1;
            }
            (false, Err(Error::NoProtocol(_))) => no += 1,
            (e, r) => return Err(format!("{groups:?} on {n}: connected={e}, got {:?}", r.map(|_| ()))),
        }
    }
    Ok(format!("{yes} connected built, {no} disconnected rejected"))
}

fn criterion_4() -> Outcome {
    for n in 3..=6usize {
        let count = enumerate_spanning_trees(&EprGraph::complete(n).map_err(err)?).map_err(err)?.len();
        ensure(count == n.pow(n as u32 - 2), || format!("K_{n}: {count} trees"))?;
    }
    Ok("3, 16, 125, 1296".into())
}

/// Merged pairs counted directly: hyperedges with agents of both colors.
fn merged_pairs(edges: &[Vec<AgentId>], coloring: &[Color]) -> usize {
    edges
        .iter()
        .filter(|e| {
            let colors: BTreeSet<Color> = e.iter().map(|v| coloring[v.0]).collect();
            colors.len() == 2
        })
        .count()
}

fn checked_witness(v: &Verdict, src: &[Vec<AgentId>], dst: &[Vec<AgentId>]) -> Result<(usize, usize), String> {
    let Verdict::ImpossibleWithWitness { witness } = v else {
        return Err("no witness".into());
    };
    let c = witness.coloring.colors();
    let (s, t) = (merged_pairs(src, c), merged_pairs(dst, c));
    ensure(s == witness.count_source.0 && t == witness.count_target.0 && s < t, || {
        format!("witness counts {}/{} but recount {s}/{t}", witness.count_source.0, witness.count_target.0)
    })?;
    Ok((s, t))
}

fn graph_edges(g: &EprGraph) -> Vec<Vec<AgentId>> {
    g.edges().iter().map(|e| vec![e.lo(), e.hi()]).collect()
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for n in 3..=5 {
        let r = verify_tree_incomparability(n).map_err(err)?;
        ensure(r.holds(), || format!("trees n={n}: {:?}", r.failures))?;
        notes.push(format!("trees n={n}: {}", r.cases));
    }
    let ghz = EntangledHypergraph::new(3, vec![vec![0, 1, 2]], false).map_err(err)?;
    for pairs in [[(0, 1), (0, 2)], [(0, 1), (1, 2)], [(0, 2), (1, 2)]] {
        let g = EprGraph::new(3, pairs).map_err(err)?;
        let counts = checked_witness(&find_witness(&ghz, &g).map_err(err)?, ghz.hyperedges(), &graph_edges(&g))?;
        ensure(counts == (1, 2), || format!("GHZ -> {pairs:?}: {counts:?}"))?;
    }
    for n in 3..=6 {
        let r = verify_cat_copy_lower_bound(n).map_err(err)?;
        ensure(r.holds(), || format!("CAT copies n={n}: {:?}", r.failures))?;
    }
    let mut pendant = 0;
    for n in 3..=6 {
        let trees = enumerate_hypertrees(n).map_err(err)?;
        for a in &trees {
            for b in &trees {
                if a == b {
                    continue;
                }
                match verify_pendant_theorem(a, b) {
                    Ok((fwd, back)) => {
                        checked_witness(&fwd, a.hyperedges(), b.hyperedges())
                            .map_err(|e| format!("{:?} -> {:?}: {e}", a.hyperedges(), b.hyperedges()))?;
                        checked_witness(&back, b.hyperedges(), a.hyperedges())
                            .map_err(|e| format!("{:?} -> {:?}: {e}", b.hyperedges(), a.hyperedges()))?;
                        pendant += 1;
                    }
                    Err(Error::Precondition(_)) => {}
                    Err(e) => return Err(err(e)),
                }
            }
        }
    }
    ensure(pendant > 0, || "no pendant pairs generated".into())?;
    notes.push(format!("pendant pairs: {pendant}"));
    for n in [5, 7] {
        let r = verify_runiform_theorem(3, n).map_err(err)?;
        ensure(r.holds(), || format!("3-uniform n={n}: {:?}", r.failures))?;
        notes.push(format!("3-uniform n={n}: {}", r.cases));
    }
    Ok(notes.join(", "))
}

fn criterion_6() -> Outcome {
    let trees = enumerate_spanning_trees(&EprGraph::complete(4).map_err(err)?).map_err(err)?;
    ensure(trees.len() == 16, || "K_4 tree count".into())?;
    let qd = |a: &SpanningTree, b: &SpanningTree| quantum_distance(a, b).map_err(err);
    for a in &trees {
        for b in &trees {
            let d = qd(a, b)?;
            ensure((d == 0) == (a == b), || "identity of indiscernibles".into())?;
            ensure(d == qd(b, a)?, || "symmetry".into())?;
            for c in &trees {
                ensure(qd(a, c)? <= d + qd(b, c)?, || "triangle inequality".into())?;
            }
            if a != b {
                let cb = copy_bounds(a, b).map_err(err)?;
                ensure((cb.lower, cb.upper) == (2, d + 1), || format!("bounds {:?}", (cb.lower, cb.upper)))?;
            }
        }
    }
    let (a, b) = trees
        .iter()
        .flat_map(|a| trees.iter().map(move |b| (a, b)))
        .find(|(a, b)| quantum_distance(a, b).unwrap() == 1)
        .ok_or("no pair at distance 1")?;
    let cb = copy_bounds(a, b).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let run = execute_copy_plan(&cb.plan, &mut rng).map_err(err)?;
    ensure(cb.plan.copies() == 2 && cb.lower == 2 && cb.upper == 2, || "bounds not saturated".into())?;
    ensure(run.reproduces_target(1e-9).map_err(err)?, || "target not reproduced".into())?;
    Ok("metric on 16 trees; 2 copies reproduce a distance-1 target".into())
}

fn criterion_7() -> Outcome {
    let mut cases = 0usize;
    for n in 2..=5 {
        for t in enumerate_spanning_trees(&EprGraph::complete(n).map_err(err)?).map_err(err)? {
            let edges: Vec<_> = t.edges().iter().copied().collect();
            let interior: Vec<AgentId> = (0..n).map(AgentId).filter(|&v| t.graph().degree(v) > 1).collect();
            let terminals: Vec<AgentId> = (0..n).map(AgentId).filter(|&v| t.graph().degree(v) == 1).collect();
            for mask in 0..1u64 << edges.len() {
                let table = EdgeKeyTable::from_mask(&t, mask);
                for fmask in 0..1u64 << interior.len() {
                    let flips: BTreeMap<AgentId, u8> = interior
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| (v, (fmask >> i & 1) as u8))
                        .collect();
                    for &term in &terminals {
                        let r = nkd_round_with(&t, table.clone(), flips.clone(), term).map_err(err)?;
                        let edge = edges.iter().find(|e| e.contains(term)).unwrap();
                        let bit = table.bit(edge).unwrap();
                        for a in 0..n {
                            let got = r.reconstruct(AgentId(a)).map_err(err)?;
                            ensure(got == bit, || format!("agent {a} got {got}, shared {bit}"))?;
                        }
                        let eve = eve_consistent_configs(&t, &r.public()).map_err(err)?;
                        ensure(eve.is_balanced_pair() && eve.configurations.contains(&table), || {
                            format!("eve sees {} configurations", eve.configurations.len())
                        })?;
                        // Each configuration explains every record with a single flip.
                        for cfg in &eve.configurations {
                            for rec in &r.announcements {
                                let flips: BTreeSet<u8> =
                                    rec.entries.iter().map(|(e, b)| cfg.bit(e).unwrap() ^ b).collect();
                                ensure(flips.len() == 1, || "inconsistent configuration".into())?;
                            }
                        }
                        cases += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{cases} rounds unanimous with two balanced configurations"))
}

fn criterion_8() -> Outcome {
    let code = LinearCode::hamming74();
    let mut runs = 0;
    for n in 2..=5 {
        for (i, t) in enumerate_spanning_trees(&EprGraph::complete(n).map_err(err)?)
            .map_err(err)?
            .iter()
            .enumerate()
        {
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            match nqkd_pipeline(t, &code, 0.0, &mut rng).map_err(err)?.outcome {
                NqkdOutcome::Key { keys, agreed } => {
                    ensure(agreed && keys.iter().all(|k| k == &keys[0]), || "keys differ".into())?;
                }
                NqkdOutcome::Aborted { .. } => return Err(format!("noiseless run aborted on {t:?}")),
            }
            runs += 1;
        }
    }
    for w in 0..16u8 {
        let msg: Vec<u8> = (0..4).map(|i| w >> (3 - i) & 1).collect();
        let word = code.encode(&msg);
        for pos in 0..7 {
            let mut bad = word.clone();
            bad[pos] ^= 1;
            let (got, fixed) = code.decode(&bad).map_err(err)?;
            ensure(got == msg && fixed == word, || format!("{msg:?} error at {pos}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let (n, m) = (rng.gen_range(2..=12u64), rng.gen_range(2..=40u64));
        let k = rng.gen_range(1..=m);
        let eta = random_efficiency(n, m, k).map_err(err)?;
        ensure(eta == Ratio::new(k * n, 2 * m * (n - 1)), || format!("eta({n},{m},{k}) = {eta}"))?;
    }
    Ok(format!("{runs} noiseless runs agree; 112 single errors corrected; 20 efficiencies"))
}

/// Diagonal-basis outcome amplitudes of the CAT state, by a hand-rolled
/// Walsh-Hadamard transform.
fn diagonal_outcomes(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; 1 << n];
    v[0] = std::f64::consts::FRAC_1_SQRT_2;
    v[(1 << n) - 1] = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = (x + y) * std::f64::consts::FRAC_1_SQRT_2;
                v[j + h] = (x - y) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        h *= 2;
    }
    v
}

fn criterion_9() -> Outcome {
    for n in 2..=6usize {
        let amps = diagonal_outcomes(n);
        let cat = cat_oracle(n);
        for gmask in 1..(1u64 << n) - 1 {
            // Agent a is bit n-1-a of an outcome index.
            let in_a = |a: usize| gmask >> a & 1 == 1;
            for (idx, amp) in amps.iter().enumerate() {
                if amp.abs() < 1e-12 {
                    continue;
                }
                let parity = |inside: bool| {
                    (0..n).filter(|&a| in_a(a) == inside).map(|a| idx >> (n - 1 - a) & 1).sum::<usize>() % 2
                };
                ensure(parity(true) == parity(false), || format!("n={n} outcome {idx:b}"))?;
            }
            let group: BTreeSet<AgentId> = (0..n).filter(|&a| in_a(a)).map(AgentId).collect();
            ensure(diagonal_parity_holds(&cat, &group).map_err(err)?, || format!("library parity n={n}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1000 {
        let n = 2 + i % 5;
        let k = 1 + i % (n - 1);
        let group: BTreeSet<AgentId> = (0..k).map(AgentId).collect();
        let r = two_group_round(n, &group, &mut rng).map_err(err)?;
        ensure(r.effective_bit_a == r.effective_bit_b, || format!("round {i} disagreed"))?;
    }
    for p in [0.0, 0.05, 0.1, 0.3, 0.5] {
        ensure(group_error_prob(1, p).map_err(err)? == p, || format!("g(1,{p})"))?;
    }
    let g2 = group_error_prob(2, 0.1).map_err(err)?;
    ensure((g2 - 0.18).abs() <= 1e-15, || format!("g(2,0.1) = {g2}"))?;
    Ok("exact parity n<=6 for every split, 1000 sampled rounds, g(2,0.1)=0.18".into())
}

fn random_qutrit(rng: &mut ChaCha8Rng) -> Register {
    let v: Vec<C64> = (0..3).map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    Register::normalized(vec![3], v).unwrap()
}

fn brute_hitting(n: usize, sets: &[BTreeSet<usize>]) -> usize {
    let masks: Vec<u64> = sets.iter().map(|s| s.iter().fold(0, |m, &p| m | 1 << p)).collect();
    (0..1u64 << n)
        .filter(|h| masks.iter().all(|m| m & h != 0))
        .map(|h| h.count_ones() as usize)
        .min()
        .unwrap()
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let s = random_qutrit(&mut rng);
        let enc = qts23_encode(&s).map_err(err)?;
        for a in 0..3 {
            for b in 0..3 {
                if a == b {
                    continue;
                }
                let rest = 3 - a - b;
                // Drop the third share so only two are in hand.
                let two = enc.permute_sites(&[a, b, rest]).map_err(err)?;
                let dec = qts23_decode(&two, [0, 1], [a, b]).map_err(err)?;
                ensure(dec.fidelity(&s) > 1.0 - 1e-10, || format!("decode from ({a},{b})"))?;
            }
            let rho = enc.reduced_density_matrix(&[a]).map_err(err)?;
            let dev = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| (rho[(i, j)] - c64(if i == j { 1.0 / 3.0 } else { 0.0 }, 0.0)).norm())
                .fold(0.0, f64::max);
            ensure(dev < 1e-10, || format!("single share deviates by {dev:e}"))?;
        }
    }
    for (input, output) in [(0, 0), (1, 2), (2, 1)] {
        let enc = qts23_encode(&Register::basis_state(&[3], &[input]).unwrap()).map_err(err)?;
        let swapped = enc.permute_sites(&[1, 0, 2]).map_err(err)?;
        let dec = qts23_decode(&swapped, [0, 1], [0, 1]).map_err(err)?;
        let want = Register::basis_state(&[3], &[output]).unwrap();
        ensure(dec.fidelity(&want) > 1.0 - 1e-10, || format!("swap maps |{input}> wrongly"))?;
    }
    let gamma = assisted_params(2, 10).map_err(err)?;
    ensure(gamma == 7 && (2 + gamma, 10 + gamma) == (9, 17), || format!("gamma = {gamma}"))?;
    let abcde = AccessStructure::parse(5, "ABC, DE").map_err(err)?;
    ensure(min_q_players(&abcde).map_err(err)?.0 == 2, || "{ABC, DE} needs 2".into())?;
    for _ in 0..200 {
        let n = rng.gen_range(2..=12);
        let mut sets: Vec<BTreeSet<usize>> = (0..rng.gen_range(1..=6))
            .map(|_| {
                let size = rng.gen_range(1..=n.min(5));
                rand::seq::index::sample(&mut rng, n, size).into_iter().collect()
            })
            .collect();
        let all = sets.clone();
        sets.retain(|s| !all.iter().any(|t| t != s && t.is_subset(s)));
        sets.sort();
        sets.dedup();
        let a = AccessStructure::new(n, sets.clone()).map_err(err)?;
        let (m, hit) = min_q_players(&a).map_err(err)?;
        ensure(m == hit.len() && m == brute_hitting(n, &sets), || format!("hitting set of {a}"))?;
    }
    for s in 1..=2 {
        let v: Vec<C64> = (0..1 << s).map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let reg = Register::normalized(vec![2; s], v).unwrap();
        let avg = pauli_average(&reg).map_err(err)?;
        let d = 1 << s;
        let dev = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| (avg[(i, j)] - c64(if i == j { 1.0 / d as f64 } else { 0.0 }, 0.0)).norm())
            .fold(0.0, f64::max);
        ensure(dev < 1e-12, || format!("Pauli average deviates by {dev:e}"))?;
    }
    Ok("qts23 exact, swap symmetry, ((9,17)), 200 hitting sets, Pauli averages".into())
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("entnet-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn criterion_11() -> Outcome {
    let dir = workdir();
    let files = [
        ("star5.json", r#"{"n":5,"edges":[[0,1],[0,2],[0,3],[0,4]]}"#),
        ("hyper.json", r#"{"n":6,"hyperedges":[[0,1,2],[2,3,4],[4,5]]}"#),
        ("h1.json", r#"{"n":5,"hyperedges":[[0,1,2],[2,3,4]]}"#),
        ("h2.json", r#"{"n":5,"hyperedges":[[0,1,3],[2,3,4]]}"#),
        ("tree.json", r#"{"n":5,"edges":[[0,1],[1,2],[1,3],[3,4]]}"#),
        ("groups.json", r#"{"n":10,"hyperedges":[[0,1,2],[2,3,5,6],[3,4,6,7,8,9]]}"#),
        ("abcde.json", r#"{"minimal_sets":["ABC","DE"]}"#),
        ("twin.json", r#"{"k_c":2,"k_q":2,"n":5,"q":3,"variant":{"scheme":"scheme1"}}"#),
    ];
    for (name, body) in files {
        std::fs::write(dir.join(name), body).map_err(|e| e.to_string())?;
    }
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let commands: Vec<Vec<String>> = [
        vec!["protocol", "one"],
        vec!["protocol", "two", "--input", &p("star5.json")],
        vec!["protocol", "three", "--input", &p("hyper.json")],
        vec!["locc", "--input", &p("h1.json"), "--target", &p("h2.json")],
        vec!["qkd", "classical", "--input", &p("tree.json")],
        vec!["qkd", "pipeline", "--input", &p("tree.json"), "--noise", "0.02"],
        vec!["qkd", "two-group", "--agents", "5", "--rounds", "8"],
        vec!["qkd", "hypergraph", "--input", &p("groups.json")],
        vec!["qss", "plan", "--input", &p("twin.json")],
        vec!["qss", "compress", "--input", &p("abcde.json")],
        vec!["qss", "inflate", "--k", "2", "--n", "10"],
        vec!["qss", "simulate", "--input", &p("abcde.json")],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    for cmd in &commands {
        let mut outputs = Vec::new();
        for _ in 0..3 {
            let out = Command::new(env!("CARGO_BIN_EXE_entnet"))
                .args(cmd)
                .args(["--seed", "42"])
                .env_remove("ENTNET_SEED")
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || {
                format!("{cmd:?} failed: {}", String::from_utf8_lossy(&out.stderr))
            })?;
            outputs.push(out.stdout);
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{cmd:?} is not deterministic"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical over 3 runs", commands.len()))
}

/// Writes past the test harness's output capture so the lines always show.
fn report(line: std::fmt::Arguments) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
}

#[test]
fn acceptance_criteria() {
    type Criterion = (u32, &'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 11] = [
        (1, "protocol I golden table", criterion_1, Some(Duration::from_secs(1))),
        (2, "protocol II over all trees n=3..6", criterion_2, Some(Duration::from_secs(120))),
        (3, "connectivity iff buildable", criterion_3, None),
        (4, "Cayley tree counts", criterion_4, None),
        (5, "bicolored merging theorems", criterion_5, Some(Duration::from_secs(300))),
        (6, "quantum distance and copy bounds", criterion_6, None),
        (7, "classical key rounds and eavesdropper view", criterion_7, None),
        (8, "key pipeline, Hamming code, efficiency", criterion_8, None),
        (9, "two-group parity", criterion_9, None),
        (10, "secret sharing primitives", criterion_10, None),
        (11, "CLI determinism", criterion_11, None),
    ];
    let mut failed = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let mut result = run();
        let took = start.elapsed();
        if let (Ok(_), Some(limit)) = (&result, limit) {
            if took > limit {
                result = Err(format!("took {took:.2?}, limit {limit:?}"));
            }
        }
        match &result {
            Ok(detail) => report(format_args!("PASS {id:2} {name} ({took:.2?}): {detail}")),
            Err(why) => {
                report(format_args!("FAIL {id:2} {name} ({took:.2?}): {why}"));
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
