//! Command-line front end. [`run`] parses arguments, dispatches and maps
//! errors to exit codes: 0 on success, 2 when a structure is rejected as
//! impossible, 1 for usage and IO errors.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::keydist::{
    classical_nkd_round, eve_consistent_configs, nqkd_pipeline, reduce_security_hypergraph,
    two_group_round, EveView, KeyRound, LinearCode, SecurityHypergraph, TwoGroupRound,
};
use crate::locc::{find_witness, find_witness_sequential, EntanglementStructure, Verdict};
use crate::netgraph::{AgentId, EntangledHypergraph, EprGraph, SpanningTree};
use crate::protocols::{
    protocol_one_ghz, protocol_one_setup, protocol_three_hypergraph, protocol_two_on_graph,
    ProtocolReport,
};
use crate::qss::{
    assisted_params, compress_plan, compress_threshold, inflate, plan_twin_threshold, AccessStructure, Inflation,
    SchemePlan, SimulationReport, TwinThresholdSpec, TwinVariant,
};

#[derive(Debug, Parser)]
#[command(name = "entnet", version, about = "Distributed entanglement workflows")]
pub struct Cli {
    /// Seed for every random choice. Falls back to ENTNET_SEED, then 0.
    #[arg(long, global = true, env = "ENTNET_SEED")]
    seed: Option<u64>,
    /// Input structure as JSON.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for witness search; 1 searches sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a GHZ or CAT state over an entanglement network.
    Protocol {
        #[arg(value_enum)]
        kind: ProtocolKind,
    },
    /// Search for a bicoloring that rules out converting --input into --target.
    Locc {
        #[arg(long)]
        target: PathBuf,
    },
    /// Multiparty key distribution.
    Qkd(QkdArgs),
    /// Quantum secret sharing plans.
    Qss(QssArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProtocolKind {
    /// GHZ from two EPR pairs sharing an agent.
    One,
    /// CAT state over a connected EPR graph.
    Two,
    /// CAT state over a connected entangled hypergraph.
    Three,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QkdMode {
    Classical,
    Pipeline,
    TwoGroup,
    Hypergraph,
}

#[derive(Debug, Args)]
struct QkdArgs {
    #[arg(value_enum)]
    mode: QkdMode,
    /// Agents on a path, used when no --input tree is given.
    #[arg(long, default_value_t = 4)]
    agents: usize,
    /// Bit-flip probability on each raw key bit.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Comma-separated agents of the first group.
    #[arg(long, value_delimiter = ',')]
    group: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QssAction {
    /// Twin-threshold plan from a JSON spec.
    Plan,
    /// Fewest quantum players for an access structure or threshold.
    Compress,
    /// Enlarge a threshold scheme with classical players. Without
    /// --new-k/--new-n, report the dealer-assisted scheme instead.
    Inflate,
    /// Build a plan and simulate every coalition.
    Simulate,
}

#[derive(Debug, Args)]
struct QssArgs {
    #[arg(value_enum)]
    action: QssAction,
    /// Threshold `k` when no --input is given.
    #[arg(long)]
    k: Option<usize>,
    /// Player count `n` when no --input is given.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    new_k: Option<usize>,
    #[arg(long)]
    new_n: Option<usize>,
}

/// Twin-threshold parameters together with the construction to use.
#[derive(Debug, Deserialize)]
struct TwinRequest {
    #[serde(flatten)]
    spec: TwinThresholdSpec,
    variant: TwinVariant,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_domain_rejection() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let out = match cli.jobs {
        Some(0) => return Err(Error::invalid("--jobs must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(|| dispatch(cli))?,
        None => dispatch(cli)?,
    };
    match &cli.output {
        Some(path) => std::fs::write(path, out)?,
        None => std::io::stdout().write_all(out.as_bytes())?,
    }
    Ok(())
}

fn rng(cli: &Cli) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0))
}

fn read_json(path: Option<&PathBuf>, what: &str) -> Result<Value> {
    let path = path.ok_or_else(|| Error::invalid(format!("{what} needs --input")))?;
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn render<T: Serialize>(cli: &Cli, value: &T, text: impl FnOnce() -> String) -> Result<String> {
    Ok(match cli.format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Text => text(),
    })
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Protocol { kind } => cmd_protocol(cli, *kind),
        Command::Locc { target } => cmd_locc(cli, target),
        Command::Qkd(args) => cmd_qkd(cli, args),
        Command::Qss(args) => cmd_qss(cli, args),
    }
}

fn protocol_text(r: &ProtocolReport) -> String {
    let mut s = format!("cbits used: {}\n", r.cbits_used);
    for l in &r.intermediate_states {
        let _ = writeln!(s, "{}: {}", l.label, l.state);
    }
    let _ = writeln!(s, "final: {}", r.final_state.register());
    s
}

fn cmd_protocol(cli: &Cli, kind: ProtocolKind) -> Result<String> {
    let mut rng = rng(cli);
    let report = match kind {
        ProtocolKind::One => protocol_one_ghz(protocol_one_setup()?, &mut rng)?,
        ProtocolKind::Two => {
            let g: EprGraph = serde_json::from_value(read_json(cli.input.as_ref(), "protocol two")?)?;
            protocol_two_on_graph(&g, &mut rng)?
        }
        ProtocolKind::Three => {
            let h: EntangledHypergraph =
                serde_json::from_value(read_json(cli.input.as_ref(), "protocol three")?)?;
            protocol_three_hypergraph(&h, &mut rng)?
        }
    };
    render(cli, &report, || protocol_text(&report))
}

/// A graph or hypergraph read from JSON; hypergraphs have a `hyperedges` key.
enum Structure {
    Graph(EprGraph),
    Hyper(EntangledHypergraph),
}

impl Structure {
    fn load(path: &PathBuf) -> Result<Self> {
        let v = read_json(Some(path), "locc")?;
        Ok(if v.get("hyperedges").is_some() {
            Structure::Hyper(serde_json::from_value(v)?)
        } else {
            Structure::Graph(serde_json::from_value(v)?)
        })
    }
}

impl EntanglementStructure for Structure {
    fn agent_count(&self) -> usize {
        match self {
            Structure::Graph(g) => g.agent_count(),
            Structure::Hyper(h) => h.agent_count(),
        }
    }
    fn hyperedge_list(&self) -> Vec<Vec<AgentId>> {
        match self {
            Structure::Graph(g) => g.hyperedge_list(),
            Structure::Hyper(h) => h.hyperedge_list(),
        }
    }
}

fn cmd_locc(cli: &Cli, target: &PathBuf) -> Result<String> {
    let source_path = cli
        .input
        .as_ref()
        .ok_or_else(|| Error::invalid("locc needs --input for the source structure"))?;
    let (source, target) = (Structure::load(source_path)?, Structure::load(target)?);
    let verdict = if cli.jobs == Some(1) {
        find_witness_sequential(&source, &target)?
    } else {
        find_witness(&source, &target)?
    };
    render(cli, &verdict, || match &verdict {
        Verdict::ImpossibleWithWitness { witness } => {
            let coloring: String = witness.coloring.colors().iter().map(|c| format!("{c:?}")).collect();
            format!(
                "impossible: coloring {coloring} merges {} pairs in the source and {} in the target\n",
                witness.count_source.0, witness.count_target.0
            )
        }
        Verdict::NoWitnessFound { colorings_checked } => {
            format!("no witness among {colorings_checked} colorings\n")
        }
    })
}

#[derive(Serialize)]
struct ClassicalReport {
    round: KeyRound,
    reconstructed: Vec<u8>,
    unanimous: bool,
    eve: EveView,
}

fn load_tree(cli: &Cli, agents: usize) -> Result<SpanningTree> {
    match &cli.input {
        Some(p) => Ok(serde_json::from_value(read_json(Some(p), "qkd")?)?),
        None => SpanningTree::path(agents),
    }
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| b.to_string()).collect()
}

fn cmd_qkd(cli: &Cli, args: &QkdArgs) -> Result<String> {
    let mut rng = rng(cli);
    match args.mode {
        QkdMode::Classical => {
            let tree = load_tree(cli, args.agents)?;
            let round = classical_nkd_round(&tree, &mut rng)?;
            let reconstructed = (0..tree.n())
                .map(|a| round.reconstruct(AgentId(a)))
                .collect::<Result<Vec<_>>>()?;
            let unanimous = reconstructed.iter().all(|&b| b == round.shared_bit);
            let eve = eve_consistent_configs(&tree, &round.public())?;
            let report = ClassicalReport {
                round,
                reconstructed,
                unanimous,
                eve,
            };
            render(cli, &report, || {
                format!(
                    "shared bit: {}\nreconstructed: {}\nunanimous: {}\neve configurations: {} (balanced pair: {})\n",
                    report.round.shared_bit,
                    bits(&report.reconstructed),
                    report.unanimous,
                    report.eve.configurations.len(),
                    report.eve.is_balanced_pair()
                )
            })
        }
        QkdMode::Pipeline => {
            let tree = load_tree(cli, args.agents)?;
            let run = nqkd_pipeline(&tree, &LinearCode::hamming74(), args.noise, &mut rng)?;
            render(cli, &run, || match &run.outcome {
                crate::keydist::NqkdOutcome::Key { keys, agreed } => {
                    let mut s = format!("agreed: {agreed}\n");
                    for (a, k) in keys.iter().enumerate() {
                        let _ = writeln!(s, "agent {a}: {}", bits(k));
                    }
                    s
                }
                crate::keydist::NqkdOutcome::Aborted { error_rate } => {
                    format!("aborted: check-bit error rate {error_rate:.4}\n")
                }
            })
        }
        QkdMode::TwoGroup => {
            let group: BTreeSet<AgentId> = if args.group.is_empty() {
                (0..args.agents / 2).map(AgentId).collect()
            } else {
                args.group.iter().copied().map(AgentId).collect()
            };
            let rounds = (0..args.rounds)
                .map(|_| two_group_round(args.agents, &group, &mut rng))
                .collect::<Result<Vec<TwoGroupRound>>>()?;
            render(cli, &rounds, || {
                rounds
                    .iter()
                    .map(|r| {
                        format!(
                            "outcomes {} -> group bits {} {}\n",
                            bits(&r.outcomes),
                            r.effective_bit_a,
                            r.effective_bit_b
                        )
                    })
                    .collect()
            })
        }
        QkdMode::Hypergraph => {
            let h: EntangledHypergraph =
                serde_json::from_value(read_json(cli.input.as_ref(), "qkd hypergraph")?)?;
            let reduced = reduce_security_hypergraph(&SecurityHypergraph(h))?;
            render(cli, &reduced, || {
                let survivors: Vec<String> = reduced.survivors.iter().map(|a| a.to_string()).collect();
                let edges: Vec<String> = reduced.graph.edges().iter().map(|e| e.to_string()).collect();
                format!("survivors: {}\nedges: {}\n", survivors.join(" "), edges.join(" "))
            })
        }
    }
}

/// A threshold scheme realized with shares resident at the dealer.
#[derive(Serialize)]
struct Assisted {
    from: (usize, usize),
    to: (usize, usize),
    resident_shares: usize,
}

fn plan_text(p: &SchemePlan) -> String {
    let q: Vec<String> = p.q_players.iter().map(|&i| crate::qss::player_name(i)).collect();
    format!(
        "{}\naccess: {}\nq-players: {}\nresident shares: {}\n{}",
        p.name,
        p.access,
        q.join(" "),
        p.resident_shares,
        p.diagram
    )
}

fn need(v: Option<usize>, flag: &str) -> Result<usize> {
    v.ok_or_else(|| Error::invalid(format!("missing --{flag}")))
}

/// The plan described by --input (access structure or twin spec) or --k/--n.
fn build_plan(cli: &Cli, args: &QssArgs) -> Result<SchemePlan> {
    match &cli.input {
        Some(p) => {
            let v = read_json(Some(p), "qss")?;
            if v.get("minimal_sets").is_some() {
                let a: AccessStructure = serde_json::from_value(v)?;
                compress_plan(&a)
            } else {
                let req: TwinRequest = serde_json::from_value(v)?;
                plan_twin_threshold(&req.spec, req.variant)
            }
        }
        None => compress_threshold(need(args.k, "k")?, need(args.n, "n")?),
    }
}

fn cmd_qss(cli: &Cli, args: &QssArgs) -> Result<String> {
    match args.action {
        QssAction::Plan => {
            let v = read_json(cli.input.as_ref(), "qss plan")?;
            let req: TwinRequest = serde_json::from_value(v)?;
            let plan = plan_twin_threshold(&req.spec, req.variant)?;
            render(cli, &plan, || plan_text(&plan))
        }
        QssAction::Compress => {
            let plan = build_plan(cli, args)?;
            render(cli, &plan, || plan_text(&plan))
        }
        QssAction::Inflate => {
            let (k, n) = (need(args.k, "k")?, need(args.n, "n")?);
            if args.new_k.is_none() && args.new_n.is_none() {
                let gamma = assisted_params(k, n)?;
                let a = Assisted {
                    from: (k, n),
                    to: (k + gamma, n + gamma),
                    resident_shares: gamma,
                };
                return render(cli, &a, || {
                    format!("(({k},{n})) -> (({},{})) with {gamma} resident shares\n", a.to.0, a.to.1)
                });
            }
            let inf: Inflation = inflate(k, n, need(args.new_k, "new-k")?, need(args.new_n, "new-n")?)?;
            render(cli, &inf, || {
                format!(
                    "(({},{})) -> (({},{})) with {} added classical players\n",
                    inf.from.0, inf.from.1, inf.to.0, inf.to.1, inf.added_c_players
                )
            })
        }
        QssAction::Simulate => {
            let plan = build_plan(cli, args)?;
            let report: SimulationReport = plan.simulate(&mut rng(cli))?;
            render(cli, &report, || {
                let mut s = format!("{}: {}\n", report.plan, if report.holds() { "ok" } else { "FAILED" });
                for c in &report.coalitions {
                    let detail = match (c.fidelity, c.leak) {
                        (Some(f), _) => format!("fidelity {f:.9}"),
                        (_, Some(l)) => format!("leak {l:.2e}"),
                        _ => String::new(),
                    };
                    let _ = writeln!(s, "{} {} {detail}", c.coalition, if c.authorized { "authorized" } else { "unauthorized" });
                }
                for f in &report.failures {
                    let _ = writeln!(s, "failure: {f}");
                }
                s
            })
        }
    }
}
