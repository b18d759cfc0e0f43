use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use popmatch::generate::{perturb_agent, random_instance, random_swap, seeded};
use popmatch::mixed::{integral_point_exists_with, joint_polytope_feasible_with, DEFAULT_MIXED_BOUND};
use popmatch::model::{
    diff_instances, parse_family, parse_instance, parse_matching, serialize_family, serialize_instance,
    serialize_matching,
};
use popmatch::oracle::{self, OracleConfig, SetKind, DEFAULT_BOUND};
use popmatch::reductions::{
    parse_dimacs, reduce_forbidden_edge_force_vert, reduce_sat, reduce_two_forbidden, witness_matching,
    GadgetPair,
};
use popmatch::robust::{hybrid_instance, robust, RobustMode, Strategy};
use popmatch::solve::{
    dominant_edge, dominant_matching, gale_shapley, max_weight_popular, parse_weights, popular_edge,
    WeightFunction,
};
use popmatch::verify::{
    is_dominant, is_popular, is_strongly_popular, label_graph, popularity_certificate, popularity_margin, EdgeLabel,
    Violation,
};
use popmatch::{AgentId, Edge, Instance, InstanceFamily, Matching};
use rand::Rng;

#[derive(Parser)]
#[command(name = "popmatch", version, about = "Popular, dominant and robust popular matchings")]
struct Cli {
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a property of a matching.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        matching: PathBuf,
        #[arg(long, value_enum, default_value_t = VerifyMode::Popular)]
        mode: VerifyMode,
        /// Print a witness of unpopularity.
        #[arg(long)]
        certificate: bool,
        /// Print the label of every edge relative to the matching.
        #[arg(long)]
        labels: bool,
    },
    /// Run a single-instance algorithm.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        /// Edge as `worker:firm` (or `firm:worker`).
        #[arg(long)]
        edge: Option<String>,
        /// Lines `w f weight`, weights as integers or `p/q`.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Find a matching popular (or dominant) in every instance.
    Robust {
        /// Instance or family files, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Popular)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
        strategy: StrategyArg,
    },
    /// Enumerate matchings of a class by brute force.
    Oracle {
        #[arg(long, conflicts_with = "instances")]
        instance: Option<PathBuf>,
        #[arg(long, value_enum, requires = "instance")]
        set: Option<SetArg>,
        #[arg(long, value_delimiter = ',')]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, requires = "instances")]
        robust: Option<Mode>,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: usize,
    },
    /// Build instance pairs from hard source problems.
    Reduce {
        #[command(subcommand)]
        which: Reduce,
    },
    /// Mixed popularity: the intersection of popularity polytopes.
    Mixed {
        #[arg(long, value_delimiter = ',', required = true)]
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Check::Feasible)]
        check: Check,
        #[arg(long, default_value_t = DEFAULT_MIXED_BOUND)]
        bound: usize,
    },
    /// Compare two instances over the same agents.
    Diff { a: PathBuf, b: PathBuf },
    /// Random instance, or a pair differing at one agent.
    Gen {
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[arg(long, default_value_t = 4)]
        firms: usize,
        /// Probability that a worker-firm pair is an edge.
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also emit a second instance where one agent reorders its list.
        #[arg(long, value_enum)]
        perturb: Option<Perturb>,
    },
    /// The hybrid instance for an edge at the differing agent.
    Hybrid {
        #[arg(long, value_delimiter = ',', required = true)]
        instances: Vec<PathBuf>,
        #[arg(long)]
        edge: String,
        /// Defaults to the single agent whose list differs.
        #[arg(long)]
        agent: Option<String>,
    },
}

#[derive(Subcommand)]
enum Reduce {
    /// Monotone 3-SAT (DIMACS) to two instances differing at two firms.
    Sat {
        #[arg(long)]
        cnf: PathBuf,
    },
    /// The robust dominant matching for a satisfying assignment.
    SatWitness {
        #[arg(long)]
        cnf: PathBuf,
        /// Values of x1, x2, ... as a string of 0 and 1.
        #[arg(long)]
        assignment: String,
    },
    /// Forbidden edge and forced agent to two instances differing by swaps.
    Fefv {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        edge: String,
        #[arg(long)]
        vertex: String,
    },
    /// Two forbidden edges to a pair with reduced availability.
    TwoForbidden {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, num_args = 2, required = true)]
        edges: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Popular,
    Dominant,
    Strong,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Stable,
    Dominant,
    PopularEdge,
    DominantEdge,
    MaxWeight,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Popular,
    Dominant,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Auto,
    Hybrid,
    Unpopular,
    Reduced,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    Popular,
    Dominant,
    Strong,
    Stable,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Feasible,
    Integral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Perturb {
    /// Shuffle one agent's list.
    Shuffle,
    /// Swap two adjacent entries of one agent's list.
    Swap,
}

impl From<Mode> for RobustMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Popular => RobustMode::Popular,
            Mode::Dominant => RobustMode::Dominant,
        }
    }
}

impl From<Mode> for SetKind {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Popular => SetKind::Popular,
            Mode::Dominant => SetKind::Dominant,
        }
    }
}

struct Outcome {
    text: String,
    json: Value,
    yes: bool,
}

impl Outcome {
    fn yes(text: String, json: Value) -> Self {
        Outcome { text, json, yes: true }
    }

    fn no(text: String, json: Value) -> Self {
        Outcome { text, json, yes: false }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn is_family_text(text: &str) -> bool {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("instance"))
}

/// Instance files and family files, flattened into one family.
fn load_family(paths: &[PathBuf]) -> Result<InstanceFamily> {
    let mut instances = Vec::new();
    let mut names = Vec::new();
    for p in paths {
        let text = read(p)?;
        if is_family_text(&text) {
            let f = parse_family(&text).with_context(|| format!("parsing {}", p.display()))?;
            instances.extend(f.instances().iter().cloned());
            names.extend(f.names().iter().cloned());
        } else {
            instances.push(parse_instance(&text).with_context(|| format!("parsing {}", p.display()))?);
            names.push(p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()));
        }
    }
    Ok(InstanceFamily::with_names(instances, names)?)
}

fn parse_edge(i: &Instance, spec: &str) -> Result<Edge> {
    let (x, y) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("edge `{spec}` should look like `w1:f3`"))?;
    Ok(i.edge_by_labels(x.trim(), y.trim())?)
}

fn agent(i: &Instance, label: &str) -> Result<AgentId> {
    i.agent(label).ok_or_else(|| anyhow!("unknown agent `{label}`"))
}

fn matching_json(i: &Instance, m: &Matching) -> Value {
    Value::Array(
        m.edges()
            .into_iter()
            .map(|e| json!([i.label(e.worker_id()), i.label(e.firm_id())]))
            .collect(),
    )
}

fn labels(i: &Instance, xs: &[AgentId]) -> Vec<String> {
    xs.iter().map(|&x| i.label(x).to_string()).collect()
}

fn edge_names(i: &Instance, es: &[Edge]) -> Vec<String> {
    es.iter().map(|&e| format!("{}:{}", i.label(e.worker_id()), i.label(e.firm_id()))).collect()
}

fn matching_block(i: &Instance, m: &Matching) -> String {
    let s = serialize_matching(m, i);
    if s.is_empty() {
        "# empty matching\n".into()
    } else {
        s
    }
}

fn verify(instance: &Path, matching: &Path, mode: VerifyMode, certificate: bool, show_labels: bool) -> Result<Outcome> {
    let i = load_instance(instance)?;
    let m = parse_matching(&read(matching)?, &i).with_context(|| format!("parsing {}", matching.display()))?;
    let (name, holds) = match mode {
        VerifyMode::Popular => ("popular", is_popular(&i, &m)),
        VerifyMode::Dominant => ("dominant", is_dominant(&i, &m)),
        VerifyMode::Strong => ("strongly popular", is_strongly_popular(&i, &m, DEFAULT_BOUND)?),
    };
    let mut text = format!("{name}: {}\n", if holds { "yes" } else { "no" });
    let mut out = json!({ "mode": name, "holds": holds });
    if show_labels {
        let g = label_graph(&i, &m);
        let mut listed = Vec::new();
        for &(e, l) in g.labels() {
            let name = match l {
                EdgeLabel::MinusMinus => "(-,-)",
                EdgeLabel::PlusMinus => "(+,-)",
                EdgeLabel::PlusPlus => "(+,+)",
                EdgeLabel::Matched => "matched",
            };
            text.push_str(&format!("{} {} {name}\n", i.label(e.worker_id()), i.label(e.firm_id())));
            listed.push(json!([i.label(e.worker_id()), i.label(e.firm_id()), name]));
        }
        out["labels"] = Value::Array(listed);
    }
    if certificate && !holds {
        if let Some(c) = popularity_certificate(&i, &m) {
            let better = c.improving_matching(&m);
            let kind = match c.violation {
                Violation::Cycle => "alternating cycle through a (-,-) edge",
                Violation::UnmatchedPath => "alternating path from an unmatched agent",
                Violation::DoublePath => "alternating path between two (-,-) edges",
            };
            let margin = popularity_margin(&i, &better, &m);
            text.push_str(&format!("# {kind}\n# edges: {}\n", edge_names(&i, &c.edges).join(" ")));
            text.push_str(&format!("# more popular by {margin}:\n{}", matching_block(&i, &better)));
            out["certificate"] = json!({
                "violation": kind,
                "edges": edge_names(&i, &c.edges),
                "better": matching_json(&i, &better),
                "margin": margin,
            });
        }
    }
    Ok(Outcome { text, json: out, yes: holds })
}

fn solve(instance: &Path, algo: Algo, edge: Option<&str>, weights: Option<&Path>) -> Result<Outcome> {
    let i = load_instance(instance)?;
    let need_edge = || -> Result<Edge> {
        parse_edge(&i, edge.ok_or_else(|| anyhow!("--edge is required for this algorithm"))?)
    };
    let found = match algo {
        Algo::Stable => Some(gale_shapley(&i)),
        Algo::Dominant => Some(dominant_matching(&i)),
        Algo::PopularEdge => popular_edge(&i, need_edge()?)?,
        Algo::DominantEdge => dominant_edge(&i, need_edge()?)?,
        Algo::MaxWeight => {
            let w = match weights {
                Some(p) => parse_weights(&read(p)?, &i)?,
                None => WeightFunction::zero(),
            };
            let (m, total) = max_weight_popular(&i, &w)?;
            let text = format!("# weight {total}\n{}", matching_block(&i, &m));
            return Ok(Outcome::yes(text, json!({ "matching": matching_json(&i, &m), "weight": total.to_string() })));
        }
    };
    Ok(match found {
        Some(m) => Outcome::yes(matching_block(&i, &m), json!({ "matching": matching_json(&i, &m) })),
        None => Outcome::no("NO MATCHING\n".into(), json!({ "matching": null })),
    })
}

fn robust_cmd(paths: &[PathBuf], mode: Mode, strategy: StrategyArg) -> Result<Outcome> {
    let fam = load_family(paths)?;
    let strategy = match strategy {
        StrategyArg::Auto => Strategy::Auto,
        StrategyArg::Hybrid => Strategy::Hybrid,
        StrategyArg::Unpopular => Strategy::Unpopular,
        StrategyArg::Reduced => Strategy::Reduced,
    };
    let i = fam.first();
    Ok(match robust(&fam, mode.into(), strategy)? {
        Some(m) => Outcome::yes(matching_block(i, &m), json!({ "robust": true, "matching": matching_json(i, &m) })),
        None => Outcome::no("NO ROBUST MATCHING\n".into(), json!({ "robust": false, "matching": null })),
    })
}

fn blocks(i: &Instance, ms: &[Matching]) -> String {
    ms.iter().map(|m| matching_block(i, m)).collect::<Vec<_>>().join("\n")
}

fn oracle_cmd(
    instance: Option<&Path>,
    set: Option<SetArg>,
    instances: &[PathBuf],
    robust: Option<Mode>,
    bound: usize,
) -> Result<Outcome> {
    let cfg = OracleConfig { bound, ..Default::default() };
    let (i, ms) = match (instance, set, robust) {
        (Some(p), Some(s), None) => {
            let i = load_instance(p)?;
            let kind = match s {
                SetArg::Popular => SetKind::Popular,
                SetArg::Dominant => SetKind::Dominant,
                SetArg::Strong => SetKind::Strong,
                SetArg::Stable => SetKind::Stable,
            };
            let ms = oracle::set(&i, kind, &cfg)?;
            (i, ms)
        }
        (None, None, Some(mode)) if !instances.is_empty() => {
            let fam = load_family(instances)?;
            let ms = oracle::robust_set(&fam, mode.into(), &cfg)?;
            (fam.first().clone(), ms)
        }
        _ => bail!("use either --instance with --set, or --instances with --robust"),
    };
    let json = json!({
        "count": ms.len(),
        "matchings": ms.iter().map(|m| matching_json(&i, m)).collect::<Vec<_>>(),
    });
    let text = format!("# {} matching(s)\n{}", ms.len(), blocks(&i, &ms));
    Ok(if ms.is_empty() { Outcome::no(text, json) } else { Outcome::yes(text, json) })
}

fn gadget_out(p: &GadgetPair) -> Outcome {
    let i = p.family.first();
    let json = json!({
        "family": serialize_family(&p.family),
        "agents": i.num_agents(),
        "differing": labels(i, &p.family.differing_agents()),
        "provenance": p.provenance,
    });
    Outcome::yes(serialize_family(&p.family), json)
}

fn reduce(which: &Reduce) -> Result<Outcome> {
    match which {
        Reduce::Sat { cnf } => {
            let f = parse_dimacs(&read(cnf)?)?;
            Ok(gadget_out(&reduce_sat(&f)?))
        }
        Reduce::SatWitness { cnf, assignment } => {
            let f = parse_dimacs(&read(cnf)?)?;
            let values = assignment
                .chars()
                .filter(|c| !c.is_whitespace() && *c != ',')
                .map(|c| match c {
                    '0' | 'F' | 'f' => Ok(false),
                    '1' | 'T' | 't' => Ok(true),
                    _ => Err(anyhow!("assignment must consist of 0 and 1, found `{c}`")),
                })
                .collect::<Result<Vec<bool>>>()?;
            let p = reduce_sat(&f)?;
            let m = witness_matching(&p, &f, &values)?;
            let i = p.family.first();
            Ok(Outcome::yes(matching_block(i, &m), json!({ "matching": matching_json(i, &m) })))
        }
        Reduce::Fefv { instance, edge, vertex } => {
            let src = load_instance(instance)?;
            let e = parse_edge(&src, edge)?;
            let d = agent(&src, vertex)?;
            Ok(gadget_out(&reduce_forbidden_edge_force_vert(&src, e, d)?))
        }
        Reduce::TwoForbidden { instance, edges } => {
            let src = load_instance(instance)?;
            let e = parse_edge(&src, &edges[0])?;
            let e2 = parse_edge(&src, &edges[1])?;
            Ok(gadget_out(&reduce_two_forbidden(&src, e, e2)?))
        }
    }
}

fn mixed(paths: &[PathBuf], check: Check, bound: usize) -> Result<Outcome> {
    let fam = load_family(paths)?;
    let i = fam.first();
    match check {
        Check::Feasible => Ok(match joint_polytope_feasible_with(&fam, bound)? {
            Some(mu) => {
                let entries: Vec<Value> = mu
                    .entries()
                    .map(|(e, q)| json!([i.label(e.worker_id()), i.label(e.firm_id()), q.to_string()]))
                    .collect();
                Outcome::yes(mu.display(i), json!({ "feasible": true, "point": entries }))
            }
            None => Outcome::no("EMPTY\n".into(), json!({ "feasible": false, "point": null })),
        }),
        Check::Integral => Ok(match integral_point_exists_with(&fam, bound)? {
            Some(m) => Outcome::yes(matching_block(i, &m), json!({ "integral": true, "matching": matching_json(i, &m) })),
            None => Outcome::no("NO INTEGRAL POINT\n".into(), json!({ "integral": false, "matching": null })),
        }),
    }
}

fn diff(a: &Path, b: &Path) -> Result<Outcome> {
    let (ia, ib) = (load_instance(a)?, load_instance(b)?);
    let r = diff_instances(&ia, &ib)?;
    let dist: Vec<Value> = r
        .swap_distance
        .iter()
        .map(|&(x, d)| json!({ "agent": ia.label(x), "distance": d }))
        .collect();
    let json = json!({
        "changed": labels(&ia, &r.changed),
        "swap_distance": dist,
        "added_edges": edge_names(&ia, &r.added_edges),
        "removed_edges": edge_names(&ia, &r.removed_edges),
        "single_agent": r.single_agent,
        "swaps_only": r.swaps_only,
        "reduced_availability": r.reduced_availability,
        "a_complete": r.a_complete,
        "same_graph": r.same_graph,
    });
    let mut text = format!("changed: {}\n", labels(&ia, &r.changed).join(" "));
    for &(x, d) in &r.swap_distance {
        text.push_str(&format!("swap distance {}: {d}\n", ia.label(x)));
    }
    text.push_str(&format!("added edges: {}\n", edge_names(&ia, &r.added_edges).join(" ")));
    text.push_str(&format!("removed edges: {}\n", edge_names(&ia, &r.removed_edges).join(" ")));
    for (k, v) in [
        ("single agent", r.single_agent),
        ("swaps only", r.swaps_only),
        ("reduced availability", r.reduced_availability),
        ("first complete", r.a_complete),
        ("same graph", r.same_graph),
    ] {
        text.push_str(&format!("{k}: {}\n", if v { "yes" } else { "no" }));
    }
    Ok(Outcome::yes(text, json))
}

fn gen(workers: usize, firms: usize, density: f64, seed: u64, perturb: Option<Perturb>) -> Result<Outcome> {
    if !(0.0..=1.0).contains(&density) {
        bail!("density must lie in [0, 1]");
    }
    let mut rng = seeded(seed);
    let a = random_instance(&mut rng, workers, firms, density);
    let Some(how) = perturb else {
        let text = serialize_instance(&a);
        return Ok(Outcome::yes(text.clone(), json!({ "instance": text })));
    };
    let candidates: Vec<AgentId> = a.agents().filter(|&x| a.degree(x) >= 2).collect();
    if candidates.is_empty() {
        bail!("no agent has two neighbors; try a higher density");
    }
    let x = candidates[rng.gen_range(0..candidates.len())];
    let b = match how {
        Perturb::Shuffle => perturb_agent(&mut rng, &a, x),
        Perturb::Swap => random_swap(&mut rng, &a, x),
    };
    let fam = InstanceFamily::with_names(vec![a.clone(), b], vec!["A".into(), "B".into()])?;
    let text = serialize_family(&fam);
    Ok(Outcome::yes(text.clone(), json!({ "family": text, "agent": a.label(x) })))
}

fn hybrid(paths: &[PathBuf], edge: &str, agent_label: Option<&str>) -> Result<Outcome> {
    let fam = load_family(paths)?;
    let i = fam.first();
    let e = parse_edge(i, edge)?;
    let x = match agent_label {
        Some(l) => agent(i, l)?,
        None => match fam.differing_agents().as_slice() {
            [x] => *x,
            [] => bail!("no agent's list differs; pass --agent"),
            _ => bail!("more than one agent's list differs"),
        },
    };
    let h = hybrid_instance(&fam, x, e)?;
    let text = serialize_instance(&h.instance);
    let order: Vec<String> = h
        .order
        .iter()
        .map(|&y| h.instance.label(AgentId { side: x.side.opposite(), index: y }).to_string())
        .collect();
    Ok(Outcome::yes(text.clone(), json!({ "instance": text, "agent": i.label(x), "order": order })))
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Verify { instance, matching, mode, certificate, labels } => {
            verify(instance, matching, *mode, *certificate, *labels)
        }
        Command::Solve { instance, algo, edge, weights } => {
            solve(instance, *algo, edge.as_deref(), weights.as_deref())
        }
        Command::Robust { instances, mode, strategy } => robust_cmd(instances, *mode, *strategy),
        Command::Oracle { instance, set, instances, robust, bound } => {
            oracle_cmd(instance.as_deref(), *set, instances, *robust, *bound)
        }
        Command::Reduce { which } => reduce(which),
        Command::Mixed { instances, check, bound } => mixed(instances, *check, *bound),
        Command::Diff { a, b } => diff(a, b),
        Command::Gen { workers, firms, density, seed, perturb } => gen(*workers, *firms, *density, *seed, *perturb),
        Command::Hybrid { instances, edge, agent } => hybrid(instances, edge, agent.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                let mut v = out.json;
                v["answer"] = Value::Bool(out.yes);
                println!("{v}");
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(if out.yes { 0 } else { 1 })
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": format!("{e:#}") }));
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
