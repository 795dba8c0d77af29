use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use claimguard::causal::NoiseSeeds;
use claimguard::config::{OutputFormat, PipelineConfig};
use claimguard::extraction::ClaimGrammar;
use claimguard::fusion::{fit_weights, parse_fit_examples, FitOptions, FusionWeights};
use claimguard::generator::{GeneratorBinding, Reentrancy, GENERATOR_URL_VAR};
use claimguard::harness::{
    metrics_from_scores, metrics_value, perturb_corpus, score_dataset, synthetic_world, world_rules, write_dataset,
    WorldSpec,
};
use claimguard::intervene::explain;
use claimguard::kgraph::{KnowledgeBase, KnowledgeGraph, RuleSet};
use claimguard::logic::{extract_premises, parse_goal, theorem_prove, Budget, ProofStatus, ProverLimits};
use claimguard::model::{Thresholds, Verdict};
use claimguard::pipeline::Pipeline;
use claimguard::report::{serialize_report, to_canonical};
use claimguard::Error;

const REMOTE_TIMEOUT_MS: u64 = 30_000;

#[derive(Parser)]
#[command(name = "claimguard", version, about = "Verify factual claims against a knowledge base")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one response. Exit 0 accept, 2 flag, 3 reject, 1 error.
    Verify(VerifyArgs),
    /// Try to prove a ground goal from the knowledge base and rules.
    Prove(ProveArgs),
    /// Generate a synthetic corpus, verify it and print detection metrics.
    Bench(BenchArgs),
    /// Fit fusion weights from labeled feature lines.
    Fit(FitArgs),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kb: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Weights file: `alpha beta gamma bias`.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hops: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "")]
    context: String,
    #[arg(long, conflicts_with = "response_file", required_unless_present = "response_file")]
    response: Option<String>,
    #[arg(long)]
    response_file: Option<PathBuf>,
    /// Reject threshold.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Append a plain-text explanation (to stderr with canonical output).
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
struct ProveArgs {
    #[arg(long)]
    kb: PathBuf,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    max_clauses: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Ground goal, e.g. `born_in_country(einstein, germany)`.
    goal: String,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    rate: f64,
    /// Detection threshold; defaults to minus the weights' bias.
    #[arg(long)]
    threshold: Option<f64>,
    /// Write `p_causal p_symbolic uncertainty label` lines for `fit`.
    #[arg(long)]
    features_out: Option<PathBuf>,
    /// Write the generated corpus as JSON lines.
    #[arg(long)]
    dataset_out: Option<PathBuf>,
    /// Include wall-clock latency in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    examples_file: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = FitOptions::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = FitOptions::default().learning_rate)]
    lr: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Prove(a) => prove(a),
        Command::Bench(a) => bench(a),
        Command::Fit(a) => fit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match &e {
                Error::Parse(p) => eprintln!("error: {e}\n{}", p.diagnostic()),
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(1)
        }
    }
}

fn write_file(path: &Path, text: &str) -> claimguard::Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

/// Resolves configuration and flags into a pipeline.
fn build_pipeline(common: &Common, config: &PipelineConfig, default_world: bool) -> claimguard::Result<Pipeline> {
    let kb_path = common.kb.as_ref().or(config.kb_path.as_ref());
    let (kb, mut rules) = match kb_path {
        Some(p) => (KnowledgeBase::load(p)?, RuleSet::new()),
        None if default_world => (synthetic_world(&WorldSpec::default())?, world_rules()),
        None => return Err(Error::InvalidArgument("no knowledge base given (use --kb)".into())),
    };
    if let Some(p) = common.rules.as_ref().or(config.rules_path.as_ref()) {
        rules.extend(RuleSet::load(p)?);
    }
    let grammar = match common.lexicon.as_ref().or(config.lexicon_path.as_ref()) {
        Some(p) => ClaimGrammar::load(p)?,
        None => ClaimGrammar::default(),
    };
    let weights = match (&common.weights, &config.weights_path, config.weights) {
        (Some(p), _, _) => FusionWeights::load(p)?,
        (None, Some(p), _) => FusionWeights::load(p)?,
        (None, None, Some(w)) => FusionWeights::new(w.alpha, w.beta, w.gamma, w.bias)?,
        (None, None, None) => FusionWeights::default(),
    };
    let binding = match std::env::var(GENERATOR_URL_VAR) {
        Ok(url) if !url.trim().is_empty() => GeneratorBinding::Remote {
            endpoint: url.trim().to_string(),
            timeout_ms: REMOTE_TIMEOUT_MS,
            reentrancy: Reentrancy::Serial,
        },
        _ => config.generator.clone().unwrap_or_default(),
    };
    let generator = binding.build(grammar.clone())?;
    let mut pipeline = Pipeline::new(kb, rules, grammar).with_weights(weights).with_generator(generator);
    if let Some(t) = config.thresholds {
        pipeline.thresholds = t;
    }
    if let Some(h) = common.hops.or(config.hops) {
        pipeline.hops = h;
    }
    if let Some(l) = config.prover {
        pipeline.limits = l;
    }
    if let Some(scm) = &config.scm {
        pipeline.scm = scm.clone();
    }
    let seed = common.seed.or(match binding {
        GeneratorBinding::Mock { seed } if seed != 0 => Some(seed),
        _ => None,
    });
    if let Some(seed) = seed {
        pipeline.scm.seeds = NoiseSeeds {
            u_k: seed,
            u_y: seed,
            u_h: seed,
        };
    }
    Ok(pipeline)
}

fn load_config(common: &Common) -> claimguard::Result<PipelineConfig> {
    match &common.config {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn verify(args: VerifyArgs) -> claimguard::Result<u8> {
    let config = load_config(&args.common)?;
    let mut pipeline = build_pipeline(&args.common, &config, false)?;
    if let Some(t) = args.threshold {
        let accept = pipeline.thresholds.accept.min(t);
        pipeline.thresholds = Thresholds::new(accept, t)?;
    }
    let text = match (&args.response, &args.response_file) {
        (Some(r), _) => r.clone(),
        (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        (None, None) => unreachable!("clap requires a response"),
    };
    let context = pipeline.context(&args.context);
    let v = pipeline.verify(&context, &text)?;
    let report = &v.report;
    match args.format.or(config.format).unwrap_or_default() {
        OutputFormat::Canonical => {
            emit(&serialize_report(report));
            if args.explain {
                eprint!("{}", explain(report));
            }
        }
        OutputFormat::Text if args.explain => emit(&explain(report)),
        OutputFormat::Text => {
            let mut out = format!("verdict: {} (score {:.6})\n", report.verdict.name(), report.score);
            for c in &report.per_claim {
                out.push_str(&format!("  {} [{}]\n", c.claim, c.status.name()));
                for e in &c.evidence {
                    out.push_str(&format!("    evidence: {e}\n"));
                }
            }
            emit(&out);
        }
    }
    Ok(match report.verdict {
        Verdict::Accept => 0,
        Verdict::Flag => 2,
        Verdict::Reject => 3,
    })
}

fn prove(args: ProveArgs) -> claimguard::Result<u8> {
    let goal = parse_goal(&args.goal)?;
    let kb = KnowledgeBase::load(&args.kb)?;
    let mut rules = RuleSet::new();
    if let Some(p) = &args.rules {
        rules.extend(RuleSet::load(p)?);
    }
    let rules = rules.with_shipped_axioms();
    let mut limits = ProverLimits::default();
    if let Some(n) = args.max_clauses {
        limits.max_clauses = n;
    }
    if let Some(n) = args.max_depth {
        limits.max_depth = n;
    }
    let graph = KnowledgeGraph::from_triples([], kb.triples().cloned());
    let premises = extract_premises(&graph, &goal, &rules, kb.declarations());
    let outcome = theorem_prove(&premises.clauses, &goal, limits);
    match (outcome.status, &outcome.trace) {
        (ProofStatus::Proved, Some(trace)) => {
            let mut out = format!("proof of {goal}\n{trace}");
            if outcome.premises_inconsistent {
                out.push_str("note: the premises alone are inconsistent\n");
            }
            emit(&out);
            Ok(0)
        }
        (ProofStatus::BudgetExhausted(b), _) => {
            let which = match b {
                Budget::Clauses => "clause",
                Budget::Depth => "depth",
            };
            emit(&format!("no proof ({which} budget exhausted)\n"));
            Ok(2)
        }
        _ => {
            emit("no proof (saturated)\n");
            Ok(2)
        }
    }
}

fn bench(args: BenchArgs) -> claimguard::Result<u8> {
    let config = load_config(&args.common)?;
    let pipeline = build_pipeline(&args.common, &config, true)?;
    let seed = args.common.seed.unwrap_or(0);
    let dataset = perturb_corpus(&pipeline.kb, args.n, args.rate, seed, &pipeline.grammar)?;
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty (use --n > 0)".into()));
    }
    if let Some(p) = &args.dataset_out {
        let mut buf = Vec::new();
        write_dataset(&dataset, &mut buf)?;
        write_file(p, &String::from_utf8(buf).expect("JSON is UTF-8"))?;
    }
    let scored = score_dataset(&pipeline, &dataset)?;
    if let Some(p) = &args.features_out {
        let lines: String = scored
            .iter()
            .map(|s| format!("{:.6} {:.6} {:.6} {}\n", s.p_causal, s.p_symbolic, s.uncertainty, u8::from(s.hallucinated)))
            .collect();
        write_file(p, &lines)?;
    }
    let threshold = args.threshold.unwrap_or(pipeline.weights.threshold());
    let metrics = metrics_from_scores(&scored, threshold);
    emit(&to_canonical(&metrics_value(&metrics, args.timing)));
    Ok(0)
}

fn fit(args: FitArgs) -> claimguard::Result<u8> {
    let text = std::fs::read_to_string(&args.examples_file).map_err(|e| Error::io(&args.examples_file, e))?;
    let data = parse_fit_examples(&text, &args.examples_file.display().to_string())?;
    let result = fit_weights(
        &data,
        FitOptions {
            seed: args.seed,
            epochs: args.epochs,
            learning_rate: args.lr,
        },
    )?;
    result.weights.save(&args.out)?;
    let loss = result.loss_curve.last().copied().unwrap_or(f64::NAN);
    emit(&format!(
        "weights: {}\nfinal loss: {loss:.6}\naccuracy: {:.6}\n",
        result.weights, result.accuracy
    ));
    Ok(0)
}
