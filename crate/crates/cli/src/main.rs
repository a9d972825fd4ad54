use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hopsim_core::app::AppSpec;
use hopsim_core::astg::Astg;
use hopsim_core::campaign::{
    build_models, compute_baselines, generate_tests, registry_for, run_campaign, CampaignConfig, Models,
};
use hopsim_core::corpus::{lint_dir, load_dir, write_dir};
use hopsim_core::explore::{enhance, explore_fresh};
use hopsim_core::fixtures::representatives;
use hopsim_core::policy::{ChatEndpointConfig, ExplorationPolicy, LlmPolicy, ScriptedPolicy};
use hopsim_core::synth::{random_corpus, synthetic_corpus};
use hopsim_core::{walkthrough, ResolutionMatrix};

const EXIT_ISSUES: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

/// Bad input from the user: missing paths, malformed corpus or config.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "hopsim", version, about = "Find hop-induced audio conflicts on a simulated super device")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Scripted,
    Llm,
}

#[derive(Args, Debug)]
struct PolicyArgs {
    /// Decision procedure used during exploration.
    #[arg(long, value_enum, default_value_t = PolicyKind::Scripted)]
    policy: PolicyKind,
    /// Base URL of an OpenAI-compatible chat endpoint (llm policy).
    #[arg(long)]
    endpoint_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the endpoint's API key.
    #[arg(long, default_value = "HOPSIM_API_KEY")]
    key_env: String,
    /// Exploration budget per usage.
    #[arg(long, default_value_t = hopsim_core::explore::DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Explore every corpus app and write one graph per app.
    Explore {
        #[arg(long)]
        corpus: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Add the states reached when built-in collaborators start playing.
    Enhance {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory of explored graphs.
        #[arg(long)]
        graphs: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit START_HOP and END_HOP test cases as JSON lines.
    Generate {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory of enhanced graphs; explored on the fly when absent.
        #[arg(long)]
        graphs: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Compute single-device baselines for every generated app pair.
    Baseline {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        graphs: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Run the whole pipeline and report issues. Exits 1 when any are found.
    Campaign {
        /// Corpus directory; overrides the config file.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Campaign config (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Machine-readable report.
        #[arg(long, default_value = "conflict-report.json")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Print the reference walkthrough of hop semantics.
    #[command(name = "replay-fig5", alias = "walkthrough")]
    Walkthrough,
    /// Lint a corpus directory.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Write a synthetic corpus.
    GenCorpus {
        #[arg(long)]
        out: PathBuf,
        /// Only the apps without injected faults.
        #[arg(long, conflicts_with = "random")]
        fault_free: bool,
        /// This many random fault-free apps instead of the fixed corpus.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn make_policy(args: &PolicyArgs, apps: &[Arc<AppSpec>]) -> Result<Box<dyn ExplorationPolicy>> {
    match args.policy {
        PolicyKind::Scripted => Ok(Box::new(ScriptedPolicy::from_specs(apps.iter().map(|a| &**a)))),
        PolicyKind::Llm => {
            let url = args
                .endpoint_url
                .clone()
                .ok_or_else(|| usage("--policy llm needs --endpoint-url"))?;
            let model = args.model.clone().ok_or_else(|| usage("--policy llm needs --model"))?;
            let cfg = ChatEndpointConfig::new(url, model, args.key_env.clone());
            Ok(Box::new(LlmPolicy::new(cfg).map_err(|e| usage(e.to_string()))?))
        }
    }
}

fn load_corpus(dir: &Path) -> Result<Vec<Arc<AppSpec>>> {
    if !dir.is_dir() {
        return Err(usage(format!("corpus directory {} does not exist", dir.display())));
    }
    load_dir(dir).map_err(|e| usage(e.to_string()))
}

fn graph_path(dir: &Path, app: &AppSpec) -> PathBuf {
    dir.join(format!("{}.json", app.id))
}

fn read_graphs(dir: &Path, apps: &[Arc<AppSpec>]) -> Result<BTreeMap<hopsim_core::AppId, Astg>> {
    apps.iter()
        .map(|a| {
            let path = graph_path(dir, a);
            let text = fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let g = Astg::from_json(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            g.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok((a.id.clone(), g))
        })
        .collect()
}

fn write_graphs<'a>(dir: &Path, graphs: impl IntoIterator<Item = &'a Astg>) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for g in graphs {
        let path = dir.join(format!("{}.json", g.app));
        fs::write(&path, g.to_json()).with_context(|| format!("writing {}", path.display()))?;
        println!("{:<16} {:>3} states {:>3} edges", g.app, g.states.len(), g.transitions.len());
    }
    Ok(())
}

fn models(apps: &[Arc<AppSpec>], graphs: Option<&Path>, policy: &PolicyArgs) -> Result<Models> {
    match graphs {
        Some(dir) => Ok(Models {
            graphs: read_graphs(dir, apps)?,
            warnings: BTreeMap::new(),
        }),
        None => {
            let mut p = make_policy(policy, apps)?;
            Ok(build_models(apps, p.as_mut(), policy.max_steps, &ResolutionMatrix::default())?)
        }
    }
}

fn write_json_lines<T: serde::Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut text = String::new();
    for item in items {
        text.push_str(&serde_json::to_string(item)?);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Explore { corpus, out, policy } => {
            let apps = load_corpus(&corpus)?;
            let mut p = make_policy(&policy, &apps)?;
            let mut graphs = Vec::new();
            for a in &apps {
                let e = explore_fresh(a, p.as_mut(), policy.max_steps)
                    .with_context(|| format!("exploring {}", a.id))?;
                for w in &e.warnings {
                    eprintln!("warning: {}: {w:?}", a.id);
                }
                graphs.push(e.graph);
            }
            write_graphs(&out, &graphs)?;
        }
        Cmd::Enhance { corpus, graphs, out } => {
            let apps = load_corpus(&corpus)?;
            let explored = read_graphs(&graphs, &apps)?;
            let reps = representatives();
            let mut enhanced = Vec::new();
            for a in &apps {
                enhanced.push(
                    enhance(&explored[&a.id], a, &reps, &ResolutionMatrix::default())
                        .with_context(|| format!("enhancing {}", a.id))?,
                );
            }
            write_graphs(&out, &enhanced)?;
        }
        Cmd::Generate {
            corpus,
            graphs,
            out,
            policy,
        } => {
            let apps = load_corpus(&corpus)?;
            let m = models(&apps, graphs.as_deref(), &policy)?;
            let tests = generate_tests(&m, &CampaignConfig::default())?;
            write_json_lines(&out, &tests)?;
            println!("{} test cases written to {}", tests.len(), out.display());
        }
        Cmd::Baseline {
            corpus,
            graphs,
            out,
            policy,
        } => {
            let apps = load_corpus(&corpus)?;
            let m = models(&apps, graphs.as_deref(), &policy)?;
            let tests = generate_tests(&m, &CampaignConfig::default())?;
            let registry = registry_for(&apps);
            let baselines = compute_baselines(&m, &tests, &registry, &ResolutionMatrix::default())?;
            let list: Vec<_> = baselines.into_values().collect();
            write_json_lines(&out, &list)?;
            println!("{} baselines written to {}", list.len(), out.display());
        }
        Cmd::Campaign {
            corpus,
            config,
            out,
            seed,
            repetitions,
            policy,
        } => {
            let mut cfg = match &config {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    let mut cfg = CampaignConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    if let (Some(c), Some(base)) = (&cfg.corpus, path.parent()) {
                        cfg.corpus = Some(base.join(c));
                    }
                    cfg
                }
                None => CampaignConfig::default(),
            };
            if corpus.is_some() {
                cfg.corpus = corpus;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = repetitions {
                cfg.repetitions = r;
            }
            cfg.max_steps = policy.max_steps;
            cfg.validate().map_err(|e| usage(e.to_string()))?;
            let dir = cfg.corpus.clone().ok_or_else(|| usage("no corpus given (--corpus or config)"))?;
            let apps = load_corpus(&dir)?;
            let mut p = make_policy(&policy, &apps)?;
            let outcome = run_campaign(&apps, p.as_mut(), &cfg)?;
            fs::write(&out, outcome.report.to_json()).with_context(|| format!("writing {}", out.display()))?;
            print!("{}", outcome.report.summary());
            println!("\nreport written to {}", out.display());
            if outcome.report.total > 0 {
                return Ok(EXIT_ISSUES);
            }
        }
        Cmd::Walkthrough => {
            let w = walkthrough::replay()?;
            print!("{w}");
        }
        Cmd::Validate { corpus } => {
            if !corpus.is_dir() {
                return Err(usage(format!("corpus directory {} does not exist", corpus.display())));
            }
            let problems = lint_dir(&corpus).map_err(|e| usage(e.to_string()))?;
            for p in &problems {
                println!("{p}");
            }
            if !problems.is_empty() {
                println!("{} problem(s)", problems.len());
                return Ok(EXIT_ISSUES);
            }
            println!("corpus ok");
        }
        Cmd::GenCorpus {
            out,
            fault_free,
            random,
            seed,
        } => {
            let apps = match random {
                Some(n) => random_corpus(n, seed),
                None => {
                    let c = synthetic_corpus();
                    if fault_free {
                        let clean = c.clean_apps();
                        c.apps.into_iter().filter(|a| clean.contains(&a.id)).collect()
                    } else {
                        let path = out.join("injections.json");
                        fs::create_dir_all(&out)?;
                        fs::write(&path, serde_json::to_string_pretty(&c.injections)?)?;
                        c.apps
                    }
                }
            };
            write_dir(&out, &apps)?;
            println!("{} apps written to {}", apps.len(), out.display());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_INTERNAL)
            }
        }
    }
}
