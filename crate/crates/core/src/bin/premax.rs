use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use premax::closure::{iterate_closure, Verdict};
use premax::io::{
    read_pseudo_orbit_csv, read_set_csv, read_text, to_json, trace_csv, write_set_csv, write_text,
    ErrorClass, ExperimentConfig, Failure,
};
use premax::maximality::local_product_check;
use premax::shadowing::{exact_shadow_linear, newton_shadow, shadow_operator_t, NewtonOptions};
use premax::suite::{battery, battery_settings, crovisier_run, run_suite, write_suite};
use premax::symbolic::{
    is_locally_maximal, odd_run_witness, sft_closure, stabilization_check, SubshiftPresentation,
};

/// Thread count for the worker pool; nothing else is read from the environment.
const THREADS_VAR: &str = "PREMAX_THREADS";

#[derive(Parser)]
#[command(name = "premax", version, about = "Shadowing closures, local maximality and symbolic checks on toral maps")]
struct Cli {
    /// TOML config; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for result files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    resolution: Option<f64>,
    #[arg(long, global = true)]
    u_radius: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    membership_tol: Option<f64>,
    #[arg(long, global = true)]
    kmax: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_cycle_len: Option<usize>,
    #[arg(long, global = true)]
    n_paths: Option<usize>,
    #[arg(long, global = true)]
    path_len: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Closed form on linear maps, Newton otherwise.
    Operator,
    Newton,
    Linear,
}

#[derive(Clone, Copy, ValueEnum)]
enum SftQuery {
    Language,
    Closure,
    Maximal,
    Stabilization,
}

#[derive(Subcommand)]
enum Command {
    /// Shadow a pseudo-orbit read from CSV (`j,x0,x1,…`).
    Shadow {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        periodic: bool,
        #[arg(long, value_enum, default_value = "operator")]
        method: Method,
    },
    /// Iterate the shadowing closure from a CSV net or a battery case.
    Closure {
        #[arg(long, conflicts_with = "case")]
        input: Option<PathBuf>,
        /// Name of a battery case, e.g. `homoclinic_loop`.
        #[arg(long)]
        case: Option<String>,
    },
    /// Language, closure and local-maximality queries on a presentation file.
    Sft {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "maximal")]
        query: SftQuery,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Bracket check of a CSV net.
    Maximality {
        #[arg(long)]
        input: PathBuf,
    },
    /// Grid set of the four-torus example with escape diagnostics.
    Crovisier {
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        v_cells: Option<f64>,
        #[arg(long)]
        q_period: Option<u32>,
        #[arg(long)]
        n_iter: Option<usize>,
    },
    /// Run the whole battery and write the report tree.
    Suite,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_toml(&read_text(p)?)?,
        None => ExperimentConfig::default(),
    };
    let o = &cli.overrides;
    macro_rules! set {
        ($($flag:ident => $($field:ident).+),* $(,)?) => {
            $(if let Some(v) = o.$flag { cfg.$($field).+ = v; })*
        };
    }
    set!(
        delta => delta,
        epsilon => epsilon,
        resolution => resolution,
        u_radius => u_radius,
        max_iter => max_iter,
        kmax => kmax,
        seed => sampling.seed,
        max_cycle_len => sampling.max_cycle_len,
        n_paths => sampling.n_paths,
        path_len => sampling.path_len,
    );
    if o.membership_tol.is_some() {
        cfg.membership_tol = o.membership_tol;
    }
    if let Command::Crovisier {
        depth,
        v_cells,
        q_period,
        n_iter,
    } = &cli.command
    {
        let c = &mut cfg.crovisier;
        c.depth = depth.unwrap_or(c.depth);
        c.v_cells = v_cells.unwrap_or(c.v_cells);
        c.q_period = q_period.unwrap_or(c.q_period);
        c.n_iter = n_iter.unwrap_or(c.n_iter);
    }
    if let Some(dir) = &cli.out {
        cfg.output.dir = Some(dir.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `name` under the output directory when one is configured.
fn emit(cfg: &ExperimentConfig, name: &str, text: &str) -> Result<(), Failure> {
    if let Some(dir) = &cfg.output.dir {
        write_text(Path::new(dir).join(name), text)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(String, ExitCode), Failure> {
    let cfg = load_config(cli)?;
    let ok = ExitCode::SUCCESS;
    match &cli.command {
        Command::Shadow {
            input,
            periodic,
            method,
        } => {
            let sys = cfg.build_system()?;
            let po = read_pseudo_orbit_csv(&sys, &read_text(input)?, *periodic)?;
            let res = match method {
                Method::Operator => shadow_operator_t(&sys, &po),
                Method::Newton => newton_shadow(&sys, &po, NewtonOptions::default()),
                Method::Linear => exact_shadow_linear(sys.linear(), &po),
            }?;
            let text = to_json(&res)?;
            emit(&cfg, "shadow.json", &text)?;
            Ok((text, ok))
        }
        Command::Closure { input, case } => {
            let (sys, lambda0, params) = match (input, case) {
                (Some(p), _) => (
                    cfg.build_system()?,
                    read_set_csv(&read_text(p)?, cfg.resolution, "input")?,
                    cfg.closure_params(),
                ),
                (None, Some(name)) => {
                    let c = battery(&battery_settings(&cfg), cfg.sampling.seed)
                        .into_iter()
                        .find(|c| &c.name == name)
                        .ok_or_else(|| Failure::new(ErrorClass::Input, format!("unknown case '{name}'")))?;
                    (c.system, c.lambda0, c.params)
                }
                (None, None) => {
                    return Err(Failure::new(ErrorClass::Input, "closure needs --input or --case"))
                }
            };
            let trace = iterate_closure(&sys, &lambda0, &params)?;
            let text = to_json(&trace)?;
            emit(&cfg, "trace.json", &text)?;
            emit(&cfg, "trace.csv", &trace_csv(&trace))?;
            emit(&cfg, "final_set.csv", &write_set_csv(trace.final_set()))?;
            let code = match trace.verdict {
                Verdict::BudgetExhausted => ExitCode::from(ErrorClass::Budget.code() as u8),
                _ => ok,
            };
            Ok((text, code))
        }
        Command::Sft { input, query, k } => {
            let pres: SubshiftPresentation = read_text(input)?.parse()?;
            let value = match query {
                SftQuery::Language => {
                    let words: Vec<String> = pres
                        .language(*k)?
                        .iter()
                        .map(|w| w.iter().map(|s| s.to_string()).collect())
                        .collect();
                    json!({ "k": k, "words": words })
                }
                SftQuery::Closure => {
                    let t = sft_closure(&pres, *k)?;
                    emit(&cfg, "closure.sft", &t.to_string())?;
                    json!({ "k": k, "sft": t.to_string() })
                }
                SftQuery::Stabilization => {
                    json!({ "k": k, "stabilizes": stabilization_check(&pres, *k)? })
                }
                SftQuery::Maximal => {
                    let r = is_locally_maximal(&pres, cfg.kmax)?;
                    let odd = match r.k {
                        Some(_) => None,
                        None => odd_run_witness(&pres, cfg.kmax)?.map(|w| w.to_string()),
                    };
                    let message = match r.k {
                        Some(k) => format!("SFT at window {k}"),
                        None => format!("not SFT up to kmax {}", cfg.kmax),
                    };
                    json!({ "k": r.k, "kmax": r.kmax, "message": message,
                            "witnesses": r.witnesses.iter().map(|(k, w)| json!({"k": k, "word": w.to_string()})).collect::<Vec<_>>(),
                            "odd_run_witness": odd })
                }
            };
            let text = to_json(&value)?;
            emit(&cfg, "sft.json", &text)?;
            Ok((text, ok))
        }
        Command::Maximality { input } => {
            let sys = cfg.build_system()?;
            let set = read_set_csv(&read_text(input)?, cfg.resolution, "input")?;
            let report = local_product_check(&sys, &set, cfg.epsilon, cfg.delta, cfg.membership_tol());
            let text = to_json(&report)?;
            emit(&cfg, "lps.json", &text)?;
            Ok((text, ok))
        }
        Command::Crovisier { .. } => {
            let run = crovisier_run(&cfg.crovisier)?;
            emit(&cfg, "grid.json", &to_json(&run.grid)?)?;
            let text = to_json(&run)?;
            emit(&cfg, "crovisier.json", &text)?;
            Ok((text, ok))
        }
        Command::Suite => {
            let report = run_suite(&cfg)?;
            if let Some(dir) = &cfg.output.dir {
                write_suite(&report, &cfg, dir)?;
            }
            Ok((report.summary_text(), ok))
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::new(ErrorClass::Input, format!("{THREADS_VAR} must be a positive integer (got '{v}')")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::new(ErrorClass::Input, e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(&cli)) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(f) => {
            println!("{}", f.to_json());
            ExitCode::from(f.code as u8)
        }
    }
}
