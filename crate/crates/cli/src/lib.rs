//! Command-line front end: `check`, `reduce`, `session`, `gen` and `dot`.
//!
//! Exit codes: 0 the checked property holds, 1 it fails, 2 the engines
//! disagree, 64 usage error, 65 malformed input, 66 unreadable file.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use bipolar::bigstep::{acyclic_decide, bigstep_nf_traced, c_correct};
use bipolar::contraction::{connectable_decide, contract_nf, embed, System};
use bipolar::dot::{graph_to_dot, module_to_dot};
use bipolar::dsl::{self, CheckMode, SourceFile};
use bipolar::generate::{gen_random, GenParams};
use bipolar::session::Session;
use bipolar::switching::{acyclic_oracle, connectable_oracle, dr_correct, o_correct_oracle};
use bipolar::Module;
use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_DISAGREE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NOINPUT: i32 = 66;

#[derive(Parser, Debug)]
#[command(
    name = "bipolar",
    version,
    about = "Check, reduce and compose bipolar modules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a correctness property of a module.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::O)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Engine::Rewrite)]
        engine: Engine,
        /// Module or EBM to check; defaults to the last module of the file.
        #[arg(long)]
        module: Option<String>,
    },
    /// Print the normal form of a module.
    Reduce {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Reduction::Bigstep)]
        system: Reduction,
        /// Print every rewrite step.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        module: Option<String>,
    },
    /// Propose the EBMs of each file in turn, committing accepted ones.
    Session {
        file: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        propose: Vec<PathBuf>,
        #[arg(long)]
        module: Option<String>,
    },
    /// Print a random module in the text format.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        cells: usize,
        #[arg(long, default_value_t = 3)]
        max_poles: usize,
        #[arg(long, default_value_t = 3)]
        max_conclusions: usize,
        #[arg(long, default_value_t = 0.3)]
        closure_probability: f64,
        #[arg(long)]
        transitory: bool,
        #[arg(long, default_value = "m")]
        name: String,
    },
    /// Write a Graphviz rendering of a module or of its contraction.
    Dot {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = DotSystem::None)]
        system: DotSystem,
        #[arg(long)]
        module: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    C,
    O,
    Acyclic,
    Connectable,
}

impl From<Mode> for CheckMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::C => CheckMode::C,
            Mode::O => CheckMode::O,
            Mode::Acyclic => CheckMode::Acyclic,
            Mode::Connectable => CheckMode::Connectable,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Rewrite,
    Oracle,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Reduction {
    Bigstep,
    Contract,
    Wcontract,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DotSystem {
    None,
    Contract,
    Wcontract,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

fn load(path: &Path) -> Result<SourceFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_NOINPUT,
        message: format!("{}: {e}", path.display()),
    })?;
    dsl::parse(&text).map_err(|e| Failure::data(format!("{}:{e}", path.display())))
}

fn select(file: &SourceFile, name: Option<&str>, path: &Path) -> Result<(String, Module), Failure> {
    match name {
        Some(n) => file
            .module(n)
            .map(|m| (n.to_owned(), m))
            .ok_or_else(|| Failure::data(format!("{}: no module named `{n}`", path.display()))),
        None => file
            .default_module()
            .ok_or_else(|| Failure::data(format!("{}: no module declared", path.display()))),
    }
}

/// Verdict of the rewriting engines.
pub fn rewrite_verdict(m: &Module, mode: CheckMode) -> Option<bool> {
    match mode {
        CheckMode::C => c_correct(m).ok(),
        CheckMode::O => Some(acyclic_decide(m) && connectable_decide(m, System::Weak)),
        CheckMode::Acyclic => Some(acyclic_decide(m)),
        CheckMode::Connectable => Some(connectable_decide(m, System::Weak)),
    }
}

/// Verdict of the switching oracle.
pub fn oracle_verdict(m: &Module, mode: CheckMode) -> Option<bool> {
    match mode {
        CheckMode::C => dr_correct(m).ok(),
        CheckMode::O => Some(o_correct_oracle(m)),
        CheckMode::Acyclic => Some(acyclic_oracle(m)),
        CheckMode::Connectable => Some(connectable_oracle(m)),
    }
}

fn word(holds: bool) -> &'static str {
    if holds {
        "holds"
    } else {
        "fails"
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure {
        code: EXIT_NOINPUT,
        message: e.to_string(),
    };
    match cli.command {
        Command::Check {
            file,
            mode,
            engine,
            module,
        } => {
            let source = load(&file)?;
            let (name, m) = select(&source, module.as_deref(), &file)?;
            let mode = CheckMode::from(mode);
            let closed_only = || Failure::data(format!("{name}: mode c needs a closed module"));
            let rewrite = match engine {
                Engine::Oracle => None,
                _ => Some(rewrite_verdict(&m, mode).ok_or_else(closed_only)?),
            };
            let oracle = match engine {
                Engine::Rewrite => None,
                _ => Some(oracle_verdict(&m, mode).ok_or_else(closed_only)?),
            };
            let code = match (rewrite, oracle) {
                (Some(r), Some(o)) if r != o => {
                    writeln!(
                        out,
                        "{name} {mode}: engines disagree (rewrite {}, oracle {})",
                        word(r),
                        word(o)
                    )
                    .map_err(io)?;
                    return Ok(EXIT_DISAGREE);
                }
                (Some(v), _) | (None, Some(v)) => v,
                (None, None) => unreachable!("some engine always runs"),
            };
            writeln!(out, "{name} {mode}: {}", word(code)).map_err(io)?;
            Ok(if code { EXIT_HOLDS } else { EXIT_FAILS })
        }
        Command::Reduce {
            file,
            system,
            trace,
            module,
        } => {
            let source = load(&file)?;
            let (_, m) = select(&source, module.as_deref(), &file)?;
            match system {
                Reduction::Bigstep => {
                    let (nf, steps) = bigstep_nf_traced(&m, trace);
                    if trace {
                        let snapshots = steps.snapshots.as_deref().unwrap_or_default();
                        for (i, (r, after)) in steps.steps.iter().zip(snapshots).enumerate() {
                            writeln!(out, "step {}: {r}", i + 1).map_err(io)?;
                            writeln!(out, "  {after}").map_err(io)?;
                        }
                    }
                    writeln!(out, "normal form: {nf}").map_err(io)?;
                }
                Reduction::Contract | Reduction::Wcontract => {
                    let sys = match system {
                        Reduction::Contract => System::Completion,
                        _ => System::Weak,
                    };
                    let mut g = embed(&m);
                    let mut step = 0;
                    while let Some((c, next)) = g.successors(sys).into_iter().next() {
                        step += 1;
                        if trace {
                            writeln!(out, "step {step}: {c}").map_err(io)?;
                        }
                        g = next;
                    }
                    writeln!(out, "normal form:").map_err(io)?;
                    write!(out, "{g}").map_err(io)?;
                    let class = match g.classify() {
                        Ok(c) => format!("{c:?}"),
                        Err(e) => e.to_string(),
                    };
                    writeln!(out, "classification: {class}").map_err(io)?;
                }
            }
            Ok(EXIT_HOLDS)
        }
        Command::Session {
            file,
            propose,
            module,
        } => {
            let source = load(&file)?;
            let (name, m) = select(&source, module.as_deref(), &file)?;
            let Ok(mut session) = Session::new(m) else {
                writeln!(out, "{name} is not o-correct").map_err(io)?;
                return Ok(EXIT_FAILS);
            };
            for path in &propose {
                let proposals = load(path)?;
                for (ebm_name, ebm) in proposals.ebms() {
                    let p = session.propose(ebm).map_err(|e| {
                        Failure::data(format!("{}: {ebm_name}: {e}", path.display()))
                    })?;
                    writeln!(out, "{} {ebm_name}", p.verdict).map_err(io)?;
                    if p.verdict.is_accept() {
                        session = session.commit(p).expect("fresh accepted proposal commits");
                    }
                }
            }
            Ok(EXIT_HOLDS)
        }
        Command::Gen {
            seed,
            cells,
            max_poles,
            max_conclusions,
            closure_probability,
            transitory,
            name,
        } => {
            if !(0.0..=1.0).contains(&closure_probability) {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: "--closure-probability must lie in [0, 1]".into(),
                });
            }
            let m = gen_random(&GenParams {
                seed,
                cells,
                max_poles,
                max_conclusions,
                closure_probability,
                transitory,
            });
            write!(out, "{}", dsl::render_module(&name, &m)).map_err(io)?;
            Ok(EXIT_HOLDS)
        }
        Command::Dot {
            file,
            output,
            system,
            module,
        } => {
            let source = load(&file)?;
            let (_, m) = select(&source, module.as_deref(), &file)?;
            let text = match system {
                DotSystem::None => module_to_dot(&m),
                DotSystem::Contract => graph_to_dot(&contract_nf(&embed(&m), System::Completion)),
                DotSystem::Wcontract => graph_to_dot(&contract_nf(&embed(&m), System::Weak)),
            };
            std::fs::write(&output, text).map_err(|e| Failure {
                code: EXIT_NOINPUT,
                message: format!("{}: {e}", output.display()),
            })?;
            Ok(EXIT_HOLDS)
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{e}");
            return EXIT_USAGE;
        }
        // --help and --version
        Err(e) => {
            let _ = write!(out, "{e}");
            return EXIT_HOLDS;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
