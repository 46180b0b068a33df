use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use modal_core::decide::{self, Budget, SatResult, Validity};
use modal_core::kripke::{FrameClass, Model, World};
use modal_core::onevar::{self, EmbeddingContext};
use modal_core::qbf::{self, Qbf};
use modal_core::suites::{self, SuiteConfig};
use modal_core::{parse, Formula};

/// Modal satisfiability, the QBF reduction and the single-variable
/// embedding, from the command line.
#[derive(Parser, Debug)]
#[command(name = "modalred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct FormulaInput {
    /// Formula text, e.g. "p1 & <>[]~p1".
    #[arg(long, value_name = "FORMULA")]
    formula: Option<String>,

    /// File holding the formula.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct QbfInput {
    /// QBF text, e.g. "A p1 E p2 . (p1 -> p2) & (p2 -> p1)".
    #[arg(long, value_name = "QBF")]
    qbf: Option<String>,

    /// File holding the QBF.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Limits {
    /// Largest witness model the tableau may return.
    #[arg(long, value_name = "INT", default_value_t = Budget::default().max_worlds)]
    max_worlds: usize,

    /// Wall-clock limit in seconds.
    #[arg(long, value_name = "SECS", default_value_t = 60)]
    timeout: u64,
}

impl Limits {
    fn budget(&self) -> Budget {
        Budget {
            max_worlds: self.max_worlds,
            timeout: Duration::from_secs(self.timeout),
            ..Budget::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a formula in canonical form.
    Fmt {
        #[command(flatten)]
        input: FormulaInput,

        /// Expand `true`, `~`, `&`, `|` and `<>` into `false`, `->` and `[]`.
        #[arg(long)]
        core: bool,
    },
    /// Model-check a formula.
    Check {
        #[command(flatten)]
        input: FormulaInput,

        /// Model file.
        #[arg(long, value_name = "FILE")]
        model: PathBuf,

        /// Print `true` or `false` for this world instead of the list of
        /// worlds where the formula holds.
        #[arg(long, value_name = "INT")]
        world: Option<World>,
    },
    /// Decide satisfiability on a frame class.
    Sat {
        #[command(flatten)]
        input: FormulaInput,

        /// K, KD, T, KB, KDB or KTB.
        #[arg(long, value_name = "CLASS")]
        class: FrameClass,

        /// Write the witness model here instead of stdout; an unsatisfiable
        /// formula then exits with status 1.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,

        #[command(flatten)]
        limits: Limits,
    },
    /// Decide validity on a frame class.
    Valid {
        #[command(flatten)]
        input: FormulaInput,

        #[arg(long, value_name = "CLASS")]
        class: FrameClass,

        /// Write the countermodel here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,

        #[command(flatten)]
        limits: Limits,
    },
    /// Evaluate a QBF.
    QbfEval {
        #[command(flatten)]
        input: QbfInput,
    },
    /// Print the modal formula f(theta) of a QBF.
    QbfTranslate {
        #[command(flatten)]
        input: QbfInput,

        /// Print t(theta) = ~f(theta) instead.
        #[arg(long)]
        negate: bool,
    },
    /// Build the quantifier-tree model of a true QBF (root is world 0).
    QbfWitness {
        #[command(flatten)]
        input: QbfInput,

        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Print the single-variable image star(phi).
    OnevarStar {
        #[command(flatten)]
        input: FormulaInput,

        /// Largest variable index; defaults to the formula's own.
        #[arg(long, value_name = "INT")]
        n: Option<u32>,
    },
    /// Print embed(phi) = ~star(~phi).
    OnevarEmbed {
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Emit the chain model M_k.
    OnevarChain {
        #[arg(long, value_name = "INT", value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
        k: usize,

        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Attach M_1..M_{n+1} to a model in which p_{n+1} holds everywhere.
    OnevarAttach {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,

        #[arg(long, value_name = "INT")]
        n: u32,

        /// K, KB or KTB.
        #[arg(long, value_name = "CLASS")]
        class: FrameClass,

        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run the verification suites.
    Selftest {
        /// Run only this suite.
        #[arg(long, value_name = "NAME")]
        suite: Option<String>,

        /// Seed for the random formula corpus.
        #[arg(long, value_name = "INT", default_value_t = 0)]
        seed: u64,
    },
}

/// Exit status 1 for a negative answer, 2 for bad input.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Display) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn domain(message: impl Display) -> Failure {
    Failure {
        code: 1,
        message: message.to_string(),
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_formula(input: &FormulaInput) -> Result<Formula, Failure> {
    let text = match (&input.formula, &input.input) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => read(p)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    parse(text.trim()).map_err(|e| usage(format!("formula: {e}")))
}

fn load_qbf(input: &QbfInput) -> Result<Qbf, Failure> {
    let text = match (&input.qbf, &input.input) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => read(p)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    qbf::parse_qbf(text.trim()).map_err(|e| usage(format!("qbf: {e}")))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    Model::parse_file(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Writes a model to `out`, or to stdout after `header`.
fn emit_model(header: &str, model: &Model, out: Option<&Path>) -> Outcome {
    print!("{header}");
    match out {
        Some(path) => write(path, &model.to_file_string()),
        None => {
            print!("{}", model.to_file_string());
            Ok(())
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Fmt { input, core } => {
            let f = load_formula(&input)?;
            println!("{}", if core { f.to_core() } else { f });
        }
        Command::Check { input, model, world } => {
            let f = load_formula(&input)?;
            let m = load_model(&model)?;
            match world {
                Some(w) => println!("{}", m.model_check(w, &f).map_err(usage)?),
                None => {
                    let ext = m.extension(&f);
                    let worlds: Vec<String> = ext.ones().map(|w| w.to_string()).collect();
                    println!("{}", worlds.join(" "));
                }
            }
        }
        Command::Sat { input, class, out, limits } => {
            let f = load_formula(&input)?;
            match decide::sat_decide(&f, class, limits.budget()).map_err(usage)? {
                SatResult::Sat { model, world } => {
                    emit_model(&format!("SAT\n# world {world}\n"), &model, out.as_deref())?;
                }
                SatResult::Unsat(_) => {
                    println!("UNSAT");
                    if out.is_some() {
                        return Err(domain("unsatisfiable, no witness written"));
                    }
                }
                SatResult::Inconclusive { worlds_searched, complete_bound } => {
                    println!("UNKNOWN");
                    return Err(domain(format!(
                        "search stopped after {worlds_searched} worlds (a complete search may need up to {complete_bound})"
                    )));
                }
            }
        }
        Command::Valid { input, class, out, limits } => {
            let f = load_formula(&input)?;
            match decide::valid(&f, class, limits.budget()).map_err(usage)? {
                Validity::Valid => println!("VALID"),
                Validity::Invalid { countermodel, world } => {
                    emit_model(&format!("INVALID\n# world {world}\n"), &countermodel, out.as_deref())?;
                }
                Validity::Inconclusive => {
                    println!("UNKNOWN");
                    return Err(domain("search budget exhausted"));
                }
            }
        }
        Command::QbfEval { input } => {
            println!("{}", qbf::eval_qbf(&load_qbf(&input)?));
        }
        Command::QbfTranslate { input, negate } => {
            let theta = load_qbf(&input)?;
            let f = if negate {
                qbf::negated_translate(&theta)
            } else {
                qbf::ladner_translate(&theta)
            };
            println!("{f}");
        }
        Command::QbfWitness { input, out } => {
            let theta = load_qbf(&input)?;
            let (model, root) = qbf::witness_model(&theta).map_err(domain)?;
            emit_model(&format!("# root {root}\n"), &model, out.as_deref())?;
        }
        Command::OnevarStar { input, n } => {
            let f = load_formula(&input)?;
            let ctx = n.map_or_else(|| EmbeddingContext::for_formula(&f), EmbeddingContext::new);
            println!("{}", onevar::star(&f, &ctx).map_err(usage)?);
        }
        Command::OnevarEmbed { input } => {
            println!("{}", onevar::embed(&load_formula(&input)?));
        }
        Command::OnevarChain { k, out } => {
            let chain = onevar::build_chain(k);
            let header: String = (1..=k).map(|i| format!("# c{i} {}\n", chain.c_world(i))).collect();
            emit_model(&format!("# root {}\n{header}", chain.root()), chain.model(), out.as_deref())?;
        }
        Command::OnevarAttach { model, n, class, out } => {
            let m = load_model(&model)?;
            let attached = onevar::attach(&m, &EmbeddingContext::new(n), class).map_err(domain)?;
            let roots: String = attached
                .roots
                .iter()
                .enumerate()
                .map(|(i, r)| format!("# r{} {r}\n", i + 1))
                .collect();
            emit_model(&roots, &attached.model, out.as_deref())?;
        }
        Command::Selftest { suite, seed } => {
            let config = SuiteConfig { seed };
            let reports = match suite {
                Some(name) => vec![suites::run_suite(&name, &config).ok_or_else(|| {
                    let known: Vec<&str> = suites::suite_names().collect();
                    usage(format!("unknown suite `{name}` (known: {})", known.join(", ")))
                })?],
                None => suites::run_all(&config),
            };
            let mut failed = 0;
            for report in &reports {
                println!("{}", report.summary());
                eprintln!("{}: {}", report.name, report.timing());
                if !report.passed() {
                    failed += 1;
                }
            }
            if failed > 0 {
                return Err(domain(format!("{failed} suite(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("modalred: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
