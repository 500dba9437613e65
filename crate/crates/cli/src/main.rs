use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mbqc_cli::{
    cmd_analyze, cmd_enumerate, cmd_flip, cmd_reconstruct, cmd_simulate, cmd_wave, parse_labels, render, Check,
    CliError, CliResult, FlipInput, FlipMode, PairArg, SimulateOptions,
};

#[derive(Parser)]
#[command(name = "mbqc", version, about = "Temporal relations of measurement-based quantum computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PairOpts {
    /// Gauge input set, comma-separated 1-based labels.
    #[arg(long, requires = "o_comp", allow_hyphen_values = true)]
    i_gauge: Option<String>,
    /// Computational output set, comma-separated 1-based labels.
    #[arg(long, requires = "i_gauge", allow_hyphen_values = true)]
    o_comp: Option<String>,
}

impl PairOpts {
    fn parse(&self) -> CliResult<Option<PairArg>> {
        match (&self.i_gauge, &self.o_comp) {
            (Some(i), Some(o)) => Ok(Some(PairArg {
                i_gauge: parse_labels(i)?,
                o_comp: parse_labels(o)?,
            })),
            _ => Ok(None),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plane,
    LocalComp,
    Ctc,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Determinism,
    Gauge,
    Randomness,
}

#[derive(Subcommand)]
enum Command {
    /// Normal form, processing relations and temporal order for one pair.
    Analyze {
        /// State file, or `-` for stdin.
        state: PathBuf,
        #[command(flatten)]
        pair: PairOpts,
    },
    /// Every extremal pair as JSON lines.
    Enumerate {
        state: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        /// Emit one record per distinct temporal relation.
        #[arg(long)]
        orders_only: bool,
    },
    /// Plane flip, diagonal-free flip, or self-loop removal at one qubit.
    Flip {
        #[arg(long, conflicts_with = "relations", required_unless_present = "relations")]
        state: Option<PathBuf>,
        #[arg(long)]
        relations: Option<PathBuf>,
        #[command(flatten)]
        pair: PairOpts,
        #[arg(long)]
        qubit: usize,
        #[arg(long, value_enum, default_value = "plane")]
        mode: ModeArg,
    },
    /// Resource state from processing relations or an analyze report.
    Reconstruct { relations: PathBuf },
    /// Check forward cones against the mod-2 Laplacian.
    Wave {
        state: PathBuf,
        #[command(flatten)]
        pair: PairOpts,
    },
    /// Exact statevector simulation.
    Simulate {
        state: PathBuf,
        #[arg(long)]
        relations: Option<PathBuf>,
        #[command(flatten)]
        pair: PairOpts,
        /// Gauge bits, e.g. `01`.
        #[arg(long)]
        gauge: Option<String>,
        #[arg(long)]
        post_select: bool,
        #[arg(long, value_enum)]
        check: Option<CheckArg>,
        #[arg(long)]
        z_bits: Option<String>,
        #[arg(long)]
        r_bits: Option<String>,
    },
}

fn read_input(path: &PathBuf) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::parse(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Analyze { state, pair } => Ok(render(&cmd_analyze(&read_input(&state)?, pair.parse()?.as_ref())?)),
        Command::Enumerate {
            state,
            limit,
            orders_only,
        } => {
            let mut out = String::new();
            for rec in cmd_enumerate(&read_input(&state)?, limit, orders_only)? {
                out.push_str(&rec.to_string());
                out.push('\n');
            }
            Ok(out)
        }
        Command::Flip {
            state,
            relations,
            pair,
            qubit,
            mode,
        } => {
            let mode = match mode {
                ModeArg::Plane => FlipMode::Plane,
                ModeArg::LocalComp => FlipMode::LocalComp,
                ModeArg::Ctc => FlipMode::Ctc,
            };
            let pair = pair.parse()?;
            let report = match (state, relations) {
                (Some(s), _) => {
                    let text = read_input(&s)?;
                    cmd_flip(FlipInput::State { text: &text, pair: pair.as_ref() }, qubit, mode)?
                }
                (None, Some(r)) => cmd_flip(FlipInput::Relations(&read_input(&r)?), qubit, mode)?,
                (None, None) => return Err(CliError::parse("flip needs --state or --relations")),
            };
            Ok(render(&report))
        }
        Command::Reconstruct { relations } => Ok(render(&cmd_reconstruct(&read_input(&relations)?)?)),
        Command::Wave { state, pair } => Ok(render(&cmd_wave(&read_input(&state)?, pair.parse()?.as_ref())?)),
        Command::Simulate {
            state,
            relations,
            pair,
            gauge,
            post_select,
            check,
            z_bits,
            r_bits,
        } => {
            let rel_text = relations.as_ref().map(read_input).transpose()?;
            let pair = pair.parse()?;
            let opts = SimulateOptions {
                relations: rel_text.as_deref(),
                pair: pair.as_ref(),
                gauge: gauge.as_deref(),
                post_select,
                check: check.map(|c| match c {
                    CheckArg::Determinism => Check::Determinism,
                    CheckArg::Gauge => Check::Gauge,
                    CheckArg::Randomness => Check::Randomness,
                }),
                z_bits: z_bits.as_deref(),
                r_bits: r_bits.as_deref(),
            };
            Ok(render(&cmd_simulate(&read_input(&state)?, &opts)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
