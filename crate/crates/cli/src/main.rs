use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use linform_cli::{run, Command, CommandRequest, LambdaMode, OutputFormat};
use linform_core::FunctionalKind;

/// Sidorenko and common linear equations over finite fields.
///
/// Exit status: 0 when the property holds or no witness was found, 1 when a
/// violation was found or the equation classifies negatively, 2 on error.
#[derive(Debug, Parser)]
#[command(name = "linform", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Sidorenko,
    Common,
}

impl From<Kind> for FunctionalKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Sidorenko => FunctionalKind::Sidorenko,
            Kind::Common => FunctionalKind::Common,
        }
    }
}

#[derive(Debug, Args)]
struct Equation {
    /// Equation spec, e.g. "L=1,-2,1; q=5; free=0; b=zero".
    equation: String,

    /// Field spec, when not part of the equation ("q=9", "p=2,m=3").
    #[arg(long)]
    field: Option<String>,

    /// Index of the right-hand side vector.
    #[arg(long)]
    rhs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Decide the Sidorenko and common properties.
    Classify {
        #[command(flatten)]
        eq: Equation,
        /// Exit on this property alone.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Count solutions in a set, or monochromatic solutions of a coloring.
    Count {
        #[command(flatten)]
        eq: Equation,
        #[arg(long, value_name = "FILE", conflicts_with = "coloring")]
        set: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        coloring: Option<PathBuf>,
    },
    /// Evaluate the solution density functional of a function.
    Lambda {
        #[command(flatten)]
        eq: Equation,
        #[arg(long = "fn", value_name = "FILE")]
        function: PathBuf,
        #[arg(long, group = "mode")]
        spectral: bool,
        #[arg(long, group = "mode")]
        brute: bool,
        #[arg(long, group = "mode")]
        both: bool,
    },
    /// Fourier transform of a function file.
    Fourier {
        #[arg(long = "fn", value_name = "FILE")]
        function: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Construct and verify a counterexample function.
    Forge {
        #[command(flatten)]
        eq: Equation,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tries: Option<u64>,
        #[arg(long)]
        c: Option<f64>,
    },
    /// Search subsets or colorings of GF(q)^n for a violation.
    Refute {
        #[command(flatten)]
        eq: Equation,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        /// Random search with this many trials instead of exhaustive search.
        #[arg(long, value_name = "TRIALS")]
        random: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_cells: Option<usize>,
    },
    /// Embed a Hilbert cube of dimension t into the solution set.
    Hilbert {
        #[command(flatten)]
        eq: Equation,
        #[arg(long)]
        t: u32,
    },
}

fn request(cli: Cli) -> CommandRequest {
    let (command, eq) = match &cli.command {
        Cmd::Classify { eq, .. } => (Command::Classify, Some(eq)),
        Cmd::Count { eq, .. } => (Command::Count, Some(eq)),
        Cmd::Lambda { eq, .. } => (Command::Lambda, Some(eq)),
        Cmd::Fourier { .. } => (Command::Fourier, None),
        Cmd::Forge { eq, .. } => (Command::Forge, Some(eq)),
        Cmd::Refute { eq, .. } => (Command::Refute, Some(eq)),
        Cmd::Hilbert { eq, .. } => (Command::Hilbert, Some(eq)),
    };
    let mut req = CommandRequest::new(command, eq.map(|e| e.equation.clone()).unwrap_or_default());
    if let Some(eq) = eq {
        req.field = eq.field.clone();
        req.rhs = eq.rhs;
    }
    req.format = match cli.format {
        Format::Json => OutputFormat::Json,
        Format::Table => OutputFormat::Table,
    };
    match cli.command {
        Cmd::Classify { kind, .. } => req.kind = kind.map(Into::into),
        Cmd::Count { set, coloring, .. } => {
            req.set = set;
            req.coloring = coloring;
        }
        Cmd::Lambda {
            function,
            brute,
            both,
            ..
        } => {
            req.function = Some(function);
            req.lambda_mode = Some(if both {
                LambdaMode::Both
            } else if brute {
                LambdaMode::Brute
            } else {
                LambdaMode::Spectral
            });
        }
        Cmd::Fourier {
            function, inverse, ..
        } => {
            req.function = Some(function);
            req.inverse = inverse;
        }
        Cmd::Forge {
            kind,
            seed,
            tries,
            c,
            ..
        } => {
            req.kind = Some(kind.into());
            req.seed = seed;
            req.tries = tries;
            req.c = c;
        }
        Cmd::Refute {
            kind,
            n,
            random,
            seed,
            max_cells,
            ..
        } => {
            req.kind = Some(kind.into());
            req.n = Some(n);
            req.random = random;
            req.seed = seed;
            req.max_cells = max_cells;
        }
        Cmd::Hilbert { t, .. } => req.t = Some(t),
    }
    req
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("{{\"error\":{{\"kind\":\"Usage\",\"message\":\"{e}\"}}}}");
            return ExitCode::from(2);
        }
    }
    let outcome = run(&request(cli));
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
