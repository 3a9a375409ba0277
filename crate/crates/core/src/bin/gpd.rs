use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gpd_core::io::{generate_random, parse_generator_spec, serialize, InputError, Instance};
use gpd_core::suite::{run_suite, Command, SuiteOptions, Tolerances};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Check finite groupoid instances: positive type and conditionally
/// negative type functions, their GNS data, the convolution algebra,
/// correspondences and cocycle Dirichlet forms.
#[derive(Debug, Parser)]
#[command(name = "gpd", version)]
struct Cli {
    /// validate, check-pt, check-cnt, gns-pt, gns-cnt, schoenberg, norm,
    /// correspondence-verify, functor-verify, sauvageot-verify, all, or
    /// generate (print the generated document instead of checking it)
    command: String,

    /// Instance file, `-` for stdin, or `gen:KIND:SIZE` with KIND one of
    /// pair, group, transformation, random
    input: String,

    /// Absolute tolerance for identities
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    /// Relative tolerance for norm identities
    #[arg(long, default_value_t = 1e-7)]
    rel_tol: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,

    /// Number of generated instances (generator inputs only)
    #[arg(long, default_value_t = 1)]
    instances: usize,

    /// Function to check instead of the command's default
    #[arg(long)]
    function: Option<String>,
}

fn load(cli: &Cli) -> Result<Vec<Instance>, InputError> {
    if let Some((kind, size)) = parse_generator_spec(&cli.input)? {
        if cli.instances == 0 {
            return Err(InputError::Usage("--instances must be positive".into()));
        }
        return (0..cli.instances as u64)
            .map(|k| Instance::from_document(generate_random(kind, size, cli.seed.wrapping_add(k))?))
            .collect();
    }
    if cli.instances != 1 {
        return Err(InputError::Usage("--instances applies to generator inputs only".into()));
    }
    let mut text = String::new();
    if cli.input == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(|e| InputError::Usage(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(&cli.input).map_err(|e| InputError::Usage(format!("{}: {e}", cli.input)))?;
    }
    Ok(vec![Instance::parse(&text)?])
}

fn run(cli: &Cli) -> Result<ExitCode, InputError> {
    if !(cli.tol > 0.0 && cli.rel_tol > 0.0) {
        return Err(InputError::Usage("tolerances must be positive".into()));
    }
    if cli.command == "generate" {
        for inst in load(cli)? {
            print!("{}", serialize(&inst.document));
        }
        return Ok(ExitCode::SUCCESS);
    }
    let command: Command = cli.command.parse()?;
    let instances = load(cli)?;
    let opts = SuiteOptions {
        tol: Tolerances { absolute: cli.tol, relative: cli.rel_tol },
        seed: cli.seed,
        function: cli.function.clone(),
    };
    let report = run_suite(command, &instances, &opts)?;
    match cli.output {
        Format::Json => print!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gpd: {e}");
            ExitCode::from(2)
        }
    }
}
