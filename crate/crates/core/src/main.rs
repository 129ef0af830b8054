use std::process::ExitCode;

use cdgl::dsl::Overrides;
use cdgl::report::{load_input, parse_window, run_scenario, Scenario};
use clap::Parser;

/// Exact computations with truncated complete dg Lie algebras.
#[derive(Parser, Debug)]
#[command(name = "cdgl", version)]
struct Cli {
    /// check, homology, derivations, mc, gauge, fibration, classify-cell or quasi-iso-suite
    scenario: String,
    /// A model file, or fixture:<name> for a built-in model
    model: String,
    /// Bracket-length truncation N
    #[arg(long)]
    truncate: Option<usize>,
    /// Degree window a..b
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// Exterior power bound for the coalgebra
    #[arg(long)]
    wedge: Option<usize>,
    /// Write the structured report here
    #[arg(long)]
    json: Option<String>,
}

fn run(cli: &Cli) -> Result<i32, cdgl::Error> {
    let scenario: Scenario = cli.scenario.parse()?;
    let window = cli.window.as_deref().map(parse_window).transpose()?;
    let o = Overrides { truncate: cli.truncate, wedge: cli.wedge, window };
    let text = load_input(&cli.model)?;
    let report = run_scenario(scenario, &cli.model, &text, &o)?;
    print!("{}", report.text);
    if let Some(path) = &cli.json {
        std::fs::write(path, report.to_json()).map_err(|e| cdgl::Error::Input(format!("{path}: {e}")))?;
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input() { 2 } else { 1 })
        }
    }
}
