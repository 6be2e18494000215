mod cli;
mod commands;
mod input;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use crate::cli::Cli;
use crate::commands::Ctx;
use crate::input::Inputs;
use crate::output::{BudgetReport, Envelope};

fn execute(cli: &Cli) -> Result<(String, bool)> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t.into()).build_global()?;
    }
    let name = commands::name(&cli.command);
    let mut ctx = Ctx {
        global: &cli.global,
        inputs: Inputs::default(),
    };
    let out = commands::run(&cli.command, &mut ctx)?;
    let envelope = Envelope {
        command: name.to_owned(),
        inputs_digest: ctx.inputs.digest(name),
        result: out.result,
        details: out.details,
        budget_report: BudgetReport {
            limit: cli.global.budget,
            nodes: out.nodes,
            exceeded: out.exceeded,
        },
        seed: out.seed,
    };
    let text = if cli.global.json_pretty {
        serde_json::to_string_pretty(&envelope)?
    } else {
        serde_json::to_string(&envelope)?
    };
    Ok((text, out.definite))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok((text, definite)) => {
            println!("{text}");
            ExitCode::from(if definite { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
