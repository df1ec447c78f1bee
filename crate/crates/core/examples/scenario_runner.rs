//! Runs a bundled scenario through the same path as the command-line tool.
//!
//! Usage: `cargo run --example scenario_runner -- [name] [command]`

use homsync::scenario::{bundled, run_command, Command, Scenario, BUNDLED};

fn main() -> homsync::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "media_converter_trigger".into());
    let command: Command = args
        .next()
        .unwrap_or_else(|| "jitter-budget".into())
        .parse()
        .unwrap_or_else(|e| panic!("{e}"));
    let Some(text) = bundled(&name) else {
        let names: Vec<_> = BUNDLED.iter().map(|(n, _)| *n).collect();
        panic!("unknown scenario `{name}`; bundled: {names:?}");
    };
    let output = run_command(&Scenario::from_toml_str(text)?, command)?;
    print!("{}", output.summary_text());
    print!("{}", String::from_utf8_lossy(&output.csv));
    Ok(())
}
