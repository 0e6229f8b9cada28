use std::process::ExitCode;

use clap::Parser;
use fraisse_core::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (text, json, code) = match run(&cli) {
        Ok(r) => (r.to_text(), r.to_json(), r.exit_code),
        Err(e) => {
            eprintln!("error: {e}");
            let v = serde_json::json!({"error": e.to_string(), "exit_code": e.exit_code()});
            (String::new(), format!("{v:#}\n"), e.exit_code())
        }
    };
    print!("{text}");
    if let Some(p) = &cli.json {
        if let Err(e) = std::fs::write(p, json) {
            eprintln!("error: {}: {e}", p.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code as u8)
}
