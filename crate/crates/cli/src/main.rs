use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use svrt_cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim() }));
            std::process::exit(2);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
        std::process::exit(1);
    }
}
