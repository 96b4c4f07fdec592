use clap::Parser;

use appdemog::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("APPDEMOG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: APPDEMOG_THREADS: {e}");
            std::process::exit(1);
        }
    }
    let result = cli.command.into_invocation().and_then(|inv| execute(&inv));
    match result {
        Ok(summary) => {
            let d = &summary.dataset;
            eprintln!(
                "{} users, {} apps, {:.1} apps/user ({} apps and {} users dropped)",
                d.users, d.apps, d.mean_apps_per_user, d.dropped_apps, d.dropped_users
            );
            for f in &summary.files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            std::process::exit(e.exit_code());
        }
    }
}
