//! `examd`: administrator command line.
//!
//! Exit status is 0 on success, 1 on a domain failure (bad data, missing
//! user, integrity error) and 2 on a usage error.

mod commands;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "examd",
    version,
    about = "Online examination server and admin tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct StoreArg {
    /// Record store file.
    #[arg(long, env = "EXAMD_STORE", default_value = "store.dat")]
    store: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP server.
    Serve(ServeArgs),
    /// Manage accounts.
    #[command(subcommand)]
    User(UserCommand),
    /// Manage the question bank.
    #[command(subcommand)]
    Questions(QuestionsCommand),
    /// Print result tables and chart data.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Args)]
struct ServeArgs {
    /// Address to listen on; use 0.0.0.0:PORT to serve a lab network.
    #[arg(long, env = "EXAMD_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    #[command(flatten)]
    store: StoreArg,
    /// Question bank (JSON array) imported at startup.
    #[arg(long, env = "EXAMD_BANK")]
    bank: Option<PathBuf>,
    /// Exam length in seconds.
    #[arg(long, default_value_t = 3600)]
    duration_seconds: u64,
    /// Questions per exam, spread evenly over the five categories.
    #[arg(long, default_value_t = 50)]
    questions: u32,
    /// Points per correct answer [default: 100 / questions].
    #[arg(long)]
    weight: Option<u32>,
    /// Built web client to serve under `/`.
    #[arg(long, env = "EXAMD_STATIC_DIR")]
    static_dir: Option<PathBuf>,
    /// PBKDF2 iterations for accounts created through the API.
    #[arg(long, default_value_t = examd_core::PasswordPolicy::default().iterations)]
    hash_iterations: u32,
}

#[derive(Subcommand)]
enum UserCommand {
    /// Create an account and print its one-time password.
    Add {
        first_name: String,
        last_name: String,
        /// Create an administrator instead of a candidate.
        #[arg(long)]
        admin: bool,
        #[command(flatten)]
        store: StoreArg,
        /// PBKDF2 iterations for the password digest.
        #[arg(long, default_value_t = examd_core::PasswordPolicy::default().iterations)]
        hash_iterations: u32,
    },
    /// Remove a candidate account.
    Rm {
        username: String,
        #[command(flatten)]
        store: StoreArg,
    },
}

#[derive(Subcommand)]
enum QuestionsCommand {
    /// Import a JSON question bank; invalid questions are listed and skipped.
    Import {
        file: PathBuf,
        #[command(flatten)]
        store: StoreArg,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Scores per category, final score and time for every result.
    Results {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long)]
        csv: bool,
    },
    /// Best and poor subjects per candidate.
    Skills {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long)]
        csv: bool,
    },
    /// Long-format CSV for plotting per-candidate scores.
    Chart {
        #[command(flatten)]
        store: StoreArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(a) => commands::serve(commands::ServeOptions {
            listen: a.listen,
            store: a.store.store,
            bank: a.bank,
            duration_secs: a.duration_seconds,
            questions: a.questions,
            weight: a.weight,
            static_dir: a.static_dir,
            hash_iterations: a.hash_iterations,
        }),
        Command::User(UserCommand::Add {
            first_name,
            last_name,
            admin,
            store,
            hash_iterations,
        }) => commands::user_add(
            &store.store,
            &first_name,
            &last_name,
            admin,
            hash_iterations,
        ),
        Command::User(UserCommand::Rm { username, store }) => {
            commands::user_rm(&store.store, &username)
        }
        Command::Questions(QuestionsCommand::Import { file, store }) => {
            commands::import_questions(&store.store, &file)
        }
        Command::Report(ReportCommand::Results { store, csv }) => {
            commands::report_results(&store.store, csv)
        }
        Command::Report(ReportCommand::Skills { store, csv }) => {
            commands::report_skills(&store.store, csv)
        }
        Command::Report(ReportCommand::Chart { store }) => commands::report_chart(&store.store),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("examd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
