use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use examd_core::report::{chart_csv, ReportError};
use examd_core::store::{import_questions as import_bank, parse_bank, BankParseError, StoreError};
use examd_core::{
    AuthError, Authenticator, BlueprintError, Category, ExamBlueprint, LabelStyle, PasswordPolicy,
    ResultsTable, Role, SkillsTable, Store, SystemClock,
};
use examd_server::{ServeError, Server, ServerConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Auth(#[from] AuthError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Serve(#[from] ServeError),
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Bank {
        path: PathBuf,
        source: BankParseError,
    },
    #[error("no store at {}", .0.display())]
    NoStore(PathBuf),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type CliResult = Result<(), CliError>;

pub struct ServeOptions {
    pub listen: SocketAddr,
    pub store: PathBuf,
    pub bank: Option<PathBuf>,
    pub duration_secs: u64,
    pub questions: u32,
    pub weight: Option<u32>,
    pub static_dir: Option<PathBuf>,
    pub hash_iterations: u32,
}

/// Even spread over the canonical categories. Without an explicit weight the
/// exam is scored out of 100 where the question count allows it.
pub fn blueprint(
    questions: u32,
    duration_secs: u64,
    weight: Option<u32>,
) -> Result<ExamBlueprint, BlueprintError> {
    let weight = weight.unwrap_or_else(|| (100 / questions.max(1)).max(1));
    ExamBlueprint::balanced(&Category::canonical(), questions, duration_secs, weight)
}

fn policy(iterations: u32) -> Result<PasswordPolicy, CliError> {
    if iterations == 0 {
        return Err(CliError::Usage("--hash-iterations must be positive".into()));
    }
    Ok(PasswordPolicy { iterations })
}

pub fn serve(opts: ServeOptions) -> CliResult {
    let blueprint = blueprint(opts.questions, opts.duration_secs, opts.weight)
        .map_err(|e| CliError::Usage(format!("invalid exam settings: {e}")))?;
    let config = ServerConfig {
        listen: opts.listen,
        store_path: opts.store,
        bank_path: opts.bank,
        blueprint,
        static_dir: opts.static_dir,
        password_policy: policy(opts.hash_iterations)?,
        ..ServerConfig::default()
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Failed(e.to_string()))?;
    rt.block_on(async {
        let server = Server::bind(config, Arc::new(SystemClock)).await?;
        let addr = server.local_addr().map_err(ServeError::Io)?;
        println!("listening on {addr}");
        let _ = std::io::stdout().flush();
        server
            .run(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

/// Opens an existing store; reports never create one.
fn existing_store(path: &Path) -> Result<Store, CliError> {
    if !path.exists() {
        return Err(CliError::NoStore(path.to_path_buf()));
    }
    Ok(Store::open(path)?)
}

pub fn user_add(store: &Path, first: &str, last: &str, admin: bool, iterations: u32) -> CliResult {
    let mut store = Store::open(store)?;
    let auth = Authenticator::new(
        policy(iterations)?,
        examd_core::auth::DEFAULT_TOKEN_TTL_SECS,
    );
    let role = if admin { Role::Admin } else { Role::Candidate };
    let creds = auth.create_account(&mut store, first, last, role)?;
    println!("username: {}", creds.username);
    println!("password: {}", creds.password);
    println!("(the password is shown only once)");
    Ok(())
}

pub fn user_rm(store: &Path, username: &str) -> CliResult {
    let mut store = existing_store(store)?;
    let removed = store.remove_user(username)?;
    println!(
        "removed {} ({} {})",
        removed.username, removed.first_name, removed.last_name
    );
    Ok(())
}

pub fn import_questions(store: &Path, file: &Path) -> CliResult {
    let text = std::fs::read_to_string(file).map_err(|source| CliError::Read {
        path: file.to_path_buf(),
        source,
    })?;
    let bank = parse_bank(&text).map_err(|source| CliError::Bank {
        path: file.to_path_buf(),
        source,
    })?;
    let mut store = Store::open(store)?;
    let report = import_bank(&mut store, bank)?;
    println!("imported {}", report.imported);
    for r in &report.rejected {
        let defects: Vec<String> = r.defects.iter().map(ToString::to_string).collect();
        println!(
            "rejected {} (entry {}): {}",
            r.id,
            r.position + 1,
            defects.join("; ")
        );
    }
    if report.is_clean() {
        Ok(())
    } else if report.imported == 0 && report.rejected.is_empty() {
        Err(CliError::Failed("the bank holds no questions".into()))
    } else {
        Err(CliError::Failed(format!(
            "{} question(s) rejected",
            report.rejected.len()
        )))
    }
}

pub fn report_results(store: &Path, csv: bool) -> CliResult {
    let store = existing_store(store)?;
    let table = ResultsTable::from_results(store.list_results())?;
    if csv {
        print!("{}", table.render_csv()?);
    } else {
        print!("{}", table.render_text());
    }
    Ok(())
}

pub fn report_skills(store: &Path, csv: bool) -> CliResult {
    let store = existing_store(store)?;
    let table = SkillsTable::from_results(store.list_results(), &LabelStyle::default());
    if csv {
        print!("{}", table.render_csv()?);
    } else {
        print!("{}", table.render_text());
    }
    Ok(())
}

pub fn report_chart(store: &Path) -> CliResult {
    let store = existing_store(store)?;
    print!("{}", chart_csv(store.list_results())?);
    Ok(())
}
