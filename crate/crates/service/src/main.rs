use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minilang::{execute, parse, Termination};
use socratic_core::assessment::Mode;
use socratic_core::config::{AssignmentConfig, FunctionalTest};
use socratic_core::dialogue::{BackendDescriptor, Speaker};
use socratic_core::facts::{analyze, sample_inputs, InputDomains};
use socratic_service::error::ServiceError;
use socratic_service::replay::replay_dir;
use socratic_service::service::{Action, Service, ServiceConfig, StartRequest};
use socratic_service::session::{Session, SessionState};
use socratic_service::store::{read_json, SNAPSHOT};
use socratic_service::submission::submission_id;

#[derive(Parser)]
#[command(name = "socratic", version, about = "Code comprehension tutor for MiniLang programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Formative,
    Summative,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Formative => Mode::Formative,
            ModeArg::Summative => Mode::Summative,
        }
    }
}

#[derive(Args)]
struct BackendArgs {
    /// External model endpoint; the rule-based backend is used when unset.
    #[arg(long, env = "SOCRATIC_BACKEND_URL")]
    backend_url: Option<String>,
    #[arg(long, env = "SOCRATIC_BACKEND_MODEL")]
    backend_model: Option<String>,
    #[arg(long, env = "SOCRATIC_BACKEND_TOKEN", hide_env_values = true)]
    backend_token: Option<String>,
    /// Token summative sessions must present.
    #[arg(long, env = "SOCRATIC_PROCTOR_TOKEN", hide_env_values = true)]
    proctor_token: Option<String>,
    #[arg(long, env = "SOCRATIC_MODE", value_enum, default_value = "formative")]
    mode: ModeArg,
}

impl BackendArgs {
    fn config(&self, data_dir: PathBuf) -> ServiceConfig {
        let mut c = ServiceConfig::new(data_dir);
        if let Some(url) = &self.backend_url {
            c.backend = BackendDescriptor::external(url.clone(), self.backend_model.clone());
        }
        c.credential = self.backend_token.clone();
        c.proctor_token = self.proctor_token.clone();
        c.default_mode = self.mode.into();
        c
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the fact record for a program.
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled input sets.
        #[arg(long, default_value_t = 3)]
        inputs: usize,
        #[arg(long, default_value_t = 10_000)]
        step_budget: u64,
    },
    /// Run an interactive session in the terminal.
    Quiz {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of questions.
        #[arg(long, default_value_t = 5)]
        budget: u32,
        /// Assignment configuration with functional tests.
        #[arg(long)]
        assignment: Option<PathBuf>,
        #[arg(long, env = "SOCRATIC_DATA_DIR", default_value = "socratic-data")]
        data_dir: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Print the report of a finished session directory.
    Grade { session_dir: PathBuf },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "SOCRATIC_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "SOCRATIC_DATA_DIR", default_value = "socratic-data")]
        data_dir: PathBuf,
        /// Assignment configurations to register at startup.
        #[arg(long = "assignment")]
        assignments: Vec<PathBuf>,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Rebuild a session from its event log and check it against the snapshot.
    Replay { session_dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Analyze { file, seed, inputs, step_budget } => cmd_analyze(&file, seed, inputs, step_budget),
        Cmd::Quiz { file, seed, budget, assignment, data_dir, backend } => cmd_quiz(
            &file,
            seed,
            budget,
            assignment.as_deref(),
            backend.config(data_dir),
            backend.proctor_token.clone(),
        ),
        Cmd::Grade { session_dir } => cmd_grade(&session_dir),
        Cmd::Serve { port, host, data_dir, assignments, backend } => {
            cmd_serve(&host, port, &assignments, backend.config(data_dir))
        }
        Cmd::Replay { session_dir } => replay_dir(&session_dir).map(|(_, s)| {
            println!("replay ok: {} events, {} verdicts, state {}", s.events, s.verdicts, s.state);
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let detail = e.body().detail;
            if !detail.is_null() {
                eprintln!("{detail}");
            }
            ExitCode::FAILURE
        }
    }
}

fn read_source(file: &Path) -> Result<String, ServiceError> {
    std::fs::read_to_string(file).map_err(|e| ServiceError::Validation(format!("{}: {e}", file.display())))
}

fn cmd_analyze(file: &Path, seed: u64, inputs: usize, budget: u64) -> Result<(), ServiceError> {
    let program = parse(&read_source(file)?).map_err(ServiceError::Lang)?;
    let sets = sample_inputs(&program, seed, inputs, &InputDomains::default());
    let a = analyze(&program, &sets, budget).map_err(|e| ServiceError::Validation(e.to_string()))?;
    println!("{}", a.facts.to_json());
    Ok(())
}

/// Without an assignment file the only test is that the program runs to
/// completion on the first sampled input.
fn adhoc_assignment(source: &str, seed: u64) -> Result<AssignmentConfig, ServiceError> {
    let program = parse(source).map_err(ServiceError::Lang)?;
    let inputs = sample_inputs(&program, seed, 1, &InputDomains::default()).remove(0);
    let trace = execute(&program, &inputs, 10_000);
    let expected = match trace.termination {
        Termination::Normal => trace.output_text(),
        _ => String::from("(program should terminate normally)"),
    };
    let test = FunctionalTest { name: "runs-to-completion".into(), inputs, expected_output: expected };
    let mut c = AssignmentConfig::new(format!("quiz-{}", &submission_id("quiz", source)[..8]), vec![test]);
    c.title = "Terminal quiz".into();
    c.seed = seed;
    Ok(c)
}

fn prompt(label: &str) -> Option<String> {
    print!("{label}");
    io::stdout().flush().ok();
    let mut line = String::new();
    match io::stdin().lock().read_line(&mut line) {
        Ok(0) | Err(_) => None,
        Ok(_) => Some(line.trim().to_owned()),
    }
}

fn cmd_quiz(
    file: &Path,
    seed: u64,
    budget: u32,
    assignment: Option<&Path>,
    cfg: ServiceConfig,
    proctor_token: Option<String>,
) -> Result<(), ServiceError> {
    let source = read_source(file)?;
    let config = match assignment {
        Some(p) => AssignmentConfig::load(p).map_err(|e| ServiceError::Validation(e.to_string()))?,
        None => adhoc_assignment(&source, seed)?,
    };
    let mode = cfg.default_mode;
    let svc = Service::open(cfg)?;
    svc.add_assignment(config.clone())?;
    let sub = svc.submit(&config.assignment_id, &source)?;
    let view = svc.start(StartRequest {
        submission_id: sub.submission_id,
        mode: Some(mode),
        seed,
        question_budget: Some(budget),
        proctor_token,
    })?;
    let id = view.session_id.clone();
    println!("session {id}");
    println!("Answer with an option number, then explain your choice.");
    println!("Start a line with ? to ask the tutor something, or type /quit to stop.\n");
    let mut shown = 0;
    loop {
        let view = svc.view(&id)?;
        for t in &view.transcript[shown..] {
            if t.speaker != Speaker::Student {
                println!("{}\n", t.text);
            }
        }
        shown = view.transcript.len();
        let label = match view.state {
            SessionState::Tier1Pending => "choice> ",
            SessionState::Tier2Pending | SessionState::Scaffolding => "explain> ",
            _ => break,
        };
        let Some(line) = prompt(label) else {
            svc.act(&id, Action::Abort { reason: "input closed".into() })?;
            continue;
        };
        let action = if line == "/quit" {
            Action::Abort { reason: "ended by the student".into() }
        } else if let Some(q) = line.strip_prefix('?') {
            Action::Message { text: q.trim().to_owned() }
        } else if view.state == SessionState::Tier1Pending {
            let qid = view.current_question.as_ref().map(|q| q.question_id.clone()).unwrap_or_default();
            match line.parse::<usize>() {
                Ok(n) if (1..=4).contains(&n) => Action::Tier1 { question_id: qid, choice_index: n - 1 },
                _ => {
                    println!("Enter a number from 1 to 4.");
                    continue;
                }
            }
        } else {
            Action::Tier2 { text: line }
        };
        if let Err(e) = svc.act(&id, action) {
            println!("{e}");
        }
    }
    println!("{}", svc.report(&id)?);
    println!("\nsession directory: {}", svc.store().session_dir(&id).display());
    Ok(())
}

fn cmd_grade(dir: &Path) -> Result<(), ServiceError> {
    let s: Session = read_json(&dir.join(SNAPSHOT))?;
    println!("{}", serde_json::to_string_pretty(&s.report()?)?);
    Ok(())
}

fn cmd_serve(host: &str, port: u16, assignments: &[PathBuf], cfg: ServiceConfig) -> Result<(), ServiceError> {
    let svc = Service::open(cfg)?;
    for p in assignments {
        let c = AssignmentConfig::load(p).map_err(|e| ServiceError::Validation(format!("{}: {e}", p.display())))?;
        svc.add_assignment(c)?;
    }
    let app = socratic_service::http::router(Arc::new(svc));
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port)).await?;
        eprintln!("listening on http://{}/api/v1", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                tokio::signal::ctrl_c().await.ok();
            })
            .await
    })?;
    Ok(())
}
