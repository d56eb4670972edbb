use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use pmlab::acceptance;
use pmlab::harness::{export_csv, read_samples, resolve_run, run_test_case, ConfigFile, SEED_ENV};
use pmlab::kde::{select_bandwidth, BandwidthMethod, BandwidthOptions, SpreadRule};
use pmlab::relaxation::EnoTables;
use pmlab::{Error, Result};

#[derive(Parser)]
#[command(name = "pmlab", version, about = "Particle and relaxation solvers for singular porous-media equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a test case and write CSV output.
    Run {
        /// barenblatt, tc1, tc2, tc3, tc4 or tc5.
        #[arg(long)]
        case: Option<String>,
        /// paper or desk.
        #[arg(long)]
        scale: Option<String>,
        /// Comma-separated subset of particle, relaxation, exact.
        #[arg(long)]
        methods: Option<String>,
        /// Overrides PML_SEED and the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key = value` file; flags take precedence over it.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Select a kernel bandwidth for the samples in a CSV file.
    Bandwidth {
        #[arg(long)]
        input: PathBuf,
        /// silverman or solve-the-equation.
        #[arg(long, default_value = "solve-the-equation")]
        method: String,
        #[arg(long)]
        robust: bool,
    },
    /// Print the ENO interpolation and derivative tables.
    EnoTables {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        dx: f64,
    },
    /// Run the acceptance suite.
    Validate {
        /// Comma-separated criterion numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(&e, Error::Config(m) if m.contains("--case")) {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(run) = cmd.find_subcommand_mut("run") {
                    eprintln!("{}", run.render_usage());
                }
            }
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run { case, scale, methods, seed, out, config } => {
            let file = match &config {
                Some(p) => ConfigFile::load(p)?,
                None => ConfigFile::default(),
            };
            let mut flags = Vec::new();
            let mut push = |k: &'static str, v: Option<String>| {
                if let Some(v) = v {
                    flags.push((k, v));
                }
            };
            push("case", case);
            push("scale", scale);
            push("methods", methods);
            push("seed", seed.map(|s| s.to_string()));
            push("out", out.map(|p| p.display().to_string()));
            let env_seed = std::env::var(SEED_ENV).ok();
            let run = resolve_run(file, env_seed.as_deref(), &flags)?;
            let report = run_test_case(&run.case, &run.methods, run.seed)?;
            let files = export_csv(&report, &run.out)?;
            println!(
                "{} ({} scale), seed {}, methods {}",
                run.case.id,
                run.case.scale.name(),
                run.seed,
                run.methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
            );
            if let Some(last) = report.errors.last() {
                for ((a, b), (l1, l2)) in report.pairs.iter().zip(&last.values) {
                    println!("  t={:.4}  {a} vs {b}: L1 {l1:.4e}  L2 {l2:.4e}", last.time);
                }
            }
            for f in files {
                println!("  wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bandwidth { input, method, robust } => {
            let xs = read_samples(&input)?;
            let method = match method.to_ascii_lowercase().as_str() {
                "silverman" => BandwidthMethod::Silverman,
                "solve-the-equation" | "ste" => BandwidthMethod::SolveTheEquation,
                other => return Err(Error::Config(format!("unknown --method '{other}'"))),
            };
            let opts = BandwidthOptions {
                method,
                spread: if robust { SpreadRule::Robust } else { SpreadRule::StdDev },
                ..Default::default()
            };
            let r = select_bandwidth(&xs, &opts)?;
            println!("n              {}", xs.len());
            println!("epsilon        {:.10e}", r.epsilon);
            println!("h1             {:.10e}", r.h1);
            println!("h2             {:.10e}", r.h2);
            println!("curvature_norm {:.10e}", r.curvature_norm);
            println!("iterations     {}", r.iterations);
            println!("method         {}", r.method.name());
            Ok(ExitCode::SUCCESS)
        }
        Command::EnoTables { k, dx } => {
            let t = EnoTables::new(k, dx)?;
            let show = |name: &str, rows: &[Vec<f64>]| {
                println!("{name}:");
                for (r, row) in rows.iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
                    println!("  r={r}: [{}]", cells.join(", "));
                }
            };
            show("C", t.c());
            show("D", t.d());
            show("Dbar", t.dbar());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { criteria } => {
            let scratch = std::env::temp_dir().join(format!("pmlab-validate-{}", std::process::id()));
            let results = acceptance::run_selected(&criteria, &scratch);
            let _ = std::fs::remove_dir_all(&scratch);
            let mut ok = true;
            for r in &results {
                println!("{r}");
                ok &= r.passed;
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
