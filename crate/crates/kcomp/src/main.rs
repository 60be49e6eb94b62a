use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use kcomp_core::adversary::{prop2_instance, theorem2_instance};
use kcomp_core::instance::{excess_risk, TabularInstance};
use kcomp_core::rate::{fit_rate, mean_by_order};

use kcomp::config::{ExperimentConfig, Generator, ModulusSetting, RobustSection};
use kcomp::experiment::{load_instance, robust_report, run};
use kcomp::format::InstanceFile;
use kcomp::generate::generate;
use kcomp::output::{read_errors, write_run};
use kcomp::{default_class, exit_code, CliError};

#[derive(Parser)]
#[command(name = "kcomp", version, about = "Learning with k-comparison oracles: experiments and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Random,
    Theorem2,
    Prop2,
}

impl From<GeneratorArg> for Generator {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Random => Generator::Random,
            GeneratorArg::Theorem2 => Generator::Theorem2,
            GeneratorArg::Prop2 => Generator::Prop2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Theorem2,
    Prop2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModulusArg {
    Exact,
    Search,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance JSON file.
    GenInstance {
        #[arg(long, value_enum, default_value = "random")]
        generator: GeneratorArg,
        /// Support size (random generator).
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Oracle order the construction is built for (theorem2, prop2).
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Fit the log-log slope of mean estimation error against k.
    FitRate { csv: PathBuf },
    /// Write a lower-bound construction and its excess-risk table.
    Adversary {
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "theorem2")]
        construction: Construction,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve the robust estimation game on one instance.
    Robust {
        #[arg(long, conflicts_with = "generator")]
        instance: Option<PathBuf>,
        #[arg(long, value_enum)]
        generator: Option<GeneratorArg>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "exact")]
        modulus: ModulusArg,
        #[arg(long, default_value_t = 64)]
        grid: u32,
        /// Largest number of canonical queries to enumerate.
        #[arg(long, default_value_t = 10_000)]
        query_cap: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
            .map_err(Into::into),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn instance_json(instance: &TabularInstance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("instance serializes") + "\n"
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::GenInstance { generator, n, k, seed, out } => {
            if n == 0 {
                return Err(CliError::Config("n must be positive".into()).into());
            }
            let instance = generate(generator.into(), n, k, seed)?;
            emit(&instance_json(&instance), out.as_deref())
        }
        Command::Run { config, seed, out, trials } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            if let (Some(path), Some(base)) = (cfg.instance.path.clone(), config.parent()) {
                if path.is_relative() && !path.exists() {
                    cfg.instance.path = Some(base.join(path));
                }
            }
            cfg.validate()?;
            let output = run(&cfg).with_context(|| format!("experiment {}", cfg.experiment.name()))?;
            let manifest = write_run(&cfg, &output, &cfg.out)?;
            for line in &output.summary {
                println!("{line}");
            }
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} files to {}", manifest.files.len(), cfg.out.display());
            Ok(())
        }
        Command::FitRate { csv } => {
            let records = read_errors(&csv)?;
            for (k, m) in mean_by_order(&records) {
                println!("k={k} mean_est_error={m}");
            }
            match fit_rate(&records) {
                Ok(fit) => {
                    println!("slope={} residual={} points={}", fit.slope, fit.residual, fit.points);
                    Ok(())
                }
                Err(e) => {
                    println!("rate undefined");
                    Err(CliError::Core(e).into())
                }
            }
        }
        Command::Adversary { k, construction, out } => {
            std::fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
            let mut table = csv::Writer::from_writer(Vec::new());
            table.write_record(["hypothesis", "utility", "excess_risk"])?;
            match construction {
                Construction::Theorem2 => {
                    let pair = theorem2_instance(k)?;
                    emit(&instance_json(&pair.first), Some(&out.join("instance_u1.json")))?;
                    emit(&instance_json(&pair.second), Some(&out.join("instance_u2.json")))?;
                    for (h, risks) in pair.analytic_risks.iter().enumerate() {
                        for (u, r) in risks.iter().enumerate() {
                            table.write_record([h.to_string(), (u + 1).to_string(), r.to_string()])?;
                        }
                    }
                }
                Construction::Prop2 => {
                    let p2 = prop2_instance(k)?;
                    emit(&instance_json(&p2.instance), Some(&out.join("instance.json")))?;
                    for (h, f) in p2.class.iter().enumerate() {
                        let r = excess_risk(&p2.instance, f, &p2.class)?;
                        table.write_record([h.to_string(), "1".to_string(), r.to_string()])?;
                    }
                }
            }
            let bytes = table.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
            std::fs::write(out.join("risks.csv"), bytes).map_err(|e| CliError::Io(e.to_string()))?;
            println!("wrote construction for k={k} to {}", out.display());
            Ok(())
        }
        Command::Robust { instance, generator, n, seed, k, modulus, grid, query_cap, out } => {
            let inst = match (instance, generator) {
                (Some(path), _) => load_instance(&path)?,
                (None, g) => generate(g.map_or(Generator::Random, Into::into), n, k, seed)?,
            };
            let section = RobustSection {
                modulus: match modulus {
                    ModulusArg::Exact => ModulusSetting::Exact,
                    ModulusArg::Search => ModulusSetting::Search,
                },
                grid,
                query_cap,
                ..RobustSection::default()
            };
            let class = default_class(&inst)?;
            let (report, _) = robust_report(&inst, &class, k, &section)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            emit(&text, out.as_deref())
        }
    }
}
