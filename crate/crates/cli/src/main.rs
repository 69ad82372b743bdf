mod args;
mod bench;
mod summary;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bnlearn::evalgen::{confusion, forward_sample, inject_noise, prior_sweep, random_bn, random_dag, standard_sweep};
use bnlearn::sampler::{run_mcmc, seeded_rng, STREAM_NOISE, STREAM_PARAMETERS, STREAM_SAMPLES, STREAM_STRUCTURE};
use bnlearn::scoring::{build_score_cache, Hyperparams};
use bnlearn::{io as formats, PriorMatrix, ScoreCache};
use clap::Parser;

use crate::args::{Cli, Command, EvalArgs, GenerateArgs, LearnArgs};
use crate::summary::{ConfigEcho, RunSummary};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: bnlearn::Error },
    #[error(transparent)]
    Core(#[from] bnlearn::Error),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        let core = match self {
            CliError::Usage(_) => return 2,
            CliError::Io(_) => return 3,
            CliError::File { source, .. } => source,
            CliError::Core(e) => e,
        };
        match core {
            bnlearn::Error::Capacity { .. } => 4,
            bnlearn::Error::Config(_) | bnlearn::Error::Probability(_) => 2,
            _ => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Learn(a) => learn(&a),
        Command::Eval(a) => eval(&a),
        Command::Bench(a) => bench::run(&a).map_err(CliError::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::File { path: path.to_path_buf(), source: e.into() })
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::File { path: path.to_path_buf(), source: e.into() })
}

fn in_file<T>(path: &Path, r: bnlearn::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

fn generate(a: &GenerateArgs) -> CliResult<()> {
    let n = a.nodes as usize;
    if !(0.0..=1.0).contains(&a.edge_prob) {
        return Err(CliError::Usage(format!("--edge-prob {} outside [0, 1]", a.edge_prob)));
    }
    if let Some(p) = a.noise.filter(|p| !(0.0..=1.0).contains(p)) {
        return Err(CliError::Usage(format!("--noise {p} outside [0, 1]")));
    }
    fs::create_dir_all(&a.out)?;
    let dag = random_dag(n, a.max_parents, a.edge_prob, &mut seeded_rng(a.seed, STREAM_STRUCTURE));
    let bn = random_bn(dag, vec![a.states as usize; n], a.concentration, &mut seeded_rng(a.seed, STREAM_PARAMETERS))?;
    let data = forward_sample(&bn, a.samples, &mut seeded_rng(a.seed, STREAM_SAMPLES));

    let path = a.out.join("truth.edges");
    in_file(&path, formats::write_edges(bn.dag(), create(&path)?))?;
    let path = a.out.join("truth.cpt");
    in_file(&path, formats::write_cpts(&bn, create(&path)?))?;
    let path = a.out.join("data.csv");
    in_file(&path, formats::write_dataset(&data, create(&path)?))?;
    if let Some(p) = a.noise {
        let noisy = inject_noise(&data, p, &mut seeded_rng(a.seed, STREAM_NOISE))?;
        let path = a.out.join("data_noisy.csv");
        in_file(&path, formats::write_dataset(&noisy, create(&path)?))?;
    }
    eprintln!("{} nodes, {} edges, {} rows written to {}", n, bn.dag().edge_count(), a.samples, a.out.display());
    Ok(())
}

fn read_priors(path: Option<&PathBuf>, n: usize) -> CliResult<PriorMatrix> {
    match path {
        Some(p) => in_file(p, formats::read_priors(open(p)?, n)),
        None => Ok(PriorMatrix::neutral(n)),
    }
}

fn learn(a: &LearnArgs) -> CliResult<()> {
    let cfg = a.run.config();
    cfg.validate()?;
    let data = in_file(&a.data, formats::read_dataset(open(&a.data)?))?;
    let priors = read_priors(a.priors.as_ref(), data.num_nodes())?;
    let out = run_mcmc::<f64>(&data, &cfg, &priors)?;

    fs::create_dir_all(&a.out)?;
    let echo = ConfigEcho::new(&cfg, a.data.display().to_string(), a.priors.as_ref().map(|p| p.display().to_string()));
    let summary = RunSummary::new(echo, data.num_rows(), &out);
    let path = a.out.join("summary.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, &summary).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    let path = a.out.join("trace.csv");
    in_file(&path, formats::write_trace(&out.trace, create(&path)?))?;
    let path = a.out.join("best.edges");
    in_file(&path, formats::write_edges(&out.best().dag, create(&path)?))?;
    eprintln!(
        "best score {:.6} with {} edges, acceptance rate {:.3}",
        summary.best_score,
        summary.best_edges.len(),
        summary.acceptance_rate
    );
    Ok(())
}

const METRICS_HEADER: &str = "config,tp,fp,fn,tn,tp_rate,fp_rate,score,runtime";

fn eval(a: &EvalArgs) -> CliResult<()> {
    let truth = in_file(&a.truth, formats::read_edges(open(&a.truth)?, None))?;
    let mut lines = vec![METRICS_HEADER.to_string()];
    if a.sweep {
        let data_path = a.data.as_ref().expect("clap requires --data with --sweep");
        let data = in_file(data_path, formats::read_dataset(open(data_path)?))?;
        if data.num_nodes() != truth.num_nodes() {
            return Err(bnlearn::Error::NodeCountMismatch(data.num_nodes(), truth.num_nodes()).into());
        }
        let cfg = a.run.config();
        cfg.validate()?;
        let started = Instant::now();
        let cache: ScoreCache<f64> = build_score_cache(&data, &Hyperparams::from(&cfg), cfg.max_parents, cfg.memory_cap)?;
        eprintln!("score cache built in {:.3}s", started.elapsed().as_secs_f64());
        for row in prior_sweep(&cache, &truth, &cfg, &standard_sweep())? {
            let c = row.counts;
            lines.push(format!(
                "{},{},{},{},{},{},{},{},{}",
                row.config.label(),
                c.tp,
                c.fp,
                c.fn_,
                c.tn,
                c.tp_rate(),
                c.fp_rate(),
                row.score,
                row.runtime_secs
            ));
        }
    } else {
        let path = a.learned.as_ref().expect("clap requires --learned without --sweep");
        let learned = in_file(path, formats::read_edges(open(path)?, Some(truth.num_nodes())))?;
        let c = confusion(&learned, &truth)?;
        lines.push(format!("learned,{},{},{},{},{},{},,", c.tp, c.fp, c.fn_, c.tn, c.tp_rate(), c.fp_rate()));
    }
    let text = lines.join("\n") + "\n";
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
