use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sentigraph::pipeline::{self, predict_texts};
use sentigraph::sweep::{self, sweep_table};
use sentigraph::{formats, DataFormat, Error, PipelineConfig, Result};
use sentigraph_core::EmbeddingMode;

#[derive(Parser)]
#[command(name = "sentigraph", version, about = "Sentiment classification from word co-occurrence graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the co-occurrence graph and vocabulary from the training split.
    Graph(Common),
    /// Learn node embeddings from the saved graph.
    Embed(Common),
    /// Train the classifier on the saved embeddings.
    Train(Common),
    /// Score the saved model on the test split and write reports.
    Eval(Common),
    /// Classify text given with --text, or one document per stdin line.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        text: Vec<String>,
    },
    /// Run every stage.
    Run(Common),
    /// Run the pipeline over a grid of settings.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "pq")]
        kind: SweepKind,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 2.0, 4.0])]
        p_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 2.0, 4.0])]
        q_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 4, 5])]
        windows: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Pq,
    Window,
    Graph,
}

#[derive(Args)]
struct Common {
    /// JSON file overriding the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Held-out file to evaluate on instead of splitting the dataset.
    #[arg(long)]
    test_dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<DataFormat>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<EmbeddingMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail on the first malformed dataset record instead of skipping it.
    #[arg(long)]
    strict: bool,
}

fn parse_mode(s: &str) -> std::result::Result<EmbeddingMode, String> {
    s.parse().map_err(|_| format!("expected one of rand, static, non-static, multichannel; got {s:?}"))
}

impl Common {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::from_json_file(path)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                }
            )*};
        }
        set!(format, window, p, q, dims, mode, seed, out);
        if self.dataset.is_some() {
            cfg.dataset = self.dataset.clone();
        }
        if self.test_dataset.is_some() {
            cfg.test_dataset = self.test_dataset.clone();
        }
        cfg.strict |= self.strict;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Graph(c) => {
            let (graph, vocab) = pipeline::stage_graph(&c.resolve()?)?;
            println!("graph: {} nodes, {} edges", vocab.len(), graph.edge_count());
        }
        Command::Embed(c) => {
            let stats = pipeline::stage_embed(&c.resolve()?)?;
            println!("embedding loss: {:.4} initially, {:?} per epoch", stats.initial_loss, stats.epoch_loss);
        }
        Command::Train(c) => {
            let stats = pipeline::stage_train(&c.resolve()?)?;
            println!("trained on {} documents, best epoch {}", stats.n_train, stats.best_epoch + 1);
        }
        Command::Eval(c) => print!("{}", pipeline::stage_eval(&c.resolve()?)?.to_text()),
        Command::Run(c) => print!("{}", pipeline::run_pipeline(&c.resolve()?)?.to_text()),
        Command::Predict { common, text } => {
            let cfg = common.resolve()?;
            let texts = if text.is_empty() {
                io::stdin().lock().lines().collect::<io::Result<Vec<_>>>().map_err(|e| Error::io("<stdin>", e))?
            } else {
                text
            };
            let (names, predictions) = predict_texts(&cfg, &texts)?;
            let mut stdout = io::stdout().lock();
            for (label, probs) in predictions {
                let probs: Vec<String> = probs.iter().map(|p| format!("{p:.4}")).collect();
                let name = names.get(label).map_or("?", String::as_str);
                writeln!(stdout, "{label}\t{name}\t{}", probs.join("\t")).map_err(|e| Error::io("<stdout>", e))?;
            }
        }
        Command::Sweep { common, kind, p_values, q_values, windows } => {
            let cfg = common.resolve()?;
            let (rows, name) = match kind {
                SweepKind::Pq => (sweep::sweep_pq(&cfg, &p_values, &q_values), "sweep_pq.tsv"),
                SweepKind::Window => (sweep::sweep_window(&cfg, &windows), "sweep_window.tsv"),
                SweepKind::Graph => (sweep::sweep_graph_kind(&cfg), "sweep_graph.tsv"),
            };
            let table = sweep_table(&rows);
            formats::write_text(&cfg.out.join(name), &table)?;
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
