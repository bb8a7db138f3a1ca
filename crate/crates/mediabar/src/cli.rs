//! `mediabar` command line. Flags override the config file; nothing is read
//! from the environment.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mediabar_core::cluster::Modality;

use crate::config::PipelineConfig;
use crate::fixture;
use crate::pipeline::{self, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIDEO_FAILURES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mediabar",
    version,
    about = "Multimodal video characterization"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Corpus manifest (JSON)
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every randomized stage
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file mirroring the pipeline configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Stop-word list (one word per line) replacing the bundled English list
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModalityArg {
    Barcode,
    Audio,
    Text,
}

impl From<ModalityArg> for Modality {
    fn from(m: ModalityArg) -> Self {
        match m {
            ModalityArg::Barcode => Modality::Barcode,
            ModalityArg::Audio => Modality::Audio,
            ModalityArg::Text => Modality::Text,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Barcode PPMs and barcode feature CSV
    Barcode,
    /// MFCC summary features and waveform envelopes
    Audio,
    /// Text vectors, vocabulary and cosine similarity matrix
    Text,
    /// K selection and cluster profiles for one modality
    Cluster {
        #[arg(long, value_enum)]
        modality: ModalityArg,
        /// Cluster text on cosine-similarity rows instead of feature rows
        #[arg(long)]
        similarity_rows: bool,
    },
    /// Per-text-cluster topic reports
    Topics {
        /// Also fit every topic count in 2..=10 and report mean coherence
        #[arg(long)]
        scan_k: bool,
    },
    /// Repurposed-segment report
    Repurpose {
        /// Only compare videos that share a barcode cluster
        #[arg(long)]
        within_clusters: bool,
    },
    /// Every stage in dependency order
    Pipeline {
        #[arg(long)]
        within_clusters: bool,
        #[arg(long)]
        scan_k: bool,
        #[arg(long)]
        similarity_rows: bool,
    },
    /// Write the bundled synthetic 12-video corpus
    SynthFixture {
        /// Target directory
        #[arg(long)]
        dir: PathBuf,
    },
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let g = cli.global;
    if let Cmd::SynthFixture { dir } = &cli.command {
        return match fixture::write_fixture(dir, g.seed.unwrap_or(0)) {
            Ok(f) => {
                println!("{}", f.manifest.display());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        };
    }

    let mut cfg = match &g.config {
        Some(p) => match PipelineConfig::from_file(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        },
        None => PipelineConfig::default(),
    };
    if g.manifest.is_some() {
        cfg.manifest = g.manifest;
    }
    if g.out.is_some() {
        cfg.out = g.out;
    }
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if g.stopwords.is_some() {
        cfg.stopwords = g.stopwords;
    }
    let command = match cli.command {
        Cmd::Barcode => Command::Barcode,
        Cmd::Audio => Command::Audio,
        Cmd::Text => Command::Text,
        Cmd::Cluster {
            modality,
            similarity_rows,
        } => {
            cfg.similarity_rows |= similarity_rows;
            Command::Cluster(modality.into())
        }
        Cmd::Topics { scan_k } => {
            cfg.scan_k |= scan_k;
            Command::Topics
        }
        Cmd::Repurpose { within_clusters } => {
            cfg.matching.within_clusters |= within_clusters;
            Command::Repurpose
        }
        Cmd::Pipeline {
            within_clusters,
            scan_k,
            similarity_rows,
        } => {
            cfg.matching.within_clusters |= within_clusters;
            cfg.scan_k |= scan_k;
            cfg.similarity_rows |= similarity_rows;
            Command::Pipeline
        }
        Cmd::SynthFixture { .. } => unreachable!("handled above"),
    };
    let resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match pipeline::run(&resolved, command) {
        Ok(outcome) => {
            for e in &outcome.errors {
                eprintln!("error: {} [{}]: {}", e.video, e.stage, e.error);
            }
            for (name, s) in &outcome.stages {
                if s.status != pipeline::Status::Ok {
                    eprintln!("stage {name}: {} {}", s.status.as_str(), s.notes.join("; "));
                }
            }
            println!(
                "{}: {} file(s) written to {}",
                command.name(),
                outcome.files.len() + 1,
                resolved.out.display()
            );
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
