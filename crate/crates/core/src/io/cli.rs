//! Command-line arguments, mapped onto [`RunConfig`].

use clap::{Parser, Subcommand, ValueEnum};

use super::{Command, Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "gpdlab", version, about = "Finite groupoid gluing, Fredholm criteria and Mellin-symbol scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Output format; defaults to csv when --out ends in .csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Check the groupoid axioms.
    Validate {
        #[arg(long)]
        groupoid: String,
    },
    /// Check the gluing conditions and glue an atlas.
    Glue {
        #[arg(long)]
        atlas: String,
    },
    /// Orbits and isotropy groups.
    Orbits {
        #[arg(long)]
        groupoid: String,
    },
    /// Representation laws on seeded random elements.
    Norms {
        #[arg(long)]
        groupoid: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Finite Fredholm criterion on a groupoid with pair orbit U.
    FredholmCheck {
        #[arg(long)]
        groupoid: String,
        /// Subset name or comma-separated unit labels.
        #[arg(long)]
        u: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Blockwise vs. representation-wise invertibility on G_F.
    SpectralCheck {
        #[arg(long)]
        groupoid: String,
        #[arg(long)]
        u: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
    /// Desingularization and boundary algebra of a conical domain.
    LayerReport {
        #[arg(long)]
        domain: String,
    },
    /// Mellin-symbol Fredholm scan of c·I + K.
    MellinScan {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        /// `auto` or a boundary weight a.
        #[arg(long, default_value = "auto")]
        weight: String,
        #[arg(long, default_value_t = 200.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        /// Kernel file with one kernel per vertex.
        #[arg(long)]
        kernels: Option<String>,
        /// Comma-separated vertices carrying the adversarial kernel.
        #[arg(long, value_delimiter = ',')]
        adversarial: Vec<String>,
    },
    /// Nyström σ_min trace on graded meshes.
    NystromVerify {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        base: usize,
        #[arg(long, value_delimiter = ',')]
        adversarial: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
    },
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig, String> {
        let command = match self.command {
            Sub::Validate { groupoid } => Command::Validate { groupoid },
            Sub::Glue { atlas } => Command::Glue { atlas },
            Sub::Orbits { groupoid } => Command::Orbits { groupoid },
            Sub::Norms { groupoid, seed, trials, tolerance } => Command::Norms { groupoid, seed, trials, tolerance },
            Sub::FredholmCheck { groupoid, u, seed, trials } => Command::FredholmCheck { groupoid, u, seed, trials },
            Sub::SpectralCheck { groupoid, u, seed, trials } => Command::SpectralCheck { groupoid, u, seed, trials },
            Sub::LayerReport { domain } => Command::LayerReport { domain },
            Sub::MellinScan { domain, c, weight, lambda_max, tolerance, kernels, adversarial } => {
                let weight = match weight.as_str() {
                    "auto" => None,
                    w => Some(w.parse::<f64>().map_err(|_| format!("--weight: expected `auto` or a number, got {w:?}"))?),
                };
                Command::MellinScan { domain, c, weight, lambda_max, tolerance, kernels, adversarial }
            }
            Sub::NystromVerify { domain, levels, base, adversarial, c } => {
                Command::NystromVerify { domain, levels, base, adversarial, c }
            }
        };
        let format = match self.format {
            Some(FormatArg::Csv) => Format::Csv,
            Some(FormatArg::Json) => Format::Json,
            None if self.out.as_deref().is_some_and(|o| o.ends_with(".csv")) => Format::Csv,
            None => Format::Json,
        };
        Ok(RunConfig { command, output: self.out, format })
    }
}
