use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pollgame::{AllocationWeights, CoalitionStructure, GameParams};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pollgame", version, about = "Seasonal three-player pollution game: simulation, stability, allocation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strategies and stock paths per coalition structure
    Simulate,
    /// Non-emptiness report plus lower bounds of the principle along the path
    Stability,
    /// Imputations, payment schedules and time-consistency residuals
    Allocate {
        /// Also search for a strong time-consistency violation
        #[arg(long)]
        strong_tc: bool,
        /// Weights switched to in the strong time-consistency search
        #[arg(long, value_name = "a1,a2,a3", default_value = "0,1,0")]
        alpha_prime: String,
    },
    /// Non-emptiness check across a range of one parameter
    Sweep,
    /// Cross-check the closed forms against the numerical oracle
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StructureArg {
    Pi1,
    Pi2,
    Pi3,
    Pi41,
    Pi42,
    All,
}

impl StructureArg {
    pub fn structures(self) -> Vec<CoalitionStructure> {
        match self {
            StructureArg::Pi1 => vec![CoalitionStructure::Pi1],
            StructureArg::Pi2 => vec![CoalitionStructure::Pi2],
            StructureArg::Pi3 => vec![CoalitionStructure::Pi3],
            StructureArg::Pi41 => vec![CoalitionStructure::Pi41],
            StructureArg::Pi42 => vec![CoalitionStructure::Pi42],
            StructureArg::All => CoalitionStructure::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file of key = value lines
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "all")]
    pub structure: StructureArg,
    /// End of the time grid
    #[arg(long, global = true, default_value_t = 10.0)]
    pub tmax: f64,
    /// Number of grid points, endpoints included
    #[arg(long, global = true, default_value_t = 201)]
    pub samples: usize,
    #[arg(long, global = true, value_name = "a1,a2,a3", default_value = "1/3")]
    pub alpha: String,
    /// Output directory; standard output when omitted
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Add oracle cross-check columns
    #[arg(long, global = true)]
    pub oracle: bool,
    #[arg(long, global = true, value_name = "KEY=lo:hi:n")]
    pub sweep: Option<String>,
    /// Sample sweep points at random from this seed instead of a uniform grid
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// One flag per parameter key; each overrides the config file.
#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub delta1: Option<f64>,
    #[arg(long, global = true)]
    pub delta2: Option<f64>,
    #[arg(long = "T", global = true)]
    pub period: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    #[arg(long, global = true)]
    pub a1: Option<f64>,
    #[arg(long, global = true)]
    pub a2: Option<f64>,
    #[arg(long, global = true)]
    pub a3: Option<f64>,
    #[arg(long, global = true)]
    pub b1: Option<f64>,
    #[arg(long, global = true)]
    pub b2: Option<f64>,
    #[arg(long, global = true)]
    pub b3: Option<f64>,
    #[arg(long, global = true)]
    pub xi1: Option<f64>,
    #[arg(long, global = true)]
    pub xi2: Option<f64>,
    #[arg(long, global = true)]
    pub xi3: Option<f64>,
    #[arg(long, global = true)]
    pub q1: Option<f64>,
    #[arg(long, global = true)]
    pub q2: Option<f64>,
    #[arg(long, global = true)]
    pub z0: Option<f64>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, Option<f64>); 17] {
        [
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("T", self.period),
            ("tau", self.tau),
            ("rho", self.rho),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("b1", self.b1),
            ("b2", self.b2),
            ("b3", self.b3),
            ("xi1", self.xi1),
            ("xi2", self.xi2),
            ("xi3", self.xi3),
            ("q1", self.q1),
            ("q2", self.q2),
            ("z0", self.z0),
        ]
    }
}

impl Common {
    /// Reference values, then the config file, then flags.
    pub fn game_params(&self) -> Result<GameParams, CliError> {
        let mut params = GameParams::reference();
        if let Some(path) = &self.params {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            params = params.apply_config(&text)?;
        }
        for (key, value) in self.overrides.pairs() {
            if let Some(v) = value {
                params.set(key, v)?;
            }
        }
        Ok(params.validate()?)
    }

    pub fn alpha(&self) -> Result<AllocationWeights, CliError> {
        parse_alpha(&self.alpha)
    }

    /// `samples` equally spaced points on `[0, tmax]`.
    pub fn time_grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.tmax > 0.0 && self.tmax.is_finite()) {
            return Err(CliError::Input(format!("--tmax must be positive (got {})", self.tmax)));
        }
        if self.samples < 2 {
            return Err(CliError::Input(format!("--samples must be at least 2 (got {})", self.samples)));
        }
        let n = self.samples - 1;
        Ok((0..=n).map(|k| self.tmax * k as f64 / n as f64).collect())
    }
}

pub fn parse_alpha(s: &str) -> Result<AllocationWeights, CliError> {
    if s.trim() == "1/3" {
        return Ok(AllocationWeights::equal());
    }
    Ok(AllocationWeights::from_str(s)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for SweepSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<SweepSpec, CliError> {
        let bad = || CliError::Input(format!("--sweep expects KEY=lo:hi:n, got {s:?}"));
        let (key, range) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let key = key.trim().to_string();
        if !GameParams::KEYS.contains(&key.as_str()) {
            return Err(CliError::Input(format!("--sweep: unknown parameter key `{key}`")));
        }
        if n == 0 || !(lo <= hi) {
            return Err(CliError::Input(format!("--sweep: need lo <= hi and n >= 1 in {s:?}")));
        }
        Ok(SweepSpec { key, lo, hi, n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec_parsing() {
        let s: SweepSpec = "q2=0.5:20:40".parse().unwrap();
        assert_eq!(s, SweepSpec { key: "q2".into(), lo: 0.5, hi: 20.0, n: 40 });
        assert!("q2=1:0:3".parse::<SweepSpec>().is_err());
        assert!("q9=0:1:3".parse::<SweepSpec>().is_err());
        assert!("q2=0:1".parse::<SweepSpec>().is_err());
        assert!("q2=0:1:0".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn alpha_shorthand() {
        assert_eq!(parse_alpha("1/3").unwrap(), AllocationWeights::equal());
        assert!(parse_alpha("0.5,0.5,0.5").is_err());
    }
}
