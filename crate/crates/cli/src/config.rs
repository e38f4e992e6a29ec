//! Experiment configuration: one flat parameter set shared by the command
//! line and the TOML config file. Flags win over file values.

use std::path::{Path, PathBuf};

use clap::Args;
use kakeya_core::Rational;
use serde::{Deserialize, Serialize};

use crate::LabError;

pub const COMMANDS: [&str; 8] =
    ["lt-selftest", "sz-verify", "covering", "min-kakeya", "maximal-dist", "maximal-norm", "proof-trace", "replay"];

#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Field size (prime power).
    #[arg(long)]
    pub q: Option<u32>,
    /// Truncation depth of R = F_q[t]/t^k.
    #[arg(long)]
    pub k: Option<u32>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: Option<usize>,
    /// Line fraction ε in (0, 1], as `a/b`, an integer or a decimal.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Direction fraction ν in (0, 1]; defaults to the measured value where that makes sense.
    #[arg(long)]
    pub nu: Option<String>,
    /// θ in (0, 1] for the counting lemma.
    #[arg(long)]
    pub theta: Option<String>,
    /// Values of k for the maximal experiments.
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<u32>>,
    /// Random trials (maximal experiments) or random polynomials (sz-verify).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Working t-precision of the extension ring.
    #[arg(long)]
    pub precision: Option<usize>,
    /// Search budget (points of R^n for min-kakeya).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Scalar type for the maximal experiments: `f64` or `exact`.
    #[arg(long)]
    pub scalar: Option<String>,
    /// Point-set file, or a stored trace for `replay`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV output for the maximal experiments.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// sz-verify: run the exhaustive univariate sweep.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exhaustive: Option<bool>,
    /// proof-trace: continue past a failed size test.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub force: Option<bool>,
    /// proof-trace: use a random set of this size claiming every direction.
    #[arg(long)]
    pub adversarial: Option<usize>,
    /// Worker threads for the parallel phases.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Validate parameters and budgets without computing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dry_run: Option<bool>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Params {
    /// `self` with every field that `flags` sets replaced.
    pub fn overlay(&self, flags: &Params) -> Params {
        let mut out = self.clone();
        overlay!(
            out,
            flags,
            q,
            k,
            n,
            epsilon,
            nu,
            theta,
            k_values,
            trials,
            seed,
            precision,
            budget,
            scalar,
            input,
            out,
            csv,
            exhaustive,
            force,
            adversarial,
            jobs,
            dry_run
        );
        out
    }

    pub fn from_toml_file(path: &Path) -> Result<Params, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }
}

/// A fully resolved run: the command plus its parameters with defaults filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub params: Params,
}

impl ExperimentConfig {
    /// Fills command-specific defaults; fields already set are kept.
    pub fn resolve(command: &str, p: Params) -> Result<ExperimentConfig, LabError> {
        if !COMMANDS.contains(&command) {
            return Err(LabError::Config(format!("unknown command {command:?}")));
        }
        let mut p = p;
        p.seed.get_or_insert(0);
        p.jobs.get_or_insert(1);
        p.dry_run.get_or_insert(false);
        match command {
            "sz-verify" => {
                p.q.get_or_insert(2);
                p.k.get_or_insert(2);
                p.n.get_or_insert(1);
                let ex = *p.exhaustive.get_or_insert(false);
                p.trials.get_or_insert(if ex { 0 } else { 1000 });
            }
            "covering" | "proof-trace" => {
                p.q.get_or_insert(2);
                p.k.get_or_insert(2);
                p.n.get_or_insert(2);
                p.epsilon.get_or_insert_with(|| "1".into());
                if command == "proof-trace" {
                    p.force.get_or_insert(p.adversarial.is_some());
                }
            }
            "min-kakeya" => {
                p.q.get_or_insert(2);
                p.k.get_or_insert(1);
                p.n.get_or_insert(2);
                p.budget.get_or_insert(kakeya_core::kakeya::EXHAUSTIVE_DEFAULT_BUDGET);
            }
            "maximal-dist" | "maximal-norm" => {
                p.q.get_or_insert(2);
                p.n.get_or_insert(2);
                p.k_values.get_or_insert_with(|| vec![1, 2, 3]);
                p.trials.get_or_insert(200);
                p.scalar.get_or_insert_with(|| "f64".into());
            }
            _ => {}
        }
        if p.jobs == Some(0) {
            return Err(LabError::Config("--jobs must be positive".into()));
        }
        Ok(ExperimentConfig { command: command.into(), params: p })
    }
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, LabError> {
    let s = s.trim();
    let bad = || LabError::Config(format!("{s:?} is not a rational number"));
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().map_err(|_| bad())?;
        let num = whole.abs() * den + f;
        return Ok(Rational::new(if neg { -num } else { num }, den));
    }
    s.parse::<Rational>().map_err(|_| bad())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), Rational::new(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::new(1, 4));
        assert_eq!(parse_rational("1").unwrap(), Rational::from_integer(1));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_rational("-1.5").unwrap(), Rational::new(-3, 2));
    }

    #[test]
    fn flags_override_file() {
        let file: Params = toml::from_str("q = 3\nk = 2\nepsilon = \"1/2\"\ndry-run = true").unwrap();
        let flags = Params { k: Some(3), ..Default::default() };
        let merged = file.overlay(&flags);
        assert_eq!((merged.q, merged.k, merged.dry_run), (Some(3), Some(3), Some(true)));
        assert_eq!(merged.epsilon.as_deref(), Some("1/2"));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Params>("colour = 1").is_err());
    }

    #[test]
    fn defaults_fill_only_missing() {
        let cfg = ExperimentConfig::resolve("sz-verify", Params { n: Some(2), ..Default::default() }).unwrap();
        assert_eq!(
            (cfg.params.q, cfg.params.k, cfg.params.n, cfg.params.trials),
            (Some(2), Some(2), Some(2), Some(1000))
        );
        assert!(ExperimentConfig::resolve("nope", Params::default()).is_err());
    }
}
