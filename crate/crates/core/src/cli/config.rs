use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::groups::{parse_group_list, Domain};
use crate::homs::{FamilySpec, DEFAULT_ENUMERATION_BUDGET};
use crate::linalg::DEFAULT_RANK_TOL;
use crate::netlib::{Activation, Exponent};

pub const DEFAULT_FOURIER_BATTERY: &[&str] = &[
    "Z1", "Z2", "Z3", "Z5", "Z6", "Z8", "Z12", "Z2xZ2", "Z2xZ4", "Z3xZ3", "Z2xZ6", "Z2xZ2xZ2", "Z4xZ4",
];

const DEFAULT_TERMS: usize = 4096;
const DEFAULT_MAX_ORDER: u64 = 8;
const DEFAULT_TRIALS: usize = 10;
const DEFAULT_OUT: &str = "groupnet-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Density,
    Approx,
    FourierCheck,
    Enumerate,
    Counterexample,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Density => "density",
            CommandKind::Approx => "approx",
            CommandKind::FourierCheck => "fourier-check",
            CommandKind::Enumerate => "enumerate",
            CommandKind::Counterexample => "counterexample",
        }
    }
}

/// Config file contents; every key is optional and unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<CommandKind>,
    pub groups: Option<Vec<String>>,
    pub families: Option<Vec<String>>,
    pub activations: Option<Vec<String>>,
    pub n_terms: Option<usize>,
    pub max_order: Option<u64>,
    pub trials: Option<usize>,
    pub budget: Option<usize>,
    pub p: Option<Exponent>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn overlay(self, top: FileConfig) -> FileConfig {
        FileConfig {
            command: top.command.or(self.command),
            groups: top.groups.or(self.groups),
            families: top.families.or(self.families),
            activations: top.activations.or(self.activations),
            n_terms: top.n_terms.or(self.n_terms),
            max_order: top.max_order.or(self.max_order),
            trials: top.trials.or(self.trials),
            budget: top.budget.or(self.budget),
            p: top.p.or(self.p),
            seed: top.seed.or(self.seed),
            tol: top.tol.or(self.tol),
            out: top.out.or(self.out),
        }
    }
}

/// Fully resolved settings, with every spec string in canonical form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub groups: Vec<String>,
    pub families: Vec<String>,
    pub activations: Vec<String>,
    pub n_terms: usize,
    pub max_order: u64,
    pub trials: usize,
    pub budget: usize,
    pub p: Exponent,
    pub seed: u64,
    pub tol: f64,
    /// Not part of the canonical form.
    #[serde(skip)]
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn resolve(
        command: CommandKind,
        file: FileConfig,
        flags: FileConfig,
        env_out: Option<PathBuf>,
    ) -> Result<Self> {
        if let Some(c) = file.command {
            if c != command {
                return Err(Error::InvalidConfiguration(format!(
                    "config file is for command {:?}, invoked as {:?}",
                    c.name(),
                    command.name()
                )));
            }
        }
        let merged = file.overlay(flags);
        let groups = match merged.groups {
            Some(list) => {
                let mut out = Vec::new();
                for item in list {
                    for g in parse_group_list(&item)? {
                        out.push(field("groups", g.parse::<Domain>())?.to_string());
                    }
                }
                out
            }
            None if command == CommandKind::FourierCheck => {
                DEFAULT_FOURIER_BATTERY.iter().map(|s| s.to_string()).collect()
            }
            None => Vec::new(),
        };
        if groups.is_empty() && matches!(command, CommandKind::Density | CommandKind::Approx | CommandKind::Enumerate) {
            return Err(Error::InvalidConfiguration(format!("command {} needs at least one --group", command.name())));
        }
        let default_families: &[&str] = match command {
            CommandKind::Counterexample => &["aut"],
            CommandKind::Enumerate => &["aut"],
            _ => &["affine-end"],
        };
        let families = merged
            .families
            .unwrap_or_else(|| default_families.iter().map(|s| s.to_string()).collect())
            .iter()
            .map(|s| field("families", s.parse::<FamilySpec>()).map(|f| f.to_string()))
            .collect::<Result<Vec<_>>>()?;
        let default_activations: &[&str] = match command {
            CommandKind::Counterexample => &[],
            _ => &["logistic"],
        };
        let activations = merged
            .activations
            .unwrap_or_else(|| default_activations.iter().map(|s| s.to_string()).collect())
            .iter()
            .map(|s| field("activations", s.parse::<Activation>()).map(|a| a.to_string()))
            .collect::<Result<Vec<_>>>()?;
        let tol = merged.tol.unwrap_or(DEFAULT_RANK_TOL);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidConfiguration(format!("tol must lie in (0, 1), got {tol}")));
        }
        let n_terms = merged.n_terms.unwrap_or(DEFAULT_TERMS);
        let budget = merged.budget.unwrap_or(DEFAULT_ENUMERATION_BUDGET);
        if n_terms == 0 || budget == 0 {
            return Err(Error::InvalidConfiguration("n_terms and budget must be positive".into()));
        }
        Ok(ExperimentConfig {
            command,
            groups,
            families,
            activations,
            n_terms,
            max_order: merged.max_order.unwrap_or(DEFAULT_MAX_ORDER),
            trials: merged.trials.unwrap_or(DEFAULT_TRIALS),
            budget,
            p: merged.p.unwrap_or_default(),
            seed: merged.seed.unwrap_or(0),
            tol,
            out: merged.out.or(env_out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }

    /// Canonical JSON: fixed key order, canonical spec strings, no output path.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::InvalidConfiguration(format!("field {name:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(file: FileConfig, flags: FileConfig) -> Result<ExperimentConfig> {
        ExperimentConfig::resolve(CommandKind::Density, file, flags, None)
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = FileConfig::from_json("{\n  \"groups\": [\"Z4\"],\n  \"colour\": 1\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn canonical_form_round_trips() {
        let file = FileConfig::from_json(r#"{"groups": ["Z2..Z4", "Z2 x Z2"], "families": ["AUT"], "p": "inf"}"#).unwrap();
        let c = resolve(file, FileConfig::default()).unwrap();
        assert_eq!(c.groups, vec!["Z2", "Z3", "Z4", "Z2xZ2"]);
        assert_eq!(c.families, vec!["aut"]);
        let back: ExperimentConfig = serde_json::from_str(&c.canonical_json()).unwrap();
        assert_eq!(back.canonical_json(), c.canonical_json());
        assert_eq!(c.sha256().len(), 64);
    }

    #[test]
    fn precedence() {
        let file = FileConfig { seed: Some(1), tol: Some(1e-8), ..Default::default() };
        let flags = FileConfig { seed: Some(2), groups: Some(vec!["Z3".into()]), ..Default::default() };
        let c = resolve(file, flags).unwrap();
        assert_eq!((c.seed, c.tol), (2, 1e-8));
        let c = ExperimentConfig::resolve(
            CommandKind::Density,
            FileConfig { groups: Some(vec!["Z3".into()]), ..Default::default() },
            FileConfig::default(),
            Some("env-dir".into()),
        )
        .unwrap();
        assert_eq!(c.out, PathBuf::from("env-dir"));
    }

    #[test]
    fn output_path_does_not_change_the_hash() {
        let flags = |out: &str| FileConfig { groups: Some(vec!["Z3".into()]), out: Some(out.into()), ..Default::default() };
        let a = resolve(FileConfig::default(), flags("a")).unwrap();
        let b = resolve(FileConfig::default(), flags("b")).unwrap();
        assert_eq!(a.sha256(), b.sha256());
    }

    #[test]
    fn mismatched_command_is_rejected() {
        let file = FileConfig { command: Some(CommandKind::Approx), groups: Some(vec!["Z3".into()]), ..Default::default() };
        assert!(resolve(file, FileConfig::default()).is_err());
    }
}
