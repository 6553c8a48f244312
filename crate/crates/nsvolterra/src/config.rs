//! Scenario files: a structured-text (TOML) description of one solve —
//! domain, time grid, solver knobs, forcing, initial data, the
//! verification set to run, and where to put artifacts. See
//! `docs/schema.md` for the full key reference.

use crate::error::Error;
use crate::fields::{DomainSpec, SpaceTimeField, SpectralField, SpectralVectorField, TimeGrid};
use crate::fraccalc::FracOrder;
use crate::greenop::HeatParams;
use crate::sampling::random_divfree_field;
use crate::solver::{manufactured_forcing, ManufacturedSpec, SignConvention, SolveConfig};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Seed recorded in every artifact; drives all random inputs.
    #[serde(default)]
    pub seed: u64,
    pub solve: SolveSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    /// Spectral cutoff N: modes with every |k_i| <= N are retained.
    pub cutoff: usize,
    /// Collocation grid per axis; defaults to 2N+2 (quadrature-exact).
    pub grid: Option<usize>,
    /// Box side lengths; defaults to the 2*pi cube.
    pub lengths: Option<[f64; 3]>,
    pub horizon: f64,
    pub steps: usize,
    pub rho: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
    #[serde(default = "default_sign")]
    pub sign: SignConvention,
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Causal marching block length; 0 means a single block.
    #[serde(default)]
    pub block_steps: usize,
}

fn default_tolerance() -> f64 {
    1e-10
}
fn default_max_iterations() -> usize {
    60
}
fn default_relaxation() -> f64 {
    1.0
}
fn default_sign() -> SignConvention {
    SignConvention::Standard
}
fn default_mu() -> f64 {
    0.625
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    /// One of `zero`, `manufactured`, `single-mode`, `random`, `file`.
    pub kind: String,
    /// Manufactured family name.
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    /// `single-mode`: spatial axis of the sine dependence.
    #[serde(default)]
    pub axis: usize,
    #[serde(default = "default_frequency")]
    pub frequency: i64,
    #[serde(default = "default_epsilon")]
    pub amplitude: f64,
    /// Exponential time decay of the `single-mode`/`random`/`file`
    /// forcings.
    #[serde(default = "default_lambda")]
    pub decay: f64,
    /// `file`: vector snapshot holding the stationary spatial shape.
    pub path: Option<PathBuf>,
}

fn default_family() -> String {
    "decaying-swirl".into()
}
fn default_epsilon() -> f64 {
    0.1
}
fn default_lambda() -> f64 {
    1.0
}
fn default_frequency() -> i64 {
    1
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            kind: "zero".into(),
            family: default_family(),
            epsilon: default_epsilon(),
            lambda: default_lambda(),
            axis: 0,
            frequency: default_frequency(),
            amplitude: default_epsilon(),
            decay: default_lambda(),
            path: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// One of `zero`, `manufactured` (the exact field of the
    /// manufactured forcing at t = 0), `file`.
    pub kind: String,
    pub path: Option<PathBuf>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            kind: "zero".into(),
            path: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Verification identifiers to run; see `docs/schema.md`.
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parse from TOML text; parse failures carry the line/column of
    /// the offending key.
    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn domain(&self) -> Result<DomainSpec, Error> {
        let n = self.solve.cutoff;
        match (self.solve.lengths, self.solve.grid) {
            (None, None) => Ok(DomainSpec::cube_2pi(n)),
            (lengths, grid) => DomainSpec::new(
                lengths.unwrap_or([2.0 * std::f64::consts::PI; 3]),
                n,
                grid.unwrap_or(2 * n + 2),
            ),
        }
    }

    pub fn solve_config(&self) -> Result<SolveConfig, Error> {
        let s = &self.solve;
        let grid = TimeGrid::new(s.horizon, s.steps)?;
        SolveConfig::new(
            self.domain()?,
            grid,
            HeatParams::new(s.rho)?,
            s.tolerance,
            s.max_iterations,
            s.relaxation,
            s.sign,
            FracOrder::solver_range(s.mu)?,
            if s.block_steps == 0 {
                s.steps
            } else {
                s.block_steps
            },
        )
    }

    pub fn manufactured_spec(&self) -> ManufacturedSpec {
        ManufacturedSpec {
            family: self.forcing.family.clone(),
            epsilon: self.forcing.epsilon,
            lambda: self.forcing.lambda,
        }
    }

    /// Forcing field per the scenario, plus the exact velocity when the
    /// forcing is manufactured (for error measurement).
    pub fn build_forcing(
        &self,
        cfg: &SolveConfig,
    ) -> Result<(SpaceTimeField, Option<SpaceTimeField>), Error> {
        let domain = cfg.domain;
        let grid = cfg.grid;
        let fs = &self.forcing;
        match fs.kind.as_str() {
            "zero" => Ok((SpaceTimeField::zero(domain, grid), None)),
            "manufactured" => {
                let (f, u_star, _) = manufactured_forcing(&self.manufactured_spec(), cfg)?;
                Ok((f, Some(u_star)))
            }
            "single-mode" => {
                if fs.axis > 2 {
                    return Err(Error::InvalidAxis(fs.axis));
                }
                // a sine along one axis placed in the next component is
                // divergence-free
                let mut shape = SpectralVectorField::zero(domain);
                *shape.component_mut((fs.axis + 1) % 3) =
                    SpectralField::sin_mode(domain, fs.axis, fs.frequency, fs.amplitude);
                let decay = fs.decay;
                Ok((
                    SpaceTimeField::from_fn(domain, grid, |_, t| shape.scaled((-decay * t).exp())),
                    None,
                ))
            }
            "random" => {
                let shape = random_divfree_field(domain, self.seed).scaled(fs.epsilon);
                let decay = fs.decay;
                Ok((
                    SpaceTimeField::from_fn(domain, grid, |_, t| shape.scaled((-decay * t).exp())),
                    None,
                ))
            }
            "file" => {
                let path = fs
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("forcing kind 'file' needs a path".into()))?;
                let mut reader = BufReader::new(fs::File::open(path)?);
                let shape = crate::fields::read_vector_snapshot(&mut reader)?;
                if shape.domain() != domain {
                    return Err(Error::DomainMismatch);
                }
                let decay = fs.decay;
                Ok((
                    SpaceTimeField::from_fn(domain, grid, |_, t| shape.scaled((-decay * t).exp())),
                    None,
                ))
            }
            other => Err(Error::Config(format!("unknown forcing kind '{other}'"))),
        }
    }

    /// Initial velocity per the scenario.
    pub fn build_initial(&self, cfg: &SolveConfig) -> Result<SpectralVectorField, Error> {
        match self.initial.kind.as_str() {
            "zero" => Ok(SpectralVectorField::zero(cfg.domain)),
            "manufactured" => {
                if self.forcing.kind != "manufactured" {
                    return Err(Error::Config(
                        "initial kind 'manufactured' needs a manufactured forcing".into(),
                    ));
                }
                let (_, u_star, _) = manufactured_forcing(&self.manufactured_spec(), cfg)?;
                Ok(u_star.snapshot(0).clone())
            }
            "file" => {
                let path = self
                    .initial
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("initial kind 'file' needs a path".into()))?;
                let mut reader = BufReader::new(fs::File::open(path)?);
                let a = crate::fields::read_vector_snapshot(&mut reader)?;
                if a.domain() != cfg.domain {
                    return Err(Error::DomainMismatch);
                }
                Ok(a)
            }
            other => Err(Error::Config(format!("unknown initial kind '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "demo"
        [solve]
        cutoff = 2
        horizon = 1.0
        steps = 8
        rho = 1.0
    "#;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let sc = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(sc.seed, 0);
        assert_eq!(sc.forcing.kind, "zero");
        assert_eq!(sc.initial.kind, "zero");
        assert!(sc.verify.checks.is_empty());
        let cfg = sc.solve_config().unwrap();
        assert_eq!(cfg.domain.grid(), 6);
        assert_eq!(cfg.block_steps, 8);
        assert_eq!(cfg.mu.mu(), 0.625);
        let (f, exact) = sc.build_forcing(&cfg).unwrap();
        assert!(exact.is_none());
        assert_eq!(f.scalar_norm_series().linf_norm(), 0.0);
        assert_eq!(sc.build_initial(&cfg).unwrap().max_coeff_norm(), 0.0);
    }

    #[test]
    fn parse_errors_are_line_anchored() {
        let bad = "name = \"x\"\n[solve]\ncutoff = \"not a number\"\n";
        match Scenario::parse(bad) {
            Err(Error::Parse(msg)) => assert!(msg.contains("line 3"), "{msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(Scenario::parse("name = \"x\"\nbogus_key = 1\n").is_err());
    }

    #[test]
    fn manufactured_forcing_and_initial_round_through() {
        let text = r#"
            name = "mms"
            [solve]
            cutoff = 2
            horizon = 0.5
            steps = 4
            rho = 1.0
            [forcing]
            kind = "manufactured"
            epsilon = 0.05
            lambda = 2.0
            [initial]
            kind = "manufactured"
        "#;
        let sc = Scenario::parse(text).unwrap();
        let cfg = sc.solve_config().unwrap();
        let (f, exact) = sc.build_forcing(&cfg).unwrap();
        let u_star = exact.unwrap();
        assert!(f.is_finite() && u_star.is_finite());
        let a = sc.build_initial(&cfg).unwrap();
        assert_eq!(a, *u_star.snapshot(0));
    }

    #[test]
    fn unknown_kinds_are_config_errors() {
        let mut sc = Scenario::parse(MINIMAL).unwrap();
        let cfg = sc.solve_config().unwrap();
        sc.forcing.kind = "fancy".into();
        assert!(matches!(sc.build_forcing(&cfg), Err(Error::Config(_))));
        sc.initial.kind = "fancy".into();
        assert!(matches!(sc.build_initial(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn single_mode_forcing_is_divergence_free() {
        let text = r#"
            name = "mode"
            [solve]
            cutoff = 3
            horizon = 1.0
            steps = 4
            rho = 1.0
            [forcing]
            kind = "single-mode"
            axis = 1
            frequency = 2
            amplitude = 0.3
            decay = 0.5
        "#;
        let sc = Scenario::parse(text).unwrap();
        let cfg = sc.solve_config().unwrap();
        let (f, _) = sc.build_forcing(&cfg).unwrap();
        for snap in f.snapshots() {
            assert!(crate::fields::divergence(snap).max_coeff_norm() < 1e-14);
        }
        assert!(f.snapshot(0).max_coeff_norm() > 0.0);
    }
}
