//! Flat key-value configuration files, defaults and the figure presets.
//!
//! The format is one `key = value` pair per line, `#` starts a comment.
//! Missing keys fall back to the default settings (path-loss exponent 2.7,
//! conversion efficiency 0.8, threshold 1 dB, relay power 20 dBm, primary
//! powers 35 dBm, four antennas, the 0.5/0.5/2/0.5/0.5 m geometry); unknown
//! keys are rejected by name.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;
use wpcr_core::montecarlo::{Scheme, SweepSpec, SweepVariable};
use wpcr_core::params::{db_to_linear, dbm_to_linear};
use wpcr_core::{ModelError, SystemParameters, Topology};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("key `{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },

    #[error("key `{key}`: {source}")]
    Invalid {
        key: String,
        #[source]
        source: ModelError,
    },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("unknown preset `{0}` (expected fig2, fig3, fig4 or fig5)")]
    UnknownPreset(String),
}

/// Complete simulation configuration in file units (dB/dBm for powers).
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub tau: f64,
    pub eta: f64,
    pub gamma_th_db: f64,
    pub p_rs_dbm: f64,
    pub p_p1_dbm: f64,
    pub p_p2_dbm: f64,
    pub p_rp_dbm: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub n_rs: usize,
    pub n_p1: usize,
    pub n_p2: usize,
    pub n_rp: usize,
    pub d: usize,
    pub max_outer: usize,
    pub max_inner: usize,
    pub inner_tol: f64,
    pub r_a_rs: f64,
    pub r_rs_b: f64,
    pub r_rs_rp: f64,
    pub r_p1_rp: f64,
    pub r_rp_p2: f64,
    pub schemes: Vec<Scheme>,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tau: 2.7,
            eta: 0.8,
            gamma_th_db: 1.0,
            p_rs_dbm: 20.0,
            p_p1_dbm: 35.0,
            p_p2_dbm: 35.0,
            p_rp_dbm: 35.0,
            n_a: 4,
            n_b: 4,
            n_rs: 4,
            n_p1: 4,
            n_p2: 4,
            n_rp: 4,
            d: 1,
            max_outer: 5,
            max_inner: 20,
            inner_tol: 1e-6,
            r_a_rs: 0.5,
            r_rs_b: 0.5,
            r_rs_rp: 2.0,
            r_p1_rp: 0.5,
            r_rp_p2: 0.5,
            schemes: Scheme::all(),
            // A single point at the default threshold unless a sweep is
            // configured.
            sweep_variable: SweepVariable::GammaThDb,
            sweep_values: vec![1.0],
            trials: 10_000,
            seed: 1,
            output: PathBuf::from("results.csv"),
        }
    }
}

impl SimConfig {
    /// Parses a config file; missing keys keep their defaults and the result
    /// is fully validated.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        let mut explicit_values = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.set(key, value, &mut explicit_values)?;
        }
        if !explicit_values {
            // Without explicit values the run is a single point at the
            // configured setting of the sweep variable.
            cfg.sweep_values = vec![match cfg.sweep_variable {
                SweepVariable::GammaThDb => cfg.gamma_th_db,
                SweepVariable::PRsDbm => cfg.p_rs_dbm,
                SweepVariable::NSu => cfg.n_a as f64,
                SweepVariable::RArs => cfg.r_a_rs,
            }];
        }
        cfg.build()?;
        Ok(cfg)
    }

    fn set(
        &mut self,
        key: &str,
        value: &str,
        explicit_values: &mut bool,
    ) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        match key {
            "tau" => self.tau = num(key, value)?,
            "eta" => self.eta = num(key, value)?,
            "gamma_th_db" => self.gamma_th_db = num(key, value)?,
            "p_rs_dbm" => self.p_rs_dbm = num(key, value)?,
            "p_p1_dbm" => self.p_p1_dbm = num(key, value)?,
            "p_p2_dbm" => self.p_p2_dbm = num(key, value)?,
            "p_rp_dbm" => self.p_rp_dbm = num(key, value)?,
            "n_a" => self.n_a = num(key, value)?,
            "n_b" => self.n_b = num(key, value)?,
            "n_rs" => self.n_rs = num(key, value)?,
            "n_p1" => self.n_p1 = num(key, value)?,
            "n_p2" => self.n_p2 = num(key, value)?,
            "n_rp" => self.n_rp = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "max_outer" => self.max_outer = num(key, value)?,
            "max_inner" => self.max_inner = num(key, value)?,
            "inner_tol" => self.inner_tol = num(key, value)?,
            "r_a_rs" => self.r_a_rs = num(key, value)?,
            "r_rs_b" => self.r_rs_b = num(key, value)?,
            "r_rs_rp" => self.r_rs_rp = num(key, value)?,
            "r_p1_rp" => self.r_p1_rp = num(key, value)?,
            "r_rp_p2" => self.r_rp_p2 = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output" => self.output = PathBuf::from(value),
            "schemes" => {
                self.schemes = value
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<Scheme>()
                            .map_err(|e| ConfigError::Invalid {
                                key: key.to_string(),
                                source: e,
                            })
                    })
                    .collect::<Result<_, _>>()?;
            }
            "sweep_variable" => {
                self.sweep_variable = value.parse().map_err(|e| ConfigError::Invalid {
                    key: key.to_string(),
                    source: e,
                })?;
            }
            "sweep_values" => {
                self.sweep_values = value
                    .split(',')
                    .map(|s| num::<f64>(key, s.trim()))
                    .collect::<Result<_, _>>()?;
                *explicit_values = true;
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Converts to the model types, checking every invariant.
    pub fn build(&self) -> Result<(SystemParameters, Topology, SweepSpec), ConfigError> {
        let params = SystemParameters {
            path_loss_exp: self.tau,
            conversion_eff: self.eta,
            threshold_snr: db_to_linear(self.gamma_th_db),
            relay_power: dbm_to_linear(self.p_rs_dbm),
            p1_power: dbm_to_linear(self.p_p1_dbm),
            p2_power: dbm_to_linear(self.p_p2_dbm),
            primary_relay_power: dbm_to_linear(self.p_rp_dbm),
            n_a: self.n_a,
            n_b: self.n_b,
            n_rs: self.n_rs,
            n_p1: self.n_p1,
            n_p2: self.n_p2,
            n_rp: self.n_rp,
            streams: self.d,
            max_outer_iters: self.max_outer,
            max_inner_iters: self.max_inner,
            inner_tolerance: self.inner_tol,
        };
        params.validate()?;
        let topo = Topology::from_base(
            self.r_a_rs,
            self.r_rs_b,
            self.r_rs_rp,
            self.r_p1_rp,
            self.r_rp_p2,
        )?;
        let spec = SweepSpec {
            variable: self.sweep_variable,
            values: self.sweep_values.clone(),
        };
        spec.validate()?;
        Ok((params, topo, spec))
    }

    /// Serialises the full configuration; `parse` of the result reproduces
    /// the same config.
    pub fn dump(&self) -> String {
        let schemes: Vec<String> = self.schemes.iter().map(|s| s.name()).collect();
        let values: Vec<String> = self.sweep_values.iter().map(|v| v.to_string()).collect();
        format!(
            "tau = {}\neta = {}\ngamma_th_db = {}\np_rs_dbm = {}\np_p1_dbm = {}\np_p2_dbm = {}\n\
             p_rp_dbm = {}\nn_a = {}\nn_b = {}\nn_rs = {}\nn_p1 = {}\nn_p2 = {}\nn_rp = {}\n\
             d = {}\nmax_outer = {}\nmax_inner = {}\ninner_tol = {}\nr_a_rs = {}\nr_rs_b = {}\n\
             r_rs_rp = {}\nr_p1_rp = {}\nr_rp_p2 = {}\nschemes = {}\nsweep_variable = {}\n\
             sweep_values = {}\ntrials = {}\nseed = {}\noutput = {}\n",
            self.tau,
            self.eta,
            self.gamma_th_db,
            self.p_rs_dbm,
            self.p_p1_dbm,
            self.p_p2_dbm,
            self.p_rp_dbm,
            self.n_a,
            self.n_b,
            self.n_rs,
            self.n_p1,
            self.n_p2,
            self.n_rp,
            self.d,
            self.max_outer,
            self.max_inner,
            self.inner_tol,
            self.r_a_rs,
            self.r_rs_b,
            self.r_rs_rp,
            self.r_p1_rp,
            self.r_rp_p2,
            schemes.join(","),
            self.sweep_variable.name(),
            values.join(","),
            self.trials,
            self.seed,
            self.output.display(),
        )
    }
}

/// Ready-made sweep configurations reproducing the four outage experiments:
/// threshold SNR, relay power, SU antenna count and relay position.
pub fn preset(name: &str) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    match name {
        "fig2" => {
            cfg.sweep_variable = SweepVariable::GammaThDb;
            cfg.sweep_values = (-4..=8).map(f64::from).collect();
        }
        "fig3" => {
            cfg.sweep_variable = SweepVariable::PRsDbm;
            cfg.sweep_values = (0..=10).map(|k| 10.0 + 2.0 * f64::from(k)).collect();
        }
        "fig4" => {
            cfg.sweep_variable = SweepVariable::NSu;
            cfg.sweep_values = (2..=8).map(f64::from).collect();
        }
        "fig5" => {
            cfg.sweep_variable = SweepVariable::RArs;
            cfg.sweep_values = (1..=9).map(|k| f64::from(k) / 10.0).collect();
        }
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    }
    cfg.output = PathBuf::from(format!("{name}.csv"));
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default_config() {
        let cfg = SimConfig::parse("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        let (params, topo, _) = cfg.build().unwrap();
        assert_eq!(params.n_a, 4);
        assert!((params.relay_power - 100.0).abs() < 1e-9);
        assert!((topo.r_rp_a - 2.0615528128088303).abs() < 1e-12);
    }

    #[test]
    fn multi_stream_rejected() {
        let err = SimConfig::parse("d = 2").unwrap_err();
        assert!(
            err.to_string().contains("multi-stream unsupported"),
            "{err}"
        );
    }

    #[test]
    fn shallow_tau_rejected() {
        assert!(SimConfig::parse("tau = 1.5").is_err());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = SimConfig::parse("bogus_key = 3").unwrap_err();
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn dump_round_trips() {
        let cfg = SimConfig {
            gamma_th_db: -2.0,
            sweep_variable: SweepVariable::PRsDbm,
            sweep_values: vec![10.0, 12.5, 15.0],
            schemes: vec![Scheme::Proposed, Scheme::StaticEqualPs(0.3)],
            trials: 777,
            ..SimConfig::default()
        };
        let reparsed = SimConfig::parse(&cfg.dump()).unwrap();
        assert_eq!(reparsed, cfg);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let cfg = SimConfig::parse("# comment\n\n  trials = 5  # inline\n").unwrap();
        assert_eq!(cfg.trials, 5);
    }

    #[test]
    fn sweep_variable_without_values_runs_single_point() {
        let cfg = SimConfig::parse("sweep_variable = p_rs_dbm\np_rs_dbm = 24\n").unwrap();
        assert_eq!(cfg.sweep_variable, SweepVariable::PRsDbm);
        assert_eq!(cfg.sweep_values, vec![24.0]);
        let cfg = SimConfig::parse("gamma_th_db = -2\n").unwrap();
        assert_eq!(cfg.sweep_values, vec![-2.0]);
    }

    #[test]
    fn presets_match_figure_axes() {
        let f2 = preset("fig2").unwrap();
        assert_eq!(f2.sweep_values.len(), 13);
        assert_eq!(f2.sweep_variable, SweepVariable::GammaThDb);
        let f3 = preset("fig3").unwrap();
        assert_eq!(f3.sweep_values.len(), 11);
        assert_eq!(f3.sweep_values[0], 10.0);
        assert_eq!(*f3.sweep_values.last().unwrap(), 30.0);
        let f4 = preset("fig4").unwrap();
        assert_eq!(f4.sweep_values, vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let f5 = preset("fig5").unwrap();
        assert_eq!(f5.sweep_values.len(), 9);
        assert!(preset("fig9").is_err());
        // fig4 at N=2 touches only the SU antenna counts.
        let (params, _, _) = f4.build().unwrap();
        let (p2, _) = f4
            .sweep_variable
            .apply(2.0, &params, &Topology::default())
            .unwrap();
        assert_eq!((p2.n_a, p2.n_b, p2.n_rs, p2.n_rp), (2, 2, 4, 4));
        // fig5 at 0.3 puts B at 0.7.
        let (_, t5) = f5
            .sweep_variable
            .apply(0.3, &params, &Topology::default())
            .unwrap();
        assert_eq!(t5.r_rs_b, 0.7);
    }
}
