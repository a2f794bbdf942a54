//! JSON run configuration. Complex numbers are [re, im] pairs; unknown keys are rejected.

use std::fmt;

use bethelab_core::boundary::{OpenChainSpec, ReflectionSpec};
use bethelab_core::linalg::{c64, C64};
use bethelab_core::rep_gl::HighestWeight;
use bethelab_core::yangian::{Caps, ChainSpec, Site};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    pub weight: Vec<i64>,
    #[serde(default)]
    pub shift: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub block: usize,
    pub xi: [f64; 2],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Random starting points per sector for the Bethe solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_cap: Option<usize>,
    /// M^(1..N-1); all dominant sectors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnons: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rank: usize,
    pub hbar: [f64; 2],
    pub sites: Vec<SiteConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Options>,
}

/// Parse or validation failure with the offending location.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// "line 3, column 7" for syntax errors, a field path such as "sites[1].weight" otherwise.
    pub location: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(location: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError { location: location.into(), message: message.to_string() }
}

pub fn to_c64(z: [f64; 2]) -> C64 {
    c64(z[0], z[1])
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| err(format!("line {}, column {}", e.line(), e.column()), e))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn options(&self) -> Options {
        self.options.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.chain_spec()?;
        if let Some(b) = &self.boundary {
            if b.block > self.rank {
                return Err(err("boundary.block", format!("block {} exceeds rank {}", b.block, self.rank)));
            }
        }
        let o = self.options();
        for (name, v) in [("options.tol", o.tol), ("options.match_tol", o.match_tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err(name, "must be a positive number"));
                }
            }
        }
        if let Some(m) = &o.magnons {
            if m.len() + 1 != self.rank {
                return Err(err("options.magnons", format!("expected {} entries, got {}", self.rank - 1, m.len())));
            }
        }
        Ok(())
    }

    pub fn hbar(&self) -> C64 {
        to_c64(self.hbar)
    }

    pub fn caps(&self) -> Caps {
        let o = self.options();
        let d = Caps::default();
        Caps { site: o.site_cap.unwrap_or(d.site), total: o.total_cap.unwrap_or(d.total) }
    }

    pub fn chain_spec(&self) -> Result<ChainSpec, ConfigError> {
        if self.rank == 0 {
            return Err(err("rank", "must be at least 1"));
        }
        if self.sites.is_empty() {
            return Err(err("sites", "chain needs at least one site"));
        }
        let mut sites = Vec::with_capacity(self.sites.len());
        for (i, s) in self.sites.iter().enumerate() {
            let w = HighestWeight::with_rank(self.rank, s.weight.clone()).map_err(|e| err(format!("sites[{i}].weight"), e))?;
            sites.push(Site::new(w, to_c64(s.shift)));
        }
        ChainSpec::new(self.rank, self.hbar(), sites).map_err(|e| err("hbar", e))
    }

    pub fn open_spec(&self) -> Result<Option<OpenChainSpec>, ConfigError> {
        let Some(b) = &self.boundary else { return Ok(None) };
        let r = ReflectionSpec { block: b.block, xi: to_c64(b.xi) };
        OpenChainSpec::new(self.chain_spec()?, r).map(Some).map_err(|e| err("boundary", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"rank":2,"hbar":[1,0],"sites":[{"weight":[1,0],"shift":[0,0]},{"weight":[1,0],"shift":[0,0]}]}"#;

    #[test]
    fn minimal_closed() {
        let c = parse_config(MINIMAL).unwrap();
        let spec = c.chain_spec().unwrap();
        assert_eq!(spec.len(), 2);
        assert!(spec.all_fundamental());
        assert!(c.open_spec().unwrap().is_none());
    }

    #[test]
    fn open_boundary() {
        let text = MINIMAL.replace("]}]}", "]}],\"boundary\":{\"block\":1,\"xi\":[0.5,0]}}");
        let c = parse_config(&text).unwrap();
        let open = c.open_spec().unwrap().unwrap();
        assert_eq!(open.boundary.block, 1);
    }

    #[test]
    fn increasing_weight_is_rejected() {
        let text = MINIMAL.replacen("\"weight\":[1,0]", "\"weight\":[0,1]", 1);
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.location, "sites[0].weight");
        assert!(e.message.contains("weights must be weakly decreasing"));
    }

    #[test]
    fn unknown_key_is_rejected_with_position() {
        let text = "{\"rank\":2,\n\"hbar\":[1,0],\n\"sitez\":[]}";
        let e = parse_config(text).unwrap_err();
        assert!(e.location.starts_with("line 3"), "{e}");
        assert!(e.message.contains("unknown field"));
    }

    #[test]
    fn round_trip() {
        let text = MINIMAL.replace(
            "]}]}",
            "]}],\"boundary\":{\"block\":1,\"xi\":[0.5,0.25]},\"options\":{\"tol\":1e-9,\"magnons\":[1],\"seed\":3}}",
        );
        let c = parse_config(&text).unwrap();
        let again = parse_config(&c.to_json()).unwrap();
        assert_eq!(c, again);
    }
}
