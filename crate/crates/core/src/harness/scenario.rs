use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::model::Network;
use crate::policy::PolicySpec;

/// Names accepted by [`build_scenario`].
pub const SCENARIOS: [&str; 3] = ["fig2", "scenario1", "scenario2"];

const FIG2: &str = include_str!("../../configs/fig2.toml");
const SCENARIO1: &str = include_str!("../../configs/scenario1.toml");
const SCENARIO2: &str = include_str!("../../configs/scenario2.toml");

/// The bundled network file for `name`.
pub fn scenario_config(name: &str) -> Result<NetworkConfig> {
    let text = match name {
        "fig2" => FIG2,
        "scenario1" => SCENARIO1,
        "scenario2" => SCENARIO2,
        _ => {
            return Err(Error::UnknownScenario {
                name: name.to_string(),
                valid: SCENARIOS.join(", "),
            })
        }
    };
    NetworkConfig::from_toml(text)
}

/// A bundled network at the given load, with its underlay policy.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: Network,
    pub policy: PolicySpec,
}

pub fn build_scenario(name: &str, load: f64) -> Result<Scenario> {
    let cfg = scenario_config(name)?;
    Ok(Scenario {
        network: cfg.build(load)?,
        policy: cfg.policy,
    })
}
