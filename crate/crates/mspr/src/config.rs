//! Run configuration shared by the engine, baselines and the CLI.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which system answers the questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mspr,
    Nor,
    VanillaLr,
    VanillaWr,
    VanillaLrwr,
    ReactMs,
}

impl Method {
    pub const ALL: &'static [Method] = &[
        Method::Mspr,
        Method::Nor,
        Method::VanillaLr,
        Method::VanillaWr,
        Method::VanillaLrwr,
        Method::ReactMs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mspr => "mspr",
            Method::Nor => "nor",
            Method::VanillaLr => "vanilla_lr",
            Method::VanillaWr => "vanilla_wr",
            Method::VanillaLrwr => "vanilla_lrwr",
            Method::ReactMs => "react_ms",
        }
    }

    /// True when the method needs a local corpus index.
    pub fn needs_index(&self) -> bool {
        matches!(
            self,
            Method::Mspr | Method::VanillaLr | Method::VanillaLrwr | Method::ReactMs
        )
    }

    /// True when the method may call the web search client.
    pub fn needs_web(&self) -> bool {
        matches!(
            self,
            Method::Mspr | Method::VanillaWr | Method::VanillaLrwr | Method::ReactMs
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method: {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmBackendKind {
    Live,
    Scripted,
    Cached,
}

impl FromStr for LlmBackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(LlmBackendKind::Live),
            "scripted" => Ok(LlmBackendKind::Scripted),
            "cached" => Ok(LlmBackendKind::Cached),
            _ => Err(Error::Config(format!("unknown llm backend: {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WebBackendKind {
    Live,
    Replay,
    Record,
}

impl FromStr for WebBackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(WebBackendKind::Live),
            "replay" => Ok(WebBackendKind::Replay),
            "record" => Ok(WebBackendKind::Record),
            _ => Err(Error::Config(format!("unknown web backend: {s:?}"))),
        }
    }
}

/// Every knob a run can vary.
///
/// `prs_enabled` and `car_enabled` are the ablation switches for the
/// strategy selector and the answer reviewer; both default to on. The
/// source preference (local first) is part of the strategy selector and
/// follows `prs_enabled`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub top_k: usize,
    pub awi: usize,
    pub srt: usize,
    pub ors_enabled: bool,
    pub ors_threshold_chars: usize,
    pub prs_enabled: bool,
    pub car_enabled: bool,
    pub method: Method,
    pub llm_backend: LlmBackendKind,
    pub web_backend: WebBackendKind,
    pub max_llm_calls: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            top_k: 5,
            awi: 5,
            srt: 1,
            ors_enabled: true,
            ors_threshold_chars: 4000,
            prs_enabled: true,
            car_enabled: true,
            method: Method::Mspr,
            llm_backend: LlmBackendKind::Live,
            web_backend: WebBackendKind::Live,
            max_llm_calls: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k < 1 || self.top_k > 100 {
            return Err(Error::Config(format!(
                "top_k must be in 1..=100, got {}",
                self.top_k
            )));
        }
        if self.awi < 1 {
            return Err(Error::Config("awi must be at least 1".into()));
        }
        if self.max_llm_calls == Some(0) {
            return Err(Error::Config("max_llm_calls must be positive".into()));
        }
        Ok(())
    }
}
