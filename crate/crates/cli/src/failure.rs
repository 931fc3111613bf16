//! Errors surfaced by the front-end, with category, exit code and config path.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub category: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_path: Option<String>,
}

impl Failure {
    pub fn new(category: &str, message: impl Into<String>) -> Self {
        Self {
            category: category.to_string(),
            message: message.into(),
            config_path: None,
        }
    }

    pub fn config(path: &str, message: impl Into<String>) -> Self {
        Self {
            category: "configuration".into(),
            message: message.into(),
            config_path: Some(path.to_string()),
        }
    }

    /// Parse errors already carry line, column and key in their message.
    pub fn parse(message: String) -> Self {
        Self::new("configuration", message.trim_end().to_string())
    }

    pub fn from_core(e: thinpore_core::Error) -> Self {
        Self::new(e.category(), e.to_string())
    }

    pub fn with_path(mut self, path: &str) -> Self {
        if self.config_path.is_none() {
            self.config_path = Some(path.to_string());
        }
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.category.as_str() {
            "configuration" => 2,
            "input" => 3,
            "io" | "serialization" => 4,
            "domain" | "geometry" | "regime" | "alignment" | "incompatible" | "infeasible" => 5,
            "convergence" | "linear-solver" => 6,
            "resource" => 7,
            "contract" => 8,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<thinpore_core::Error> for Failure {
    fn from(e: thinpore_core::Error) -> Self {
        Self::from_core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new("io", e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::new("serialization", e.to_string())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.config_path {
            Some(p) => write!(f, "{} error at {p}: {}", self.category, self.message),
            None => write!(f, "{} error: {}", self.category, self.message),
        }
    }
}
