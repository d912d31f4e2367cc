use serde::Serialize;

use super::IoError;
use crate::closure::ClosureError;
use crate::maximality::MaxError;
use crate::shadowing::ShadowError;
use crate::symbolic::SymbolicError;
use crate::torus::TorusError;

/// Coarse outcome classes; the discriminant is the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    /// Unreadable or malformed input, or a config that fails validation.
    Input = 1,
    /// A mathematical precondition does not hold.
    Refusal = 2,
    /// An iteration or size budget ran out.
    Budget = 3,
}

impl ErrorClass {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A classified error, serialized as the CLI's error JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub class: ErrorClass,
    pub code: i32,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl Failure {
    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        Failure {
            class,
            code: class.code(),
            message: message.into(),
            line: None,
            violations: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let mut f = Failure::new(ErrorClass::Input, e.to_string());
        match e {
            IoError::Csv { line, .. } => f.line = Some(line),
            IoError::Invalid(v) => f.violations = v,
            _ => {}
        }
        f
    }
}

impl From<TorusError> for Failure {
    fn from(e: TorusError) -> Self {
        Failure::new(ErrorClass::Input, e.to_string())
    }
}

impl From<ShadowError> for Failure {
    fn from(e: ShadowError) -> Self {
        let class = match e {
            ShadowError::DefectTooLarge { .. }
            | ShadowError::NotConverged { .. }
            | ShadowError::Singular(_)
            | ShadowError::FlowShadowMiss { .. } => ErrorClass::Refusal,
            _ => ErrorClass::Input,
        };
        Failure::new(class, e.to_string())
    }
}

impl From<ClosureError> for Failure {
    fn from(e: ClosureError) -> Self {
        let class = match &e {
            ClosureError::DeltaNotAdmissible { .. } | ClosureError::AllRefused(_) => {
                ErrorClass::Refusal
            }
            ClosureError::Shadow(s) => Failure::from(s.clone()).class,
            _ => ErrorClass::Input,
        };
        Failure::new(class, e.to_string())
    }
}

impl From<MaxError> for Failure {
    fn from(e: MaxError) -> Self {
        let class = match &e {
            MaxError::NotTransverse { .. }
            | MaxError::NoLocalBracket { .. }
            | MaxError::VSwallowsGrid(_)
            | MaxError::Witness(_) => ErrorClass::Refusal,
            MaxError::GridTooLarge { .. } => ErrorClass::Budget,
            MaxError::Shadow(s) => Failure::from(s.clone()).class,
            _ => ErrorClass::Input,
        };
        Failure::new(class, e.to_string())
    }
}

impl From<SymbolicError> for Failure {
    fn from(e: SymbolicError) -> Self {
        let class = match e {
            SymbolicError::Gap { .. }
            | SymbolicError::DeltaTooLarge { .. }
            | SymbolicError::NotMember(_) => ErrorClass::Refusal,
            _ => ErrorClass::Input,
        };
        Failure::new(class, e.to_string())
    }
}
