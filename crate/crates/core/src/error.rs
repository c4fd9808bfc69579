use thiserror::Error;

use crate::interaction::BudgetComponent;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("agent `{agent}` does not support the {interface} interface")]
    InterfaceMismatch { agent: String, interface: String },

    #[error("tasks do not share an interface: {left} vs {right}")]
    IncompatibleTasks { left: String, right: String },

    #[error("budget infeasible: {component} would be exceeded (need {needed}, have {available})")]
    BudgetInfeasible {
        component: BudgetComponent,
        needed: u64,
        available: u64,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("distributions belong to different families: {0} vs {1}")]
    FamilyMismatch(String, String),

    #[error("supports differ: {0}")]
    SupportMismatch(String),

    #[error("empty support")]
    EmptySupport,

    #[error("inadmissible goal for family `{family}`: {reason}")]
    InadmissibleGoal { family: String, reason: String },

    #[error("unknown agent kind `{0}`")]
    UnknownAgentKind(String),

    #[error("invalid agent parameters: {0}")]
    InvalidAgentParams(String),

    #[error("oracle agent requires at least one task")]
    OracleWithoutTask,

    #[error("agent has no confidence channel")]
    NoConfidence,

    #[error("family `{0}` defines no violation predicate")]
    NoViolationPredicate(String),

    #[error("perturbation `{0}` is not closed in the family")]
    OpenPerturbation(String),

    #[error("invalid ground metric: {0}")]
    InvalidMetric(String),

    #[error("support of {size} points exceeds the exact solver limit of {limit}")]
    SupportTooLarge { size: usize, limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("failure set at threshold {theta} is empty; a shift construction needs at least one failing task")]
    EmptyFailureSet { theta: f64 },

    #[error("agent performance is constant ({value}) over the searched tasks; no relativity witness exists")]
    ConstantPerformance { value: f64 },

    #[error("enumeration limit exceeded: {0}")]
    EnumerationLimit(String),

    #[error("invalid expression `{expr}`: {reason}")]
    Expression { expr: String, reason: String },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("missing auxiliary input for {axiom}: {what}")]
    MissingInput { axiom: String, what: String },

    #[error("failed to spawn bridged agent `{command}`: {reason}")]
    Spawn { command: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
