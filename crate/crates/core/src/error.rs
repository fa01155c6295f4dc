use std::fmt;

use thiserror::Error;

/// One validation failure, located by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl Issue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Coarse error category, stable across versions and used for process exit
/// codes by the command-line runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Validation,
    Integrator,
    Io,
    Resource,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Validation => 2,
            Category::Integrator => 3,
            Category::Io => 4,
            Category::Resource => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Validation => "validation",
            Category::Integrator => "integrator",
            Category::Io => "io",
            Category::Resource => "resource",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {}", join_issues(.0))]
    Validation(Vec<Issue>),

    #[error("integrator failure at t = {time}: {message}")]
    Integrator { time: f64, message: String },

    #[error("resource limit: {0}")]
    Resource(String),
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(Issue::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation(vec![Issue::new(field, message)])
    }

    pub fn integrator(time: f64, message: impl Into<String>) -> Self {
        Error::Integrator {
            time,
            message: message.into(),
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Error::Validation(_) => Category::Validation,
            Error::Integrator { .. } => Category::Integrator,
            Error::Resource(_) => Category::Resource,
        }
    }

    /// Prefixes every message with context, keeping the category.
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::Validation(issues) => Error::Validation(
                issues
                    .into_iter()
                    .map(|i| Issue::new(i.field, format!("{ctx}: {}", i.message)))
                    .collect(),
            ),
            Error::Integrator { time, message } => Error::Integrator {
                time,
                message: format!("{ctx}: {message}"),
            },
            Error::Resource(m) => Error::Resource(format!("{ctx}: {m}")),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Accumulates issues so validation can report everything at once.
#[derive(Debug, Default)]
pub struct Issues(Vec<Issue>);

impl Issues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Issue::new(field, message));
    }

    pub fn check(&mut self, cond: bool, field: impl Into<String>, message: impl Into<String>) {
        if !cond {
            self.push(field, message);
        }
    }

    pub fn extend(&mut self, other: Issues) {
        self.0.extend(other.0);
    }

    /// Keeps the value of `r`, or records its failure and returns `None`.
    pub fn absorb<T>(&mut self, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(Error::Validation(v)) => {
                self.0.extend(v);
                None
            }
            Err(e) => {
                self.push("", e.to_string());
                None
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self.0))
        }
    }
}
