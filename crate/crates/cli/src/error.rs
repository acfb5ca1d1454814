use std::fmt;

/// A failure attributed to the module that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub module: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(module: &'static str, message: impl Into<String>) -> Self {
        Self {
            module,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.module, self.message)
    }
}

impl std::error::Error for Failure {}

pub type Result<T> = std::result::Result<T, Failure>;

/// Tags any displayable error with a module name.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T>;
}

impl<T, E: fmt::Display> InModule<T> for std::result::Result<T, E> {
    fn in_module(self, module: &'static str) -> Result<T> {
        self.map_err(|e| Failure::new(module, e.to_string()))
    }
}
