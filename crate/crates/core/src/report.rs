use std::fmt;

/// Machine-readable violation codes shared by every checker in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    DanglingElement,
    ArityMismatch,
    DuplicateRelationExtension,
    PartialMapping,
    DuplicateElement,
    RelationNotPreserved,
    FunctionDomainEscape,
    FunctionNotCommuting,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::DanglingElement => "DANGLING_ELEMENT",
            Code::ArityMismatch => "ARITY_MISMATCH",
            Code::DuplicateRelationExtension => "DUPLICATE_RELATION_EXTENSION",
            Code::PartialMapping => "PARTIAL_MAPPING",
            Code::DuplicateElement => "DUPLICATE_ELEMENT",
            Code::RelationNotPreserved => "RELATION_NOT_PRESERVED",
            Code::FunctionDomainEscape => "FUNCTION_DOMAIN_ESCAPE",
            Code::FunctionNotCommuting => "FUNCTION_NOT_COMMUTING",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: Code,
    pub detail: String,
}

impl Violation {
    pub fn new(code: Code, detail: impl Into<String>) -> Self {
        Violation { code, detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

/// Ordered list of violations; empty means the checked value is fine.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn codes(&self) -> Vec<Code> {
        self.violations.iter().map(|v| v.code).collect()
    }

    pub fn has(&self, code: Code) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl IntoIterator for ValidationReport {
    type Item = Violation;
    type IntoIter = std::vec::IntoIter<Violation>;

    fn into_iter(self) -> Self::IntoIter {
        self.violations.into_iter()
    }
}
