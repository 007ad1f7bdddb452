//! Statement AST for the textual network format.

use std::fmt;

/// One entry of a dense table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseValue {
    Number(f64),
    Truth(bool),
}

impl DenseValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            DenseValue::Number(v) => *v,
            DenseValue::Truth(true) => 1.0,
            DenseValue::Truth(false) => 0.0,
        }
    }

    pub fn is_truth(&self) -> bool {
        matches!(self, DenseValue::Truth(_))
    }
}

impl fmt::Display for DenseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenseValue::Number(v) => write!(f, "{v}"),
            DenseValue::Truth(t) => write!(f, "{t}"),
        }
    }
}

/// The configurations a focal-set entry covers: an explicit list of value
/// tuples (in the relation's declared variable order), or `*` for the whole
/// configuration space.
#[derive(Debug, Clone, PartialEq)]
pub enum FocalSpec {
    Full,
    Configs(Vec<Vec<String>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassEntry {
    pub mass: f64,
    pub set: FocalSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Calculus(String),
    Var {
        name: String,
        frame: Vec<String>,
    },
    Rel {
        name: String,
        variables: Vec<String>,
    },
    DenseVal {
        target: String,
        calculus: String,
        values: Vec<DenseValue>,
    },
    MassVal {
        target: String,
        calculus: String,
        entries: Vec<MassEntry>,
    },
    Observe {
        variable: String,
        value: String,
    },
    Retract {
        variable: String,
    },
    Propagate {
        /// None: session default; Some(true): `unnormalized`.
        unnormalized: Option<bool>,
    },
    Query {
        variable: String,
    },
    Reset,
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Calculus(name) => write!(f, "calculus {name}"),
            Statement::Var { name, frame } => {
                write!(f, "var {name} {{ {} }}", frame.join(" "))
            }
            Statement::Rel { name, variables } => {
                write!(f, "rel {name} ( {} )", variables.join(" "))
            }
            Statement::DenseVal {
                target,
                calculus,
                values,
            } => {
                write!(f, "val {target} {calculus} dense [")?;
                for v in values {
                    write!(f, " {v}")?;
                }
                write!(f, " ]")
            }
            Statement::MassVal {
                target,
                calculus,
                entries,
            } => {
                write!(f, "val {target} {calculus} {{ ")?;
                for (i, e) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ; ")?;
                    }
                    write!(f, "{} : ", e.mass)?;
                    match &e.set {
                        FocalSpec::Full => write!(f, "*")?,
                        FocalSpec::Configs(configs) => {
                            write!(f, "{{")?;
                            for c in configs {
                                write!(f, " ({})", c.join(" "))?;
                            }
                            write!(f, " }}")?;
                        }
                    }
                }
                write!(f, " }}")
            }
            Statement::Observe { variable, value } => write!(f, "observe {variable} {value}"),
            Statement::Retract { variable } => write!(f, "retract {variable}"),
            Statement::Propagate { unnormalized } => match unnormalized {
                None => write!(f, "propagate"),
                Some(true) => write!(f, "propagate unnormalized"),
                Some(false) => write!(f, "propagate normalized"),
            },
            Statement::Query { variable } => write!(f, "query {variable}"),
            Statement::Reset => write!(f, "reset"),
        }
    }
}

/// Source location of a statement (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A parsed document: statements in source order, with locations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkDocument {
    pub statements: Vec<(Statement, Location)>,
}

impl fmt::Display for NetworkDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (stmt, _) in &self.statements {
            writeln!(f, "{stmt}")?;
        }
        Ok(())
    }
}
