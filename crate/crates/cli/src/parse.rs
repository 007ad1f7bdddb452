//! Parser for the textual network format.
//!
//! Grammar (whitespace-separated tokens; newlines are not significant;
//! `#` starts a line comment):
//!
//! ```text
//! calculus <name>
//! var <Name> { v1 v2 … }
//! rel <name> ( V1 V2 … )
//! val <target> <calculus> dense [ x11 x12 … ]
//! val <target> <calculus> { m : { (v1 v2) … } ; … ; m : * }
//! observe <Var> <value>
//! retract <Var>
//! propagate [normalized|unnormalized]
//! query <Var>
//! reset
//! ```
//!
//! Dense entries are decimals, `p/q` fractions, or `true`/`false`; they run
//! row-major over the target's declared variable order and declared frame
//! orders. Focal-set masses must lie in `[0,1]`; mass left over below 1 is
//! assigned to the full configuration set `*` at execution time.

use std::fmt;

use crate::ast::{DenseValue, FocalSpec, Location, MassEntry, NetworkDocument, Statement};

#[derive(Debug, Clone)]
pub struct ParseError {
    pub location: Location,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: {}", self.location, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    text: String,
    location: Location,
}

fn tokenize(input: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (line_idx, line) in input.lines().enumerate() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let mut column = 0usize;
        let mut current = String::new();
        let mut start_col = 0usize;
        let flush = |current: &mut String, start_col: usize, tokens: &mut Vec<Token>| {
            if !current.is_empty() {
                tokens.push(Token {
                    text: std::mem::take(current),
                    location: Location {
                        line: line_idx + 1,
                        column: start_col + 1,
                    },
                });
            }
        };
        for ch in line.chars() {
            column += 1;
            match ch {
                c if c.is_whitespace() => flush(&mut current, start_col, &mut tokens),
                '{' | '}' | '(' | ')' | '[' | ']' | ':' | ';' | '*' => {
                    flush(&mut current, start_col, &mut tokens);
                    tokens.push(Token {
                        text: ch.to_string(),
                        location: Location {
                            line: line_idx + 1,
                            column,
                        },
                    });
                }
                _ => {
                    if current.is_empty() {
                        start_col = column - 1;
                    }
                    current.push(ch);
                }
            }
        }
        flush(&mut current, start_col, &mut tokens);
    }
    tokens
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn eof_location(&self) -> Location {
        self.tokens
            .last()
            .map(|t| t.location)
            .unwrap_or(Location { line: 1, column: 1 })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token, ParseError> {
        let t = self.tokens.get(self.pos).cloned().ok_or(ParseError {
            location: self.eof_location(),
            message: format!("expected {what}, found end of input"),
        })?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, literal: &str) -> Result<Token, ParseError> {
        let t = self.next(&format!("`{literal}`"))?;
        if t.text != literal {
            return Err(ParseError {
                location: t.location,
                message: format!("expected `{literal}`, found `{}`", t.text),
            });
        }
        Ok(t)
    }

    fn name(&mut self, what: &str) -> Result<Token, ParseError> {
        let t = self.next(what)?;
        if matches!(
            t.text.as_str(),
            "{" | "}" | "(" | ")" | "[" | "]" | ":" | ";" | "*"
        ) {
            return Err(ParseError {
                location: t.location,
                message: format!("expected {what}, found `{}`", t.text),
            });
        }
        Ok(t)
    }

    fn statement(&mut self) -> Result<(Statement, Location), ParseError> {
        let head = self.next("a statement")?;
        let location = head.location;
        let stmt = match head.text.as_str() {
            "calculus" => Statement::Calculus(self.name("a calculus name")?.text),
            "var" => {
                let name = self.name("a variable name")?.text;
                self.expect("{")?;
                let mut frame = Vec::new();
                loop {
                    let t = self.next("a frame value or `}`")?;
                    if t.text == "}" {
                        break;
                    }
                    frame.push(t.text);
                }
                Statement::Var { name, frame }
            }
            "rel" => {
                let name = self.name("a relation name")?.text;
                self.expect("(")?;
                let mut variables = Vec::new();
                loop {
                    let t = self.next("a variable name or `)`")?;
                    if t.text == ")" {
                        break;
                    }
                    variables.push(t.text);
                }
                Statement::Rel { name, variables }
            }
            "val" => {
                let target = self.name("a target name")?.text;
                let calculus = self.name("a calculus name")?.text;
                let shape = self.next("`dense` or `{`")?;
                match shape.text.as_str() {
                    "dense" => {
                        self.expect("[")?;
                        let mut values = Vec::new();
                        loop {
                            let t = self.next("a table entry or `]`")?;
                            if t.text == "]" {
                                break;
                            }
                            values.push(parse_dense_value(&t)?);
                        }
                        Statement::DenseVal {
                            target,
                            calculus,
                            values,
                        }
                    }
                    "{" => {
                        let entries = self.mass_entries()?;
                        Statement::MassVal {
                            target,
                            calculus,
                            entries,
                        }
                    }
                    other => {
                        return Err(ParseError {
                            location: shape.location,
                            message: format!("expected `dense` or `{{`, found `{other}`"),
                        })
                    }
                }
            }
            "observe" => Statement::Observe {
                variable: self.name("a variable name")?.text,
                value: self.name("a frame value")?.text,
            },
            "retract" => Statement::Retract {
                variable: self.name("a variable name")?.text,
            },
            "propagate" => {
                let unnormalized = match self.peek().map(|t| t.text.as_str()) {
                    Some("normalized") => {
                        self.pos += 1;
                        Some(false)
                    }
                    Some("unnormalized") => {
                        self.pos += 1;
                        Some(true)
                    }
                    _ => None,
                };
                Statement::Propagate { unnormalized }
            }
            "query" => Statement::Query {
                variable: self.name("a variable name")?.text,
            },
            "reset" => Statement::Reset,
            other => {
                return Err(ParseError {
                    location,
                    message: format!("unknown statement `{other}`"),
                })
            }
        };
        Ok((stmt, location))
    }

    /// Entries after the opening `{`: `m : <set>` separated by `;`, closed
    /// by `}`.
    fn mass_entries(&mut self) -> Result<Vec<MassEntry>, ParseError> {
        let mut entries = Vec::new();
        loop {
            let t = self.next("a mass or `}`")?;
            if t.text == "}" {
                break;
            }
            let mass = parse_number(&t)?;
            if !(0.0..=1.0).contains(&mass) {
                return Err(ParseError {
                    location: t.location,
                    message: format!("mass {mass} out of [0,1]"),
                });
            }
            self.expect(":")?;
            let set_tok = self.next("`*` or `{`")?;
            let set = match set_tok.text.as_str() {
                "*" => FocalSpec::Full,
                "{" => {
                    let mut configs = Vec::new();
                    loop {
                        let t = self.next("`(` or `}`")?;
                        match t.text.as_str() {
                            "}" => break,
                            "(" => {
                                let mut tuple = Vec::new();
                                loop {
                                    let t = self.next("a frame value or `)`")?;
                                    if t.text == ")" {
                                        break;
                                    }
                                    tuple.push(t.text);
                                }
                                configs.push(tuple);
                            }
                            other => {
                                return Err(ParseError {
                                    location: t.location,
                                    message: format!("expected `(` or `}}`, found `{other}`"),
                                })
                            }
                        }
                    }
                    FocalSpec::Configs(configs)
                }
                other => {
                    return Err(ParseError {
                        location: set_tok.location,
                        message: format!("expected `*` or `{{`, found `{other}`"),
                    })
                }
            };
            entries.push(MassEntry { mass, set });
            // optional separator before the next entry
            if self.peek().map(|t| t.text.as_str()) == Some(";") {
                self.pos += 1;
            }
        }
        Ok(entries)
    }
}

fn parse_number(t: &Token) -> Result<f64, ParseError> {
    if let Some((p, q)) = t.text.split_once('/') {
        let num: f64 = p.parse().map_err(|_| bad_number(t))?;
        let den: f64 = q.parse().map_err(|_| bad_number(t))?;
        if den == 0.0 {
            return Err(ParseError {
                location: t.location,
                message: format!("zero denominator in `{}`", t.text),
            });
        }
        return Ok(num / den);
    }
    t.text.parse().map_err(|_| bad_number(t))
}

fn bad_number(t: &Token) -> ParseError {
    ParseError {
        location: t.location,
        message: format!("expected a number, found `{}`", t.text),
    }
}

fn parse_dense_value(t: &Token) -> Result<DenseValue, ParseError> {
    match t.text.as_str() {
        "true" => Ok(DenseValue::Truth(true)),
        "false" => Ok(DenseValue::Truth(false)),
        _ => Ok(DenseValue::Number(parse_number(t)?)),
    }
}

/// Parses a whole document.
pub fn parse(input: &str) -> Result<NetworkDocument, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(input),
        pos: 0,
    };
    let mut statements = Vec::new();
    while parser.peek().is_some() {
        statements.push(parser.statement()?);
    }
    Ok(NetworkDocument { statements })
}
