//! Boolean expressions over 0/1 group columns, e.g.
//! `female & !spouse & children` or `black and (youth or disability)`.
//!
//! `!`/`not` binds tightest, then `&`/`and`, then `|`/`or`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupExpr {
    Column(String),
    Not(Box<GroupExpr>),
    And(Box<GroupExpr>, Box<GroupExpr>),
    Or(Box<GroupExpr>, Box<GroupExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Open,
    Close,
}

fn tokenize(text: &str) -> std::result::Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '!' => {
                chars.next();
                tokens.push(Token::Not);
            }
            '&' => {
                chars.next();
                tokens.push(Token::And);
            }
            '|' => {
                chars.next();
                tokens.push(Token::Or);
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '-' || c == '.' {
                        word.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(match word.as_str() {
                    "not" => Token::Not,
                    "and" => Token::And,
                    "or" => Token::Or,
                    _ => Token::Ident(word),
                });
            }
            other => return Err(format!("unexpected character `{other}` at offset {pos}")),
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> std::result::Result<GroupExpr, String> {
        let mut lhs = self.and()?;
        while self.eat(&Token::Or) {
            lhs = GroupExpr::Or(Box::new(lhs), Box::new(self.and()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> std::result::Result<GroupExpr, String> {
        let mut lhs = self.unary()?;
        while self.eat(&Token::And) {
            lhs = GroupExpr::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<GroupExpr, String> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(GroupExpr::Not(Box::new(self.unary()?)))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let inner = self.or()?;
                if !self.eat(&Token::Close) {
                    return Err("missing `)`".into());
                }
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok(GroupExpr::Column(name))
            }
            Some(t) => Err(format!("unexpected {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

impl FromStr for GroupExpr {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let fail = |message: String| Error::Expression { expr: text.to_string(), message };
        let tokens = tokenize(text).map_err(fail)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.or().map_err(fail)?;
        if parser.pos != parser.tokens.len() {
            return Err(fail(format!("trailing input after token {}", parser.pos)));
        }
        Ok(expr)
    }
}

impl GroupExpr {
    /// Evaluates the expression; `lookup` returns a column's value.
    pub fn eval(&self, lookup: &impl Fn(&str) -> bool) -> bool {
        match self {
            GroupExpr::Column(name) => lookup(name),
            GroupExpr::Not(e) => !e.eval(lookup),
            GroupExpr::And(a, b) => a.eval(lookup) && b.eval(lookup),
            GroupExpr::Or(a, b) => a.eval(lookup) || b.eval(lookup),
        }
    }

    /// Column names referenced by the expression.
    pub fn columns(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            GroupExpr::Column(name) => {
                out.insert(name);
            }
            GroupExpr::Not(e) => e.collect(out),
            GroupExpr::And(a, b) | GroupExpr::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupExpr::Column(name) => write!(f, "{name}"),
            GroupExpr::Not(e) => write!(f, "!{e}"),
            GroupExpr::And(a, b) => write!(f, "({a} & {b})"),
            GroupExpr::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}
