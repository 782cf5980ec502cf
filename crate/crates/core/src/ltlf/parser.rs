//! Recursive-descent parser for LTLf text.
//!
//! Precedence, loosest first: `->` (right), `U` (right), `|`, `&`, then the
//! unary operators `!`, `X`, `F`, `G`.

use std::collections::BTreeSet;

use super::{Formula, LtlError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Eventually,
    Always,
    Until,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("atom `{s}`"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LtlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '!' | '~' => Tok::Not,
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    i += 1;
                }
                Tok::And
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    i += 1;
                }
                Tok::Or
            }
            '-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Implies
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b',') {
                    j += 1;
                }
                let word = &text[i..j];
                i = j - 1;
                match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "F" => Tok::Eventually,
                    "G" => Tok::Always,
                    "U" => Tok::Until,
                    _ => Tok::Ident(word.to_string()),
                }
            }
            other => return Err(LtlError::Syntax { pos: start, msg: format!("unexpected character `{other}`") }),
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    declared: Option<&'a BTreeSet<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn err(&self, msg: String) -> LtlError {
        LtlError::Syntax { pos: self.pos(), msg }
    }

    fn implication(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.until()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Not => Ok(Formula::not(self.unary()?)),
            Tok::Next => Ok(Formula::next(self.unary()?)),
            Tok::Eventually => Ok(Formula::eventually(self.unary()?)),
            Tok::Always => Ok(Formula::always(self.unary()?)),
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Ident(name) => {
                if let Some(decl) = self.declared {
                    if !decl.contains(&name) {
                        return Err(LtlError::UndeclaredAtom { atom: name, declared: decl.iter().cloned().collect() });
                    }
                }
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.err(format!("expected `)`, found {}", describe(self.peek()))));
                }
                self.bump();
                Ok(inner)
            }
            other => Err(LtlError::Syntax { pos, msg: format!("expected a formula, found {}", describe(&other)) }),
        }
    }
}

/// Parse `text`. When `declared` is given, every atom must belong to it.
pub fn parse(text: &str, declared: Option<&BTreeSet<String>>) -> Result<Formula, LtlError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, declared };
    let f = p.implication()?;
    if *p.peek() != Tok::End {
        return Err(p.err(format!("unexpected {}", describe(p.peek()))));
    }
    Ok(f)
}
