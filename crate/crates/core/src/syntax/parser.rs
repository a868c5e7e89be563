//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! formula := or ('->' formula)?
//! or      := and ('\/' and)*
//! and     := amp ('/\' amp)*
//! amp     := unary ('&' unary)*
//! unary   := '~' unary | ('E' | 'A') ident+ '.' formula | primary
//! primary := '(' formula ')' | '0' | '1' | '@' digits | atom
//! atom    := ident ('(' terms ')')? | term '=' term
//! ```
//!
//! Quantifiers extend as far right as possible. `~p` abbreviates `p -> 0`.

use super::{Formula, Language, SyntaxError, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    At(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Amp,
    Wedge,
    Vee,
    Arrow,
    Equals,
    Tilde,
    Eof,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| SyntaxError::Parse {
        pos,
        msg: msg.to_string(),
    };
    let number = |i: &mut usize| -> Result<usize, SyntaxError> {
        let start = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        text[start..*i]
            .parse()
            .map_err(|_| err(start, "expected a number"))
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                i += 1;
                Tok::LParen
            }
            b')' => {
                i += 1;
                Tok::RParen
            }
            b',' => {
                i += 1;
                Tok::Comma
            }
            b'.' => {
                i += 1;
                Tok::Dot
            }
            b'&' => {
                i += 1;
                Tok::Amp
            }
            b'=' => {
                i += 1;
                Tok::Equals
            }
            b'~' => {
                i += 1;
                Tok::Tilde
            }
            b'/' if bytes.get(i + 1) == Some(&b'\\') => {
                i += 2;
                Tok::Wedge
            }
            b'\\' if bytes.get(i + 1) == Some(&b'/') => {
                i += 2;
                Tok::Vee
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                Tok::Arrow
            }
            b'@' => {
                i += 1;
                if !bytes.get(i).is_some_and(u8::is_ascii_digit) {
                    return Err(err(start, "expected digits after `@`"));
                }
                Tok::At(number(&mut i)?)
            }
            b'0'..=b'9' => Tok::Num(number(&mut i)?),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                Tok::Ident(text[start..i].to_string())
            }
            _ => return Err(err(start, &format!("unexpected character `{}`", c as char))),
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

/// How unknown symbols are treated.
enum Symbols<'a> {
    Declared(&'a Language),
    /// Symbols are declared on first use with the arity they are used with.
    Inferred(Language),
}

impl Symbols<'_> {
    fn lang(&self) -> &Language {
        match self {
            Symbols::Declared(l) => l,
            Symbols::Inferred(l) => l,
        }
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    symbols: Symbols<'a>,
}

/// An identifier with optional argument list, before deciding whether it is a
/// predicate atom or a term.
struct Raw {
    name: String,
    args: Option<Vec<Term>>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::Parse {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Vee {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.strong()?;
        while *self.peek() == Tok::Wedge {
            self.bump();
            lhs = Formula::and(lhs, self.strong()?);
        }
        Ok(lhs)
    }

    fn strong(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = Formula::strong_and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::negate(self.unary()?))
            }
            Tok::Ident(q) if q == "E" || q == "A" => {
                self.bump();
                let mut vars = Vec::new();
                while let Tok::Ident(v) = self.peek().clone() {
                    if v == "E" || v == "A" {
                        return self.error("quantifier keyword used as a variable");
                    }
                    if self.symbols.lang().predicate_arity(&v).is_some()
                        || self.symbols.lang().function_arity(&v).is_some()
                    {
                        return self.error(format!("`{v}` is a declared symbol, not a variable"));
                    }
                    self.bump();
                    vars.push(v);
                }
                if vars.is_empty() {
                    return self.error("expected a variable after quantifier");
                }
                self.expect(Tok::Dot, "`.` after quantified variables")?;
                let body = self.formula()?;
                Ok(vars.iter().rev().fold(body, |acc, v| {
                    if q == "E" {
                        Formula::exists(v, acc)
                    } else {
                        Formula::forall(v, acc)
                    }
                }))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Num(0) => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::Num(1) => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Num(_) => self.error("only 0 and 1 are truth constants; use @k for others"),
            Tok::At(k) => {
                self.bump();
                Ok(Formula::Truth(k))
            }
            Tok::Ident(_) => self.atom(),
            Tok::Eof => self.error("unexpected end of input"),
            t => self.error(format!("unexpected token {t:?}")),
        }
    }

    fn raw(&mut self) -> Result<Raw, SyntaxError> {
        let at = self.offset();
        let Tok::Ident(name) = self.bump() else {
            return Err(SyntaxError::Parse {
                pos: at,
                msg: "expected an identifier".into(),
            });
        };
        if name == "E" || name == "A" {
            return Err(SyntaxError::Parse {
                pos: at,
                msg: "quantifier keyword in term position".into(),
            });
        }
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                args.push(self.term()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
            }
            self.expect(Tok::RParen, "`)` closing the argument list")?;
            Some(args)
        } else {
            None
        };
        Ok(Raw { name, args, at })
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        let raw = self.raw()?;
        if *self.peek() == Tok::Equals {
            let lhs = self.resolve_term(raw)?;
            self.bump();
            let rhs = self.term()?;
            if !self.symbols.lang().has_equality() {
                return Err(SyntaxError::NoEquality);
            }
            return Ok(Formula::Eq(lhs, rhs));
        }
        let lang = self.symbols.lang();
        if let Some(v) = lang.algebra_constant(&raw.name) {
            if raw.args.as_ref().is_some_and(|a| !a.is_empty()) {
                return Err(SyntaxError::Arity {
                    name: raw.name,
                    expected: 0,
                    found: raw.args.map_or(0, |a| a.len()),
                });
            }
            return Ok(Formula::Truth(v));
        }
        let args = raw.args.unwrap_or_default();
        let declared_arity = lang.predicate_arity(&raw.name);
        let is_function = lang.function_arity(&raw.name).is_some();
        match declared_arity {
            Some(a) if a == args.len() => Ok(Formula::Atom(raw.name, args)),
            Some(a) => Err(SyntaxError::Arity {
                name: raw.name,
                expected: a,
                found: args.len(),
            }),
            None => match &mut self.symbols {
                Symbols::Inferred(l) if !is_function => {
                    l.add_predicate(&raw.name, args.len())?;
                    Ok(Formula::Atom(raw.name, args))
                }
                _ if is_function || args.is_empty() => Err(SyntaxError::Parse {
                    pos: raw.at,
                    msg: format!("`{}` is not a predicate; expected `=`", raw.name),
                }),
                _ => Err(SyntaxError::UnknownSymbol(raw.name)),
            },
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let raw = self.raw()?;
        self.resolve_term(raw)
    }

    fn resolve_term(&mut self, raw: Raw) -> Result<Term, SyntaxError> {
        let lang = self.symbols.lang();
        if lang.predicate_arity(&raw.name).is_some() || lang.algebra_constant(&raw.name).is_some() {
            return Err(SyntaxError::Parse {
                pos: raw.at,
                msg: format!("`{}` is not a term", raw.name),
            });
        }
        match (lang.function_arity(&raw.name), raw.args) {
            (Some(a), args) => {
                let args = args.unwrap_or_default();
                if a != args.len() {
                    return Err(SyntaxError::Arity {
                        name: raw.name,
                        expected: a,
                        found: args.len(),
                    });
                }
                Ok(Term::App(raw.name, args))
            }
            (None, None) => Ok(Term::Var(raw.name)),
            (None, Some(args)) => match &mut self.symbols {
                Symbols::Inferred(l) => {
                    l.add_function(&raw.name, args.len())?;
                    Ok(Term::App(raw.name, args))
                }
                Symbols::Declared(_) => Err(SyntaxError::UnknownSymbol(raw.name)),
            },
        }
    }
}

fn run(text: &str, symbols: Symbols<'_>) -> Result<(Formula, Language), SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        symbols,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.error("trailing input");
    }
    let lang = match p.symbols {
        Symbols::Declared(l) => l.clone(),
        Symbols::Inferred(l) => l,
    };
    Ok((f.rename_apart(), lang))
}

/// Parses `text` against a declared language. Bound variables come back renamed apart.
pub fn parse_formula(text: &str, lang: &Language) -> Result<Formula, SyntaxError> {
    run(text, Symbols::Declared(lang)).map(|(f, _)| f)
}

/// Parses `text`, declaring predicate and function symbols from their first use.
///
/// An application followed by `=` is a function; otherwise it is a predicate. Bare
/// identifiers in term position are variables.
pub fn parse_formula_inferring(text: &str) -> Result<(Formula, Language), SyntaxError> {
    run(text, Symbols::Inferred(Language::new()))
}

/// Parses a list of formulas sharing one inferred language.
pub fn parse_all_inferring(texts: &[&str]) -> Result<(Vec<Formula>, Language), SyntaxError> {
    let mut lang = Language::new();
    let mut out = Vec::new();
    for t in texts {
        let (f, l) = run(t, Symbols::Inferred(lang.clone()))?;
        lang = l;
        out.push(f);
    }
    Ok((out, lang))
}
