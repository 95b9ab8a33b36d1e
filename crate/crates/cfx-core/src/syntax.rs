//! Concrete syntax shared by regular and context-free expressions.
//!
//! ```text
//! expr  ::= "mu" name "." expr          (context-free only, lowest)
//!         | cat ("+" expr)?             right associative
//! cat   ::= starred ("."? starred)*     right associative; a dot is
//!                                        optional between factors
//! starred ::= atom "*"*
//! atom  ::= "0" | "1" | letter | "_" alnum* | "(" expr ")"
//! ```
//!
//! A single letter is a symbol unless an enclosing `mu` binds it; names
//! starting with `_` are always placeholders. The word `mu` is a keyword
//! only when whitespace follows it, so the symbols m and u can still be
//! concatenated as `m.u` or `mu` at the end of input.
//!
//! In context-free expressions `e*` is sugar for `mu t. e.t+1` with a
//! fresh binder `_s0`, `_s1`, ...; the input is scanned first so the
//! generated names never collide with ones already in use.
//!
//! [`parse_regex`] rejects `mu` and placeholders outright; everything
//! else is common to both entry points.

use thiserror::Error;

use crate::cfe::Cfe;
use crate::regex::RegEx;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("at offset {pos}: {msg}")]
pub struct ParseError {
    /// Character offset into the input.
    pub pos: usize,
    pub msg: String,
}

pub fn parse_regex(input: &str) -> Result<RegEx, ParseError> {
    let ast = Parser::new(input, false).parse_all()?;
    Ok(lower_regex(&ast))
}

pub fn parse_cfe(input: &str) -> Result<Cfe, ParseError> {
    let ast = Parser::new(input, true).parse_all()?;
    let mut fresh = seed_fresh(input);
    Ok(lower_cfe(&ast, &mut fresh))
}

enum Ast {
    Phi,
    Eps,
    Sym(char),
    Var(String),
    Alt(Box<Ast>, Box<Ast>),
    Cat(Box<Ast>, Box<Ast>),
    Star(Box<Ast>),
    Mu(String, Box<Ast>),
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    cfe: bool,
    binders: Vec<String>,
}

impl Parser {
    fn new(input: &str, cfe: bool) -> Parser {
        Parser {
            chars: input.chars().collect(),
            pos: 0,
            cfe,
            binders: Vec::new(),
        }
    }

    fn parse_all(mut self) -> Result<Ast, ParseError> {
        let ast = self.expr()?;
        self.skip_ws();
        match self.peek() {
            None => Ok(ast),
            Some(_) if self.at_mu_keyword() => {
                self.err("a mu expression needs parentheses in this position")
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    /// `mu` is a keyword only when whitespace follows.
    fn at_mu_keyword(&self) -> bool {
        self.chars.get(self.pos) == Some(&'m')
            && self.chars.get(self.pos + 1) == Some(&'u')
            && self
                .chars
                .get(self.pos + 2)
                .is_some_and(|c| c.is_whitespace())
    }

    fn at_atom_start(&self) -> bool {
        matches!(
            self.peek(),
            Some('(') | Some('0') | Some('1') | Some('_')
        ) || self.peek().is_some_and(|c| c.is_ascii_alphabetic())
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        self.skip_ws();
        if self.at_mu_keyword() {
            return self.mu();
        }
        let l = self.cat()?;
        self.skip_ws();
        if self.peek() == Some('+') {
            self.pos += 1;
            self.skip_ws();
            if self.at_mu_keyword() {
                return self.err("a mu expression needs parentheses in this position");
            }
            let r = self.expr()?;
            return Ok(Ast::Alt(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn mu(&mut self) -> Result<Ast, ParseError> {
        if !self.cfe {
            return self.err("mu is not allowed in a regular expression");
        }
        self.pos += 2;
        self.skip_ws();
        let name = self.ident("expected a binder name after `mu`")?;
        self.skip_ws();
        if self.bump() != Some('.') {
            return self.err(format!("expected `.` after binder `{name}`"));
        }
        self.binders.push(name.clone());
        let body = self.expr();
        self.binders.pop();
        Ok(Ast::Mu(name, Box::new(body?)))
    }

    fn cat(&mut self) -> Result<Ast, ParseError> {
        let mut items = vec![self.starred()?];
        loop {
            self.skip_ws();
            if self.peek() == Some('.') {
                self.pos += 1;
                items.push(self.starred()?);
            } else if self.at_atom_start() && !self.at_mu_keyword() {
                items.push(self.starred()?);
            } else {
                break;
            }
        }
        let mut rev = items.into_iter().rev();
        let mut acc = rev.next().expect("at least one factor");
        for item in rev {
            acc = Ast::Cat(Box::new(item), Box::new(acc));
        }
        Ok(acc)
    }

    fn starred(&mut self) -> Result<Ast, ParseError> {
        let mut ast = self.atom()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            ast = Ast::Star(Box::new(ast));
        }
        Ok(ast)
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        self.skip_ws();
        if self.at_mu_keyword() {
            if self.cfe {
                return self.err("a mu expression needs parentheses in this position");
            }
            return self.err("mu is not allowed in a regular expression");
        }
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.bump() != Some(')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some('0') => {
                self.pos += 1;
                Ok(Ast::Phi)
            }
            Some('1') => {
                self.pos += 1;
                Ok(Ast::Eps)
            }
            Some('_') => {
                if !self.cfe {
                    return self.err("placeholders are not allowed in a regular expression");
                }
                let name = self.ident("expected a placeholder name")?;
                Ok(Ast::Var(name))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
                if self.cfe && self.binders.iter().any(|b| b.len() == 1 && b.starts_with(c)) {
                    Ok(Ast::Var(c.to_string()))
                } else {
                    Ok(Ast::Sym(c))
                }
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    /// A single letter, or `_` followed by alphanumerics.
    fn ident(&mut self, expect: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some('_') => {
                let mut name = String::from('_');
                self.pos += 1;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                    name.push(self.bump().expect("peeked"));
                }
                Ok(name)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
                Ok(c.to_string())
            }
            _ => self.err(expect),
        }
    }
}

fn lower_regex(ast: &Ast) -> RegEx {
    match ast {
        Ast::Phi => RegEx::Phi,
        Ast::Eps => RegEx::Eps,
        Ast::Sym(c) => RegEx::Sym(*c),
        Ast::Alt(l, r) => RegEx::alt(lower_regex(l), lower_regex(r)),
        Ast::Cat(l, r) => RegEx::cat(lower_regex(l), lower_regex(r)),
        Ast::Star(inner) => RegEx::star(lower_regex(inner)),
        Ast::Var(_) | Ast::Mu(..) => unreachable!("rejected during regex parsing"),
    }
}

fn lower_cfe(ast: &Ast, fresh: &mut u64) -> Cfe {
    match ast {
        Ast::Phi => Cfe::Phi,
        Ast::Eps => Cfe::Eps,
        Ast::Sym(c) => Cfe::Sym(*c),
        Ast::Var(name) => Cfe::var(name.clone()),
        Ast::Alt(l, r) => Cfe::alt(lower_cfe(l, fresh), lower_cfe(r, fresh)),
        Ast::Cat(l, r) => Cfe::cat(lower_cfe(l, fresh), lower_cfe(r, fresh)),
        Ast::Star(inner) => {
            let name = format!("_s{fresh}");
            *fresh += 1;
            let body = lower_cfe(inner, fresh);
            Cfe::mu(
                name.clone(),
                Cfe::alt(Cfe::cat(body, Cfe::var(name)), Cfe::Eps),
            )
        }
        Ast::Mu(name, body) => Cfe::mu(name.clone(), lower_cfe(body, fresh)),
    }
}

/// First star-sugar name that cannot collide with a `_sN` already in the
/// input.
fn seed_fresh(input: &str) -> u64 {
    let cs: Vec<char> = input.chars().collect();
    let mut next = 0u64;
    let mut i = 0;
    while i < cs.len() {
        if cs[i] == '_' && cs.get(i + 1) == Some(&'s') {
            let mut j = i + 2;
            let mut digits = String::new();
            while j < cs.len() && cs[j].is_ascii_digit() {
                digits.push(cs[j]);
                j += 1;
            }
            if let Ok(n) = digits.parse::<u64>() {
                next = next.max(n.saturating_add(1));
            }
            i = j;
        } else {
            i += 1;
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::RegEx;

    #[test]
    fn regex_precedence() {
        assert_eq!(
            parse_regex("x+y.z*").unwrap(),
            RegEx::alt(
                RegEx::sym('x'),
                RegEx::cat(RegEx::sym('y'), RegEx::star(RegEx::sym('z')))
            )
        );
        // Juxtaposition, explicit dots, and whitespace all concatenate,
        // associating right.
        let xyz = RegEx::cat(RegEx::sym('x'), RegEx::cat(RegEx::sym('y'), RegEx::sym('z')));
        assert_eq!(parse_regex("xyz").unwrap(), xyz);
        assert_eq!(parse_regex("x.y.z").unwrap(), xyz);
        assert_eq!(parse_regex("x y z").unwrap(), xyz);
        assert_eq!(
            parse_regex("x+y+z").unwrap(),
            RegEx::alt(RegEx::sym('x'), RegEx::alt(RegEx::sym('y'), RegEx::sym('z')))
        );
        assert_eq!(
            parse_regex("(x+y)*").unwrap(),
            RegEx::star(RegEx::alt(RegEx::sym('x'), RegEx::sym('y')))
        );
        assert_eq!(
            parse_regex("x**").unwrap(),
            RegEx::star(RegEx::star(RegEx::sym('x')))
        );
        assert_eq!(parse_regex("0").unwrap(), RegEx::Phi);
        assert_eq!(parse_regex("1").unwrap(), RegEx::Eps);
        // The star binds to the atom, not the concatenation.
        assert_eq!(
            parse_regex("xy*").unwrap(),
            RegEx::cat(RegEx::sym('x'), RegEx::star(RegEx::sym('y')))
        );
    }

    #[test]
    fn regex_rejections() {
        assert!(parse_regex("mu a. a").is_err());
        assert!(parse_regex("_p").is_err());
        assert!(parse_regex("").is_err());
        assert!(parse_regex("(x").is_err());
        assert!(parse_regex("x)").is_err());
        assert!(parse_regex("2").is_err());
        let err = parse_regex("x+").unwrap_err();
        assert_eq!(err.pos, 2);
        assert_eq!(err.msg, "unexpected end of input");
    }

    #[test]
    fn cfe_binders_and_scope() {
        assert_eq!(
            parse_cfe("mu a. x.(a.y)+1").unwrap(),
            Cfe::mu(
                "a",
                Cfe::alt(
                    Cfe::cat(Cfe::Sym('x'), Cfe::cat(Cfe::var("a"), Cfe::Sym('y'))),
                    Cfe::Eps
                )
            )
        );
        // Parentheses in x.(a.y) are redundant under right association.
        assert_eq!(
            parse_cfe("mu a. x.a.y+1").unwrap(),
            parse_cfe("mu a. x.(a.y)+1").unwrap()
        );
        // Letters are symbols unless an enclosing mu binds them.
        assert_eq!(parse_cfe("a").unwrap(), Cfe::Sym('a'));
        assert_eq!(
            parse_cfe("mu a. a").unwrap(),
            Cfe::mu("a", Cfe::var("a"))
        );
        assert_eq!(
            parse_cfe("mu a. x").unwrap(),
            Cfe::mu("a", Cfe::Sym('x'))
        );
        // Placeholder names parse even when unbound; well-formedness is
        // a separate check.
        assert_eq!(parse_cfe("_p").unwrap(), Cfe::var("_p"));
        assert_eq!(
            parse_cfe("mu _loop. x._loop+1").unwrap(),
            Cfe::mu(
                "_loop",
                Cfe::alt(Cfe::cat(Cfe::Sym('x'), Cfe::var("_loop")), Cfe::Eps)
            )
        );
    }

    #[test]
    fn mu_needs_following_whitespace() {
        let m_u = Cfe::cat(Cfe::Sym('m'), Cfe::Sym('u'));
        assert_eq!(parse_cfe("m.u").unwrap(), m_u);
        assert_eq!(parse_cfe("mu").unwrap(), m_u);
        assert_eq!(
            parse_cfe("mux").unwrap(),
            Cfe::cat(Cfe::Sym('m'), Cfe::cat(Cfe::Sym('u'), Cfe::Sym('x')))
        );
        assert!(parse_cfe("mu x").is_err());
        // In operand position a mu must be parenthesized.
        assert!(parse_cfe("x+mu a. a").is_err());
        assert!(parse_cfe("x mu a. a").is_err());
        assert_eq!(
            parse_cfe("x+(mu a. a)").unwrap(),
            Cfe::alt(Cfe::Sym('x'), Cfe::mu("a", Cfe::var("a")))
        );
        assert_eq!(
            parse_cfe("x(mu a. a)").unwrap(),
            Cfe::cat(Cfe::Sym('x'), Cfe::mu("a", Cfe::var("a")))
        );
    }

    #[test]
    fn star_desugars_with_fresh_binders() {
        assert_eq!(
            parse_cfe("x*").unwrap(),
            Cfe::mu(
                "_s0",
                Cfe::alt(Cfe::cat(Cfe::Sym('x'), Cfe::var("_s0")), Cfe::Eps)
            )
        );
        let e = parse_cfe("x*.y*").unwrap();
        assert_eq!(
            e,
            Cfe::cat(
                Cfe::mu(
                    "_s0",
                    Cfe::alt(Cfe::cat(Cfe::Sym('x'), Cfe::var("_s0")), Cfe::Eps)
                ),
                Cfe::mu(
                    "_s1",
                    Cfe::alt(Cfe::cat(Cfe::Sym('y'), Cfe::var("_s1")), Cfe::Eps)
                )
            )
        );
        assert_eq!(e.check_well_formed(), Ok(()));

        // Names already present in the input are skipped over.
        let e = parse_cfe("x*.(mu _s0. y._s0+1)").unwrap();
        assert_eq!(e.check_well_formed(), Ok(()));
        assert!(e.binder_map().contains_key("_s1"));

        // Nested stars: outer sugar is named first.
        let e = parse_cfe("(xy*)*").unwrap();
        assert_eq!(e.check_well_formed(), Ok(()));
        let binders = e.binder_map();
        assert!(binders.contains_key("_s0"));
        assert!(binders.contains_key("_s1"));
        assert_eq!(e.enumerate_words(2), ["", "x", "xx", "xy"].into_iter().map(String::from).collect());
    }

    #[test]
    fn error_positions_point_at_the_problem() {
        let err = parse_cfe("mu a").unwrap_err();
        assert_eq!(err.pos, 4);
        let err = parse_cfe("x+*").unwrap_err();
        assert_eq!(err.pos, 2);
        let err = parse_regex("x..y").unwrap_err();
        assert_eq!(err.pos, 2);
    }
}
