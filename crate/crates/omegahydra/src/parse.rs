//! Text grammar for notation trees.
//!
//! ```text
//! term  := prod ('+' prod)*
//! prod  := NUM '*' factor | factor
//! factor:= 'w' '^' factor | atom
//! atom  := '0' | '1' | 'w1' | 'rho0'
//!        | 'D0' '(' args ')' | 'D1' '(' args ')' | 'D2' '(' term ')'
//!        | 'F' '(' args ')'
//!        | 'mu' '[' NAME ']' '(' term (';' term (',' term)*)? ')'
//!        | '(' term ')'
//! args  := (term (',' term)* )? ';' term | term
//! ```
//! `Dk(a)` is sugar for the empty stack `Dk(;a)`. Printing is canonical;
//! parse∘print is the identity up to sum flattening.

use crate::error::ParseError;
use crate::term::{self, HydraTerm};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src: src.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected {:?}", c as char))
        }
    }

    fn lookahead_word(&mut self) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_') {
            end += 1;
        }
        std::str::from_utf8(&self.src[start..end]).unwrap_or("")
    }

    fn take_word(&mut self) -> &'a str {
        let w = self.lookahead_word();
        self.pos += w.len();
        w
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError::Syntax { pos: start, msg: "number too large".into() })
    }

    fn term(&mut self) -> Result<HydraTerm, ParseError> {
        let mut parts = vec![self.prod()?];
        while self.eat(b'+') {
            parts.push(self.prod()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            term::sum(parts)
        })
    }

    fn prod(&mut self) -> Result<HydraTerm, ParseError> {
        self.skip_ws();
        if self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit())
        {
            // NUM '*' factor — or a bare '0'/'1' constant
            let save = self.pos;
            let n = self.number()?;
            if self.eat(b'*') {
                if n == 0 {
                    return self.err("multiple must be at least 1");
                }
                let head = self.factor()?;
                return Ok(term::mult(n, head));
            }
            self.pos = save;
            return self.factor();
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<HydraTerm, ParseError> {
        let word = self.lookahead_word();
        if word == "w" {
            // disambiguate 'w^t' from the constant 'w1'
            let save = self.pos;
            self.pos += 1;
            if self.eat(b'^') {
                let body = self.factor()?;
                return Ok(term::exp_or_one(body));
            }
            self.pos = save;
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<HydraTerm, ParseError> {
        if self.eat(b'(') {
            let t = self.term()?;
            self.expect(b')')?;
            return Ok(t);
        }
        let word = self.lookahead_word();
        match word {
            "0" => {
                self.take_word();
                Ok(HydraTerm::Zero)
            }
            "1" => {
                self.take_word();
                Ok(term::one())
            }
            "w1" => {
                self.take_word();
                Ok(term::omega1())
            }
            "rho0" => {
                self.take_word();
                Ok(term::rho0())
            }
            "D0" | "D1" => {
                let level = if word == "D0" { 0 } else { 1 };
                self.take_word();
                self.expect(b'(')?;
                let (stack, body) = self.stack_args()?;
                self.expect(b')')?;
                Ok(term::coll(level, stack, body))
            }
            "D2" => {
                self.take_word();
                self.expect(b'(')?;
                let body = self.term()?;
                self.expect(b')')?;
                Ok(term::exp(body))
            }
            "F" => {
                self.take_word();
                self.expect(b'(')?;
                let (stack, body) = self.stack_args()?;
                self.expect(b')')?;
                Ok(term::fcoll(stack, body))
            }
            "mu" => {
                self.take_word();
                self.expect(b'[')?;
                let name = self.take_word().to_string();
                if name.is_empty() {
                    return self.err("expected a mu-symbol name");
                }
                self.expect(b']')?;
                self.expect(b'(')?;
                let bound = self.term()?;
                let mut args = Vec::new();
                if self.eat(b';') {
                    args.push(self.term()?);
                    while self.eat(b',') {
                        args.push(self.term()?);
                    }
                }
                self.expect(b')')?;
                Ok(HydraTerm::Mu { sym: name, bound: Box::new(bound), args })
            }
            "" => self.err("expected a term"),
            other => Err(ParseError::Syntax {
                pos: self.pos,
                msg: format!("unexpected token {other:?}"),
            }),
        }
    }

    /// `b1,...,bm ; a` with the stack possibly empty or absent.
    fn stack_args(&mut self) -> Result<(Vec<HydraTerm>, HydraTerm), ParseError> {
        if self.eat(b';') {
            let body = self.term()?;
            return Ok((vec![], body));
        }
        let first = self.term()?;
        let mut entries = vec![first];
        while self.eat(b',') {
            entries.push(self.term()?);
        }
        if self.eat(b';') {
            let body = self.term()?;
            Ok((entries, body))
        } else if entries.len() == 1 {
            Ok((vec![], entries.pop().unwrap()))
        } else {
            self.err("expected ';' before the body")
        }
    }
}

/// Parses a notation tree from its text form.
pub fn parse_term(text: &str) -> Result<HydraTerm, ParseError> {
    let mut c = Cursor::new(text);
    let t = c.term()?;
    c.skip_ws();
    if c.pos != c.src.len() {
        return c.err("trailing input");
    }
    Ok(t)
}

fn needs_parens_in_prefix(t: &HydraTerm) -> bool {
    matches!(t, HydraTerm::Sum { .. } | HydraTerm::Mult { .. })
}

fn print_into(t: &HydraTerm, out: &mut String) {
    match t {
        HydraTerm::Zero => out.push('0'),
        HydraTerm::Sum { parts } => {
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                print_into(p, out);
            }
        }
        HydraTerm::Mult { count, head } => {
            out.push_str(&count.to_string());
            out.push('*');
            if needs_parens_in_prefix(head) {
                out.push('(');
                print_into(head, out);
                out.push(')');
            } else {
                print_into(head, out);
            }
        }
        HydraTerm::Coll { level, stack, body } => {
            if stack.is_empty() && body.is_zero() {
                out.push_str(if *level == 0 { "1" } else { "w1" });
                return;
            }
            out.push('D');
            out.push_str(&level.to_string());
            out.push('(');
            for (i, e) in stack.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_into(e, out);
            }
            out.push_str("; ");
            print_into(body, out);
            out.push(')');
        }
        HydraTerm::Exp { body } => {
            if body.is_zero() {
                out.push_str("rho0");
                return;
            }
            out.push_str("w^");
            if needs_parens_in_prefix(body) || matches!(**body, HydraTerm::Exp { .. }) {
                // parenthesize nested exponents for readability
                out.push('(');
                print_into(body, out);
                out.push(')');
            } else {
                print_into(body, out);
            }
        }
        HydraTerm::FColl { stack, body } => {
            out.push('F');
            out.push('(');
            for (i, e) in stack.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_into(e, out);
            }
            out.push_str("; ");
            print_into(body, out);
            out.push(')');
        }
        HydraTerm::Mu { sym, bound, args } => {
            out.push_str("mu[");
            out.push_str(sym);
            out.push_str("](");
            print_into(bound, out);
            if !args.is_empty() {
                out.push_str("; ");
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    print_into(a, out);
                }
            }
            out.push(')');
        }
    }
}

/// Canonical text form (round-trips through `parse_term`).
pub fn print_term(t: &HydraTerm) -> String {
    let mut s = String::new();
    print_into(t, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{coll, exp, int, mult, omega1, one, rho0, sum, Zero};

    #[test]
    fn parse_spec_examples() {
        assert_eq!(parse_term("0").unwrap(), Zero);
        assert_eq!(
            parse_term("D0(;D1(0))").unwrap(),
            coll(0, vec![], coll(1, vec![], Zero))
        );
        assert_eq!(parse_term("3*w1").unwrap(), mult(3, omega1()));
    }

    #[test]
    fn sugar_and_sugarless_agree() {
        assert_eq!(parse_term("1").unwrap(), one());
        assert_eq!(parse_term("D0(0)").unwrap(), one());
        assert_eq!(parse_term("D0(;0)").unwrap(), one());
        assert_eq!(parse_term("w1").unwrap(), omega1());
        assert_eq!(parse_term("D1(0)").unwrap(), omega1());
        assert_eq!(parse_term("rho0").unwrap(), rho0());
        assert_eq!(parse_term("D2(0)").unwrap(), rho0());
        assert_eq!(parse_term("w^w1").unwrap(), exp(omega1()));
        assert_eq!(parse_term("D2(w1)").unwrap(), exp(omega1()));
        // w^0 denotes 1, not rho0
        assert_eq!(parse_term("w^0").unwrap(), one());
    }

    #[test]
    fn stacks_sums_and_mu() {
        assert_eq!(
            parse_term("D0(w1, 1; 2*rho0)").unwrap(),
            coll(0, vec![omega1(), one()], mult(2, rho0()))
        );
        assert_eq!(parse_term("1 + 1 + w1").unwrap(), sum(vec![one(), one(), omega1()]));
        let m = parse_term("mu[dec](w1; 1, 0)").unwrap();
        assert_eq!(
            m,
            HydraTerm::Mu {
                sym: "dec".into(),
                bound: Box::new(omega1()),
                args: vec![one(), Zero]
            }
        );
        assert!(parse_term("mu[](1)").is_err());
        assert!(parse_term("D0(w1, 1)").is_err());
        assert!(parse_term("2*").is_err());
        assert!(parse_term("w1 + ").is_err());
        assert!(parse_term("w1 w1").is_err());
    }

    #[test]
    fn print_round_trip() {
        let samples = [
            "0",
            "1",
            "w1",
            "rho0",
            "3*w1",
            "D0(; D1(; 0))",
            "D0(w1, 1; 2*rho0)",
            "w^(w1 + 1)",
            "F(D2(1), 1; w1)",
            "mu[f](w1; 1)",
            "2*(1 + w1)",
            "1 + 1 + 1",
        ];
        for s in samples {
            let t = parse_term(s).unwrap();
            let printed = print_term(&t);
            assert_eq!(parse_term(&printed).unwrap(), t, "round trip failed for {s}");
        }
        assert_eq!(print_term(&int(2)), "1 + 1");
    }
}
