//! The small input language for fibration data: products of linear forms in
//! u and v with integer, rational, or zeta-polynomial coefficients.
//!
//! Grammar:
//!   defs   := "alpha" "=" factors ";" "beta" "=" factors ";"
//!   factors:= linear | "(" linear ")" { "(" linear ")" }
//!   linear := term { ("+" | "-") term }
//!   term   := [ coeff [ "*" ] ] ("u" | "v")
//!   coeff  := atom { "*" atom }
//!   atom   := int [ "/" int ] | "zeta" [ "^" int ]

use klein_core::exact::cyclo::{CycloNum, Rational};
use klein_core::fibration::LinearFactor;
use num_bigint::BigInt;

#[derive(Debug)]
pub struct DslError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for DslError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for DslError {}

pub struct FactorLists {
    pub alpha: Vec<LinearFactor>,
    pub beta: Vec<LinearFactor>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(char),
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, DslError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().unwrap();
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "=;()+-*/^".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(DslError {
                position: i,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(usize::MAX)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), DslError> {
        match self.next() {
            Some(Tok::Sym(s)) if s == c => Ok(()),
            other => Err(DslError {
                position: self.position(),
                message: format!("expected {c:?}, found {other:?}"),
            }),
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<(), DslError> {
        match self.next() {
            Some(Tok::Ident(s)) if s == name => Ok(()),
            other => Err(DslError {
                position: self.position(),
                message: format!("expected {name:?}, found {other:?}"),
            }),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError {
            position: self.position(),
            message: message.into(),
        })
    }
}

/// One coefficient atom: an integer, a rational, or a zeta power.
fn parse_atom(lx: &mut Lexer) -> Result<CycloNum, DslError> {
    match lx.next() {
        Some(Tok::Int(n)) => {
            if let Some(Tok::Sym('/')) = lx.peek() {
                lx.next();
                match lx.next() {
                    Some(Tok::Int(d)) if d != BigInt::from(0) => Ok(CycloNum::from_rational(
                        &Rational::new(n, d),
                    )),
                    _ => lx.err("expected a nonzero integer denominator"),
                }
            } else {
                Ok(CycloNum::from_rational(&Rational::from_integer(n)))
            }
        }
        Some(Tok::Ident(s)) if s == "zeta" => {
            if let Some(Tok::Sym('^')) = lx.peek() {
                lx.next();
                let mut sign = 1i64;
                if let Some(Tok::Sym('-')) = lx.peek() {
                    lx.next();
                    sign = -1;
                }
                match lx.next() {
                    Some(Tok::Int(k)) => {
                        let k: i64 = i64::try_from(&k).map_err(|_| DslError {
                            position: lx.position(),
                            message: "zeta exponent too large".into(),
                        })?;
                        Ok(CycloNum::zeta_pow(sign * k))
                    }
                    _ => lx.err("expected an integer exponent after ^"),
                }
            } else {
                Ok(CycloNum::zeta())
            }
        }
        other => Err(DslError {
            position: lx.position(),
            message: format!("expected a coefficient, found {other:?}"),
        }),
    }
}

/// One term of a linear form: a coefficient times u or v. Two variables in
/// a term, or a bare constant term, are rejected: factors must be linear
/// and homogeneous.
fn parse_term(lx: &mut Lexer) -> Result<(CycloNum, char), DslError> {
    let mut coeff = CycloNum::one();
    let mut var: Option<char> = None;
    loop {
        match lx.peek() {
            Some(Tok::Ident(s)) if s == "u" || s == "v" => {
                if var.is_some() {
                    return lx.err("a linear factor has at most one variable per term");
                }
                var = Some(s.chars().next().unwrap());
                lx.next();
            }
            Some(Tok::Ident(_)) | Some(Tok::Int(_)) => {
                if var.is_some() {
                    return lx.err("coefficients go before the variable");
                }
                let atom = parse_atom(lx)?;
                coeff *= atom;
            }
            Some(Tok::Sym('*')) => {
                lx.next();
            }
            _ => break,
        }
    }
    match var {
        Some(v) => Ok((coeff, v)),
        None => lx.err("term without u or v: factors must be homogeneous linear forms"),
    }
}

fn parse_linear(lx: &mut Lexer) -> Result<LinearFactor, DslError> {
    let mut cu = CycloNum::zero();
    let mut cv = CycloNum::zero();
    let mut first = true;
    loop {
        let mut sign = 1i64;
        match lx.peek() {
            Some(Tok::Sym('+')) => {
                lx.next();
            }
            Some(Tok::Sym('-')) => {
                lx.next();
                sign = -1;
            }
            _ if first => {}
            _ => break,
        }
        first = false;
        let (mut c, var) = parse_term(lx)?;
        if sign < 0 {
            c = -c;
        }
        match var {
            'u' => cu += c,
            _ => cv += c,
        }
        match lx.peek() {
            Some(Tok::Sym('+')) | Some(Tok::Sym('-')) => continue,
            _ => break,
        }
    }
    LinearFactor::new(cu, cv).map_err(|_| DslError {
        position: lx.position(),
        message: "factor is identically zero".into(),
    })
}

fn parse_factors(lx: &mut Lexer) -> Result<Vec<LinearFactor>, DslError> {
    let mut out = Vec::new();
    if let Some(Tok::Sym('(')) = lx.peek() {
        while let Some(Tok::Sym('(')) = lx.peek() {
            lx.next();
            out.push(parse_linear(lx)?);
            lx.expect_sym(')')?;
        }
    } else {
        out.push(parse_linear(lx)?);
    }
    match lx.peek() {
        Some(Tok::Sym(';')) => Ok(out),
        _ => lx.err("expected ';' after the factors (is the input a product of linear factors?)"),
    }
}

/// Parses `alpha = <product of linear forms>; beta = <product>;` and
/// enforces equal degrees.
pub fn parse_dsl(text: &str) -> Result<FactorLists, DslError> {
    let mut lx = Lexer {
        toks: lex(text)?,
        pos: 0,
    };
    lx.expect_ident("alpha")?;
    lx.expect_sym('=')?;
    let alpha = parse_factors(&mut lx)?;
    lx.expect_sym(';')?;
    lx.expect_ident("beta")?;
    lx.expect_sym('=')?;
    let beta = parse_factors(&mut lx)?;
    lx.expect_sym(';')?;
    if lx.peek().is_some() {
        return lx.err("trailing input after the definitions");
    }
    if alpha.len() != beta.len() {
        return Err(DslError {
            position: 0,
            message: format!(
                "alpha and beta must have the same degree, got {} and {}",
                alpha.len(),
                beta.len()
            ),
        });
    }
    Ok(FactorLists {
        n: alpha.len(),
        alpha,
        beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_linear_pair() {
        let d = parse_dsl("alpha = u; beta = v;").unwrap();
        assert_eq!(d.n, 1);
        assert!(d.alpha[0].coeff_u.is_one() && d.alpha[0].coeff_v.is_zero());
        assert!(d.beta[0].coeff_u.is_zero() && d.beta[0].coeff_v.is_one());
    }

    #[test]
    fn products_and_duplicates() {
        let d = parse_dsl("alpha = (u)(u); beta = (v)(u+v);").unwrap();
        assert_eq!(d.n, 2);
        assert!(d.beta[1].coeff_u.is_one() && d.beta[1].coeff_v.is_one());
    }

    #[test]
    fn coefficients() {
        let d = parse_dsl("alpha = 2u - 3/5 v; beta = zeta^3 u + v;").unwrap();
        assert_eq!(d.alpha[0].coeff_u, CycloNum::from_int(2));
        assert_eq!(d.beta[0].coeff_u, CycloNum::zeta_pow(3));
    }

    #[test]
    fn nonlinear_is_a_syntax_error() {
        let err = parse_dsl("alpha = u*u + v; beta = v;").unwrap_err();
        assert!(err.message.contains("one variable"), "{err}");
    }

    #[test]
    fn degree_mismatch_rejected() {
        let err = parse_dsl("alpha = (u)(v); beta = v;").unwrap_err();
        assert!(err.message.contains("same degree"), "{err}");
    }

    #[test]
    fn constant_term_rejected() {
        assert!(parse_dsl("alpha = u + 1; beta = v;").is_err());
    }
}
