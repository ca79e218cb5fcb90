use std::collections::HashSet;

use super::{CmpOp, DenialConstraint, ParseError, Predicate, Term, TupleVar};
use crate::value::{Decimal, Value};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(Decimal),
    Colon,
    Bang,
    LParen,
    RParen,
    Amp,
    Dot,
    Op(CmpOp),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Colon => "':'".into(),
            Tok::Bang => "'!'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Amp => "'&'".into(),
            Tok::Dot => "'.'".into(),
            Tok::Op(op) => format!("'{}'", op.symbol()),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    line_start: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer {
            chars: src.char_indices().peekable(),
            src,
            line,
            line_start: 0,
        }
    }

    fn column(&self, byte: usize) -> usize {
        self.src[self.line_start..byte].chars().count() + 1
    }

    fn err(&self, byte: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column(byte),
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while let Some(&(at, c)) = self.chars.peek() {
            let tok = match c {
                '\n' => {
                    self.chars.next();
                    self.line += 1;
                    self.line_start = at + 1;
                    continue;
                }
                c if c.is_whitespace() => {
                    self.chars.next();
                    continue;
                }
                '#' => break,
                ':' => self.single(Tok::Colon),
                '(' => self.single(Tok::LParen),
                ')' => self.single(Tok::RParen),
                '&' => self.single(Tok::Amp),
                '.' => self.single(Tok::Dot),
                '=' => self.single(Tok::Op(CmpOp::Eq)),
                '!' => {
                    self.chars.next();
                    if self.eat('=') {
                        Tok::Op(CmpOp::Neq)
                    } else {
                        Tok::Bang
                    }
                }
                '<' => {
                    self.chars.next();
                    Tok::Op(if self.eat('=') { CmpOp::Leq } else { CmpOp::Lt })
                }
                '>' => {
                    self.chars.next();
                    Tok::Op(if self.eat('=') { CmpOp::Geq } else { CmpOp::Gt })
                }
                '"' => self.string(at)?,
                c if c.is_ascii_digit() || c == '-' || c == '+' => self.number(at)?,
                c if c.is_alphanumeric() || c == '_' => {
                    let mut s = String::new();
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            s.push(c);
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(s)
                }
                other => return Err(self.err(at, format!("unexpected character {other:?}"))),
            };
            out.push((tok, at));
        }
        Ok(out)
    }

    fn single(&mut self, t: Tok) -> Tok {
        self.chars.next();
        t
    }

    fn eat(&mut self, want: char) -> bool {
        if self.chars.peek().is_some_and(|&(_, c)| c == want) {
            self.chars.next();
            true
        } else {
            false
        }
    }

    fn string(&mut self, start: usize) -> Result<Tok, ParseError> {
        self.chars.next();
        let mut s = String::new();
        loop {
            match self.chars.next() {
                None | Some((_, '\n')) => {
                    return Err(self.err(start, "unterminated string literal"))
                }
                Some((_, '"')) => return Ok(Tok::Str(s)),
                Some((at, '\\')) => match self.chars.next() {
                    Some((_, c @ ('"' | '\\'))) => s.push(c),
                    _ => return Err(self.err(at, "invalid escape in string literal")),
                },
                Some((_, c)) => s.push(c),
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let mut end = start;
        while let Some(&(at, c)) = self.chars.peek() {
            if c.is_ascii_digit() || c == '.' || (at == start && (c == '-' || c == '+')) {
                end = at + c.len_utf8();
                self.chars.next();
            } else {
                break;
            }
        }
        let lexeme = &self.src[start..end];
        Decimal::parse_strict(lexeme)
            .map(Tok::Num)
            .ok_or_else(|| self.err(start, format!("invalid number {lexeme:?}")))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    line: usize,
    src: String,
}

impl Parser {
    fn err_at(&self, byte: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.src[..byte].chars().count() + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(_, at)| at)
    }

    fn next(&mut self, what: &str) -> Result<(Tok, usize), ParseError> {
        match self.toks.get(self.pos).cloned() {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.err_at(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let (t, at) = self.next(what)?;
        if t == want {
            Ok(())
        } else {
            Err(self.err_at(at, format!("expected {what}, found {}", t.describe())))
        }
    }

    fn constraint(&mut self) -> Result<DenialConstraint, ParseError> {
        let id = match self.next("constraint label")? {
            (Tok::Ident(s), _) => s,
            (t, at) => {
                return Err(self.err_at(
                    at,
                    format!("expected constraint label, found {}", t.describe()),
                ))
            }
        };
        self.expect(Tok::Colon, "':'")?;
        self.expect(Tok::Bang, "'!'")?;
        self.expect(Tok::LParen, "'('")?;
        let mut predicates = vec![self.predicate()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            predicates.push(self.predicate()?);
        }
        self.expect(Tok::RParen, "'&' or ')'")?;
        if let Some((t, at)) = self.toks.get(self.pos) {
            return Err(self.err_at(*at, format!("unexpected {} after constraint", t.describe())));
        }
        Ok(DenialConstraint { id, predicates })
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let start = self.here();
        let left = self.term()?;
        let op = match self.next("comparison operator")? {
            (Tok::Op(op), _) => op,
            (t, at) => {
                return Err(self.err_at(
                    at,
                    format!(
                        "unknown operator {}, expected one of = != < <= > >=",
                        t.describe()
                    ),
                ))
            }
        };
        let right = self.term()?;
        if matches!((&left, &right), (Term::Const(_), Term::Const(_))) {
            return Err(self.err_at(start, "predicate must reference t1 or t2"));
        }
        Ok(Predicate { left, op, right })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.next("term")? {
            (Tok::Str(s), _) => Ok(Term::Const(Value::text(s))),
            (Tok::Num(n), _) => Ok(Term::Const(Value::Number(n))),
            (Tok::Ident(v), at) => {
                let var = match v.as_str() {
                    "t1" => TupleVar::T1,
                    "t2" => TupleVar::T2,
                    _ => return Err(self.err_at(at, format!("expected t1 or t2, found {v:?}"))),
                };
                self.expect(Tok::Dot, "'.'")?;
                match self.next("attribute name")? {
                    (Tok::Ident(attr), _) => Ok(Term::Cell { var, attr }),
                    (t, at) => Err(self.err_at(
                        at,
                        format!("expected attribute name, found {}", t.describe()),
                    )),
                }
            }
            (t, at) => {
                let msg = if matches!(t, Tok::Op(_) | Tok::Bang) {
                    format!("unknown operator near {}", t.describe())
                } else {
                    format!("expected term, found {}", t.describe())
                };
                Err(self.err_at(at, msg))
            }
        }
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<DenialConstraint>, ParseError> {
    let toks = Lexer::new(line, line_no).tokens()?;
    if toks.is_empty() {
        return Ok(None);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: line.find('#').unwrap_or(line.len()),
        line: line_no,
        src: line.to_owned(),
    };
    p.constraint().map(Some)
}

/// Parses a single constraint.
pub fn parse_dc(text: &str) -> Result<DenialConstraint, ParseError> {
    let text = text.trim_end_matches(['\n', '\r']);
    if text.contains('\n') {
        let mut all = parse_dcs(text)?;
        if all.len() == 1 {
            return Ok(all.remove(0));
        }
        return Err(ParseError {
            line: 1,
            column: 1,
            message: format!("expected exactly one constraint, found {}", all.len()),
        });
    }
    parse_line(text, 1)?.ok_or_else(|| ParseError {
        line: 1,
        column: 1,
        message: "expected constraint label, found end of input".into(),
    })
}

/// Parses a constraint file: one constraint per line, `#` starts a comment,
/// blank lines are ignored. Labels must be unique.
pub fn parse_dcs(text: &str) -> Result<Vec<DenialConstraint>, ParseError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(dc) = parse_line(line, i + 1)? {
            if !seen.insert(dc.id.clone()) {
                return Err(ParseError {
                    line: i + 1,
                    column: line.len() - line.trim_start().len() + 1,
                    message: format!("duplicate constraint label {:?}", dc.id),
                });
            }
            out.push(dc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_team_city_constraint() {
        let dc = parse_dc("C1: !(t1.Team = t2.Team & t1.City != t2.City)").unwrap();
        assert_eq!(dc.id, "C1");
        assert_eq!(dc.predicates.len(), 2);
        assert_eq!(dc.predicates[0].op, CmpOp::Eq);
        assert_eq!(
            dc.predicates[0].left,
            Term::Cell {
                var: TupleVar::T1,
                attr: "Team".into()
            }
        );
        assert_eq!(dc.predicates[1].op, CmpOp::Neq);
        assert_eq!(
            dc.predicates[1].right,
            Term::Cell {
                var: TupleVar::T2,
                attr: "City".into()
            }
        );
    }

    #[test]
    fn whitespace_is_insignificant() {
        let a = parse_dc("C2:!(t1.City=t2.City&t1.Country!=t2.Country)").unwrap();
        let b =
            parse_dc("  C2 :  ! ( t1 . City = t2.City   &  t1.Country != t2.Country )  ").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_unknown_operator() {
        let e = parse_dc("X: !(t1.A ~ t2.A)").unwrap_err();
        assert_eq!((e.line, e.column), (1, 11));
        let e = parse_dc("X: !(t1.A == t2.A)").unwrap_err();
        assert!(e.message.contains("operator"), "{e}");
        let e = parse_dc("X: !(t1.A <> t2.A)").unwrap_err();
        assert!(e.message.contains("operator"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_dc("C1 !(t1.A = t2.A)").unwrap_err();
        assert_eq!(e.column, 4);
        let e = parse_dc("C1: !(t1.A = t2.A").unwrap_err();
        assert!(e.message.contains("end of input"));
        let e = parse_dc("C1: !(t3.A = t2.A)").unwrap_err();
        assert_eq!(e.column, 7);
        let e = parse_dc("C1: !()").unwrap_err();
        assert_eq!(e.column, 7);
        let e = parse_dc("C1: !(\"a\" = 1)").unwrap_err();
        assert!(e.message.contains("t1 or t2"));
        let e = parse_dc("C1: !(t1.A = \"open)").unwrap_err();
        assert!(e.message.contains("unterminated"));
    }

    #[test]
    fn constants() {
        let dc = parse_dc(r#"K: !(t1.Country = "Spain" & t1.Year >= -2.50 & t1.N = "a \"q\" \\")"#)
            .unwrap();
        assert_eq!(dc.predicates[0].right, Term::Const(Value::text("Spain")));
        assert_eq!(
            dc.predicates[1].right,
            Term::Const(Value::from_field("-2.5"))
        );
        assert_eq!(
            dc.predicates[2].right,
            Term::Const(Value::text("a \"q\" \\"))
        );
        assert_eq!(parse_dc(&dc.to_string()).unwrap(), dc);
    }

    #[test]
    fn file_with_comments_and_errors_by_line() {
        let text = "# league constraints\n\nC1: !(t1.A = t2.A) # trailing\nC2: !(t1.B = t2.B)\n";
        let dcs = parse_dcs(text).unwrap();
        assert_eq!(
            dcs.iter().map(|d| d.id.as_str()).collect::<Vec<_>>(),
            ["C1", "C2"]
        );
        let bad = "C1: !(t1.A = t2.A)\nC2: !(t1.B = t2.B)\nC3: !(t1.B ~ t2.B)\n";
        assert_eq!(parse_dcs(bad).unwrap_err().line, 3);
        let dup = "C1: !(t1.A = t2.A)\nC1: !(t1.B = t2.B)\n";
        let e = parse_dcs(dup).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("duplicate"));
    }

    #[test]
    fn round_trip_of_c2() {
        let s = "C2: !(t1.City = t2.City & t1.Country != t2.Country)";
        let once = parse_dc(s).unwrap();
        assert_eq!(once.to_string(), s);
        assert_eq!(parse_dc(&once.to_string()).unwrap(), once);
    }
}
