use super::ast::{Decl, Node, NodeKind, Obj, Program, Span};
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

pub const KEYWORDS: [&str; 10] = ["let", "id", "swap", "copy", "del", "unif", "mult", "unit", "inv", "act"];

const ATOM_START: [&str; 11] = [
    "`id`",
    "`swap`",
    "`copy`",
    "`del`",
    "`unif`",
    "`mult`",
    "`unit`",
    "`inv`",
    "`act`",
    "identifier",
    "`(`",
];

/// Parses a whole program: `let` declarations followed by one expression.
///
/// A declaration body is a single `*`-level term, so the first top-level
/// `;` ends it; wrap a sequential body in parentheses.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    while p.peek_ident("let") {
        let start = p.next().span;
        let name = p.ident("declaration name")?;
        p.expect(Tok::Eq, "`=`")?;
        let body = p.par()?;
        let end = p.expect(Tok::Semi, "`;`")?;
        decls.push(Decl {
            name,
            body,
            span: start.to(end),
        });
    }
    let body = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(&["`;`", "`*`", "end of input"]));
    }
    Ok(Program { decls, body })
}

/// Parses a bare expression (no declarations).
pub fn parse_expr(src: &str) -> Result<Node, ParseError> {
    let prog = parse(src)?;
    if let Some(d) = prog.decls.first() {
        return Err(ParseError {
            line: d.span.line,
            col: d.span.col,
            found: "`let`".into(),
            expected: vec!["an expression".into()],
        });
    }
    Ok(prog.body)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = &self.tokens[self.pos];
        ParseError {
            line: t.span.line,
            col: t.span.col,
            found: t.tok.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.next().span)
        } else {
            Err(self.error(&[what]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let first = self.par()?;
        let mut items = vec![first];
        while *self.peek() == Tok::Semi {
            self.next();
            items.push(self.par()?);
        }
        Ok(collect(items, NodeKind::Seq))
    }

    fn par(&mut self) -> Result<Node, ParseError> {
        let first = self.atom()?;
        let mut items = vec![first];
        while *self.peek() == Tok::Star {
            self.next();
            items.push(self.atom()?);
        }
        Ok(collect(items, NodeKind::Par))
    }

    fn obj(&mut self) -> Result<Obj, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(Obj::Int(n))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(Obj::Named(s))
            }
            _ => Err(self.error(&["object name", "integer"])),
        }
    }

    fn args(&mut self, n: usize) -> Result<(Vec<Obj>, Span), ParseError> {
        self.expect(Tok::LBrack, "`[`")?;
        let mut objs = vec![self.obj()?];
        for _ in 1..n {
            self.expect(Tok::Comma, "`,`")?;
            objs.push(self.obj()?);
        }
        let end = self.expect(Tok::RBrack, "`]`")?;
        Ok((objs, end))
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let start = self.tokens[self.pos].span;
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(word) => {
                self.next();
                let arity = match word.as_str() {
                    "swap" | "act" => 2,
                    "id" | "copy" | "del" | "unif" | "mult" | "unit" | "inv" => 1,
                    "let" => {
                        self.pos -= 1;
                        return Err(self.error(&ATOM_START));
                    }
                    _ => {
                        return Ok(Node {
                            kind: NodeKind::Ref(word),
                            span: start,
                        })
                    }
                };
                let (mut o, end) = self.args(arity)?;
                let a = o.remove(0);
                let kind = match word.as_str() {
                    "id" => NodeKind::Id(a),
                    "copy" => NodeKind::Copy(a),
                    "del" => NodeKind::Del(a),
                    "unif" => NodeKind::Unif(a),
                    "mult" => NodeKind::Mult(a),
                    "unit" => NodeKind::Unit(a),
                    "inv" => NodeKind::Inv(a),
                    "swap" => NodeKind::Swap(a, o.remove(0)),
                    _ => NodeKind::Act(a, o.remove(0)),
                };
                Ok(Node {
                    kind,
                    span: start.to(end),
                })
            }
            _ => Err(self.error(&ATOM_START)),
        }
    }
}

fn collect(mut items: Vec<Node>, wrap: fn(Vec<Node>) -> NodeKind) -> Node {
    if items.len() == 1 {
        return items.pop().expect("one item");
    }
    let span = items[0].span.to(items[items.len() - 1].span);
    Node {
        kind: wrap(items),
        span,
    }
}
