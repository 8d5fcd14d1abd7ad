use std::fmt;

/// Byte range plus the line and column where it starts (1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obj {
    Named(String),
    /// An anonymous set with this many elements.
    Int(usize),
}

impl fmt::Display for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obj::Named(s) => write!(f, "{s}"),
            Obj::Int(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    /// Execution order: the first child runs first.
    Seq(Vec<Node>),
    Par(Vec<Node>),
    Id(Obj),
    Swap(Obj, Obj),
    Copy(Obj),
    Del(Obj),
    Unif(Obj),
    Mult(Obj),
    Unit(Obj),
    Inv(Obj),
    Act(Obj, Obj),
    Ref(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

impl Node {
    pub fn new(kind: NodeKind) -> Self {
        Node {
            kind,
            span: Span::default(),
        }
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Node {
        let kind = match &self.kind {
            NodeKind::Seq(v) => NodeKind::Seq(v.iter().map(Node::without_spans).collect()),
            NodeKind::Par(v) => NodeKind::Par(v.iter().map(Node::without_spans).collect()),
            k => k.clone(),
        };
        Node::new(kind)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub name: String,
    pub body: Node,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Node,
}

impl Program {
    pub fn without_spans(&self) -> Program {
        Program {
            decls: self
                .decls
                .iter()
                .map(|d| Decl {
                    name: d.name.clone(),
                    body: d.body.without_spans(),
                    span: Span::default(),
                })
                .collect(),
            body: self.body.without_spans(),
        }
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, n: &Node) -> fmt::Result {
    match &n.kind {
        NodeKind::Seq(_) | NodeKind::Par(_) => write!(f, "({n})"),
        _ => write!(f, "{n}"),
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NodeKind::Seq(v) => {
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ; ")?;
                    }
                    match c.kind {
                        NodeKind::Seq(_) => write!(f, "({c})")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                Ok(())
            }
            NodeKind::Par(v) => {
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write_atom(f, c)?;
                }
                Ok(())
            }
            NodeKind::Id(a) => write!(f, "id[{a}]"),
            NodeKind::Swap(a, b) => write!(f, "swap[{a},{b}]"),
            NodeKind::Copy(a) => write!(f, "copy[{a}]"),
            NodeKind::Del(a) => write!(f, "del[{a}]"),
            NodeKind::Unif(a) => write!(f, "unif[{a}]"),
            NodeKind::Mult(a) => write!(f, "mult[{a}]"),
            NodeKind::Unit(a) => write!(f, "unit[{a}]"),
            NodeKind::Inv(a) => write!(f, "inv[{a}]"),
            NodeKind::Act(a, b) => write!(f, "act[{a},{b}]"),
            NodeKind::Ref(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            write!(f, "let {} = ", d.name)?;
            match d.body.kind {
                NodeKind::Seq(_) => write!(f, "({})", d.body)?,
                _ => write!(f, "{}", d.body)?,
            }
            writeln!(f, ";")?;
        }
        write!(f, "{}", self.body)
    }
}

/// Source text that parses back to `p`.
pub fn pretty_print(p: &Program) -> String {
    p.to_string()
}
