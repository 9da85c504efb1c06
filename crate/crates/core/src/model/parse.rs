//! Line-oriented model format.
//!
//! ```text
//! pta running
//! params p1 p2
//! clocks x
//! loc l0 init invariant x <= 3
//! edge l0 -> lf when x >= p1 && x <= 2*p2 + 1 act a reset x
//! ```

use std::collections::BTreeMap;

use super::{Cmp, Edge, Guard, Inequality, LinearTerm, Lhs, Location, ModelError, Pta, KEYWORDS};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Arrow,
    And,
    Op(Cmp),
    Plus,
    Minus,
    Star,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax { line, column, message: message.into() }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, ModelError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse::<i64>().map_err(|_| syntax(line, col, format!("integer `{s}` out of range")))?;
            out.push(Token { tok: Tok::Int(n), col });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('&', Some('&')) => (Tok::And, 2),
            ('<', Some('=')) => (Tok::Op(Cmp::Le), 2),
            ('>', Some('=')) => (Tok::Op(Cmp::Ge), 2),
            ('<', _) => (Tok::Op(Cmp::Lt), 1),
            ('>', _) => (Tok::Op(Cmp::Gt), 1),
            ('=', _) => (Tok::Op(Cmp::Eq), 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            _ => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
        };
        out.push(Token { tok, col });
        i += len;
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> ModelError {
        syntax(self.line, self.col(), msg)
    }

    fn ident(&mut self, what: &str) -> Result<String, ModelError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                self.pos += 1;
                Ok(s.clone())
            }
            Some(Tok::Ident(s)) => Err(self.err(format!("keyword `{s}` cannot be used as {what}"))),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Names declared by `params` / `clocks` lines, needed to classify the
/// left-hand side of constraints.
struct Scope {
    params: Vec<String>,
    clocks: Vec<String>,
}

fn parse_term(cur: &mut Cursor, scope: &Scope) -> Result<LinearTerm, ModelError> {
    let mut term = LinearTerm::default();
    let mut sign = 1i64;
    if cur.peek() == Some(&Tok::Minus) {
        cur.next();
        sign = -1;
    }
    loop {
        let col = cur.col();
        match cur.next() {
            Some(Tok::Int(n)) => {
                if cur.peek() == Some(&Tok::Star) {
                    cur.next();
                    let pcol = cur.col();
                    let p = cur.ident("a parameter")?;
                    add_param(&mut term, &p, sign * n, scope, cur.line, pcol)?;
                } else {
                    term.constant += sign * n;
                }
            }
            Some(Tok::Ident(p)) if !KEYWORDS.contains(&p.as_str()) => {
                add_param(&mut term, p, sign, scope, cur.line, col)?;
            }
            _ => return Err(syntax(cur.line, col, "expected an integer or a parameter")),
        }
        match cur.peek() {
            Some(Tok::Plus) => sign = 1,
            Some(Tok::Minus) => sign = -1,
            _ => break,
        }
        cur.next();
    }
    term.coeffs.retain(|_, c| *c != 0);
    Ok(term)
}

fn add_param(
    term: &mut LinearTerm,
    p: &str,
    k: i64,
    scope: &Scope,
    line: usize,
    col: usize,
) -> Result<(), ModelError> {
    if scope.clocks.iter().any(|c| c == p) {
        return Err(syntax(line, col, format!("clock `{p}` on the right-hand side")));
    }
    if !scope.params.iter().any(|q| q == p) {
        return Err(ModelError::Unknown { line, kind: "parameter", name: p.to_string() });
    }
    *term.coeffs.entry(p.to_string()).or_insert(0) += k;
    Ok(())
}

fn parse_guard(cur: &mut Cursor, scope: &Scope) -> Result<Guard, ModelError> {
    let mut g = Guard::default();
    loop {
        let col = cur.col();
        let lhs = match cur.next() {
            Some(Tok::Int(n)) => Lhs::Const(*n),
            Some(Tok::Minus) => match cur.next() {
                Some(Tok::Int(n)) => Lhs::Const(-n),
                _ => return Err(syntax(cur.line, col, "expected an integer after `-`")),
            },
            Some(Tok::Ident(s)) if scope.clocks.contains(s) => Lhs::Clock(s.clone()),
            Some(Tok::Ident(s)) if scope.params.contains(s) => Lhs::Param(s.clone()),
            Some(Tok::Ident(s)) => return Err(ModelError::Unknown { line: cur.line, kind: "clock or parameter", name: s.clone() }),
            _ => return Err(syntax(cur.line, col, "expected a clock, parameter or integer")),
        };
        let cmp = match cur.next() {
            Some(Tok::Op(c)) => *c,
            _ => return Err(syntax(cur.line, cur.col().saturating_sub(0), "expected a comparison operator")),
        };
        let rhs = parse_term(cur, scope)?;
        g.conjuncts.push(Inequality { lhs, cmp, rhs });
        if cur.peek() == Some(&Tok::And) {
            cur.next();
        } else {
            return Ok(g);
        }
    }
}

/// Parses and checks a model.
pub fn parse_model(text: &str) -> Result<Pta, ModelError> {
    let mut lines: Vec<(usize, Vec<Token>, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let toks = tokenize(raw, i + 1)?;
        if !toks.is_empty() {
            lines.push((i + 1, toks, raw.chars().count() + 1));
        }
    }
    let mut name = None;
    let mut scope = Scope { params: Vec::new(), clocks: Vec::new() };
    let mut decl_lines: BTreeMap<String, usize> = BTreeMap::new();
    // declarations first so that constraints can be classified
    for (line, toks, end_col) in &lines {
        let mut cur = Cursor { toks, pos: 0, line: *line, end_col: *end_col };
        let Some(Tok::Ident(kw)) = cur.next() else {
            return Err(syntax(*line, 1, "expected a declaration keyword"));
        };
        match kw.as_str() {
            "pta" => {
                if name.is_some() {
                    return Err(syntax(*line, 1, "duplicate `pta` line"));
                }
                name = Some(cur.ident("a model name")?);
            }
            "params" | "clocks" => {
                let mut any = false;
                while !cur.done() {
                    let id = cur.ident("an identifier")?;
                    if decl_lines.insert(id.clone(), *line).is_some() {
                        return Err(ModelError::DuplicateName(id));
                    }
                    if kw == "params" { &mut scope.params } else { &mut scope.clocks }.push(id);
                    any = true;
                }
                if !any {
                    return Err(cur.err("expected at least one identifier"));
                }
                continue;
            }
            "loc" | "edge" => continue,
            other => return Err(syntax(*line, 1, format!("unknown declaration `{other}`"))),
        }
        if !cur.done() {
            return Err(cur.err("unexpected trailing input"));
        }
    }

    let mut locations: Vec<Location> = Vec::new();
    let mut edges: Vec<(usize, Edge)> = Vec::new();
    for (line, toks, end_col) in &lines {
        let mut cur = Cursor { toks, pos: 0, line: *line, end_col: *end_col };
        let Some(Tok::Ident(kw)) = cur.next() else { unreachable!() };
        match kw.as_str() {
            "loc" => {
                let mut loc = Location::new(&cur.ident("a location name")?);
                while !cur.done() {
                    let col = cur.col();
                    match cur.next() {
                        Some(Tok::Ident(w)) if w == "init" => loc.init = true,
                        Some(Tok::Ident(w)) if w == "private" => loc.private = true,
                        Some(Tok::Ident(w)) if w == "final" => loc.is_final = true,
                        Some(Tok::Ident(w)) if w == "urgent" => loc.urgent = true,
                        Some(Tok::Ident(w)) if w == "invariant" => {
                            loc.invariant = parse_guard(&mut cur, &scope)?;
                            if !cur.done() {
                                return Err(cur.err("unexpected input after invariant"));
                            }
                        }
                        _ => return Err(syntax(*line, col, "expected init, private, final, urgent or invariant")),
                    }
                }
                locations.push(loc);
            }
            "edge" => {
                let source = cur.ident("a source location")?;
                if cur.next() != Some(&Tok::Arrow) {
                    return Err(syntax(*line, cur.col().max(1), "expected `->`"));
                }
                let target = cur.ident("a target location")?;
                let mut edge = Edge::new(&source, &target);
                if cur.at_keyword("when") {
                    cur.next();
                    edge.guard = parse_guard(&mut cur, &scope)?;
                }
                if cur.at_keyword("act") {
                    cur.next();
                    edge.action = Some(cur.ident("an action")?);
                }
                if cur.at_keyword("reset") {
                    cur.next();
                    loop {
                        let col = cur.col();
                        let x = cur.ident("a clock")?;
                        if !scope.clocks.contains(&x) {
                            return Err(ModelError::Unknown { line: *line, kind: "clock", name: x });
                        }
                        let _ = col;
                        edge.resets.push(x);
                        if cur.done() {
                            break;
                        }
                    }
                    edge.resets.sort();
                    edge.resets.dedup();
                }
                if !cur.done() {
                    return Err(cur.err("unexpected input in edge declaration"));
                }
                edges.push((*line, edge));
            }
            _ => {}
        }
    }
    for (line, e) in &edges {
        for end in [&e.source, &e.target] {
            if !locations.iter().any(|l| &l.name == end) {
                return Err(ModelError::Unknown { line: *line, kind: "location", name: end.clone() });
            }
        }
    }
    let pta = Pta {
        name: name.unwrap_or_else(|| "model".to_string()),
        params: scope.params,
        clocks: scope.clocks,
        locations,
        edges: edges.into_iter().map(|(_, e)| e).collect(),
    };
    pta.check()?;
    Ok(pta)
}
