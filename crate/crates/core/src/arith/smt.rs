use std::collections::BTreeSet;

use super::formula::{AtomRel, DivFormula, LinAtom};

const RESERVED: &[&str] = &[
    "and", "or", "not", "exists", "forall", "let", "true", "false", "ite", "distinct", "Int", "Bool", "par", "_", "!", "as",
];

fn symbol(v: &str) -> String {
    if RESERVED.contains(&v) {
        format!("|{v}|")
    } else {
        v.to_string()
    }
}

fn numeral(k: i64) -> String {
    if k < 0 {
        format!("(- {})", -(k as i128))
    } else {
        k.to_string()
    }
}

fn side(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "0".into(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

fn lin(a: &LinAtom) -> String {
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for (v, k) in &a.coeffs {
        let (side, k) = if *k > 0 { (&mut lhs, *k) } else { (&mut rhs, -*k) };
        side.push(if k == 1 { symbol(v) } else { format!("(* {k} {})", symbol(v)) });
    }
    match a.constant {
        c if c > 0 => lhs.push(c.to_string()),
        c if c < 0 => rhs.push(numeral(-c)),
        _ => {}
    }
    let op = match a.rel {
        AtomRel::Le => "<=",
        AtomRel::Eq => "=",
    };
    format!("({op} {} {})", side(lhs), side(rhs))
}

struct Emitter {
    fresh: usize,
}

impl Emitter {
    fn term(&mut self, f: &DivFormula) -> String {
        match f {
            DivFormula::True => "true".into(),
            DivFormula::False => "false".into(),
            DivFormula::Lin(a) => lin(a),
            DivFormula::Divides(y, z) => {
                let k = format!("k!{}", self.fresh);
                self.fresh += 1;
                format!("(exists (({k} Int)) (and (>= {k} 0) (= {} (* {k} {}))))", symbol(z), symbol(y))
            }
            DivFormula::And(fs) | DivFormula::Or(fs) => {
                let op = if matches!(f, DivFormula::And(_)) { "and" } else { "or" };
                let parts: Vec<String> = fs.iter().map(|g| self.term(g)).collect();
                format!("({op} {})", parts.join(" "))
            }
            DivFormula::Exists(vs, b) => {
                let binders: Vec<String> = vs.iter().map(|v| format!("({} Int)", symbol(v))).collect();
                let mut body: Vec<String> = vs.iter().map(|v| format!("(>= {} 0)", symbol(v))).collect();
                body.push(self.term(b));
                format!("(exists ({}) (and {}))", binders.join(" "), body.join(" "))
            }
        }
    }
}

/// SMT-LIB 2 script asserting `f` over natural-valued free variables.
/// Divisibility is written with an existential multiplier, which needs a
/// solver with nonlinear integer arithmetic.
pub fn emit_smt(f: &DivFormula) -> String {
    let mut out = String::from("(set-logic ALL)\n");
    for v in f.free_vars() {
        out.push_str(&format!("(declare-const {} Int)\n(assert (>= {} 0))\n", symbol(&v), symbol(&v)));
    }
    let mut e = Emitter { fresh: 0 };
    out.push_str(&format!("(assert {})\n(check-sat)\n(get-model)\n", e.term(f)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut it = text.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            '(' | ')' => {
                out.push(c.to_string());
                it.next();
            }
            ';' => {
                while it.next().is_some_and(|c| c != '\n') {}
            }
            '|' => {
                it.next();
                let mut s = String::from("|");
                loop {
                    match it.next() {
                        Some('|') => break,
                        Some(c) => s.push(c),
                        None => return Err("unterminated quoted symbol".into()),
                    }
                }
                s.push('|');
                out.push(s);
            }
            c if c.is_whitespace() => {
                it.next();
            }
            _ => {
                let mut s = String::new();
                while let Some(&c) = it.peek() {
                    if c.is_whitespace() || "();|".contains(c) {
                        break;
                    }
                    s.push(c);
                    it.next();
                }
                out.push(s);
            }
        }
    }
    Ok(out)
}

fn parse(tokens: &[String]) -> Result<Vec<Sexp>, String> {
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    for t in tokens {
        match t.as_str() {
            "(" => stack.push(Vec::new()),
            ")" => {
                let done = stack.pop().expect("stack");
                stack.last_mut().ok_or("unbalanced ')'")?.push(Sexp::List(done));
            }
            _ => stack.last_mut().expect("stack").push(Sexp::Atom(t.clone())),
        }
        if stack.is_empty() {
            return Err("unbalanced ')'".into());
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced '('".into());
    }
    Ok(stack.pop().unwrap())
}

fn is_symbol(s: &str) -> bool {
    if s.starts_with('|') {
        return s.len() >= 2 && s.ends_with('|');
    }
    let ok = |c: char| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c);
    !s.is_empty() && !s.starts_with(|c: char| c.is_ascii_digit()) && s.chars().all(ok)
}

fn is_numeral(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) && (s == "0" || !s.starts_with('0'))
}

/// Sort of a well-formed term in scope, or an error.
fn sort_of(t: &Sexp, scope: &mut Vec<String>) -> Result<&'static str, String> {
    match t {
        Sexp::Atom(a) if is_numeral(a) => Ok("Int"),
        Sexp::Atom(a) if a == "true" || a == "false" => Ok("Bool"),
        Sexp::Atom(a) if scope.contains(a) => Ok("Int"),
        Sexp::Atom(a) => Err(format!("unbound symbol {a}")),
        Sexp::List(xs) => {
            let Some(Sexp::Atom(head)) = xs.first() else { return Err("application without operator".into()) };
            let args = &xs[1..];
            let all = |scope: &mut Vec<String>, want: &str| -> Result<(), String> {
                for a in args {
                    let s = sort_of(a, scope)?;
                    if s != want {
                        return Err(format!("argument of {head} has sort {s}, expected {want}"));
                    }
                }
                Ok(())
            };
            match head.as_str() {
                "+" | "*" | "-" if !args.is_empty() => all(scope, "Int").map(|_| "Int"),
                "<=" | ">=" | "<" | ">" if args.len() == 2 => all(scope, "Int").map(|_| "Bool"),
                "=" if args.len() == 2 => {
                    let (a, b) = (sort_of(&args[0], scope)?, sort_of(&args[1], scope)?);
                    if a != b {
                        return Err("= over different sorts".into());
                    }
                    Ok("Bool")
                }
                "and" | "or" if !args.is_empty() => all(scope, "Bool").map(|_| "Bool"),
                "not" if args.len() == 1 => all(scope, "Bool").map(|_| "Bool"),
                "exists" | "forall" if args.len() == 2 => {
                    let Sexp::List(binders) = &args[0] else { return Err("binder list expected".into()) };
                    if binders.is_empty() {
                        return Err("empty binder list".into());
                    }
                    let n = scope.len();
                    for b in binders {
                        match b {
                            Sexp::List(p) if p.len() == 2 && p[1] == Sexp::Atom("Int".into()) => match &p[0] {
                                Sexp::Atom(v) if is_symbol(v) => scope.push(v.clone()),
                                _ => return Err("bad bound variable".into()),
                            },
                            _ => return Err("bad binder".into()),
                        }
                    }
                    let s = sort_of(&args[1], scope);
                    scope.truncate(n);
                    match s? {
                        "Bool" => Ok("Bool"),
                        _ => Err("quantifier body is not Boolean".into()),
                    }
                }
                _ => Err(format!("unknown operator or arity: {head}/{}", args.len())),
            }
        }
    }
}

/// Syntactic well-formedness of an SMT-LIB 2 script over integer constants:
/// balanced s-expressions, known commands, declared symbols and sorts.
pub fn check_smt(text: &str) -> Result<(), String> {
    let cmds = parse(&tokenize(text)?)?;
    let mut scope: Vec<String> = Vec::new();
    let mut declared = BTreeSet::new();
    for c in &cmds {
        let Sexp::List(xs) = c else { return Err("top-level atom".into()) };
        let head = match xs.first() {
            Some(Sexp::Atom(h)) => h.as_str(),
            _ => return Err("command without name".into()),
        };
        match (head, &xs[1..]) {
            ("set-logic", [Sexp::Atom(l)]) if is_symbol(l) => {}
            ("set-option", [Sexp::Atom(k), _]) if k.starts_with(':') => {}
            ("declare-const", [Sexp::Atom(v), Sexp::Atom(s)]) if is_symbol(v) && s == "Int" => {
                if !declared.insert(v.clone()) {
                    return Err(format!("{v} declared twice"));
                }
                scope.push(v.clone());
            }
            ("assert", [t]) => {
                if sort_of(t, &mut scope)? != "Bool" {
                    return Err("assertion is not Boolean".into());
                }
            }
            ("check-sat" | "get-model" | "exit", []) => {}
            _ => return Err(format!("malformed command {head}")),
        }
    }
    Ok(())
}
