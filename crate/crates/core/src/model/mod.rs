//! Parametric timed automata: types, text format, and the automaton
//! rewritings used by the analyses.

mod parse;
mod transform;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use parse::parse_model;
pub use transform::{
    build_pet_target, build_private_projection, build_public_projection, build_resetfree, build_self_composition,
    compute_frp, double_system, substitute, ABS_CLOCK, DURATION,
};

/// Integer parameter valuation.
pub type Valuation = BTreeMap<String, u64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: unknown {kind} `{name}`")]
    Unknown { line: usize, kind: &'static str, name: String },
    #[error("no init location")]
    NoInit,
    #[error("no final location")]
    NoFinal,
    #[error("more than one {role} location: `{first}` and `{second}`")]
    DuplicateRole { role: &'static str, first: String, second: String },
    #[error("identifier `{0}` declared twice")]
    DuplicateName(String),
    #[error("identifier `{0}` is already used by the model")]
    NameClash(String),
    #[error("expected {expected} clock(s), model has {found}")]
    ClockCount { expected: usize, found: usize },
    #[error("expected at most {expected} parameter(s), model has {found}")]
    ParamCount { expected: usize, found: usize },
    #[error("model has no private location")]
    NoPrivate,
    #[error("({0}, {1}) is not a final-reset pair")]
    NotFrp(String, String),
    #[error("valuation misses parameter `{0}`")]
    MissingParameter(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Eq => a == b,
            Cmp::Ge => a >= b,
            Cmp::Gt => a > b,
        }
    }
}

/// `Σ coeffs[p]·p + constant` over parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinearTerm {
    pub coeffs: BTreeMap<String, i64>,
    pub constant: i64,
}

impl LinearTerm {
    pub fn constant(c: i64) -> Self {
        LinearTerm { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn param(p: &str) -> Self {
        LinearTerm { coeffs: BTreeMap::from([(p.to_string(), 1)]), constant: 0 }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, k: i64) -> Self {
        LinearTerm {
            coeffs: self.coeffs.iter().filter(|_| k != 0).map(|(p, c)| (p.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn offset(&self, k: i64) -> Self {
        LinearTerm { coeffs: self.coeffs.clone(), constant: self.constant + k }
    }

    /// Value under `v`; `None` if a parameter is missing.
    pub fn eval(&self, v: &Valuation) -> Option<i64> {
        let mut acc = self.constant;
        for (p, c) in &self.coeffs {
            acc += c * i64::try_from(*v.get(p)?).ok()?;
        }
        Some(acc)
    }
}

impl fmt::Display for LinearTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, &c) in &self.coeffs {
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0 { "-" } else { "+" })?;
            }
            if c.abs() == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{}*{p}", c.abs())?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant != 0 {
            write!(f, " {} {}", if self.constant < 0 { "-" } else { "+" }, self.constant.abs())
        } else {
            Ok(())
        }
    }
}

/// Left-hand side of a constraint: a clock, a parameter or an integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lhs {
    Clock(String),
    Param(String),
    Const(i64),
}

/// `lhs ⋈ rhs` with `rhs` linear in the parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub lhs: Lhs,
    pub cmp: Cmp,
    pub rhs: LinearTerm,
}

impl Inequality {
    pub fn clock(x: &str, cmp: Cmp, rhs: LinearTerm) -> Self {
        Inequality { lhs: Lhs::Clock(x.to_string()), cmp, rhs }
    }

    /// 1 when the left-hand side is a clock, 0 otherwise.
    pub fn clock_coefficient(&self) -> i64 {
        matches!(self.lhs, Lhs::Clock(_)) as i64
    }

    pub fn clock_name(&self) -> Option<&str> {
        match &self.lhs {
            Lhs::Clock(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.lhs {
            Lhs::Clock(x) | Lhs::Param(x) => write!(f, "{x}")?,
            Lhs::Const(c) => write!(f, "{c}")?,
        }
        write!(f, " {} {}", self.cmp.symbol(), self.rhs)
    }
}

/// Conjunction; empty means true.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Guard {
    pub conjuncts: Vec<Inequality>,
}

impl Guard {
    pub fn is_true(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn and(&self, ineq: Inequality) -> Guard {
        let mut g = self.clone();
        g.conjuncts.push(ineq);
        g
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjuncts.is_empty() {
            return write!(f, "true");
        }
        let parts: Vec<String> = self.conjuncts.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" && "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Location {
    pub name: String,
    pub invariant: Guard,
    pub urgent: bool,
    pub init: bool,
    pub private: bool,
    pub is_final: bool,
}

impl Location {
    pub fn new(name: &str) -> Self {
        Location { name: name.to_string(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: String,
    pub guard: Guard,
    /// `None` is the silent action.
    pub action: Option<String>,
    /// Sorted, without duplicates.
    pub resets: Vec<String>,
    pub target: String,
}

impl Edge {
    pub fn new(source: &str, target: &str) -> Self {
        Edge { source: source.into(), guard: Guard::default(), action: None, resets: Vec::new(), target: target.into() }
    }

    pub fn resets_clock(&self, x: &str) -> bool {
        self.resets.iter().any(|r| r == x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pta {
    pub name: String,
    pub params: Vec<String>,
    pub clocks: Vec<String>,
    pub locations: Vec<Location>,
    pub edges: Vec<Edge>,
}

/// Keywords of the text format; they cannot name anything.
pub const KEYWORDS: &[&str] =
    &["pta", "params", "clocks", "loc", "edge", "init", "private", "final", "urgent", "invariant", "when", "act", "reset"];

impl Pta {
    pub fn init(&self) -> &Location {
        self.locations.iter().find(|l| l.init).expect("validated model has an init location")
    }

    pub fn final_location(&self) -> &Location {
        self.locations.iter().find(|l| l.is_final).expect("validated model has a final location")
    }

    pub fn private_location(&self) -> Option<&Location> {
        self.locations.iter().find(|l| l.private)
    }

    pub fn location(&self, name: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.name == name)
    }

    pub fn actions(&self) -> BTreeSet<String> {
        self.edges.iter().filter_map(|e| e.action.clone()).collect()
    }

    pub fn is_clock(&self, name: &str) -> bool {
        self.clocks.iter().any(|c| c == name)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p == name)
    }

    fn uses_name(&self, name: &str) -> bool {
        self.is_clock(name) || self.is_param(name) || self.location(name).is_some()
    }

    /// `base`, or `base` with underscores appended until no identifier of the
    /// model (or of `taken`) collides.
    pub(crate) fn fresh_name(&self, base: &str, taken: &BTreeSet<String>) -> String {
        let mut n = base.to_string();
        while self.uses_name(&n) || taken.contains(&n) || KEYWORDS.contains(&n.as_str()) {
            n.push('_');
        }
        n
    }

    /// Structural checks shared by the parser and the rewritings.
    pub fn check(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        for n in self.params.iter().chain(&self.clocks).chain(self.locations.iter().map(|l| &l.name)) {
            if !seen.insert(n.as_str()) {
                return Err(ModelError::DuplicateName(n.clone()));
            }
        }
        for (role, pick) in [
            ("init", (|l: &Location| l.init) as fn(&Location) -> bool),
            ("private", |l: &Location| l.private),
            ("final", |l: &Location| l.is_final),
        ] {
            let with: Vec<&Location> = self.locations.iter().filter(|l| pick(l)).collect();
            if with.len() > 1 {
                return Err(ModelError::DuplicateRole {
                    role,
                    first: with[0].name.clone(),
                    second: with[1].name.clone(),
                });
            }
        }
        if !self.locations.iter().any(|l| l.init) {
            return Err(ModelError::NoInit);
        }
        if !self.locations.iter().any(|l| l.is_final) {
            return Err(ModelError::NoFinal);
        }
        let check_guard = |g: &Guard| -> Result<(), ModelError> {
            for c in &g.conjuncts {
                match &c.lhs {
                    Lhs::Clock(x) if !self.is_clock(x) => {
                        return Err(ModelError::Unknown { line: 0, kind: "clock", name: x.clone() })
                    }
                    Lhs::Param(p) if !self.is_param(p) => {
                        return Err(ModelError::Unknown { line: 0, kind: "parameter", name: p.clone() })
                    }
                    _ => {}
                }
                for p in c.rhs.coeffs.keys() {
                    if !self.is_param(p) {
                        return Err(ModelError::Unknown { line: 0, kind: "parameter", name: p.clone() });
                    }
                }
            }
            Ok(())
        };
        for l in &self.locations {
            check_guard(&l.invariant)?;
        }
        for e in &self.edges {
            for end in [&e.source, &e.target] {
                if self.location(end).is_none() {
                    return Err(ModelError::UnknownLocation(end.clone()));
                }
            }
            for r in &e.resets {
                if !self.is_clock(r) {
                    return Err(ModelError::Unknown { line: 0, kind: "clock", name: r.clone() });
                }
            }
            check_guard(&e.guard)?;
        }
        Ok(())
    }

    /// Locations reachable from the init location in the untimed graph.
    pub fn reachable_locations(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([self.init().name.clone()]);
        let mut stack = vec![self.init().name.clone()];
        while let Some(l) = stack.pop() {
            for e in self.edges.iter().filter(|e| e.source == l) {
                if seen.insert(e.target.clone()) {
                    stack.push(e.target.clone());
                }
            }
        }
        seen
    }

    /// Drops locations unreachable from init (the final one is kept) and
    /// their edges.
    pub(crate) fn prune_unreachable(mut self) -> Pta {
        let reach = self.reachable_locations();
        self.locations.retain(|l| l.is_final || reach.contains(&l.name));
        self.edges.retain(|e| reach.contains(&e.source));
        self
    }

    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let parametric: BTreeSet<&str> = self
            .locations
            .iter()
            .map(|l| &l.invariant)
            .chain(self.edges.iter().map(|e| &e.guard))
            .flat_map(|g| g.conjuncts.iter())
            .filter(|c| !c.rhs.is_constant())
            .filter_map(|c| c.clock_name())
            .collect();
        let reset_free = self.edges.iter().all(|e| e.resets.is_empty());
        let exact = self.clocks.len() == 1;
        let mut warnings = Vec::new();
        if !exact {
            warnings.push("exact PET method unavailable".to_string());
        }
        if self.private_location().is_none() {
            warnings.push("no private location: opacity problems are undefined".to_string());
        }
        let reach = self.reachable_locations();
        if !reach.contains(&self.final_location().name) {
            warnings.push("final location unreachable in the untimed graph".to_string());
        }
        Diagnostics {
            name: self.name.clone(),
            locations: self.locations.len(),
            edges: self.edges.len(),
            clocks: self.clocks.len(),
            parametric_clocks: parametric.len(),
            nonparametric_clocks: self.clocks.len() - parametric.len(),
            params: self.params.len(),
            reset_free,
            exact_method: exact,
            warnings,
        }
    }
}

/// Result of `validate`: the (pc, npc, p) class and applicability notes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub name: String,
    pub locations: usize,
    pub edges: usize,
    pub clocks: usize,
    pub parametric_clocks: usize,
    pub nonparametric_clocks: usize,
    pub params: usize,
    pub reset_free: bool,
    pub exact_method: bool,
    pub warnings: Vec<String>,
}

impl Diagnostics {
    pub fn class(&self) -> (usize, usize, usize) {
        (self.parametric_clocks, self.nonparametric_clocks, self.params)
    }
}

impl fmt::Display for Pta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pta {}", self.name)?;
        if !self.params.is_empty() {
            writeln!(f, "params {}", self.params.join(" "))?;
        }
        if !self.clocks.is_empty() {
            writeln!(f, "clocks {}", self.clocks.join(" "))?;
        }
        for l in &self.locations {
            write!(f, "loc {}", l.name)?;
            for (flag, word) in [(l.init, "init"), (l.private, "private"), (l.is_final, "final"), (l.urgent, "urgent")] {
                if flag {
                    write!(f, " {word}")?;
                }
            }
            if !l.invariant.is_true() {
                write!(f, " invariant {}", l.invariant)?;
            }
            writeln!(f)?;
        }
        for e in &self.edges {
            write!(f, "edge {} -> {}", e.source, e.target)?;
            if !e.guard.is_true() {
                write!(f, " when {}", e.guard)?;
            }
            if let Some(a) = &e.action {
                write!(f, " act {a}")?;
            }
            if !e.resets.is_empty() {
                write!(f, " reset {}", e.resets.join(" "))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
