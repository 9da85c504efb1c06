//! Named analysis strategies selected at run time.

use serde_json::{json, Value};

use crate::geometry::PolySet;
use crate::model::Pta;
use crate::opacity::{pets, OpacityError, Pets};
use crate::pet::{pet_semialg, pet_zones, ZonePet};
use crate::zonegraph::{ExplorationBudget, Status};

pub trait Named {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
}

/// Strategies registered under unique names, in registration order.
pub struct Registry<T: ?Sized> {
    entries: Vec<Box<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new() -> Self {
        Registry { entries: Vec::new() }
    }

    /// Replaces any entry of the same name.
    pub fn register(&mut self, s: Box<T>) {
        self.entries.retain(|e| e.name() != s.name());
        self.entries.push(s);
    }

    pub fn get(&self, name: &str) -> Option<&T> {
        self.entries.iter().find(|e| e.name() == name).map(|e| e.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

impl<T: ?Sized + Named> Default for Registry<T> {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone)]
pub enum PetOutput {
    Polyhedral { set: PolySet, status: Status },
    Zones(Box<ZonePet>),
}

impl PetOutput {
    pub fn status(&self) -> Status {
        match self {
            PetOutput::Polyhedral { status, .. } => *status,
            PetOutput::Zones(_) => Status::Complete,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            PetOutput::Polyhedral { set, .. } => json!({ "method": "semialg", "pet": set }),
            PetOutput::Zones(z) => json!({
                "method": "zones",
                "transitions": z.automaton.transitions.iter()
                    .map(|(a, b, s)| json!({ "from": a, "to": b, "label": s }))
                    .collect::<Vec<_>>(),
                "terms": z.terms,
            }),
        }
    }
}

pub trait PetMethod: Named + Send + Sync {
    fn compute(&self, pta: &Pta, budget: ExplorationBudget) -> Result<PetOutput, OpacityError>;
}

struct SemiAlg;
struct Zones;
struct Auto;

impl Named for SemiAlg {
    fn name(&self) -> &'static str {
        "semialg"
    }
    fn summary(&self) -> &'static str {
        "zone-graph reachability synthesis, any number of clocks, may not terminate"
    }
}

impl PetMethod for SemiAlg {
    fn compute(&self, pta: &Pta, budget: ExplorationBudget) -> Result<PetOutput, OpacityError> {
        let (set, status) = pet_semialg(pta, budget)?;
        Ok(PetOutput::Polyhedral { set, status })
    }
}

impl Named for Zones {
    fn name(&self) -> &'static str {
        "zones"
    }
    fn summary(&self) -> &'static str {
        "automaton of the zones and its expression, one clock, exact"
    }
}

impl PetMethod for Zones {
    fn compute(&self, pta: &Pta, budget: ExplorationBudget) -> Result<PetOutput, OpacityError> {
        Ok(PetOutput::Zones(Box::new(pet_zones(pta, budget)?)))
    }
}

impl Named for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }
    fn summary(&self) -> &'static str {
        "zones for one clock, semialg otherwise"
    }
}

impl PetMethod for Auto {
    fn compute(&self, pta: &Pta, budget: ExplorationBudget) -> Result<PetOutput, OpacityError> {
        if pta.clocks.len() == 1 {
            Zones.compute(pta, budget)
        } else {
            SemiAlg.compute(pta, budget)
        }
    }
}

pub fn pet_methods() -> Registry<dyn PetMethod> {
    let mut r: Registry<dyn PetMethod> = Registry::new();
    r.register(Box::new(Auto));
    r.register(Box::new(SemiAlg));
    r.register(Box::new(Zones));
    r
}

/// A synthesis problem answered from the two projection PETs.
pub trait SynthProblem: Named + Send + Sync {
    fn solve(&self, pets: &Pets) -> Result<PolySet, OpacityError>;

    fn run(&self, pta: &Pta, budget: ExplorationBudget) -> Result<(PolySet, Status), OpacityError> {
        let p = pets(pta, budget)?;
        Ok((self.solve(&p)?, p.status))
    }
}

macro_rules! synth_problem {
    ($ty:ident, $name:literal, $summary:literal, $method:ident) => {
        struct $ty;
        impl Named for $ty {
            fn name(&self) -> &'static str {
                $name
            }
            fn summary(&self) -> &'static str {
                $summary
            }
        }
        impl SynthProblem for $ty {
            fn solve(&self, pets: &Pets) -> Result<PolySet, OpacityError> {
                pets.$method()
            }
        }
    };
}

synth_problem!(Eos, "eos", "valuations with at least one opaque duration", eos);
synth_problem!(Fos, "fos", "valuations with equal private and public durations", fos);
synth_problem!(DEos, "d-eos", "valuations with their opaque durations", d_eos);
synth_problem!(DFos, "d-fos", "fully opaque valuations with their durations", d_fos);
synth_problem!(Diff, "diff", "durations on one side only", diff);

pub fn synth_problems() -> Registry<dyn SynthProblem> {
    let mut r: Registry<dyn SynthProblem> = Registry::new();
    r.register(Box::new(Eos));
    r.register(Box::new(Fos));
    r.register(Box::new(DEos));
    r.register(Box::new(DFos));
    r.register(Box::new(Diff));
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    const SELF_LOOP: &str = "pta self_loop\nparams p q\nclocks x\nloc l0 init invariant x <= p\nloc l1 final\nedge l0 -> l0 when x = p reset x\nedge l0 -> l1 when x >= q\n";

    #[test]
    fn lookup() {
        let m = pet_methods();
        assert_eq!(m.names(), vec!["auto", "semialg", "zones"]);
        assert!(m.get("nope").is_none());
        let s = synth_problems();
        assert_eq!(s.names(), vec!["eos", "fos", "d-eos", "d-fos", "diff"]);
    }

    #[test]
    fn auto_picks_zones_for_one_clock() {
        let a = parse_model(SELF_LOOP).unwrap();
        let out = pet_methods().get("auto").unwrap().compute(&a, ExplorationBudget::default()).unwrap();
        assert!(matches!(out, PetOutput::Zones(_)));
        assert_eq!(out.to_json()["method"], "zones");
    }

    #[test]
    fn register_replaces() {
        let mut r: Registry<dyn PetMethod> = Registry::new();
        r.register(Box::new(Zones));
        r.register(Box::new(Zones));
        assert_eq!(r.names(), vec!["zones"]);
    }
}
