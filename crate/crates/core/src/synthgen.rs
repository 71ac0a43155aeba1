//! Synthetic worlds with known ground truth.
//!
//! * Hat passing: persons stand in a line; at each step the current owner
//!   passes the hat left, right, or keeps it. The label is the final owner.
//! * Query tasks: relational facts over the same line world with a yes/no
//!   query, optionally with contradictions targeted at one pair.
//! * Prototype worlds: each class is a noisy copy of a random bit prototype.

use serde::{Deserialize, Serialize};

use crate::data::BinaryDataset;
use crate::error::{Error, Result};
use crate::rng::Stream;

pub const MAX_PERSONS: usize = 4;
pub const MAX_STEPS: usize = 3;

pub fn person_name(p: usize) -> char {
    (b'A' + p as u8) as char
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Right,
    Left,
    Nothing,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Right, Action::Left, Action::Nothing];

    pub fn code(self) -> char {
        match self {
            Action::Right => 'R',
            Action::Left => 'L',
            Action::Nothing => 'N',
        }
    }

    fn index(self) -> usize {
        match self {
            Action::Right => 0,
            Action::Left => 1,
            Action::Nothing => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub actor: usize,
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HatExample {
    pub steps: Vec<Step>,
    pub label: usize,
    pub consistent: bool,
}

/// Replays a chain of steps. The first actor is the initial owner.
///
/// A step by someone other than the current owner, or a pass off either end
/// of the line, leaves ownership unchanged and marks the chain inconsistent.
pub fn simulate_final_owner(steps: &[Step], persons: usize) -> Result<(usize, bool)> {
    let Some(first) = steps.first() else {
        return Err(Error::Parameter("a hat chain needs at least one step".into()));
    };
    if let Some(s) = steps.iter().find(|s| s.actor >= persons) {
        return Err(Error::Parameter(format!("person {} outside 0..{persons}", s.actor)));
    }
    let mut owner = first.actor;
    let mut consistent = true;
    for s in steps {
        if s.actor != owner {
            consistent = false;
            continue;
        }
        match s.action {
            Action::Right if owner + 1 < persons => owner += 1,
            Action::Left if owner > 0 => owner -= 1,
            Action::Nothing => {}
            _ => consistent = false,
        }
    }
    Ok((owner, consistent))
}

fn check_world(persons: usize, steps: usize) -> Result<()> {
    if !(2..=MAX_PERSONS).contains(&persons) {
        return Err(Error::Parameter(format!("persons must be in 2..={MAX_PERSONS}, got {persons}")));
    }
    if !(1..=MAX_STEPS).contains(&steps) {
        return Err(Error::Parameter(format!("steps must be in 1..={MAX_STEPS}, got {steps}")));
    }
    Ok(())
}

fn valid_actions(owner: usize, persons: usize) -> Vec<Action> {
    Action::ALL
        .into_iter()
        .filter(|a| match a {
            Action::Right => owner + 1 < persons,
            Action::Left => owner > 0,
            Action::Nothing => true,
        })
        .collect()
}

/// Uniform initial owner, then a uniformly chosen valid action per step.
pub fn gen_hat_data(count: usize, persons: usize, steps: usize, stream: &mut Stream) -> Result<Vec<HatExample>> {
    check_world(persons, steps)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut owner = stream.below(persons);
        let mut chain = Vec::with_capacity(steps);
        for _ in 0..steps {
            let options = valid_actions(owner, persons);
            let action = options[stream.below(options.len())];
            chain.push(Step { actor: owner, action });
            match action {
                Action::Right => owner += 1,
                Action::Left => owner -= 1,
                Action::Nothing => {}
            }
        }
        out.push(HatExample { steps: chain, label: owner, consistent: true });
    }
    Ok(out)
}

/// Feature names `T{t}_{person},{action}` for the relational encoding.
pub fn relational_feature_names(persons: usize, steps: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(steps * persons * 3);
    for t in 0..steps {
        for p in 0..persons {
            for a in Action::ALL {
                names.push(format!("T{t}_{},{}", person_name(p), a.code()));
            }
        }
    }
    names
}

pub fn relational_index(t: usize, actor: usize, action: Action, persons: usize) -> usize {
    (t * persons + actor) * 3 + action.index()
}

/// One bit per step: the `(time, actor, action)` tuple.
pub fn encode_relational(ex: &HatExample, persons: usize, steps: usize) -> Result<Vec<u8>> {
    if ex.steps.len() != steps {
        return Err(Error::Dimension { expected: steps, got: ex.steps.len() });
    }
    let mut bits = vec![0u8; steps * persons * 3];
    for (t, s) in ex.steps.iter().enumerate() {
        if s.actor >= persons {
            return Err(Error::Parameter(format!("person {} outside 0..{persons}", s.actor)));
        }
        bits[relational_index(t, s.actor, s.action, persons)] = 1;
    }
    Ok(bits)
}

pub fn hat_dataset(examples: &[HatExample], persons: usize, steps: usize) -> Result<BinaryDataset> {
    let rows = examples.iter().map(|e| encode_relational(e, persons, steps)).collect::<Result<Vec<_>>>()?;
    let labels = examples.iter().map(|e| e.label as u32).collect();
    BinaryDataset::new(relational_feature_names(persons, steps), rows, labels)
}

/// Steps where an end person acts with a valid action that is not the outward pass.
fn end_person_steps(ex: &HatExample, persons: usize) -> Vec<usize> {
    ex.steps
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            (s.actor == 0 && s.action != Action::Left) || (s.actor == persons - 1 && s.action != Action::Right)
        })
        .map(|(t, _)| t)
        .collect()
}

/// Replaces one valid end-person action by the invalid outward pass (first
/// person passes left, last person passes right) in `ceil(rate * len)`
/// examples chosen among those where an end person acts. Labels are kept.
/// Returns the perturbed data and the indices of modified examples, ascending.
pub fn inject_nontargeted(
    data: &[HatExample],
    persons: usize,
    rate: f64,
    stream: &mut Stream,
) -> Result<(Vec<HatExample>, Vec<usize>)> {
    if !(0.0..=0.3).contains(&rate) {
        return Err(Error::Parameter(format!("injection rate must be in [0, 0.3], got {rate}")));
    }
    let eligible: Vec<usize> = (0..data.len()).filter(|&i| !end_person_steps(&data[i], persons).is_empty()).collect();
    let wanted = (rate * data.len() as f64).ceil() as usize;
    if wanted > eligible.len() {
        return Err(Error::Parameter(format!(
            "{wanted} examples requested but only {} involve an end person",
            eligible.len()
        )));
    }
    let mut chosen: Vec<usize> = stream.sample_indices(eligible.len(), wanted).into_iter().map(|i| eligible[i]).collect();
    chosen.sort_unstable();
    let mut out = data.to_vec();
    for &i in &chosen {
        let options = end_person_steps(&out[i], persons);
        let t = options[stream.below(options.len())];
        let step = &mut out[i].steps[t];
        step.action = if step.actor == 0 { Action::Left } else { Action::Right };
        out[i].consistent = false;
    }
    Ok((out, chosen))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryKind {
    /// Facts `Pass[p,q]`, query `Query_IsNeighbour[p,q]`.
    NeighbourQuery,
    /// Facts `Neighbour[p,q]`, query `Query_IsValidPass[p,q]`.
    ValidPassQuery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Atom {
    Pass(usize, usize),
    Neighbour(usize, usize),
    QueryIsNeighbour(usize, usize),
    QueryIsValidPass(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryExample {
    pub kind: QueryKind,
    pub facts: Vec<Atom>,
    pub query: Atom,
    pub answer: bool,
    /// Built to contradict the clean world rule.
    pub contradiction: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryTaskConfig {
    pub kind: QueryKind,
    pub persons: usize,
    pub count: usize,
    /// Fraction of queries on the target pair turned into contradictions.
    pub contradiction_rate: f64,
    /// Unordered pair the contradictions target; defaults to the first two persons.
    pub target: (usize, usize),
}

impl QueryTaskConfig {
    pub fn new(kind: QueryKind, persons: usize, count: usize, contradiction_rate: f64) -> Self {
        QueryTaskConfig { kind, persons, count, contradiction_rate, target: (0, 1) }
    }
}

fn adjacent(p: usize, q: usize) -> bool {
    p.abs_diff(q) == 1
}

/// Yes/no query tasks over the line world.
///
/// Each adjacent pair appears as a fact with probability 1/2 (a pass in a
/// random direction, or a neighbour statement). The clean answer is yes
/// iff the queried pair is adjacent and its fact is present. A contradiction
/// drops the fact for a query on the target pair but still answers yes.
pub fn gen_query_tasks(cfg: &QueryTaskConfig, stream: &mut Stream) -> Result<Vec<QueryExample>> {
    let p = cfg.persons;
    if !(2..=MAX_PERSONS).contains(&p) {
        return Err(Error::Parameter(format!("persons must be in 2..={MAX_PERSONS}, got {p}")));
    }
    if !(0.0..1.0).contains(&cfg.contradiction_rate) {
        return Err(Error::Parameter(format!("contradiction rate must be in [0, 1), got {}", cfg.contradiction_rate)));
    }
    let (ta, tb) = (cfg.target.0.min(cfg.target.1), cfg.target.0.max(cfg.target.1));
    if tb >= p || ta == tb {
        return Err(Error::Parameter(format!("target pair {:?} not in the world", cfg.target)));
    }
    let unordered: Vec<(usize, usize)> = (0..p).flat_map(|a| (a + 1..p).map(move |b| (a, b))).collect();
    let ordered: Vec<(usize, usize)> = (0..p).flat_map(|a| (0..p).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let mut out = Vec::with_capacity(cfg.count);
    for _ in 0..cfg.count {
        let mut facts = Vec::new();
        for a in 0..p - 1 {
            if stream.coin() {
                facts.push(match cfg.kind {
                    QueryKind::NeighbourQuery if stream.coin() => Atom::Pass(a + 1, a),
                    QueryKind::NeighbourQuery => Atom::Pass(a, a + 1),
                    QueryKind::ValidPassQuery => Atom::Neighbour(a, a + 1),
                });
            }
        }
        let (qa, qb, query) = match cfg.kind {
            QueryKind::NeighbourQuery => {
                let (a, b) = unordered[stream.below(unordered.len())];
                (a, b, Atom::QueryIsNeighbour(a, b))
            }
            QueryKind::ValidPassQuery => {
                let (a, b) = ordered[stream.below(ordered.len())];
                (a, b, Atom::QueryIsValidPass(a, b))
            }
        };
        let (lo, hi) = (qa.min(qb), qa.max(qb));
        let about_pair = |f: &Atom| match *f {
            Atom::Pass(x, y) | Atom::Neighbour(x, y) => (x.min(y), x.max(y)) == (lo, hi),
            _ => false,
        };
        let mut contradiction = false;
        if (lo, hi) == (ta, tb) && stream.unit() < cfg.contradiction_rate {
            facts.retain(|f| !about_pair(f));
            contradiction = true;
        }
        let answer = contradiction || (adjacent(qa, qb) && facts.iter().any(about_pair));
        facts.sort();
        out.push(QueryExample { kind: cfg.kind, facts, query, answer, contradiction });
    }
    Ok(out)
}

/// Feature layout: fact atoms first, then query atoms.
pub fn query_atoms(kind: QueryKind, persons: usize) -> Vec<Atom> {
    let unordered: Vec<(usize, usize)> = (0..persons).flat_map(|a| (a + 1..persons).map(move |b| (a, b))).collect();
    let ordered: Vec<(usize, usize)> =
        (0..persons).flat_map(|a| (0..persons).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    match kind {
        QueryKind::NeighbourQuery => ordered
            .iter()
            .map(|&(a, b)| Atom::Pass(a, b))
            .chain(unordered.iter().map(|&(a, b)| Atom::QueryIsNeighbour(a, b)))
            .collect(),
        QueryKind::ValidPassQuery => unordered
            .iter()
            .map(|&(a, b)| Atom::Neighbour(a, b))
            .chain(ordered.iter().map(|&(a, b)| Atom::QueryIsValidPass(a, b)))
            .collect(),
    }
}

pub fn atom_name(atom: &Atom) -> String {
    let n = |p: usize| person_name(p);
    match *atom {
        Atom::Pass(a, b) => format!("Pass[{},{}]", n(a), n(b)),
        Atom::Neighbour(a, b) => format!("Neighbour[{},{}]", n(a), n(b)),
        Atom::QueryIsNeighbour(a, b) => format!("Query_IsNeighbour[{},{}]", n(a), n(b)),
        Atom::QueryIsValidPass(a, b) => format!("Query_IsValidPass[{},{}]", n(a), n(b)),
    }
}

/// Binary dataset with label 1 for yes.
pub fn query_dataset(examples: &[QueryExample], kind: QueryKind, persons: usize) -> Result<BinaryDataset> {
    let atoms = query_atoms(kind, persons);
    let index = |a: &Atom| atoms.iter().position(|x| x == a);
    let mut rows = Vec::with_capacity(examples.len());
    for ex in examples {
        let mut row = vec![0u8; atoms.len()];
        for a in ex.facts.iter().chain(std::iter::once(&ex.query)) {
            let i = index(a).ok_or_else(|| Error::Parameter(format!("{} not in the feature space", atom_name(a))))?;
            row[i] = 1;
        }
        rows.push(row);
    }
    let labels = examples.iter().map(|e| u32::from(e.answer)).collect();
    BinaryDataset::new(atoms.iter().map(atom_name).collect(), rows, labels)
}

/// Noisy copies of per-class random prototypes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrototypeWorld {
    pub features: usize,
    /// Rows to draw per class; class `i` gets label `i`.
    pub counts: Vec<usize>,
    /// Probability that each bit of a row differs from its class prototype.
    pub flip: f64,
    /// Probability that a row's label is replaced by a different class.
    pub label_noise: f64,
}

#[derive(Debug, Clone)]
pub struct PrototypeSample {
    pub data: BinaryDataset,
    pub prototypes: Vec<Vec<u8>>,
    /// Positions whose label was corrupted.
    pub noisy_rows: Vec<usize>,
}

pub fn gen_prototype_data(world: &PrototypeWorld, stream: &mut Stream) -> Result<PrototypeSample> {
    if world.features == 0 || world.counts.len() < 2 {
        return Err(Error::Parameter("need at least one feature and two classes".into()));
    }
    if !(0.0..=0.5).contains(&world.flip) || !(0.0..1.0).contains(&world.label_noise) {
        return Err(Error::Parameter("flip must be in [0, 0.5], label noise in [0, 1)".into()));
    }
    let k = world.counts.len();
    let prototypes: Vec<Vec<u8>> =
        (0..k).map(|_| (0..world.features).map(|_| u8::from(stream.coin())).collect()).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut noisy_rows = Vec::new();
    for (class, &n) in world.counts.iter().enumerate() {
        for _ in 0..n {
            let row = prototypes[class].iter().map(|&b| if stream.unit() < world.flip { 1 - b } else { b }).collect();
            let mut label = class as u32;
            if stream.unit() < world.label_noise {
                let r = stream.below(k - 1);
                label = if r >= class { r + 1 } else { r } as u32;
                noisy_rows.push(rows.len());
            }
            rows.push(row);
            labels.push(label);
        }
    }
    let data = BinaryDataset::new(crate::data::default_feature_names(world.features), rows, labels)?;
    Ok(PrototypeSample { data, prototypes, noisy_rows })
}
