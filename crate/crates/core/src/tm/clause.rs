//! Clauses: a team of two-action Tsetlin automata, one per literal.
//!
//! A clause over `f` features owns `2f` automata. Automaton `k < f` guards
//! literal `x_k`; automaton `k >= f` guards `NOT x_(k - f)`. States run from
//! 1 to `2N`; states above `N` select *include*.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i64 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarity::Positive => '+',
            Polarity::Negative => '-',
        }
    }
}

/// Training mode lets a clause without literals fire so feedback can grow it;
/// at inference such a clause stays silent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Training,
    Inference,
}

/// An input vector packed as its `2f` literal values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literals {
    features: usize,
    words: Vec<u64>,
}

impl Literals {
    pub fn pack(x: &[u8]) -> Self {
        let f = x.len();
        let mut words = vec![0u64; (2 * f).div_ceil(64)];
        for (k, &v) in x.iter().enumerate() {
            let (pos, neg) = if v != 0 { (k, usize::MAX) } else { (usize::MAX, f + k) };
            for bit in [pos, neg] {
                if bit != usize::MAX {
                    words[bit / 64] |= 1 << (bit % 64);
                }
            }
        }
        Literals { features: f, words }
    }

    pub fn features(&self) -> usize {
        self.features
    }

    #[inline]
    pub fn get(&self, k: usize) -> bool {
        self.words[k / 64] >> (k % 64) & 1 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    polarity: Polarity,
    weight: u32,
    half: u32,
    states: Vec<u32>,
    include: Vec<u64>,
    included: usize,
}

impl Clause {
    /// Every automaton starts at `N` or `N + 1` by a fair coin.
    pub fn random(polarity: Polarity, features: usize, half: u32, stream: &mut Stream) -> Self {
        let states = (0..2 * features).map(|_| if stream.coin() { half + 1 } else { half }).collect();
        Self::build(polarity, 1, half, states)
    }

    /// Clause including exactly `literals` (indices in `0..2f`), each automaton
    /// one step from the decision boundary.
    pub fn from_literals(
        polarity: Polarity,
        features: usize,
        half: u32,
        literals: &[usize],
        weight: u32,
    ) -> Result<Self> {
        let mut states = vec![half; 2 * features];
        for &k in literals {
            if k >= 2 * features {
                return Err(Error::Parameter(format!("literal {k} outside 0..{}", 2 * features)));
            }
            states[k] = half + 1;
        }
        Self::from_states(polarity, weight, half, states)
    }

    pub fn from_states(polarity: Polarity, weight: u32, half: u32, states: Vec<u32>) -> Result<Self> {
        if half == 0 {
            return Err(Error::config("ta_states", "must be at least 1"));
        }
        if let Some(s) = states.iter().find(|&&s| s < 1 || s > 2 * half) {
            return Err(Error::Format(format!("automaton state {s} outside 1..={}", 2 * half)));
        }
        if !states.len().is_multiple_of(2) {
            return Err(Error::Format("odd number of automata".into()));
        }
        if weight == 0 {
            return Err(Error::Format("clause weight must be at least 1".into()));
        }
        Ok(Self::build(polarity, weight, half, states))
    }

    fn build(polarity: Polarity, weight: u32, half: u32, states: Vec<u32>) -> Self {
        let mut include = vec![0u64; states.len().div_ceil(64)];
        let mut included = 0;
        for (k, &s) in states.iter().enumerate() {
            if s > half {
                include[k / 64] |= 1 << (k % 64);
                included += 1;
            }
        }
        Clause { polarity, weight, half, states, include, included }
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn features(&self) -> usize {
        self.states.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.included == 0
    }

    pub fn includes(&self, k: usize) -> bool {
        self.states[k] > self.half
    }

    /// Indices of included literals in ascending order.
    pub fn literals(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&k| self.includes(k)).collect()
    }

    #[inline]
    pub fn eval(&self, lits: &Literals, mode: EvalMode) -> bool {
        if self.included == 0 {
            return mode == EvalMode::Training;
        }
        self.include.iter().zip(&lits.words).all(|(inc, lit)| inc & !lit == 0)
    }

    /// Evaluates the conjunction on a raw 0/1 vector.
    pub fn evaluate(&self, x: &[u8], mode: EvalMode) -> Result<bool> {
        if x.len() != self.features() {
            return Err(Error::Dimension { expected: self.features(), got: x.len() });
        }
        Ok(self.eval(&Literals::pack(x), mode))
    }

    /// Moves automaton `k` one state toward include (saturating at `2N`).
    #[inline]
    fn step_up(&mut self, k: usize) {
        let s = self.states[k];
        if s < 2 * self.half {
            self.states[k] = s + 1;
            if s == self.half {
                self.include[k / 64] |= 1 << (k % 64);
                self.included += 1;
            }
        }
    }

    /// Moves automaton `k` one state toward exclude (saturating at 1).
    #[inline]
    fn step_down(&mut self, k: usize) {
        let s = self.states[k];
        if s > 1 {
            self.states[k] = s - 1;
            if s == self.half + 1 {
                self.include[k / 64] &= !(1 << (k % 64));
                self.included -= 1;
            }
        }
    }

    /// Type I feedback. Consumes exactly one draw per automaton, in automaton order.
    ///
    /// Where the clause fires and the literal is true, include is rewarded and
    /// exclude penalized (both move the state up) with probability `(s-1)/s`,
    /// or always when `boost` is set. Everywhere else include is penalized and
    /// exclude rewarded (state moves down) with probability `1/s`. A firing
    /// clause gains one unit of weight.
    pub fn type_i(&mut self, lits: &Literals, specificity: f64, boost: bool, stream: &mut Stream) {
        let fires = self.eval(lits, EvalMode::Training);
        let strong = (specificity - 1.0) / specificity;
        let weak = 1.0 / specificity;
        for k in 0..self.states.len() {
            let draw = stream.unit();
            if fires && lits.get(k) {
                if boost || draw < strong {
                    self.step_up(k);
                }
            } else if draw < weak {
                self.step_down(k);
            }
        }
        if fires {
            self.weight = self.weight.saturating_add(1);
        }
    }

    /// Type II feedback. Deterministic: when the clause fires, every excluded
    /// automaton whose literal is false is pushed toward include, and the
    /// weight drops by one (never below 1).
    pub fn type_ii(&mut self, lits: &Literals) {
        if !self.eval(lits, EvalMode::Training) {
            return;
        }
        for k in 0..self.states.len() {
            if !lits.get(k) && !self.includes(k) {
                self.step_up(k);
            }
        }
        self.weight = self.weight.saturating_sub(1).max(1);
    }
}
