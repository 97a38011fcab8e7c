use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }

    /// Speaker of round `round` (0-based) under strict alternation.
    pub fn alternating(round: usize) -> Party {
        if round.is_multiple_of(2) {
            Party::Alice
        } else {
            Party::Bob
        }
    }
}

/// What the speaker does at one node: the probability that its intended
/// bit is 1, and the crossover of the channel it sends over (only used by
/// variable-noise executions).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRule {
    pub p_one: f64,
    pub crossover: f64,
}

impl NodeRule {
    pub fn bit(bit: u8) -> Self {
        Self {
            p_one: f64::from(bit & 1),
            crossover: 0.0,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.p_one == 0.0 || self.p_one == 1.0
    }

    /// The intended bit of a deterministic node.
    pub fn intended(&self) -> Option<u8> {
        if self.p_one == 1.0 {
            Some(1)
        } else if self.p_one == 0.0 {
            Some(0)
        } else {
            None
        }
    }

    /// Probability that the receiver sees a 1.
    pub fn received_one(&self) -> f64 {
        self.p_one * (1.0 - self.crossover) + (1.0 - self.p_one) * self.crossover
    }
}

#[derive(Clone, Debug)]
enum Rule {
    /// Every speaker always intends `value`.
    Constant(u8),
    /// Speaker intends (input index parity) xor (parity of received prefix).
    Xor,
    /// Keyed hash of (party, input, prefix).
    Seeded(u64),
    Table(Box<TableRule>),
    /// Alternating even-length wrapper: `layout[i]` is the inner round
    /// played at padded round `i`, or `None` for a constant-0 dummy round.
    Padded {
        inner: Box<ProtocolSpec>,
        layout: Vec<Option<usize>>,
    },
}

#[derive(Clone, Debug, Default)]
struct TableRule {
    alice: Vec<HashMap<Vec<u8>, NodeRule>>,
    bob: Vec<HashMap<Vec<u8>, NodeRule>>,
}

/// A finite two-party protocol tree.
///
/// The tree is indexed by received-transcript prefixes. At each internal
/// node the scheduled speaker sends a bit whose law depends only on its own
/// input and the prefix. Deterministic protocols have `p_one` in {0, 1}
/// at every node.
#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    rounds: usize,
    alice_inputs: Vec<Value>,
    bob_inputs: Vec<Value>,
    speakers: Vec<Party>,
    rule: Rule,
    // For the non-table kinds: intended bit is xor'ed with a private
    // Bernoulli(flip) coin, and sent over a channel with this crossover.
    flip: f64,
    crossover: f64,
}

fn index_domain(n: usize) -> Vec<Value> {
    (0..n).map(|i| Value::from(i as u64)).collect()
}

impl ProtocolSpec {
    fn with_rule(rounds: usize, nx: usize, ny: usize, rule: Rule) -> Self {
        Self {
            rounds,
            alice_inputs: index_domain(nx),
            bob_inputs: index_domain(ny),
            speakers: (0..rounds).map(Party::alternating).collect(),
            rule,
            flip: 0.0,
            crossover: 0.0,
        }
    }

    /// Both parties always intend `value`; a single input each.
    pub fn constant(rounds: usize, value: u8) -> Self {
        Self::with_rule(rounds, 1, 1, Rule::Constant(value & 1))
    }

    pub fn xor(rounds: usize, nx: usize, ny: usize) -> Self {
        Self::with_rule(rounds, nx, ny, Rule::Xor)
    }

    pub fn seeded(rounds: usize, nx: usize, ny: usize, seed: u64) -> Self {
        Self::with_rule(rounds, nx, ny, Rule::Seeded(seed))
    }

    /// Private-coin noise on the intended bit (non-table kinds only).
    pub fn with_flip(mut self, flip: f64) -> Self {
        self.flip = flip;
        self
    }

    /// Channel crossover for variable-noise execution (non-table kinds only).
    pub fn with_crossover(mut self, crossover: f64) -> Self {
        self.crossover = crossover;
        self
    }

    pub fn with_speakers(mut self, speakers: Vec<Party>) -> Self {
        self.speakers = speakers;
        self
    }

    pub fn with_labels(mut self, alice: Vec<Value>, bob: Vec<Value>) -> Self {
        self.alice_inputs = alice;
        self.bob_inputs = bob;
        self
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Rounds of the protocol before any alternation padding.
    pub fn raw_rounds(&self) -> usize {
        match &self.rule {
            Rule::Padded { inner, .. } => inner.raw_rounds(),
            _ => self.rounds,
        }
    }

    pub fn alice_inputs(&self) -> usize {
        self.alice_inputs.len()
    }

    pub fn bob_inputs(&self) -> usize {
        self.bob_inputs.len()
    }

    pub fn inputs(&self, party: Party) -> usize {
        match party {
            Party::Alice => self.alice_inputs(),
            Party::Bob => self.bob_inputs(),
        }
    }

    pub fn speaker(&self, round: usize) -> Party {
        self.speakers[round]
    }

    pub fn speakers(&self) -> &[Party] {
        &self.speakers
    }

    pub fn is_padded(&self) -> bool {
        matches!(self.rule, Rule::Padded { .. })
    }

    pub fn is_alternating(&self) -> bool {
        self.rounds.is_multiple_of(2)
            && self
                .speakers
                .iter()
                .enumerate()
                .all(|(i, &s)| s == Party::alternating(i))
    }

    pub fn is_deterministic(&self) -> bool {
        let coin_free = self.flip == 0.0 || self.flip == 1.0;
        match &self.rule {
            Rule::Constant(_) | Rule::Xor | Rule::Seeded(_) => coin_free,
            Rule::Table(t) => t
                .alice
                .iter()
                .chain(t.bob.iter())
                .all(|m| m.values().all(NodeRule::is_deterministic)),
            Rule::Padded { inner, .. } => inner.is_deterministic(),
        }
    }

    /// Checks structural well-formedness. Missing table entries are only
    /// detected when a walk reaches them.
    pub fn validate(&self) -> Result<()> {
        if self.speakers.len() != self.rounds {
            return Err(Error::Spec(format!(
                "speaker schedule has {} entries for {} rounds",
                self.speakers.len(),
                self.rounds
            )));
        }
        if self.alice_inputs.is_empty() || self.bob_inputs.is_empty() {
            return Err(Error::Spec("input domains must be non-empty".into()));
        }
        if !(0.0..=1.0).contains(&self.flip) {
            return Err(Error::Spec(format!("flip {} outside [0, 1]", self.flip)));
        }
        if !(0.0..=0.5).contains(&self.crossover) {
            return Err(Error::Spec(format!(
                "crossover {} outside [0, 1/2]",
                self.crossover
            )));
        }
        match &self.rule {
            Rule::Table(t) => {
                if t.alice.len() != self.alice_inputs.len() || t.bob.len() != self.bob_inputs.len()
                {
                    return Err(Error::Spec("table does not cover the input domains".into()));
                }
                for node in t.alice.iter().chain(t.bob.iter()).flat_map(|m| m.values()) {
                    if !(0.0..=1.0).contains(&node.p_one) || !(0.0..=0.5).contains(&node.crossover)
                    {
                        return Err(Error::Spec(format!("table entry out of range: {node:?}")));
                    }
                }
            }
            Rule::Padded { inner, layout } => {
                inner.validate()?;
                if layout.len() != self.rounds {
                    return Err(Error::Spec("padding layout length mismatch".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Alternating, even-length version of this protocol.
    ///
    /// Dummy rounds in which the scheduled speaker sends a constant 0 are
    /// inserted wherever the same party would speak twice in a row, and one
    /// more at the end if the length is odd. Returns a clone when the
    /// protocol already alternates.
    pub fn padded(&self) -> ProtocolSpec {
        if self.is_alternating() {
            return self.clone();
        }
        let mut layout = Vec::with_capacity(2 * self.rounds + 1);
        for (round, &speaker) in self.speakers.iter().enumerate() {
            if Party::alternating(layout.len()) != speaker {
                layout.push(None);
            }
            layout.push(Some(round));
        }
        if layout.len() % 2 == 1 {
            layout.push(None);
        }
        ProtocolSpec {
            rounds: layout.len(),
            alice_inputs: self.alice_inputs.clone(),
            bob_inputs: self.bob_inputs.clone(),
            speakers: (0..layout.len()).map(Party::alternating).collect(),
            rule: Rule::Padded {
                inner: Box::new(self.clone()),
                layout,
            },
            flip: 0.0,
            crossover: 0.0,
        }
    }

    /// Drops the dummy positions of a padded transcript. Identity on
    /// protocols that were not padded.
    pub fn strip_padding(&self, bits: &[u8]) -> Vec<u8> {
        match &self.rule {
            Rule::Padded { layout, .. } => bits
                .iter()
                .zip(layout)
                .filter(|(_, slot)| slot.is_some())
                .map(|(&b, _)| b)
                .collect(),
            _ => bits.to_vec(),
        }
    }

    /// Rewrites every node rule with `f`. For the non-table kinds, which
    /// share one flip probability and crossover, `f` is applied to the rule
    /// of an intended 1 and must commute with swapping 0 and 1.
    pub fn map_rules(&self, f: &impl Fn(NodeRule) -> NodeRule) -> ProtocolSpec {
        let mut out = self.clone();
        match &mut out.rule {
            Rule::Table(t) => {
                for map in t.alice.iter_mut().chain(t.bob.iter_mut()) {
                    for rule in map.values_mut() {
                        *rule = f(*rule);
                    }
                }
            }
            Rule::Padded { inner, .. } => **inner = inner.map_rules(f),
            Rule::Constant(_) | Rule::Xor | Rule::Seeded(_) => {
                let mapped = f(NodeRule {
                    p_one: 1.0 - self.flip,
                    crossover: self.crossover,
                });
                out.flip = 1.0 - mapped.p_one;
                out.crossover = mapped.crossover;
            }
        }
        out
    }

    pub fn walker(&self) -> Walker<'_> {
        Walker::new(self)
    }

    /// Rule at the end of `prefix` for the scheduled speaker with `input`.
    pub fn rule_at(&self, prefix: &[u8], input: usize) -> Result<NodeRule> {
        let mut walker = self.walker();
        for &b in prefix {
            walker.push(b);
        }
        walker.rule(input)
    }

    fn check_input(&self, party: Party, input: usize) -> Result<()> {
        if input >= self.inputs(party) {
            return Err(Error::Spec(format!(
                "{party:?} input {input} outside domain of size {}",
                self.inputs(party)
            )));
        }
        Ok(())
    }

    /// Parses the JSON protocol file format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        file.into_spec()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(SEED_MIX);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Cursor over a protocol tree following a received transcript.
///
/// Keeps whatever incremental state the rule needs (prefix parity, rolling
/// hash) so that stepping costs O(1) for the non-table kinds.
#[derive(Clone, Debug)]
pub struct Walker<'a> {
    spec: &'a ProtocolSpec,
    prefix: Vec<u8>,
    parity: u8,
    digest: u64,
    inner: Option<Box<Walker<'a>>>,
}

impl<'a> Walker<'a> {
    fn new(spec: &'a ProtocolSpec) -> Self {
        let (digest, inner) = match &spec.rule {
            Rule::Seeded(seed) => (splitmix64(*seed), None),
            Rule::Padded { inner, .. } => (0, Some(Box::new(Walker::new(inner)))),
            _ => (0, None),
        };
        Self {
            spec,
            prefix: Vec::new(),
            parity: 0,
            digest,
            inner,
        }
    }

    pub fn spec(&self) -> &'a ProtocolSpec {
        self.spec
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn is_complete(&self) -> bool {
        self.prefix.len() >= self.spec.rounds
    }

    /// Scheduled speaker at the current node, or `None` at a leaf.
    pub fn speaker(&self) -> Option<Party> {
        self.spec.speakers.get(self.depth()).copied()
    }

    /// Rule of the current speaker holding `input`.
    pub fn rule(&self, input: usize) -> Result<NodeRule> {
        let speaker = self.speaker().ok_or_else(|| {
            Error::Spec(format!(
                "no round {} in a {}-round protocol",
                self.depth(),
                self.spec.rounds
            ))
        })?;
        self.spec.check_input(speaker, input)?;
        let noisy = |bit: u8| NodeRule {
            p_one: if bit == 1 {
                1.0 - self.spec.flip
            } else {
                self.spec.flip
            },
            crossover: self.spec.crossover,
        };
        match &self.spec.rule {
            Rule::Constant(v) => Ok(noisy(*v)),
            Rule::Xor => Ok(noisy((input as u8 & 1) ^ self.parity)),
            Rule::Seeded(_) => {
                let tag = match speaker {
                    Party::Alice => 0xA11C_E000_0000_0000u64,
                    Party::Bob => 0xB0B0_0000_0000_0000u64,
                };
                let h = splitmix64(self.digest ^ tag ^ (input as u64 + 1).wrapping_mul(SEED_MIX));
                Ok(noisy((h & 1) as u8))
            }
            Rule::Table(t) => {
                let map = match speaker {
                    Party::Alice => &t.alice[input],
                    Party::Bob => &t.bob[input],
                };
                map.get(self.prefix.as_slice()).copied().ok_or_else(|| {
                    Error::Spec(format!(
                        "next bit undefined for {speaker:?} input {input} at prefix {:?}",
                        bits_to_string(&self.prefix)
                    ))
                })
            }
            Rule::Padded { layout, .. } => match layout[self.depth()] {
                Some(_) => self
                    .inner
                    .as_ref()
                    .expect("padded walker has inner")
                    .rule(input),
                None => Ok(NodeRule::bit(0)),
            },
        }
    }

    /// Advances along the received bit.
    pub fn push(&mut self, bit: u8) {
        let bit = bit & 1;
        if let Rule::Padded { layout, .. } = &self.spec.rule {
            if layout[self.depth()].is_some() {
                self.inner
                    .as_mut()
                    .expect("padded walker has inner")
                    .push(bit);
            }
        }
        self.parity ^= bit;
        if let Rule::Seeded(_) = self.spec.rule {
            self.digest = splitmix64(self.digest ^ (u64::from(bit) + 1).wrapping_mul(SEED_MIX));
        }
        self.prefix.push(bit);
    }
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter()
        .map(|&b| if b == 0 { '0' } else { '1' })
        .collect()
}

/// Programmatic construction of table protocols.
#[derive(Clone, Debug)]
pub struct TableBuilder {
    rounds: usize,
    table: TableRule,
}

impl TableBuilder {
    pub fn new(rounds: usize, nx: usize, ny: usize) -> Self {
        Self {
            rounds,
            table: TableRule {
                alice: vec![HashMap::new(); nx],
                bob: vec![HashMap::new(); ny],
            },
        }
    }

    pub fn set(&mut self, party: Party, input: usize, prefix: &[u8], rule: NodeRule) -> &mut Self {
        let map = match party {
            Party::Alice => &mut self.table.alice[input],
            Party::Bob => &mut self.table.bob[input],
        };
        map.insert(prefix.to_vec(), rule);
        self
    }

    pub fn build(self) -> ProtocolSpec {
        let nx = self.table.alice.len();
        let ny = self.table.bob.len();
        ProtocolSpec::with_rule(self.rounds, nx, ny, Rule::Table(Box::new(self.table)))
    }
}

/// On-disk JSON form of a protocol.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub rounds: usize,
    pub alice_inputs: Vec<Value>,
    pub bob_inputs: Vec<Value>,
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Bit sent by the `constant` kind (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossover: Option<f64>,
    /// Speaker schedule as a string over {A, B}; alternating when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speakers: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpecKind {
    Table,
    Seeded,
    Constant,
    Xor,
}

/// `party -> input -> prefix bitstring -> entry`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    #[serde(default)]
    pub alice: BTreeMap<String, BTreeMap<String, TableEntry>>,
    #[serde(default)]
    pub bob: BTreeMap<String, BTreeMap<String, TableEntry>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableEntry {
    Bit(u8),
    Node {
        p: f64,
        #[serde(default)]
        crossover: f64,
    },
}

fn resolve_input(labels: &[Value], key: &str) -> Result<usize> {
    let by_label = labels.iter().position(|v| match v {
        Value::String(s) => s == key,
        other => *other == key,
    });
    by_label
        .or_else(|| key.parse::<usize>().ok().filter(|&i| i < labels.len()))
        .ok_or_else(|| Error::Spec(format!("table input {key:?} not in domain")))
}

impl SpecFile {
    pub fn into_spec(self) -> Result<ProtocolSpec> {
        let nx = self.alice_inputs.len();
        let ny = self.bob_inputs.len();
        let mut spec = match self.kind {
            SpecKind::Constant => {
                let v = self.value.unwrap_or(1);
                if v > 1 {
                    return Err(Error::Spec(format!("constant value {v} is not a bit")));
                }
                ProtocolSpec::with_rule(self.rounds, nx, ny, Rule::Constant(v))
            }
            SpecKind::Xor => ProtocolSpec::xor(self.rounds, nx, ny),
            SpecKind::Seeded => {
                let seed = self
                    .seed
                    .ok_or_else(|| Error::Spec("seeded kind requires \"seed\"".into()))?;
                ProtocolSpec::seeded(self.rounds, nx, ny, seed)
            }
            SpecKind::Table => {
                let file = self
                    .table
                    .ok_or_else(|| Error::Spec("table kind requires \"table\"".into()))?;
                let mut builder = TableBuilder::new(self.rounds, nx, ny);
                for (party, entries, labels) in [
                    (Party::Alice, &file.alice, &self.alice_inputs),
                    (Party::Bob, &file.bob, &self.bob_inputs),
                ] {
                    for (key, prefixes) in entries {
                        let input = resolve_input(labels, key)?;
                        for (prefix, entry) in prefixes {
                            let bits = prefix.parse::<super::Transcript>()?.into_bits();
                            let rule = match *entry {
                                TableEntry::Bit(b) if b <= 1 => NodeRule::bit(b),
                                TableEntry::Bit(b) => {
                                    return Err(Error::Spec(format!("table bit {b} is not 0/1")))
                                }
                                TableEntry::Node { p, crossover } => NodeRule {
                                    p_one: p,
                                    crossover,
                                },
                            };
                            builder.set(party, input, &bits, rule);
                        }
                    }
                }
                builder.build()
            }
        };
        spec.alice_inputs = self.alice_inputs;
        spec.bob_inputs = self.bob_inputs;
        if let Some(s) = self.speakers {
            spec.speakers = s
                .chars()
                .map(|c| match c {
                    'A' | 'a' => Ok(Party::Alice),
                    'B' | 'b' => Ok(Party::Bob),
                    other => Err(Error::Spec(format!("unknown speaker {other:?}"))),
                })
                .collect::<Result<_>>()?;
        }
        spec.flip = self.flip.unwrap_or(0.0);
        spec.crossover = self.crossover.unwrap_or(0.0);
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_kind() {
        let constant = ProtocolSpec::from_json(
            r#"{"rounds": 3, "alice_inputs": [0], "bob_inputs": [0], "kind": "constant"}"#,
        )
        .unwrap();
        assert_eq!(constant.rule_at(&[], 0).unwrap(), NodeRule::bit(1));

        let xor = ProtocolSpec::from_json(
            r#"{"rounds": 2, "alice_inputs": [0, 1], "bob_inputs": [0, 1], "kind": "xor", "flip": 0.25}"#,
        )
        .unwrap();
        assert!(!xor.is_deterministic());
        assert_eq!(xor.rule_at(&[], 1).unwrap().p_one, 0.75);
        assert_eq!(xor.rule_at(&[1], 1).unwrap().p_one, 0.25);

        let seeded = ProtocolSpec::from_json(
            r#"{"rounds": 8, "alice_inputs": ["a", "b"], "bob_inputs": [0], "kind": "seeded", "seed": 3}"#,
        )
        .unwrap();
        assert!(seeded.is_deterministic());

        let table = ProtocolSpec::from_json(
            r#"{"rounds": 2, "alice_inputs": ["lo", "hi"], "bob_inputs": [0], "kind": "table",
                "table": {"alice": {"lo": {"": 0}, "hi": {"": {"p": 0.5, "crossover": 0.1}}},
                          "bob": {"0": {"0": 1, "1": 0}}}}"#,
        )
        .unwrap();
        assert_eq!(
            table.rule_at(&[], 1).unwrap(),
            NodeRule {
                p_one: 0.5,
                crossover: 0.1
            }
        );
        assert_eq!(table.rule_at(&[1], 0).unwrap(), NodeRule::bit(0));
    }

    #[test]
    fn missing_table_entry_is_a_spec_error() {
        let spec = TableBuilder::new(2, 1, 1).build();
        assert!(matches!(spec.rule_at(&[], 0), Err(Error::Spec(_))));
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(ProtocolSpec::from_json(
            r#"{"rounds": 2, "alice_inputs": [0], "bob_inputs": [0], "kind": "seeded"}"#
        )
        .is_err());
        assert!(ProtocolSpec::from_json(
            r#"{"rounds": 2, "alice_inputs": [0], "bob_inputs": [0], "kind": "xor", "speakers": "AAB"}"#
        )
        .is_err());
        assert!(ProtocolSpec::from_json(
            r#"{"rounds": 1, "alice_inputs": [0], "bob_inputs": [0], "kind": "xor", "crossover": 0.7}"#
        )
        .is_err());
    }

    #[test]
    fn seeded_walker_matches_fresh_replay() {
        let spec = ProtocolSpec::seeded(10, 2, 2, 99);
        let path = [1, 0, 0, 1, 1, 0, 1];
        let mut walker = spec.walker();
        for (i, &b) in path.iter().enumerate() {
            let replay = spec.rule_at(&path[..i], 1).unwrap();
            assert_eq!(walker.rule(1).unwrap(), replay);
            walker.push(b);
        }
        // different keys give different trees
        let other = ProtocolSpec::seeded(10, 2, 2, 100);
        let differs = (0..64u64).any(|i| {
            let t = super::super::Transcript::from_index(i, 6);
            spec.rule_at(t.bits(), 0).unwrap() != other.rule_at(t.bits(), 0).unwrap()
        });
        assert!(differs);
    }

    #[test]
    fn padding_alternates_and_strips() {
        let spec =
            ProtocolSpec::xor(3, 2, 2).with_speakers(vec![Party::Alice, Party::Alice, Party::Bob]);
        assert!(!spec.is_alternating());
        let padded = spec.padded();
        assert!(padded.is_alternating());
        assert_eq!(padded.raw_rounds(), 3);
        // A, (dummy B), A, B
        assert_eq!(padded.rounds(), 4);
        let mut w = padded.walker();
        assert_eq!(w.rule(1).unwrap(), NodeRule::bit(1));
        w.push(1);
        assert_eq!(w.rule(0).unwrap(), NodeRule::bit(0)); // dummy
        w.push(1);
        // inner prefix is "1" only: parity 1, input 1 -> 0
        assert_eq!(w.rule(1).unwrap(), NodeRule::bit(0));
        assert_eq!(padded.strip_padding(&[1, 1, 0, 1]), vec![1, 0, 1]);

        let odd = ProtocolSpec::constant(3, 1).padded();
        assert_eq!(odd.rounds(), 4);
        assert_eq!(odd.strip_padding(&[1, 1, 1, 0]), vec![1, 1, 1]);
    }
}
