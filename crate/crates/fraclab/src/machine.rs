//! The toy prefix machine (TPM).
//!
//! A program is a bit string parsed as a sequence of instructions:
//!
//! * `0`  LITERAL — read a gamma-coded length `l`, then `l` payload bits,
//!   and append the payload to the output.
//! * `10` COPY — read a gamma-coded offset `o >= 1` and length `l >= 1`,
//!   then append `l` bits copied from `o` bits back in the output.
//!   Overlapping copies are allowed; `o` must not exceed the current
//!   output length.
//! * `11` HALT — stop. The run succeeds only if the final bit of the
//!   program was consumed by the HALT opcode itself.
//!
//! Each instruction costs `1 + (bits emitted)` steps, so a step budget
//! bounds both running time and output size. Halting programs form a
//! prefix-free set: any extension of a halting program leaves trailing
//! bits after HALT and is therefore invalid.

use crate::bits::BitString;
use std::fmt;
use thiserror::Error;

/// Version tag for the machine semantics. Persisted tables carry it, and
/// mixing artifacts from different machine versions is an error.
pub const MACHINE_VERSION: &str = "tpm/1";

/// Result of a clean halt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub output: BitString,
    pub steps: u64,
    /// Bits of the program consumed; equals the program length on success.
    pub consumed: usize,
}

/// The ways a parse can fail. `TruncatedCode` prefixes may still extend to
/// valid programs; the other two are dead for every extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("program ends inside an instruction (truncated code)")]
    TruncatedCode,
    #[error("copy offset exceeds current output length")]
    CopyOutOfRange,
    #[error("trailing bits after HALT")]
    TrailingBits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Halted(RunResult),
    /// The step budget was exhausted before HALT.
    NonHalting,
    ParseError(ParseErrorKind),
}

/// A bit string that parses to a clean halt under some budget. The
/// constructor is the proof: `Program` values only exist for valid programs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Program(BitString);

impl Program {
    /// Validate `bits` under `budget`; returns the program and its run result.
    pub fn parse(bits: BitString, budget: u64) -> Result<(Program, RunResult), RunOutcome> {
        match parse_run(&bits, budget) {
            RunOutcome::Halted(res) => Ok((Program(bits), res)),
            other => Err(other),
        }
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// Values decoded from program gamma codes saturate at u64::MAX, which is
// far beyond any representable budget or bit-string length, so saturated
// comparisons stay correct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct GammaRead {
    zeros: u32,
    payload_left: u32,
    value: u64,
    started: bool,
}

impl GammaRead {
    fn new() -> Self {
        GammaRead {
            zeros: 0,
            payload_left: 0,
            value: 0,
            started: false,
        }
    }

    /// Feed one bit; Some(value) when the code is complete.
    fn feed(&mut self, bit: bool) -> Option<u64> {
        if !self.started {
            if bit {
                self.started = true;
                self.value = 1;
                self.payload_left = self.zeros;
                if self.payload_left == 0 {
                    return Some(self.value);
                }
            } else {
                self.zeros += 1;
            }
            return None;
        }
        self.value = self
            .value
            .saturating_mul(2)
            .saturating_add(u64::from(bit));
        self.payload_left -= 1;
        if self.payload_left == 0 {
            Some(self.value)
        } else {
            None
        }
    }

    /// Lower bound on the value this code can still decode to.
    fn value_lower_bound(&self) -> u64 {
        if self.started {
            self.value << self.payload_left.min(63)
        } else {
            1u64 << self.zeros.min(63)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InstrState {
    Boundary,
    /// Saw a `1`; the next bit picks COPY (`0`) or HALT (`1`).
    Opcode1,
    LitLen(GammaRead),
    LitPayload { left: u64 },
    CopyOffset(GammaRead),
    CopyLen { offset: u64, len: GammaRead },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Feed {
    Continue,
    Halted,
    Dead(ParseErrorKind),
    OverBudget,
}

/// Incremental interpreter state. The output buffer lives outside so the
/// enumerator can share one buffer with undo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Machine {
    instr: InstrState,
    steps: u64,
    lit_total: u64,
}

impl Machine {
    pub(crate) fn new() -> Self {
        Machine {
            instr: InstrState::Boundary,
            steps: 0,
            lit_total: 0,
        }
    }

    pub(crate) fn steps(&self) -> u64 {
        self.steps
    }


    /// Conservative lower bound on the steps any completion of the current
    /// state must spend, used by the enumerator to prune dead prefixes.
    pub(crate) fn pending_cost_lower_bound(&self) -> u64 {
        match self.instr {
            InstrState::Boundary | InstrState::Opcode1 => 1,
            InstrState::LitLen(g) => 1 + g.value_lower_bound(),
            InstrState::LitPayload { left } => 1 + left,
            InstrState::CopyOffset(_) => 1,
            InstrState::CopyLen { len, .. } => 1 + len.value_lower_bound(),
        }
    }

    /// For a partially read COPY offset: the smallest offset the code can
    /// still decode to, for pruning against the current output length.
    pub(crate) fn pending_copy_offset_lower_bound(&self) -> Option<u64> {
        match self.instr {
            InstrState::CopyOffset(g) => Some(g.value_lower_bound()),
            InstrState::CopyLen { offset, .. } => Some(offset),
            _ => None,
        }
    }

    pub(crate) fn feed(&mut self, bit: bool, out: &mut Vec<bool>, budget: u64) -> Feed {
        match self.instr {
            InstrState::Boundary => {
                self.instr = if bit {
                    InstrState::Opcode1
                } else {
                    InstrState::LitLen(GammaRead::new())
                };
                Feed::Continue
            }
            InstrState::Opcode1 => {
                if bit {
                    self.instr = InstrState::Boundary;
                    self.steps = self.steps.saturating_add(1);
                    if self.steps > budget {
                        Feed::OverBudget
                    } else {
                        Feed::Halted
                    }
                } else {
                    self.instr = InstrState::CopyOffset(GammaRead::new());
                    Feed::Continue
                }
            }
            InstrState::LitLen(mut g) => {
                match g.feed(bit) {
                    Some(len) => {
                        self.lit_total = len;
                        self.instr = InstrState::LitPayload { left: len };
                    }
                    None => self.instr = InstrState::LitLen(g),
                }
                Feed::Continue
            }
            InstrState::LitPayload { left } => {
                out.push(bit);
                if left == 1 {
                    self.instr = InstrState::Boundary;
                    self.steps = self.steps.saturating_add(1 + self.lit_total);
                    if self.steps > budget {
                        return Feed::OverBudget;
                    }
                } else {
                    self.instr = InstrState::LitPayload { left: left - 1 };
                }
                Feed::Continue
            }
            InstrState::CopyOffset(mut g) => {
                match g.feed(bit) {
                    Some(offset) => {
                        self.instr = InstrState::CopyLen {
                            offset,
                            len: GammaRead::new(),
                        };
                    }
                    None => self.instr = InstrState::CopyOffset(g),
                }
                Feed::Continue
            }
            InstrState::CopyLen { offset, mut len } => {
                match len.feed(bit) {
                    Some(l) => {
                        if offset > out.len() as u64 {
                            return Feed::Dead(ParseErrorKind::CopyOutOfRange);
                        }
                        self.steps = self.steps.saturating_add(1 + l);
                        if self.steps > budget {
                            return Feed::OverBudget;
                        }
                        let start = out.len() - offset as usize;
                        for i in 0..l as usize {
                            let b = out[start + i];
                            out.push(b);
                        }
                        self.instr = InstrState::Boundary;
                    }
                    None => self.instr = InstrState::CopyLen { offset, len },
                }
                Feed::Continue
            }
        }
    }
}

/// Run program `p` under a step budget. Pure: the outcome is a function of
/// `(p, budget)` alone.
pub fn parse_run(p: &BitString, budget: u64) -> RunOutcome {
    let mut m = Machine::new();
    let mut out = Vec::new();
    for (i, bit) in p.iter().enumerate() {
        match m.feed(bit, &mut out, budget) {
            Feed::Continue => {}
            Feed::OverBudget => return RunOutcome::NonHalting,
            Feed::Dead(kind) => return RunOutcome::ParseError(kind),
            Feed::Halted => {
                if i + 1 == p.len() {
                    return RunOutcome::Halted(RunResult {
                        output: BitString::from_bits(out).expect("output within cap"),
                        steps: m.steps(),
                        consumed: p.len(),
                    });
                }
                return RunOutcome::ParseError(ParseErrorKind::TrailingBits);
            }
        }
    }
    RunOutcome::ParseError(ParseErrorKind::TruncatedCode)
}

/// Depth-first enumeration of every halting program of length `<= max_len`
/// under `budget`, each visited exactly once, in lexicographic order.
/// Prunes at prefixes that no extension can rescue: completed parse errors,
/// exhausted budgets, and gamma codes whose value bounds already violate
/// the budget or the copy range. Returns the number of tree nodes visited.
pub fn enumerate_programs<F>(max_len: usize, budget: u64, mut visit: F) -> u64
where
    F: FnMut(&BitString, &BitString, u64),
{
    struct Dfs<'f, F> {
        max_len: usize,
        budget: u64,
        bits: Vec<bool>,
        out: Vec<bool>,
        nodes: u64,
        visit: &'f mut F,
    }

    impl<F: FnMut(&BitString, &BitString, u64)> Dfs<'_, F> {
        fn go(&mut self, m: Machine) {
            if self.bits.len() >= self.max_len {
                return;
            }
            // No completion is possible if even the cheapest next
            // instruction busts the budget.
            if m.steps().saturating_add(m.pending_cost_lower_bound()) > self.budget {
                return;
            }
            if let Some(off) = m.pending_copy_offset_lower_bound() {
                if off > self.out.len() as u64 {
                    return;
                }
            }
            for bit in [false, true] {
                let mut child = m;
                let out_len = self.out.len();
                self.bits.push(bit);
                self.nodes += 1;
                match child.feed(bit, &mut self.out, self.budget) {
                    Feed::Continue => self.go(child),
                    Feed::Halted => {
                        let program = BitString::from_bits(self.bits.iter().copied())
                            .expect("program within cap");
                        let output = BitString::from_bits(self.out.iter().copied())
                            .expect("output within cap");
                        (self.visit)(&program, &output, child.steps());
                    }
                    Feed::Dead(_) | Feed::OverBudget => {}
                }
                self.bits.pop();
                self.out.truncate(out_len);
            }
        }
    }

    let mut dfs = Dfs {
        max_len,
        budget,
        bits: Vec::with_capacity(max_len),
        out: Vec::new(),
        nodes: 0,
        visit: &mut visit,
    };
    dfs.go(Machine::new());
    dfs.nodes
}

/// Convenience wrapper collecting the enumeration into a vector.
pub fn collect_programs(max_len: usize, budget: u64) -> Vec<(Program, BitString)> {
    let mut acc = Vec::new();
    enumerate_programs(max_len, budget, |p, w, _| {
        acc.push((Program(p.clone()), w.clone()));
    });
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        BitString::from_str01(s).unwrap()
    }

    #[test]
    fn halt_only_program() {
        match parse_run(&bs("11"), 8) {
            RunOutcome::Halted(r) => {
                assert!(r.output.is_empty());
                assert_eq!(r.consumed, 2);
                assert_eq!(r.steps, 1);
            }
            other => panic!("expected halt, got {other:?}"),
        }
    }

    #[test]
    fn literal_then_halt() {
        // 0 | gamma(1)=1 | payload "1" | 11
        match parse_run(&bs("01111"), 8) {
            RunOutcome::Halted(r) => {
                assert_eq!(r.output, bs("1"));
                assert_eq!(r.consumed, 5);
                assert_eq!(r.steps, 3);
            }
            other => panic!("expected halt, got {other:?}"),
        }
    }

    #[test]
    fn truncation_inside_halt() {
        assert_eq!(
            parse_run(&bs("0111"), 8),
            RunOutcome::ParseError(ParseErrorKind::TruncatedCode)
        );
    }

    #[test]
    fn trailing_bits_after_halt() {
        assert_eq!(
            parse_run(&bs("1111"), 8),
            RunOutcome::ParseError(ParseErrorKind::TrailingBits)
        );
    }

    #[test]
    fn copy_before_output_is_out_of_range() {
        // 10 | gamma(1) offset | gamma(1) length: copies with empty output.
        assert_eq!(
            parse_run(&bs("1011"), 8),
            RunOutcome::ParseError(ParseErrorKind::CopyOutOfRange)
        );
    }

    #[test]
    fn copy_overlapping_repeats() {
        // LITERAL "1", then COPY offset 1 length 3 -> "1111", HALT.
        // 0 1 1 | 10 1 011 | 11
        match parse_run(&bs("01110101111"), 32) {
            RunOutcome::Halted(r) => {
                assert_eq!(r.output, bs("1111"));
                assert_eq!(r.steps, 2 + 4 + 1);
            }
            other => panic!("expected halt, got {other:?}"),
        }
    }

    #[test]
    fn budget_exhaustion_is_non_halting() {
        assert_eq!(parse_run(&bs("01111"), 2), RunOutcome::NonHalting);
    }

    #[test]
    fn enumerate_len2_only_halt() {
        let progs = collect_programs(2, 8);
        assert_eq!(progs.len(), 1);
        assert_eq!(progs[0].0.bits(), &bs("11"));
        assert!(progs[0].1.is_empty());
    }

    #[test]
    fn enumerate_len4_still_only_halt() {
        // The shortest LITERAL program needs five bits.
        let progs = collect_programs(4, 8);
        assert_eq!(progs.len(), 1);
        assert_eq!(progs[0].0.bits(), &bs("11"));
    }

    #[test]
    fn enumerate_len5_adds_two_literals() {
        let progs = collect_programs(5, 8);
        let set: Vec<(String, String)> = progs
            .iter()
            .map(|(p, w)| (p.bits().to_string(), w.to_string()))
            .collect();
        assert_eq!(
            set,
            vec![
                ("01011".to_string(), "0".to_string()),
                ("01111".to_string(), "1".to_string()),
                ("11".to_string(), String::new()),
            ]
        );
    }

    #[test]
    fn enumerate_matches_brute_force_small() {
        // Oracle: test all bit strings of length <= 12 directly.
        for (max_len, budget) in [(8usize, 16u64), (10, 32), (12, 64)] {
            let mut expected = Vec::new();
            for len in 0..=max_len {
                for code in 0u64..(1 << len) {
                    let bits =
                        BitString::from_bits((0..len).map(|i| code & (1 << (len - 1 - i)) != 0))
                            .unwrap();
                    if let RunOutcome::Halted(r) = parse_run(&bits, budget) {
                        expected.push((bits, r.output));
                    }
                }
            }
            expected.sort();
            let mut got: Vec<(BitString, BitString)> = collect_programs(max_len, budget)
                .into_iter()
                .map(|(p, w)| (p.bits().clone(), w))
                .collect();
            got.sort();
            assert_eq!(got, expected, "mismatch at max_len={max_len}");
        }
    }

    #[test]
    fn tight_budget_prunes_literal_programs() {
        let progs = collect_programs(5, 2);
        assert_eq!(progs.len(), 1, "only HALT fits in 2 steps");
    }

    #[test]
    fn halting_programs_are_prefix_free_small() {
        let progs = collect_programs(12, 64);
        for (i, (a, _)) in progs.iter().enumerate() {
            for (b, _) in progs.iter().skip(i + 1) {
                assert!(!a.bits().is_prefix_of(b.bits()));
                assert!(!b.bits().is_prefix_of(a.bits()));
            }
        }
    }

    proptest! {
        #[test]
        fn parse_run_is_pure(bits in proptest::collection::vec(any::<bool>(), 0..40), budget in 1u64..200) {
            let p = BitString::from_bits(bits).unwrap();
            prop_assert_eq!(parse_run(&p, budget), parse_run(&p, budget));
        }
    }
}
