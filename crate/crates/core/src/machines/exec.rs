use alloc::vec;
use alloc::vec::Vec;

use super::{Machine, Move, Next};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MachineOutcome {
    pub halted: bool,
    pub steps: u64,
    /// Ones on the tape at halt; zero for runs that hit the budget.
    pub score: u64,
}

/// Two-way infinite binary tape backed by a growable window.
struct Tape {
    cells: Vec<u8>,
    /// Index in `cells` of tape cell 0.
    origin: usize,
}

impl Tape {
    fn new(input: &[bool]) -> Tape {
        let len = (2 * input.len()).max(64);
        let origin = len / 4;
        let mut cells = vec![0u8; len];
        for (i, &b) in input.iter().enumerate() {
            cells[origin + i] = b as u8;
        }
        Tape { cells, origin }
    }

    /// Makes `pos` addressable and returns its index.
    #[inline]
    fn index(&mut self, pos: i64) -> usize {
        let idx = self.origin as i64 + pos;
        if idx < 0 {
            let grow = self.cells.len().max((-idx) as usize);
            let mut cells = vec![0u8; grow];
            cells.extend_from_slice(&self.cells);
            self.cells = cells;
            self.origin += grow;
            return (self.origin as i64 + pos) as usize;
        }
        let idx = idx as usize;
        if idx >= self.cells.len() {
            let new_len = (2 * self.cells.len()).max(idx + 1);
            self.cells.resize(new_len, 0);
        }
        idx
    }

    fn ones(&self) -> u64 {
        self.cells.iter().map(|&c| c as u64).sum()
    }
}

/// Runs `machine` from state 0 with the head on cell 0 of a blank tape
/// holding `input` at cells `0..input.len()`, for at most `t_max` steps.
/// A halting transition still writes and moves, and counts as a step.
pub fn run(machine: &Machine, input: &[bool], t_max: u64) -> MachineOutcome {
    let mut tape = Tape::new(input);
    let mut head: i64 = 0;
    let mut state = 0usize;
    for step in 1..=t_max {
        let idx = tape.index(head);
        let e = machine.entry(state, tape.cells[idx] == 1);
        tape.cells[idx] = e.write as u8;
        head += match e.movement {
            Move::Left => -1,
            Move::Right => 1,
        };
        match e.next {
            Next::Halt => {
                return MachineOutcome {
                    halted: true,
                    steps: step,
                    score: tape.ones(),
                }
            }
            Next::State(s) => state = s as usize,
        }
    }
    MachineOutcome {
        halted: false,
        steps: t_max,
        score: 0,
    }
}

/// A node's integer output: its busy-beaver score, or 0 if it did not halt.
pub fn fitness(outcome: &MachineOutcome) -> u64 {
    if outcome.halted {
        outcome.score
    } else {
        0
    }
}
