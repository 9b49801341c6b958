//! Circuit truth table (CTT) and degree table (DT).
//!
//! The CTT stacks the local truth table of every gate over the `n + m`
//! variable columns. Rows are tombstoned rather than removed, so a row id
//! stays valid for the lifetime of the table. The DT keeps, per gate, the set
//! of live row ids of its block; the degree of a gate is the size of that set.
//!
//! All mutations go through [`Tables::assign_value`] and are recorded on an
//! undo trail, which is what [`Snapshot`] and [`Tables::restore`] rewind.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::circuit::{Assignment, Circuit, Var};

/// One line of one gate's truth table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CttRow {
    /// Global 1-based row number.
    pub row_id: u32,
    /// Owning gate id.
    pub owner: u32,
    /// The gate's operands and output, in column order.
    pub cells: Vec<(Var, bool)>,
}

impl CttRow {
    pub fn value(&self, v: Var) -> Option<bool> {
        self.cells.iter().find(|(w, _)| *w == v).map(|&(_, b)| b)
    }
}

#[derive(Clone, Debug)]
pub struct Ctt {
    n: usize,
    m: usize,
    rows: Vec<CttRow>,
    live: Vec<bool>,
    /// `(first row index, row count)` per gate, indexed by `j - 1`.
    blocks: Vec<(u32, u8)>,
    /// Per column: every `(row index, bit)` where the column is valued.
    occurrences: Vec<Vec<(u32, bool)>>,
}

impl Ctt {
    fn build(c: &Circuit) -> Ctt {
        let n = c.n();
        let m = c.m();
        let mut rows = Vec::with_capacity(4 * m);
        let mut blocks = Vec::with_capacity(m);
        let mut occurrences = vec![Vec::new(); n + m];
        for g in c.gates() {
            let ins = g.sorted_inputs();
            let arity = ins.len();
            let start = rows.len() as u32;
            for pattern in 0..(1u32 << arity) {
                // first operand (in column order) is the most significant bit
                let bits: Vec<bool> = (0..arity)
                    .map(|k| pattern >> (arity - 1 - k) & 1 == 1)
                    .collect();
                let value = |v: Var| bits[ins.iter().position(|&w| w == v).unwrap()];
                let a = value(g.inputs[0]);
                let b = g.inputs.get(1).is_some_and(|&v| value(v));
                let mut cells: Vec<(Var, bool)> =
                    ins.iter().copied().zip(bits.iter().copied()).collect();
                cells.push((g.output(), g.kind.apply(a, b)));
                let idx = rows.len() as u32;
                for &(v, bit) in &cells {
                    occurrences[v.column(n)].push((idx, bit));
                }
                rows.push(CttRow {
                    row_id: idx + 1,
                    owner: g.id,
                    cells,
                });
            }
            blocks.push((start, (1u8 << arity)));
        }
        let live = vec![true; rows.len()];
        Ctt {
            n,
            m,
            rows,
            live,
            blocks,
            occurrences,
        }
    }

    /// Number of columns, `n + m`.
    pub fn columns(&self) -> usize {
        self.n + self.m
    }

    pub fn rows(&self) -> &[CttRow] {
        &self.rows
    }

    /// Row by 1-based id.
    pub fn row(&self, row_id: u32) -> &CttRow {
        &self.rows[row_id as usize - 1]
    }

    pub fn is_live(&self, row_id: u32) -> bool {
        self.live[row_id as usize - 1]
    }

    pub fn live_row_ids(&self) -> Vec<u32> {
        (1..=self.rows.len() as u32)
            .filter(|&r| self.is_live(r))
            .collect()
    }

    /// Row ids of gate `j`'s block, live or not.
    pub fn block(&self, j: u32) -> std::ops::RangeInclusive<u32> {
        let (start, len) = self.blocks[j as usize - 1];
        start + 1..=start + len as u32
    }

    /// `(row_id, bit)` for every row that values `v`.
    pub fn occurrences(&self, v: Var) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.occurrences[v.column(self.n)]
            .iter()
            .map(|&(r, b)| (r + 1, b))
    }
}

/// Per gate: the set of live rows of its block, stored as a bitmask over the
/// block (bit `k` is row `start + k`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeTable {
    masks: Vec<u8>,
    starts: Vec<u32>,
}

impl DegreeTable {
    pub fn degree(&self, j: u32) -> u8 {
        self.masks[j as usize - 1].count_ones() as u8
    }

    /// Live row ids of gate `j`, ascending.
    pub fn live_rows(&self, j: u32) -> Vec<u32> {
        let mask = self.masks[j as usize - 1];
        let start = self.starts[j as usize - 1];
        (0..4)
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| start + k + 1)
            .collect()
    }

    pub fn gates(&self) -> usize {
        self.masks.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeletionReport {
    /// Row ids that went from live to dead, in deletion order.
    pub deleted: Vec<u32>,
    /// Gates whose degree changed, in order of first change.
    pub changed: Vec<u32>,
}

impl DeletionReport {
    pub fn is_empty(&self) -> bool {
        self.deleted.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("{var} is already assigned {current}")]
    ConflictingAssignment { var: Var, current: u8 },
    #[error("gate G{gate} reached degree 0")]
    ContradictionReached { gate: u32, report: DeletionReport },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SnapshotError {
    #[error("snapshot belongs to different tables")]
    Foreign,
    #[error("snapshot is newer than the current state")]
    Stale,
}

#[derive(Clone, Copy, Debug)]
enum Undo {
    Deleted(u32),
    Assigned(u32),
}

/// Restore point for [`Tables::restore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Snapshot {
    owner: u64,
    trail_len: usize,
}

static NEXT_TABLE_ID: AtomicU64 = AtomicU64::new(1);

/// The CTT and DT of one circuit plus the current partial assignment.
#[derive(Debug)]
pub struct Tables {
    id: u64,
    ctt: Ctt,
    dt: DegreeTable,
    assignment: Assignment,
    unassigned_inputs: usize,
    /// Gate ids by current degree (index = degree).
    by_degree: [BTreeSet<u32>; 5],
    trail: Vec<Undo>,
    deletions: u64,
}

impl Clone for Tables {
    fn clone(&self) -> Self {
        Tables {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            ctt: self.ctt.clone(),
            dt: self.dt.clone(),
            assignment: self.assignment.clone(),
            unassigned_inputs: self.unassigned_inputs,
            by_degree: self.by_degree.clone(),
            trail: self.trail.clone(),
            deletions: self.deletions,
        }
    }
}

pub fn build_tables(c: &Circuit) -> Tables {
    Tables::new(c)
}

impl Tables {
    pub fn new(c: &Circuit) -> Tables {
        let ctt = Ctt::build(c);
        let masks = ctt
            .blocks
            .iter()
            .map(|&(_, len)| ((1u16 << len) - 1) as u8)
            .collect();
        let starts = ctt.blocks.iter().map(|&(s, _)| s).collect();
        let dt = DegreeTable { masks, starts };
        let mut by_degree: [BTreeSet<u32>; 5] = Default::default();
        for g in c.gates() {
            by_degree[dt.degree(g.id) as usize].insert(g.id);
        }
        Tables {
            id: NEXT_TABLE_ID.fetch_add(1, Ordering::Relaxed),
            ctt,
            dt,
            assignment: Assignment::new(c.n(), c.m()),
            unassigned_inputs: c.n(),
            by_degree,
            trail: Vec::new(),
            deletions: 0,
        }
    }

    pub fn ctt(&self) -> &Ctt {
        &self.ctt
    }

    pub fn degree_table(&self) -> &DegreeTable {
        &self.dt
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn n(&self) -> usize {
        self.ctt.n
    }

    pub fn m(&self) -> usize {
        self.ctt.m
    }

    pub fn degree(&self, j: u32) -> u8 {
        self.dt.degree(j)
    }

    pub fn value(&self, v: Var) -> Option<bool> {
        self.assignment.get(v)
    }

    pub fn unassigned_inputs(&self) -> usize {
        self.unassigned_inputs
    }

    /// Gates whose degree is currently `d`, ascending.
    pub fn gates_with_degree(&self, d: u8) -> impl Iterator<Item = u32> + '_ {
        self.by_degree[d as usize].iter().copied()
    }

    /// Variables of gate `j` (operands then output, column order).
    pub fn gate_vars(&self, j: u32) -> &[(Var, bool)] {
        let first = *self.ctt.block(j).start();
        &self.ctt.row(first).cells
    }

    /// Rows deleted since construction, including ones later restored.
    pub fn total_deletions(&self) -> u64 {
        self.deletions
    }

    pub fn dead_rows(&self) -> usize {
        self.ctt.live.iter().filter(|l| !**l).count()
    }

    /// Fixes `v := b` and deletes every live row carrying the opposite bit.
    pub fn assign_value(&mut self, v: Var, b: bool) -> Result<DeletionReport, TableError> {
        let col = v.column(self.n());
        match self.assignment.get(v) {
            Some(cur) if cur == b => return Ok(DeletionReport::default()),
            Some(cur) => {
                return Err(TableError::ConflictingAssignment {
                    var: v,
                    current: cur as u8,
                })
            }
            None => {}
        }
        self.assignment.set(v, b);
        self.trail.push(Undo::Assigned(col as u32));
        if v.is_input() {
            self.unassigned_inputs -= 1;
        }
        let mut report = DeletionReport::default();
        let mut emptied = None;
        for k in 0..self.ctt.occurrences[col].len() {
            let (r, bit) = self.ctt.occurrences[col][k];
            if bit != b && self.ctt.live[r as usize] {
                let owner = self.kill(r);
                report.deleted.push(r + 1);
                if !report.changed.contains(&owner) {
                    report.changed.push(owner);
                }
                if emptied.is_none() && self.dt.degree(owner) == 0 {
                    emptied = Some(owner);
                }
            }
        }
        self.debug_check();
        match emptied {
            Some(gate) => Err(TableError::ContradictionReached { gate, report }),
            None => Ok(report),
        }
    }

    fn kill(&mut self, r: u32) -> u32 {
        let owner = self.ctt.rows[r as usize].owner;
        self.ctt.live[r as usize] = false;
        self.set_mask_bit(owner, r, false);
        self.trail.push(Undo::Deleted(r));
        self.deletions += 1;
        owner
    }

    fn set_mask_bit(&mut self, owner: u32, r: u32, on: bool) {
        let g = owner as usize - 1;
        let before = self.dt.masks[g].count_ones() as usize;
        let bit = 1u8 << (r - self.dt.starts[g]);
        if on {
            self.dt.masks[g] |= bit;
        } else {
            self.dt.masks[g] &= !bit;
        }
        let after = self.dt.masks[g].count_ones() as usize;
        self.by_degree[before].remove(&owner);
        self.by_degree[after].insert(owner);
    }

    pub fn take_snapshot(&self) -> Snapshot {
        Snapshot {
            owner: self.id,
            trail_len: self.trail.len(),
        }
    }

    /// Rewinds every deletion and assignment made after `s` was taken.
    pub fn restore(&mut self, s: Snapshot) -> Result<(), SnapshotError> {
        if s.owner != self.id {
            return Err(SnapshotError::Foreign);
        }
        if s.trail_len > self.trail.len() {
            return Err(SnapshotError::Stale);
        }
        while self.trail.len() > s.trail_len {
            match self.trail.pop().unwrap() {
                Undo::Deleted(r) => {
                    let owner = self.ctt.rows[r as usize].owner;
                    self.ctt.live[r as usize] = true;
                    self.set_mask_bit(owner, r, true);
                }
                Undo::Assigned(col) => {
                    let v = Var::from_column(col as usize, self.n());
                    self.assignment.clear(v);
                    if v.is_input() {
                        self.unassigned_inputs += 1;
                    }
                }
            }
        }
        self.debug_check();
        Ok(())
    }

    /// Verifies that the DT, the live flags and the degree buckets agree.
    pub fn check_coherence(&self) -> Result<(), String> {
        for j in 1..=self.m() as u32 {
            let live: Vec<u32> = self.ctt.block(j).filter(|&r| self.ctt.is_live(r)).collect();
            if live != self.dt.live_rows(j) {
                return Err(format!(
                    "G{j}: DT {:?} vs CTT {:?}",
                    self.dt.live_rows(j),
                    live
                ));
            }
            if !self.by_degree[live.len()].contains(&j) {
                return Err(format!("G{j}: degree bucket out of date"));
            }
        }
        let buckets: usize = self.by_degree.iter().map(|b| b.len()).sum();
        if buckets != self.m() {
            return Err("degree buckets hold stale entries".into());
        }
        for (r, row) in self.ctt.rows.iter().enumerate() {
            if !self.ctt.live[r] {
                continue;
            }
            for &(v, bit) in &row.cells {
                if self.assignment.get(v).is_some_and(|b| b != bit) {
                    return Err(format!("row {} is live but contradicts {v}", r + 1));
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        if self.ctt.rows.len() <= 512 {
            if let Err(e) = self.check_coherence() {
                panic!("table incoherence: {e}");
            }
        }
    }

    /// `row <id> G<j> <var>=<bit> ...` for every live row, then
    /// `deg G<j> = {ids}` for every gate.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (r, row) in self.ctt.rows.iter().enumerate() {
            if !self.ctt.live[r] {
                continue;
            }
            write!(out, "row {} G{}", row.row_id, row.owner).unwrap();
            for (v, b) in &row.cells {
                write!(out, " {v}={}", *b as u8).unwrap();
            }
            out.push('\n');
        }
        for j in 1..=self.m() as u32 {
            let ids: Vec<String> = self.dt.live_rows(j).iter().map(|r| r.to_string()).collect();
            writeln!(out, "deg G{j} = {{{}}}", ids.join(",")).unwrap();
        }
        out
    }
}

pub fn dump_tables(t: &Tables) -> String {
    t.dump()
}
