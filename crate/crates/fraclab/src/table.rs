//! Resource-bounded complexity tables.
//!
//! A [`ComplexityTable`] materialises, for every output reachable by a
//! halting program of length at most `L` under step budget `T`, the minimal
//! program length and the algorithmic-probability census
//! `sum 2^(-|p|)` over programs producing that output — all in exact
//! rational arithmetic.
//!
//! [`exact_k`] computes the same minimum by dynamic programming instead of
//! enumeration: every program is a sequence of LITERAL and COPY blocks
//! followed by HALT, so shortest programs decompose over output positions.

use crate::bits::{gamma_len, BitString};
use crate::machine::{enumerate_programs, MACHINE_VERSION};
use crate::numeric::pow2_neg;
use num::bigint::BigUint;
use num::rational::BigRational;
use num::traits::Zero;
use std::collections::BTreeMap;
use std::io::{self, BufRead, Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("length bound {0} exceeds the desk-scale cap {MAX_TABLE_LEN}")]
    LengthCap(u32),
    #[error("enumeration budget exceeded after {0} nodes")]
    NodeBudget(u64),
    #[error("table was built by machine {found}, this build is {expected}")]
    VersionMismatch { found: String, expected: String },
    #[error("malformed table file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Hard cap on the enumeration length bound.
pub const MAX_TABLE_LEN: u32 = 26;
/// Hard cap on prefix-tree nodes visited during a build.
pub const MAX_TABLE_NODES: u64 = 2_000_000_000;

const FORMAT_VERSION: u32 = 1;

/// Per-output record: minimal program length and the census histogram
/// (program count per program length, from which the exact census follows).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub min_len: u32,
    counts: BTreeMap<u32, u64>,
}

impl TableEntry {
    /// Exact census `sum_len count(len) * 2^(-len)`.
    pub fn census(&self) -> BigRational {
        self.counts
            .iter()
            .map(|(&len, &cnt)| pow2_neg(len) * BigRational::from_integer(cnt.into()))
            .sum()
    }

    /// Census restricted to programs of length `<= cap` (staged view).
    pub fn census_up_to(&self, cap: u32) -> BigRational {
        self.counts
            .iter()
            .take_while(|(&len, _)| len <= cap)
            .map(|(&len, &cnt)| pow2_neg(len) * BigRational::from_integer(cnt.into()))
            .sum()
    }

    pub fn program_counts(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.counts.iter().map(|(&l, &c)| (l, c))
    }
}

/// Immutable census of all halting programs at a resource bound, keyed by
/// output string. Safe for concurrent read once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityTable {
    l_max: u32,
    budget: u64,
    machine: String,
    entries: BTreeMap<BitString, TableEntry>,
}

impl ComplexityTable {
    /// Enumerate every halting program of length `<= l_max` under `budget`
    /// and tally minimal lengths and censuses.
    pub fn build(l_max: u32, budget: u64) -> Result<Self, TableError> {
        if l_max > MAX_TABLE_LEN {
            return Err(TableError::LengthCap(l_max));
        }
        let mut entries: BTreeMap<BitString, TableEntry> = BTreeMap::new();
        let nodes = enumerate_programs(l_max as usize, budget, |p, w, _| {
            let e = entries.entry(w.clone()).or_insert_with(|| TableEntry {
                min_len: u32::MAX,
                counts: BTreeMap::new(),
            });
            let plen = p.len() as u32;
            e.min_len = e.min_len.min(plen);
            *e.counts.entry(plen).or_insert(0) += 1;
        });
        if nodes > MAX_TABLE_NODES {
            return Err(TableError::NodeBudget(nodes));
        }
        Ok(ComplexityTable {
            l_max,
            budget,
            machine: MACHINE_VERSION.to_string(),
            entries,
        })
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn machine(&self) -> &str {
        &self.machine
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Minimal program length for `w`, if reachable at this bound.
    pub fn min_len(&self, w: &BitString) -> Option<u32> {
        self.entries.get(w).map(|e| e.min_len)
    }

    /// Algorithmic probability of `w`: the exact census, zero if absent.
    pub fn census(&self, w: &BitString) -> BigRational {
        self.entries
            .get(w)
            .map(|e| e.census())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn entry(&self, w: &BitString) -> Option<&TableEntry> {
        self.entries.get(w)
    }

    pub fn outputs(&self) -> impl Iterator<Item = (&BitString, &TableEntry)> {
        self.entries.iter()
    }

    /// Exact Kraft sum over all enumerated programs; at most 1 because the
    /// halting programs form a prefix-free set.
    pub fn kraft_sum(&self) -> BigRational {
        self.entries.values().map(|e| e.census()).sum()
    }

    /// Guard for operations that combine two tables.
    pub fn check_compatible(&self, other: &ComplexityTable) -> Result<(), TableError> {
        if self.machine != other.machine {
            return Err(TableError::VersionMismatch {
                found: other.machine.clone(),
                expected: self.machine.clone(),
            });
        }
        Ok(())
    }

    // ---- persistence -------------------------------------------------

    /// Compact binary layout: an ASCII header line
    /// `fraclab-table <format> <L> <T> <machine>` followed by length-prefixed
    /// records in deterministic (length, lexicographic) output order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), TableError> {
        writeln!(
            w,
            "fraclab-table {FORMAT_VERSION} {} {} {}",
            self.l_max, self.budget, self.machine
        )?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for (output, e) in &self.entries {
            w.write_all(&(output.len() as u32).to_le_bytes())?;
            w.write_all(&output.to_bytes())?;
            w.write_all(&e.min_len.to_le_bytes())?;
            let census = e.census();
            let num = census.numer().to_biguint().expect("census >= 0").to_bytes_be();
            let den = census.denom().to_biguint().expect("census > 0").to_bytes_be();
            w.write_all(&(num.len() as u32).to_le_bytes())?;
            w.write_all(&num)?;
            w.write_all(&(den.len() as u32).to_le_bytes())?;
            w.write_all(&den)?;
            w.write_all(&(e.counts.len() as u32).to_le_bytes())?;
            for (&len, &cnt) in &e.counts {
                w.write_all(&len.to_le_bytes())?;
                w.write_all(&cnt.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: R) -> Result<Self, TableError> {
        let mut r = io::BufReader::new(r);
        let mut header = String::new();
        r.read_line(&mut header)?;
        let parts: Vec<&str> = header.trim_end().split(' ').collect();
        if parts.len() != 5 || parts[0] != "fraclab-table" {
            return Err(TableError::Format("bad header".into()));
        }
        let fmt: u32 = parts[1]
            .parse()
            .map_err(|_| TableError::Format("bad format version".into()))?;
        if fmt != FORMAT_VERSION {
            return Err(TableError::Format(format!("unsupported format {fmt}")));
        }
        let l_max: u32 = parts[2]
            .parse()
            .map_err(|_| TableError::Format("bad length bound".into()))?;
        let budget: u64 = parts[3]
            .parse()
            .map_err(|_| TableError::Format("bad budget".into()))?;
        let machine = parts[4].to_string();
        if machine != MACHINE_VERSION {
            return Err(TableError::VersionMismatch {
                found: machine,
                expected: MACHINE_VERSION.to_string(),
            });
        }

        fn read_exact_n<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>, TableError> {
            let mut buf = vec![0u8; n];
            r.read_exact(&mut buf)?;
            Ok(buf)
        }
        fn read_u32<R: Read>(r: &mut R) -> Result<u32, TableError> {
            Ok(u32::from_le_bytes(read_exact_n(r, 4)?.try_into().unwrap()))
        }
        fn read_u64<R: Read>(r: &mut R) -> Result<u64, TableError> {
            Ok(u64::from_le_bytes(read_exact_n(r, 8)?.try_into().unwrap()))
        }

        let count = read_u64(&mut r)?;
        let mut entries = BTreeMap::new();
        for _ in 0..count {
            let bit_len = read_u32(&mut r)? as usize;
            let bytes = read_exact_n(&mut r, bit_len.div_ceil(8))?;
            let output = BitString::from_bytes(&bytes, bit_len)
                .map_err(|e| TableError::Format(e.to_string()))?;
            let min_len = read_u32(&mut r)?;
            let num_len = read_u32(&mut r)? as usize;
            let num = BigUint::from_bytes_be(&read_exact_n(&mut r, num_len)?);
            let den_len = read_u32(&mut r)? as usize;
            let den = BigUint::from_bytes_be(&read_exact_n(&mut r, den_len)?);
            let hist_len = read_u32(&mut r)?;
            let mut counts = BTreeMap::new();
            for _ in 0..hist_len {
                let len = read_u32(&mut r)?;
                let cnt = read_u64(&mut r)?;
                counts.insert(len, cnt);
            }
            let entry = TableEntry { min_len, counts };
            let stored = BigRational::new(num.into(), den.into());
            if entry.census() != stored {
                return Err(TableError::Format(
                    "census does not match program-length histogram".into(),
                ));
            }
            entries.insert(output, entry);
        }
        Ok(ComplexityTable {
            l_max,
            budget,
            machine,
            entries,
        })
    }

    /// JSON mirror of the binary layout.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(output, e)| {
                let census = e.census();
                serde_json::json!({
                    "output_hex": output.to_hex(),
                    "output_bits": output.len(),
                    "min_len": e.min_len,
                    "census_num": census.numer().to_string(),
                    "census_den": census.denom().to_string(),
                    "census_by_len": e.counts.iter()
                        .map(|(&l, &c)| serde_json::json!([l, c]))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "format": FORMAT_VERSION,
            "l_max": self.l_max,
            "budget": self.budget,
            "machine": self.machine,
            "entries": entries,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, TableError> {
        let bad = |m: &str| TableError::Format(m.to_string());
        let fmt = v["format"].as_u64().ok_or_else(|| bad("missing format"))?;
        if fmt != u64::from(FORMAT_VERSION) {
            return Err(bad("unsupported format"));
        }
        let machine = v["machine"]
            .as_str()
            .ok_or_else(|| bad("missing machine"))?
            .to_string();
        if machine != MACHINE_VERSION {
            return Err(TableError::VersionMismatch {
                found: machine,
                expected: MACHINE_VERSION.to_string(),
            });
        }
        let l_max = v["l_max"].as_u64().ok_or_else(|| bad("missing l_max"))? as u32;
        let budget = v["budget"].as_u64().ok_or_else(|| bad("missing budget"))?;
        let mut entries = BTreeMap::new();
        for item in v["entries"].as_array().ok_or_else(|| bad("missing entries"))? {
            let hex = item["output_hex"].as_str().ok_or_else(|| bad("bad output"))?;
            let bits = item["output_bits"].as_u64().ok_or_else(|| bad("bad output"))? as usize;
            let output =
                BitString::from_hex(hex, bits).map_err(|e| TableError::Format(e.to_string()))?;
            let min_len = item["min_len"].as_u64().ok_or_else(|| bad("bad min_len"))? as u32;
            let mut counts = BTreeMap::new();
            for pair in item["census_by_len"]
                .as_array()
                .ok_or_else(|| bad("bad histogram"))?
            {
                let l = pair[0].as_u64().ok_or_else(|| bad("bad histogram"))? as u32;
                let c = pair[1].as_u64().ok_or_else(|| bad("bad histogram"))?;
                counts.insert(l, c);
            }
            entries.insert(output, TableEntry { min_len, counts });
        }
        Ok(ComplexityTable {
            l_max,
            budget,
            machine,
            entries,
        })
    }
}

/// Exact minimal program length producing `w`, by shortest-path dynamic
/// programming over output positions. Edges are LITERAL blocks
/// (cost `1 + |gamma(l)| + l`) and COPY blocks matching a self-repetition of
/// `w` (cost `2 + |gamma(o)| + |gamma(l)|`); the terminal HALT costs 2.
/// Optimal for the machine because every program is such a block sequence.
pub fn exact_k(w: &BitString) -> u32 {
    let n = w.len();
    if n == 0 {
        return 2;
    }
    let glen: Vec<u64> = (0..=n as u64).map(|m| if m == 0 { 0 } else { gamma_len(m) as u64 }).collect();
    let mut dist = vec![u64::MAX; n + 1];
    dist[0] = 0;
    for i in 0..n {
        if dist[i] == u64::MAX {
            continue;
        }
        // LITERAL block covering w[i..j).
        for j in i + 1..=n {
            let cost = dist[i] + 1 + glen[j - i] + (j - i) as u64;
            if cost < dist[j] {
                dist[j] = cost;
            }
        }
        // COPY blocks: any offset o <= i whose self-match extends.
        for o in 1..=i {
            let head = dist[i] + 2 + glen[o];
            let mut l = 0usize;
            while i + l < n && w.bit(i + l) == w.bit(i + l - o) {
                l += 1;
                let cost = head + glen[l];
                if cost < dist[i + l] {
                    dist[i + l] = cost;
                }
            }
        }
    }
    (dist[n] + 2) as u32
}

/// Provable lower bound on the length of any program whose output has
/// `output_len` bits: a program emitting `N >= 1` bits spends at least
/// `2*floor(log2 N) + 5` bits (each block costs at least `2 + |gamma(l_i)|`,
/// the block lengths sum to `N`, and HALT adds 2). Lets callers skip the
/// full dynamic program when even this bound beats a known minimum.
pub fn min_len_lower_bound(output_len: usize) -> u32 {
    if output_len == 0 {
        return 2;
    }
    2 * (usize::BITS - 1 - output_len.leading_zeros()) + 5
}
