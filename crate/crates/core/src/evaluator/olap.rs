//! Synthetic OLAP exploration log: a seeded random walk over one grouping
//! dimension, an optional aggregate and two equality filters on `ontime`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DIMENSIONS: [&str; 4] = ["DestState", "OriginState", "Carrier", "Year"];
pub const AGGREGATES: [&str; 4] = ["COUNT(Delay)", "SUM(Delay)", "AVG(Delay)", "MAX(Distance)"];
pub const MONTHS: std::ops::RangeInclusive<u32> = 7..=10;
pub const DAYS: std::ops::RangeInclusive<u32> = 1..=5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Seed,
    AddAggregate,
    RemoveAggregate,
    ModifyDimension,
    ModifyFilter,
}

impl Step {
    /// Leaf δs the step produces between consecutive queries.
    pub fn leaf_count(self) -> usize {
        match self {
            Step::Seed => 0,
            // SELECT and GROUP BY both name the dimension
            Step::ModifyDimension => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct State {
    dim: usize,
    agg: Option<usize>,
    month: u32,
    day: u32,
}

impl State {
    fn sql(&self) -> String {
        let dim = DIMENSIONS[self.dim];
        let agg = self.agg.map(|a| format!(", {}", AGGREGATES[a])).unwrap_or_default();
        format!(
            "SELECT {dim}{agg} FROM ontime WHERE Month = {} AND Day = {} GROUP BY {dim}",
            self.month, self.day
        )
    }
}

fn other<R: Rng>(rng: &mut R, n: usize, current: usize) -> usize {
    let k = rng.gen_range(0..n - 1);
    if k >= current {
        k + 1
    } else {
        k
    }
}

fn other_in<R: Rng>(rng: &mut R, range: std::ops::RangeInclusive<u32>, current: u32) -> u32 {
    let lo = *range.start();
    lo + other(rng, (range.end() - lo + 1) as usize, (current - lo) as usize) as u32
}

/// `n` queries with the step that produced each.
pub fn gen_olap_walk(n: usize, seed: u64) -> Vec<(String, Step)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = State { dim: 0, agg: Some(0), month: 9, day: 3 };
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push((s.sql(), Step::Seed));
    while out.len() < n {
        let step = match [0, 1, 2].choose(&mut rng).copied().unwrap_or(0) {
            0 => match s.agg {
                None => {
                    s.agg = Some(rng.gen_range(0..AGGREGATES.len()));
                    Step::AddAggregate
                }
                Some(_) => {
                    s.agg = None;
                    Step::RemoveAggregate
                }
            },
            1 => {
                s.dim = other(&mut rng, DIMENSIONS.len(), s.dim);
                Step::ModifyDimension
            }
            _ => {
                if rng.gen_bool(0.5) {
                    s.month = other_in(&mut rng, MONTHS, s.month);
                } else {
                    s.day = other_in(&mut rng, DAYS, s.day);
                }
                Step::ModifyFilter
            }
        };
        out.push((s.sql(), step));
    }
    out
}

/// Deterministic per seed.
pub fn gen_olap_log(n: usize, seed: u64) -> Vec<String> {
    gen_olap_walk(n, seed).into_iter().map(|(q, _)| q).collect()
}
