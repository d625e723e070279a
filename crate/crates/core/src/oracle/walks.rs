//! Exhaustive counting of valid walk tuples.
//!
//! A tuple of `2t` walks of length `k`, all starting at `u`, is valid when
//! every undirected edge used by the tuple (counted with multiplicity over
//! all `2tk` steps) appears at least twice. Walks range over the complete
//! graph on `n` vertices; a step may stay in place, which uses the loop
//! edge `{a, a}`, unless loops are excluded.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const MAX_TUPLES: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCountTable {
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub u: usize,
    pub self_loops: bool,
    /// `counts[l]` is the number of valid tuples with exactly `l` distinct
    /// edges, for `l = 0..=2tk`.
    pub counts: Vec<u64>,
    /// Closed-form upper bound for each `l`.
    pub bounds: Vec<u128>,
}

impl WalkCountTable {
    pub fn slots(&self) -> usize {
        2 * self.t * self.k
    }

    pub fn total_valid(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Values of `l` whose count exceeds the bound.
    pub fn violations(&self) -> Vec<usize> {
        (0..self.counts.len())
            .filter(|&l| u128::from(self.counts[l]) > self.bounds[l])
            .collect()
    }

    /// Values of `l > tk` with a nonzero count.
    pub fn pigeonhole_violations(&self) -> Vec<usize> {
        (self.t * self.k + 1..self.counts.len())
            .filter(|&l| self.counts[l] != 0)
            .collect()
    }

    /// `ell,count,bound` with one row per `l` in `1..=2tk`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["ell", "count", "bound"])?;
        for l in 1..self.counts.len() {
            w.write_record([
                l.to_string(),
                self.counts[l].to_string(),
                self.bounds[l].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<walk table>", e))?;
        Ok(())
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn double_factorial_odd(m: u128) -> u128 {
    // (2l - 1)!! with (-1)!! = 1
    (1..=m).step_by(2).product()
}

/// `C(2tk, 2l) * (2l - 1)!! * l^(2tk - 2l) * n^l`.
pub fn path_count_bound(n: usize, k: usize, t: usize, ell: usize) -> Option<u128> {
    let slots = (2 * t * k) as u128;
    let l = ell as u128;
    if 2 * l > slots {
        return Some(0);
    }
    let pairings = if l == 0 {
        1
    } else {
        double_factorial_odd(2 * l - 1)
    };
    binomial(slots, 2 * l)
        .checked_mul(pairings)?
        .checked_mul(l.checked_pow((slots - 2 * l) as u32)?)?
        .checked_mul((n as u128).checked_pow(ell as u32)?)
}

struct Enumerator<'a> {
    walks: &'a [Vec<usize>],
    depth: usize,
    counts: Vec<u32>,
    distinct: usize,
    singles: usize,
    table: Vec<u64>,
}

impl Enumerator<'_> {
    fn push(&mut self, walk: usize) {
        for &e in &self.walks[walk] {
            match self.counts[e] {
                0 => {
                    self.distinct += 1;
                    self.singles += 1;
                }
                1 => self.singles -= 1,
                _ => {}
            }
            self.counts[e] += 1;
        }
    }

    fn pop(&mut self, walk: usize) {
        for &e in &self.walks[walk] {
            self.counts[e] -= 1;
            match self.counts[e] {
                0 => {
                    self.distinct -= 1;
                    self.singles -= 1;
                }
                1 => self.singles += 1,
                _ => {}
            }
        }
    }

    fn recurse(&mut self, level: usize) {
        if level == self.depth {
            if self.singles == 0 {
                self.table[self.distinct] += 1;
            }
            return;
        }
        for w in 0..self.walks.len() {
            self.push(w);
            self.recurse(level + 1);
            self.pop(w);
        }
    }
}

fn all_walks(n: usize, k: usize, u: usize, self_loops: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![u];
    fn extend(n: usize, k: usize, loops: bool, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if path.len() == k + 1 {
            let edges = path
                .windows(2)
                .map(|w| w[0].min(w[1]) * n + w[0].max(w[1]))
                .collect();
            out.push(edges);
            return;
        }
        let at = *path.last().unwrap();
        for next in 0..n {
            if next == at && !loops {
                continue;
            }
            path.push(next);
            extend(n, k, loops, path, out);
            path.pop();
        }
    }
    extend(n, k, self_loops, &mut path, &mut out);
    out
}

/// Enumerates every `2t`-tuple of length-`k` walks from `u` and tabulates the
/// valid ones by their number of distinct edges.
pub fn count_valid_walk_tuples(
    n: usize,
    k: usize,
    t: usize,
    u: usize,
    self_loops: bool,
) -> Result<WalkCountTable> {
    if n == 0 || k == 0 || t == 0 {
        return Err(Error::invalid("walk audit needs n, k, t >= 1"));
    }
    if u >= n {
        return Err(Error::invalid(format!(
            "start vertex {u} out of range for n = {n}"
        )));
    }
    let tuples = (n as f64).powi((2 * t * k) as i32);
    if tuples > MAX_TUPLES {
        return Err(Error::SizeGuard(format!(
            "{n}^{} = {tuples:.3e} walk tuples exceeds {MAX_TUPLES:e}",
            2 * t * k
        )));
    }
    let walks = all_walks(n, k, u, self_loops);
    let slots = 2 * t * k;
    let depth = 2 * t;
    let counts = (0..walks.len())
        .into_par_iter()
        .map(|first| {
            let mut en = Enumerator {
                walks: &walks,
                depth,
                counts: vec![0; n * n],
                distinct: 0,
                singles: 0,
                table: vec![0; slots + 1],
            };
            en.push(first);
            en.recurse(1);
            en.table
        })
        .reduce(
            || vec![0; slots + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let bounds = (0..=slots)
        .map(|l| {
            path_count_bound(n, k, t, l)
                .ok_or_else(|| Error::SizeGuard(format!("bound for l = {l} overflows u128")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WalkCountTable {
        n,
        k,
        t,
        u,
        self_loops,
        counts,
        bounds,
    })
}
