//! Ladder statistics of a coupled path: the alternating zero times of the
//! two walks and the gap ratios between them.
//!
//! Cycle `k` of the pair runs from one lower-walk zero to the next:
//! a shrink phase (lower-walk zeros can pull the gap down) that ends at
//! the first upper-walk zero, then a growth phase that ends at the next
//! lower-walk zero. Writing `T_k` for the lower-walk zero times (`T_0 = 0`),
//! `S_k` for the upper-walk zero times, and `D` for the gap,
//!
//! ```text
//! W_k = D(S_{k-1}) / D(T_{k-1})   in (0, 1],
//! V_k = D(T_k)     / D(S_{k-1})   >= 1,
//! M_k = D(T_k),
//! ```
//!
//! so `M_k = M_{k-1} W_k V_k` holds exactly in lattice units (the product
//! telescopes). Detection works on "walk at the origin" rather than on
//! equality of accumulated local-time values: on the lattice the two are
//! equivalent and the former is exact.
//!
//! Extraction assumes nonnegative skewness, where the lower walk drives
//! the shrink phase; a reflected pair is covered by the sign symmetry of
//! the stepping rule.

use rayon::prelude::*;

use crate::coupled::{CoupledPath, CoupledWalker, SkewParams};
use crate::error::{Error, Result};
use crate::lattice::{derive_stream, LatticeConfig};

/// Ladder times and ratio sequences extracted from one coupled path.
///
/// `t_steps` and `t_gap_units` always align (`t_gap_units[k]` is the gap
/// at `T_k`, i.e. `M_k` in lattice units) and have length
/// `complete_cycles + 1`. `s_steps`/`s_gap_units` may carry one trailing
/// entry beyond the last complete cycle; the corresponding partial cycle
/// is discarded from the ratio sequences, never pooled.
#[derive(Debug, Clone)]
pub struct LadderRecord {
    pub t_steps: Vec<usize>,
    pub s_steps: Vec<usize>,
    pub t_gap_units: Vec<i64>,
    pub s_gap_units: Vec<i64>,
    pub w_values: Vec<f64>,
    pub v_values: Vec<f64>,
    /// `M_0..M_complete_cycles` in physical units.
    pub m_values: Vec<f64>,
    pub complete_cycles: usize,
    pub coalesced: bool,
    pub coalesce_step: Option<usize>,
    /// A shrink or growth phase was underway when extraction stopped.
    pub discarded_partial: bool,
}

enum Seeking {
    UpperZero,
    LowerZero,
}

/// Online ladder extractor: feed it the walker state after every step.
/// Used both by [`extract_ladder`] on stored paths and by the streaming
/// ensemble runner, which never materializes a path.
pub struct LadderExtractor {
    seeking: Seeking,
    t_steps: Vec<usize>,
    s_steps: Vec<usize>,
    t_gap_units: Vec<i64>,
    s_gap_units: Vec<i64>,
    complete_cycles: usize,
    k_max: Option<usize>,
    coalesced: bool,
    coalesce_step: Option<usize>,
    done: bool,
}

impl LadderExtractor {
    /// `y_units` is the initial gap; `k_max` optionally caps the number of
    /// complete cycles extracted (bounding memory on slow paths).
    pub fn new(y_units: i64, k_max: Option<usize>) -> Self {
        LadderExtractor {
            seeking: Seeking::UpperZero,
            t_steps: vec![0],
            s_steps: Vec::new(),
            t_gap_units: vec![y_units],
            s_gap_units: Vec::new(),
            complete_cycles: 0,
            k_max,
            coalesced: false,
            coalesce_step: None,
            done: k_max == Some(0),
        }
    }

    /// True once extraction stopped (coalescence or cycle cap).
    #[inline]
    pub fn done(&self) -> bool {
        self.done
    }

    /// Observe the state after step `n >= 1`.
    #[inline]
    pub fn observe(&mut self, n: usize, lower_at_zero: bool, upper_at_zero: bool, gap_units: i64) {
        if self.done {
            return;
        }
        if gap_units == 0 {
            self.coalesced = true;
            self.coalesce_step = Some(n);
            self.done = true;
            return;
        }
        match self.seeking {
            Seeking::UpperZero => {
                if upper_at_zero {
                    self.s_steps.push(n);
                    self.s_gap_units.push(gap_units);
                    self.seeking = Seeking::LowerZero;
                }
            }
            Seeking::LowerZero => {
                if lower_at_zero {
                    self.t_steps.push(n);
                    self.t_gap_units.push(gap_units);
                    self.complete_cycles += 1;
                    self.seeking = Seeking::UpperZero;
                    if Some(self.complete_cycles) == self.k_max {
                        self.done = true;
                    }
                }
            }
        }
    }

    /// Close the extraction and compute the ratio sequences.
    pub fn finalize(self, h: f64) -> LadderRecord {
        let cycles = self.complete_cycles;
        let mut w_values = Vec::with_capacity(cycles);
        let mut v_values = Vec::with_capacity(cycles);
        for k in 0..cycles {
            w_values.push(self.s_gap_units[k] as f64 / self.t_gap_units[k] as f64);
            v_values.push(self.t_gap_units[k + 1] as f64 / self.s_gap_units[k] as f64);
        }
        let m_values = self.t_gap_units.iter().map(|&d| d as f64 * h).collect();
        // A pending phase counts as discarded work unless the path
        // coalesced (nothing further is defined after a meeting) or the
        // extraction stopped exactly at its cycle cap.
        let at_cap = Some(cycles) == self.k_max;
        let discarded_partial = !self.coalesced && !at_cap;
        LadderRecord {
            t_steps: self.t_steps,
            s_steps: self.s_steps,
            t_gap_units: self.t_gap_units,
            s_gap_units: self.s_gap_units,
            w_values,
            v_values,
            m_values,
            complete_cycles: cycles,
            coalesced: self.coalesced,
            coalesce_step: self.coalesce_step,
            discarded_partial,
        }
    }
}

/// Extract the full ladder of a completed path. Requires `beta >= 0`
/// (reflected pairs are handled by the sign symmetry of the stepping
/// rule, under which the ratio laws depend on `|beta|` only).
pub fn extract_ladder(path: &CoupledPath) -> Result<LadderRecord> {
    extract_ladder_capped(path, None)
}

/// [`extract_ladder`] with a cap on extracted cycles.
pub fn extract_ladder_capped(path: &CoupledPath, k_max: Option<usize>) -> Result<LadderRecord> {
    if path.params().beta() < 0.0 {
        return Err(Error::contract(
            "ladder extraction requires beta >= 0; reflect the pair for negative skewness",
        ));
    }
    let x0 = path.x0_units();
    let xy = path.xy_units();
    let mut ex = LadderExtractor::new(path.params().y_units(), k_max);
    for n in 1..x0.len() {
        if ex.done() {
            break;
        }
        ex.observe(n, x0[n] == 0, xy[n] == 0, xy[n] - x0[n]);
    }
    Ok(ex.finalize(path.config().h()))
}

/// Verify the segment behaviour the ratio laws rely on: the gap is
/// nonincreasing on every `[T_k, S_k]`, nondecreasing on every
/// `[S_k, T_{k+1}]`, and its sup over `[T_k, T_{k+1}]` never exceeds
/// `max(M_k, M_{k+1})`. Redundant for paths produced by the stepping rule;
/// a safety net against extraction bugs.
pub fn check_segment_monotonicity(path: &CoupledPath, ladder: &LadderRecord) -> bool {
    check_segment_monotonicity_units(&path.gap_series_units(), ladder)
}

/// [`check_segment_monotonicity`] on a bare gap series in lattice units.
pub fn check_segment_monotonicity_units(gap_units: &[i64], ladder: &LadderRecord) -> bool {
    let d = gap_units;
    for (k, &s) in ladder.s_steps.iter().enumerate() {
        let t = ladder.t_steps[k];
        if d[t..=s].windows(2).any(|w| w[1] > w[0]) {
            return false;
        }
    }
    for k in 0..ladder.t_steps.len().saturating_sub(1) {
        let (s, t_next) = (ladder.s_steps[k], ladder.t_steps[k + 1]);
        if d[s..=t_next].windows(2).any(|w| w[1] < w[0]) {
            return false;
        }
        let sup = *d[ladder.t_steps[k]..=t_next].iter().max().unwrap();
        if sup > ladder.t_gap_units[k].max(ladder.t_gap_units[k + 1]) {
            return false;
        }
    }
    true
}

/// One pooled ladder observation: cycle `k` of one replicate.
#[derive(Debug, Clone, Copy)]
pub struct LadderSample {
    pub replicate: u64,
    /// Cycle index, starting at 1.
    pub k: usize,
    pub w: f64,
    pub v: f64,
    /// Gap at the cycle's closing lower-walk zero, physical units.
    pub m: f64,
    /// Physical time of the closing lower-walk zero `T_k`.
    pub t_time: f64,
    /// Physical time of the cycle's upper-walk zero `S_{k-1}`.
    pub s_time: f64,
}

/// Pooled ladder samples across replicates, with censoring accounting.
#[derive(Debug, Clone)]
pub struct LadderTable {
    pub rows: Vec<LadderSample>,
    pub n_replicates: u64,
    /// Replicates whose horizon ended before cycle 1 completed.
    pub horizon_before_cycle1: u64,
    /// Replicates that coalesced before cycle 1 completed.
    pub coalesced_before_cycle1: u64,
    /// Replicates that coalesced within the horizon (any cycle count).
    pub coalesced_total: u64,
}

impl LadderTable {
    /// Pool one ratio column at a fixed cycle index.
    pub fn pool_w(&self, k: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.k == k).map(|r| r.w).collect()
    }

    pub fn pool_v(&self, k: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.k == k).map(|r| r.v).collect()
    }

    /// Fraction of replicates with a complete first cycle.
    pub fn cycle1_completion_fraction(&self) -> f64 {
        let missing = self.horizon_before_cycle1 + self.coalesced_before_cycle1;
        (self.n_replicates - missing) as f64 / self.n_replicates as f64
    }
}

/// Run `n_replicates` coupled simulations on per-replicate streams and
/// pool up to `k_max` ladder cycles from each. Streaming: paths are never
/// stored. Deterministic in `(params, config, master_seed, n_replicates,
/// k_max)` and independent of thread count (replicates merge in index
/// order).
pub fn collect_ladder_samples(
    params: &SkewParams,
    config: &LatticeConfig,
    master_seed: u64,
    n_replicates: u64,
    k_max: usize,
) -> Result<LadderTable> {
    if params.beta() < 0.0 {
        return Err(Error::contract(
            "ladder collection requires beta >= 0; reflect the pair for negative skewness",
        ));
    }
    if k_max == 0 {
        return Err(Error::contract("ladder collection requires k_max >= 1"));
    }
    let per_replicate: Vec<(Vec<LadderSample>, LadderRecord)> = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let record = run_one_ladder(params, config, master_seed, r, k_max);
            (ladder_rows(&record, r, config), record)
        })
        .collect();

    let mut table = LadderTable {
        rows: Vec::new(),
        n_replicates,
        horizon_before_cycle1: 0,
        coalesced_before_cycle1: 0,
        coalesced_total: 0,
    };
    for (rows, record) in per_replicate {
        if record.complete_cycles == 0 {
            if record.coalesced {
                table.coalesced_before_cycle1 += 1;
            } else {
                table.horizon_before_cycle1 += 1;
            }
        }
        table.coalesced_total += record.coalesced as u64;
        table.rows.extend(rows);
    }
    Ok(table)
}

fn run_one_ladder(
    params: &SkewParams,
    config: &LatticeConfig,
    master_seed: u64,
    replicate: u64,
    k_max: usize,
) -> LadderRecord {
    let mut stream = derive_stream(master_seed, replicate);
    let mut walker = CoupledWalker::new(params);
    let mut ex = LadderExtractor::new(params.y_units(), Some(k_max));
    while walker.step() < config.max_steps() && !ex.done() {
        walker.advance(stream.next_uniform());
        ex.observe(walker.step(), walker.x0() == 0, walker.xy() == 0, walker.gap_units());
    }
    ex.finalize(config.h())
}

fn ladder_rows(record: &LadderRecord, replicate: u64, config: &LatticeConfig) -> Vec<LadderSample> {
    (0..record.complete_cycles)
        .map(|i| LadderSample {
            replicate,
            k: i + 1,
            w: record.w_values[i],
            v: record.v_values[i],
            m: record.m_values[i + 1],
            t_time: config.time_of(record.t_steps[i + 1]),
            s_time: config.time_of(record.s_steps[i]),
        })
        .collect()
}
