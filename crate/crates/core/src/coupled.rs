//! The coupled pair of skew random walks driven by one uniform stream.
//!
//! Both walks step `±h` each tick. Away from the origin a walk follows the
//! shared driver (`+h` iff `u < 1/2`); at the origin it steps `+h` iff
//! `u < (1+beta)/2`. A "push" is a step where the at-zero rule overrode
//! the driver's sign — the discrete unit of local time. Because the two
//! walks read the same uniform, the gap between them changes only when
//! exactly one of them sits at the origin, it moves in `2h` jumps, and
//! once it hits zero the walks are identical forever (the rule depends
//! only on position). For positive skewness the gap shrinks only at
//! lower-walk zeros and grows only at upper-walk zeros.
//!
//! Positions are integer lattice units (multiples of `h`), kept in `i64`
//! so that the identity `gap = local-time difference` holds with zero
//! rounding error; physical values are produced only at the API surface.
//! Rearranging the walk update, the local-time estimate of a walk is its
//! position minus the driver's running sum, which equals `2h` times the
//! signed push count.

use crate::error::{Error, Result};
use crate::lattice::{driver_sign, LatticeConfig, UniformStream};

/// Skewness and initial separation of the coupled pair. The lower walk
/// starts at the origin; the upper walk starts at `y` rounded to the
/// nearest positive even multiple of `h` (round half up), so both walks
/// share a parity class and can meet exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewParams {
    beta: f64,
    requested_y: f64,
    y_units: i64,
    y_lattice: f64,
}

impl SkewParams {
    pub fn new(beta: f64, y: f64, config: &LatticeConfig) -> Result<Self> {
        if !(beta.is_finite() && (-1.0..=1.0).contains(&beta)) {
            return Err(Error::invalid(format!("beta must lie in [-1, 1], got {beta}")));
        }
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::invalid(format!("initial gap y must be positive, got {y}")));
        }
        let half_units = (y / (2.0 * config.h()) + 0.5).floor() as i64;
        if half_units <= 0 {
            return Err(Error::invalid(format!(
                "initial gap y = {y} rounds to zero on the h = {} lattice",
                config.h()
            )));
        }
        let y_units = 2 * half_units;
        Ok(SkewParams {
            beta,
            requested_y: y,
            y_units,
            y_lattice: y_units as f64 * config.h(),
        })
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The gap requested before lattice rounding.
    #[inline]
    pub fn requested_y(&self) -> f64 {
        self.requested_y
    }

    /// Initial gap in lattice units (a positive even integer).
    #[inline]
    pub fn y_units(&self) -> i64 {
        self.y_units
    }

    /// Initial gap after rounding, in physical units.
    #[inline]
    pub fn y_lattice(&self) -> f64 {
        self.y_lattice
    }
}

/// Outcome of one coupled step, in lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome {
    pub pos0: i64,
    pub posy: i64,
    pub push0: bool,
    pub pushy: bool,
}

/// Sign of one walk's move plus whether the at-zero rule overrode the
/// driver. `zero_up` is the at-origin up-threshold `(1+beta)/2`.
#[inline(always)]
fn walk_sign(pos: i64, u: f64, zero_up: f64) -> (i64, bool) {
    if pos == 0 {
        let s = if u < zero_up { 1 } else { -1 };
        (s, s != driver_sign(u))
    } else {
        (driver_sign(u), false)
    }
}

/// One checked step of the coupled pair from positions in lattice units.
///
/// Requires a nonnegative even gap (the parity class the scheme
/// preserves), `|beta| <= 1`, and `u` in `[0, 1)`.
pub fn coupled_step(pos0: i64, posy: i64, u: f64, beta: f64) -> Result<StepOutcome> {
    let gap = posy - pos0;
    if gap < 0 || gap % 2 != 0 {
        return Err(Error::contract(format!(
            "coupled_step requires a nonnegative even gap, got positions ({pos0}, {posy})"
        )));
    }
    if !(beta.is_finite() && (-1.0..=1.0).contains(&beta)) {
        return Err(Error::contract(format!("beta must lie in [-1, 1], got {beta}")));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::contract(format!("u must lie in [0, 1), got {u}")));
    }
    let zero_up = (1.0 + beta) / 2.0;
    let (s0, push0) = walk_sign(pos0, u, zero_up);
    let (sy, pushy) = walk_sign(posy, u, zero_up);
    Ok(StepOutcome { pos0: pos0 + s0, posy: posy + sy, push0, pushy })
}

/// Streaming stepper for the coupled pair. Tracks positions, the driver
/// sum, cumulative zero visits, and cumulative push counts without
/// storing the path; [`simulate_coupled`] records it into a
/// [`CoupledPath`], while ensemble runners consume it directly.
#[derive(Debug, Clone)]
pub struct CoupledWalker {
    x0: i64,
    xy: i64,
    driver: i64,
    step: usize,
    zero_up: f64,
    zero_visits_0: u64,
    zero_visits_y: u64,
    pushes_0: u64,
    pushes_y: u64,
}

impl CoupledWalker {
    pub fn new(params: &SkewParams) -> Self {
        CoupledWalker {
            x0: 0,
            xy: params.y_units(),
            driver: 0,
            step: 0,
            zero_up: (1.0 + params.beta()) / 2.0,
            // State 0 counts: the lower walk starts at the origin.
            zero_visits_0: 1,
            zero_visits_y: if params.y_units() == 0 { 1 } else { 0 },
            pushes_0: 0,
            pushes_y: 0,
        }
    }

    /// Advance both walks by one tick on the shared uniform.
    #[inline(always)]
    pub fn advance(&mut self, u: f64) {
        let (s0, push0) = walk_sign(self.x0, u, self.zero_up);
        let (sy, pushy) = walk_sign(self.xy, u, self.zero_up);
        self.x0 += s0;
        self.xy += sy;
        self.driver += driver_sign(u);
        self.step += 1;
        self.pushes_0 += push0 as u64;
        self.pushes_y += pushy as u64;
        self.zero_visits_0 += (self.x0 == 0) as u64;
        self.zero_visits_y += (self.xy == 0) as u64;
    }

    #[inline]
    pub fn x0(&self) -> i64 {
        self.x0
    }

    #[inline]
    pub fn xy(&self) -> i64 {
        self.xy
    }

    /// Driver sum `sum_j sign(u_j)` in lattice units.
    #[inline]
    pub fn driver(&self) -> i64 {
        self.driver
    }

    #[inline]
    pub fn step(&self) -> usize {
        self.step
    }

    /// Current gap in lattice units; zero exactly at coalescence.
    #[inline]
    pub fn gap_units(&self) -> i64 {
        self.xy - self.x0
    }

    #[inline]
    pub fn zero_visits_0(&self) -> u64 {
        self.zero_visits_0
    }

    #[inline]
    pub fn zero_visits_y(&self) -> u64 {
        self.zero_visits_y
    }

    #[inline]
    pub fn pushes_0(&self) -> u64 {
        self.pushes_0
    }

    #[inline]
    pub fn pushes_y(&self) -> u64 {
        self.pushes_y
    }
}

/// A recorded coupled path: positions, driver, and cumulative counters at
/// every step, all in lattice units. Index `n` is the state after `n`
/// steps; arrays have length `len_steps() + 1`.
#[derive(Debug, Clone)]
pub struct CoupledPath {
    config: LatticeConfig,
    params: SkewParams,
    x0_units: Vec<i64>,
    xy_units: Vec<i64>,
    driver_units: Vec<i64>,
    zero_visits_0: Vec<u64>,
    zero_visits_y: Vec<u64>,
    pushes_0: Vec<u64>,
    pushes_y: Vec<u64>,
    coalesce_step: Option<usize>,
}

/// Simulate the coupled pair for `config.max_steps()` steps, or until the
/// gap hits zero when `stop_at_coalescence` is set. After coalescence the
/// walks are identical by construction, so stopping loses nothing.
pub fn simulate_coupled(
    params: &SkewParams,
    config: &LatticeConfig,
    stream: &mut UniformStream,
    stop_at_coalescence: bool,
) -> CoupledPath {
    let mut walker = CoupledWalker::new(params);
    let cap = config.max_steps();
    let mut path = CoupledPath {
        config: *config,
        params: *params,
        x0_units: Vec::with_capacity(cap + 1),
        xy_units: Vec::with_capacity(cap + 1),
        driver_units: Vec::with_capacity(cap + 1),
        zero_visits_0: Vec::with_capacity(cap + 1),
        zero_visits_y: Vec::with_capacity(cap + 1),
        pushes_0: Vec::with_capacity(cap + 1),
        pushes_y: Vec::with_capacity(cap + 1),
        coalesce_step: None,
    };
    path.record(&walker);
    if walker.gap_units() == 0 {
        path.coalesce_step = Some(0);
    }
    for n in 1..=cap {
        walker.advance(stream.next_uniform());
        path.record(&walker);
        if path.coalesce_step.is_none() && walker.gap_units() == 0 {
            path.coalesce_step = Some(n);
            if stop_at_coalescence {
                break;
            }
        }
    }
    path
}

impl CoupledPath {
    fn record(&mut self, w: &CoupledWalker) {
        self.x0_units.push(w.x0());
        self.xy_units.push(w.xy());
        self.driver_units.push(w.driver());
        self.zero_visits_0.push(w.zero_visits_0());
        self.zero_visits_y.push(w.zero_visits_y());
        self.pushes_0.push(w.pushes_0());
        self.pushes_y.push(w.pushes_y());
    }

    #[inline]
    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    #[inline]
    pub fn params(&self) -> &SkewParams {
        &self.params
    }

    /// Number of recorded steps (arrays hold one more state).
    pub fn len_steps(&self) -> usize {
        self.x0_units.len() - 1
    }

    pub fn x0_units(&self) -> &[i64] {
        &self.x0_units
    }

    pub fn xy_units(&self) -> &[i64] {
        &self.xy_units
    }

    pub fn driver_units(&self) -> &[i64] {
        &self.driver_units
    }

    /// Cumulative count of states (including the initial one) with the
    /// lower walk at the origin.
    pub fn zero_visits_0(&self) -> &[u64] {
        &self.zero_visits_0
    }

    pub fn zero_visits_y(&self) -> &[u64] {
        &self.zero_visits_y
    }

    pub fn pushes_0(&self) -> &[u64] {
        &self.pushes_0
    }

    pub fn pushes_y(&self) -> &[u64] {
        &self.pushes_y
    }

    #[inline]
    pub fn coalesce_step(&self) -> Option<usize> {
        self.coalesce_step
    }

    /// Lower-walk position at step `n`, physical units.
    pub fn x0(&self, n: usize) -> f64 {
        self.x0_units[n] as f64 * self.config.h()
    }

    /// Upper-walk position at step `n`, physical units.
    pub fn xy(&self, n: usize) -> f64 {
        self.xy_units[n] as f64 * self.config.h()
    }

    #[inline]
    pub fn gap_units_at(&self, n: usize) -> i64 {
        self.xy_units[n] - self.x0_units[n]
    }

    /// Gap series in lattice units (exact).
    pub fn gap_series_units(&self) -> Vec<i64> {
        self.x0_units
            .iter()
            .zip(&self.xy_units)
            .map(|(&a, &b)| b - a)
            .collect()
    }

    /// Gap series in physical units: nonnegative even multiples of `h`.
    pub fn gap_series(&self) -> Vec<f64> {
        let h = self.config.h();
        self.gap_series_units().iter().map(|&d| d as f64 * h).collect()
    }
}

/// Local-time estimates for both walks, from the exact lattice
/// rearrangement `position - driver sum`. In lattice units these are
/// integers, and their difference equals the gap with zero error.
#[derive(Debug, Clone)]
pub struct LocalTimeSeries {
    h: f64,
    hat_l0_units: Vec<i64>,
    hat_ly_units: Vec<i64>,
}

/// Extract the local-time series of a completed path.
pub fn local_time_series(path: &CoupledPath) -> LocalTimeSeries {
    let hat_l0_units = path
        .x0_units()
        .iter()
        .zip(path.driver_units())
        .map(|(&x, &b)| x - b)
        .collect();
    let hat_ly_units = path
        .xy_units()
        .iter()
        .zip(path.driver_units())
        .map(|(&x, &b)| x - b)
        .collect();
    LocalTimeSeries { h: path.config().h(), hat_l0_units, hat_ly_units }
}

impl LocalTimeSeries {
    /// Lower-walk estimate in lattice units; equals `2 *` signed pushes.
    pub fn hat_l0_units(&self) -> &[i64] {
        &self.hat_l0_units
    }

    /// Upper-walk estimate in lattice units; starts at the rounded gap.
    pub fn hat_ly_units(&self) -> &[i64] {
        &self.hat_ly_units
    }

    pub fn hat_l0(&self) -> Vec<f64> {
        self.hat_l0_units.iter().map(|&v| v as f64 * self.h).collect()
    }

    pub fn hat_ly(&self) -> Vec<f64> {
        self.hat_ly_units.iter().map(|&v| v as f64 * self.h).collect()
    }

    /// Exact identity check: the local-time difference reproduces the gap
    /// at every step, with zero error in lattice units.
    pub fn gap_identity_holds(&self, path: &CoupledPath) -> bool {
        self.hat_l0_units
            .iter()
            .zip(&self.hat_ly_units)
            .zip(path.gap_series_units())
            .all(|((&l0, &ly), d)| ly - l0 == d)
    }
}

/// First meeting time of the pair, if any, in steps and physical time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coalescence {
    pub step: usize,
    pub time: f64,
}

pub fn coalescence_time(path: &CoupledPath) -> Option<Coalescence> {
    path.coalesce_step().map(|step| Coalescence {
        step,
        time: path.config().time_of(step),
    })
}

/// Single skew random walk from the origin: the lower-walk rule in
/// isolation. Returns positions in lattice units (length
/// `config.max_steps() + 1`).
pub fn skew_walk(config: &LatticeConfig, beta: f64, stream: &mut UniformStream) -> Result<Vec<i64>> {
    if !(beta.is_finite() && (-1.0..=1.0).contains(&beta)) {
        return Err(Error::invalid(format!("beta must lie in [-1, 1], got {beta}")));
    }
    let zero_up = (1.0 + beta) / 2.0;
    let mut positions = Vec::with_capacity(config.max_steps() + 1);
    let mut pos = 0i64;
    positions.push(pos);
    for _ in 0..config.max_steps() {
        let (s, _) = walk_sign(pos, stream.next_uniform(), zero_up);
        pos += s;
        positions.push(pos);
    }
    Ok(positions)
}

/// Symmetric `±h` walk from the origin (the `beta = 0` driver itself).
pub fn symmetric_walk(config: &LatticeConfig, stream: &mut UniformStream) -> Vec<i64> {
    skew_walk(config, 0.0, stream).expect("beta = 0 is always valid")
}
