//! Roofline estimates and throughput measurement.
//!
//! A lattice update moves `n_b` bytes and executes `n_f` floating-point
//! operations. With stream bandwidth `b_S` and peak rate `P_peak` the kernel
//! can reach at most `P_max = b_S / n_b` updates per second when it is
//! memory bound, which it is when `l = min(1, b_S n_f / (P_peak n_b)) < 1`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lattice::{CollisionOperator, Q};
use crate::{Error, Result};

/// FLOP per cell update of the generated cumulant kernel used as reference.
pub const CUMULANT_FLOPS: f64 = 828.0;

/// FLOP per cell update of this crate's BGK kernel with Guo forcing,
/// counted from its source: moments 202, equilibrium 331, relaxation 81,
/// forcing 521. Multiplications by lattice velocity components are
/// included.
pub const BGK_FLOPS: f64 = 1135.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineSpec {
    pub name: String,
    /// Measured stream bandwidth (bytes/s).
    pub bandwidth: f64,
    /// Peak floating-point rate (FLOP/s); absent means memory bound is
    /// assumed.
    #[serde(default)]
    pub peak_flops: Option<f64>,
}

impl MachineSpec {
    pub fn new(name: &str, bandwidth: f64, peak_flops: Option<f64>) -> Result<Self> {
        let m = Self { name: name.to_string(), bandwidth, peak_flops };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::Config(format!("machine '{}': bandwidth must be positive", self.name)));
        }
        if let Some(p) = self.peak_flops {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Config(format!("machine '{}': peak FLOP rate must be positive", self.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelCost {
    /// Bytes moved per cell update.
    pub bytes: f64,
    /// Floating-point operations per cell update.
    pub flops: f64,
}

/// Best-case traffic: every population read and written once plus the force
/// vector read, `(27 + 27 + 3) · precision_bytes`.
pub fn lbm_kernel_cost(operator: CollisionOperator, precision_bytes: usize) -> Result<KernelCost> {
    if precision_bytes != 4 && precision_bytes != 8 {
        return Err(Error::InvalidArgument(format!(
            "precision must be 4 or 8 bytes, got {precision_bytes}"
        )));
    }
    let values = 2 * Q + 3;
    let flops = match operator {
        CollisionOperator::Cumulant => CUMULANT_FLOPS,
        CollisionOperator::Bgk => BGK_FLOPS,
    };
    Ok(KernelCost { bytes: (values * precision_bytes) as f64, flops })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Lightspeed {
    Computed(f64),
    /// No peak rate given; the kernel is assumed memory bound (`l < 1`).
    AssumedMemoryBound,
}

impl Lightspeed {
    pub fn is_memory_bound(&self) -> bool {
        match self {
            Self::Computed(l) => *l < 1.0,
            Self::AssumedMemoryBound => true,
        }
    }
}

pub fn lightspeed(machine: &MachineSpec, cost: &KernelCost) -> Lightspeed {
    match machine.peak_flops {
        Some(peak) => Lightspeed::Computed((machine.bandwidth * cost.flops / (peak * cost.bytes)).min(1.0)),
        None => Lightspeed::AssumedMemoryBound,
    }
}

/// `b_S / n_b` in million lattice updates per second.
pub fn estimated_peak_mlups(machine: &MachineSpec, cost: &KernelCost) -> f64 {
    machine.bandwidth / cost.bytes / 1e6
}

pub fn percent_of_peak(measured_mlups: f64, estimated_mlups: f64) -> f64 {
    100.0 * measured_mlups / estimated_mlups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Fused streaming and collision.
    CollideStream,
    /// Halo exchange and outer boundaries.
    Exchange,
    /// Sampling, forces, point exchange, spreading and kinematics.
    Turbine,
}

/// Wall-clock accounting of a time loop.
#[derive(Debug, Clone)]
pub struct RunTimer {
    cells: u64,
    steps: u64,
    wall: f64,
    phases: BTreeMap<Phase, f64>,
    started: Option<Instant>,
}

impl RunTimer {
    pub fn new(cells: u64) -> Self {
        Self { cells, steps: 0, wall: 0.0, phases: BTreeMap::new(), started: None }
    }

    /// Timer with fixed totals, e.g. for reporting external measurements.
    pub fn from_totals(cells: u64, steps: u64, wall_seconds: f64) -> Self {
        Self { cells, steps, wall: wall_seconds, phases: BTreeMap::new(), started: None }
    }

    pub fn start(&mut self) {
        self.started = Some(Instant::now());
    }

    pub fn stop(&mut self) {
        if let Some(t) = self.started.take() {
            self.wall += t.elapsed().as_secs_f64();
        }
    }

    pub fn time<R>(&mut self, phase: Phase, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        *self.phases.entry(phase).or_insert(0.0) += t.elapsed().as_secs_f64();
        r
    }

    pub fn add_step(&mut self) {
        self.steps += 1;
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn wall_seconds(&self) -> f64 {
        self.wall
    }

    pub fn phase_seconds(&self, phase: Phase) -> f64 {
        self.phases.get(&phase).copied().unwrap_or(0.0)
    }

    /// `(phase, seconds, percent of wall time)`.
    pub fn breakdown(&self) -> Vec<PhaseShare> {
        self.phases
            .iter()
            .map(|(p, s)| PhaseShare {
                phase: *p,
                seconds: *s,
                percent: if self.wall > 0.0 { 100.0 * s / self.wall } else { 0.0 },
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseShare {
    pub phase: Phase,
    pub seconds: f64,
    pub percent: f64,
}

/// `cells · steps / (seconds · 10⁶)`.
pub fn measure_mlups(timer: &RunTimer) -> Result<f64> {
    if timer.steps == 0 || !(timer.wall > 0.0) {
        return Err(Error::Measurement(format!(
            "cannot measure throughput over {} steps in {} s",
            timer.steps, timer.wall
        )));
    }
    Ok(timer.cells as f64 * timer.steps as f64 / (timer.wall * 1e6))
}

/// Roofline row of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RooflineEntry {
    pub machine: MachineSpec,
    pub cost: KernelCost,
    pub lightspeed: Lightspeed,
    pub estimated_peak_mlups: f64,
    pub measured_mlups: Option<f64>,
    pub percent_of_peak: Option<f64>,
}

pub fn roofline_entry(machine: &MachineSpec, cost: &KernelCost, measured_mlups: Option<f64>) -> RooflineEntry {
    let peak = estimated_peak_mlups(machine, cost);
    RooflineEntry {
        machine: machine.clone(),
        cost: *cost,
        lightspeed: lightspeed(machine, cost),
        estimated_peak_mlups: peak,
        measured_mlups,
        percent_of_peak: measured_mlups.map(|m| percent_of_peak(m, peak)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traffic_per_update() {
        let s = lbm_kernel_cost(CollisionOperator::Cumulant, 4).unwrap();
        assert_eq!(s.bytes, 228.0);
        assert_eq!(s.flops, 828.0);
        assert_eq!(lbm_kernel_cost(CollisionOperator::Bgk, 8).unwrap().bytes, 456.0);
        assert!(lbm_kernel_cost(CollisionOperator::Bgk, 2).is_err());
    }

    #[test]
    fn lightspeed_clamps_and_assumes() {
        let cost = KernelCost { bytes: 228.0, flops: 1e12 };
        let m = MachineSpec::new("x", 1e11, Some(1e12)).unwrap();
        assert_eq!(lightspeed(&m, &cost), Lightspeed::Computed(1.0));
        let cpu = MachineSpec::new("cpu", 1e11, None).unwrap();
        assert!(lightspeed(&cpu, &cost).is_memory_bound());
        assert!(MachineSpec::new("bad", 0.0, None).is_err());
    }

    #[test]
    fn doubling_traffic_halves_peak() {
        let m = MachineSpec::new("m", 2e11, None).unwrap();
        let a = estimated_peak_mlups(&m, &KernelCost { bytes: 100.0, flops: 1.0 });
        let b = estimated_peak_mlups(&m, &KernelCost { bytes: 200.0, flops: 1.0 });
        assert!((a - 2.0 * b).abs() < 1e-12);
    }

    #[test]
    fn mlups_arithmetic() {
        let t = RunTimer::from_totals(1_000_000, 100, 1.0);
        assert!((measure_mlups(&t).unwrap() - 100.0).abs() < 1e-12);
        assert!(matches!(measure_mlups(&RunTimer::from_totals(10, 0, 1.0)), Err(Error::Measurement(_))));
        assert!(measure_mlups(&RunTimer::from_totals(10, 5, 0.0)).is_err());
    }

    #[test]
    fn phase_shares_stay_within_wall_time() {
        let mut t = RunTimer::new(8);
        t.start();
        t.time(Phase::CollideStream, || std::thread::sleep(std::time::Duration::from_millis(2)));
        t.time(Phase::Exchange, || ());
        t.add_step();
        t.stop();
        let total: f64 = t.breakdown().iter().map(|p| p.percent).sum();
        assert!(total <= 100.0 + 1e-9);
        assert!(t.phase_seconds(Phase::CollideStream) > 0.0);
    }
}
