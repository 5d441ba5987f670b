//! A 2D ideal gas of tagged ballistic particles, selective membranes, and
//! a work ledger — the demon's side of the argument, run as an experiment.
//!
//! Two equal populations at the same temperature, distinguished by nothing
//! but their origin tag, are allowed to mix; two origin-selective membranes
//! are then swept quasi-statically toward the middle, un-mixing the gas
//! while thermal walls hold the temperature. The work invested, divided by
//! `T`, converges on `2 N ln 2` as the sweep slows — the mixing entropy,
//! measured rather than postulated, for chemically identical gases.
//!
//! The dynamics are exact: particles fly ballistically between events
//! (walls, membranes), nothing is time-stepped, and particles never
//! interact, so each one is advanced independently with its own random
//! stream. A fixed seed reproduces every event bit for bit. Units:
//! `k = 1`, `m = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::stats::standard_normal_pair;

/// Clearance restored between a particle and a reflecting surface after a
/// collision, in units of the box width. Keeps coincident positions from
/// producing repeated zero-time events.
const CONTACT_CLEARANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DemonError {
    #[error("box dimensions must be positive and finite")]
    InvalidBox,
    #[error("temperature must be positive and finite")]
    InvalidTemperature,
    #[error("membrane speed must be positive and finite")]
    InvalidMembraneSpeed,
    #[error(
        "membrane speed {speed} exceeds the quasi-static bound {limit} (= {fraction} * sqrt(T))"
    )]
    QuasiStaticityViolation {
        speed: f64,
        limit: f64,
        fraction: f64,
    },
    #[error("selective sweeps are isothermal and need thermal walls enabled")]
    ThermalWallsRequired,
    #[error("durations and intervals must be nonnegative and finite")]
    InvalidDuration,
    #[error("sweep endpoints must lie inside the box")]
    SweepOutOfBox,
}

/// Full specification of a run; the seed fixes every random draw.
#[derive(Debug, Clone, PartialEq)]
pub struct DemonConfig {
    pub particles_per_side: u64,
    pub box_width: f64,
    pub box_height: f64,
    pub temperature: f64,
    pub membrane_speed: f64,
    pub seed: u64,
    pub thermal_walls: bool,
    /// Quasi-staticity bound as a fraction of the thermal speed `sqrt(T)`.
    pub quasistatic_fraction: f64,
    /// Mixing time before the un-mixing sweep; default 20 box crossings.
    pub mix_time: Option<f64>,
    /// Ledger sampling interval; default one box crossing.
    pub sample_interval: Option<f64>,
}

impl DemonConfig {
    pub fn new(particles_per_side: u64, temperature: f64, membrane_speed: f64, seed: u64) -> Self {
        Self {
            particles_per_side,
            box_width: 1.0,
            box_height: 1.0,
            temperature,
            membrane_speed,
            seed,
            thermal_walls: true,
            quasistatic_fraction: 0.01,
            mix_time: None,
            sample_interval: None,
        }
    }

    pub fn thermal_speed(&self) -> f64 {
        self.temperature.sqrt()
    }

    pub fn speed_limit(&self) -> f64 {
        self.quasistatic_fraction * self.thermal_speed()
    }

    fn crossing_time(&self) -> f64 {
        self.box_width / self.thermal_speed()
    }

    pub fn effective_mix_time(&self) -> f64 {
        self.mix_time.unwrap_or(20.0 * self.crossing_time())
    }

    pub fn effective_sample_interval(&self) -> f64 {
        self.sample_interval.unwrap_or(self.crossing_time())
    }

    pub fn validate(&self) -> Result<(), DemonError> {
        if !self.box_width.is_finite()
            || !self.box_height.is_finite()
            || self.box_width <= 0.0
            || self.box_height <= 0.0
        {
            return Err(DemonError::InvalidBox);
        }
        if !self.temperature.is_finite() || self.temperature <= 0.0 {
            return Err(DemonError::InvalidTemperature);
        }
        if !self.membrane_speed.is_finite() || self.membrane_speed <= 0.0 {
            return Err(DemonError::InvalidMembraneSpeed);
        }
        if self.membrane_speed > self.speed_limit() {
            return Err(DemonError::QuasiStaticityViolation {
                speed: self.membrane_speed,
                limit: self.speed_limit(),
                fraction: self.quasistatic_fraction,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginTag {
    Left,
    Right,
}

/// Which particles a membrane stops; everything else passes freely.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembraneFilter {
    BlocksNone,
    BlocksAll,
    BlocksOrigin(OriginTag),
    BlocksSpecies(u16),
}

impl MembraneFilter {
    fn blocks(&self, particle: &Particle) -> bool {
        match self {
            Self::BlocksNone => false,
            Self::BlocksAll => true,
            Self::BlocksOrigin(tag) => particle.origin == *tag,
            Self::BlocksSpecies(species) => particle.species == *species,
        }
    }
}

/// A resting selective membrane at a fixed `x` position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membrane {
    pub position: f64,
    pub filter: MembraneFilter,
}

/// One leg of an un-mixing protocol: a membrane with the given filter
/// swept from `from_x` to `to_x` at the configured speed, then parked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneSweep {
    pub filter: MembraneFilter,
    pub from_x: f64,
    pub to_x: f64,
}

#[derive(Debug, Clone)]
struct Particle {
    position: [f64; 2],
    velocity: [f64; 2],
    origin: OriginTag,
    species: u16,
    rng: ChaCha8Rng,
}

/// A membrane trajectory within one phase: linear motion until
/// `travel_time`, parked afterwards.
#[derive(Debug, Clone)]
struct PhaseMembrane {
    start_position: f64,
    velocity: f64,
    travel_time: f64,
    filter: MembraneFilter,
    work: f64,
}

impl PhaseMembrane {
    fn resting(membrane: Membrane) -> Self {
        Self {
            start_position: membrane.position,
            velocity: 0.0,
            travel_time: 0.0,
            filter: membrane.filter,
            work: 0.0,
        }
    }

    fn parked_position(&self) -> f64 {
        self.start_position + self.velocity * self.travel_time
    }

    fn state_at(&self, time: f64) -> (f64, f64) {
        if time < self.travel_time {
            (self.start_position + self.velocity * time, self.velocity)
        } else {
            (self.parked_position(), 0.0)
        }
    }

    /// Earliest collision with a blocked particle at relative time `now`,
    /// position `x`, velocity `vx`, within the phase window. Returns the
    /// time increment and the membrane velocity at impact.
    fn hit_time(&self, now: f64, x: f64, vx: f64, window_end: f64) -> Option<(f64, f64)> {
        // moving segment
        if now < self.travel_time {
            let position = self.start_position + self.velocity * now;
            let relative = vx - self.velocity;
            if relative != 0.0 && (position - x) * relative >= 0.0 {
                let dt = (position - x) / relative;
                if now + dt <= self.travel_time.min(window_end) {
                    return Some((dt, self.velocity));
                }
            }
        }
        // parked segment
        let park_start = self.travel_time.max(now);
        if park_start <= window_end && vx != 0.0 {
            let position = self.parked_position();
            let x_at_park = x + vx * (park_start - now);
            if (position - x_at_park) * vx >= 0.0 {
                let dt = park_start - now + (position - x_at_park) / vx;
                if now + dt <= window_end {
                    return Some((dt, 0.0));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PhaseEvent {
    PhaseEnd,
    WallLowX,
    WallHighX,
    WallLowY,
    WallHighY,
    Membrane(usize),
}

/// The simulation state: particles, resting membranes, clock and ledgers.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    particles: Vec<Particle>,
    box_size: [f64; 2],
    temperature: f64,
    thermal_walls: bool,
    membrane_speed: f64,
    speed_limit: f64,
    quasistatic_fraction: f64,
    membranes: Vec<Membrane>,
    clock: f64,
    work_on_membranes: f64,
    heat_absorbed: f64,
    kinetic_time_integral: f64,
    events_processed: u64,
}

impl ParticleEnsemble {
    /// Places `particles_per_side` particles uniformly in each half box,
    /// draws velocities from the 2D Maxwell-Boltzmann distribution at `T`,
    /// and tags each particle with its side of origin. No membrane is
    /// installed; add one explicitly to keep the halves separated.
    pub fn new(config: &DemonConfig) -> Result<Self, DemonError> {
        config.validate()?;
        let n = config.particles_per_side;
        let width = config.box_width;
        let height = config.box_height;
        let sigma = config.thermal_speed();
        let mut particles = Vec::with_capacity(2 * n as usize);
        for index in 0..2 * n {
            // per-particle stream: determinism independent of processing order
            let stream_seed = config
                .seed
                .wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
            let origin = if index < n {
                OriginTag::Left
            } else {
                OriginTag::Right
            };
            let x_offset: f64 = rng.random::<f64>() * width / 2.0;
            let x = match origin {
                OriginTag::Left => x_offset,
                OriginTag::Right => width / 2.0 + x_offset,
            };
            let y: f64 = rng.random::<f64>() * height;
            let (vx, vy) = standard_normal_pair(&mut rng);
            particles.push(Particle {
                position: [x, y],
                velocity: [sigma * vx, sigma * vy],
                origin,
                species: 0,
                rng,
            });
        }
        Ok(Self {
            particles,
            box_size: [width, height],
            temperature: config.temperature,
            thermal_walls: config.thermal_walls,
            membrane_speed: config.membrane_speed,
            speed_limit: config.speed_limit(),
            quasistatic_fraction: config.quasistatic_fraction,
            membranes: Vec::new(),
            clock: 0.0,
            work_on_membranes: 0.0,
            heat_absorbed: 0.0,
            kinetic_time_integral: 0.0,
            events_processed: 0,
        })
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn particle_count(&self) -> usize {
        self.particles.len()
    }

    pub fn events_processed(&self) -> u64 {
        self.events_processed
    }

    /// Cumulative work done on all membranes by particle impacts.
    pub fn work_on_membranes(&self) -> f64 {
        self.work_on_membranes
    }

    /// Cumulative energy transferred into the gas at thermal walls.
    pub fn heat_absorbed(&self) -> f64 {
        self.heat_absorbed
    }

    /// Time integral of the total kinetic energy since initialization.
    pub fn kinetic_time_integral(&self) -> f64 {
        self.kinetic_time_integral
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| 0.5 * (p.velocity[0] * p.velocity[0] + p.velocity[1] * p.velocity[1]))
            .sum()
    }

    /// Number of particles in the left half of the box.
    pub fn left_count(&self) -> u64 {
        let mid = self.box_size[0] / 2.0;
        self.particles
            .iter()
            .filter(|p| p.position[0] < mid)
            .count() as u64
    }

    pub fn count_origin(&self, tag: OriginTag, in_left_half: bool) -> u64 {
        let mid = self.box_size[0] / 2.0;
        self.particles
            .iter()
            .filter(|p| p.origin == tag && (p.position[0] < mid) == in_left_half)
            .count() as u64
    }

    /// Relabels every particle's species tag; the dynamics never read it,
    /// so nothing else changes.
    pub fn relabel_species(&mut self, species: u16) {
        for particle in &mut self.particles {
            particle.species = species;
        }
    }

    pub fn add_membrane(&mut self, membrane: Membrane) {
        self.membranes.push(membrane);
    }

    pub fn clear_membranes(&mut self) {
        self.membranes.clear();
    }

    /// First-law residual `(KE - KE_ref) - (-W_membranes) - Q`, scaled by
    /// the largest term involved.
    pub fn first_law_residual(&self, reference_kinetic_energy: f64) -> f64 {
        let delta = self.kinetic_energy() - reference_kinetic_energy;
        let work_on_gas = -self.work_on_membranes;
        let residual = delta - work_on_gas - self.heat_absorbed;
        let scale = delta
            .abs()
            .max(work_on_gas.abs())
            .max(self.heat_absorbed.abs())
            .max(1.0);
        residual / scale
    }

    /// Ballistic evolution for `duration` with the resting membranes.
    pub fn evolve(&mut self, duration: f64) -> Result<(), DemonError> {
        self.evolve_sampling(duration, &[]).map(|_| ())
    }

    /// As [`Self::evolve`], recording the left-half particle count at the
    /// given relative sample times (sorted ascending).
    pub fn evolve_sampling(
        &mut self,
        duration: f64,
        sample_times: &[f64],
    ) -> Result<Vec<u64>, DemonError> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(DemonError::InvalidDuration);
        }
        let membranes: Vec<PhaseMembrane> = self
            .membranes
            .iter()
            .map(|&m| PhaseMembrane::resting(m))
            .collect();
        let (_, counts) = self.advance_phase(duration, membranes, sample_times);
        Ok(counts)
    }

    /// Sweeps one or more selective membranes simultaneously at the
    /// configured speed; each is parked at its destination afterwards and
    /// remains in place as a resting membrane. Returns the work done on
    /// each swept membrane by the particles it blocked (negative when the
    /// agent pushes against the gas). Isothermal by contract: thermal
    /// walls must be on, and the speed must respect the quasi-static
    /// bound.
    pub fn sweep_membranes(&mut self, sweeps: &[MembraneSweep]) -> Result<Vec<f64>, DemonError> {
        self.run_sweep(sweeps, None).map(|(work, _)| work)
    }

    /// As [`Self::sweep_membranes`], pausing every `sample_interval` to
    /// snapshot the clock, left count and cumulative ledgers, so the work
    /// accumulation is visible in time.
    pub fn sweep_membranes_sampled(
        &mut self,
        sweeps: &[MembraneSweep],
        sample_interval: f64,
    ) -> Result<(Vec<f64>, Vec<SweepSample>), DemonError> {
        if !sample_interval.is_finite() || sample_interval <= 0.0 {
            return Err(DemonError::InvalidDuration);
        }
        self.run_sweep(sweeps, Some(sample_interval))
    }

    /// The sweep engine: chunked into sampling intervals. Per-particle
    /// random streams make the chunking invisible to the draw sequence, so
    /// a run is reproducible regardless of how it is sampled.
    fn run_sweep(
        &mut self,
        sweeps: &[MembraneSweep],
        sample_interval: Option<f64>,
    ) -> Result<(Vec<f64>, Vec<SweepSample>), DemonError> {
        if !self.thermal_walls {
            return Err(DemonError::ThermalWallsRequired);
        }
        if self.membrane_speed > self.speed_limit {
            return Err(DemonError::QuasiStaticityViolation {
                speed: self.membrane_speed,
                limit: self.speed_limit,
                fraction: self.quasistatic_fraction,
            });
        }
        let width = self.box_size[0];
        struct Leg {
            from: f64,
            velocity: f64,
            travel: f64,
            filter: MembraneFilter,
        }
        let mut legs = Vec::with_capacity(sweeps.len());
        let mut total_duration = 0.0f64;
        for sweep in sweeps {
            if !(0.0..=width).contains(&sweep.from_x) || !(0.0..=width).contains(&sweep.to_x) {
                return Err(DemonError::SweepOutOfBox);
            }
            let distance = sweep.to_x - sweep.from_x;
            let travel = distance.abs() / self.membrane_speed;
            total_duration = total_duration.max(travel);
            legs.push(Leg {
                from: sweep.from_x,
                velocity: self.membrane_speed * distance.signum(),
                travel,
                filter: sweep.filter,
            });
        }

        let mut work_per_leg = vec![0.0f64; legs.len()];
        let mut samples = Vec::new();
        let mut elapsed = 0.0f64;
        let mut chunk_index = 0u64;
        while elapsed < total_duration {
            let chunk_end = match sample_interval {
                Some(interval) => {
                    chunk_index += 1;
                    (chunk_index as f64 * interval).min(total_duration)
                }
                None => total_duration,
            };
            let mut phase_membranes: Vec<PhaseMembrane> = legs
                .iter()
                .map(|leg| PhaseMembrane {
                    start_position: leg.from + leg.velocity * elapsed.min(leg.travel),
                    velocity: leg.velocity,
                    travel_time: (leg.travel - elapsed).max(0.0),
                    filter: leg.filter,
                    work: 0.0,
                })
                .collect();
            phase_membranes.extend(self.membranes.iter().map(|&m| PhaseMembrane::resting(m)));
            let (finished, _) = self.advance_phase(chunk_end - elapsed, phase_membranes, &[]);
            for (accumulated, membrane) in work_per_leg.iter_mut().zip(&finished) {
                *accumulated += membrane.work;
            }
            elapsed = chunk_end;
            if sample_interval.is_some() && elapsed < total_duration {
                samples.push(SweepSample {
                    time: self.clock,
                    left_count: self.left_count(),
                    work_on_membranes: self.work_on_membranes,
                    heat_absorbed: self.heat_absorbed,
                });
            }
        }
        // swept membranes stay behind as resting ones
        for leg in &legs {
            self.membranes.push(Membrane {
                position: leg.from + leg.velocity * leg.travel,
                filter: leg.filter,
            });
        }
        Ok((work_per_leg, samples))
    }

    /// Advances every particle independently through one phase of
    /// prescribed membrane motion. Valid because particles never interact.
    fn advance_phase(
        &mut self,
        duration: f64,
        mut membranes: Vec<PhaseMembrane>,
        sample_times: &[f64],
    ) -> (Vec<PhaseMembrane>, Vec<u64>) {
        let mut counts = vec![0u64; sample_times.len()];
        let width = self.box_size[0];
        let height = self.box_size[1];
        let mid = width / 2.0;
        let clearance = CONTACT_CLEARANCE * width;
        let sigma = self.temperature.sqrt();
        let mut events = 0u64;
        let mut work = 0.0f64;
        let mut heat = 0.0f64;
        let mut kinetic_integral = 0.0f64;

        for particle in &mut self.particles {
            let mut time = 0.0f64;
            let mut next_sample = 0usize;
            loop {
                let [x, y] = particle.position;
                let [vx, vy] = particle.velocity;

                let mut event = PhaseEvent::PhaseEnd;
                let mut dt = duration - time;
                if vx > 0.0 {
                    let hit = (width - x) / vx;
                    if hit < dt {
                        dt = hit;
                        event = PhaseEvent::WallHighX;
                    }
                } else if vx < 0.0 {
                    let hit = -x / vx;
                    if hit < dt {
                        dt = hit;
                        event = PhaseEvent::WallLowX;
                    }
                }
                if vy > 0.0 {
                    let hit = (height - y) / vy;
                    if hit < dt {
                        dt = hit;
                        event = PhaseEvent::WallHighY;
                    }
                } else if vy < 0.0 {
                    let hit = -y / vy;
                    if hit < dt {
                        dt = hit;
                        event = PhaseEvent::WallLowY;
                    }
                }
                for (index, membrane) in membranes.iter().enumerate() {
                    if !membrane.filter.blocks(particle) {
                        continue;
                    }
                    if let Some((hit, _)) = membrane.hit_time(time, x, vx, duration) {
                        if hit < dt {
                            dt = hit;
                            event = PhaseEvent::Membrane(index);
                        }
                    }
                }

                // emit any samples that fall inside this free flight
                let segment_end = time + dt;
                while next_sample < sample_times.len() && sample_times[next_sample] <= segment_end {
                    let sample_x = x + vx * (sample_times[next_sample] - time);
                    if sample_x < mid {
                        counts[next_sample] += 1;
                    }
                    next_sample += 1;
                }

                let speed_sq = vx * vx + vy * vy;
                kinetic_integral += 0.5 * speed_sq * dt;
                particle.position[0] = x + vx * dt;
                particle.position[1] = y + vy * dt;
                time = segment_end;

                match event {
                    PhaseEvent::PhaseEnd => break,
                    PhaseEvent::WallLowX | PhaseEvent::WallHighX => {
                        events += 1;
                        let inward = if matches!(event, PhaseEvent::WallLowX) {
                            particle.position[0] = 0.0;
                            1.0
                        } else {
                            particle.position[0] = width;
                            -1.0
                        };
                        if self.thermal_walls {
                            heat += thermal_bounce(particle, 0, inward, sigma);
                        } else {
                            particle.velocity[0] = -particle.velocity[0];
                        }
                    }
                    PhaseEvent::WallLowY | PhaseEvent::WallHighY => {
                        events += 1;
                        let inward = if matches!(event, PhaseEvent::WallLowY) {
                            particle.position[1] = 0.0;
                            1.0
                        } else {
                            particle.position[1] = height;
                            -1.0
                        };
                        if self.thermal_walls {
                            heat += thermal_bounce(particle, 1, inward, sigma);
                        } else {
                            particle.velocity[1] = -particle.velocity[1];
                        }
                    }
                    PhaseEvent::Membrane(index) => {
                        events += 1;
                        let membrane = &mut membranes[index];
                        let (position, u) = membrane.state_at(time);
                        let incoming = particle.velocity[0];
                        particle.velocity[0] = 2.0 * u - incoming;
                        // work done on the membrane by this impact
                        membrane.work += 2.0 * u * (incoming - u);
                        work += 2.0 * u * (incoming - u);
                        // restore clearance on the particle's side
                        let away = (particle.velocity[0] - u).signum();
                        particle.position[0] = position + away * clearance;
                    }
                }
            }
        }

        self.clock += duration;
        self.events_processed += events;
        self.work_on_membranes += work;
        self.heat_absorbed += heat;
        self.kinetic_time_integral += kinetic_integral;
        (membranes, counts)
    }
}

/// Thermal-wall bounce: outgoing normal speed from the wall-flux
/// (Rayleigh) distribution, tangential component Gaussian, both at the
/// bath temperature. Returns the kinetic energy change.
fn thermal_bounce(particle: &mut Particle, axis: usize, inward: f64, sigma: f64) -> f64 {
    let before = 0.5
        * (particle.velocity[0] * particle.velocity[0]
            + particle.velocity[1] * particle.velocity[1]);
    let u: f64 = particle.rng.random::<f64>().max(1e-300);
    let normal_speed = sigma * (-2.0 * u.ln()).sqrt();
    let (gaussian, _) = standard_normal_pair(&mut particle.rng);
    particle.velocity[axis] = inward * normal_speed;
    particle.velocity[1 - axis] = sigma * gaussian;
    let after = 0.5
        * (particle.velocity[0] * particle.velocity[0]
            + particle.velocity[1] * particle.velocity[1]);
    after - before
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LedgerEventKind {
    Init,
    MixStart,
    Sample,
    MixEnd,
    SweepStart,
    SweepEnd,
}

impl std::fmt::Display for LedgerEventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Init => "init",
            Self::MixStart => "mix-start",
            Self::Sample => "sample",
            Self::MixEnd => "mix-end",
            Self::SweepStart => "sweep-start",
            Self::SweepEnd => "sweep-end",
        };
        f.write_str(name)
    }
}

/// A snapshot taken between sweep chunks: cumulative ledgers at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub time: f64,
    pub left_count: u64,
    pub work_on_membranes: f64,
    pub heat_absorbed: f64,
}

/// One line of the run ledger: work and heat increments since the
/// previous record, and the current left-half count.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerRecord {
    pub time: f64,
    pub kind: LedgerEventKind,
    pub work_delta: f64,
    pub heat_delta: f64,
    pub left_count: u64,
}

/// Outcome of the full mix/un-mix protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct DemonMeasurement {
    /// Work invested by the agent driving the membranes (done on the gas).
    pub work_invested: f64,
    /// `work_invested / T` — the measured entropy of mixing, in units of k.
    pub entropy_estimate: f64,
    /// `2 N ln 2`.
    pub target_entropy: f64,
    pub relative_deviation: f64,
    pub mixing_duration: f64,
    pub sweep_duration: f64,
    pub first_law_residual: f64,
    pub events_processed: u64,
}

struct LedgerRecorder {
    records: Vec<LedgerRecord>,
    last_work: f64,
    last_heat: f64,
}

impl LedgerRecorder {
    fn new() -> Self {
        Self {
            records: Vec::new(),
            last_work: 0.0,
            last_heat: 0.0,
        }
    }

    fn push(&mut self, kind: LedgerEventKind, ensemble: &ParticleEnsemble) {
        let work = ensemble.work_on_membranes();
        let heat = ensemble.heat_absorbed();
        self.records.push(LedgerRecord {
            time: ensemble.clock(),
            kind,
            work_delta: work - self.last_work,
            heat_delta: heat - self.last_heat,
            left_count: ensemble.left_count(),
        });
        self.last_work = work;
        self.last_heat = heat;
    }

    fn push_sample(&mut self, time: f64, left_count: u64, ensemble_work: f64, ensemble_heat: f64) {
        self.records.push(LedgerRecord {
            time,
            kind: LedgerEventKind::Sample,
            work_delta: ensemble_work - self.last_work,
            heat_delta: ensemble_heat - self.last_heat,
            left_count,
        });
        self.last_work = ensemble_work;
        self.last_heat = ensemble_heat;
    }
}

/// The full protocol: mix by free evolution, then un-mix with two
/// origin-selective membranes swept simultaneously toward the middle.
/// Returns the measurement and the run ledger.
pub fn run_unmixing_protocol(
    config: &DemonConfig,
) -> Result<(DemonMeasurement, Vec<LedgerRecord>), DemonError> {
    config.validate()?;
    if !config.thermal_walls {
        return Err(DemonError::ThermalWallsRequired);
    }
    let mut ensemble = ParticleEnsemble::new(config)?;
    let initial_kinetic = ensemble.kinetic_energy();
    let mut recorder = LedgerRecorder::new();
    recorder.push(LedgerEventKind::Init, &ensemble);

    let mix_time = config.effective_mix_time();
    let interval = config.effective_sample_interval();
    recorder.push(LedgerEventKind::MixStart, &ensemble);
    let mut elapsed = 0.0f64;
    let mut chunk_index = 0u64;
    while elapsed < mix_time {
        chunk_index += 1;
        let chunk_end = (chunk_index as f64 * interval).min(mix_time);
        ensemble.evolve(chunk_end - elapsed)?;
        elapsed = chunk_end;
        if elapsed < mix_time {
            recorder.push(LedgerEventKind::Sample, &ensemble);
        }
    }
    recorder.push(LedgerEventKind::MixEnd, &ensemble);

    let width = config.box_width;
    let sweeps = [
        MembraneSweep {
            filter: MembraneFilter::BlocksOrigin(OriginTag::Left),
            from_x: width,
            to_x: width / 2.0,
        },
        MembraneSweep {
            filter: MembraneFilter::BlocksOrigin(OriginTag::Right),
            from_x: 0.0,
            to_x: width / 2.0,
        },
    ];
    recorder.push(LedgerEventKind::SweepStart, &ensemble);
    let sweep_started = ensemble.clock();
    let (work_on_membranes, sweep_samples) = ensemble.sweep_membranes_sampled(&sweeps, interval)?;
    for sample in &sweep_samples {
        recorder.push_sample(
            sample.time,
            sample.left_count,
            sample.work_on_membranes,
            sample.heat_absorbed,
        );
    }
    let sweep_duration = ensemble.clock() - sweep_started;
    recorder.push(LedgerEventKind::SweepEnd, &ensemble);

    let work_invested = -work_on_membranes.iter().sum::<f64>();
    let target = 2.0 * config.particles_per_side as f64 * std::f64::consts::LN_2;
    let entropy_estimate = work_invested / config.temperature;
    let relative_deviation = if target > 0.0 {
        (entropy_estimate - target) / target
    } else {
        0.0
    };
    let measurement = DemonMeasurement {
        work_invested,
        entropy_estimate,
        target_entropy: target,
        relative_deviation,
        mixing_duration: mix_time,
        sweep_duration,
        first_law_residual: ensemble.first_law_residual(initial_kinetic),
        events_processed: ensemble.events_processed(),
    };
    Ok((measurement, recorder.records))
}

/// Mix and reversibly un-mix a same-species gas, returning the invested
/// work over `T`; converges to `2 N ln 2` as the membrane speed goes to 0.
pub fn measure_mixing_entropy_by_demon(
    config: &DemonConfig,
) -> Result<DemonMeasurement, DemonError> {
    run_unmixing_protocol(config).map(|(measurement, _)| measurement)
}
