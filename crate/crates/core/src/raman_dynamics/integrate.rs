//! Equations of motion and the fixed-step RK4 integrator.

use num_complex::Complex64;

use super::kernel::{Kernel, Stage};
use super::pulse::PulseShape;
use super::system::DynamicalSystem;
use crate::error::{Error, Result};
use crate::linalg::{I, ZERO};

/// Amplitudes above this magnitude are treated as a blow-up.
pub const BLOWUP_LIMIT: f64 = 1e12;

/// Single-excitation amplitudes: optical coherences σ_jk (rows j = 1..3,
/// columns k = 4..9) and the spin coherence σ₂₃.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub sigma: [[Complex64; 6]; 3],
    pub sigma23: Complex64,
}

impl StateVector {
    pub const ZERO: StateVector = StateVector {
        sigma: [[ZERO; 6]; 3],
        sigma23: ZERO,
    };

    /// self + h·rate
    #[inline]
    #[cfg(test)]
    fn add_scaled(&self, h: f64, rate: &StateVector) -> StateVector {
        let mut out = *self;
        for j in 0..3 {
            for k in 0..6 {
                out.sigma[j][k] += rate.sigma[j][k] * h;
            }
        }
        out.sigma23 += rate.sigma23 * h;
        out
    }

    pub fn is_bounded(&self) -> bool {
        let ok = |z: &Complex64| z.re.abs() < BLOWUP_LIMIT && z.im.abs() < BLOWUP_LIMIT;
        self.sigma.iter().flatten().all(ok) && ok(&self.sigma23)
    }

    /// Largest |σ_1k| or |σ_3k|.
    pub fn max_spectator(&self) -> f64 {
        self.sigma[0]
            .iter()
            .chain(&self.sigma[2])
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Time-dependent drives evaluated at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drives {
    pub e_in: Complex64,
    /// Ω(t) for unit projection, rad/s, including any phase modulation.
    pub control: Complex64,
    /// e^{−iδ_g t}
    pub frame_phase: Complex64,
}

/// Drive schedule of one integration phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub input: Option<PulseShape>,
    pub control: PulseShape,
    /// Peak Rabi frequency for unit projection, rad/s.
    pub peak_rabi: f64,
}

impl Drive {
    /// Drive values for the packed kernel. The control and input envelopes
    /// share one exponential when they coincide.
    #[inline]
    pub(crate) fn stage(&self, t: f64, system: &DynamicalSystem, with_phase: bool) -> Stage {
        let env = self.control.envelope(t);
        let e_in = match self.input {
            Some(p) if p.center == self.control.center && p.width == self.control.width => {
                p.amplitude_from_envelope(env)
            }
            Some(p) => p.amplitude(t),
            None => 0.0,
        };
        let mut control = Complex64::new(self.peak_rabi * env, 0.0);
        if system.phase_modulation.is_some() {
            control *= system.modulation(t);
        }
        let phase = if with_phase {
            Complex64::from_polar(1.0, -system.delta_g * t)
        } else {
            ZERO
        };
        Stage { e_in, control, phase }
    }

    #[inline]
    pub fn at(&self, t: f64, system: &DynamicalSystem) -> Drives {
        let e_in = self.input.map_or(0.0, |p| p.amplitude(t));
        let mut control = Complex64::new(self.peak_rabi * self.control.envelope(t), 0.0);
        if system.phase_modulation.is_some() {
            control *= system.modulation(t);
        }
        Drives {
            e_in: Complex64::new(e_in, 0.0),
            control,
            frame_phase: Complex64::from_polar(1.0, -system.delta_g * t),
        }
    }
}

/// Adiabatically eliminated cavity amplitude
/// E = [√(2κ)E_in + iΣ_k(G*(1,k)σ_1k + G*(2,k)σ_2k) + iΣ_k G*(3,k)σ_3k e^{−iδ_g t}] / κ.
#[inline]
pub fn cavity_field_with(state: &StateVector, system: &DynamicalSystem, e_in: Complex64, frame_phase: Complex64) -> Complex64 {
    let mut same_frame = ZERO;
    let mut shifted = ZERO;
    for k in 0..6 {
        if !system.active[k] {
            continue;
        }
        same_frame += system.g[1][k].conj() * state.sigma[1][k];
        if system.include_spectator_coherences {
            same_frame += system.g[0][k].conj() * state.sigma[0][k];
            shifted += system.g[2][k].conj() * state.sigma[2][k];
        }
    }
    ((2.0 * system.kappa).sqrt() * e_in + I * (same_frame + shifted * frame_phase)) / system.kappa
}

pub fn cavity_field(state: &StateVector, t: f64, system: &DynamicalSystem, e_in: Complex64) -> Complex64 {
    let phase = Complex64::from_polar(1.0, -system.delta_g * t);
    cavity_field_with(state, system, e_in, phase)
}

/// E_out = −E_in + √(2κ)E.
#[inline]
pub fn output_field(e_in: Complex64, e_cav: Complex64, system: &DynamicalSystem) -> Complex64 {
    -e_in + (2.0 * system.kappa).sqrt() * e_cav
}

/// Right-hand side of the linearized equations. Only |+⟩ carries the
/// classical population N, so σ_1k and σ_3k have no linear source.
#[inline]
pub fn derivative_with(state: &StateVector, system: &DynamicalSystem, d: &Drives) -> StateVector {
    let n = system.ensemble_size;
    let gamma = system.optical_decay;
    let e = cavity_field_with(state, system, d.e_in, d.frame_phase);
    let mut rate = StateVector::ZERO;
    let mut spin_source = ZERO;
    let noise = system.include_control_noise_drive;
    for k in 0..6 {
        if !system.active[k] {
            continue;
        }
        let s2 = state.sigma[1][k];
        let omega3 = system.g_y[2][k] * d.control;
        let mut r2 = Complex64::new(-gamma, system.delta[1][k]) * s2
            + I * (system.g[1][k] * n * e + omega3 * state.sigma23);
        if noise {
            r2 += I * system.g_y[1][k] * d.control * n * d.frame_phase;
        }
        rate.sigma[1][k] = r2;
        spin_source += omega3.conj() * s2;
        if system.include_spectator_coherences {
            rate.sigma[0][k] = Complex64::new(-gamma, system.delta[0][k]) * state.sigma[0][k];
            rate.sigma[2][k] = Complex64::new(-gamma, system.delta[2][k]) * state.sigma[2][k];
        }
    }
    rate.sigma23 = Complex64::new(-system.spin_decay, -system.two_photon_detuning) * state.sigma23
        + I * spin_source;
    rate
}

pub fn derivative(
    state: &StateVector,
    t: f64,
    system: &DynamicalSystem,
    e_in: Complex64,
    control: Complex64,
) -> StateVector {
    let d = Drives {
        e_in,
        control,
        frame_phase: Complex64::from_polar(1.0, -system.delta_g * t),
    };
    derivative_with(state, system, &d)
}

/// Integration interval and output sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    /// Upper bound on the step; the actual step divides the interval evenly.
    pub dt: f64,
    /// Spacing of recorded samples. Every step is recorded when this is
    /// not larger than the step.
    pub sample_interval: f64,
}

impl TimeGrid {
    pub fn steps(&self) -> usize {
        (((self.t1 - self.t0) / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.steps() as f64
    }

    fn record_every(&self) -> usize {
        ((self.sample_interval / self.step()) * (1.0 + 1e-12)).floor().max(1.0) as usize
    }
}

/// Trajectory of one or more integration phases.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimulationResult {
    pub t: Vec<f64>,
    pub e_in: Vec<Complex64>,
    pub e_cav: Vec<Complex64>,
    pub e_out: Vec<Complex64>,
    pub sigma23: Vec<Complex64>,
    pub final_state: StateVector,
    /// max_t of |σ_1k|, |σ_3k| over every step.
    pub max_spectator: f64,
    /// Step actually used, s.
    pub dt: f64,
    pub steps: usize,
    pub ensemble_size: f64,
}

impl SimulationResult {
    fn push(&mut self, t: f64, state: &StateVector, system: &DynamicalSystem, drive: &Drive) {
        let d = drive.at(t, system);
        let e = cavity_field_with(state, system, d.e_in, d.frame_phase);
        self.t.push(t);
        self.e_in.push(d.e_in);
        self.e_cav.push(e);
        self.e_out.push(output_field(d.e_in, e, system));
        self.sigma23.push(state.sigma23);
    }

    /// Appends a later phase.
    pub fn extend(&mut self, other: SimulationResult) {
        self.t.extend(other.t);
        self.e_in.extend(other.e_in);
        self.e_cav.extend(other.e_cav);
        self.e_out.extend(other.e_out);
        self.sigma23.extend(other.sigma23);
        self.final_state = other.final_state;
        self.max_spectator = self.max_spectator.max(other.max_spectator);
        self.dt = self.dt.max(other.dt);
        self.steps += other.steps;
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Fixed-step RK4 over `grid`. Fails with `StepTooLarge` if the requested
/// step violates the stability precondition.
pub fn integrate(
    system: &DynamicalSystem,
    drive: &Drive,
    initial: StateVector,
    grid: &TimeGrid,
) -> Result<SimulationResult> {
    system.check_step(grid.dt)?;
    let n = grid.steps();
    let h = grid.step();
    let every = grid.record_every();

    let mut out = SimulationResult {
        dt: h,
        steps: n,
        ensemble_size: system.ensemble_size,
        ..Default::default()
    };
    let capacity = n / every + 2;
    out.t.reserve(capacity);
    out.e_in.reserve(capacity);
    out.e_cav.reserve(capacity);
    out.e_out.reserve(capacity);
    out.sigma23.reserve(capacity);

    let kernel = Kernel::new(system);
    let mut y = initial;
    let mut p = kernel.pack(&y);
    let mut max_spectator_sq = kernel.spectator_norm_sqr(&p);
    let mut live = kernel.spectators_live(&p);
    out.push(grid.t0, &y, system, drive);
    let mut s0 = drive.stage(grid.t0, system, kernel.needs_phase(live));
    let mut until_record = every;
    for i in 0..n {
        let t = grid.t0 + i as f64 * h;
        let t_next = grid.t0 + (i + 1) as f64 * h;
        let phase = kernel.needs_phase(live);
        if phase && s0.phase == ZERO {
            s0 = drive.stage(t, system, true);
        }
        let s_mid = drive.stage(t + 0.5 * h, system, phase);
        let s1 = drive.stage(t_next, system, phase);
        p = kernel.step(&p, h, &s0, &s_mid, &s1, live);
        s0 = s1;

        if live {
            max_spectator_sq = max_spectator_sq.max(kernel.spectator_norm_sqr(&p));
        }
        if (i & 15 == 15 || i + 1 == n) && !kernel.is_bounded(&p) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        until_record -= 1;
        if until_record == 0 || i + 1 == n {
            until_record = every;
            kernel.unpack(&p, &mut y);
            out.push(t_next, &y, system, drive);
            live = kernel.spectators_live(&p);
        }
    }
    kernel.unpack(&p, &mut y);
    out.final_state = y;
    out.max_spectator = max_spectator_sq.sqrt();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raman_dynamics::pulse::gaussian_pulse;

    fn bare_system() -> DynamicalSystem {
        DynamicalSystem {
            delta: [[0.0; 6]; 3],
            g: [[ZERO; 6]; 3],
            g_y: [[ZERO; 6]; 3],
            active: [true; 6],
            ensemble_size: 100.0,
            kappa: 1e12,
            optical_decay: 1e9,
            spin_decay: 1e6,
            delta_g: 4e7,
            two_photon_detuning: 0.0,
            peak_rabi_storage: 0.0,
            peak_rabi_retrieval: 0.0,
            include_control_noise_drive: false,
            include_spectator_coherences: true,
            phase_modulation: None,
            conjugate_modulation: false,
        }
    }

    #[test]
    fn empty_cavity_field() {
        let s = bare_system();
        let x = Complex64::new(0.3, -0.2);
        let e = cavity_field(&StateVector::ZERO, 1e-9, &s, x);
        assert!((e - x * (2.0 / s.kappa).sqrt()).norm() < 1e-18);
        assert!((output_field(x, e, &s) - x).norm() < 1e-12);
    }

    #[test]
    fn single_coherence_field() {
        let mut s = bare_system();
        s.g[1][5] = Complex64::new(2e9, 1e9);
        let mut y = StateVector::ZERO;
        y.sigma[1][5] = Complex64::new(0.5, 0.25);
        let e = cavity_field(&y, 0.0, &s, ZERO);
        let expect = I * s.g[1][5].conj() * y.sigma[1][5] / s.kappa;
        assert!((e - expect).norm() < 1e-15 * expect.norm().max(1.0));
    }

    #[test]
    fn free_spin_decay_is_exponential() {
        let s = bare_system();
        let mut y = StateVector::ZERO;
        y.sigma23 = Complex64::new(1.0, 0.0);
        let drive = Drive {
            input: None,
            control: gaussian_pulse(1e-8, 0.0),
            peak_rabi: 0.0,
        };
        let grid = TimeGrid { t0: 0.0, t1: 1e-6, dt: 1e-11, sample_interval: 1e-7 };
        let r = integrate(&s, &drive, y, &grid).unwrap();
        let expect = (-s.spin_decay * 1e-6).exp();
        assert!((r.final_state.sigma23.re - expect).abs() < 1e-12);
        assert_eq!(r.t.len(), 11);
    }

    /// Two coupled amplitudes a (optical, detuning Δ) and b (spin) driven by
    /// a constant Ω have the closed-form solution of a two-level system.
    #[test]
    fn lambda_reduction_matches_two_level_solution() {
        let mut s = bare_system();
        s.optical_decay = 0.0;
        s.spin_decay = 0.0;
        s.active = [false, false, false, false, false, true];
        let delta = 2e10;
        let omega = 1e9;
        s.delta[1][5] = delta;
        s.g_y[2][5] = Complex64::new(1.0, 0.0);
        // Control envelope that is flat over the run.
        let drive = Drive {
            input: None,
            control: gaussian_pulse(1.0, 0.0),
            peak_rabi: omega,
        };
        let mut y = StateVector::ZERO;
        y.sigma23 = Complex64::new(1.0, 0.0);
        let t_end = 20e-9;
        let grid = TimeGrid { t0: 0.0, t1: t_end, dt: 2e-13, sample_interval: 1.0 };
        let r = integrate(&s, &drive, y, &grid).unwrap();

        // ȧ = iΔa + iΩb, ḃ = iΩa with a(0) = 0, b(0) = 1.
        let w = (delta * delta + 4.0 * omega * omega).sqrt();
        let lp = I * (delta + w) / 2.0;
        let lm = I * (delta - w) / 2.0;
        let b = (lp * (lm * t_end).exp() - lm * (lp * t_end).exp()) / (lp - lm);
        assert!((r.final_state.sigma23 - b).norm() < 1e-6, "{} vs {b}", r.final_state.sigma23);
        // Effective far-detuned picture: population stays in b, phase −Ω²t/Δ.
        let stark = (-I * omega * omega / delta * t_end).exp();
        assert!((r.final_state.sigma23 - stark).norm() < 0.05);
    }

    /// The packed kernel used by `integrate` against a plain RK4 built on
    /// `derivative_with`, with spectators, noise drive and both branches on.
    #[test]
    fn packed_kernel_matches_reference_derivative() {
        let mut s = bare_system();
        s.include_control_noise_drive = true;
        s.phase_modulation = Some(crate::params::PhaseModulation::new(|t| 3e8 * t));
        for j in 0..3 {
            for k in 0..6 {
                let x = (j * 6 + k) as f64;
                s.delta[j][k] = 1e9 * (x - 8.0);
                s.g[j][k] = Complex64::new(1e8 * (1.0 + x).sqrt(), -3e7 * x);
                s.g_y[j][k] = Complex64::new((0.3 * x).cos(), (0.7 * x).sin());
            }
        }
        s.active = [true, false, true, true, true, true];
        s.two_photon_detuning = 2e6;
        let mut y = StateVector::ZERO;
        for j in 0..3 {
            for k in 0..6 {
                y.sigma[j][k] = Complex64::new(0.01 * (j + 1) as f64, -0.02 * k as f64);
            }
        }
        y.sigma23 = Complex64::new(0.4, 0.1);
        let drive = Drive {
            input: Some(crate::raman_dynamics::gaussian_pulse(3e-9, 1e-9)),
            control: crate::raman_dynamics::gaussian_pulse(2e-9, 2e-9),
            peak_rabi: 2e9,
        };
        let (t0, h, steps) = (0.5e-9, 2e-13, 50);
        let grid = TimeGrid { t0, t1: t0 + h * steps as f64, dt: h, sample_interval: 1.0 };
        let fast = integrate(&s, &drive, y, &grid).unwrap().final_state;

        let mut r = y;
        for i in 0..steps {
            let t = t0 + i as f64 * h;
            let d0 = drive.at(t, &s);
            let dm = drive.at(t + 0.5 * h, &s);
            let d1 = drive.at(t + h, &s);
            let k1 = derivative_with(&r, &s, &d0);
            let k2 = derivative_with(&r.add_scaled(0.5 * h, &k1), &s, &dm);
            let k3 = derivative_with(&r.add_scaled(0.5 * h, &k2), &s, &dm);
            let k4 = derivative_with(&r.add_scaled(h, &k3), &s, &d1);
            r = r
                .add_scaled(h / 6.0, &k1)
                .add_scaled(h / 3.0, &k2)
                .add_scaled(h / 3.0, &k3)
                .add_scaled(h / 6.0, &k4);
        }
        for j in 0..3 {
            for k in 0..6 {
                let (a, b) = (fast.sigma[j][k], r.sigma[j][k]);
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "({j},{k}) {a} vs {b}");
            }
        }
        assert!((fast.sigma23 - r.sigma23).norm() < 1e-12);
    }

    #[test]
    fn step_precondition_is_enforced() {
        let mut s = bare_system();
        s.delta[1][5] = 1e12;
        let drive = Drive { input: None, control: gaussian_pulse(1e-8, 0.0), peak_rabi: 0.0 };
        let grid = TimeGrid { t0: 0.0, t1: 1e-9, dt: 1e-13, sample_interval: 1e-10 };
        assert!(matches!(
            integrate(&s, &drive, StateVector::ZERO, &grid),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn blow_up_is_detected() {
        let mut s = bare_system();
        s.optical_decay = -5e10;
        let mut y = StateVector::ZERO;
        y.sigma[1][0] = Complex64::new(1.0, 0.0);
        let drive = Drive { input: None, control: gaussian_pulse(1e-8, 0.0), peak_rabi: 0.0 };
        let grid = TimeGrid { t0: 0.0, t1: 1e-9, dt: 2e-13, sample_interval: 1e-10 };
        assert!(matches!(
            integrate(&s, &drive, y, &grid),
            Err(Error::NonFiniteState { .. })
        ));
    }
}
