use std::f64::consts::{LN_10, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Mean of `10·log10(|h|²)` for a unit-power Rayleigh envelope.
pub const RAYLEIGH_DB_MEAN: f64 = -10.0 * EULER_GAMMA / LN_10;
/// Standard deviation of `10·log10(|h|²)` for a Rayleigh envelope.
pub const RAYLEIGH_DB_STD: f64 = 10.0 / LN_10 * PI / 2.449_489_742_783_178;

const SINUSOIDS: usize = 32;

/// Clarke-model Rayleigh fader built from a sum of sinusoids.
///
/// Arrival angles and phases are drawn once; the process is then a
/// deterministic function of time with unit mean power.
#[derive(Debug, Clone)]
pub struct SosFader {
    // 2π f_D cos(θ_k), rad/s
    omegas: Vec<f64>,
    phases: Vec<f64>,
}

impl SosFader {
    pub fn new<R: Rng + ?Sized>(doppler_hz: f64, rng: &mut R) -> Self {
        let mut omegas = Vec::with_capacity(SINUSOIDS);
        let mut phases = Vec::with_capacity(SINUSOIDS);
        for _ in 0..SINUSOIDS {
            let theta: f64 = rng.random_range(0.0..2.0 * PI);
            omegas.push(2.0 * PI * doppler_hz * theta.cos());
            phases.push(rng.random_range(0.0..2.0 * PI));
        }
        SosFader { omegas, phases }
    }

    /// Instantaneous power gain `|h(t)|²`.
    pub fn power(&self, t: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (w, p) in self.omegas.iter().zip(&self.phases) {
            let (s, c) = (w * t + p).sin_cos();
            re += c;
            im += s;
        }
        (re * re + im * im) / SINUSOIDS as f64
    }

    /// Envelope in dB, centred and scaled to unit variance using the
    /// Rayleigh log-power moments.
    pub fn normalized_db(&self, t: f64) -> f64 {
        let db = 10.0 * self.power(t).max(1e-6).log10();
        (db - RAYLEIGH_DB_MEAN) / RAYLEIGH_DB_STD
    }
}

/// Gaussian-in-dB shadowing with exponential autocorrelation over distance
/// travelled. Reported values are clipped at ±4σ.
#[derive(Debug, Clone)]
pub struct ShadowingProcess {
    sigma: f64,
    decorr: f64,
    state: f64,
}

impl ShadowingProcess {
    pub fn new<R: Rng + ?Sized>(sigma: f64, decorr: f64, rng: &mut R) -> Self {
        let w: f64 = StandardNormal.sample(rng);
        ShadowingProcess {
            sigma,
            decorr,
            state: sigma * w,
        }
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, distance: f64, rng: &mut R) {
        let rho = (-distance / self.decorr).exp();
        let w: f64 = StandardNormal.sample(rng);
        self.state = rho * self.state + (1.0 - rho * rho).sqrt() * self.sigma * w;
    }

    pub fn value(&self) -> f64 {
        let lim = 4.0 * self.sigma;
        self.state.clamp(-lim, lim)
    }
}

/// Planar walk with heading diffusion, reflected at the walls of a square
/// arena.
#[derive(Debug, Clone)]
pub struct RandomWalk {
    pos: [f64; 2],
    heading: f64,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl RandomWalk {
    pub fn new(center: [f64; 2], half_width: f64, heading: f64) -> Self {
        RandomWalk {
            pos: center,
            heading,
            lo: [center[0] - half_width, center[1] - half_width],
            hi: [center[0] + half_width, center[1] + half_width],
        }
    }

    pub fn position(&self) -> [f64; 2] {
        self.pos
    }

    /// Moves `len` meters and returns the distance travelled.
    pub fn step<R: Rng + ?Sized>(&mut self, len: f64, heading_sd: f64, rng: &mut R) -> f64 {
        let w: f64 = StandardNormal.sample(rng);
        self.heading += heading_sd * w;
        let mut next = [
            self.pos[0] + len * self.heading.cos(),
            self.pos[1] + len * self.heading.sin(),
        ];
        if next[0] < self.lo[0] || next[0] > self.hi[0] {
            let wall = if next[0] < self.lo[0] { self.lo[0] } else { self.hi[0] };
            next[0] = 2.0 * wall - next[0];
            self.heading = PI - self.heading;
        }
        if next[1] < self.lo[1] || next[1] > self.hi[1] {
            let wall = if next[1] < self.lo[1] { self.lo[1] } else { self.hi[1] };
            next[1] = 2.0 * wall - next[1];
            self.heading = -self.heading;
        }
        self.pos = next;
        len
    }
}
