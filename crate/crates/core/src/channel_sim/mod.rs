//! Probing geometry, large-scale and small-scale fading, and RSSI trace
//! generation for Alice, Bob and a ring of eavesdroppers around Alice.

mod fading;
mod trace;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fading::{RandomWalk, ShadowingProcess, SosFader};
pub use trace::{export_trace, ingest_trace, write_trace, ColumnMap, Party, ProbeTrace, TraceSource};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier wavelength in meters for a frequency in Hz.
pub fn wavelength_for(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// Placement of Alice, Bob and the eavesdropper ring.
///
/// Alice sits at the origin and Bob at `(d, 0)`. Eve `m` sits at distance `r`
/// from Alice at bearing `alpha + 2π(m-1)/M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    d: f64,
    r: f64,
    alpha: f64,
    eves: usize,
    wavelength: f64,
}

impl Geometry {
    pub fn new(d: f64, r: f64, alpha: f64, eves: usize, wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::config("wavelength", "must be positive"));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::config("d", "must be positive"));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::config("r", "must be positive"));
        }
        if eves < 1 {
            return Err(Error::config("M", "needs at least one eavesdropper"));
        }
        if !(0.0..2.0 * PI).contains(&alpha) {
            return Err(Error::config("alpha", "must lie in [0, 2π)"));
        }
        if r < wavelength / 2.0 {
            return Err(Error::config(
                "r",
                format!("{r} m is inside half a wavelength ({} m)", wavelength / 2.0),
            ));
        }
        if d <= r {
            return Err(Error::config("d", format!("{d} m must exceed r = {r} m")));
        }
        if d < 10.0 * r {
            log::warn!("d = {d} m is less than 10·r = {} m; far-field collusion premise is weak", 10.0 * r);
        }
        Ok(Geometry {
            d,
            r,
            alpha,
            eves,
            wavelength,
        })
    }

    /// Geometry with the ring radius expressed in wavelengths of a carrier.
    pub fn with_carrier(d: f64, r_wavelengths: f64, alpha: f64, eves: usize, carrier_hz: f64) -> Result<Self> {
        let lambda = wavelength_for(carrier_hz);
        Geometry::new(d, r_wavelengths * lambda, alpha, eves, lambda)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eve_count(&self) -> usize {
        self.eves
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Bearing of Eve `m` (1-based) as seen from Alice.
    pub fn eve_bearing(&self, m: usize) -> Result<f64> {
        self.check_eve(m)?;
        Ok(self.alpha + 2.0 * PI * (m - 1) as f64 / self.eves as f64)
    }

    /// Planar position of Eve `m` (1-based), Alice at the origin.
    pub fn eve_position(&self, m: usize) -> Result<[f64; 2]> {
        let theta = self.eve_bearing(m)?;
        Ok([self.r * theta.cos(), self.r * theta.sin()])
    }

    fn check_eve(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.eves {
            return Err(Error::Index {
                what: "eavesdropper",
                index: m,
                max: self.eves,
            });
        }
        Ok(())
    }
}

/// Distance from Bob to Eve `m` by the law of cosines.
pub fn eve_distance(geometry: &Geometry, m: usize) -> Result<f64> {
    let theta = geometry.eve_bearing(m)?;
    let (d, r) = (geometry.d, geometry.r);
    let sq = d * d + r * r - 2.0 * d * r * theta.cos();
    // rounding can push a collinear configuration a hair outside [d-r, d+r]
    Ok(sq.max(0.0).sqrt().clamp(d - r, d + r))
}

/// Path loss, shadowing, and their temporal correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LargeScaleParams {
    /// Path-loss exponent.
    pub gamma: f64,
    /// Reference distance in meters.
    pub d0: f64,
    /// Shadowing standard deviation in dB.
    pub sigma_chi: f64,
    /// Exponential decorrelation distance of shadowing along Bob's path, meters.
    pub shadow_decorr_dist: f64,
}

impl Default for LargeScaleParams {
    fn default() -> Self {
        LargeScaleParams {
            gamma: 3.0,
            d0: 1.0,
            sigma_chi: 4.0,
            shadow_decorr_dist: 10.0,
        }
    }
}

impl LargeScaleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::config("gamma", "must be positive"));
        }
        if !(self.d0.is_finite() && self.d0 > 0.0) {
            return Err(Error::config("d0", "must be positive"));
        }
        if !(self.sigma_chi.is_finite() && self.sigma_chi >= 0.0) {
            return Err(Error::config("sigma_chi", "must be non-negative"));
        }
        if !(self.shadow_decorr_dist.is_finite() && self.shadow_decorr_dist > 0.0) {
            return Err(Error::config("shadow_decorr_dist", "must be positive"));
        }
        Ok(())
    }
}

/// Log-distance path loss `10·γ·log10(distance/d0)` in dB.
pub fn path_loss_db(ls: &LargeScaleParams, distance: f64) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    Ok(10.0 * ls.gamma * (distance / ls.d0).log10())
}

/// Transmitter and receiver characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioParams {
    /// Transmit power, dBm.
    pub pt_dbm: f64,
    /// Combined system gains, dB.
    pub gain_db: f64,
    /// Standard deviation of per-measurement receiver noise, dB.
    pub noise_sigma_db: f64,
    /// RSSI reporting granularity, dB.
    pub rssi_step_db: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            pt_dbm: 17.0,
            gain_db: 0.0,
            noise_sigma_db: 1.0,
            rssi_step_db: 1.0,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !self.pt_dbm.is_finite() {
            return Err(Error::config("pt_dbm", "must be finite"));
        }
        if !self.gain_db.is_finite() {
            return Err(Error::config("gain_db", "must be finite"));
        }
        if !(self.noise_sigma_db.is_finite() && self.noise_sigma_db >= 0.0) {
            return Err(Error::config("noise_sigma_db", "must be non-negative"));
        }
        if !(self.rssi_step_db.is_finite() && self.rssi_step_db > 0.0) {
            return Err(Error::config("rssi_step_db", "must be positive"));
        }
        Ok(())
    }

    /// Rounds to the reporting grid.
    pub fn quantize(&self, dbm: f64) -> f64 {
        (dbm / self.rssi_step_db).round() * self.rssi_step_db
    }

    /// Largest reportable RSSI: the unattenuated transmit level on the grid.
    pub fn ceiling_dbm(&self) -> f64 {
        ((self.pt_dbm + self.gain_db) / self.rssi_step_db).floor() * self.rssi_step_db
    }
}

/// Received power from the log-distance model with shadowing, dBm.
pub fn received_power_dbm(radio: &RadioParams, ls: &LargeScaleParams, distance: f64, chi_db: f64) -> Result<f64> {
    Ok(radio.pt_dbm + radio.gain_db - path_loss_db(ls, distance)? - chi_db)
}

/// Channel dynamics of a probing campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Nothing moves; only receiver noise varies.
    Static,
    /// Scatterers move; large-scale terms stay constant.
    MovingScatterers,
    /// Bob walks; scatterers are still.
    MovingBob,
    /// Bob walks among moving scatterers.
    MovingBobAndScatterers,
}

impl ScenarioKind {
    pub fn bob_moves(self) -> bool {
        matches!(self, ScenarioKind::MovingBob | ScenarioKind::MovingBobAndScatterers)
    }

    pub fn scatterers_move(self) -> bool {
        matches!(self, ScenarioKind::MovingScatterers | ScenarioKind::MovingBobAndScatterers)
    }

    /// Multiplier on `small_scale_sigma_db`.
    ///
    /// A walking Bob alone produces weaker multipath variation than moving
    /// scatterers do.
    pub fn small_scale_factor(self) -> f64 {
        match self {
            ScenarioKind::Static => 0.0,
            ScenarioKind::MovingScatterers | ScenarioKind::MovingBobAndScatterers => 1.0,
            ScenarioKind::MovingBob => 0.6,
        }
    }
}

/// One probing campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Bob's walking speed, m/s.
    pub bob_speed: f64,
    /// Duration of one bidirectional probing round, s.
    pub probe_interval: f64,
    pub n_rounds: usize,
    /// Coherence time of the scatterer-driven small-scale fading, s.
    pub coherence_time: f64,
    /// Standard deviation of the small-scale term in dB before the
    /// scenario multiplier.
    pub small_scale_sigma_db: f64,
    /// Half-width of the square arena Bob walks in, centered on his start.
    pub arena_half_width: f64,
    /// Heading diffusion of Bob's walk, rad/√s.
    pub heading_sigma: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        ScenarioSpec {
            kind,
            bob_speed: 1.0,
            probe_interval: 0.04,
            n_rounds: 10_000,
            coherence_time: 0.15,
            small_scale_sigma_db: 4.0,
            arena_half_width: 40.0,
            heading_sigma: 0.6,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rounds < 2 {
            return Err(Error::config("n_rounds", "needs at least 2 rounds"));
        }
        if !(self.probe_interval.is_finite() && self.probe_interval > 0.0) {
            return Err(Error::config("probe_interval", "must be positive"));
        }
        if !(self.coherence_time.is_finite() && self.coherence_time > 0.0) {
            return Err(Error::config("coherence_time", "must be positive"));
        }
        if self.probe_interval >= self.coherence_time {
            return Err(Error::config(
                "probe_interval",
                format!(
                    "{} s must be shorter than the coherence time {} s",
                    self.probe_interval, self.coherence_time
                ),
            ));
        }
        if !(self.bob_speed.is_finite() && self.bob_speed >= 0.0) {
            return Err(Error::config("bob_speed", "must be non-negative"));
        }
        if !(self.small_scale_sigma_db.is_finite() && self.small_scale_sigma_db >= 0.0) {
            return Err(Error::config("small_scale_sigma_db", "must be non-negative"));
        }
        if !(self.arena_half_width.is_finite() && self.arena_half_width > 0.0) {
            return Err(Error::config("arena_half_width", "must be positive"));
        }
        if !(self.heading_sigma.is_finite() && self.heading_sigma >= 0.0) {
            return Err(Error::config("heading_sigma", "must be non-negative"));
        }
        Ok(())
    }

    /// Maximum Doppler shift driving the small-scale fading, Hz.
    ///
    /// Scatterer motion maps the coherence time through `T_c ≈ 0.423 / f_D`;
    /// Bob's motion contributes `v / λ`.
    pub fn doppler_hz(&self, wavelength: f64) -> f64 {
        let scatter = if self.kind.scatterers_move() {
            0.423 / self.coherence_time
        } else {
            0.0
        };
        let walk = if self.kind.bob_moves() {
            self.bob_speed / wavelength
        } else {
            0.0
        };
        scatter.max(walk)
    }
}

// Independent random streams of one simulation.
const STREAM_WALK: u64 = 1;
const STREAM_SHADOW: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_FADING: u64 = 16;

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Simulates one probing campaign.
///
/// Per round, Bob's packet reaches Alice and every Eve; Alice's packet
/// reaches Bob. The A↔B large-scale and small-scale terms are reciprocal,
/// the shadowing is common to Alice and the Eves, and each Eve link carries
/// its own small-scale fading. Values are rounded to the RSSI grid.
pub fn simulate_trace(
    spec: &ScenarioSpec,
    geom: &Geometry,
    ls: &LargeScaleParams,
    radio: &RadioParams,
) -> Result<ProbeTrace> {
    spec.validate()?;
    ls.validate()?;
    radio.validate()?;
    if spec.kind.bob_moves() && spec.arena_half_width >= geom.d() - geom.r() {
        return Err(Error::config(
            "arena_half_width",
            format!(
                "{} m lets Bob reach the eavesdropper ring (d - r = {} m)",
                spec.arena_half_width,
                geom.d() - geom.r()
            ),
        ));
    }

    let n = spec.n_rounds;
    let m_eves = geom.eve_count();
    let dt = spec.probe_interval;
    let eve_pos: Vec<[f64; 2]> = (1..=m_eves).map(|m| geom.eve_position(m)).collect::<Result<_>>()?;

    let mut walk_rng = stream_rng(spec.seed, STREAM_WALK);
    let mut shadow_rng = stream_rng(spec.seed, STREAM_SHADOW);
    let mut noise_rng = stream_rng(spec.seed, STREAM_NOISE);

    let mut walk = RandomWalk::new(
        [geom.d(), 0.0],
        spec.arena_half_width,
        walk_rng.random_range(0.0..2.0 * PI),
    );
    let mut shadow = ShadowingProcess::new(ls.sigma_chi, ls.shadow_decorr_dist, &mut shadow_rng);

    let doppler = spec.doppler_hz(geom.wavelength());
    let ss_sigma = spec.small_scale_sigma_db * spec.kind.small_scale_factor();
    let faders: Vec<SosFader> = (0..=m_eves as u64)
        .map(|k| SosFader::new(doppler, &mut stream_rng(spec.seed, STREAM_FADING + k)))
        .collect();

    let noise = Normal::new(0.0, radio.noise_sigma_db).expect("validated sigma");
    let ceiling = radio.ceiling_dbm();
    let report = |dbm: f64| radio.quantize(dbm).min(ceiling);

    let mut rows = vec![Vec::with_capacity(n); m_eves + 2];
    let mut timestamps = Vec::with_capacity(n);
    let step = spec.bob_speed * dt;
    let heading_sd = spec.heading_sigma * dt.sqrt();

    for round in 0..n {
        if round > 0 && spec.kind.bob_moves() {
            let travelled = walk.step(step, heading_sd, &mut walk_rng);
            shadow.advance(travelled, &mut shadow_rng);
        }
        let t = round as f64 * dt;
        let bob = walk.position();
        let chi = shadow.value();

        let ab = received_power_dbm(radio, ls, norm(bob), chi)? + ss_sigma * faders[0].normalized_db(t);
        rows[0].push(report(ab + noise.sample(&mut noise_rng)));
        rows[1].push(report(ab + noise.sample(&mut noise_rng)));
        for (k, pos) in eve_pos.iter().enumerate() {
            let dist = norm([bob[0] - pos[0], bob[1] - pos[1]]);
            let e = received_power_dbm(radio, ls, dist, chi)? + ss_sigma * faders[k + 1].normalized_db(t);
            rows[k + 2].push(report(e + noise.sample(&mut noise_rng)));
        }
        timestamps.push(t);
    }

    ProbeTrace::new(
        rows,
        timestamps,
        TraceSource::Simulated {
            scenario: *spec,
            geometry: *geom,
            large_scale: *ls,
            radio: *radio,
        },
    )
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}
