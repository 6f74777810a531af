//! Monte Carlo time-tag generation.
//!
//! Time is split into fixed chunks; each chunk draws from its own ChaCha
//! stream keyed by `(seed, chunk index)`, so output is independent of thread
//! count and scheduling. Event counts are Poisson, positions uniform (CW) or
//! on pulse times (pulsed). Detector effects (gating, dead time) are applied
//! afterwards in a single ordered pass per detector.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::engine::branch::{BranchTable, Sampler, Slot};
use crate::engine::scenario::Scenario;
use crate::photonics::Arm;
use crate::{Error, Result};

const CHUNK_PS: u64 = 1_000_000_000;

/// Raw detector output of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    /// Strictly increasing timestamps (ps) of the signal and idler detectors.
    pub timestamps: [Vec<u64>; 2],
    pub duration_ps: u64,
    pub seed: u64,
    pub scenario_hash: [u8; 32],
}

impl SimulationOutput {
    pub fn signal(&self) -> &[u64] {
        &self.timestamps[0]
    }

    pub fn idler(&self) -> &[u64] {
        &self.timestamps[1]
    }

    pub fn singles_rate(&self, arm: usize) -> f64 {
        self.timestamps[arm].len() as f64 / (self.duration_ps as f64 * 1e-12)
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as u64
}

struct ChunkPlan<'a> {
    sc: &'a Scenario,
    table: Option<BranchTable>,
    rates: [f64; 7],
    slot_ps: u64,
    period_ps: Option<u64>,
    jitter: Option<Normal<f64>>,
}

impl ChunkPlan<'_> {
    fn run(&self, index: u64, start: u64, len: u64) -> Result<[Vec<u64>; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.sc.seed);
        rng.set_stream(index);
        let table = match &self.table {
            Some(t) => t.clone(),
            None => {
                let s = self.sc.settings;
                let phases = (
                    s.phase_pump + TAU * rng.random::<f64>(),
                    s.phase_signal + TAU * rng.random::<f64>(),
                    s.phase_idler + TAU * rng.random::<f64>(),
                );
                BranchTable::for_scenario(self.sc, phases)?
            }
        };
        let pair = Sampler::new(table.pair.iter().map(|&(s, i, p)| ((s, i), p)));
        let marg_s = Sampler::new(table.signal_marginal.iter().copied());
        let marg_i = Sampler::new(table.idler_marginal.iter().copied());
        let noise = Sampler::new(table.noise.iter().copied());

        let secs = len as f64 * 1e-12;
        let mut out = [Vec::new(), Vec::new()];
        let emit_time = |rng: &mut ChaCha8Rng| -> u64 {
            match self.period_ps {
                None => start + rng.random_range(0..len),
                Some(per) => start + per * rng.random_range(0..len.div_ceil(per)),
            }
        };
        let place = |rng: &mut ChaCha8Rng, out: &mut [Vec<u64>; 2], arm: usize, t0: u64, slot: Slot| {
            if let Some(j) = slot {
                let mut t = (t0 + j as u64 * self.slot_ps) as i64;
                if let Some(n) = &self.jitter {
                    t += n.sample(rng).round() as i64;
                }
                out[arm].push(t.max(0) as u64);
            }
        };

        let [both, s_only, i_only, noise_s, noise_i, dark_s, dark_i] = self.rates;
        for _ in 0..poisson(&mut rng, both * secs) {
            let t0 = emit_time(&mut rng);
            let (s, i) = pair.sample(rng.random());
            place(&mut rng, &mut out, 0, t0, s);
            place(&mut rng, &mut out, 1, t0, i);
        }
        for (arm, mean, sampler) in [(0, s_only, &marg_s), (1, i_only, &marg_i)] {
            for _ in 0..poisson(&mut rng, mean * secs) {
                let t0 = emit_time(&mut rng);
                let s = sampler.sample(rng.random());
                place(&mut rng, &mut out, arm, t0, s);
            }
        }
        for (arm, mean) in [(0, noise_s), (1, noise_i)] {
            for _ in 0..poisson(&mut rng, mean * secs) {
                let t0 = emit_time(&mut rng);
                let s = noise.sample(rng.random());
                place(&mut rng, &mut out, arm, t0, s);
            }
        }
        for (arm, mean) in [(0, dark_s), (1, dark_i)] {
            for _ in 0..poisson(&mut rng, mean * secs) {
                out[arm].push(start + rng.random_range(0..len));
            }
        }
        Ok(out)
    }
}

/// Gating and non-paralyzable dead time on a sorted raw stream.
fn apply_detector(raw: &[u64], sc: &Scenario, arm: usize, duration_ps: u64) -> Vec<u64> {
    let det = sc.detector(arm);
    let dead = (det.dead_time * 1e12).round() as u64;
    let gate = match (det.gate, sc.pulse_period_ps()) {
        (Some(g), Some(per)) => Some(((g.width_s * 1e12).round() as i64, per as i64, sc.gate_center_ps() as i64)),
        _ => None,
    };
    let mut out = Vec::with_capacity(raw.len());
    let mut last: Option<u64> = None;
    let mut last_gate: Option<i64> = None;
    for &t in raw {
        if t >= duration_ps {
            break;
        }
        let mut gate_index = None;
        if let Some((width, per, center)) = gate {
            let rel = t as i64 - center;
            let g = (rel + per / 2).div_euclid(per);
            if 2 * (rel - g * per).abs() > width || last_gate == Some(g) {
                continue;
            }
            gate_index = Some(g);
        }
        if last.is_none_or(|l| t > l && t - l >= dead) {
            out.push(t);
            last = Some(t);
            if gate_index.is_some() {
                last_gate = gate_index;
            }
        }
    }
    out
}

/// Runs the scenario and returns per-detector timestamps.
pub fn simulate(sc: &Scenario) -> Result<SimulationOutput> {
    sc.validate()?;
    let duration_ps = (sc.duration_s * 1e12).round() as u64;
    let period_ps = sc.pulse_period_ps();
    let chunk = match period_ps {
        Some(per) if per > 0 => per * CHUNK_PS.div_ceil(per),
        Some(_) => return Err(Error::InvalidParameter("pulse period rounds to zero".into())),
        None => CHUNK_PS,
    };
    let p = sc.pump.power_mw();
    let pairs = sc.source.pair_rate(p);
    let [ts, ti] = sc.transmissions();
    let k = sc.channel_pair;
    let rates = [
        pairs * ts * ti,
        pairs * ts * (1.0 - ti),
        pairs * (1.0 - ts) * ti,
        ts * sc.source.noise_rate(Arm::Signal, k, p),
        ti * sc.source.noise_rate(Arm::Idler, k, p),
        sc.signal_detector.dark_rate,
        sc.idler_detector.dark_rate,
    ];
    let s = sc.settings;
    let table = if s.phase_randomized {
        None
    } else {
        Some(BranchTable::for_scenario(sc, (s.phase_pump, s.phase_signal, s.phase_idler))?)
    };
    let jitter = if sc.jitter_ps > 0.0 {
        Some(Normal::new(0.0, sc.jitter_ps).map_err(|e| Error::InvalidParameter(e.to_string()))?)
    } else {
        None
    };
    let plan = ChunkPlan { sc, table, rates, slot_ps: sc.slot_ps(), period_ps, jitter };

    let n_chunks = duration_ps.div_ceil(chunk);
    let chunks: Vec<[Vec<u64>; 2]> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            plan.run(c, start, chunk.min(duration_ps - start).max(1))
        })
        .collect::<Result<_>>()?;

    let timestamps = [0, 1].map(|arm| {
        let mut raw: Vec<u64> = chunks.iter().flat_map(|c| c[arm].iter().copied()).collect();
        raw.par_sort_unstable();
        apply_detector(&raw, sc, arm, duration_ps)
    });
    Ok(SimulationOutput { timestamps, duration_ps, seed: sc.seed, scenario_hash: sc.hash() })
}
