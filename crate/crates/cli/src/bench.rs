//! Streaming detector throughput.

use std::time::{Duration, Instant};

use rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recind_core::simulator::open_unit;
use recind_core::{Detector, SemanticsMode};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{TOOL, VERSION};

pub const DEFAULT_OBSERVATIONS: u64 = 10_000_000;
pub const DEFAULT_DIM: usize = 4;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrontSample {
    pub observations: u64,
    pub front_size: usize,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub mode: String,
    pub observations: u64,
    pub d: usize,
    pub seed: u64,
    /// Detector time only; sampling is excluded.
    pub seconds: f64,
    pub observations_per_second: f64,
    pub records: u64,
    pub mean_front_size: f64,
    pub final_front_size: usize,
    /// Front size after 1, 2, 4, … observations and at the end.
    pub front_trace: Vec<FrontSample>,
}

/// Feeds `observations` iid uniform points in `[0,1]^d` through one detector.
pub fn run_bench(observations: u64, d: usize, mode: SemanticsMode, seed: u64) -> CliResult<BenchReport> {
    if d == 0 {
        return Err(CliError::input("d must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut det = Detector::new(mode);
    let mut buf = vec![0.0; CHUNK * d];
    let mut elapsed = Duration::ZERO;
    let mut front_total: u128 = 0;
    let mut trace = Vec::new();
    let mut next_mark = 1u64;
    let mut done = 0u64;
    while done < observations {
        let take = (observations - done).min(CHUNK as u64) as usize;
        let chunk = &mut buf[..take * d];
        for x in chunk.iter_mut() {
            *x = open_unit(&mut rng);
        }
        let start = Instant::now();
        for x in chunk.chunks_exact(d) {
            det.step_coords(x)?;
            let size = det.front_len();
            front_total += size as u128;
            done += 1;
            if done == next_mark {
                trace.push(FrontSample {
                    observations: done,
                    front_size: size,
                });
                next_mark = next_mark.saturating_mul(2);
            }
        }
        elapsed += start.elapsed();
    }
    if trace.last().is_some_and(|s| s.observations != observations) {
        trace.push(FrontSample {
            observations,
            front_size: det.front_len(),
        });
    }
    let seconds = elapsed.as_secs_f64();
    Ok(BenchReport {
        tool: TOOL,
        version: VERSION,
        mode: mode.to_string(),
        observations,
        d,
        seed,
        seconds,
        observations_per_second: if seconds > 0.0 { observations as f64 / seconds } else { f64::INFINITY },
        records: det.count(),
        mean_front_size: if observations > 0 { front_total as f64 / observations as f64 } else { 0.0 },
        final_front_size: det.front_len(),
        front_trace: trace,
    })
}

/// `mode,observations,front_size` rows.
pub fn front_trace_csv(reports: &[BenchReport]) -> String {
    let mut out = String::from("mode,observations,front_size\n");
    for r in reports {
        for s in &r.front_trace {
            out.push_str(&format!("{},{},{}\n", r.mode, s.observations, s.front_size));
        }
    }
    out
}
