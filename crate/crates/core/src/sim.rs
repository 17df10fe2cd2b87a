//! Seeded decoding simulations.
//!
//! Each trial draws a random message and an error of exact weight from its
//! own ChaCha stream keyed by `(seed, weight, trial)`, so results do not depend
//! on thread scheduling.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decoder::{DecoderError, DecoderPlan};
use crate::gf::{Fe, Field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    KeOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct Environment {
    pub field: String,
    pub n: usize,
    pub k: usize,
    pub d_star: i64,
    pub t: usize,
    pub g: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimRow {
    pub mode: Mode,
    pub weight: usize,
    pub trials: usize,
    pub successes: usize,
    pub failures: usize,
    pub miscorrections: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_decode_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub environment: Environment,
    pub seed: u64,
    pub rows: Vec<SimRow>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Success,
    Failure,
    Miscorrection,
}

/// Received word for one trial: `(codeword, codeword + error)`.
pub fn trial_word(plan: &DecoderPlan, seed: u64, weight: usize, trial: u64) -> (Vec<Fe>, Vec<Fe>) {
    let code = plan.code();
    let field = code.curve().field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((weight as u64) << 40) | trial);
    let msg: Vec<Fe> = (0..code.k()).map(|_| random_element(field, &mut rng)).collect();
    let cw = code.encode(&msg).expect("message length matches k");
    let mut y = cw.clone();
    for j in sample(&mut rng, code.n(), weight.min(code.n())) {
        y[j] = field.add(y[j], random_nonzero(field, &mut rng));
    }
    (cw, y)
}

pub fn random_element<R: Rng>(field: &Field, rng: &mut R) -> Fe {
    field.from_raw(rng.gen_range(0..field.q())).expect("raw value below q")
}

pub fn random_nonzero<R: Rng>(field: &Field, rng: &mut R) -> Fe {
    field.from_raw(rng.gen_range(1..field.q())).expect("raw value below q")
}

fn run_trial(plan: &DecoderPlan, mode: Mode, seed: u64, weight: usize, trial: u64) -> Result<(Outcome, f64), DecoderError> {
    let (cw, y) = trial_word(plan, seed, weight, trial);
    let start = Instant::now();
    let res = match mode {
        Mode::Full => plan.decode(&y)?,
        Mode::KeOnly => plan.decode_ke_only(&y)?,
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let outcome = match &res.codeword {
        Some(c) if *c == cw => Outcome::Success,
        Some(_) => Outcome::Miscorrection,
        None => Outcome::Failure,
    };
    Ok((outcome, ms))
}

/// Runs `trials` decodes per weight and mode.
pub fn simulate(
    plan: &DecoderPlan,
    weights: &[usize],
    trials: usize,
    seed: u64,
    modes: &[Mode],
    timing: bool,
) -> Result<SimReport, DecoderError> {
    let code = plan.code();
    let mut rows = Vec::new();
    for &mode in modes {
        for &w in weights {
            let results = (0..trials as u64)
                .into_par_iter()
                .map(|i| run_trial(plan, mode, seed, w, i))
                .collect::<Result<Vec<_>, _>>()?;
            let count = |o: Outcome| results.iter().filter(|r| r.0 == o).count();
            let total_ms: f64 = results.iter().map(|r| r.1).sum();
            rows.push(SimRow {
                mode,
                weight: w,
                trials,
                successes: count(Outcome::Success),
                failures: count(Outcome::Failure),
                miscorrections: count(Outcome::Miscorrection),
                mean_decode_ms: (timing && trials > 0).then(|| total_ms / trials as f64),
            });
        }
    }
    Ok(SimReport {
        environment: Environment {
            field: format!("GF({}^{})", code.curve().field().p(), code.curve().field().m()),
            n: code.n(),
            k: code.k(),
            d_star: code.d_star(),
            t: code.t(),
            g: code.curve().genus(),
        },
        seed,
        rows,
    })
}

impl SimReport {
    /// Aligned text rendering of the rows.
    pub fn table(&self) -> String {
        let e = &self.environment;
        let mut out = format!(
            "{} n={} k={} d*={} t={} g={} seed={}\n",
            e.field, e.n, e.k, e.d_star, e.t, e.g, self.seed
        );
        let _ = writeln!(
            out,
            "{:<8} {:>6} {:>7} {:>9} {:>8} {:>14} {:>9}",
            "mode", "weight", "trials", "successes", "failures", "miscorrections", "mean_ms"
        );
        for r in &self.rows {
            let mode = match r.mode {
                Mode::Full => "full",
                Mode::KeOnly => "ke-only",
            };
            let ms = r.mean_decode_ms.map(|m| format!("{m:.3}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<8} {:>6} {:>7} {:>9} {:>8} {:>14} {:>9}",
                mode, r.weight, r.trials, r.successes, r.failures, r.miscorrections, ms
            );
        }
        out
    }
}
