//! Seeded random sweep of the pointwise deficit inequality and of the closed
//! form divergence against finite differences.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::CalibrationField;
use crate::frame::TangentFrame;
use crate::linalg::Point;

/// Deficit values below `-DEFICIT_TOL` count as violations.
pub const DEFICIT_TOL: f64 = 1e-10;
/// Largest accepted relative gap between closed form and finite differences.
pub const FD_TOL: f64 = 1e-6;
/// Beyond this `|y|` the closed form loses accuracy and reports carry a warning.
pub const CONDITIONING_YMAX: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub samples: usize,
    pub seed: u64,
    pub k_set: Vec<usize>,
    pub n_set: Vec<usize>,
    pub ymax: f64,
    /// Samples with `|x - y|` below this are redrawn.
    pub min_dist: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            samples: 100_000,
            seed: 0,
            k_set: vec![2, 3, 4],
            n_set: vec![3, 4, 5, 7],
            ymax: CONDITIONING_YMAX,
            min_dist: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzCase {
    pub index: usize,
    pub k: usize,
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Frame vectors, one per row.
    pub frame: Vec<Vec<f64>>,
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub schema_version: u32,
    pub config: FuzzConfig,
    pub samples: usize,
    pub min_deficit: f64,
    pub argmin: FuzzCase,
    pub violations: usize,
    pub fd_max_rel_err: f64,
    pub fd_argmax: usize,
    pub fd_checked: usize,
    /// Samples too close to the sphere for a finite-difference stencil.
    pub fd_skipped: usize,
    pub conditioning_warning: bool,
    pub passed: bool,
}

struct Draw {
    k: usize,
    x: Point,
    y: Point,
    frame: TangentFrame,
}

fn unit_ball_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Point {
    loop {
        let dir = Point::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = dir.norm();
        if norm > 1e-12 {
            let r: f64 = rng.random::<f64>().powf(1.0 / n as f64) * radius;
            return dir * (r / norm);
        }
    }
}

fn draw(config: &FuzzConfig, pairs: &[(usize, usize)], index: usize) -> Result<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let (k, n) = pairs[rng.random_range(0..pairs.len())];
    let y = unit_ball_point(&mut rng, n, config.ymax);
    let x = loop {
        let x = unit_ball_point(&mut rng, n, 1.0);
        if (&x - &y).norm() >= config.min_dist {
            break x;
        }
    };
    let frame = TangentFrame::random_with(n, k, &mut rng)?;
    Ok(Draw { k, x, y, frame })
}

struct Outcome {
    deficit: f64,
    fd_rel_err: Option<f64>,
}

fn evaluate(d: &Draw) -> Result<Outcome> {
    let field = CalibrationField::new(d.y.clone(), d.k)?;
    let deficit = field.deficit(&d.x, &d.frame)?;
    let div = 1.0 - deficit;
    let dist = (&d.x - &d.y).norm();
    let h = (1e-3 * dist).min(0.5 * (1.0 - d.x.norm()));
    let fd_rel_err = if h >= 1e-12 {
        let fd = field.divergence_trace_richardson(&d.x, &d.frame, h)?;
        Some((fd - div).abs() / div.abs().max(1.0))
    } else {
        None
    };
    Ok(Outcome { deficit, fd_rel_err })
}

pub fn run_fuzz(config: &FuzzConfig) -> Result<FuzzReport> {
    if config.samples == 0 {
        return Err(Error::InvalidArgument("fuzz needs at least one sample".into()));
    }
    if !(config.ymax >= 0.0 && config.ymax < 1.0) {
        return Err(Error::InvalidArgument(format!("ymax must lie in [0, 1), got {}", config.ymax)));
    }
    if !(config.min_dist > 0.0 && config.min_dist < 1.0) {
        return Err(Error::InvalidArgument(format!("min_dist must lie in (0, 1), got {}", config.min_dist)));
    }
    let pairs: Vec<(usize, usize)> = config
        .k_set
        .iter()
        .flat_map(|&k| config.n_set.iter().map(move |&n| (k, n)))
        .filter(|&(k, n)| k >= 2 && k <= n)
        .collect();
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no (k, n) pair with 2 <= k <= n".into()));
    }
    let outcomes: Vec<Outcome> = (0..config.samples)
        .into_par_iter()
        .map(|i| evaluate(&draw(config, &pairs, i)?))
        .collect::<Result<_>>()?;

    let mut argmin = 0;
    let mut fd_argmax = 0;
    let mut fd_max = 0.0f64;
    let (mut checked, mut skipped, mut violations) = (0, 0, 0);
    for (i, o) in outcomes.iter().enumerate() {
        if o.deficit < outcomes[argmin].deficit {
            argmin = i;
        }
        if o.deficit < -DEFICIT_TOL {
            violations += 1;
        }
        match o.fd_rel_err {
            Some(e) => {
                checked += 1;
                if e > fd_max {
                    fd_max = e;
                    fd_argmax = i;
                }
            }
            None => skipped += 1,
        }
    }
    let worst = draw(config, &pairs, argmin)?;
    let min_deficit = outcomes[argmin].deficit;
    let basis = worst.frame.basis();
    Ok(FuzzReport {
        schema_version: crate::verify::SCHEMA_VERSION,
        config: config.clone(),
        samples: config.samples,
        min_deficit,
        argmin: FuzzCase {
            index: argmin,
            k: worst.k,
            n: worst.x.len(),
            x: worst.x.iter().copied().collect(),
            y: worst.y.iter().copied().collect(),
            frame: (0..worst.k).map(|j| basis.column(j).iter().copied().collect()).collect(),
            deficit: min_deficit,
        },
        violations,
        fd_max_rel_err: fd_max,
        fd_argmax,
        fd_checked: checked,
        fd_skipped: skipped,
        conditioning_warning: config.ymax > CONDITIONING_YMAX,
        passed: min_deficit >= -DEFICIT_TOL && fd_max <= FD_TOL,
    })
}
