//! Analytic benchmark functions with known global maxima.
//!
//! All are posed as maximization problems. The amalgamated function mixes
//! seven branch families keyed by `k = (i - 1) mod 7` over the dimension
//! index `i`, with heterogeneous bounds per branch and one branch (k = 4)
//! coupling a coordinate to its predecessor, which makes the function
//! non-convex, non-uniform, and anisotropic.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::ObjError;
use crate::optimizer::{EvalError, Objective, SearchSpace};

/// Styblinski-Tang per-dimension maximizer of `-(w^4 - 16 w^2 + 5 w)/2`
/// (root of `4 w^3 - 32 w + 5`), and the value there.
pub(crate) const ST_ARGMAX: f64 = -2.903534027771177;
pub(crate) const ST_MAX: f64 = 39.16616570377142;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkKind {
    Spherical,
    Rastrigin,
    StyblinskiTang,
    Amalgamated,
}

impl BenchmarkKind {
    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkKind::Spherical => "spherical",
            BenchmarkKind::Rastrigin => "rastrigin",
            BenchmarkKind::StyblinskiTang => "styblinski_tang",
            BenchmarkKind::Amalgamated => "amalgamated",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "spherical" => Some(BenchmarkKind::Spherical),
            "rastrigin" => Some(BenchmarkKind::Rastrigin),
            "styblinski_tang" | "styblinski-tang" => Some(BenchmarkKind::StyblinskiTang),
            "amalgamated" => Some(BenchmarkKind::Amalgamated),
            _ => None,
        }
    }

    pub fn all() -> [BenchmarkKind; 4] {
        [
            BenchmarkKind::Spherical,
            BenchmarkKind::Rastrigin,
            BenchmarkKind::StyblinskiTang,
            BenchmarkKind::Amalgamated,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkFn {
    pub kind: BenchmarkKind,
    pub dim: usize,
}

impl BenchmarkFn {
    pub fn new(kind: BenchmarkKind, dim: usize) -> Result<Self, ObjError> {
        if dim == 0 {
            return Err(ObjError::BadDimension("dimension must be >= 1".into()));
        }
        Ok(Self { kind, dim })
    }

    /// Declared per-dimension bounds (closed intervals).
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        match self.kind {
            BenchmarkKind::Spherical => vec![(-10.0, 10.0); self.dim],
            BenchmarkKind::Rastrigin => vec![(-5.12, 5.12); self.dim],
            BenchmarkKind::StyblinskiTang => vec![(-5.0, 5.0); self.dim],
            BenchmarkKind::Amalgamated => (0..self.dim)
                .map(|idx| match idx % 7 {
                    0 => (0.0, PI),
                    1 => (-5.0, 5.0),
                    2 => (-10.0, 10.0),
                    3 => (-5.12, 5.12),
                    4 => (-2.0, 2.0),
                    5 => (-FRAC_PI_2, FRAC_PI_2),
                    _ => (-30.0, 30.0),
                })
                .collect(),
        }
    }

    /// Search space for the optimizer: the declared intervals are open, so
    /// the sampled box is shrunk strictly inside by 1e-9 of each range.
    pub fn search_space(&self) -> SearchSpace {
        let bounds = self
            .bounds()
            .into_iter()
            .map(|(lo, hi)| {
                let margin = 1e-9 * (hi - lo);
                (lo + margin, hi - margin)
            })
            .collect();
        SearchSpace::new(bounds).expect("benchmark bounds are well-formed")
    }

    pub fn evaluate(&self, w: &[f64]) -> Result<f64, ObjError> {
        if w.len() != self.dim {
            return Err(ObjError::BadDimension(format!(
                "expected {} coordinates, got {}",
                self.dim,
                w.len()
            )));
        }
        for (d, (&x, &(lo, hi))) in w.iter().zip(&self.bounds()).enumerate() {
            if !(x >= lo && x <= hi) {
                return Err(ObjError::OutOfBounds {
                    dim: d,
                    value: x,
                    lo,
                    hi,
                });
            }
        }
        Ok(match self.kind {
            BenchmarkKind::Spherical => -w.iter().map(|x| x * x).sum::<f64>(),
            BenchmarkKind::Rastrigin => -w
                .iter()
                .map(|&x| 10.0 + x * x - 10.0 * (TAU * x).cos())
                .sum::<f64>(),
            BenchmarkKind::StyblinskiTang => -w
                .iter()
                .map(|&x| (x.powi(4) - 16.0 * x * x + 5.0 * x) / 2.0)
                .sum::<f64>(),
            BenchmarkKind::Amalgamated => w
                .iter()
                .enumerate()
                .map(|(idx, &x)| {
                    let prev = if idx == 0 { 0.0 } else { w[idx - 1] };
                    -amalgamated_branch(idx, x, prev)
                })
                .sum::<f64>(),
        })
    }

    /// The global maximizer and maximum value.
    pub fn optimum(&self) -> (Vec<f64>, f64) {
        match self.kind {
            BenchmarkKind::Spherical | BenchmarkKind::Rastrigin => (vec![0.0; self.dim], 0.0),
            BenchmarkKind::StyblinskiTang => {
                (vec![ST_ARGMAX; self.dim], ST_MAX * self.dim as f64)
            }
            BenchmarkKind::Amalgamated => {
                let mut arg = Vec::with_capacity(self.dim);
                let mut value = 0.0;
                for idx in 0..self.dim {
                    let (x, v) = match idx % 7 {
                        0 => (FRAC_PI_2, 1.0),
                        1 => (ST_ARGMAX, ST_MAX),
                        2 => (0.0, 0.0),
                        3 => (0.0, 0.0),
                        // Coupled to the previous coordinate, which is the
                        // k = 3 branch and optimal at 0: the quadratic
                        // trade-off peaks at 1/101.
                        4 => (1.0 / 101.0, -100.0 / 101.0),
                        5 => (0.0, 1.0),
                        _ => (-30.0, 30.0),
                    };
                    arg.push(x);
                    value += v;
                }
                (arg, value)
            }
        }
    }
}

/// `g(w_i)` per Amalgamated branch; the total objective sums `-g`.
fn amalgamated_branch(idx: usize, x: f64, prev: f64) -> f64 {
    match idx % 7 {
        0 => -x.sin(),
        1 => (x.powi(4) - 16.0 * x * x + 5.0 * x) / 2.0,
        2 => x * x,
        3 => 10.0 + x * x - 10.0 * (TAU * x).cos(),
        4 => {
            let a = x - prev * prev;
            100.0 * a * a + (1.0 - x) * (1.0 - x)
        }
        5 => -x.cos().abs(),
        _ => x,
    }
}

/// An analytic benchmark behaving as a black-box objective.
pub struct BenchmarkObjective {
    function: BenchmarkFn,
}

impl BenchmarkObjective {
    pub fn new(function: BenchmarkFn) -> Self {
        Self { function }
    }

    pub fn function(&self) -> &BenchmarkFn {
        &self.function
    }
}

impl Objective for BenchmarkObjective {
    fn evaluate_batch(&mut self, designs: &[Vec<f64>]) -> Result<Vec<(f64, bool)>, EvalError> {
        designs
            .iter()
            .map(|w| {
                self.function
                    .evaluate(w)
                    .map(|v| (v, true))
                    .map_err(|e| EvalError::new(e.to_string()))
            })
            .collect()
    }
}
