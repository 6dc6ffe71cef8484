//! Problem data: coefficient families with exact state derivatives, source
//! fields, and the declared bounds the certification conditions consume.
//!
//! The diffusion coefficient `kappa(x, eta)` and reaction term `g(x, eta)`
//! come from small closed registries of smooth parametric families, each of
//! which knows its own derivative in the state variable `eta`. Bounds are
//! declared by the user as part of the problem and can be falsified — not
//! proven — by sampling ([`validate_bounds`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;

/// Diffusion coefficient families kappa(x, eta).
///
/// All families currently depend on the state alone; the spatial argument is
/// part of the interface so coefficient evaluations always happen at
/// quadrature points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Kappa {
    /// kappa = a
    Constant { a: f64 },
    /// kappa = a + b tanh(c eta)
    Tanh { a: f64, b: f64, c: f64 },
    /// kappa = a + b / (1 + eta^2)
    Rational { a: f64, b: f64 },
    /// kappa = a + b eta + c eta^2
    Quadratic { a: f64, b: f64, c: f64 },
}

impl Kappa {
    pub fn eval(&self, _x: Point, eta: f64) -> f64 {
        match *self {
            Kappa::Constant { a } => a,
            Kappa::Tanh { a, b, c } => a + b * (c * eta).tanh(),
            Kappa::Rational { a, b } => a + b / (1.0 + eta * eta),
            Kappa::Quadratic { a, b, c } => a + eta * (b + c * eta),
        }
    }

    /// d kappa / d eta, exact.
    pub fn deta(&self, _x: Point, eta: f64) -> f64 {
        match *self {
            Kappa::Constant { .. } => 0.0,
            Kappa::Tanh { b, c, .. } => {
                let t = (c * eta).tanh();
                b * c * (1.0 - t * t)
            }
            Kappa::Rational { b, .. } => {
                let d = 1.0 + eta * eta;
                -2.0 * b * eta / (d * d)
            }
            Kappa::Quadratic { b, c, .. } => b + 2.0 * c * eta,
        }
    }
}

/// Reaction term families g(x, eta); all vanish at eta = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Reaction {
    /// g = 0
    Zero,
    /// g = a eta
    Linear { a: f64 },
    /// g = a eta^3
    Cubic { a: f64 },
}

impl Reaction {
    pub fn eval(&self, _x: Point, eta: f64) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::Linear { a } => a * eta,
            Reaction::Cubic { a } => a * eta * eta * eta,
        }
    }

    /// d g / d eta, exact.
    pub fn deta(&self, _x: Point, eta: f64) -> f64 {
        match *self {
            Reaction::Zero => 0.0,
            Reaction::Linear { a } => a,
            Reaction::Cubic { a } => 3.0 * a * eta * eta,
        }
    }
}

/// Source field families f(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Source {
    /// f = a
    Constant { a: f64 },
    /// f = c00 + c10 x + c01 y + c20 x^2 + c11 x y + c02 y^2
    Poly {
        #[serde(default)]
        c00: f64,
        #[serde(default)]
        c10: f64,
        #[serde(default)]
        c01: f64,
        #[serde(default)]
        c20: f64,
        #[serde(default)]
        c11: f64,
        #[serde(default)]
        c02: f64,
    },
    /// f = a sin(kx pi x) sin(ky pi y)
    Trig { a: f64, kx: f64, ky: f64 },
}

impl Source {
    pub fn eval(&self, x: Point) -> f64 {
        match *self {
            Source::Constant { a } => a,
            Source::Poly {
                c00,
                c10,
                c01,
                c20,
                c11,
                c02,
            } => {
                let (u, v) = (x[0], x[1]);
                c00 + c10 * u + c01 * v + c20 * u * u + c11 * u * v + c02 * v * v
            }
            Source::Trig { a, kx, ky } => {
                a * (kx * std::f64::consts::PI * x[0]).sin()
                    * (ky * std::f64::consts::PI * x[1]).sin()
            }
        }
    }
}

/// User-declared bounds on the coefficient data:
///
/// * `k_alpha <= kappa(x, eta) <= k_beta` with `k_alpha > 0`,
/// * `|d kappa / d eta| <= k_eta`,
/// * `0 <= d g / d eta <= g_eta`.
///
/// These are promises about the range of states the problem visits; every
/// certification margin is computed against them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataBounds {
    pub k_alpha: f64,
    pub k_beta: f64,
    pub k_eta: f64,
    pub g_eta: f64,
}

impl DataBounds {
    pub fn validate(&self) -> Result<()> {
        if self.k_alpha.is_nan() || self.k_alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "k_alpha must be positive, got {}",
                self.k_alpha
            )));
        }
        if self.k_beta < self.k_alpha {
            return Err(Error::InvalidArgument(format!(
                "k_beta = {} is below k_alpha = {}",
                self.k_beta, self.k_alpha
            )));
        }
        if self.k_eta < 0.0 || self.g_eta < 0.0 {
            return Err(Error::InvalidArgument(
                "derivative bounds k_eta and g_eta must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// A complete problem: coefficients, source, and declared bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kappa: Kappa,
    pub g: Reaction,
    pub f: Source,
    pub bounds: DataBounds,
}

impl ProblemSpec {
    pub fn new(kappa: Kappa, g: Reaction, f: Source, bounds: DataBounds) -> Result<Self> {
        bounds.validate()?;
        Ok(ProblemSpec { kappa, g, f, bounds })
    }

    /// Replaces the source field, keeping coefficients and bounds.
    pub fn with_source(&self, f: Source) -> Self {
        ProblemSpec {
            f,
            ..self.clone()
        }
    }
}

/// Which declared bound a sample violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    KappaBelowAlpha,
    KappaAboveBeta,
    KappaSlope,
    GSlopeNegative,
    GSlopeAboveBound,
}

/// A sampled point at which a declared bound fails.
#[derive(Debug, Clone, Serialize)]
pub struct BoundViolation {
    pub kind: BoundKind,
    pub x: Point,
    pub eta: f64,
    pub value: f64,
}

/// Result of sampling-based bound validation.
///
/// Sampling can falsify declared bounds but never prove them; `exhaustive`
/// is always false to make that explicit in serialized reports.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    /// Observed (min, max) of kappa over the samples.
    pub kappa_range: (f64, f64),
    /// Observed max |d kappa / d eta|.
    pub kappa_slope_max_abs: f64,
    /// Observed (min, max) of d g / d eta.
    pub g_slope_range: (f64, f64),
    pub violations: Vec<BoundViolation>,
    pub samples_checked: usize,
    /// Always false: a clean report means "not falsified", not "proved".
    pub exhaustive: bool,
}

impl BoundsReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples the coefficient families over `x_samples` and a jittered grid of
/// `n_samples` states in `eta_range`, checking every declared bound. The
/// jitter is drawn from a counter-based generator seeded with `seed`, so a
/// given seed always checks the same points; the interval endpoints are
/// always included.
pub fn validate_bounds(
    spec: &ProblemSpec,
    x_samples: &[Point],
    eta_range: (f64, f64),
    n_samples: usize,
    seed: u64,
) -> Result<BoundsReport> {
    let (lo, hi) = eta_range;
    if hi.is_nan() || lo.is_nan() || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "empty state range [{lo}, {hi}]"
        )));
    }
    if n_samples < 2 {
        return Err(Error::InvalidArgument(
            "bound validation needs at least 2 state samples".into(),
        ));
    }
    spec.bounds.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut etas = Vec::with_capacity(n_samples);
    etas.push(lo);
    etas.push(hi);
    for k in 0..n_samples.saturating_sub(2) {
        let jitter: f64 = rng.random();
        etas.push(lo + (k as f64 + jitter) * (hi - lo) / (n_samples - 2) as f64);
    }

    let origin = [[0.0, 0.0]];
    let xs: &[Point] = if x_samples.is_empty() { &origin } else { x_samples };

    let b = &spec.bounds;
    let mut report = BoundsReport {
        kappa_range: (f64::INFINITY, f64::NEG_INFINITY),
        kappa_slope_max_abs: 0.0,
        g_slope_range: (f64::INFINITY, f64::NEG_INFINITY),
        violations: Vec::new(),
        samples_checked: 0,
        exhaustive: false,
    };
    // Keep sign checks tolerant to representation noise at the bound itself.
    let tol = 1e-12;
    for &x in xs {
        for &eta in &etas {
            report.samples_checked += 1;
            let k = spec.kappa.eval(x, eta);
            let dk = spec.kappa.deta(x, eta);
            let dg = spec.g.deta(x, eta);
            report.kappa_range.0 = report.kappa_range.0.min(k);
            report.kappa_range.1 = report.kappa_range.1.max(k);
            report.kappa_slope_max_abs = report.kappa_slope_max_abs.max(dk.abs());
            report.g_slope_range.0 = report.g_slope_range.0.min(dg);
            report.g_slope_range.1 = report.g_slope_range.1.max(dg);

            if k < b.k_alpha - tol {
                report.violations.push(BoundViolation {
                    kind: BoundKind::KappaBelowAlpha,
                    x,
                    eta,
                    value: k,
                });
            }
            if k > b.k_beta + tol {
                report.violations.push(BoundViolation {
                    kind: BoundKind::KappaAboveBeta,
                    x,
                    eta,
                    value: k,
                });
            }
            if dk.abs() > b.k_eta + tol {
                report.violations.push(BoundViolation {
                    kind: BoundKind::KappaSlope,
                    x,
                    eta,
                    value: dk,
                });
            }
            if dg < -tol {
                report.violations.push(BoundViolation {
                    kind: BoundKind::GSlopeNegative,
                    x,
                    eta,
                    value: dg,
                });
            }
            if dg > b.g_eta + tol {
                report.violations.push(BoundViolation {
                    kind: BoundKind::GSlopeAboveBound,
                    x,
                    eta,
                    value: dg,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(k_alpha: f64, k_beta: f64, k_eta: f64, g_eta: f64) -> DataBounds {
        DataBounds {
            k_alpha,
            k_beta,
            k_eta,
            g_eta,
        }
    }

    #[test]
    fn tanh_family_within_declared_bounds() {
        // kappa = 2 + tanh(eta) stays in (1, 3) with slope at most 1.
        let spec = ProblemSpec::new(
            Kappa::Tanh {
                a: 2.0,
                b: 1.0,
                c: 1.0,
            },
            Reaction::Zero,
            Source::Constant { a: 0.0 },
            bounds(1.0, 3.0, 1.0, 0.0),
        )
        .unwrap();
        let report = validate_bounds(&spec, &[], (-10.0, 10.0), 500, 7).unwrap();
        assert!(report.ok(), "{:?}", report.violations.first());
        assert!(!report.exhaustive);
        assert!(report.kappa_range.0 > 1.0 && report.kappa_range.1 < 3.0);
    }

    #[test]
    fn cubic_reaction_bound_depends_on_range() {
        // g = eta^3 has slope 3 eta^2: bounded by 3 on [-1, 1], not on [-2, 2].
        let spec = ProblemSpec::new(
            Kappa::Constant { a: 1.0 },
            Reaction::Cubic { a: 1.0 },
            Source::Constant { a: 0.0 },
            bounds(1.0, 1.0, 0.0, 3.0),
        )
        .unwrap();
        let ok = validate_bounds(&spec, &[], (-1.0, 1.0), 200, 1).unwrap();
        assert!(ok.ok());
        let bad = validate_bounds(&spec, &[], (-2.0, 2.0), 200, 1).unwrap();
        assert!(!bad.ok());
        assert!(bad
            .violations
            .iter()
            .all(|v| v.kind == BoundKind::GSlopeAboveBound));
    }

    #[test]
    fn constant_kappa_has_zero_slope() {
        let spec = ProblemSpec::new(
            Kappa::Constant { a: 2.5 },
            Reaction::Zero,
            Source::Constant { a: 0.0 },
            bounds(2.5, 2.5, 0.0, 0.0),
        )
        .unwrap();
        let report = validate_bounds(&spec, &[[0.3, 0.4]], (-5.0, 5.0), 100, 3).unwrap();
        assert!(report.ok());
        assert_eq!(report.kappa_slope_max_abs, 0.0);
    }

    #[test]
    fn same_seed_same_samples() {
        let spec = ProblemSpec::new(
            Kappa::Rational { a: 1.0, b: 1.0 },
            Reaction::Linear { a: 0.5 },
            Source::Constant { a: 0.0 },
            bounds(1.0, 2.0, 0.7, 0.5),
        )
        .unwrap();
        let a = validate_bounds(&spec, &[], (-3.0, 3.0), 64, 42).unwrap();
        let b = validate_bounds(&spec, &[], (-3.0, 3.0), 64, 42).unwrap();
        assert_eq!(a.kappa_range, b.kappa_range);
        assert_eq!(a.kappa_slope_max_abs, b.kappa_slope_max_abs);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(bounds(0.0, 1.0, 0.0, 0.0).validate().is_err());
        assert!(bounds(2.0, 1.0, 0.0, 0.0).validate().is_err());
        assert!(bounds(1.0, 2.0, -1.0, 0.0).validate().is_err());
    }

    #[test]
    fn derivatives_match_central_differences() {
        // Exact derivatives against central finite differences at step 1e-5,
        // over a deterministic sweep of states for every family.
        let kappas = [
            Kappa::Constant { a: 2.0 },
            Kappa::Tanh {
                a: 2.0,
                b: 0.7,
                c: 1.3,
            },
            Kappa::Rational { a: 1.5, b: 0.8 },
            Kappa::Quadratic {
                a: 1.0,
                b: 0.3,
                c: 0.2,
            },
        ];
        let reactions = [
            Reaction::Zero,
            Reaction::Linear { a: 0.4 },
            Reaction::Cubic { a: 0.6 },
        ];
        let h = 1e-5;
        let x = [0.2, 0.7];
        for n in 0..1000 {
            let eta = -4.0 + 8.0 * (n as f64) / 999.0;
            for k in &kappas {
                let fd = (k.eval(x, eta + h) - k.eval(x, eta - h)) / (2.0 * h);
                let exact = k.deta(x, eta);
                let scale = exact.abs().max(1.0);
                assert!(
                    (fd - exact).abs() <= 1e-6 * scale,
                    "kappa {k:?} at eta={eta}: fd={fd}, exact={exact}"
                );
            }
            for g in &reactions {
                let fd = (g.eval(x, eta + h) - g.eval(x, eta - h)) / (2.0 * h);
                let exact = g.deta(x, eta);
                let scale = exact.abs().max(1.0);
                assert!(
                    (fd - exact).abs() <= 1e-6 * scale,
                    "g {g:?} at eta={eta}: fd={fd}, exact={exact}"
                );
            }
        }
    }

    #[test]
    fn source_families_evaluate() {
        let poly = Source::Poly {
            c00: 1.0,
            c10: 2.0,
            c01: 0.0,
            c20: 1.0,
            c11: 0.0,
            c02: -1.0,
        };
        assert!((poly.eval([2.0, 1.0]) - (1.0 + 4.0 + 4.0 - 1.0)).abs() < 1e-15);
        let trig = Source::Trig {
            a: 3.0,
            kx: 1.0,
            ky: 1.0,
        };
        assert!((trig.eval([0.5, 0.5]) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ProblemSpec::new(
            Kappa::Tanh {
                a: 2.0,
                b: 1.0,
                c: 1.0,
            },
            Reaction::Cubic { a: 0.2 },
            Source::Trig {
                a: 1.0,
                kx: 1.0,
                ky: 2.0,
            },
            bounds(1.0, 3.0, 1.0, 2.0),
        )
        .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
        assert!(json.contains("\"family\":\"tanh\""));
    }
}
