//! Voter-type distributions on `[0, 1]`.
//!
//! Every family is exposed through [`TypeDistribution`], which caches the
//! median and the first two moments at construction. Beyond point evaluation
//! of `F` and `f`, the equilibrium code needs partial moments
//! `∫_a^b v^k dF(v)` for `k = 0, 1, 2`; those are closed form for the uniform
//! and Beta families and are otherwise obtained by integrating `F` by parts,
//! which stays well behaved when the density is unbounded at an endpoint.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{check_unit, Error, Result};
use crate::numerics::{
    inc_beta, integrate, invert_cdf, ln_beta, normal_cdf, normal_pdf, normal_sf, quad_tol,
};

/// Default uniform-mixing weight for empirical distributions.
pub const DEFAULT_EMPIRICAL_EPS: f64 = 0.01;

/// Slack on the mean/median ordering implied by admissibility.
pub const MOM_TOL: f64 = 1e-6;

/// Which side of 1/2 the median falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MedianBranch {
    MedianLow,
    MedianHigh,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Uniform,
    Beta { alpha: f64, beta: f64 },
    TruncatedNormal { mu: f64, sigma: f64 },
    TruncatedLogistic { mu: f64, scale: f64 },
    Empirical(EmpiricalCdf),
}

/// Normalisation of a location-scale law conditioned on `[0, 1]`.
///
/// When the location sits in the lower half the survival function is used,
/// so that both endpoint values stay small and conditioning on a far tail
/// does not cancel catastrophically.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Truncation {
    upper_tail: bool,
    at_zero: f64,
    mass: f64,
}

impl Truncation {
    fn new(base_cdf: impl Fn(f64) -> f64, base_sf: impl Fn(f64) -> f64, mu: f64) -> Self {
        if mu < 0.5 {
            let s0 = base_sf(0.0);
            Truncation { upper_tail: true, at_zero: s0, mass: s0 - base_sf(1.0) }
        } else {
            let g0 = base_cdf(0.0);
            Truncation { upper_tail: false, at_zero: g0, mass: base_cdf(1.0) - g0 }
        }
    }

    fn cdf(&self, x: f64, base_cdf: impl Fn(f64) -> f64, base_sf: impl Fn(f64) -> f64) -> f64 {
        let v = if self.upper_tail {
            (self.at_zero - base_sf(x)) / self.mass
        } else {
            (base_cdf(x) - self.at_zero) / self.mass
        };
        v.clamp(0.0, 1.0)
    }
}

/// Piecewise-linear empirical CDF mixed with the uniform law.
///
/// Knots sit at the distinct sample values with mid-rank heights, pinned to
/// `(0, 0)` and `(1, 1)`; the mixture `(1 - eps) * ECDF + eps * x` keeps the
/// density bounded below by `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    xs: Vec<f64>,
    ys: Vec<f64>,
    eps: f64,
    sample_count: usize,
    clamped_count: usize,
    source: Option<PathBuf>,
}

impl EmpiricalCdf {
    pub fn from_samples(samples: &[f64], eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "empirical smoothing eps must lie in (0, 1), got {eps}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument("empirical sample set is empty".into()));
        }
        let mut clamped_count = 0;
        let mut values = Vec::with_capacity(samples.len());
        for &s in samples {
            if !s.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite sample {s}")));
            }
            if !(0.0..=1.0).contains(&s) {
                clamped_count += 1;
            }
            values.push(s.clamp(0.0, 1.0));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;

        let mut xs = vec![0.0];
        let mut ys = vec![0.0];
        let mut i = 0;
        while i < values.len() {
            let v = values[i];
            let mut j = i;
            while j < values.len() && values[j] == v {
                j += 1;
            }
            if v > 0.0 && v < 1.0 {
                xs.push(v);
                ys.push((i as f64 + 0.5 * (j - i) as f64) / n);
            }
            i = j;
        }
        xs.push(1.0);
        ys.push(1.0);

        Ok(EmpiricalCdf {
            xs,
            ys,
            eps,
            sample_count: samples.len(),
            clamped_count,
            source: None,
        })
    }

    /// Reads one real per line; blank lines are skipped, out-of-range values clamped.
    pub fn from_file(path: &Path, eps: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Spec {
                spec: path.display().to_string(),
                reason: format!("line {}: `{line}` is not a number", lineno + 1),
            })?;
            samples.push(v);
        }
        let mut cdf = Self::from_samples(&samples, eps)?;
        if cdf.clamped_count > 0 {
            log::warn!(
                "{}: {} of {} samples clamped into [0, 1]",
                path.display(),
                cdf.clamped_count,
                cdf.sample_count
            );
        }
        cdf.source = Some(path.to_path_buf());
        Ok(cdf)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    /// Number of samples that fell outside `[0, 1]` and were clamped.
    pub fn clamped_count(&self) -> usize {
        self.clamped_count
    }

    fn segment(&self, x: f64) -> usize {
        // index of the knot interval [xs[i], xs[i+1]] containing x
        let i = self.xs.partition_point(|&k| k <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn cdf(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        let base = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        ((1.0 - self.eps) * base + self.eps * x).clamp(0.0, 1.0)
    }

    fn pdf(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let slope = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]);
        (1.0 - self.eps) * slope + self.eps
    }
}

/// Result of the skewness (admissibility) check on a distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub median: f64,
    pub mean: f64,
    pub variance: f64,
    pub branch: MedianBranch,
    pub integral_value: f64,
    pub admissible: bool,
}

/// An immutable distribution of voter peaks on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct TypeDistribution {
    family: Family,
    truncation: Option<Truncation>,
    median: f64,
    mean: f64,
    variance: f64,
}

impl TypeDistribution {
    pub fn uniform() -> Self {
        Self::build(Family::Uniform, None)
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Beta parameters must be positive and finite, got ({alpha}, {beta})"
            )));
        }
        Ok(Self::build(Family::Beta { alpha, beta }, None))
    }

    pub fn truncated_normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "truncated normal needs finite mu and positive sigma, got ({mu}, {sigma})"
            )));
        }
        let t = Truncation::new(
            |x| normal_cdf((x - mu) / sigma),
            |x| normal_sf((x - mu) / sigma),
            mu,
        );
        if !(t.mass > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "N({mu}, {sigma}^2) puts no representable mass on [0, 1]"
            )));
        }
        Ok(Self::build(Family::TruncatedNormal { mu, sigma }, Some(t)))
    }

    pub fn truncated_logistic(mu: f64, scale: f64) -> Result<Self> {
        if !(mu.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "truncated logistic needs finite mu and positive scale, got ({mu}, {scale})"
            )));
        }
        let t = Truncation::new(
            |x| logistic_cdf((x - mu) / scale),
            |x| logistic_cdf(-(x - mu) / scale),
            mu,
        );
        if !(t.mass > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Logistic({mu}, {scale}) puts no representable mass on [0, 1]"
            )));
        }
        Ok(Self::build(Family::TruncatedLogistic { mu, scale }, Some(t)))
    }

    pub fn empirical(cdf: EmpiricalCdf) -> Self {
        Self::build(Family::Empirical(cdf), None)
    }

    /// Parses `uniform`, `beta:A,B`, `tnormal:MU,SIGMA`, `tlogistic:MU,S` or
    /// `empirical:PATH[,EPS]`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec_err = |reason: String| Error::Spec { spec: spec.to_string(), reason };
        let trimmed = spec.trim();
        let (kind, args) = match trimmed.split_once(':') {
            Some((k, a)) => (k.trim().to_ascii_lowercase(), Some(a.trim())),
            None => (trimmed.to_ascii_lowercase(), None),
        };
        let two_reals = |args: Option<&str>| -> Result<(f64, f64)> {
            let args = args.ok_or_else(|| spec_err("expected two comma-separated numbers".into()))?;
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(spec_err("expected two comma-separated numbers".into()));
            }
            let p = |s: &str| s.parse::<f64>().map_err(|_| spec_err(format!("`{s}` is not a number")));
            Ok((p(parts[0])?, p(parts[1])?))
        };
        let with_spec = |r: Result<Self>| r.map_err(|e| spec_err(e.to_string()));
        match kind.as_str() {
            "uniform" if args.is_none() => Ok(Self::uniform()),
            "beta" => {
                let (a, b) = two_reals(args)?;
                with_spec(Self::beta(a, b))
            }
            "tnormal" => {
                let (m, s) = two_reals(args)?;
                with_spec(Self::truncated_normal(m, s))
            }
            "tlogistic" => {
                let (m, s) = two_reals(args)?;
                with_spec(Self::truncated_logistic(m, s))
            }
            "empirical" => {
                let args = args.ok_or_else(|| spec_err("missing sample file path".into()))?;
                // a trailing `,EPS` is taken as the smoothing weight when it parses
                let (path, eps) = match args.rsplit_once(',') {
                    Some((p, e)) if e.trim().parse::<f64>().is_ok() => {
                        (p.trim(), e.trim().parse::<f64>().unwrap())
                    }
                    _ => (args, DEFAULT_EMPIRICAL_EPS),
                };
                let cdf = EmpiricalCdf::from_file(Path::new(path), eps)?;
                Ok(Self::empirical(cdf))
            }
            _ => Err(spec_err(
                "expected uniform, beta:A,B, tnormal:MU,SIGMA, tlogistic:MU,S or empirical:PATH[,EPS]"
                    .into(),
            )),
        }
    }

    fn build(family: Family, truncation: Option<Truncation>) -> Self {
        let mut d = TypeDistribution { family, truncation, median: 0.5, mean: 0.5, variance: 0.0 };
        d.median = d.quantile(0.5);
        let (mean, variance) = d.compute_moments();
        d.mean = mean;
        d.variance = variance;
        d
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `F(x)`; errors outside `[0, 1]`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok(self.cdf_ext(x))
    }

    /// `f(x)`; errors outside `[0, 1]`. Unbounded Beta densities return `+inf`
    /// at the offending endpoint.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok(self.pdf_inner(x))
    }

    /// `F` extended by 0 below 0 and 1 above 1.
    pub fn cdf_ext(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match &self.family {
            Family::Uniform => x,
            Family::Beta { alpha, beta } => inc_beta(*alpha, *beta, x),
            Family::TruncatedNormal { mu, sigma } => self.truncation.unwrap().cdf(
                x,
                |y| normal_cdf((y - mu) / sigma),
                |y| normal_sf((y - mu) / sigma),
            ),
            Family::TruncatedLogistic { mu, scale } => self.truncation.unwrap().cdf(
                x,
                |y| logistic_cdf((y - mu) / scale),
                |y| logistic_cdf(-(y - mu) / scale),
            ),
            Family::Empirical(e) => e.cdf(x),
        }
    }

    fn pdf_inner(&self, x: f64) -> f64 {
        match &self.family {
            Family::Uniform => 1.0,
            Family::Beta { alpha, beta } => {
                let (a, b) = (*alpha, *beta);
                if x == 0.0 || x == 1.0 {
                    let expo = if x == 0.0 { a } else { b };
                    return match expo.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => (-ln_beta(a, b)).exp(),
                        _ => 0.0,
                    };
                }
                ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp()
            }
            Family::TruncatedNormal { mu, sigma } => {
                normal_pdf((x - mu) / sigma) / sigma / self.truncation.unwrap().mass
            }
            Family::TruncatedLogistic { mu, scale } => {
                let e = (-((x - mu) / scale).abs()).exp();
                e / (scale * (1.0 + e) * (1.0 + e)) / self.truncation.unwrap().mass
            }
            Family::Empirical(e) => e.pdf(x),
        }
    }

    /// `F^{-1}(p)` by bisection (identity for the uniform law).
    pub fn quantile(&self, p: f64) -> f64 {
        match self.family {
            Family::Uniform => p.clamp(0.0, 1.0),
            _ => invert_cdf(|x| self.cdf_ext(x), p),
        }
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    /// `(mean, variance)`.
    pub fn moments(&self) -> (f64, f64) {
        (self.mean, self.variance)
    }

    fn compute_moments(&self) -> (f64, f64) {
        match self.family {
            Family::Uniform => (0.5, 1.0 / 12.0),
            Family::Beta { alpha, beta } => {
                let s = alpha + beta;
                (alpha / s, alpha * beta / (s * s * (s + 1.0)))
            }
            _ => {
                let [_, m1, m2] = self.partial_moments(0.0, 1.0);
                (m1, (m2 - m1 * m1).max(0.0))
            }
        }
    }

    /// `[∫_a^b dF, ∫_a^b v dF, ∫_a^b v² dF]` over `[a, b] ∩ [0, 1]`.
    pub fn partial_moments(&self, a: f64, b: f64) -> [f64; 3] {
        let a = a.clamp(0.0, 1.0);
        let b = b.clamp(0.0, 1.0);
        if b <= a {
            return [0.0; 3];
        }
        match self.family {
            Family::Uniform => [b - a, 0.5 * (b * b - a * a), (b * b * b - a * a * a) / 3.0],
            Family::Beta { alpha, beta } => {
                let s = alpha + beta;
                let mass = |k: f64| inc_beta(alpha + k, beta, b) - inc_beta(alpha + k, beta, a);
                [
                    mass(0.0),
                    alpha / s * mass(1.0),
                    alpha * (alpha + 1.0) / (s * (s + 1.0)) * mass(2.0),
                ]
            }
            _ => {
                let tol = quad_tol();
                let (fa, fb) = (self.cdf_ext(a), self.cdf_ext(b));
                let int_f = integrate(|v| self.cdf_ext(v), a, b, tol);
                let int_vf = integrate(|v| 2.0 * v * self.cdf_ext(v), a, b, tol);
                [fb - fa, b * fb - a * fa - int_f, b * b * fb - a * a * fa - int_vf]
            }
        }
    }

    /// `∫_a^b -(v - theta)² dF(v)`.
    pub fn expected_loss_on(&self, theta: f64, a: f64, b: f64) -> f64 {
        let [m0, m1, m2] = self.partial_moments(a, b);
        -(m2 - 2.0 * theta * m1 + theta * theta * m0)
    }

    pub fn check_admissibility(&self) -> AdmissibilityReport {
        let med = self.median;
        let (branch, upper) = if med <= 0.5 {
            (MedianBranch::MedianLow, med)
        } else {
            (MedianBranch::MedianHigh, 1.0 - med)
        };
        let integral_value = integrate(
            |t| 1.0 - self.cdf_ext(med + t) - self.cdf_ext(med - t),
            0.0,
            upper,
            quad_tol(),
        );
        let admissible = match branch {
            MedianBranch::MedianLow => integral_value >= 0.0,
            MedianBranch::MedianHigh => integral_value <= 0.0,
        };
        AdmissibilityReport {
            median: med,
            mean: self.mean,
            variance: self.variance,
            branch,
            integral_value,
            admissible,
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.family, Family::Uniform)
    }
}

impl FromStr for TypeDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for TypeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Uniform => write!(f, "uniform"),
            Family::Beta { alpha, beta } => write!(f, "beta:{alpha},{beta}"),
            Family::TruncatedNormal { mu, sigma } => write!(f, "tnormal:{mu},{sigma}"),
            Family::TruncatedLogistic { mu, scale } => write!(f, "tlogistic:{mu},{scale}"),
            Family::Empirical(e) => match &e.source {
                Some(p) => write!(f, "empirical:{},{}", p.display(), e.eps),
                None => write!(f, "empirical:<{} samples>,{}", e.sample_count, e.eps),
            },
        }
    }
}

fn logistic_cdf(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
