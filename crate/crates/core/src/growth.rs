//! Growth dichotomy for nondecreasing `Y ≥ 0` with `Y(ζ) ≤ Ψ(Y′(ζ))`,
//! `Ψ(τ) ≤ C τ^m` for `τ > τ₁`: either `Y ≡ 0` or `Y` grows at least like
//! `ζ^{m/(m−1)}`.

use std::io::Read;

use serde::Deserialize;

use crate::error::GrowthError;

/// Endpoint change allowed when the step count is doubled.
pub const STEP_TOLERANCE: f64 = 1e-3;

/// Margin below the critical exponent that still counts as slower growth.
pub const SLOPE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSpec {
    c: f64,
    m: f64,
    tau1: f64,
}

impl GrowthSpec {
    pub fn new(c: f64, m: f64, tau1: f64) -> Result<Self, GrowthError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(GrowthError::InvalidSpec(format!("C must be positive, got {c}")));
        }
        if !(m.is_finite() && m > 1.0) {
            return Err(GrowthError::InvalidSpec(format!("m must exceed 1, got {m}")));
        }
        if !(tau1.is_finite() && tau1 >= 0.0) {
            return Err(GrowthError::InvalidSpec(format!("tau1 must be nonnegative, got {tau1}")));
        }
        Ok(Self { c, m, tau1 })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    /// `m / (m − 1)`.
    pub fn exponent(&self) -> f64 {
        self.m / (self.m - 1.0)
    }

    /// The power-law majorant `C τ^m`.
    pub fn psi(&self, tau: f64) -> f64 {
        self.c * tau.powf(self.m)
    }

    /// Slowest admissible growth rate `(Y / C)^{1/m}`.
    fn rate(&self, y: f64) -> f64 {
        (y.max(0.0) / self.c).powf(1.0 / self.m)
    }

    /// Exact solution of `Y′ = (Y/C)^{1/m}` after `dz` from `y0`.
    fn envelope_exact(&self, y0: f64, dz: f64) -> f64 {
        let p = (self.m - 1.0) / self.m;
        (y0.powf(p) + p * self.c.powf(-1.0 / self.m) * dz).powf(1.0 / p)
    }
}

/// A sampled lower-bound curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub zeta: Vec<f64>,
    pub y: Vec<f64>,
}

impl Envelope {
    pub fn endpoint(&self) -> f64 {
        *self.y.last().expect("nonempty envelope")
    }

    /// Linear interpolation at `z`, clamped to the sampled range.
    pub fn value_at(&self, z: f64) -> f64 {
        let k = self.zeta.partition_point(|&x| x < z);
        if k == 0 {
            return self.y[0];
        }
        if k >= self.zeta.len() {
            return self.endpoint();
        }
        let (z0, z1) = (self.zeta[k - 1], self.zeta[k]);
        let t = (z - z0) / (z1 - z0);
        self.y[k - 1] + t * (self.y[k] - self.y[k - 1])
    }

    /// Slope of `log Y` against `log ζ` across the last decade.
    pub fn loglog_slope_last_decade(&self) -> f64 {
        let z_end = *self.zeta.last().expect("nonempty envelope");
        let z_start = z_end / 10.0;
        (self.endpoint() / self.value_at(z_start)).ln() / 10f64.ln()
    }
}

fn rk4(spec: &GrowthSpec, y0: f64, zeta_max: f64, steps: usize) -> Envelope {
    let h = zeta_max / steps as f64;
    let mut zeta = Vec::with_capacity(steps + 1);
    let mut y = Vec::with_capacity(steps + 1);
    let mut current = y0;
    zeta.push(0.0);
    y.push(current);
    for i in 1..=steps {
        let k1 = spec.rate(current);
        let k2 = spec.rate(current + 0.5 * h * k1);
        let k3 = spec.rate(current + 0.5 * h * k2);
        let k4 = spec.rate(current + h * k3);
        current += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        zeta.push(i as f64 * h);
        y.push(current);
    }
    Envelope { zeta, y }
}

/// Integrates the minimal-growth ODE `Y′ = (Y/C)^{1/m}` from `Y(0) = y0`
/// with classical fourth-order Runge–Kutta steps.
pub fn envelope(spec: &GrowthSpec, y0: f64, zeta_max: f64, steps: usize) -> Result<Envelope, GrowthError> {
    if !(y0.is_finite() && y0 >= 0.0) {
        return Err(GrowthError::InvalidSpec(format!("initial value must be nonnegative, got {y0}")));
    }
    if !(zeta_max.is_finite() && zeta_max > 0.0) || steps == 0 {
        return Err(GrowthError::InvalidSpec("need zeta_max > 0 and at least one step".into()));
    }
    let coarse = rk4(spec, y0, zeta_max, steps);
    let fine = rk4(spec, y0, zeta_max, 2 * steps);
    let (a, b) = (coarse.endpoint(), fine.endpoint());
    if b > 0.0 {
        let relative_change = (a - b).abs() / b;
        if relative_change > STEP_TOLERANCE {
            return Err(GrowthError::StepTooCoarse { relative_change });
        }
    }
    Ok(coarse)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    ForcedSuperlinearGrowth,
    MustBeIdenticallyZero,
    Inconclusive,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::ForcedSuperlinearGrowth => "ForcedSuperlinearGrowth",
            Classification::MustBeIdenticallyZero => "MustBeIdenticallyZero",
            Classification::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthVerdict {
    pub classification: Classification,
    /// `m / (m − 1)`.
    pub exponent: f64,
    /// First sample abscissa where the envelope started at the first
    /// positive sample lies above the data.
    pub witness: Option<f64>,
    /// Whether `Y ≤ Ψ(ΔY/Δζ)` held at every checked sample.
    pub consistent: bool,
    /// Least-squares slope of `log Y` on `log ζ` over the last decade.
    pub tail_slope: Option<f64>,
    /// Forward differences stand in for `Y′`; the verdict certifies the
    /// discrete analogue only.
    pub discrete: bool,
}

fn validate(samples: &[(f64, f64)]) -> Result<(), GrowthError> {
    if samples.len() < 2 {
        return Err(GrowthError::MalformedSamples("need at least two samples".into()));
    }
    for (i, &(z, y)) in samples.iter().enumerate() {
        if !z.is_finite() || !y.is_finite() {
            return Err(GrowthError::MalformedSamples(format!("row {i} is not finite")));
        }
        if y < 0.0 {
            return Err(GrowthError::MalformedSamples(format!("row {i}: Y = {y} is negative")));
        }
        if i > 0 {
            let (zp, yp) = samples[i - 1];
            if z <= zp {
                return Err(GrowthError::MalformedSamples(format!("row {i}: zeta is not strictly increasing")));
            }
            if y < yp {
                return Err(GrowthError::MalformedSamples(format!("row {i}: Y decreases")));
            }
        }
    }
    Ok(())
}

fn tail_slope(samples: &[(f64, f64)]) -> Option<f64> {
    let z_end = samples.last()?.0;
    let mut tail: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(z, y)| z >= z_end / 10.0 && z > 0.0 && y > 0.0)
        .map(|&(z, y)| (z.ln(), y.ln()))
        .collect();
    if tail.len() < 2 {
        let half = samples.len() / 2;
        tail = samples[half..].iter().filter(|&&(z, y)| z > 0.0 && y > 0.0).map(|&(z, y)| (z.ln(), y.ln())).collect();
    }
    if tail.len() < 2 {
        return None;
    }
    let n = tail.len() as f64;
    let (mx, my) = tail.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = tail.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Classifies a sampled `Y` against the growth dichotomy.
pub fn classify(samples: &[(f64, f64)], spec: &GrowthSpec) -> Result<GrowthVerdict, GrowthError> {
    validate(samples)?;
    let exponent = spec.exponent();

    let consistent = samples.windows(2).all(|w| {
        let ((z0, y0), (z1, y1)) = (w[0], w[1]);
        let tau = (y1 - y0) / (z1 - z0);
        if tau == 0.0 {
            y0 == 0.0
        } else if tau <= spec.tau1 {
            true
        } else {
            y0 <= spec.psi(tau) * (1.0 + 1e-12)
        }
    });

    let witness = samples.iter().position(|&(_, y)| y > 0.0).and_then(|start| {
        let (z0, y0) = samples[start];
        samples[start + 1..].iter().find(|&&(z, y)| spec.envelope_exact(y0, z - z0) > y * (1.0 + 1e-9)).map(|&(z, _)| z)
    });

    let all_zero = samples.iter().all(|&(_, y)| y == 0.0);
    let slope = if all_zero { None } else { tail_slope(samples) };

    let classification = if !consistent {
        Classification::Inconclusive
    } else if all_zero {
        Classification::MustBeIdenticallyZero
    } else {
        match slope {
            Some(s) if s >= exponent - SLOPE_MARGIN => Classification::ForcedSuperlinearGrowth,
            Some(_) => Classification::MustBeIdenticallyZero,
            None => Classification::Inconclusive,
        }
    };

    Ok(GrowthVerdict { classification, exponent, witness, consistent, tail_slope: slope, discrete: true })
}

#[derive(Debug, Deserialize)]
struct SampleRow {
    zeta: f64,
    #[serde(rename = "Y")]
    y: f64,
}

/// Reads `zeta,Y` CSV rows.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<(f64, f64)>, GrowthError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| GrowthError::MalformedSamples(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "zeta" || &headers[1] != "Y" {
        return Err(GrowthError::MalformedSamples(format!(
            "expected header `zeta,Y`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.deserialize::<SampleRow>()
        .map(|row| row.map(|r| (r.zeta, r.y)).map_err(|e| GrowthError::MalformedSamples(e.to_string())))
        .collect()
}
