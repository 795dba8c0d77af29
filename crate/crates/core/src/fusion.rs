//! Score fusion and weight fitting.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};
use crate::model::{ClaimStatus, Response};

/// Convex weights of the three score terms plus a decision offset.
///
/// The offset does not enter the score; `-bias` is the score at which a
/// fitted model switches from clean to hallucinated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub bias: f64,
}

impl Default for FusionWeights {
    fn default() -> Self {
        FusionWeights {
            alpha: 0.2,
            beta: 0.6,
            gamma: 0.2,
            bias: -0.35,
        }
    }
}

impl FusionWeights {
    /// Validates and rescales `alpha`, `beta`, `gamma` to sum to one. Weights
    /// already summing to one within `1e-12` are kept as given.
    pub fn new(alpha: f64, beta: f64, gamma: f64, bias: f64) -> Result<Self> {
        let parts = [alpha, beta, gamma];
        if parts.iter().any(|w| !w.is_finite() || *w < 0.0) || !bias.is_finite() {
            return Err(Error::InvalidWeights(format!("{alpha} {beta} {gamma} {bias}")));
        }
        let sum: f64 = parts.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        let sum = if (sum - 1.0).abs() <= 1e-12 { 1.0 } else { sum };
        Ok(FusionWeights {
            alpha: alpha / sum,
            beta: beta / sum,
            gamma: gamma / sum,
            bias,
        })
    }

    pub fn normalized(self) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.gamma, self.bias)
    }

    /// Score above which a response counts as hallucinated.
    pub fn threshold(&self) -> f64 {
        -self.bias
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        read_file(path)?.parse().map_err(|e: Error| match e {
            Error::InvalidWeights(m) => Error::InvalidWeights(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, format!("{self}\n")).map_err(|e| Error::io(path, e))
    }
}

/// `alpha beta gamma bias`, space separated.
impl fmt::Display for FusionWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.alpha, self.beta, self.gamma, self.bias)
    }
}

impl FromStr for FusionWeights {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<f64> = s
            .split_whitespace()
            .map(|f| f.parse::<f64>().map_err(|_| Error::InvalidWeights(format!("not a number: {f:?}"))))
            .collect::<Result<_>>()?;
        match fields.as_slice() {
            [a, b, g, bias] => FusionWeights::new(*a, *b, *g, *bias),
            _ => Err(Error::InvalidWeights(format!("expected 4 numbers, found {}", fields.len()))),
        }
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InputOutOfRange { name, value })
    }
}

/// `alpha * p_causal + beta * p_symbolic + gamma * u`.
///
/// ```
/// use claimguard::fusion::{fuse, FusionWeights};
/// let w = FusionWeights::new(0.5, 0.3, 0.2, 0.0).unwrap();
/// assert!((fuse(0.6, 0.9, 0.3, &w).unwrap() - 0.63).abs() < 1e-12);
/// assert!(fuse(1.2, 0.0, 0.0, &w).is_err());
/// ```
pub fn fuse(p_causal: f64, p_symbolic: f64, u: f64, w: &FusionWeights) -> Result<f64> {
    check_unit("p_causal", p_causal)?;
    check_unit("p_symbolic", p_symbolic)?;
    check_unit("uncertainty", u)?;
    Ok((w.alpha * p_causal + w.beta * p_symbolic + w.gamma * u).clamp(0.0, 1.0))
}

/// `(contradicted + 0.5 * unverifiable) / n`, or 0 without claims.
pub fn p_symbolic(statuses: &[ClaimStatus]) -> f64 {
    if statuses.is_empty() {
        return 0.0;
    }
    let weight: f64 = statuses
        .iter()
        .map(|s| match s {
            ClaimStatus::Supported => 0.0,
            ClaimStatus::Contradicted => 1.0,
            ClaimStatus::Unverifiable => 0.5,
        })
        .sum();
    weight / statuses.len() as f64
}

/// Score used when a response yields no claims.
pub const NO_CLAIMS_UNCERTAINTY: f64 = 0.5;

/// One minus the mean generator confidence; without confidences, the share
/// of unverifiable claims.
pub fn uncertainty(response: &Response, statuses: &[ClaimStatus]) -> f64 {
    match &response.claim_confidences {
        Some(c) if !c.is_empty() => (1.0 - c.iter().sum::<f64>() / c.len() as f64).clamp(0.0, 1.0),
        _ if statuses.is_empty() => NO_CLAIMS_UNCERTAINTY,
        _ => statuses.iter().filter(|s| **s == ClaimStatus::Unverifiable).count() as f64 / statuses.len() as f64,
    }
}

/// A labelled feature vector for fitting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitExample {
    pub p_causal: f64,
    pub p_symbolic: f64,
    pub uncertainty: f64,
    pub label: bool,
}

impl FitExample {
    fn features(&self) -> [f64; 3] {
        [self.p_causal, self.p_symbolic, self.uncertainty]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            seed: 0,
            epochs: 2000,
            learning_rate: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub weights: FusionWeights,
    /// Mean cross-entropy before training and after each epoch.
    pub loss_curve: Vec<f64>,
    /// Training accuracy of the fitted decision rule.
    pub accuracy: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn loss(data: &[FitExample], w: &[f64; 3], b: f64) -> f64 {
    let total: f64 = data
        .iter()
        .map(|e| {
            let z = dot(w, &e.features()) + b;
            if e.label {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    total / data.len() as f64
}

fn gradient(data: &[FitExample], w: &[f64; 3], b: f64) -> ([f64; 3], f64) {
    let mut gw = [0.0; 3];
    let mut gb = 0.0;
    for e in data {
        let x = e.features();
        let r = sigmoid(dot(w, &x) + b) - if e.label { 1.0 } else { 0.0 };
        for i in 0..3 {
            gw[i] += r * x[i];
        }
        gb += r;
    }
    let n = data.len() as f64;
    (gw.map(|g| g / n), gb / n)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Fits weights by projected full-batch gradient descent on the logistic
/// loss of `w . x + b` with `w >= 0`. A step that would raise the loss is
/// rejected and the learning rate halved, so the loss curve never increases.
/// The result is rescaled so the weights sum to one; the bias is rescaled by
/// the same factor, which leaves the decision rule unchanged.
pub fn fit_weights(data: &[FitExample], options: FitOptions) -> Result<FitResult> {
    if data.len() < 2 {
        return Err(Error::DegenerateData("need at least two examples".into()));
    }
    if data.iter().all(|e| e.label) || data.iter().all(|e| !e.label) {
        return Err(Error::DegenerateData("both labels must be present".into()));
    }
    if data.iter().all(|e| e.features() == data[0].features()) {
        return Err(Error::DegenerateData("all feature vectors are identical".into()));
    }
    if data.iter().flat_map(|e| e.features()).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite feature".into()));
    }
    if !(options.learning_rate > 0.0 && options.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!("learning rate {}", options.learning_rate)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut w: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.05..0.15));
    let mut b = 0.0;
    let mut lr = options.learning_rate;
    let mut current = loss(data, &w, b);
    let mut curve = vec![current];
    for _ in 0..options.epochs {
        let (gw, gb) = gradient(data, &w, b);
        loop {
            let candidate: [f64; 3] = std::array::from_fn(|i| (w[i] - lr * gw[i]).max(0.0));
            let cb = b - lr * gb;
            let next = loss(data, &candidate, cb);
            if next <= current {
                w = candidate;
                b = cb;
                current = next;
                break;
            }
            lr /= 2.0;
            if lr < 1e-12 {
                break;
            }
        }
        curve.push(current);
    }

    let correct = data.iter().filter(|e| (dot(&w, &e.features()) + b >= 0.0) == e.label).count();
    let accuracy = correct as f64 / data.len() as f64;
    let scale: f64 = w.iter().sum();
    let weights = if scale > 0.0 {
        FusionWeights::new(w[0] / scale, w[1] / scale, w[2] / scale, b / scale)?
    } else {
        // constant classifier: every score falls on one side of the threshold
        FusionWeights::new(1.0, 1.0, 1.0, if b >= 0.0 { 0.0 } else { -1.0 - f64::EPSILON })?
    };
    Ok(FitResult {
        weights,
        loss_curve: curve,
        accuracy,
    })
}

/// Accuracy of `score >= -bias` on the examples.
pub fn accuracy(weights: &FusionWeights, data: &[FitExample]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let w = [weights.alpha, weights.beta, weights.gamma];
    let correct = data
        .iter()
        .filter(|e| (dot(&w, &e.features()) >= weights.threshold()) == e.label)
        .count();
    correct as f64 / data.len() as f64
}

/// Parses `p_causal p_symbolic uncertainty label` lines; `#` comments.
pub fn parse_fit_examples(text: &str, source_name: &str) -> Result<Vec<FitExample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: String| Error::format(source_name, i + 1, m);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [pc, ps, u, label] = fields.as_slice() else {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}")));
        let label = match *label {
            "1" | "true" | "hallucinated" => true,
            "0" | "false" | "clean" => false,
            other => return Err(bad(format!("label must be 0 or 1, found {other:?}"))),
        };
        out.push(FitExample {
            p_causal: num(pc)?,
            p_symbolic: num(ps)?,
            uncertainty: num(u)?,
            label,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Response;

    #[test]
    fn p_symbolic_examples() {
        use ClaimStatus::*;
        assert_eq!(p_symbolic(&[Supported, Supported]), 0.0);
        assert_eq!(p_symbolic(&[Contradicted, Contradicted]), 1.0);
        assert_eq!(p_symbolic(&[Supported, Contradicted, Unverifiable]), 0.5);
        assert_eq!(p_symbolic(&[]), 0.0);
    }

    #[test]
    fn uncertainty_examples() {
        use ClaimStatus::*;
        let mut r = Response::new("", vec![]);
        r.claim_confidences = Some(vec![1.0, 1.0]);
        assert_eq!(uncertainty(&r, &[Supported, Supported]), 0.0);
        r.claim_confidences = Some(vec![0.8, 0.6]);
        assert!((uncertainty(&r, &[Supported, Supported]) - 0.3).abs() < 1e-12);
        r.claim_confidences = None;
        assert_eq!(uncertainty(&r, &[Supported, Unverifiable]), 0.5);
        assert_eq!(uncertainty(&r, &[]), 0.5);
    }

    #[test]
    fn fuse_endpoints() {
        let w = FusionWeights::default();
        assert_eq!(fuse(0.0, 0.0, 0.0, &w).unwrap(), 0.0);
        assert!((fuse(1.0, 1.0, 1.0, &w).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(fuse(0.0, -0.1, 0.0, &w), Err(Error::InputOutOfRange { name: "p_symbolic", .. })));
    }

    #[test]
    fn weights_file_round_trip() {
        let w = FusionWeights::new(2.0, 1.0, 1.0, -0.4).unwrap();
        assert_eq!(w.alpha, 0.5);
        let again: FusionWeights = w.to_string().parse().unwrap();
        assert_eq!(again, w);
        assert!("0.1 0.2".parse::<FusionWeights>().is_err());
        assert!("-1 1 1 0".parse::<FusionWeights>().is_err());
        assert!("0 0 0 0".parse::<FusionWeights>().is_err());
    }

    fn ex(p_causal: f64, p_symbolic: f64, uncertainty: f64, label: bool) -> FitExample {
        FitExample {
            p_causal,
            p_symbolic,
            uncertainty,
            label,
        }
    }

    #[test]
    fn degenerate_data() {
        assert!(matches!(fit_weights(&[ex(0.1, 0.2, 0.3, true)], FitOptions::default()), Err(Error::DegenerateData(_))));
        let one_class = [ex(0.1, 0.2, 0.3, true), ex(0.3, 0.2, 0.1, true)];
        assert!(fit_weights(&one_class, FitOptions::default()).is_err());
        let same = [ex(0.1, 0.2, 0.3, true), ex(0.1, 0.2, 0.3, false)];
        assert!(fit_weights(&same, FitOptions::default()).is_err());
    }

    #[test]
    fn fit_file_parsing() {
        let data = parse_fit_examples("# pc ps u label\n0.1 0.9 0.0 1\n0.2 0.0 0.1 0\n", "f").unwrap();
        assert_eq!(data.len(), 2);
        assert!(data[0].label);
        assert!(parse_fit_examples("0.1 0.9 0.0 2\n", "f").unwrap_err().to_string().starts_with("f:1:"));
    }
}
