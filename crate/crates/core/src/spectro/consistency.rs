use super::fit::PowerLawFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Inconsistent => "inconsistent",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

/// An exponent with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub stderr: f64,
}

impl Measured {
    pub fn new(value: f64, stderr: f64) -> Self {
        Measured { value, stderr }
    }

    pub fn from_fit(fit: &PowerLawFit) -> Option<Self> {
        fit.value_and_error().map(|(v, e)| Measured::new(v, e))
    }
}

/// Alpha, beta and gamma for one (market, class, pool) cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExponentTriple {
    pub alpha: Option<Measured>,
    pub beta: Option<Measured>,
    pub gamma: Option<Measured>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    pub beta_gamma: Option<Measured>,
    /// `sqrt(σα² + σβγ²)`.
    pub combined_sigma: Option<f64>,
    pub difference: Option<f64>,
    pub verdict: Verdict,
}

/// `βγ` with first-order error propagation:
/// `σ = sqrt((β σγ)² + (γ σβ)²)`.
pub fn product_with_error(beta: Measured, gamma: Measured) -> Measured {
    Measured {
        value: beta.value * gamma.value,
        stderr: (beta.value * gamma.stderr).hypot(gamma.value * beta.stderr),
    }
}

/// Check `α = βγ` at `k` combined standard errors.
pub fn check_exponent_relation(triple: &ExponentTriple, k: f64) -> ConsistencyReport {
    let beta_gamma = match (triple.beta, triple.gamma) {
        (Some(b), Some(g)) => Some(product_with_error(b, g)),
        _ => None,
    };
    let (Some(alpha), Some(bg)) = (triple.alpha, beta_gamma) else {
        return ConsistencyReport {
            beta_gamma,
            combined_sigma: None,
            difference: None,
            verdict: Verdict::Indeterminate,
        };
    };
    let sigma = alpha.stderr.hypot(bg.stderr);
    let diff = (alpha.value - bg.value).abs();
    ConsistencyReport {
        beta_gamma: Some(bg),
        combined_sigma: Some(sigma),
        difference: Some(diff),
        verdict: if diff <= k * sigma {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        },
    }
}
