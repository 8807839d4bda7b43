use crate::checker::Verdict;

/// Failure modes shared across planning, construction, and verification.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The weight family stops being a positive sequence at this parameter.
    #[error("{family}: weights are not positive at lambda = {lambda}")]
    DomainViolation { family: String, lambda: f64 },

    /// The inverse weight-product series has no convergent majorant at this
    /// parameter, so no finite tail bound can be certified.
    #[error("{family}: inverse weight products are not summable at lambda = {lambda}")]
    NonSummable { family: String, lambda: f64 },

    /// The applicability checker rejected the family on the given interval.
    #[error("family criterion does not hold on the interval ({} conditions failed)",
        verdicts.iter().filter(|v| !v.holds()).count())]
    NotApplicable { verdicts: Vec<Verdict> },

    #[error("budget exceeded at block {tau}: block length {l_tau}, \
             {ops} coefficient ops over cap {cap}")]
    BudgetExceeded { tau: u32, l_tau: u64, ops: u128, cap: u128 },

    /// An upward parameter search hit its iteration limit before the
    /// certified bound dropped below the target.
    #[error("search for {parameter} exceeded limit {limit}")]
    SearchExceeded { parameter: &'static str, limit: u64 },

    /// A block coefficient rounded to zero: the construction is sound but
    /// cannot be represented in f64 at this depth.
    #[error("block {block} has coefficients below the smallest positive f64")]
    Underflow { block: u32 },

    #[error("config: {}", errors.join("; "))]
    Config { errors: Vec<String> },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
