//! Revenue-maximizing prices for the two charging mechanisms.

pub mod access;
pub mod info;

/// One candidate price examined by an optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeeCandidate {
    pub label: &'static str,
    pub fee: f64,
    pub revenue: f64,
    /// Whether the candidate lies inside the interval where its formula holds.
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingResult {
    pub optimal_fee: f64,
    /// Revenue per unit time at `optimal_fee`.
    pub optimal_revenue: f64,
    /// Every candidate considered, valid or not.
    pub candidates: Vec<FeeCandidate>,
    /// No positive price earns anything.
    pub degenerate: bool,
}

impl PricingResult {
    /// Picks the best valid candidate; ties go to the smaller fee.
    pub(crate) fn from_candidates(candidates: Vec<FeeCandidate>) -> Self {
        let best = candidates
            .iter()
            .filter(|c| c.valid && c.fee >= 0.0 && c.revenue > 0.0)
            .fold(None::<&FeeCandidate>, |best, c| match best {
                Some(b) if b.revenue > c.revenue => Some(b),
                Some(b) if b.revenue == c.revenue && b.fee <= c.fee => Some(b),
                _ => Some(c),
            })
            .copied();
        match best {
            Some(b) => Self {
                optimal_fee: b.fee,
                optimal_revenue: b.revenue,
                candidates,
                degenerate: false,
            },
            None => Self {
                optimal_fee: 0.0,
                optimal_revenue: 0.0,
                candidates,
                degenerate: true,
            },
        }
    }
}
