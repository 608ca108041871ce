use std::fmt;

use crate::combinatorics::MultiIndex;

/// Canonical label of one intersection number `⟨κ(b) Π τ_{d_i}⟩_g`:
/// ψ exponents are kept sorted in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorKey {
    pub genus: u32,
    pub kappa: MultiIndex,
    pub psi: Vec<u32>,
}

impl CorrelatorKey {
    pub fn new(genus: u32, kappa: MultiIndex, psi: impl Into<Vec<u32>>) -> Self {
        let mut psi = psi.into();
        psi.sort_unstable_by(|a, b| b.cmp(a));
        Self { genus, kappa, psi }
    }

    /// A key with no κ classes.
    pub fn pure(genus: u32, psi: impl Into<Vec<u32>>) -> Self {
        Self::new(genus, MultiIndex::zero(), psi)
    }

    /// Number of marked points.
    pub fn n(&self) -> usize {
        self.psi.len()
    }

    /// Total cohomological degree of the κ and ψ insertions.
    pub fn degree(&self) -> u32 {
        self.kappa.weight() + self.psi.iter().sum::<u32>()
    }

    /// Θ has degree `2g-2+n`, leaving `g-1` for the insertions; genus zero
    /// vanishes identically.
    pub fn is_degree_valid(&self) -> bool {
        self.genus >= 1 && self.degree() == self.genus - 1
    }
}

impl fmt::Display for CorrelatorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let psi: Vec<String> = self.psi.iter().map(u32::to_string).collect();
        write!(f, "<kappa({}) tau({})>_{}", self.kappa, psi.join(","), self.genus)
    }
}
