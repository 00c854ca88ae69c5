#pragma once

namespace markowitz {

/// Dimensionless thresholds used for every rank, sign and comparison
/// decision in the library. All of them are relative to a problem scale
/// that is floored at 1, so they behave absolutely for desk-scale inputs
/// and relatively for large ones.
struct ToleranceConfig {
    /// Largest tolerated asymmetry |r[a][b] - r[b][a]| relative to max(1, |r|).
    double sym = 1e-9;
    /// Eigenvalues of r below -psd * max(1, lambda_max) reject the market.
    double psd = 1e-9;
    /// Rank / kernel cutoff: eigenvalues below rank * max(1, lambda_max)
    /// count as zero. Also used for singularity and independence checks.
    double rank = 1e-9;
    /// Morphism probe deviations above match * scale fail is_morphism.
    double match = 1e-8;
    /// Invariant comparison threshold for isomorphism decisions.
    double iso = 1e-7;
    /// Largest acceptable entrywise deviation between the pushforward of a
    /// market through its canonicalizing map and the canonical model.
    double canon = 1e-8;
};

} // namespace markowitz
