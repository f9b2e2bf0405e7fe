#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sslgraph/matrix.hpp"
#include "sslgraph/rng.hpp"

namespace sslgraph {

// Block view of a covariance matrix: A over the landmark dimensions,
// B landmark x complement, C_exact the complement block.
struct CovBlocks {
    DenseMatrix a;        // M x M
    DenseMatrix b;        // M x (D-M)
    DenseMatrix c_exact;  // (D-M) x (D-M)
    std::vector<std::uint32_t> landmark_indices;
};

CovBlocks split_blocks(const DenseMatrix& cov, const std::vector<std::uint32_t>& landmark_indices);

// C ~= B^T A^+ B; pseudo-inverse via symmetric eigendecomposition with a
// 1e-10 relative eigenvalue cutoff.
DenseMatrix nystrom_reconstruct(const CovBlocks& blocks);

struct FixedPointReport {
    bool preconditions_ok = false;
    std::string precondition_failure;   // empty when ok
    double a_identity_residual = 0.0;   // ||A - I||_F
    double b_orthonormal_residual = 0.0;  // ||B B^T - I||_F
    double residual = 0.0;              // ||Cov^2 - 2 Cov||_F
    double cov_norm = 0.0;
    bool passed = false;                // residual < tol * cov_norm
    std::vector<double> spectrum;       // eigenvalues of the assembled Cov
};

// Assembles Cov = [[A, B], [B^T, I]] and checks the Cov^2 = 2 Cov identity.
// Precondition violations yield a failure report, not an exception.
FixedPointReport check_cov_fixed_point(const DenseMatrix& a, const DenseMatrix& b, double tol);

struct WhitenEpochRecord {
    std::size_t epoch = 0;
    std::size_t split_id = 0;
    double split_whiteness = 0.0;   // ||R^T R / (n-1) - I||_F of the active split (centered)
    double offdiag_energy = 0.0;    // sum_{i!=j} Cov_ij^2 over the full matrix
    double loss = 0.0;
};

struct WhitenTrajectory {
    std::vector<WhitenEpochRecord> records;
    std::vector<double> final_split_whiteness;  // one residual per split, at the end
    double initial_offdiag_energy = 0.0;
    double final_offdiag_energy = 0.0;
    double b_orthonormality = 0.0;  // ||B_M B_M^T - c I||_F for the best-fit c
    bool diverged = false;
};

// Free-matrix descent: Adam on Z minimizing the variance + covariance terms
// restricted to rotating_partition(D, M, epoch). Measures how close the
// rotating whitening drives the full covariance toward identity.
WhitenTrajectory rotating_whiten_experiment(const DenseMatrix& z0, std::size_t m,
                                            std::size_t epochs, double lr);

void write_trajectory_csv(const WhitenTrajectory& traj, const std::string& path);

}  // namespace sslgraph
