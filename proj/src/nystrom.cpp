#include "sslgraph/nystrom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sslgraph/autodiff.hpp"
#include "sslgraph/vicreg.hpp"

namespace sslgraph {

CovBlocks split_blocks(const DenseMatrix& cov, const std::vector<std::uint32_t>& landmarks) {
    if (cov.rows() != cov.cols()) throw ShapeError("split_blocks: covariance not square");
    const std::size_t d = cov.rows();
    const std::size_t m = landmarks.size();
    if (m == 0 || m >= d) throw ConfigError("split_blocks: need 0 < M < D landmarks");
    std::vector<bool> is_landmark(d, false);
    for (std::uint32_t l : landmarks) {
        if (l >= d) throw std::out_of_range("split_blocks: landmark index out of range");
        if (is_landmark[l]) throw ConfigError("split_blocks: duplicate landmark index");
        is_landmark[l] = true;
    }
    std::vector<std::uint32_t> sorted_l = landmarks;
    std::sort(sorted_l.begin(), sorted_l.end());
    std::vector<std::uint32_t> complement;
    for (std::uint32_t i = 0; i < d; ++i)
        if (!is_landmark[i]) complement.push_back(i);

    CovBlocks out;
    out.landmark_indices = sorted_l;
    out.a = DenseMatrix(m, m);
    out.b = DenseMatrix(m, d - m);
    out.c_exact = DenseMatrix(d - m, d - m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) out.a(i, j) = cov(sorted_l[i], sorted_l[j]);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < d - m; ++j) out.b(i, j) = cov(sorted_l[i], complement[j]);
    for (std::size_t i = 0; i < d - m; ++i)
        for (std::size_t j = 0; j < d - m; ++j) out.c_exact(i, j) = cov(complement[i], complement[j]);
    return out;
}

DenseMatrix nystrom_reconstruct(const CovBlocks& blocks) {
    // symmetric_pinv throws on asymmetric A
    DenseMatrix a_pinv = symmetric_pinv(blocks.a, 1e-10);
    return matmul_tn(blocks.b, matmul(a_pinv, blocks.b));
}

FixedPointReport check_cov_fixed_point(const DenseMatrix& a, const DenseMatrix& b, double tol) {
    FixedPointReport report;
    const std::size_t m = a.rows();
    if (a.cols() != m || b.rows() != m) {
        report.precondition_failure = "shape mismatch: A must be M x M and B M x (D-M)";
        return report;
    }
    DenseMatrix a_err = a;
    a_err -= DenseMatrix::identity(m);
    report.a_identity_residual = frobenius_norm(a_err);

    DenseMatrix bbt = matmul_nt(b, b);
    bbt -= DenseMatrix::identity(m);
    report.b_orthonormal_residual = frobenius_norm(bbt);

    if (report.a_identity_residual > tol) {
        report.precondition_failure = "A is not identity within tol";
    } else if (report.b_orthonormal_residual > tol) {
        report.precondition_failure = "B is not row-orthonormal within tol";
    } else {
        report.preconditions_ok = true;
    }

    const std::size_t dm = b.cols();
    const std::size_t d = m + dm;
    DenseMatrix cov(d, d);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) cov(i, j) = a(i, j);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < dm; ++j) {
            cov(i, m + j) = b(i, j);
            cov(m + j, i) = b(i, j);
        }
    for (std::size_t j = 0; j < dm; ++j) cov(m + j, m + j) = 1.0;

    DenseMatrix cov2 = matmul(cov, cov);
    DenseMatrix twice = cov;
    twice *= 2.0;
    cov2 -= twice;
    report.residual = frobenius_norm(cov2);
    report.cov_norm = frobenius_norm(cov);
    report.passed = report.preconditions_ok && report.residual < tol * report.cov_norm;
    report.spectrum = symmetric_eig(cov).eigenvalues;
    return report;
}

namespace {

double split_whiteness(const DenseMatrix& z, const std::vector<std::uint32_t>& split) {
    DenseMatrix cov = covariance_matrix(z, nullptr, &split);
    cov -= DenseMatrix::identity(cov.rows());
    return frobenius_norm(cov);
}

double full_offdiag_energy(const DenseMatrix& z) {
    return covariance_loss(z) * static_cast<double>(z.cols());
}

}  // namespace

WhitenTrajectory rotating_whiten_experiment(const DenseMatrix& z0, std::size_t m,
                                            std::size_t epochs, double lr) {
    const std::size_t d = z0.cols();
    if (m == 0 || d % m != 0) throw ConfigError("rotating_whiten_experiment: M must divide D");
    const std::size_t splits = d / m;
    if (epochs < splits) throw ConfigError("rotating_whiten_experiment: epochs must be >= D/M");
    constexpr double kEps = 1e-4;

    WhitenTrajectory traj;
    traj.initial_offdiag_energy = full_offdiag_energy(z0);

    // plain gradient descent: steps shrink with the gradient, so a whitened
    // iterate is an exact fixed point (adaptive optimizers keep renormalizing
    // vanishing gradients into full-size steps and wander off the optimum)
    DenseMatrix z = z0;
    std::vector<DenseMatrix*> params = {&z};

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        const auto split = rotating_partition(d, m, epoch);
        DenseMatrix g(z.rows(), z.cols());
        const double var = variance_loss(z, kEps, nullptr, &split);
        const double cov = covariance_loss(z, nullptr, &split);
        variance_backward(z, kEps, nullptr, &split, 1.0, g);
        covariance_backward(z, nullptr, &split, 1.0, g);
        if (!g.all_finite()) {
            traj.diverged = true;
            break;
        }
        sgd_step(params, {&g}, lr);

        if (!z.all_finite()) {
            traj.diverged = true;
            break;
        }
        WhitenEpochRecord rec;
        rec.epoch = epoch;
        rec.split_id = epoch % splits;
        rec.split_whiteness = split_whiteness(z, split);
        rec.offdiag_energy = full_offdiag_energy(z);
        rec.loss = var + cov;
        traj.records.push_back(rec);
    }

    traj.final_offdiag_energy = traj.records.empty() ? traj.initial_offdiag_energy
                                                     : traj.records.back().offdiag_energy;
    for (std::size_t k = 0; k < splits; ++k)
        traj.final_split_whiteness.push_back(split_whiteness(z, rotating_partition(d, m, k)));

    // B block of the last split against the rest: B_M = Cov[last, complement].
    if (splits > 1 && !traj.diverged) {
        DenseMatrix cov = covariance_matrix(z);
        const auto last = rotating_partition(d, m, splits - 1);
        std::vector<std::uint32_t> b_cols;
        for (std::uint32_t j = 0; j < d; ++j)
            if (j < last.front() || j > last.back()) b_cols.push_back(j);
        DenseMatrix b(m, b_cols.size());
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < b_cols.size(); ++j) b(i, j) = cov(last[i], b_cols[j]);
        DenseMatrix bbt = matmul_nt(b, b);
        double c = 0.0;
        for (std::size_t i = 0; i < m; ++i) c += bbt(i, i);
        c /= static_cast<double>(m);
        DenseMatrix ci = DenseMatrix::identity(m);
        ci *= c;
        bbt -= ci;
        traj.b_orthonormality = frobenius_norm(bbt);
    }
    return traj;
}

void write_trajectory_csv(const WhitenTrajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "epoch,split_id,split_whiteness,offdiag_energy,b_orthonormality\n";
    for (const auto& rec : traj.records)
        out << rec.epoch << ',' << rec.split_id << ',' << rec.split_whiteness << ','
            << rec.offdiag_energy << ',' << traj.b_orthonormality << '\n';
}

}  // namespace sslgraph
