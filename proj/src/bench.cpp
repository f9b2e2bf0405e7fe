#include "sslgraph/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "sslgraph/graph.hpp"

namespace sslgraph {

namespace {

// C = (Z^T Z - n m m^T) / (n-1), accumulated into the d x d buffer without
// a centered copy of Z. Off-diagonal energy summed on the fly.
template <typename T>
CovKernelResult cov_kernel(const T* z, std::size_t n, std::size_t d) {
    std::vector<T> mean(d, T(0));
    for (std::size_t i = 0; i < n; ++i) {
        const T* zi = z + i * d;
        for (std::size_t j = 0; j < d; ++j) mean[j] += zi[j];
    }
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<T>(n);

    std::vector<T> cov(d * d, T(0));  // the covariance buffer: exactly d*d entries
    for (std::size_t i = 0; i < n; ++i) {
        const T* zi = z + i * d;
        for (std::size_t j = 0; j < d; ++j) {
            const T zij = zi[j];
            T* cj = cov.data() + j * d;
            for (std::size_t k = j; k < d; ++k) cj[k] += zij * zi[k];
        }
    }
    const T denom = static_cast<T>(n) - T(1);
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) {
            const T c = (cov[j * d + k] - static_cast<T>(n) * mean[j] * mean[k]) / denom;
            acc += 2.0 * static_cast<double>(c) * static_cast<double>(c);
        }
    CovKernelResult out;
    out.loss = acc / static_cast<double>(d);
    out.cov_buffer_entries = d * d;
    return out;
}

}  // namespace

CovKernelResult covariance_loss_kernel_f64(const DenseMatrix& z) {
    return cov_kernel<double>(z.data(), z.rows(), z.cols());
}

CovKernelResult covariance_loss_kernel_f32(const std::vector<float>& z, std::size_t n,
                                           std::size_t d) {
    if (z.size() != n * d) throw ShapeError("covariance_loss_kernel_f32: size mismatch");
    return cov_kernel<float>(z.data(), n, d);
}

const ScalingCell* ScalingTable::find(std::size_t n, std::size_t d) const {
    for (const auto& c : cells)
        if (c.n == n && c.d == d) return &c;
    return nullptr;
}

namespace {

volatile double g_sink = 0.0;  // defeat dead-code elimination

double time_once_f64(const DenseMatrix& z) {
    const auto t0 = std::chrono::steady_clock::now();
    g_sink = covariance_loss_kernel_f64(z).loss;
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

double time_once_f32(const std::vector<float>& z, std::size_t n, std::size_t d) {
    const auto t0 = std::chrono::steady_clock::now();
    g_sink = covariance_loss_kernel_f32(z, n, d).loss;
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

ScalingTable bench_loss_scaling(const std::vector<std::size_t>& n_list,
                                const std::vector<std::size_t>& d_list, std::size_t reps,
                                bool use_f32, std::uint64_t seed) {
    if (n_list.empty() || d_list.empty()) throw ConfigError("bench_loss_scaling: empty size list");
    if (reps == 0) throw ConfigError("bench_loss_scaling: reps must be >= 1");
    ScalingTable table;
    for (std::size_t n : n_list) {
        for (std::size_t d : d_list) {
            Rng rng = Rng::derive(seed, n, d);
            DenseMatrix z(n, d);
            for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = rng.normal();
            std::vector<float> zf;
            if (use_f32) {
                zf.resize(n * d);
                for (std::size_t i = 0; i < zf.size(); ++i)
                    zf[i] = static_cast<float>(z.data()[i]);
            }

            std::size_t cell_reps = reps;
            double median = 0.0;
            for (;;) {
                for (int w = 0; w < 3; ++w)
                    use_f32 ? time_once_f32(zf, n, d) : time_once_f64(z);
                std::vector<double> times(cell_reps);
                for (std::size_t r = 0; r < cell_reps; ++r)
                    times[r] = use_f32 ? time_once_f32(zf, n, d) : time_once_f64(z);
                std::sort(times.begin(), times.end());
                median = times[cell_reps / 2];
                // timer too coarse for a trustworthy median: raise reps
                if (median >= 1.0 || cell_reps >= 4096) break;
                cell_reps *= 2;
            }

            ScalingCell cell;
            cell.n = n;
            cell.d = d;
            cell.median_ms = median;
            cell.reps = cell_reps;
            cell.cov_buffer_entries = d * d;
            table.cells.push_back(cell);
        }
    }
    return table;
}

void write_scaling_csv(const ScalingTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n,d,median_ms,reps,cov_buffer_entries\n";
    for (const auto& c : table.cells)
        out << c.n << ',' << c.d << ',' << c.median_ms << ',' << c.reps << ','
            << c.cov_buffer_entries << '\n';
}

}  // namespace sslgraph
