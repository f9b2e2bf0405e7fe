#include "sslgraph/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace sslgraph {

NormalizedAdjacency::NormalizedAdjacency(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t u = 0; u < n; ++u)
        inv_sqrt_deg[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u) + 1));

    offsets_.resize(n + 1, 0);
    for (std::size_t u = 0; u < n; ++u) offsets_[u + 1] = offsets_[u] + g.degree(u) + 1;
    indices_.reserve(offsets_[n]);
    values_.reserve(offsets_[n]);
    for (std::uint32_t u = 0; u < n; ++u) {
        // merge self-loop into the sorted neighbor run
        bool placed = false;
        for (std::uint32_t v : g.neighbors(u)) {
            if (!placed && u < v) {
                indices_.push_back(u);
                values_.push_back(inv_sqrt_deg[u] * inv_sqrt_deg[u]);
                placed = true;
            }
            indices_.push_back(v);
            values_.push_back(inv_sqrt_deg[u] * inv_sqrt_deg[v]);
        }
        if (!placed) {
            indices_.push_back(u);
            values_.push_back(inv_sqrt_deg[u] * inv_sqrt_deg[u]);
        }
    }
}

double NormalizedAdjacency::entry(std::size_t i, std::size_t j) const {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
        if (indices_[k] == j) return values_[k];
    return 0.0;
}

DenseMatrix NormalizedAdjacency::multiply(const DenseMatrix& x) const {
    const std::size_t n = num_nodes();
    if (x.rows() != n) throw ShapeError("NormalizedAdjacency::multiply: row mismatch");
    const std::size_t m = x.cols();
    DenseMatrix y(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        double* yi = y.data() + i * m;
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
            const double w = values_[k];
            const double* xr = x.data() + indices_[k] * m;
            for (std::size_t j = 0; j < m; ++j) yi[j] += w * xr[j];
        }
    }
    return y;
}

DenseMatrix NormalizedAdjacency::to_dense() const {
    const std::size_t n = num_nodes();
    DenseMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k)
            d(i, indices_[k]) = values_[k];
    return d;
}

NormalizedAdjacency normalize_adjacency(const Graph& g) { return NormalizedAdjacency(g); }

namespace {

// Glorot-uniform fan-in/fan-out init.
DenseMatrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    DenseMatrix w(rows, cols);
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (std::size_t i = 0; i < w.size(); ++i)
        w.data()[i] = limit * (2.0 * rng.uniform() - 1.0);
    return w;
}

DenseMatrix relu(DenseMatrix m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.data()[i] < 0.0) m.data()[i] = 0.0;
    return m;
}

}  // namespace

GcnEncoderParams GcnEncoderParams::init(std::size_t in_dim, std::size_t hidden_dim,
                                        std::size_t out_dim, Rng& rng) {
    return {glorot(in_dim, hidden_dim, rng), glorot(hidden_dim, out_dim, rng)};
}

ExpanderParams ExpanderParams::init(std::size_t in_dim, std::size_t hidden_dim,
                                    std::size_t out_dim, Rng& rng) {
    if (out_dim < 1) throw ConfigError("expander output dimension must be >= 1");
    return {glorot(in_dim, hidden_dim, rng), DenseMatrix(1, hidden_dim),
            glorot(hidden_dim, out_dim, rng), DenseMatrix(1, out_dim)};
}

std::vector<DenseMatrix*> ModelParams::tensors() {
    return {&encoder.w1, &encoder.w2, &expander.w1, &expander.b1, &expander.w2, &expander.b2};
}

std::vector<const DenseMatrix*> ModelParams::tensors() const {
    return {&encoder.w1, &encoder.w2, &expander.w1, &expander.b1, &expander.w2, &expander.b2};
}

const std::vector<std::string>& ModelParams::tensor_names() {
    static const std::vector<std::string> names = {"encoder.w1", "encoder.w2", "expander.w1",
                                                   "expander.b1", "expander.w2", "expander.b2"};
    return names;
}

bool ModelParams::operator==(const ModelParams& o) const {
    auto a = tensors();
    auto b = o.tensors();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(*a[i] == *b[i])) return false;
    return true;
}

DenseMatrix encode(const NormalizedAdjacency& ahat, const DenseMatrix& x,
                   const GcnEncoderParams& params) {
    if (x.cols() != params.w1.rows()) throw ShapeError("encode: feature dim != W1 rows");
    DenseMatrix h1 = relu(matmul(ahat.multiply(x), params.w1));
    return matmul(ahat.multiply(h1), params.w2);
}

DenseMatrix encode(const Graph& g, const GcnEncoderParams& params) {
    return encode(NormalizedAdjacency(g), g.features(), params);
}

DenseMatrix expand(const DenseMatrix& h, const ExpanderParams& params) {
    if (h.cols() != params.w1.rows()) throw ShapeError("expand: input dim != W1 rows");
    DenseMatrix a = matmul(h, params.w1);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) += params.b1(0, j);
    a = relu(std::move(a));
    DenseMatrix z = matmul(a, params.w2);
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += params.b2(0, j);
    return z;
}

namespace {
constexpr std::uint64_t kCheckpointMagic = 0x53534c4743484b31ULL;  // "SSLGCHK1"
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(reinterpret_cast<const char*>(&kCheckpointMagic), sizeof(kCheckpointMagic));
    auto tensors = params.tensors();
    const auto& names = ModelParams::tensor_names();
    const std::uint64_t count = tensors.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        const std::uint64_t name_len = names[t].size();
        out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
        out.write(names[t].data(), static_cast<std::streamsize>(name_len));
        const std::uint64_t rows = tensors[t]->rows(), cols = tensors[t]->cols();
        out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
        out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
        out.write(reinterpret_cast<const char*>(tensors[t]->data()),
                  static_cast<std::streamsize>(tensors[t]->size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::uint64_t magic = 0, count = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    if (magic != kCheckpointMagic) throw ParseError("bad checkpoint magic in " + path);
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    ModelParams params;
    auto tensors = params.tensors();
    const auto& names = ModelParams::tensor_names();
    if (count != tensors.size()) throw ParseError("unexpected tensor count in " + path);
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        std::uint64_t name_len = 0;
        in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        std::string name(name_len, '\0');
        in.read(name.data(), static_cast<std::streamsize>(name_len));
        if (name != names[t]) throw ParseError("unexpected tensor name '" + name + "' in " + path);
        std::uint64_t rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
        in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
        *tensors[t] = DenseMatrix(rows, cols);
        in.read(reinterpret_cast<char*>(tensors[t]->data()),
                static_cast<std::streamsize>(rows * cols * sizeof(double)));
    }
    if (!in) throw ParseError("truncated checkpoint: " + path);
    return params;
}

}  // namespace sslgraph
