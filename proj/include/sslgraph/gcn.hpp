#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sslgraph/graph.hpp"
#include "sslgraph/matrix.hpp"
#include "sslgraph/rng.hpp"

namespace sslgraph {

// Symmetric normalized adjacency with self-loops, CSR storage:
// Ahat = Dt^{-1/2} (A + I) Dt^{-1/2}.
class NormalizedAdjacency {
public:
    explicit NormalizedAdjacency(const Graph& g);

    std::size_t num_nodes() const { return offsets_.size() - 1; }
    double entry(std::size_t i, std::size_t j) const;

    // Y = Ahat * X
    DenseMatrix multiply(const DenseMatrix& x) const;
    DenseMatrix to_dense() const;

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> indices_;
    std::vector<double> values_;
};

NormalizedAdjacency normalize_adjacency(const Graph& g);

// Two-layer GCN: H = Ahat * relu(Ahat * X * W1) * W2. No biases.
struct GcnEncoderParams {
    DenseMatrix w1;  // F x S1
    DenseMatrix w2;  // S1 x S

    static GcnEncoderParams init(std::size_t in_dim, std::size_t hidden_dim,
                                 std::size_t out_dim, Rng& rng);
};

// Two-layer MLP expander: Z = relu(H * W1 + b1) * W2 + b2.
struct ExpanderParams {
    DenseMatrix w1;  // S x Dh
    DenseMatrix b1;  // 1 x Dh
    DenseMatrix w2;  // Dh x D
    DenseMatrix b2;  // 1 x D

    static ExpanderParams init(std::size_t in_dim, std::size_t hidden_dim,
                               std::size_t out_dim, Rng& rng);
};

struct ModelParams {
    GcnEncoderParams encoder;
    ExpanderParams expander;

    std::vector<DenseMatrix*> tensors();
    std::vector<const DenseMatrix*> tensors() const;
    static const std::vector<std::string>& tensor_names();

    bool operator==(const ModelParams& o) const;
};

DenseMatrix encode(const Graph& g, const GcnEncoderParams& params);
DenseMatrix encode(const NormalizedAdjacency& ahat, const DenseMatrix& x,
                   const GcnEncoderParams& params);
DenseMatrix expand(const DenseMatrix& h, const ExpanderParams& params);

// Binary checkpoint, bit-exact round trip of all named tensors.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace sslgraph
