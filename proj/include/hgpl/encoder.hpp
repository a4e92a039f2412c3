#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hgpl/matrix.hpp"
#include "hgpl/views.hpp"

namespace hgpl {

enum class Activation { Rectifier };

struct EncoderParams {
  std::vector<Matrix> weights;  // weights[l] is (in_dim x out_dim)
  int hidden_dim = 0;
  Activation activation = Activation::Rectifier;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return weights.empty() ? 0 : weights.front().rows(); }
  std::vector<Matrix> zero_grads() const;
};

// Symmetric normalization with self-loops over the view's local indices:
// A_hat = D^{-1/2} (A + I) D^{-1/2}. Empty view -> empty operator.
CsrMatrix normalize_adjacency(const HomoView& view);

// Glorot-uniform initialization, deterministic per seed. Layer 0 maps
// feature_dim -> hidden_dim, later layers hidden_dim -> hidden_dim.
EncoderParams init_params(int feature_dim, int hidden_dim, int num_layers, uint64_t seed);

// Forward state kept for reverse mode: agg[l] = A_hat * input of layer l,
// pre[l] = agg[l] * W_l (pre-activation).
struct EncodeCache {
  std::vector<Matrix> agg;
  std::vector<Matrix> pre;
};

// H = GCN(A_hat, X): rectifier between layers, final layer linear. Rows of
// `features` align with the view's member_nodes.
Matrix encode_view(const CsrMatrix& adj, const Matrix& features, const EncoderParams& params,
                   EncodeCache* cache = nullptr);

// Exact reverse mode through one view. grad_out is the adjoint at the final
// embeddings; per-layer weight gradients are accumulated into grad_weights.
// The rectifier subgradient at 0 is taken as 0.
void encoder_backward(const CsrMatrix& adj, const EncodeCache& cache, const EncoderParams& params,
                      const Matrix& grad_out, std::vector<Matrix>& grad_weights);

// Checkpoint file: magic, format version, dims, seed, then row-major
// little-endian 64-bit float weight matrices. Round trips are bit-exact.
void save_checkpoint(const std::string& path, const EncoderParams& params, uint64_t seed);
EncoderParams load_checkpoint(const std::string& path, uint64_t* seed_out = nullptr);

// FNV-1a over the raw weight bytes; used for freeze checks.
uint64_t params_checksum(const EncoderParams& params);

}  // namespace hgpl
