#include "hgpl/encoder.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>

#include "hgpl/error.hpp"
#include "hgpl/rng.hpp"

namespace hgpl {

std::vector<Matrix> EncoderParams::zero_grads() const {
  std::vector<Matrix> grads;
  grads.reserve(weights.size());
  for (const Matrix& w : weights) grads.emplace_back(w.rows(), w.cols());
  return grads;
}

CsrMatrix normalize_adjacency(const HomoView& view) {
  const int n = static_cast<int>(view.member_nodes.size());
  CsrMatrix out;
  out.rows = out.cols = n;
  out.row_ptr.assign(n + 1, 0);
  if (n == 0) return out;

  // Neighbor lists with self-loops; view edges are stored symmetrically.
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) nbrs[i].push_back(i);
  for (const auto& [a, b] : view.edges) nbrs[a].push_back(b);
  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    std::sort(nbrs[i].begin(), nbrs[i].end());
    nbrs[i].erase(std::unique(nbrs[i].begin(), nbrs[i].end()), nbrs[i].end());
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(nbrs[i].size()));
  }
  for (int i = 0; i < n; ++i) {
    out.row_ptr[i + 1] = out.row_ptr[i] + static_cast<int>(nbrs[i].size());
    for (int j : nbrs[i]) {
      out.col.push_back(j);
      out.val.push_back(inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
  }
  return out;
}

EncoderParams init_params(int feature_dim, int hidden_dim, int num_layers, uint64_t seed) {
  if (feature_dim < 1 || hidden_dim < 1 || num_layers < 1) {
    throw ConfigError("init_params: dims and layer count must be >= 1");
  }
  EncoderParams params;
  params.hidden_dim = hidden_dim;
  Rng rng(seed);
  for (int l = 0; l < num_layers; ++l) {
    const int in_dim = l == 0 ? feature_dim : hidden_dim;
    Matrix w(in_dim, hidden_dim);
    const double bound = std::sqrt(6.0 / (in_dim + hidden_dim));
    for (double& x : w.data()) x = (2.0 * rng.real01() - 1.0) * bound;
    params.weights.push_back(std::move(w));
  }
  return params;
}

Matrix encode_view(const CsrMatrix& adj, const Matrix& features, const EncoderParams& params,
                   EncodeCache* cache) {
  if (features.rows() != adj.rows) {
    throw DataError("encode_view: feature rows " + std::to_string(features.rows()) +
                    " do not match view size " + std::to_string(adj.rows));
  }
  if (features.cols() != params.input_dim()) {
    throw DataError("encode_view: feature dim " + std::to_string(features.cols()) +
                    " does not match encoder input dim " + std::to_string(params.input_dim()));
  }
  if (cache != nullptr) {
    cache->agg.clear();
    cache->pre.clear();
  }

  const int num_layers = params.num_layers();
  Matrix h = features;
  for (int l = 0; l < num_layers; ++l) {
    Matrix agg = spmm(adj, h);
    Matrix pre = matmul(agg, params.weights[l]);
    if (l + 1 < num_layers) {
      h = pre;
      for (double& x : h.data()) x = x > 0.0 ? x : 0.0;
    } else {
      h = pre;
    }
    if (cache != nullptr) {
      cache->agg.push_back(std::move(agg));
      cache->pre.push_back(std::move(pre));
    }
  }
  return h;
}

void encoder_backward(const CsrMatrix& adj, const EncodeCache& cache, const EncoderParams& params,
                      const Matrix& grad_out, std::vector<Matrix>& grad_weights) {
  const int num_layers = params.num_layers();
  if (static_cast<int>(cache.pre.size()) != num_layers) {
    throw DataError("encoder_backward: cache does not match layer count");
  }
  assert(static_cast<int>(grad_weights.size()) == num_layers);
  if (adj.rows == 0) return;

  Matrix grad_h = grad_out;  // adjoint at the output of layer l+1
  for (int l = num_layers - 1; l >= 0; --l) {
    Matrix grad_pre = std::move(grad_h);
    if (l + 1 < num_layers) {
      const Matrix& pre = cache.pre[l];
      for (size_t i = 0; i < grad_pre.data().size(); ++i) {
        if (pre.data()[i] <= 0.0) grad_pre.data()[i] = 0.0;
      }
    }
    add_inplace(grad_weights[l], matmul_at_b(cache.agg[l], grad_pre));
    if (l > 0) {
      // d(agg)/d(input) through A_hat; A_hat is symmetric.
      grad_h = spmm(adj, matmul_a_bt(grad_pre, params.weights[l]));
    }
  }
}

namespace {

constexpr char kMagic[8] = {'H', 'G', 'P', 'L', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ofstream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

uint64_t get_u64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

uint64_t double_bits(double x) {
  uint64_t v;
  std::memcpy(&v, &x, sizeof(v));
  return v;
}

double bits_double(uint64_t v) {
  double x;
  std::memcpy(&x, &v, sizeof(x));
  return x;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& params, uint64_t seed) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(params.num_layers()));
  put_u32(out, static_cast<uint32_t>(params.input_dim()));
  put_u32(out, static_cast<uint32_t>(params.hidden_dim));
  put_u64(out, seed);
  for (const Matrix& w : params.weights) {
    put_u32(out, static_cast<uint32_t>(w.rows()));
    put_u32(out, static_cast<uint32_t>(w.cols()));
    for (double x : w.data()) put_u64(out, double_bits(x));
  }
  if (!out) throw DataError("write failed: " + path);
}

EncoderParams load_checkpoint(const std::string& path, uint64_t* seed_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a checkpoint file: " + path);
  }
  const uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t num_layers = get_u32(in);
  get_u32(in);  // input dim, implied by the first weight matrix
  EncoderParams params;
  params.hidden_dim = static_cast<int>(get_u32(in));
  const uint64_t seed = get_u64(in);
  if (seed_out != nullptr) *seed_out = seed;
  for (uint32_t l = 0; l < num_layers; ++l) {
    const int rows = static_cast<int>(get_u32(in));
    const int cols = static_cast<int>(get_u32(in));
    if (!in || rows < 1 || cols < 1) throw DataError("corrupt checkpoint: " + path);
    Matrix w(rows, cols);
    for (double& x : w.data()) x = bits_double(get_u64(in));
    params.weights.push_back(std::move(w));
  }
  if (!in) throw DataError("corrupt checkpoint: " + path);
  return params;
}

uint64_t params_checksum(const EncoderParams& params) {
  uint64_t h = 0xCBF29CE484222325ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ull;
    }
  };
  mix(static_cast<uint64_t>(params.num_layers()));
  for (const Matrix& w : params.weights) {
    mix(static_cast<uint64_t>(w.rows()));
    mix(static_cast<uint64_t>(w.cols()));
    for (double x : w.data()) mix(double_bits(x));
  }
  return h;
}

}  // namespace hgpl
