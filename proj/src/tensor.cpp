#include "emobench/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "emobench/error.hpp"

namespace emobench {
namespace {

thread_local bool g_grad_enabled = true;

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    n *= d;
  }
  return n;
}

// Parallel work threshold: below this the omp `if` clause keeps the loop
// serial, which avoids thread overhead on the tiny shapes dominating a run.
constexpr std::size_t kOmpThreshold = 1u << 18;

// c[i][j] (+)= sum_k a[i][k] * b[k][j], accumulated in ascending k for every
// element so the result is bit-identical for any thread count.
void gemm_rows(const double* a, std::size_t m, std::size_t k, const double* b, std::size_t n,
               double* c, bool accumulate) {
  const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k >= kOmpThreshold)
  for (std::int64_t i = 0; i < mi; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) {
      std::fill(crow, crow + n, 0.0);
    }
    const double* arow = a + static_cast<std::size_t>(i) * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b + kk * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

// c[i][j] (+)= sum_k a[i][k] * bt[j][k]  (i.e. a * transpose(bt)).
void gemm_bt(const double* a, std::size_t m, std::size_t k, const double* bt, std::size_t n,
             double* c, bool accumulate) {
  const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k >= kOmpThreshold)
  for (std::int64_t i = 0; i < mi; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    const double* arow = a + static_cast<std::size_t>(i) * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* btrow = bt + j * k;
      double acc = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) {
        acc += arow[kk] * btrow[kk];
      }
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

// c[i][j] (+)= sum_k at[k][i] * b[k][j]  (i.e. transpose(at) * b).
void gemm_at(const double* at, std::size_t k, std::size_t m, const double* b, std::size_t n,
             double* c, bool accumulate) {
  const std::int64_t mi = static_cast<std::int64_t>(m);
#pragma omp parallel for schedule(static) if (m * n * k >= kOmpThreshold)
  for (std::int64_t i = 0; i < mi; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) {
      std::fill(crow, crow + n, 0.0);
    }
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double av = at[kk * m + static_cast<std::size_t>(i)];
      const double* brow = b + kk * n;
      for (std::size_t j = 0; j < n; ++j) {
        crow[j] += av * brow[j];
      }
    }
  }
}

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected rank-2 tensor, got shape " +
                         shape_string(t.shape()));
  }
}

void ensure_grad_sized(TensorNode& n) {
  if (n.grad.size() != n.data.size()) {
    n.grad.assign(n.data.size(), 0.0);
  }
}

std::span<double> node_grad(const Tensor& t) {
  ensure_grad_sized(t.node());
  return t.node().grad;
}

}  // namespace

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out << (i ? "x" : "") << shape[i];
  }
  out << "]";
  return out.str();
}

// --- Tensor ------------------------------------------------------------------

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
  auto node = std::make_shared<TensorNode>();
  node->data.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from_vector(std::vector<std::size_t> shape, std::vector<double> values,
                           bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("from_vector: shape " + shape_string(shape) + " wants " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value) { return from_vector({1}, {value}); }

Tensor Tensor::randn(std::vector<std::size_t> shape, Rng& rng, double mean, double stddev) {
  std::vector<double> values(shape_numel(shape));
  for (double& v : values) {
    v = rng.next_gaussian(mean, stddev);
  }
  return from_vector(std::move(shape), std::move(values), /*requires_grad=*/true);
}

const std::vector<std::size_t>& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::numel() const { return node_->data.size(); }

std::size_t Tensor::rows() const {
  require_rank2(*this, "rows");
  return node_->shape[0];
}

std::size_t Tensor::cols() const {
  require_rank2(*this, "cols");
  return node_->shape[1];
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item: tensor is not scalar, shape " + shape_string(shape()));
  }
  return node_->data[0];
}

double Tensor::at(std::size_t i) const { return node_->data.at(i); }

double Tensor::at(std::size_t r, std::size_t c) const {
  require_rank2(*this, "at");
  return node_->data.at(r * node_->shape[1] + c);
}

std::span<const double> Tensor::values() const { return node_->data; }
std::span<double> Tensor::values_mut() { return node_->data; }

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::has_grad() const { return node_->grad.size() == node_->data.size(); }

std::span<double> Tensor::grad() {
  ensure_grad_sized(*node_);
  return node_->grad;
}

std::span<const double> Tensor::grad() const {
  ensure_grad_sized(*node_);
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

// --- graph -------------------------------------------------------------------

Tensor make_op(std::vector<std::size_t> shape, std::vector<double> data,
               std::vector<Tensor> parents, BackwardFn backward) {
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("make_op: shape/data size mismatch");
  }
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  bool track = grad_enabled();
  if (track) {
    track = false;
    for (const Tensor& p : parents) {
      if (p.requires_grad()) {
        track = true;
        break;
      }
    }
  }
  if (track) {
    node->parents = std::move(parents);
    node->backward = std::move(backward);
    node->requires_grad = true;
    node->is_leaf = false;
  }
  return Tensor(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

ComputeGraph ComputeGraph::from_root(const Tensor& root) {
  ComputeGraph graph;
  if (!root.defined()) {
    return graph;
  }
  // Iterative post-order DFS over parents: parents are emitted before their
  // consumers, so `order` is topological.
  std::unordered_set<const TensorNode*> visited;
  std::vector<std::pair<std::shared_ptr<TensorNode>, std::size_t>> stack;
  stack.emplace_back(root.ptr(), 0);
  visited.insert(root.ptr().get());
  while (!stack.empty()) {
    auto& [node, next_parent] = stack.back();
    if (next_parent < node->parents.size()) {
      const auto& parent = node->parents[next_parent].ptr();
      ++next_parent;
      if (visited.insert(parent.get()).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      graph.order.push_back(node);
      stack.pop_back();
    }
  }
  return graph;
}

void backward(const ComputeGraph& graph, const Tensor& root) {
  if (root.numel() != 1) {
    throw ContractError("backward: root must be scalar, shape " + shape_string(root.shape()));
  }
  // Intermediate gradients are scratch space rebuilt per call; only leaf
  // gradients persist and accumulate across calls.
  for (const auto& node : graph.order) {
    if (!node->is_leaf) {
      node->grad.assign(node->data.size(), 0.0);
    }
  }
  ensure_grad_sized(root.node());
  root.node().grad[0] += 1.0;
  for (auto it = graph.order.rbegin(); it != graph.order.rend(); ++it) {
    TensorNode& node = **it;
    if (node.backward && node.requires_grad) {
      node.backward(node);
    }
  }
}

void backward(const Tensor& root) { backward(ComputeGraph::from_root(root), root); }

// --- ops ---------------------------------------------------------------------

namespace {

void check_matmul_shapes(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
}

Tensor matmul_with_kernel(const Tensor& a, const Tensor& b, bool parallel) {
  check_matmul_shapes(a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  if (parallel) {
    gemm_rows(a.values().data(), m, k, b.values().data(), n, out.data(), false);
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = out.data() + i * n;
      const double* arow = a.values().data() + i * k;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double av = arow[kk];
        const double* brow = b.values().data() + kk * n;
        for (std::size_t j = 0; j < n; ++j) {
          crow[j] += av * brow[j];
        }
      }
    }
  }
  Tensor ta = a, tb = b;
  return make_op({m, n}, std::move(out), {a, b}, [ta, tb, m, k, n](TensorNode& node) {
    const double* dout = node.grad.data();
    if (ta.requires_grad()) {
      // dA = dC * B^T
      gemm_bt(dout, m, n, tb.values().data(), k, node_grad(ta).data(), true);
    }
    if (tb.requires_grad()) {
      // dB = A^T * dC
      gemm_at(ta.values().data(), m, k, dout, n, node_grad(tb).data(), true);
    }
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) { return matmul_with_kernel(a, b, true); }

Tensor matmul_reference(const Tensor& a, const Tensor& b) {
  return matmul_with_kernel(a, b, false);
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a.at(i) + b.at(i);
  }
  Tensor ta = a, tb = b;
  return make_op(a.shape(), std::move(out), {a, b}, [ta, tb](TensorNode& node) {
    for (const Tensor* p : {&ta, &tb}) {
      if (p->requires_grad()) {
        auto g = node_grad(*p);
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] += node.grad[i];
        }
      }
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a.at(i) * factor;
  }
  Tensor ta = a;
  return make_op(a.shape(), std::move(out), {a}, [ta, factor](TensorNode& node) {
    if (ta.requires_grad()) {
      auto g = node_grad(ta);
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += factor * node.grad[i];
      }
    }
  });
}

Tensor add_row_bias(const Tensor& m, const Tensor& bias) {
  require_rank2(m, "add_row_bias");
  if (bias.rank() != 1 || bias.numel() != m.cols()) {
    throw DimensionError("add_row_bias: bias shape " + shape_string(bias.shape()) +
                         " does not match row width " + std::to_string(m.cols()));
  }
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out[i * cols + j] = m.at(i, j) + bias.at(j);
    }
  }
  Tensor tm = m, tb = bias;
  return make_op({rows, cols}, std::move(out), {m, bias}, [tm, tb, rows, cols](TensorNode& node) {
    if (tm.requires_grad()) {
      auto g = node_grad(tm);
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += node.grad[i];
      }
    }
    if (tb.requires_grad()) {
      auto g = node_grad(tb);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          g[j] += node.grad[i * cols + j];
        }
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t rows = a.rows(), cols = a.cols();
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out[j * rows + i] = a.at(i, j);
    }
  }
  Tensor ta = a;
  return make_op({cols, rows}, std::move(out), {a}, [ta, rows, cols](TensorNode& node) {
    if (ta.requires_grad()) {
      auto g = node_grad(ta);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          g[i * cols + j] += node.grad[j * rows + i];
        }
      }
    }
  });
}

Tensor slice_cols(const Tensor& a, std::size_t c0, std::size_t c1) {
  require_rank2(a, "slice_cols");
  if (c0 > c1 || c1 > a.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") out of " + std::to_string(a.cols()) + " columns");
  }
  const std::size_t rows = a.rows(), cols = a.cols(), width = c1 - c0;
  std::vector<double> out(rows * width);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out[i * width + j] = a.at(i, c0 + j);
    }
  }
  Tensor ta = a;
  return make_op({rows, width}, std::move(out), {a}, [ta, rows, cols, c0, width](TensorNode& node) {
    if (ta.requires_grad()) {
      auto g = node_grad(ta);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < width; ++j) {
          g[i * cols + c0 + j] += node.grad[i * width + j];
        }
      }
    }
  });
}

Tensor slice_rows(const Tensor& a, std::size_t r0, std::size_t r1) {
  require_rank2(a, "slice_rows");
  if (r0 > r1 || r1 > a.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(r0) + "," + std::to_string(r1) +
                         ") out of " + std::to_string(a.rows()) + " rows");
  }
  const std::size_t cols = a.cols(), height = r1 - r0;
  std::vector<double> out(height * cols);
  std::copy(a.values().begin() + static_cast<std::ptrdiff_t>(r0 * cols),
            a.values().begin() + static_cast<std::ptrdiff_t>(r1 * cols), out.begin());
  Tensor ta = a;
  return make_op({height, cols}, std::move(out), {a}, [ta, r0, height, cols](TensorNode& node) {
    if (ta.requires_grad()) {
      auto g = node_grad(ta);
      for (std::size_t i = 0; i < height * cols; ++i) {
        g[r0 * cols + i] += node.grad[i];
      }
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) {
    throw DimensionError("concat_cols: no parts");
  }
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row count mismatch");
    }
    total += p.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        out[i * total + offset + j] = p.at(i, j);
      }
    }
    offset += w;
  }
  std::vector<Tensor> copies = parts;
  return make_op({rows, total}, std::move(out), parts, [copies, rows, total](TensorNode& node) {
    std::size_t off = 0;
    for (const Tensor& p : copies) {
      const std::size_t w = p.cols();
      if (p.requires_grad()) {
        auto g = node_grad(p);
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < w; ++j) {
            g[i * w + j] += node.grad[i * total + off + j];
          }
        }
      }
      off += w;
    }
  });
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  require_rank2(a, "concat_rows");
  require_rank2(b, "concat_rows");
  if (a.cols() != b.cols()) {
    throw DimensionError("concat_rows: column count mismatch");
  }
  const std::size_t cols = a.cols();
  std::vector<double> out;
  out.reserve(a.numel() + b.numel());
  out.insert(out.end(), a.values().begin(), a.values().end());
  out.insert(out.end(), b.values().begin(), b.values().end());
  Tensor ta = a, tb = b;
  const std::size_t arows = a.rows();
  return make_op({a.rows() + b.rows(), cols}, std::move(out), {a, b},
                 [ta, tb, arows, cols](TensorNode& node) {
                   if (ta.requires_grad()) {
                     auto g = node_grad(ta);
                     for (std::size_t i = 0; i < g.size(); ++i) {
                       g[i] += node.grad[i];
                     }
                   }
                   if (tb.requires_grad()) {
                     auto g = node_grad(tb);
                     const std::size_t base = arows * cols;
                     for (std::size_t i = 0; i < g.size(); ++i) {
                       g[i] += node.grad[base + i];
                     }
                   }
                 });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) {
    total += v;
  }
  Tensor ta = a;
  return make_op({1}, {total}, {a}, [ta](TensorNode& node) {
    if (ta.requires_grad()) {
      auto g = node_grad(ta);
      for (double& v : g) {
        v += node.grad[0];
      }
    }
  });
}

Tensor softmax(const Tensor& x, int axis) {
  if (x.rank() != 1 && x.rank() != 2) {
    throw DimensionError("softmax: expected rank 1 or 2, got " + shape_string(x.shape()));
  }
  const int max_axis = static_cast<int>(x.rank()) - 1;
  if (axis < 0 || axis > max_axis) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                         shape_string(x.shape()));
  }
  for (double v : x.values()) {
    if (std::isnan(v)) {
      throw NumericError("softmax: NaN input");
    }
  }
  // Slices run along `axis`; `outer` indexes the other dimension.
  std::size_t slice_len, outer, slice_stride, outer_stride;
  if (x.rank() == 1) {
    slice_len = x.numel();
    outer = 1;
    slice_stride = 1;
    outer_stride = 0;
  } else if (axis == 1) {
    slice_len = x.cols();
    outer = x.rows();
    slice_stride = 1;
    outer_stride = x.cols();
  } else {
    slice_len = x.rows();
    outer = x.cols();
    slice_stride = x.cols();
    outer_stride = 1;
  }
  std::vector<double> out(x.numel());
  const auto xv = x.values();
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * outer_stride;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < slice_len; ++s) {
      mx = std::max(mx, xv[base + s * slice_stride]);
    }
    double denom = 0.0;
    for (std::size_t s = 0; s < slice_len; ++s) {
      const double e = std::exp(xv[base + s * slice_stride] - mx);
      out[base + s * slice_stride] = e;
      denom += e;
    }
    for (std::size_t s = 0; s < slice_len; ++s) {
      out[base + s * slice_stride] /= denom;
    }
  }
  Tensor tx = x;
  auto shape = x.shape();
  return make_op(std::move(shape), std::move(out), {x},
                 [tx, slice_len, outer, slice_stride, outer_stride](TensorNode& node) {
                   if (!tx.requires_grad()) {
                     return;
                   }
                   auto g = node_grad(tx);
                   const auto& s = node.data;
                   const auto& dy = node.grad;
                   for (std::size_t o = 0; o < outer; ++o) {
                     const std::size_t base = o * outer_stride;
                     double dot = 0.0;
                     for (std::size_t i = 0; i < slice_len; ++i) {
                       const std::size_t idx = base + i * slice_stride;
                       dot += dy[idx] * s[idx];
                     }
                     for (std::size_t i = 0; i < slice_len; ++i) {
                       const std::size_t idx = base + i * slice_stride;
                       g[idx] += s[idx] * (dy[idx] - dot);
                     }
                   }
                 });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const bool rank1 = x.rank() == 1;
  if (!rank1) {
    require_rank2(x, "layer_norm");
  }
  const std::size_t cols = rank1 ? x.numel() : x.cols();
  const std::size_t rows = rank1 ? 1 : x.rows();
  if (gain.numel() != cols || bias.numel() != cols) {
    throw DimensionError("layer_norm: gain/bias must match last dimension " +
                         std::to_string(cols));
  }
  std::vector<double> out(x.numel());
  std::vector<double> xhat(x.numel());
  std::vector<double> inv_std(rows);
  const auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * cols;
    double mean = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      mean += row[j];
    }
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    inv_std[r] = inv;
    for (std::size_t j = 0; j < cols; ++j) {
      const double h = (row[j] - mean) * inv;
      xhat[r * cols + j] = h;
      out[r * cols + j] = gain.at(j) * h + bias.at(j);
    }
  }
  Tensor tx = x, tg = gain, tb = bias;
  auto shape = x.shape();
  return make_op(
      std::move(shape), std::move(out), {x, gain, bias},
      [tx, tg, tb, rows, cols, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](TensorNode& node) {
        const auto& dy = node.grad;
        for (std::size_t r = 0; r < rows; ++r) {
          const double* dyr = dy.data() + r * cols;
          const double* hr = xhat.data() + r * cols;
          if (tx.requires_grad()) {
            auto gx = node_grad(tx);
            double mean_dxhat = 0.0, mean_dxhat_h = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
              const double dxhat = dyr[j] * tg.at(j);
              mean_dxhat += dxhat;
              mean_dxhat_h += dxhat * hr[j];
            }
            mean_dxhat /= static_cast<double>(cols);
            mean_dxhat_h /= static_cast<double>(cols);
            for (std::size_t j = 0; j < cols; ++j) {
              const double dxhat = dyr[j] * tg.at(j);
              gx[r * cols + j] += inv_std[r] * (dxhat - mean_dxhat - hr[j] * mean_dxhat_h);
            }
          }
          if (tg.requires_grad()) {
            auto gg = node_grad(tg);
            for (std::size_t j = 0; j < cols; ++j) {
              gg[j] += dyr[j] * hr[j];
            }
          }
          if (tb.requires_grad()) {
            auto gb = node_grad(tb);
            for (std::size_t j = 0; j < cols; ++j) {
              gb[j] += dyr[j];
            }
          }
        }
      });
}

Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = x.at(i);
    out[i] = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  }
  Tensor tx = x;
  return make_op(x.shape(), std::move(out), {x}, [tx](TensorNode& node) {
    if (!tx.requires_grad()) {
      return;
    }
    auto g = node_grad(tx);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = tx.at(i);
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      g[i] += node.grad[i] * (cdf + v * pdf);
    }
  });
}

double sigmoid_value(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = sigmoid_value(x.at(i));
  }
  Tensor tx = x;
  return make_op(x.shape(), std::move(out), {x}, [tx](TensorNode& node) {
    if (!tx.requires_grad()) {
      return;
    }
    auto g = node_grad(tx);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = node.data[i];
      g[i] += node.grad[i] * s * (1.0 - s);
    }
  });
}

Tensor embed(const Tensor& table, const std::vector<std::int32_t>& ids) {
  require_rank2(table, "embed");
  const std::size_t vocab = table.rows(), dim = table.cols();
  for (std::int32_t id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw IndexError("embed: id " + std::to_string(id) + " out of range for table with " +
                       std::to_string(vocab) + " rows");
    }
  }
  std::vector<double> out(ids.size() * dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double* row = table.values().data() + static_cast<std::size_t>(ids[i]) * dim;
    std::copy(row, row + dim, out.data() + i * dim);
  }
  Tensor tt = table;
  std::vector<std::int32_t> ids_copy = ids;
  return make_op({ids.size(), dim}, std::move(out), {table},
                 [tt, ids_copy = std::move(ids_copy), dim](TensorNode& node) {
                   if (!tt.requires_grad()) {
                     return;
                   }
                   auto g = node_grad(tt);
                   for (std::size_t i = 0; i < ids_copy.size(); ++i) {
                     const std::size_t base = static_cast<std::size_t>(ids_copy[i]) * dim;
                     for (std::size_t j = 0; j < dim; ++j) {
                       g[base + j] += node.grad[i * dim + j];
                     }
                   }
                 });
}

Tensor bce_loss(const Tensor& logit, double target) {
  if (logit.numel() != 1) {
    throw ContractError("bce_loss: logit must be scalar");
  }
  if (target != 0.0 && target != 1.0) {
    throw ContractError("bce_loss: target must be 0 or 1");
  }
  const double z = logit.item();
  const double value = std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
  Tensor tz = logit;
  return make_op({1}, {value}, {logit}, [tz, target](TensorNode& node) {
    if (tz.requires_grad()) {
      node_grad(tz)[0] += node.grad[0] * (sigmoid_value(tz.item()) - target);
    }
  });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout: rate must be in [0, 1)");
  }
  if (rate == 0.0) {
    return x;
  }
  const double keep = 1.0 - rate;
  std::vector<double> mask(x.numel());
  for (double& m : mask) {
    m = rng.next_double() < keep ? 1.0 / keep : 0.0;
  }
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x.at(i) * mask[i];
  }
  Tensor tx = x;
  return make_op(x.shape(), std::move(out), {x}, [tx, mask = std::move(mask)](TensorNode& node) {
    if (!tx.requires_grad()) {
      return;
    }
    auto g = node_grad(tx);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += node.grad[i] * mask[i];
    }
  });
}

double grad_check(const std::function<Tensor()>& build, const std::vector<Tensor>& params,
                  double h) {
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  {
    for (Tensor p : params) {
      p.zero_grad();
    }
    Tensor root = build();
    backward(root);
    for (const Tensor& p : params) {
      analytic.emplace_back(p.grad().begin(), p.grad().end());
    }
  }
  double max_rel = 0.0;
  NoGradGuard no_grad;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi];
    auto values = p.values_mut();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + h;
      const double f_plus = build().item();
      values[i] = original - h;
      const double f_minus = build().item();
      values[i] = original;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = analytic[pi][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace emobench
