#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emobench/rng.hpp"

namespace emobench {

class Tensor;
struct TensorNode;

// Backward rule of one op record. Reads the node's gradient and accumulates
// into the gradients of its parents. Must never touch anything else.
using BackwardFn = std::function<void(TensorNode&)>;

struct TensorNode {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // sized lazily; persistent only for leaves
  std::vector<Tensor> parents;
  BackwardFn backward;
  bool requires_grad = false;
  bool is_leaf = true;

  std::size_t numel() const { return data.size(); }
};

// Value-semantic handle onto a node of the dynamically built compute graph.
// Data is immutable once a node participates in a forward pass; gradients
// and optimizer updates go through the explicitly mutable accessors.
// A graph is confined to one thread. Parameter tensors may be shared across
// threads for read-only inference; parallel training needs disjoint copies.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
  static Tensor from_vector(std::vector<std::size_t> shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value);
  // Leaf parameter drawn from N(mean, stddev^2) using the named PRNG.
  static Tensor randn(std::vector<std::size_t> shape, Rng& rng, double mean = 0.0,
                      double stddev = 0.02);

  bool defined() const { return node_ != nullptr; }
  const std::vector<std::size_t>& shape() const;
  std::size_t numel() const;
  std::size_t rank() const { return shape().size(); }
  // Rank-2 helpers.
  std::size_t rows() const;
  std::size_t cols() const;

  double item() const;  // requires numel() == 1
  double at(std::size_t i) const;
  double at(std::size_t r, std::size_t c) const;

  std::span<const double> values() const;
  // Mutable access for initialization, optimizers, and finite differencing.
  // Never call while a graph referencing this tensor is still in use.
  std::span<double> values_mut();

  bool requires_grad() const;
  bool has_grad() const;
  std::span<double> grad();  // allocates a zero buffer on first use
  std::span<const double> grad() const;
  void zero_grad();

  TensorNode& node() const { return *node_; }
  const std::shared_ptr<TensorNode>& ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;

  friend Tensor make_op(std::vector<std::size_t>, std::vector<double>, std::vector<Tensor>,
                        BackwardFn);
};

// Generic op-record constructor all ops funnel through. Exposed so tests can
// inject deliberately wrong backward rules as a negative control.
Tensor make_op(std::vector<std::size_t> shape, std::vector<double> data,
               std::vector<Tensor> parents, BackwardFn backward);

// While alive, ops compute values only: no parents, no backward closures.
// Used for evaluation/prediction and for the f(p +/- h) probes of grad_check.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Topologically ordered op records reachable from one root. Creation order of
// a dynamic tape is already topological; this materializes the reachable
// subgraph so backward can walk it in exact reverse topological order.
struct ComputeGraph {
  std::vector<std::shared_ptr<TensorNode>> order;  // inputs precede consumers
  static ComputeGraph from_root(const Tensor& root);
};

// Populates gradients of all leaf parameters reachable from `root` (a scalar).
// Leaf gradients accumulate across calls; intermediate gradients are
// rebuilt from scratch on every call.
void backward(const ComputeGraph& graph, const Tensor& root);
void backward(const Tensor& root);

// --- ops -------------------------------------------------------------------

// Parallel kernel (OpenMP over output rows). Bit-identical to
// matmul_reference for every thread count: each output element is reduced
// serially in the same k-order.
Tensor matmul(const Tensor& a, const Tensor& b);
// Serial reference kernel kept for testing and benchmarking.
Tensor matmul_reference(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);  // same shape
Tensor scale(const Tensor& a, double factor);
// Adds a length-n vector to every row of an [m x n] matrix. The only
// broadcast in the library.
Tensor add_row_bias(const Tensor& m, const Tensor& bias);
Tensor transpose(const Tensor& a);
Tensor slice_cols(const Tensor& a, std::size_t c0, std::size_t c1);
Tensor slice_rows(const Tensor& a, std::size_t r0, std::size_t r1);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor sum(const Tensor& a);  // scalar

// Max-subtracted softmax along `axis` (0 or 1 for rank 2; 0 for rank 1).
// Every slice along the axis sums to 1. NaN input raises NumericError.
Tensor softmax(const Tensor& x, int axis);
// Per-row normalization over the last dimension followed by affine gain/bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
// Row gather: out[i] = table[ids[i]]. ids must be < table rows.
Tensor embed(const Tensor& table, const std::vector<std::int32_t>& ids);
// Numerically stable binary cross entropy on a logit:
// max(z,0) - z*y + log(1 + exp(-|z|)), target in {0,1}.
Tensor bce_loss(const Tensor& logit, double target);
// Inverted dropout with a seeded mask; identity when rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

double sigmoid_value(double z);

// Central-difference gradient checker. `build` reconstructs the scalar loss
// from the current parameter values. Returns the max relative error over all
// parameter elements, with denominator max(|analytic|, |numeric|, 1e-8).
double grad_check(const std::function<Tensor()>& build, const std::vector<Tensor>& params,
                  double h = 1e-4);

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace emobench
