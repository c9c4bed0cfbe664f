#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "higen/tensor.hpp"

namespace higen {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid as long as the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::int32_t id = -1;

  const Tensor& value() const;
  explicit operator bool() const { return tape != nullptr; }
};

// Gradients keyed by parameter name.
class GradientMap {
 public:
  void accumulate(const std::string& name, const Tensor& g);
  void insert_zeros(const std::string& name, const std::vector<int>& shape);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Tensor> entries_;
};

// Append-only record of forward operations. Nodes reference strictly earlier
// nodes, so the graph is acyclic by construction. One tape per training
// example; a tape is confined to a single thread.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kLeaf,
    kMatMul,
    kAdd,
    kMul,
    kScale,    // x * scalar
    kShift,    // x + scalar
    kTanh,
    kSigmoid,
    kConcat,
    kStackRows,
    kSoftmax,
    kCrossEntropy,
    kSum,
    kSquare,
    kTranspose,
    kReshape,
    kSlice,
    kRow,
    kColwiseAdd,
    kMeanRows,
    kConv2d,
    kMeanPool2,
    kGridPool,
  };

  // Registers an input tensor. Named leaves are parameters: backward() reports
  // a gradient entry for every named leaf, zero if the loss never touched it.
  Var leaf(Tensor value, std::string name = {});

  int size() const { return static_cast<int>(nodes_.size()); }
  const Tensor& value(std::int32_t id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  // Reverse accumulation from a scalar loss node.
  GradientMap backward(Var loss) const;

  // Recomputes every node's output from the leaves. Bit-identical to the
  // recorded values; the determinism tests compare against them.
  std::vector<Tensor> replay() const;

  // Internal builder entry point used by the free op functions.
  Var emit(Op op, std::vector<std::int32_t> inputs, std::vector<int> iargs, double scalar,
           Tensor payload);

 private:
  struct Node {
    Op op;
    std::vector<std::int32_t> inputs;
    Tensor value;
    Tensor payload;          // cross-entropy target
    std::vector<int> iargs;  // slice bounds, row index, reshape dims, pool grid
    double scalar = 0.0;     // scale factor or shift amount
    std::string name;        // parameter name for leaves
  };

  static Tensor eval(const Node& node, const std::deque<Node>& nodes);

  // deque: appends never invalidate references handed out via value()
  std::deque<Node> nodes_;
};

// Clamp applied to probabilities before any log.
inline constexpr double kLogClampEps = 1e-12;

// --- differentiable free functions ------------------------------------------

Var matmul(Var a, Var b);                  // [m x k] * [k x n] -> [m x n]; rank-1 rhs -> rank-1
Var add(Var a, Var b);                     // same shape
Var sub(Var a, Var b);
Var mul(Var a, Var b);                     // elementwise
Var scale(Var a, double k);
Var shift(Var a, double k);
Var tanh(Var a);
Var sigmoid(Var a);
Var concat(const std::vector<Var>& parts);  // rank-1 parts, joined along the last (only) axis
Var stack_rows(const std::vector<Var>& rows);  // k rank-1 vectors -> [k x len]
Var softmax(Var logits);                       // rank-1
Var cross_entropy(Var pred, Tensor target);    // probability vectors -> scalar
Var sum(Var a);                                // all elements -> scalar
Var square(Var a);
Var transpose(Var a);
Var reshape(Var a, std::vector<int> shape);
Var slice(Var a, int offset, int len);  // rank-1
Var row(Var table, int r);              // [r x c] -> [c]
Var colwise_add(Var m, Var v);          // column vector v added to every column of m
Var mean_rows(Var m);                   // [r x c] -> [c], mean over rows
Var conv2d(Var x, Var w, Var b);        // x [Ci x H x W], w [Co x Ci x kh x kw]; same padding
Var mean_pool2(Var x);                  // 2x2 mean pooling, dims must be even
Var grid_pool(Var x, int g);            // [C x H x W] -> [g*g x C] cell means, row-major cells

}  // namespace higen
