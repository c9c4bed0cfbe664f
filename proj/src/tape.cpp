#include "higen/tape.hpp"

#include <algorithm>
#include <cmath>

namespace higen {

const Tensor& Var::value() const {
  if (!tape) throw ContractError("value() on null Var");
  return tape->value(id);
}

void GradientMap::accumulate(const std::string& name, const Tensor& g) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    entries_.emplace(name, g);
    return;
  }
  if (!it->second.same_shape(g)) {
    throw DimensionError("gradient shape " + g.shape_str() + " does not match existing " +
                         it->second.shape_str() + " for " + name);
  }
  it->second.flat() += g.flat();
}

void GradientMap::insert_zeros(const std::string& name, const std::vector<int>& shape) {
  entries_.emplace(name, Tensor(shape));
}

const Tensor& GradientMap::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("no gradient entry for " + name);
  return it->second;
}

namespace {

void check_same_tape(Var a, Var b, const char* op) {
  if (!a.tape || !b.tape) throw ContractError(std::string(op) + ": null Var");
  if (a.tape != b.tape) throw ContractError(std::string(op) + ": operands from different tapes");
}

inline int off3(int c, int i, int j, int h, int w) { return (c * h + i) * w + j; }
inline int off4(int o, int c, int u, int v, int ci, int kh, int kw) {
  return ((o * ci + c) * kh + u) * kw + v;
}

}  // namespace

Var Tape::leaf(Tensor value, std::string name) {
  Node node;
  node.op = Op::kLeaf;
  node.value = std::move(value);
  node.name = std::move(name);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Var Tape::emit(Op op, std::vector<std::int32_t> inputs, std::vector<int> iargs, double scalar,
               Tensor payload) {
  Node node;
  node.op = op;
  node.inputs = std::move(inputs);
  node.iargs = std::move(iargs);
  node.scalar = scalar;
  node.payload = std::move(payload);
  for (std::int32_t in : node.inputs) {
    if (in < 0 || in >= size()) throw ContractError("tape input out of range");
  }
  node.value = eval(node, nodes_);
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::int32_t>(nodes_.size() - 1)};
}

Tensor Tape::eval(const Node& node, const std::deque<Node>& nodes) {
  auto in = [&](std::size_t i) -> const Tensor& {
    return nodes[static_cast<std::size_t>(node.inputs[i])].value;
  };
  switch (node.op) {
    case Op::kLeaf:
      return node.value;
    case Op::kMatMul: {
      const Tensor& a = in(0);
      const Tensor& b = in(1);
      if (b.rank() == 1) {
        Tensor out({a.dim(0)});
        out.flat() = a.matrix() * b.flat();
        return out;
      }
      Tensor out({a.dim(0), b.dim(1)});
      out.matrix() = a.matrix() * b.matrix();
      return out;
    }
    case Op::kAdd: {
      Tensor out = in(0);
      out.flat() += in(1).flat();
      return out;
    }
    case Op::kMul: {
      Tensor out = in(0);
      out.flat().array() *= in(1).flat().array();
      return out;
    }
    case Op::kScale: {
      Tensor out = in(0);
      out.flat() *= node.scalar;
      return out;
    }
    case Op::kShift: {
      Tensor out = in(0);
      out.flat().array() += node.scalar;
      return out;
    }
    case Op::kTanh: {
      Tensor out = in(0);
      out.flat() = out.flat().array().tanh();
      return out;
    }
    case Op::kSigmoid: {
      Tensor out = in(0);
      out.flat() = 1.0 / (1.0 + (-out.flat().array()).exp());
      return out;
    }
    case Op::kConcat: {
      int total = 0;
      for (std::size_t i = 0; i < node.inputs.size(); ++i) total += in(i).numel();
      Tensor out({total});
      int off = 0;
      for (std::size_t i = 0; i < node.inputs.size(); ++i) {
        out.flat().segment(off, in(i).numel()) = in(i).flat();
        off += in(i).numel();
      }
      return out;
    }
    case Op::kStackRows: {
      int cols = in(0).numel();
      Tensor out({static_cast<int>(node.inputs.size()), cols});
      for (std::size_t i = 0; i < node.inputs.size(); ++i) {
        out.matrix().row(static_cast<int>(i)) = in(i).flat().transpose();
      }
      return out;
    }
    case Op::kSoftmax: {
      const Tensor& x = in(0);
      Tensor out = x;
      double m = x.flat().maxCoeff();
      out.flat() = (x.flat().array() - m).exp();
      out.flat() /= out.flat().sum();
      return out;
    }
    case Op::kCrossEntropy: {
      const Tensor& p = in(0);
      const Tensor& t = node.payload;
      double loss = 0.0;
      for (int i = 0; i < p.numel(); ++i) {
        loss -= t[i] * std::log(std::max(p[i], kLogClampEps));
      }
      return Tensor::scalar(loss);
    }
    case Op::kSum:
      return Tensor::scalar(in(0).flat().sum());
    case Op::kSquare: {
      Tensor out = in(0);
      out.flat() = out.flat().array().square();
      return out;
    }
    case Op::kTranspose: {
      const Tensor& a = in(0);
      Tensor out({a.dim(1), a.dim(0)});
      out.matrix() = a.matrix().transpose();
      return out;
    }
    case Op::kReshape: {
      Tensor out = in(0);
      return Tensor(node.iargs, std::vector<double>(out.data(), out.data() + out.numel()));
    }
    case Op::kSlice: {
      Tensor out({node.iargs[1]});
      out.flat() = in(0).flat().segment(node.iargs[0], node.iargs[1]);
      return out;
    }
    case Op::kRow: {
      const Tensor& table = in(0);
      Tensor out({table.dim(1)});
      out.flat() = table.matrix().row(node.iargs[0]).transpose();
      return out;
    }
    case Op::kColwiseAdd: {
      Tensor out = in(0);
      out.matrix().colwise() += in(1).flat();
      return out;
    }
    case Op::kMeanRows: {
      const Tensor& a = in(0);
      Tensor out({a.dim(1)});
      out.flat() = a.matrix().colwise().mean().transpose();
      return out;
    }
    case Op::kConv2d: {
      const Tensor& x = in(0);
      const Tensor& w = in(1);
      const Tensor& b = in(2);
      int ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
      int co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
      int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
      Tensor out({co, h, wd});
      for (int o = 0; o < co; ++o) {
        for (int i = 0; i < h; ++i) {
          for (int j = 0; j < wd; ++j) {
            double acc = b[o];
            for (int c = 0; c < ci; ++c) {
              for (int u = 0; u < kh; ++u) {
                int ii = i + u - ph;
                if (ii < 0 || ii >= h) continue;
                for (int v = 0; v < kw; ++v) {
                  int jj = j + v - pw;
                  if (jj < 0 || jj >= wd) continue;
                  acc += x[off3(c, ii, jj, h, wd)] * w[off4(o, c, u, v, ci, kh, kw)];
                }
              }
            }
            out[off3(o, i, j, h, wd)] = acc;
          }
        }
      }
      return out;
    }
    case Op::kMeanPool2: {
      const Tensor& x = in(0);
      int c = x.dim(0), h = x.dim(1), w = x.dim(2);
      Tensor out({c, h / 2, w / 2});
      for (int ch = 0; ch < c; ++ch) {
        for (int i = 0; i < h / 2; ++i) {
          for (int j = 0; j < w / 2; ++j) {
            double acc = x[off3(ch, 2 * i, 2 * j, h, w)] + x[off3(ch, 2 * i, 2 * j + 1, h, w)] +
                         x[off3(ch, 2 * i + 1, 2 * j, h, w)] +
                         x[off3(ch, 2 * i + 1, 2 * j + 1, h, w)];
            out[off3(ch, i, j, h / 2, w / 2)] = acc * 0.25;
          }
        }
      }
      return out;
    }
    case Op::kGridPool: {
      const Tensor& x = in(0);
      int c = x.dim(0), h = x.dim(1), w = x.dim(2);
      int g = node.iargs[0];
      int cell_h = h / g, cell_w = w / g;
      double inv = 1.0 / (cell_h * cell_w);
      Tensor out({g * g, c});
      for (int r = 0; r < g; ++r) {
        for (int s = 0; s < g; ++s) {
          for (int ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            for (int i = r * cell_h; i < (r + 1) * cell_h; ++i) {
              for (int j = s * cell_w; j < (s + 1) * cell_w; ++j) {
                acc += x[off3(ch, i, j, h, w)];
              }
            }
            out.at(r * g + s, ch) = acc * inv;
          }
        }
      }
      return out;
    }
  }
  throw ContractError("unhandled op");
}

std::vector<Tensor> Tape::replay() const {
  std::deque<Node> replayed;
  std::vector<Tensor> values;
  values.reserve(nodes_.size());
  for (const Node& node : nodes_) {
    Node copy = node;
    copy.value = eval(node, replayed);
    values.push_back(copy.value);
    replayed.push_back(std::move(copy));
  }
  return values;
}

GradientMap Tape::backward(Var loss) const {
  if (loss.tape != this) throw ContractError("backward: loss from a different tape");
  if (loss.id < 0 || loss.id >= size()) throw ContractError("backward: loss id out of range");
  if (value(loss.id).numel() != 1) {
    throw ContractError("backward: loss must be scalar, got " + value(loss.id).shape_str());
  }

  std::vector<Tensor> adj(nodes_.size());
  auto grad = [&](std::int32_t id) -> Tensor& {
    Tensor& g = adj[static_cast<std::size_t>(id)];
    if (g.empty()) g = Tensor(nodes_[static_cast<std::size_t>(id)].value.shape());
    return g;
  };
  grad(loss.id).flat().setConstant(1.0);

  for (std::int32_t id = loss.id; id >= 0; --id) {
    const Tensor& dy = adj[static_cast<std::size_t>(id)];
    if (dy.empty()) continue;
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    auto in = [&](std::size_t i) -> const Tensor& {
      return nodes_[static_cast<std::size_t>(node.inputs[i])].value;
    };
    switch (node.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul: {
        const Tensor& a = in(0);
        const Tensor& b = in(1);
        if (b.rank() == 1) {
          grad(node.inputs[0]).matrix() += dy.flat() * b.flat().transpose();
          grad(node.inputs[1]).flat() += a.matrix().transpose() * dy.flat();
        } else {
          grad(node.inputs[0]).matrix() += dy.matrix() * b.matrix().transpose();
          grad(node.inputs[1]).matrix() += a.matrix().transpose() * dy.matrix();
        }
        break;
      }
      case Op::kAdd:
        grad(node.inputs[0]).flat() += dy.flat();
        grad(node.inputs[1]).flat() += dy.flat();
        break;
      case Op::kMul:
        grad(node.inputs[0]).flat().array() += dy.flat().array() * in(1).flat().array();
        grad(node.inputs[1]).flat().array() += dy.flat().array() * in(0).flat().array();
        break;
      case Op::kScale:
        grad(node.inputs[0]).flat() += node.scalar * dy.flat();
        break;
      case Op::kShift:
        grad(node.inputs[0]).flat() += dy.flat();
        break;
      case Op::kTanh:
        grad(node.inputs[0]).flat().array() +=
            dy.flat().array() * (1.0 - node.value.flat().array().square());
        break;
      case Op::kSigmoid: {
        auto y = node.value.flat().array();
        grad(node.inputs[0]).flat().array() += dy.flat().array() * y * (1.0 - y);
        break;
      }
      case Op::kConcat: {
        int off = 0;
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          int n = in(i).numel();
          grad(node.inputs[i]).flat() += dy.flat().segment(off, n);
          off += n;
        }
        break;
      }
      case Op::kStackRows:
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          grad(node.inputs[i]).flat() += dy.matrix().row(static_cast<int>(i)).transpose();
        }
        break;
      case Op::kSoftmax: {
        auto y = node.value.flat();
        double dot = dy.flat().dot(y);
        grad(node.inputs[0]).flat().array() += y.array() * (dy.flat().array() - dot);
        break;
      }
      case Op::kCrossEntropy: {
        const Tensor& p = in(0);
        const Tensor& t = node.payload;
        double g = dy[0];
        Tensor& dp = grad(node.inputs[0]);
        for (int i = 0; i < p.numel(); ++i) {
          if (p[i] >= kLogClampEps) dp[i] -= g * t[i] / p[i];
        }
        break;
      }
      case Op::kSum:
        grad(node.inputs[0]).flat().array() += dy[0];
        break;
      case Op::kSquare:
        grad(node.inputs[0]).flat().array() += 2.0 * dy.flat().array() * in(0).flat().array();
        break;
      case Op::kTranspose:
        grad(node.inputs[0]).matrix() += dy.matrix().transpose();
        break;
      case Op::kReshape:
        grad(node.inputs[0]).flat() += dy.flat();
        break;
      case Op::kSlice:
        grad(node.inputs[0]).flat().segment(node.iargs[0], node.iargs[1]) += dy.flat();
        break;
      case Op::kRow:
        grad(node.inputs[0]).matrix().row(node.iargs[0]) += dy.flat().transpose();
        break;
      case Op::kColwiseAdd:
        grad(node.inputs[0]).flat() += dy.flat();
        grad(node.inputs[1]).flat() += dy.matrix().rowwise().sum();
        break;
      case Op::kMeanRows: {
        const Tensor& a = in(0);
        double inv = 1.0 / a.dim(0);
        Tensor& da = grad(node.inputs[0]);
        for (int r = 0; r < a.dim(0); ++r) {
          da.matrix().row(r) += inv * dy.flat().transpose();
        }
        break;
      }
      case Op::kConv2d: {
        const Tensor& x = in(0);
        const Tensor& w = in(1);
        int ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
        int co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
        int ph = (kh - 1) / 2, pw = (kw - 1) / 2;
        Tensor& dx = grad(node.inputs[0]);
        Tensor& dw = grad(node.inputs[1]);
        Tensor& db = grad(node.inputs[2]);
        for (int o = 0; o < co; ++o) {
          for (int i = 0; i < h; ++i) {
            for (int j = 0; j < wd; ++j) {
              double g = dy[off3(o, i, j, h, wd)];
              if (g == 0.0) continue;
              db[o] += g;
              for (int c = 0; c < ci; ++c) {
                for (int u = 0; u < kh; ++u) {
                  int ii = i + u - ph;
                  if (ii < 0 || ii >= h) continue;
                  for (int v = 0; v < kw; ++v) {
                    int jj = j + v - pw;
                    if (jj < 0 || jj >= wd) continue;
                    dw[off4(o, c, u, v, ci, kh, kw)] += g * x[off3(c, ii, jj, h, wd)];
                    dx[off3(c, ii, jj, h, wd)] += g * w[off4(o, c, u, v, ci, kh, kw)];
                  }
                }
              }
            }
          }
        }
        break;
      }
      case Op::kMeanPool2: {
        const Tensor& x = in(0);
        int c = x.dim(0), h = x.dim(1), w = x.dim(2);
        Tensor& dx = grad(node.inputs[0]);
        for (int ch = 0; ch < c; ++ch) {
          for (int i = 0; i < h / 2; ++i) {
            for (int j = 0; j < w / 2; ++j) {
              double g = 0.25 * dy[off3(ch, i, j, h / 2, w / 2)];
              dx[off3(ch, 2 * i, 2 * j, h, w)] += g;
              dx[off3(ch, 2 * i, 2 * j + 1, h, w)] += g;
              dx[off3(ch, 2 * i + 1, 2 * j, h, w)] += g;
              dx[off3(ch, 2 * i + 1, 2 * j + 1, h, w)] += g;
            }
          }
        }
        break;
      }
      case Op::kGridPool: {
        const Tensor& x = in(0);
        int c = x.dim(0), h = x.dim(1), w = x.dim(2);
        int g = node.iargs[0];
        int cell_h = h / g, cell_w = w / g;
        double inv = 1.0 / (cell_h * cell_w);
        Tensor& dx = grad(node.inputs[0]);
        for (int r = 0; r < g; ++r) {
          for (int s = 0; s < g; ++s) {
            for (int ch = 0; ch < c; ++ch) {
              double gg = inv * dy.at(r * g + s, ch);
              for (int i = r * cell_h; i < (r + 1) * cell_h; ++i) {
                for (int j = s * cell_w; j < (s + 1) * cell_w; ++j) {
                  dx[off3(ch, i, j, h, w)] += gg;
                }
              }
            }
          }
        }
        break;
      }
    }
  }

  GradientMap out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& node = nodes_[i];
    if (node.op != Op::kLeaf || node.name.empty()) continue;
    if (adj[i].empty()) {
      if (!out.contains(node.name)) out.insert_zeros(node.name, node.value.shape());
    } else {
      out.accumulate(node.name, adj[i]);
    }
  }
  return out;
}

// --- builders ----------------------------------------------------------------

Var matmul(Var a, Var b) {
  check_same_tape(a, b, "matmul");
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  bool ok = ta.rank() == 2 && (tb.rank() == 2 || tb.rank() == 1) && ta.dim(1) == tb.dim(0);
  if (!ok) throw DimensionError("matmul: " + ta.shape_str() + " x " + tb.shape_str());
  return a.tape->emit(Tape::Op::kMatMul, {a.id, b.id}, {}, 0.0, {});
}

namespace {
Var binary_same_shape(Tape::Op op, const char* name, Var a, Var b) {
  check_same_tape(a, b, name);
  if (!a.value().same_shape(b.value())) {
    throw DimensionError(std::string(name) + ": shape mismatch " + a.value().shape_str() + " vs " +
                         b.value().shape_str());
  }
  return a.tape->emit(op, {a.id, b.id}, {}, 0.0, {});
}
}  // namespace

Var add(Var a, Var b) { return binary_same_shape(Tape::Op::kAdd, "add", a, b); }
Var mul(Var a, Var b) { return binary_same_shape(Tape::Op::kMul, "mul", a, b); }
Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var scale(Var a, double k) { return a.tape->emit(Tape::Op::kScale, {a.id}, {}, k, {}); }
Var shift(Var a, double k) { return a.tape->emit(Tape::Op::kShift, {a.id}, {}, k, {}); }
Var tanh(Var a) { return a.tape->emit(Tape::Op::kTanh, {a.id}, {}, 0.0, {}); }
Var sigmoid(Var a) { return a.tape->emit(Tape::Op::kSigmoid, {a.id}, {}, 0.0, {}); }
Var square(Var a) { return a.tape->emit(Tape::Op::kSquare, {a.id}, {}, 0.0, {}); }
Var sum(Var a) { return a.tape->emit(Tape::Op::kSum, {a.id}, {}, 0.0, {}); }

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw DomainError("concat: no inputs");
  std::vector<std::int32_t> ids;
  for (Var p : parts) {
    check_same_tape(parts.front(), p, "concat");
    if (p.value().rank() != 1) {
      throw DimensionError("concat: rank-1 inputs required, got " + p.value().shape_str());
    }
    ids.push_back(p.id);
  }
  return parts.front().tape->emit(Tape::Op::kConcat, std::move(ids), {}, 0.0, {});
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw DomainError("stack_rows: no inputs");
  std::vector<std::int32_t> ids;
  for (Var r : rows) {
    check_same_tape(rows.front(), r, "stack_rows");
    if (r.value().rank() != 1 || r.value().numel() != rows.front().value().numel()) {
      throw DimensionError("stack_rows: inputs must be equal-length vectors");
    }
    ids.push_back(r.id);
  }
  return rows.front().tape->emit(Tape::Op::kStackRows, std::move(ids), {}, 0.0, {});
}

Var softmax(Var logits) {
  const Tensor& x = logits.value();
  if (x.numel() == 0) throw DomainError("softmax: empty input");
  if (x.rank() != 1) throw DimensionError("softmax: rank-1 input required, got " + x.shape_str());
  if (!x.all_finite()) throw DomainError("softmax: non-finite logits");
  return logits.tape->emit(Tape::Op::kSoftmax, {logits.id}, {}, 0.0, {});
}

Var cross_entropy(Var pred, Tensor target) {
  const Tensor& p = pred.value();
  if (p.rank() != 1 || target.rank() != 1 || p.numel() != target.numel()) {
    throw DimensionError("cross_entropy: " + p.shape_str() + " vs " + target.shape_str());
  }
  if (std::abs(p.flat().sum() - 1.0) > 1e-6 || std::abs(target.flat().sum() - 1.0) > 1e-6) {
    throw DomainError("cross_entropy: inputs must sum to 1");
  }
  return pred.tape->emit(Tape::Op::kCrossEntropy, {pred.id}, {}, 0.0, std::move(target));
}

Var transpose(Var a) {
  if (a.value().rank() != 2) {
    throw DimensionError("transpose: rank-2 input required, got " + a.value().shape_str());
  }
  return a.tape->emit(Tape::Op::kTranspose, {a.id}, {}, 0.0, {});
}

Var reshape(Var a, std::vector<int> shape) {
  if (shape_numel(shape) != a.value().numel()) {
    throw DimensionError("reshape: " + a.value().shape_str() + " to " + shape_str(shape));
  }
  return a.tape->emit(Tape::Op::kReshape, {a.id}, std::move(shape), 0.0, {});
}

Var slice(Var a, int offset, int len) {
  const Tensor& t = a.value();
  if (t.rank() != 1) throw DimensionError("slice: rank-1 input required, got " + t.shape_str());
  if (offset < 0 || len < 1 || offset + len > t.numel()) {
    throw DimensionError("slice: [" + std::to_string(offset) + ", " + std::to_string(offset + len) +
                         ") out of " + t.shape_str());
  }
  return a.tape->emit(Tape::Op::kSlice, {a.id}, {offset, len}, 0.0, {});
}

Var row(Var table, int r) {
  const Tensor& t = table.value();
  if (t.rank() != 2) throw DimensionError("row: rank-2 table required, got " + t.shape_str());
  if (r < 0 || r >= t.dim(0)) {
    throw DimensionError("row: index " + std::to_string(r) + " out of " + t.shape_str());
  }
  return table.tape->emit(Tape::Op::kRow, {table.id}, {r}, 0.0, {});
}

Var colwise_add(Var m, Var v) {
  check_same_tape(m, v, "colwise_add");
  if (m.value().rank() != 2 || v.value().rank() != 1 || v.value().numel() != m.value().dim(0)) {
    throw DimensionError("colwise_add: " + m.value().shape_str() + " + " + v.value().shape_str());
  }
  return m.tape->emit(Tape::Op::kColwiseAdd, {m.id, v.id}, {}, 0.0, {});
}

Var mean_rows(Var m) {
  if (m.value().rank() != 2) {
    throw DimensionError("mean_rows: rank-2 input required, got " + m.value().shape_str());
  }
  return m.tape->emit(Tape::Op::kMeanRows, {m.id}, {}, 0.0, {});
}

Var conv2d(Var x, Var w, Var b) {
  check_same_tape(x, w, "conv2d");
  check_same_tape(x, b, "conv2d");
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  const Tensor& tb = b.value();
  bool ok = tx.rank() == 3 && tw.rank() == 4 && tb.rank() == 1 && tw.dim(1) == tx.dim(0) &&
            tb.dim(0) == tw.dim(0) && tw.dim(2) % 2 == 1 && tw.dim(3) % 2 == 1;
  if (!ok) {
    throw DimensionError("conv2d: x " + tx.shape_str() + ", w " + tw.shape_str() + ", b " +
                         tb.shape_str());
  }
  return x.tape->emit(Tape::Op::kConv2d, {x.id, w.id, b.id}, {}, 0.0, {});
}

Var mean_pool2(Var x) {
  const Tensor& t = x.value();
  if (t.rank() != 3 || t.dim(1) % 2 != 0 || t.dim(2) % 2 != 0) {
    throw DimensionError("mean_pool2: even spatial dims required, got " + t.shape_str());
  }
  return x.tape->emit(Tape::Op::kMeanPool2, {x.id}, {}, 0.0, {});
}

Var grid_pool(Var x, int g) {
  const Tensor& t = x.value();
  if (t.rank() != 3 || g < 1 || t.dim(1) % g != 0 || t.dim(2) % g != 0) {
    throw DimensionError("grid_pool: grid " + std::to_string(g) + " does not divide " +
                         t.shape_str());
  }
  return x.tape->emit(Tape::Op::kGridPool, {x.id}, {g}, 0.0, {});
}

}  // namespace higen
