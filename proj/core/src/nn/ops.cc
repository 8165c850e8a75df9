// Copyright (c) 2026 The flespeech project
// SPDX-License-Identifier: Apache-2.0

#include "flespeech/nn/ops.h"

#include <algorithm>
#include <cmath>

#include "flespeech/common/error.h"

namespace flespeech {
namespace nn {

namespace {

constexpr double kSqrt1_2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

std::shared_ptr<Node> make_node(Tensor value,
                                std::vector<std::shared_ptr<Node>> parents,
                                std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return n;
}

void accumulate(Node* p, const Tensor& delta) {
  if (!p->requires_grad) return;
  p->ensure_grad();
  double* g = p->grad.data();
  const double* d = delta.data();
  for (std::int64_t i = 0; i < delta.size(); ++i) g[i] += d[i];
}

Var unary(const Var& a, double (*f)(double), double (*df)(double, double)) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) y.data()[i] = f(x.data()[i]);
  return Var(make_node(std::move(y), {a.ptr()}, [df](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (std::int64_t i = 0; i < n.value.size(); ++i) {
      p->grad.data()[i] +=
          n.grad.data()[i] * df(p->value.data()[i], n.value.data()[i]);
    }
  }));
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw DimensionMismatchError(std::string(op) + ": operand shapes differ");
  }
}

}  // namespace

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor y(a.value().shape());
  for (std::int64_t i = 0; i < y.size(); ++i) {
    y.data()[i] = a.value().data()[i] + b.value().data()[i];
  }
  return Var(make_node(std::move(y), {a.ptr(), b.ptr()}, [](Node& n) {
    accumulate(n.parents[0].get(), n.grad);
    accumulate(n.parents[1].get(), n.grad);
  }));
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor y(a.value().shape());
  for (std::int64_t i = 0; i < y.size(); ++i) {
    y.data()[i] = a.value().data()[i] - b.value().data()[i];
  }
  return Var(make_node(std::move(y), {a.ptr(), b.ptr()}, [](Node& n) {
    accumulate(n.parents[0].get(), n.grad);
    Node* p = n.parents[1].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      p->grad.data()[i] -= n.grad.data()[i];
    }
  }));
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor y(a.value().shape());
  for (std::int64_t i = 0; i < y.size(); ++i) {
    y.data()[i] = a.value().data()[i] * b.value().data()[i];
  }
  return Var(make_node(std::move(y), {a.ptr(), b.ptr()}, [](Node& n) {
    Node* pa = n.parents[0].get();
    Node* pb = n.parents[1].get();
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (std::int64_t i = 0; i < n.grad.size(); ++i) {
        pa->grad.data()[i] += n.grad.data()[i] * pb->value.data()[i];
      }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (std::int64_t i = 0; i < n.grad.size(); ++i) {
        pb->grad.data()[i] += n.grad.data()[i] * pa->value.data()[i];
      }
    }
  }));
}

Var scale(const Var& a, double s) {
  Tensor y(a.value().shape());
  for (std::int64_t i = 0; i < y.size(); ++i) y.data()[i] = s * a.value().data()[i];
  return Var(make_node(std::move(y), {a.ptr()}, [s](Node& n) {
    Node* p = n.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      p->grad.data()[i] += s * n.grad.data()[i];
    }
  }));
}

Var add_scalar(const Var& a, double s) {
  Tensor y(a.value().shape());
  for (std::int64_t i = 0; i < y.size(); ++i) y.data()[i] = a.value().data()[i] + s;
  return Var(make_node(std::move(y), {a.ptr()}, [](Node& n) {
    accumulate(n.parents[0].get(), n.grad);
  }));
}

Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(const Var& a) {
  // Exact erf form: x * Phi(x).
  return unary(
      a,
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * kSqrt1_2)); },
      [](double x, double) {
        double phi = 0.5 * (1.0 + std::erf(x * kSqrt1_2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        return phi + x * pdf;
      });
}

Var tanh_op(const Var& a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var exp_op(const Var& a) {
  return unary(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var log_op(const Var& a) {
  return unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var square(const Var& a) {
  return unary(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var abs_op(const Var& a) {
  return unary(
      a, [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) {
    throw DimensionMismatchError("matmul: incompatible shapes");
  }
  int m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor Y({m, n});
  for (int i = 0; i < m; ++i) {
    const double* arow = A.data() + static_cast<std::size_t>(i) * k;
    double* yrow = Y.data() + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = B.data() + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) yrow[j] += av * brow[j];
    }
  }
  return Var(make_node(std::move(Y), {a.ptr(), b.ptr()}, [m, k, n](Node& nd) {
    Node* pa = nd.parents[0].get();
    Node* pb = nd.parents[1].get();
    const Tensor& G = nd.grad;
    if (pa->requires_grad) {
      pa->ensure_grad();
      // dA = G * B^T
      const Tensor& B2 = pb->value;
      for (int i = 0; i < m; ++i) {
        const double* grow = G.data() + static_cast<std::size_t>(i) * n;
        double* darow = pa->grad.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
          const double* brow = B2.data() + static_cast<std::size_t>(p) * n;
          double acc = 0.0;
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          darow[p] += acc;
        }
      }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      // dB = A^T * G
      const Tensor& A2 = pa->value;
      for (int p = 0; p < k; ++p) {
        double* dbrow = pb->grad.data() + static_cast<std::size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
          double av = A2.data()[static_cast<std::size_t>(i) * k + p];
          if (av == 0.0) continue;
          const double* grow = G.data() + static_cast<std::size_t>(i) * n;
          for (int j = 0; j < n; ++j) dbrow[j] += av * grow[j];
        }
      }
    }
  }));
}

Var transpose(const Var& a) {
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionMismatchError("transpose: rank-2 only");
  int m = A.dim(0), n = A.dim(1);
  Tensor Y({n, m});
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) Y.at(j, i) = A.at(i, j);
  }
  return Var(make_node(std::move(Y), {a.ptr()}, [m, n](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) p->grad.at(i, j) += nd.grad.at(j, i);
    }
  }));
}

Var add_rowvec(const Var& m, const Var& v) {
  const Tensor& M = m.value();
  const Tensor& V = v.value();
  if (M.rank() != 2 || V.size() != M.dim(1)) {
    throw DimensionMismatchError("add_rowvec: incompatible shapes");
  }
  int rows = M.dim(0), cols = M.dim(1);
  Tensor Y({rows, cols});
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) Y.at(i, j) = M.at(i, j) + V.data()[j];
  }
  return Var(make_node(std::move(Y), {m.ptr(), v.ptr()}, [rows, cols](Node& nd) {
    accumulate(nd.parents[0].get(), nd.grad);
    Node* pv = nd.parents[1].get();
    if (!pv->requires_grad) return;
    pv->ensure_grad();
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        pv->grad.data()[j] += nd.grad.at(i, j);
      }
    }
  }));
}

Var tile_rows(const Var& row, int t) {
  const Tensor& R = row.value();
  int cols = static_cast<int>(R.size());
  Tensor Y({t, cols});
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < cols; ++j) Y.at(i, j) = R.data()[j];
  }
  return Var(make_node(std::move(Y), {row.ptr()}, [t, cols](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (int i = 0; i < t; ++i) {
      for (int j = 0; j < cols; ++j) p->grad.data()[j] += nd.grad.at(i, j);
    }
  }));
}

Var gather_rows(const Var& table, const std::vector<int>& ids) {
  const Tensor& T = table.value();
  if (T.rank() != 2) throw DimensionMismatchError("gather_rows: rank-2 table");
  int d = T.dim(1);
  Tensor Y({static_cast<int>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= T.dim(0)) {
      throw DimensionMismatchError("gather_rows: id out of range");
    }
    for (int j = 0; j < d; ++j) Y.at(static_cast<int>(i), j) = T.at(ids[i], j);
  }
  return Var(make_node(std::move(Y), {table.ptr()}, [ids, d](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (int j = 0; j < d; ++j) {
        p->grad.at(ids[i], j) += nd.grad.at(static_cast<int>(i), j);
      }
    }
  }));
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw EmptySequenceError("concat_cols: no parts");
  int rows = parts[0].value().rows();
  int cols = 0;
  for (const auto& p : parts) {
    if (p.value().rank() != 2 || p.value().dim(0) != rows) {
      throw DimensionMismatchError("concat_cols: row mismatch");
    }
    cols += p.value().dim(1);
  }
  Tensor Y({rows, cols});
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<int> offsets;
  int off = 0;
  for (const auto& p : parts) {
    int w = p.value().dim(1);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < w; ++j) Y.at(i, off + j) = p.value().at(i, j);
    }
    parents.push_back(p.ptr());
    offsets.push_back(off);
    off += w;
  }
  return Var(make_node(std::move(Y), std::move(parents),
                       [rows, offsets](Node& nd) {
    for (std::size_t k = 0; k < nd.parents.size(); ++k) {
      Node* p = nd.parents[k].get();
      if (!p->requires_grad) continue;
      p->ensure_grad();
      int w = p->value.dim(1);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < w; ++j) {
          p->grad.at(i, j) += nd.grad.at(i, offsets[k] + j);
        }
      }
    }
  }));
}

Var slice_cols(const Var& a, int lo, int hi) {
  const Tensor& A = a.value();
  if (A.rank() != 2 || lo < 0 || hi > A.dim(1) || lo >= hi) {
    throw DimensionMismatchError("slice_cols: bad range");
  }
  int rows = A.dim(0), w = hi - lo;
  Tensor Y({rows, w});
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < w; ++j) Y.at(i, j) = A.at(i, lo + j);
  }
  return Var(make_node(std::move(Y), {a.ptr()}, [rows, lo, w](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < w; ++j) p->grad.at(i, lo + j) += nd.grad.at(i, j);
    }
  }));
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw EmptySequenceError("concat_rows: no parts");
  int cols = parts[0].value().dim(1);
  int rows = 0;
  for (const auto& p : parts) {
    if (p.value().rank() != 2 || p.value().dim(1) != cols) {
      throw DimensionMismatchError("concat_rows: column mismatch");
    }
    rows += p.value().dim(0);
  }
  Tensor Y({rows, cols});
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<int> offsets;
  int off = 0;
  for (const auto& p : parts) {
    int h = p.value().dim(0);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < cols; ++j) Y.at(off + i, j) = p.value().at(i, j);
    }
    parents.push_back(p.ptr());
    offsets.push_back(off);
    off += h;
  }
  return Var(make_node(std::move(Y), std::move(parents),
                       [cols, offsets](Node& nd) {
    for (std::size_t k = 0; k < nd.parents.size(); ++k) {
      Node* p = nd.parents[k].get();
      if (!p->requires_grad) continue;
      p->ensure_grad();
      int h = p->value.dim(0);
      for (int i = 0; i < h; ++i) {
        for (int j = 0; j < cols; ++j) {
          p->grad.at(i, j) += nd.grad.at(offsets[k] + i, j);
        }
      }
    }
  }));
}

Var slice_rows(const Var& a, int lo, int hi) {
  const Tensor& A = a.value();
  if (A.rank() != 2 || lo < 0 || hi > A.dim(0) || lo >= hi) {
    throw DimensionMismatchError("slice_rows: bad range");
  }
  int h = hi - lo, cols = A.dim(1);
  Tensor Y({h, cols});
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < cols; ++j) Y.at(i, j) = A.at(lo + i, j);
  }
  return Var(make_node(std::move(Y), {a.ptr()}, [h, cols, lo](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < cols; ++j) p->grad.at(lo + i, j) += nd.grad.at(i, j);
    }
  }));
}

Var reshape(const Var& a, std::vector<int> shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  if (n != a.value().size()) throw DimensionMismatchError("reshape: size mismatch");
  Tensor Y = Tensor::from_vector(std::move(shape), a.value().vec());
  return Var(make_node(std::move(Y), {a.ptr()}, [](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (std::int64_t i = 0; i < nd.grad.size(); ++i) {
      p->grad.data()[i] += nd.grad.data()[i];
    }
  }));
}

Var frame_signal(const Var& x, int win, int hop, int t) {
  const Tensor& X = x.value();
  if (X.rank() != 1) throw DimensionMismatchError("frame_signal: rank-1 input");
  std::int64_t n = X.size();
  Tensor Y({t, win});
  for (int i = 0; i < t; ++i) {
    std::int64_t start = static_cast<std::int64_t>(i) * hop;
    for (int j = 0; j < win; ++j) {
      std::int64_t idx = start + j;
      Y.at(i, j) = idx < n ? X.data()[idx] : 0.0;
    }
  }
  return Var(make_node(std::move(Y), {x.ptr()}, [win, hop, t, n](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (int i = 0; i < t; ++i) {
      std::int64_t start = static_cast<std::int64_t>(i) * hop;
      for (int j = 0; j < win; ++j) {
        std::int64_t idx = start + j;
        if (idx < n) p->grad.data()[idx] += nd.grad.at(i, j);
      }
    }
  }));
}

Var softmax_rows(const Var& a) {
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionMismatchError("softmax_rows: rank-2 only");
  int rows = A.dim(0), cols = A.dim(1);
  Tensor Y({rows, cols});
  for (int i = 0; i < rows; ++i) {
    double mx = A.at(i, 0);
    for (int j = 1; j < cols; ++j) mx = std::max(mx, A.at(i, j));
    double z = 0.0;
    for (int j = 0; j < cols; ++j) {
      double e = std::exp(A.at(i, j) - mx);
      Y.at(i, j) = e;
      z += e;
    }
    for (int j = 0; j < cols; ++j) Y.at(i, j) /= z;
  }
  return Var(make_node(std::move(Y), {a.ptr()}, [rows, cols](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (int i = 0; i < rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < cols; ++j) dot += nd.grad.at(i, j) * nd.value.at(i, j);
      for (int j = 0; j < cols; ++j) {
        p->grad.at(i, j) += nd.value.at(i, j) * (nd.grad.at(i, j) - dot);
      }
    }
  }));
}

Var layer_norm_rows(const Var& a, const Var& gain, const Var& bias, double eps) {
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionMismatchError("layer_norm_rows: rank-2 only");
  int rows = A.dim(0), cols = A.dim(1);
  if (gain.value().size() != cols || bias.value().size() != cols) {
    throw DimensionMismatchError("layer_norm_rows: gain/bias size");
  }
  Tensor Y({rows, cols});
  Tensor xhat({rows, cols});
  std::vector<double> inv_sigma(rows);
  for (int i = 0; i < rows; ++i) {
    double mu = 0.0;
    for (int j = 0; j < cols; ++j) mu += A.at(i, j);
    mu /= cols;
    double var = 0.0;
    for (int j = 0; j < cols; ++j) {
      double d = A.at(i, j) - mu;
      var += d * d;
    }
    var /= cols;
    double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[i] = is;
    for (int j = 0; j < cols; ++j) {
      double xh = (A.at(i, j) - mu) * is;
      xhat.at(i, j) = xh;
      Y.at(i, j) = xh * gain.value().data()[j] + bias.value().data()[j];
    }
  }
  auto xhat_ptr = std::make_shared<Tensor>(std::move(xhat));
  auto is_ptr = std::make_shared<std::vector<double>>(std::move(inv_sigma));
  return Var(make_node(
      std::move(Y), {a.ptr(), gain.ptr(), bias.ptr()},
      [rows, cols, xhat_ptr, is_ptr](Node& nd) {
        Node* px = nd.parents[0].get();
        Node* pg = nd.parents[1].get();
        Node* pb = nd.parents[2].get();
        const Tensor& xh = *xhat_ptr;
        if (pg->requires_grad) {
          pg->ensure_grad();
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
              pg->grad.data()[j] += nd.grad.at(i, j) * xh.at(i, j);
            }
          }
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
              pb->grad.data()[j] += nd.grad.at(i, j);
            }
          }
        }
        if (px->requires_grad) {
          px->ensure_grad();
          const double* gamma = pg->value.data();
          for (int i = 0; i < rows; ++i) {
            double mean_dxh = 0.0, mean_dxh_xh = 0.0;
            for (int j = 0; j < cols; ++j) {
              double dxh = nd.grad.at(i, j) * gamma[j];
              mean_dxh += dxh;
              mean_dxh_xh += dxh * xh.at(i, j);
            }
            mean_dxh /= cols;
            mean_dxh_xh /= cols;
            for (int j = 0; j < cols; ++j) {
              double dxh = nd.grad.at(i, j) * gamma[j];
              px->grad.at(i, j) +=
                  (*is_ptr)[i] * (dxh - mean_dxh - xh.at(i, j) * mean_dxh_xh);
            }
          }
        }
      }));
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.value().size(); ++i) s += a.value().data()[i];
  return Var(make_node(Tensor::scalar(s), {a.ptr()}, [](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    double g = nd.grad.at(0);
    for (std::int64_t i = 0; i < p->grad.size(); ++i) p->grad.data()[i] += g;
  }));
}

Var mean_all(const Var& a) {
  std::int64_t n = a.value().size();
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) s += a.value().data()[i];
  return Var(make_node(Tensor::scalar(s / n), {a.ptr()}, [n](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    double g = nd.grad.at(0) / n;
    for (std::int64_t i = 0; i < p->grad.size(); ++i) p->grad.data()[i] += g;
  }));
}

Var mean_rows(const Var& a) {
  const Tensor& A = a.value();
  if (A.rank() != 2) throw DimensionMismatchError("mean_rows: rank-2 only");
  int rows = A.dim(0), cols = A.dim(1);
  Tensor Y({1, cols});
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) Y.at(0, j) += A.at(i, j) / rows;
  }
  return Var(make_node(std::move(Y), {a.ptr()}, [rows, cols](Node& nd) {
    Node* p = nd.parents[0].get();
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        p->grad.at(i, j) += nd.grad.at(0, j) / rows;
      }
    }
  }));
}

Var mse_loss(const Var& pred, const Var& target) {
  check_same_shape(pred, target, "mse_loss");
  return mean_all(square(sub(pred, target)));
}

Var l1_loss(const Var& pred, const Var& target) {
  check_same_shape(pred, target, "l1_loss");
  return mean_all(abs_op(sub(pred, target)));
}

Var cross_entropy_mean(const Var& logits, const std::vector<int>& targets,
                       const std::vector<double>& row_weights) {
  const Tensor& L = logits.value();
  if (L.rank() != 2 || static_cast<int>(targets.size()) != L.dim(0)) {
    throw DimensionMismatchError("cross_entropy_mean: bad targets");
  }
  if (!row_weights.empty() && row_weights.size() != targets.size()) {
    throw DimensionMismatchError("cross_entropy_mean: bad row weights");
  }
  int rows = L.dim(0), cols = L.dim(1);
  double total_weight = 0.0;
  double loss = 0.0;
  std::vector<double> weights(targets.size(), 1.0);
  if (!row_weights.empty()) weights = row_weights;
  for (int i = 0; i < rows; ++i) {
    if (weights[i] == 0.0) continue;
    if (targets[i] < 0 || targets[i] >= cols) {
      throw DimensionMismatchError("cross_entropy_mean: target out of range");
    }
    double mx = L.at(i, 0);
    for (int j = 1; j < cols; ++j) mx = std::max(mx, L.at(i, j));
    double z = 0.0;
    for (int j = 0; j < cols; ++j) z += std::exp(L.at(i, j) - mx);
    double logp = L.at(i, targets[i]) - mx - std::log(z);
    loss -= weights[i] * logp;
    total_weight += weights[i];
  }
  if (total_weight == 0.0) {
    throw EmptySequenceError("cross_entropy_mean: no weighted rows");
  }
  loss /= total_weight;
  auto w_ptr = std::make_shared<std::vector<double>>(std::move(weights));
  return Var(make_node(
      Tensor::scalar(loss), {logits.ptr()},
      [targets, w_ptr, rows, cols, total_weight](Node& nd) {
        Node* p = nd.parents[0].get();
        if (!p->requires_grad) return;
        p->ensure_grad();
        double g = nd.grad.at(0) / total_weight;
        const Tensor& L2 = p->value;
        for (int i = 0; i < rows; ++i) {
          double w = (*w_ptr)[i];
          if (w == 0.0) continue;
          double mx = L2.at(i, 0);
          for (int j = 1; j < cols; ++j) mx = std::max(mx, L2.at(i, j));
          double z = 0.0;
          for (int j = 0; j < cols; ++j) z += std::exp(L2.at(i, j) - mx);
          for (int j = 0; j < cols; ++j) {
            double soft = std::exp(L2.at(i, j) - mx) / z;
            double onehot = (j == targets[i]) ? 1.0 : 0.0;
            p->grad.at(i, j) += g * w * (soft - onehot);
          }
        }
      }));
}

}  // namespace nn
}  // namespace flespeech
