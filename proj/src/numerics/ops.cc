// src/numerics/ops.cc

// Copyright 2026  The simuls2s Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "simuls2s/numerics/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "simuls2s/base/error.h"

namespace simuls2s {
namespace {

using Vec = std::vector<double>;
using Span = std::span<const double>;

Var Make(Tensor value, Tape* tape, Tape::BackwardFn fn) {
  if (tape == nullptr) return Var(std::move(value));
  return tape->Record(std::move(value), std::move(fn));
}

// Node id used inside backward closures; -1 means "no gradient needed".
int Node(const Var& v) { return v.tracked() ? v.node() : -1; }

Tensor Mat(int rows, int cols, Vec data) { return Tensor({rows, cols}, std::move(data)); }

void RequireSameShape(const Var& a, const Var& b, const char* op) {
  if (a->rows() != b->rows() || a->cols() != b->cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + ShapeToString(a->shape()) +
                     " vs " + ShapeToString(b->shape()));
  }
}

// c[m x n] += a[m x k] * b[k x n]
void GemmNN(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    const double* ai = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double s = ai[p];
      const double* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += s * bp[j];
    }
  }
}

// c[m x n] += a[m x k] * b[n x k]^T
void GemmNT(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<std::size_t>(j) * k;
      double s = 0.0;
      for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
      ci[j] += s;
    }
  }
}

// c[k x n] += a[m x k]^T * b[m x n]
void GemmTN(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    const double* bi = b + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double s = ai[p];
      double* cp = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) cp[j] += s * bi[j];
    }
  }
}

}  // namespace

double SigmoidScalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogSumExp(Span xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double LogAdd(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

Var MatMul(const Var& a, const Var& b) {
  const int m = a->rows(), k = a->cols(), n = b->cols();
  if (b->rows() != k) {
    throw ShapeError("MatMul: inner dims differ " + ShapeToString(a->shape()) + " * " +
                     ShapeToString(b->shape()));
  }
  Vec out(static_cast<std::size_t>(m) * n, 0.0);
  GemmNN(a->data().data(), b->data().data(), out.data(), m, k, n);
  Tape* tape = CommonTape({&a, &b});
  const int ia = Node(a), ib = Node(b);
  const Tensor av = a.value(), bv = b.value();
  return Make(Mat(m, n, std::move(out)), tape, [=](Span g, Tape& t) {
    if (ia >= 0) GemmNT(g.data(), bv.data().data(), t.GradOf(ia).data(), m, n, k);
    if (ib >= 0) GemmTN(av.data().data(), g.data(), t.GradOf(ib).data(), m, k, n);
  });
}

Var MatMulBT(const Var& a, const Var& b) {
  const int m = a->rows(), k = a->cols(), n = b->rows();
  if (b->cols() != k) {
    throw ShapeError("MatMulBT: inner dims differ " + ShapeToString(a->shape()) + " * " +
                     ShapeToString(b->shape()) + "^T");
  }
  Vec out(static_cast<std::size_t>(m) * n, 0.0);
  GemmNT(a->data().data(), b->data().data(), out.data(), m, k, n);
  Tape* tape = CommonTape({&a, &b});
  const int ia = Node(a), ib = Node(b);
  const Tensor av = a.value(), bv = b.value();
  return Make(Mat(m, n, std::move(out)), tape, [=](Span g, Tape& t) {
    // dA = G B, dB = G^T A
    if (ia >= 0) GemmNN(g.data(), bv.data().data(), t.GradOf(ia).data(), m, n, k);
    if (ib >= 0) GemmTN(g.data(), av.data().data(), t.GradOf(ib).data(), m, n, k);
  });
}

Var Add(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Add");
  Vec out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  const int ia = Node(a), ib = Node(b);
  return Make(Mat(a->rows(), a->cols(), std::move(out)), CommonTape({&a, &b}),
              [=](Span g, Tape& t) {
                for (int id : {ia, ib}) {
                  if (id < 0) continue;
                  auto& d = t.GradOf(id);
                  for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                }
              });
}

Var Sub(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Sub");
  Vec out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  const int ia = Node(a), ib = Node(b);
  return Make(Mat(a->rows(), a->cols(), std::move(out)), CommonTape({&a, &b}),
              [=](Span g, Tape& t) {
                if (ia >= 0) {
                  auto& d = t.GradOf(ia);
                  for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                }
                if (ib >= 0) {
                  auto& d = t.GradOf(ib);
                  for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
                }
              });
}

Var Mul(const Var& a, const Var& b) {
  RequireSameShape(a, b, "Mul");
  Vec out(a->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  const int ia = Node(a), ib = Node(b);
  const Tensor av = a.value(), bv = b.value();
  return Make(Mat(a->rows(), a->cols(), std::move(out)), CommonTape({&a, &b}),
              [=](Span g, Tape& t) {
                if (ia >= 0) {
                  auto& d = t.GradOf(ia);
                  for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * bv[i];
                }
                if (ib >= 0) {
                  auto& d = t.GradOf(ib);
                  for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * av[i];
                }
              });
}

Var AddBias(const Var& x, const Var& bias) {
  const int m = x->rows(), n = x->cols();
  if (bias->size() != static_cast<std::size_t>(n)) {
    throw ShapeError("AddBias: bias " + ShapeToString(bias->shape()) + " for input " +
                     ShapeToString(x->shape()));
  }
  Vec out(x->data().begin(), x->data().end());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] += bias.value()[j];
  const int ix = Node(x), ib = Node(bias);
  return Make(Mat(m, n, std::move(out)), CommonTape({&x, &bias}), [=](Span g, Tape& t) {
    if (ix >= 0) {
      auto& d = t.GradOf(ix);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
    if (ib >= 0) {
      auto& d = t.GradOf(ib);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) d[j] += g[static_cast<std::size_t>(i) * n + j];
    }
  });
}

Var Scale(const Var& x, double c) {
  Vec out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * c;
  const int ix = Node(x);
  return Make(Tensor(x->shape(), std::move(out)), CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * c;
  });
}

Var ScaleBy(const Var& x, const Var& s) {
  S2S_CHECK(s->size() == 1, "ScaleBy needs a 1 x 1 scale");
  const double c = s.value()[0];
  Vec out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * c;
  const int ix = Node(x), is = Node(s);
  const Tensor xv = x.value();
  return Make(Tensor(x->shape(), std::move(out)), CommonTape({&x, &s}), [=](Span g, Tape& t) {
    if (ix >= 0) {
      auto& d = t.GradOf(ix);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * c;
    }
    if (is >= 0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
      t.GradOf(is)[0] += acc;
    }
  });
}

Var Relu(const Var& x) {
  Vec out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, x.value()[i]);
  const int ix = Node(x);
  const Tensor xv = x.value();
  return Make(Tensor(x->shape(), std::move(out)), CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0) d[i] += g[i];
  });
}

Var Sigmoid(const Var& x) {
  Vec out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = SigmoidScalar(x.value()[i]);
  const int ix = Node(x);
  Tensor y(x->shape(), std::move(out));
  return Make(y, CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Abs(const Var& x) {
  Vec out(x->size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(x.value()[i]);
  const int ix = Node(x);
  const Tensor xv = x.value();
  return Make(Tensor(x->shape(), std::move(out)), CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double sgn = xv[i] > 0 ? 1.0 : (xv[i] < 0 ? -1.0 : 0.0);
      d[i] += g[i] * sgn;
    }
  });
}

Var Sum(const Var& x) {
  double s = 0.0;
  for (double v : x->data()) s += v;
  const int ix = Node(x);
  return Make(Tensor::Scalar(s), CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (double& v : d) v += g[0];
  });
}

Var Mean(const Var& x) {
  S2S_CHECK(x->size() > 0, "Mean of empty tensor");
  return Scale(Sum(x), 1.0 / static_cast<double>(x->size()));
}

Var Softmax(const Var& x) {
  const int m = x->rows(), n = x->cols();
  Vec out(x->size());
  for (int i = 0; i < m; ++i) {
    auto row = x->row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    double* o = out.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) s += (o[j] = std::exp(row[j] - mx));
    for (int j = 0; j < n; ++j) o[j] /= s;
  }
  const int ix = Node(x);
  Tensor y(x->shape(), std::move(out));
  return Make(y, CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (int i = 0; i < m; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * n;
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += g[off + j] * y[off + j];
      for (int j = 0; j < n; ++j) d[off + j] += y[off + j] * (g[off + j] - dot);
    }
  });
}

Var LogSoftmax(const Var& x) {
  const int m = x->rows(), n = x->cols();
  Vec out(x->size());
  for (int i = 0; i < m; ++i) {
    auto row = x->row(i);
    const double lse = LogSumExp(row);
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i) * n + j] = row[j] - lse;
  }
  const int ix = Node(x);
  Tensor y(x->shape(), std::move(out));
  return Make(y, CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (int i = 0; i < m; ++i) {
      const std::size_t off = static_cast<std::size_t>(i) * n;
      double gs = 0.0;
      for (int j = 0; j < n; ++j) gs += g[off + j];
      for (int j = 0; j < n; ++j) d[off + j] += g[off + j] - std::exp(y[off + j]) * gs;
    }
  });
}

Var LayerNorm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const int m = x->rows(), n = x->cols();
  S2S_CHECK(gain->size() == static_cast<std::size_t>(n) && bias->size() == static_cast<std::size_t>(n),
            "LayerNorm gain/bias width must match input");
  Vec xhat(x->size()), out(x->size()), inv_std(m);
  for (int i = 0; i < m; ++i) {
    auto row = x->row(i);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= n;
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= n;
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      xhat[k] = (row[j] - mu) * inv_std[i];
      out[k] = xhat[k] * gain.value()[j] + bias.value()[j];
    }
  }
  const int ix = Node(x), ig = Node(gain), ib = Node(bias);
  const Tensor gv = gain.value();
  return Make(Mat(m, n, std::move(out)), CommonTape({&x, &gain, &bias}),
              [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Span g, Tape& t) {
                if (ig >= 0) {
                  auto& d = t.GradOf(ig);
                  for (std::size_t k = 0; k < g.size(); ++k) d[k % n] += g[k] * xhat[k];
                }
                if (ib >= 0) {
                  auto& d = t.GradOf(ib);
                  for (std::size_t k = 0; k < g.size(); ++k) d[k % n] += g[k];
                }
                if (ix >= 0) {
                  auto& d = t.GradOf(ix);
                  for (int i = 0; i < m; ++i) {
                    const std::size_t off = static_cast<std::size_t>(i) * n;
                    double s1 = 0.0, s2 = 0.0;
                    for (int j = 0; j < n; ++j) {
                      const double gh = g[off + j] * gv[j];
                      s1 += gh;
                      s2 += gh * xhat[off + j];
                    }
                    for (int j = 0; j < n; ++j) {
                      const double gh = g[off + j] * gv[j];
                      d[off + j] += inv_std[i] * (gh - s1 / n - xhat[off + j] * s2 / n);
                    }
                  }
                }
              });
}

Var Embed(const Var& table, std::span<const int> ids) {
  const int vocab = table->rows(), n = table->cols();
  const int m = static_cast<int>(ids.size());
  Vec out(static_cast<std::size_t>(m) * n);
  std::vector<int> idv(ids.begin(), ids.end());
  for (int i = 0; i < m; ++i) {
    if (idv[i] < 0 || idv[i] >= vocab) {
      throw ShapeError("Embed: id " + std::to_string(idv[i]) + " outside table of " +
                       std::to_string(vocab));
    }
    auto r = table->row(idv[i]);
    std::copy(r.begin(), r.end(), out.begin() + static_cast<std::ptrdiff_t>(i) * n);
  }
  const int it = Node(table);
  return Make(Mat(m, n, std::move(out)), CommonTape({&table}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(it);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        d[static_cast<std::size_t>(idv[i]) * n + j] += g[static_cast<std::size_t>(i) * n + j];
  });
}

Var MaskedAttention(const Var& q, const Var& k, const Var& v, const Mask& mask) {
  const int tq = q->rows(), tk = k->rows(), dk = q->cols(), dv = v->cols();
  if (k->cols() != dk || v->rows() != tk) {
    throw ShapeError("MaskedAttention: q " + ShapeToString(q->shape()) + ", k " +
                     ShapeToString(k->shape()) + ", v " + ShapeToString(v->shape()));
  }
  if (mask.rows() != tq || mask.cols() != tk) {
    throw ShapeError("MaskedAttention: mask is " + std::to_string(mask.rows()) + " x " +
                     std::to_string(mask.cols()) + ", expected " + std::to_string(tq) + " x " +
                     std::to_string(tk));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  Vec probs(static_cast<std::size_t>(tq) * tk, 0.0);
  Vec out(static_cast<std::size_t>(tq) * dv, 0.0);
  const double* qd = q->data().data();
  const double* kd = k->data().data();
  const double* vd = v->data().data();
  for (int i = 0; i < tq; ++i) {
    double* p = probs.data() + static_cast<std::size_t>(i) * tk;
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < tk; ++j) {
      if (!mask(i, j)) continue;
      any = true;
      double s = 0.0;
      for (int c = 0; c < dk; ++c) s += qd[static_cast<std::size_t>(i) * dk + c] * kd[static_cast<std::size_t>(j) * dk + c];
      p[j] = s * scale;
      mx = std::max(mx, p[j]);
    }
    if (!any) throw ShapeError("MaskedAttention: query row " + std::to_string(i) + " is fully masked");
    double z = 0.0;
    for (int j = 0; j < tk; ++j) {
      if (!mask(i, j)) continue;
      p[j] = std::exp(p[j] - mx);
      z += p[j];
    }
    double* o = out.data() + static_cast<std::size_t>(i) * dv;
    for (int j = 0; j < tk; ++j) {
      if (!mask(i, j)) continue;
      p[j] /= z;
      const double w = p[j];
      const double* vj = vd + static_cast<std::size_t>(j) * dv;
      for (int c = 0; c < dv; ++c) o[c] += w * vj[c];
    }
  }
  const int iq = Node(q), ik = Node(k), iv = Node(v);
  const Tensor qv = q.value(), kv = k.value(), vv = v.value();
  return Make(Mat(tq, dv, std::move(out)), CommonTape({&q, &k, &v}),
              [=, probs = std::move(probs)](Span g, Tape& t) {
                // dP = G V^T ; dS = P * (dP - rowdot(dP, P)) ; dQ = dS K s ; dK = dS^T Q s
                Vec ds(static_cast<std::size_t>(tq) * tk, 0.0);
                for (int i = 0; i < tq; ++i) {
                  const double* gi = g.data() + static_cast<std::size_t>(i) * dv;
                  const double* p = probs.data() + static_cast<std::size_t>(i) * tk;
                  double* dsi = ds.data() + static_cast<std::size_t>(i) * tk;
                  double dot = 0.0;
                  for (int j = 0; j < tk; ++j) {
                    if (p[j] == 0.0) continue;
                    const double* vj = vv.data().data() + static_cast<std::size_t>(j) * dv;
                    double dp = 0.0;
                    for (int c = 0; c < dv; ++c) dp += gi[c] * vj[c];
                    dsi[j] = dp;
                    dot += dp * p[j];
                  }
                  for (int j = 0; j < tk; ++j) dsi[j] = p[j] * (dsi[j] - dot) * scale;
                }
                if (iv >= 0) GemmTN(probs.data(), g.data(), t.GradOf(iv).data(), tq, tk, dv);
                if (iq >= 0) GemmNN(ds.data(), kv.data().data(), t.GradOf(iq).data(), tq, tk, dk);
                if (ik >= 0) GemmTN(ds.data(), qv.data().data(), t.GradOf(ik).data(), tq, tk, dk);
              });
}

Var SliceRows(const Var& x, int begin, int end) {
  const int n = x->cols();
  if (begin < 0 || end > x->rows() || begin > end) {
    throw ShapeError("SliceRows [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") of " + ShapeToString(x->shape()));
  }
  const auto d = x->data();
  Vec out(d.begin() + static_cast<std::ptrdiff_t>(begin) * n, d.begin() + static_cast<std::ptrdiff_t>(end) * n);
  const int ix = Node(x);
  return Make(Mat(end - begin, n, std::move(out)), CommonTape({&x}), [=](Span g, Tape& t) {
    auto& gd = t.GradOf(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gd[static_cast<std::size_t>(begin) * n + i] += g[i];
  });
}

Var SliceCols(const Var& x, int begin, int end) {
  const int m = x->rows(), n = x->cols(), w = end - begin;
  if (begin < 0 || end > n || begin > end) {
    throw ShapeError("SliceCols [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") of " + ShapeToString(x->shape()));
  }
  Vec out(static_cast<std::size_t>(m) * w);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j) out[static_cast<std::size_t>(i) * w + j] = x.value()[static_cast<std::size_t>(i) * n + begin + j];
  const int ix = Node(x);
  return Make(Mat(m, w, std::move(out)), CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) d[static_cast<std::size_t>(i) * n + begin + j] += g[static_cast<std::size_t>(i) * w + j];
  });
}

Var ConcatRows(std::span<const Var> parts) {
  S2S_CHECK(!parts.empty(), "ConcatRows of nothing");
  const int n = parts[0]->cols();
  int m = 0;
  Vec out;
  std::vector<int> offsets, nodes;
  for (const Var& p : parts) {
    if (p->cols() != n) throw ShapeError("ConcatRows: column counts differ");
    offsets.push_back(m);
    nodes.push_back(Node(p));
    m += p->rows();
    out.insert(out.end(), p->data().begin(), p->data().end());
  }
  return Make(Mat(m, n, std::move(out)), CommonTape(parts), [=](Span g, Tape& t) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (nodes[k] < 0) continue;
      auto& d = t.GradOf(nodes[k]);
      const std::size_t base = static_cast<std::size_t>(offsets[k]) * n;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[base + i];
    }
  });
}

Var ConcatCols(std::span<const Var> parts) {
  S2S_CHECK(!parts.empty(), "ConcatCols of nothing");
  const int m = parts[0]->rows();
  int n = 0;
  std::vector<int> offsets, widths, nodes;
  for (const Var& p : parts) {
    if (p->rows() != m) throw ShapeError("ConcatCols: row counts differ");
    offsets.push_back(n);
    widths.push_back(p->cols());
    nodes.push_back(Node(p));
    n += p->cols();
  }
  Vec out(static_cast<std::size_t>(m) * n);
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < widths[k]; ++j)
        out[static_cast<std::size_t>(i) * n + offsets[k] + j] = parts[k].value()[static_cast<std::size_t>(i) * widths[k] + j];
  return Make(Mat(m, n, std::move(out)), CommonTape(parts), [=](Span g, Tape& t) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (nodes[k] < 0) continue;
      auto& d = t.GradOf(nodes[k]);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < widths[k]; ++j)
          d[static_cast<std::size_t>(i) * widths[k] + j] += g[static_cast<std::size_t>(i) * n + offsets[k] + j];
    }
  });
}

Var Reshape(const Var& x, int rows, int cols) {
  Tensor y = x.value().Reshaped({rows, cols});
  const int ix = Node(x);
  return Make(y, CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
  });
}

Var RepeatRows(const Var& x, int times) {
  S2S_CHECK(times >= 1, "RepeatRows needs times >= 1");
  const int m = x->rows(), n = x->cols();
  Vec out;
  out.reserve(static_cast<std::size_t>(m) * times * n);
  for (int i = 0; i < m; ++i)
    for (int r = 0; r < times; ++r) out.insert(out.end(), x->row(i).begin(), x->row(i).end());
  const int ix = Node(x);
  return Make(Mat(m * times, n, std::move(out)), CommonTape({&x}), [=](Span g, Tape& t) {
    auto& d = t.GradOf(ix);
    for (int i = 0; i < m; ++i)
      for (int r = 0; r < times; ++r)
        for (int j = 0; j < n; ++j)
          d[static_cast<std::size_t>(i) * n + j] += g[(static_cast<std::size_t>(i) * times + r) * n + j];
  });
}

Var Element(const Var& x, int r, int c) {
  S2S_CHECK(r >= 0 && r < x->rows() && c >= 0 && c < x->cols(), "Element index out of range");
  const int ix = Node(x), n = x->cols();
  return Make(Tensor::Scalar(x->at(r, c)), CommonTape({&x}), [=](Span g, Tape& t) {
    t.GradOf(ix)[static_cast<std::size_t>(r) * n + c] += g[0];
  });
}

Var CrossEntropy(const Var& logits, std::span<const int> targets) {
  const int m = logits->rows(), n = logits->cols();
  if (static_cast<int>(targets.size()) != m) {
    throw ShapeError("CrossEntropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(m) + " rows");
  }
  std::vector<int> tg(targets.begin(), targets.end());
  Vec probs(logits->size());
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    if (tg[i] < 0 || tg[i] >= n) throw ShapeError("CrossEntropy: target outside vocabulary");
    auto row = logits->row(i);
    const double lse = LogSumExp(row);
    loss -= row[tg[i]] - lse;
    for (int j = 0; j < n; ++j) probs[static_cast<std::size_t>(i) * n + j] = std::exp(row[j] - lse);
  }
  loss /= m;
  const int il = Node(logits);
  return Make(Tensor::Scalar(loss), CommonTape({&logits}),
              [=, probs = std::move(probs)](Span g, Tape& t) {
                auto& d = t.GradOf(il);
                const double s = g[0] / m;
                for (int i = 0; i < m; ++i) {
                  for (int j = 0; j < n; ++j) {
                    const std::size_t k = static_cast<std::size_t>(i) * n + j;
                    d[k] += s * (probs[k] - (j == tg[i] ? 1.0 : 0.0));
                  }
                }
              });
}

}  // namespace simuls2s
