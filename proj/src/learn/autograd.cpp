#include "camarm/learn/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "camarm/arm/types.hpp"
#include "camarm/kernels/kernels.hpp"

namespace camarm {

int ParameterSet::add(std::string name, int rows, int cols) {
  if (find(name) >= 0) throw ValidationError("duplicate parameter '" + name + "'");
  params_.push_back(Parameter{std::move(name), Mat(rows, cols), Mat(rows, cols)});
  return static_cast<int>(params_.size()) - 1;
}

int ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
}

Tape::Var Tape::constant(Mat value) { return push(std::move(value), false, nullptr); }

Tape::Var Tape::param(ParameterSet& set, int index) {
  Parameter& p = set[index];
  Var v = push(p.value, true, nullptr);
  nodes_.back().param = &p;
  return v;
}

Mat& Tape::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() != n.value.size() || !n.grad.same_shape(n.value)) n.grad = Mat(n.value.rows, n.value.cols);
  return n.grad;
}

Tape::Var Tape::push(Mat value, bool needs_grad, Backward bw) {
  nodes_.push_back(Node{std::move(value), Mat(), needs_grad, nullptr, std::move(bw)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::backward(Var out) {
  if (value(out).size() != 1) throw ValidationError("backward: output must be 1x1");
  grad(out.id).data[0] = 1.0;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.bw) n.bw(*this, i);
    if (n.param) {
      const auto& g = n.grad.data;
      auto& pg = n.param->grad.data;
      for (std::size_t k = 0; k < g.size(); ++k) pg[k] += g[k];
    }
  }
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(std::string("autograd: shape mismatch in ") + what);
}

bool any_grad(const Tape& t, std::initializer_list<Var> vs) {
  for (Var v : vs)
    if (v.valid() && t.needs_grad(v.id)) return true;
  return false;
}

}  // namespace

Var linear(Tape& t, Var x, Var w, Var b) {
  const Mat& X = t.value(x);
  const Mat& W = t.value(w);
  require(X.cols == W.rows, "linear");
  Mat y(X.rows, W.cols);
  if (b.valid()) {
    const Mat& B = t.value(b);
    require(B.rows == 1 && B.cols == W.cols, "linear bias");
    for (int r = 0; r < y.rows; ++r) std::copy(B.data.begin(), B.data.end(), y.row(r));
  }
  const auto& K = kernels::active();
  K.gemm_nn(X.data.data(), W.data.data(), y.data.data(), X.rows, X.cols, W.cols);
  return t.push(std::move(y), any_grad(t, {x, w, b}), [x, w, b](Tape& t, int self) {
    const auto& K = kernels::active();
    const Mat& dy = t.grad(self);
    const Mat& X = t.value(x);
    const Mat& W = t.value(w);
    if (t.needs_grad(x.id)) K.gemm_nt(dy.data.data(), W.data.data(), t.grad(x.id).data.data(), dy.rows, dy.cols, W.rows);
    if (t.needs_grad(w.id)) K.gemm_tn(X.data.data(), dy.data.data(), t.grad(w.id).data.data(), X.cols, X.rows, dy.cols);
    if (b.valid() && t.needs_grad(b.id)) {
      double* gb = t.grad(b.id).data.data();
      for (int r = 0; r < dy.rows; ++r) K.axpy(1.0, dy.row(r), gb, static_cast<std::size_t>(dy.cols));
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  const Mat& A = t.value(a);
  const Mat& B = t.value(b);
  require(A.same_shape(B), "add");
  Mat y = A;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += B.data[i];
  return t.push(std::move(y), any_grad(t, {a, b}), [a, b](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    for (Var v : {a, b}) {
      if (!t.needs_grad(v.id)) continue;
      Mat& g = t.grad(v.id);
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy.data[i];
    }
  });
}

Var sub(Tape& t, Var a, Var b) {
  const Mat& A = t.value(a);
  const Mat& B = t.value(b);
  require(A.same_shape(B), "sub");
  Mat y = A;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] -= B.data[i];
  return t.push(std::move(y), any_grad(t, {a, b}), [a, b](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    if (t.needs_grad(a.id)) {
      Mat& g = t.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy.data[i];
    }
    if (t.needs_grad(b.id)) {
      Mat& g = t.grad(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] -= dy.data[i];
    }
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Mat& A = t.value(a);
  const Mat& B = t.value(b);
  require(A.same_shape(B), "mul");
  Mat y = A;
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= B.data[i];
  return t.push(std::move(y), any_grad(t, {a, b}), [a, b](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    const Mat& A = t.value(a);
    const Mat& B = t.value(b);
    if (t.needs_grad(a.id)) {
      Mat& g = t.grad(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy.data[i] * B.data[i];
    }
    if (t.needs_grad(b.id)) {
      Mat& g = t.grad(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy.data[i] * A.data[i];
    }
  });
}

Var scale(Tape& t, Var a, double s) {
  Mat y = t.value(a);
  for (double& v : y.data) v *= s;
  return t.push(std::move(y), any_grad(t, {a}), [a, s](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += s * dy.data[i];
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
}

Var gelu(Tape& t, Var a) {
  Mat y = t.value(a);
  for (double& v : y.data) {
    const double x = v;
    v = 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
  }
  return t.push(std::move(y), any_grad(t, {a}), [a](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    const Mat& A = t.value(a);
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = A.data[i];
      const double u = kGeluC * (x + 0.044715 * x * x * x);
      const double th = std::tanh(u);
      const double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
      g.data[i] += dy.data[i] * (0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du);
    }
  });
}

Var exp(Tape& t, Var a) {
  Mat y = t.value(a);
  for (double& v : y.data) v = std::exp(v);
  return t.push(std::move(y), any_grad(t, {a}), [a](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    const Mat& y = t.value(Var{self});
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy.data[i] * y.data[i];
  });
}

Var clamp(Tape& t, Var a, double lo, double hi) {
  Mat y = t.value(a);
  for (double& v : y.data) v = std::clamp(v, lo, hi);
  return t.push(std::move(y), any_grad(t, {a}), [a, lo, hi](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    const Mat& A = t.value(a);
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (A.data[i] > lo && A.data[i] < hi) g.data[i] += dy.data[i];
  });
}

Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps) {
  const Mat& X = t.value(x);
  const Mat& G = t.value(gain);
  const Mat& B = t.value(bias);
  require(G.rows == 1 && G.cols == X.cols && B.same_shape(G), "layer_norm");
  const int n = X.cols;
  Mat y(X.rows, n);
  Mat xhat(X.rows, n);
  std::vector<double> inv_std(static_cast<std::size_t>(X.rows));
  for (int r = 0; r < X.rows; ++r) {
    const double* xr = X.row(r);
    const double mean = std::accumulate(xr, xr + n, 0.0) / n;
    double var = 0.0;
    for (int c = 0; c < n; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = is;
    for (int c = 0; c < n; ++c) {
      xhat(r, c) = (xr[c] - mean) * is;
      y(r, c) = xhat(r, c) * G.data[c] + B.data[c];
    }
  }
  return t.push(std::move(y), any_grad(t, {x, gain, bias}),
                [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, int self) {
                  const Mat& dy = t.grad(self);
                  const Mat& G = t.value(gain);
                  const int n = dy.cols;
                  if (t.needs_grad(gain.id) || t.needs_grad(bias.id)) {
                    Mat& gg = t.grad(gain.id);
                    Mat& gb = t.grad(bias.id);
                    for (int r = 0; r < dy.rows; ++r)
                      for (int c = 0; c < n; ++c) {
                        gg.data[c] += dy(r, c) * xhat(r, c);
                        gb.data[c] += dy(r, c);
                      }
                  }
                  if (!t.needs_grad(x.id)) return;
                  Mat& gx = t.grad(x.id);
                  std::vector<double> dxh(static_cast<std::size_t>(n));
                  for (int r = 0; r < dy.rows; ++r) {
                    double s1 = 0.0, s2 = 0.0;
                    for (int c = 0; c < n; ++c) {
                      dxh[c] = dy(r, c) * G.data[c];
                      s1 += dxh[c];
                      s2 += dxh[c] * xhat(r, c);
                    }
                    const double is = inv_std[static_cast<std::size_t>(r)];
                    for (int c = 0; c < n; ++c) gx(r, c) += is * (dxh[c] - s1 / n - xhat(r, c) * s2 / n);
                  }
                });
}

Var attention(Tape& t, Var q, Var k, Var v, int heads) {
  const Mat& Q = t.value(q);
  const Mat& K = t.value(k);
  const Mat& V = t.value(v);
  require(Q.cols == K.cols && K.same_shape(V) && heads > 0 && Q.cols % heads == 0, "attention");
  const int n = Q.rows, m = K.rows, d = Q.cols, dh = d / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  // P holds the softmax weights per head: heads blocks of [n x m].
  Mat P(heads * n, m);
  Mat y(n, d);
  for (int h = 0; h < heads; ++h) {
    const int off = h * dh;
    for (int i = 0; i < n; ++i) {
      double* p = P.row(h * n + i);
      double mx = -1e300;
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int c = 0; c < dh; ++c) s += Q(i, off + c) * K(j, off + c);
        p[j] = s * sc;
        mx = std::max(mx, p[j]);
      }
      double z = 0.0;
      for (int j = 0; j < m; ++j) z += (p[j] = std::exp(p[j] - mx));
      for (int j = 0; j < m; ++j) p[j] /= z;
      for (int j = 0; j < m; ++j)
        for (int c = 0; c < dh; ++c) y(i, off + c) += p[j] * V(j, off + c);
    }
  }
  return t.push(std::move(y), any_grad(t, {q, k, v}), [q, k, v, heads, P = std::move(P)](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    const Mat& Q = t.value(q);
    const Mat& K = t.value(k);
    const Mat& V = t.value(v);
    const int n = Q.rows, m = K.rows, d = Q.cols, dh = d / heads;
    const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
    Mat& gq = t.grad(q.id);
    Mat& gk = t.grad(k.id);
    Mat& gv = t.grad(v.id);
    std::vector<double> dp(static_cast<std::size_t>(m));
    for (int h = 0; h < heads; ++h) {
      const int off = h * dh;
      for (int i = 0; i < n; ++i) {
        const double* p = P.row(h * n + i);
        double dot = 0.0;
        for (int j = 0; j < m; ++j) {
          double s = 0.0;
          for (int c = 0; c < dh; ++c) {
            s += dy(i, off + c) * V(j, off + c);
            gv(j, off + c) += p[j] * dy(i, off + c);
          }
          dp[j] = s;
          dot += s * p[j];
        }
        for (int j = 0; j < m; ++j) {
          const double ds = p[j] * (dp[j] - dot) * sc;
          if (ds == 0.0) continue;
          for (int c = 0; c < dh; ++c) {
            gq(i, off + c) += ds * K(j, off + c);
            gk(j, off + c) += ds * Q(i, off + c);
          }
        }
      }
    }
  });
}

Var concat_rows(Tape& t, const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows");
  const int cols = t.value(parts[0]).cols;
  int rows = 0;
  bool ng = false;
  for (Var p : parts) {
    require(t.value(p).cols == cols, "concat_rows");
    rows += t.value(p).rows;
    ng = ng || t.needs_grad(p.id);
  }
  Mat y(rows, cols);
  std::size_t at = 0;
  for (Var p : parts) {
    const Mat& m = t.value(p);
    std::copy(m.data.begin(), m.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(at));
    at += m.size();
  }
  return t.push(std::move(y), ng, [parts](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    std::size_t at = 0;
    for (Var p : parts) {
      const std::size_t sz = t.value(p).size();
      if (t.needs_grad(p.id)) {
        Mat& g = t.grad(p.id);
        for (std::size_t i = 0; i < sz; ++i) g.data[i] += dy.data[at + i];
      }
      at += sz;
    }
  });
}

Var slice_rows(Tape& t, Var a, int first, int count) {
  const Mat& A = t.value(a);
  require(first >= 0 && count > 0 && first + count <= A.rows, "slice_rows");
  Mat y(count, A.cols);
  std::copy(A.row(first), A.row(first) + static_cast<std::ptrdiff_t>(y.size()), y.data.begin());
  return t.push(std::move(y), any_grad(t, {a}), [a, first](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    double* g = t.grad(a.id).row(first);
    for (std::size_t i = 0; i < dy.size(); ++i) g[i] += dy.data[i];
  });
}

Var reshape(Tape& t, Var a, int rows, int cols) {
  Mat y = t.value(a);
  require(static_cast<std::size_t>(rows) * cols == y.size(), "reshape");
  y.rows = rows;
  y.cols = cols;
  return t.push(std::move(y), any_grad(t, {a}), [a](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy.data[i];
  });
}

Var cumsum_rows(Tape& t, Var a) {
  Mat y = t.value(a);
  for (int r = 1; r < y.rows; ++r)
    for (int c = 0; c < y.cols; ++c) y(r, c) += y(r - 1, c);
  return t.push(std::move(y), any_grad(t, {a}), [a](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    Mat& g = t.grad(a.id);
    for (int c = 0; c < dy.cols; ++c) {
      double acc = 0.0;
      for (int r = dy.rows - 1; r >= 0; --r) {
        acc += dy(r, c);
        g(r, c) += acc;
      }
    }
  });
}

Var add_row_const(Tape& t, Var a, const std::vector<double>& r) {
  Mat y = t.value(a);
  require(static_cast<int>(r.size()) == y.cols, "add_row_const");
  for (int i = 0; i < y.rows; ++i)
    for (int c = 0; c < y.cols; ++c) y(i, c) += r[static_cast<std::size_t>(c)];
  return t.push(std::move(y), any_grad(t, {a}), [a](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy.data[i];
  });
}

Var scale_cols_const(Tape& t, Var a, const std::vector<double>& s) {
  Mat y = t.value(a);
  require(static_cast<int>(s.size()) == y.cols, "scale_cols_const");
  for (int i = 0; i < y.rows; ++i)
    for (int c = 0; c < y.cols; ++c) y(i, c) *= s[static_cast<std::size_t>(c)];
  return t.push(std::move(y), any_grad(t, {a}), [a, s](Tape& t, int self) {
    const Mat& dy = t.grad(self);
    Mat& g = t.grad(a.id);
    for (int i = 0; i < dy.rows; ++i)
      for (int c = 0; c < dy.cols; ++c) g(i, c) += dy(i, c) * s[static_cast<std::size_t>(c)];
  });
}

Var sum_sq_diff(Tape& t, Var a, const Mat& target) {
  const Mat& A = t.value(a);
  require(A.same_shape(target), "sum_sq_diff");
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += (A.data[i] - target.data[i]) * (A.data[i] - target.data[i]);
  return t.push(Mat(1, 1, s), any_grad(t, {a}), [a, target](Tape& t, int self) {
    const double dy = t.grad(self).data[0];
    const Mat& A = t.value(a);
    Mat& g = t.grad(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += 2.0 * dy * (A.data[i] - target.data[i]);
  });
}

Var row_diff_l1(Tape& t, Var a) {
  const Mat& A = t.value(a);
  double s = 0.0;
  for (int r = 1; r < A.rows; ++r)
    for (int c = 0; c < A.cols; ++c) s += std::abs(A(r, c) - A(r - 1, c));
  return t.push(Mat(1, 1, s), any_grad(t, {a}), [a](Tape& t, int self) {
    const double dy = t.grad(self).data[0];
    const Mat& A = t.value(a);
    Mat& g = t.grad(a.id);
    for (int r = 1; r < A.rows; ++r)
      for (int c = 0; c < A.cols; ++c) {
        const double d = A(r, c) - A(r - 1, c);
        const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        g(r, c) += dy * sg;
        g(r - 1, c) -= dy * sg;
      }
  });
}

Var gaussian_kl(Tape& t, Var mu, Var logvar) {
  const Mat& M = t.value(mu);
  const Mat& L = t.value(logvar);
  require(M.same_shape(L), "gaussian_kl");
  double s = 0.0;
  for (std::size_t i = 0; i < M.size(); ++i) s += std::exp(L.data[i]) + M.data[i] * M.data[i] - 1.0 - L.data[i];
  return t.push(Mat(1, 1, 0.5 * s), any_grad(t, {mu, logvar}), [mu, logvar](Tape& t, int self) {
    const double dy = t.grad(self).data[0];
    const Mat& M = t.value(mu);
    const Mat& L = t.value(logvar);
    if (t.needs_grad(mu.id)) {
      Mat& g = t.grad(mu.id);
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy * M.data[i];
    }
    if (t.needs_grad(logvar.id)) {
      Mat& g = t.grad(logvar.id);
      for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += dy * 0.5 * (std::exp(L.data[i]) - 1.0);
    }
  });
}

Var add_scalars(Tape& t, const std::vector<Var>& parts) {
  double s = 0.0;
  bool ng = false;
  for (Var p : parts) {
    require(t.value(p).size() == 1, "add_scalars");
    s += t.value(p).data[0];
    ng = ng || t.needs_grad(p.id);
  }
  return t.push(Mat(1, 1, s), ng, [parts](Tape& t, int self) {
    const double dy = t.grad(self).data[0];
    for (Var p : parts)
      if (t.needs_grad(p.id)) t.grad(p.id).data[0] += dy;
  });
}

}  // namespace camarm
