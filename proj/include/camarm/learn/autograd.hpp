#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace camarm {

// Dense row-major double matrix.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
};

// Named learnable tensors in a fixed order. Indices are stable once added.
class ParameterSet {
 public:
  int add(std::string name, int rows, int cols);
  Parameter& operator[](int i) { return params_[static_cast<std::size_t>(i)]; }
  const Parameter& operator[](int i) const { return params_[static_cast<std::size_t>(i)]; }
  int find(const std::string& name) const;  // -1 if absent
  int size() const { return static_cast<int>(params_.size()); }
  std::size_t scalar_count() const;
  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<Parameter> params_;
};

// Reverse-mode tape. Every op appends a node; backward() walks the nodes in
// reverse and accumulates parameter gradients into Parameter::grad.
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };
  using Backward = std::function<void(Tape&, int self)>;

  Var constant(Mat value);
  Var param(ParameterSet& set, int index);

  const Mat& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  Mat& value_mut(int id) { return nodes_[static_cast<std::size_t>(id)].value; }
  Mat& grad(int id);
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  Var push(Mat value, bool needs_grad, Backward bw);

  // Seeds d(out)/d(out) = 1 for a 1x1 output.
  void backward(Var out);
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    Parameter* param = nullptr;
    Backward bw;
  };
  std::vector<Node> nodes_;
};

using Var = Tape::Var;

// x [n x in] * W [in x out] + b [1 x out]; b may be invalid.
Var linear(Tape& t, Var x, Var w, Var b);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var gelu(Tape& t, Var a);
Var exp(Tape& t, Var a);
// Gradient passes only where lo < a < hi.
Var clamp(Tape& t, Var a, double lo, double hi);
// Row-wise normalization with gain/bias of shape [1 x cols].
Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps = 1e-5);
// Multi-head scaled dot-product attention over already projected q [n x d],
// k [m x d], v [m x d]; heads split the columns.
Var attention(Tape& t, Var q, Var k, Var v, int heads);
Var concat_rows(Tape& t, const std::vector<Var>& parts);
Var slice_rows(Tape& t, Var a, int first, int count);
Var reshape(Tape& t, Var a, int rows, int cols);
// Running sum down the rows: out_i = sum_{j<=i} a_j.
Var cumsum_rows(Tape& t, Var a);
// Adds the constant row vector r [1 x cols] to every row.
Var add_row_const(Tape& t, Var a, const std::vector<double>& r);
// Scales column j of every row by s[j].
Var scale_cols_const(Tape& t, Var a, const std::vector<double>& s);

// Scalar (1x1) reductions.
Var sum_sq_diff(Tape& t, Var a, const Mat& target);  // sum (a - target)^2
Var row_diff_l1(Tape& t, Var a);                     // sum_i sum_j |a_ij - a_(i-1)j|
Var gaussian_kl(Tape& t, Var mu, Var logvar);        // KL(N(mu, e^logvar) || N(0, I))
Var add_scalars(Tape& t, const std::vector<Var>& parts);

}  // namespace camarm
