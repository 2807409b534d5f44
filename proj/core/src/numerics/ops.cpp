/**
 * Copyright 2026 The spokendial Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spokendial/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace spokendial::numerics {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;

template <typename T>
ConstMap<T> View(const Tensor<T>& t) {
  return ConstMap<T>(t.data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

template <typename T>
MutMap<T> View(Tensor<T>& t) {
  return MutMap<T>(t.data(), static_cast<Eigen::Index>(t.rows()),
                   static_cast<Eigen::Index>(t.cols()));
}

template <typename T>
void RequireRank2(std::string_view op, const Var<T>& a) {
  if (!a.defined()) throw ShapeError(std::string(op) + ": undefined operand");
  if (a.value().rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a rank-2 operand, got " +
                     ShapeToString(a.shape()));
  }
}

template <typename T>
void RequireSameShape(std::string_view op, const Var<T>& a, const Var<T>& b) {
  RequireRank2(op, a);
  RequireRank2(op, b);
  if (a.shape() != b.shape()) ThrowShapeMismatch(op, a.shape(), b.shape());
}

template <typename T>
bool Wants(const std::shared_ptr<Node<T>>& n) {
  return n->requires_grad;
}

template <typename T>
T GeluValue(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
}

template <typename T>
T GeluDerivative(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
  const T pdf = std::exp(T(-0.5) * x * x) * std::numbers::inv_sqrtpi_v<T> /
                std::numbers::sqrt2_v<T>;
  return cdf + x * pdf;
}

}  // namespace

std::size_t Conv1dOutputLength(std::size_t length, const Conv1dOptions& opts) {
  if (opts.kernel == 0 || opts.stride == 0) {
    throw ShapeError("Conv1d: kernel and stride must be positive");
  }
  if (opts.padding == Padding::kSame) {
    return (length + opts.stride - 1) / opts.stride;
  }
  if (length < opts.kernel) {
    std::ostringstream os;
    os << "Conv1d: input length " << length
       << " is shorter than the kernel; minimum length is " << opts.kernel;
    throw ShapeError(os.str());
  }
  return (length - opts.kernel) / opts.stride + 1;
}

template <typename T>
Var<T> MatMul(const Var<T>& a, const Var<T>& b) {
  RequireRank2("MatMul", a);
  RequireRank2("MatMul", b);
  if (a.cols() != b.rows()) ThrowShapeMismatch("MatMul", a.shape(), b.shape());
  Tensor<T> out = Tensor<T>::Zeros(a.rows(), b.cols());
  View(out).noalias() = View(a.value()) * View(b.value());
  return MakeResult<T>("MatMul", std::move(out), {a, b}, [](Node<T>& self) {
    auto& na = self.inputs[0];
    auto& nb = self.inputs[1];
    auto dy = View(static_cast<const Tensor<T>&>(self.grad));
    if (Wants(na)) {
      View(na->GradBuffer()).noalias() += dy * View(nb->value).transpose();
    }
    if (Wants(nb)) {
      View(nb->GradBuffer()).noalias() += View(na->value).transpose() * dy;
    }
  });
}

template <typename T>
Var<T> MatMulNT(const Var<T>& a, const Var<T>& b) {
  RequireRank2("MatMulNT", a);
  RequireRank2("MatMulNT", b);
  if (a.cols() != b.cols()) {
    ThrowShapeMismatch("MatMulNT", a.shape(), b.shape());
  }
  Tensor<T> out = Tensor<T>::Zeros(a.rows(), b.rows());
  View(out).noalias() = View(a.value()) * View(b.value()).transpose();
  return MakeResult<T>("MatMulNT", std::move(out), {a, b}, [](Node<T>& self) {
    auto& na = self.inputs[0];
    auto& nb = self.inputs[1];
    auto dy = View(static_cast<const Tensor<T>&>(self.grad));
    if (Wants(na)) View(na->GradBuffer()).noalias() += dy * View(nb->value);
    if (Wants(nb)) {
      View(nb->GradBuffer()).noalias() += dy.transpose() * View(na->value);
    }
  });
}

template <typename T>
Var<T> Transpose(const Var<T>& a) {
  RequireRank2("Transpose", a);
  Tensor<T> out = Tensor<T>::Zeros(a.cols(), a.rows());
  View(out) = View(a.value()).transpose();
  return MakeResult<T>("Transpose", std::move(out), {a}, [](Node<T>& self) {
    View(self.inputs[0]->GradBuffer()) +=
        View(static_cast<const Tensor<T>&>(self.grad)).transpose();
  });
}

template <typename T>
Var<T> Add(const Var<T>& a, const Var<T>& b) {
  RequireSameShape("Add", a, b);
  Tensor<T> out = a.value();
  View(out) += View(b.value());
  return MakeResult<T>("Add", std::move(out), {a, b}, [](Node<T>& self) {
    for (auto& in : self.inputs) {
      if (Wants(in)) in->Accumulate(self.grad);
    }
  });
}

template <typename T>
Var<T> Sub(const Var<T>& a, const Var<T>& b) {
  RequireSameShape("Sub", a, b);
  Tensor<T> out = a.value();
  View(out) -= View(b.value());
  return MakeResult<T>("Sub", std::move(out), {a, b}, [](Node<T>& self) {
    if (Wants(self.inputs[0])) self.inputs[0]->Accumulate(self.grad);
    if (Wants(self.inputs[1])) {
      View(self.inputs[1]->GradBuffer()) -=
          View(static_cast<const Tensor<T>&>(self.grad));
    }
  });
}

template <typename T>
Var<T> Mul(const Var<T>& a, const Var<T>& b) {
  RequireSameShape("Mul", a, b);
  Tensor<T> out = a.value();
  View(out).array() *= View(b.value()).array();
  return MakeResult<T>("Mul", std::move(out), {a, b}, [](Node<T>& self) {
    auto& na = self.inputs[0];
    auto& nb = self.inputs[1];
    auto dy = View(static_cast<const Tensor<T>&>(self.grad)).array();
    if (Wants(na)) View(na->GradBuffer()).array() += dy * View(nb->value).array();
    if (Wants(nb)) View(nb->GradBuffer()).array() += dy * View(na->value).array();
  });
}

template <typename T>
Var<T> Scale(const Var<T>& a, T factor) {
  RequireRank2("Scale", a);
  Tensor<T> out = a.value();
  View(out) *= factor;
  return MakeResult<T>("Scale", std::move(out), {a}, [factor](Node<T>& self) {
    View(self.inputs[0]->GradBuffer()) +=
        factor * View(static_cast<const Tensor<T>&>(self.grad));
  });
}

template <typename T>
Var<T> AddRow(const Var<T>& a, const Var<T>& row) {
  RequireRank2("AddRow", a);
  RequireRank2("AddRow", row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    ThrowShapeMismatch("AddRow", a.shape(), row.shape());
  }
  Tensor<T> out = a.value();
  View(out).rowwise() += View(row.value()).row(0);
  return MakeResult<T>("AddRow", std::move(out), {a, row}, [](Node<T>& self) {
    if (Wants(self.inputs[0])) self.inputs[0]->Accumulate(self.grad);
    if (Wants(self.inputs[1])) {
      View(self.inputs[1]->GradBuffer()) +=
          View(static_cast<const Tensor<T>&>(self.grad)).colwise().sum();
    }
  });
}

template <typename T>
Var<T> ScaleRows(const Var<T>& a, std::span<const T> factors) {
  RequireRank2("ScaleRows", a);
  if (factors.size() != a.rows()) {
    ThrowShapeMismatch("ScaleRows", a.shape(), Shape{factors.size()});
  }
  std::vector<T> f(factors.begin(), factors.end());
  Tensor<T> out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (auto& v : out.row(r)) v *= f[r];
  }
  return MakeResult<T>("ScaleRows", std::move(out), {a},
                       [f = std::move(f)](Node<T>& self) {
                         auto& g = self.inputs[0]->GradBuffer();
                         for (std::size_t r = 0; r < g.rows(); ++r) {
                           auto dst = g.row(r);
                           auto src = self.grad.row(r);
                           for (std::size_t c = 0; c < dst.size(); ++c) {
                             dst[c] += f[r] * src[c];
                           }
                         }
                       });
}

template <typename T>
Var<T> Gelu(const Var<T>& a) {
  RequireRank2("Gelu", a);
  Tensor<T> out = a.value();
  for (auto& v : out.values()) v = GeluValue(v);
  return MakeResult<T>("Gelu", std::move(out), {a}, [](Node<T>& self) {
    auto& in = self.inputs[0];
    auto& g = in->GradBuffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * GeluDerivative(in->value[i]);
    }
  });
}

template <typename T>
Var<T> SoftmaxRows(const Var<T>& a, std::span<const std::uint8_t> key_valid) {
  RequireRank2("SoftmaxRows", a);
  const std::size_t n = a.cols();
  if (!key_valid.empty() && key_valid.size() != n) {
    ThrowShapeMismatch("SoftmaxRows", a.shape(), Shape{key_valid.size()});
  }
  if (!key_valid.empty() &&
      std::none_of(key_valid.begin(), key_valid.end(), [](std::uint8_t v) { return v != 0; })) {
    throw ShapeError("SoftmaxRows: every column is masked");
  }
  Tensor<T> out(a.shape());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto x = a.value().row(r);
    auto y = out.row(r);
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      if (key_valid.empty() || key_valid[c]) mx = std::max(mx, x[c]);
    }
    T total = 0;
    for (std::size_t c = 0; c < n; ++c) {
      y[c] = (key_valid.empty() || key_valid[c]) ? std::exp(x[c] - mx) : T(0);
      total += y[c];
    }
    for (auto& v : y) v /= total;
  }
  return MakeResult<T>("SoftmaxRows", out, {a}, [out](Node<T>& self) {
    auto& g = self.inputs[0]->GradBuffer();
    for (std::size_t r = 0; r < out.rows(); ++r) {
      auto y = out.row(r);
      auto dy = self.grad.row(r);
      T dot = 0;
      for (std::size_t c = 0; c < y.size(); ++c) dot += dy[c] * y[c];
      auto dx = g.row(r);
      for (std::size_t c = 0; c < y.size(); ++c) dx[c] += y[c] * (dy[c] - dot);
    }
  });
}

template <typename T>
Var<T> LayerNorm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                 T eps) {
  RequireRank2("LayerNorm", x);
  RequireSameShape("LayerNorm", gamma, beta);
  if (gamma.rows() != 1 || gamma.cols() != x.cols()) {
    ThrowShapeMismatch("LayerNorm", x.shape(), gamma.shape());
  }
  const std::size_t n = x.cols();
  Tensor<T> normalized(x.shape());
  std::vector<T> rstd(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.value().row(r);
    T mean = 0;
    for (auto v : in) mean += v;
    mean /= T(n);
    T var = 0;
    for (auto v : in) var += (v - mean) * (v - mean);
    var /= T(n);
    rstd[r] = T(1) / std::sqrt(var + eps);
    auto xh = normalized.row(r);
    for (std::size_t c = 0; c < n; ++c) xh[c] = (in[c] - mean) * rstd[r];
  }
  Tensor<T> out = normalized;
  View(out).array().rowwise() *= View(gamma.value()).array().row(0);
  View(out).rowwise() += View(beta.value()).row(0);
  return MakeResult<T>(
      "LayerNorm", std::move(out), {x, gamma, beta},
      [normalized = std::move(normalized), rstd = std::move(rstd)](Node<T>& self) {
        auto& nx = self.inputs[0];
        auto& ng = self.inputs[1];
        auto& nb = self.inputs[2];
        const auto& dy = self.grad;
        const std::size_t n = dy.cols();
        if (Wants(nb)) View(nb->GradBuffer()) += View(dy).colwise().sum();
        if (Wants(ng)) {
          View(ng->GradBuffer()) +=
              (View(dy).array() * View(normalized).array()).matrix().colwise().sum();
        }
        if (!Wants(nx)) return;
        auto& gx = nx->GradBuffer();
        std::vector<T> dxhat(n);
        for (std::size_t r = 0; r < dy.rows(); ++r) {
          auto d = dy.row(r);
          auto xh = normalized.row(r);
          T mean_d = 0, mean_dx = 0;
          for (std::size_t c = 0; c < n; ++c) {
            dxhat[c] = d[c] * ng->value[c];
            mean_d += dxhat[c];
            mean_dx += dxhat[c] * xh[c];
          }
          mean_d /= T(n);
          mean_dx /= T(n);
          auto out_row = gx.row(r);
          for (std::size_t c = 0; c < n; ++c) {
            out_row[c] += rstd[r] * (dxhat[c] - mean_d - xh[c] * mean_dx);
          }
        }
      });
}

template <typename T>
Var<T> Conv1d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias,
              const Conv1dOptions& opts) {
  RequireRank2("Conv1d", x);
  RequireRank2("Conv1d", weight);
  RequireRank2("Conv1d", bias);
  const std::size_t length = x.rows();
  const std::size_t cin = x.cols();
  const std::size_t cout = weight.rows();
  const std::size_t k = opts.kernel;
  if (opts.groups == 0 || cin % opts.groups != 0 || cout % opts.groups != 0) {
    throw ShapeError("Conv1d: channels " + std::to_string(cin) + " -> " +
                     std::to_string(cout) + " are not divisible by groups " +
                     std::to_string(opts.groups));
  }
  const std::size_t cin_g = cin / opts.groups;
  const std::size_t cout_g = cout / opts.groups;
  if (weight.cols() != cin_g * k) {
    ThrowShapeMismatch("Conv1d weight", weight.shape(), Shape{cout, cin_g * k});
  }
  if (bias.rows() != 1 || bias.cols() != cout) {
    ThrowShapeMismatch("Conv1d bias", bias.shape(), Shape{1, cout});
  }
  const std::size_t out_len = Conv1dOutputLength(length, opts);
  std::ptrdiff_t pad_left = 0;
  if (opts.padding == Padding::kSame) {
    const std::ptrdiff_t total =
        std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>((out_len - 1) * opts.stride + k) -
                                        static_cast<std::ptrdiff_t>(length));
    pad_left = total / 2;
  }

  Tensor<T> out = Tensor<T>::Zeros(out_len, cout);
  const auto& xv = x.value();
  const auto& wv = weight.value();
  const auto& bv = bias.value();
  for (std::size_t t = 0; t < out_len; ++t) {
    const std::ptrdiff_t origin = static_cast<std::ptrdiff_t>(t * opts.stride) - pad_left;
    for (std::size_t co = 0; co < cout; ++co) {
      const std::size_t g = co / cout_g;
      T acc = bv[co];
      const T* w = wv.data() + co * cin_g * k;
      for (std::size_t cl = 0; cl < cin_g; ++cl) {
        const std::size_t ci = g * cin_g + cl;
        for (std::size_t kk = 0; kk < k; ++kk) {
          const std::ptrdiff_t pos = origin + static_cast<std::ptrdiff_t>(kk);
          if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(length)) continue;
          acc += w[cl * k + kk] * xv(static_cast<std::size_t>(pos), ci);
        }
      }
      out(t, co) = acc;
    }
  }
  return MakeResult<T>(
      "Conv1d", std::move(out), {x, weight, bias},
      [opts, pad_left, cin_g, cout_g](Node<T>& self) {
        auto& nx = self.inputs[0];
        auto& nw = self.inputs[1];
        auto& nb = self.inputs[2];
        const auto& dy = self.grad;
        const std::size_t k = opts.kernel;
        const std::size_t length = nx->value.rows();
        if (Wants(nb)) View(nb->GradBuffer()) += View(dy).colwise().sum();
        const bool want_x = Wants(nx);
        const bool want_w = Wants(nw);
        if (!want_x && !want_w) return;
        Tensor<T>* gx = want_x ? &nx->GradBuffer() : nullptr;
        Tensor<T>* gw = want_w ? &nw->GradBuffer() : nullptr;
        for (std::size_t t = 0; t < dy.rows(); ++t) {
          const std::ptrdiff_t origin =
              static_cast<std::ptrdiff_t>(t * opts.stride) - pad_left;
          for (std::size_t co = 0; co < dy.cols(); ++co) {
            const T d = dy(t, co);
            if (d == T(0)) continue;
            const std::size_t g = co / cout_g;
            const T* w = nw->value.data() + co * cin_g * k;
            for (std::size_t cl = 0; cl < cin_g; ++cl) {
              const std::size_t ci = g * cin_g + cl;
              for (std::size_t kk = 0; kk < k; ++kk) {
                const std::ptrdiff_t pos = origin + static_cast<std::ptrdiff_t>(kk);
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(length)) continue;
                const auto p = static_cast<std::size_t>(pos);
                if (gx) (*gx)(p, ci) += d * w[cl * k + kk];
                if (gw) (*gw)(co, cl * k + kk) += d * nx->value(p, ci);
              }
            }
          }
        }
      });
}

template <typename T>
Var<T> GatherRows(const Var<T>& table, std::span<const std::size_t> indices) {
  RequireRank2("GatherRows", table);
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  Tensor<T> out = Tensor<T>::Zeros(idx.size(), table.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= table.rows()) {
      throw ShapeError("GatherRows: index " + std::to_string(idx[r]) +
                       " out of range for table " + ShapeToString(table.shape()));
    }
    std::copy_n(table.value().row(idx[r]).data(), table.cols(), out.row(r).data());
  }
  return MakeResult<T>("GatherRows", std::move(out), {table},
                       [idx = std::move(idx)](Node<T>& self) {
                         auto& g = self.inputs[0]->GradBuffer();
                         for (std::size_t r = 0; r < idx.size(); ++r) {
                           auto dst = g.row(idx[r]);
                           auto src = self.grad.row(r);
                           for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                         }
                       });
}

template <typename T>
Var<T> ConcatRows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("ConcatRows: no operands");
  std::size_t rows = 0;
  for (const auto& p : parts) {
    RequireRank2("ConcatRows", p);
    if (p.cols() != parts[0].cols()) {
      ThrowShapeMismatch("ConcatRows", parts[0].shape(), p.shape());
    }
    rows += p.rows();
  }
  Tensor<T> out = Tensor<T>::Zeros(rows, parts[0].cols());
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    std::copy(p.value().values().begin(), p.value().values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(at * out.cols()));
    at += p.rows();
  }
  return MakeResult<T>(
      "ConcatRows", std::move(out), std::vector<Var<T>>(parts.begin(), parts.end()),
      [offsets = std::move(offsets)](Node<T>& self) {
        const std::size_t cols = self.grad.cols();
        for (std::size_t i = 0; i < self.inputs.size(); ++i) {
          auto& in = self.inputs[i];
          if (!Wants(in)) continue;
          auto& g = in->GradBuffer();
          const T* src = self.grad.data() + offsets[i] * cols;
          for (std::size_t j = 0; j < g.size(); ++j) g[j] += src[j];
        }
      });
}

template <typename T>
Var<T> ConcatCols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("ConcatCols: no operands");
  std::size_t cols = 0;
  for (const auto& p : parts) {
    RequireRank2("ConcatCols", p);
    if (p.rows() != parts[0].rows()) {
      ThrowShapeMismatch("ConcatCols", parts[0].shape(), p.shape());
    }
    cols += p.cols();
  }
  Tensor<T> out = Tensor<T>::Zeros(parts[0].rows(), cols);
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    View(out).middleCols(static_cast<Eigen::Index>(at),
                         static_cast<Eigen::Index>(p.cols())) = View(p.value());
    at += p.cols();
  }
  return MakeResult<T>(
      "ConcatCols", std::move(out), std::vector<Var<T>>(parts.begin(), parts.end()),
      [offsets = std::move(offsets)](Node<T>& self) {
        for (std::size_t i = 0; i < self.inputs.size(); ++i) {
          auto& in = self.inputs[i];
          if (!Wants(in)) continue;
          auto& g = in->GradBuffer();
          View(g) += View(static_cast<const Tensor<T>&>(self.grad))
                         .middleCols(static_cast<Eigen::Index>(offsets[i]),
                                     static_cast<Eigen::Index>(g.cols()));
        }
      });
}

template <typename T>
Var<T> SliceRows(const Var<T>& a, std::size_t begin, std::size_t end) {
  RequireRank2("SliceRows", a);
  if (begin > end || end > a.rows()) {
    throw ShapeError("SliceRows: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") outside " + ShapeToString(a.shape()));
  }
  Tensor<T> out = Tensor<T>::Zeros(end - begin, a.cols());
  std::copy_n(a.value().data() + begin * a.cols(), out.size(), out.data());
  return MakeResult<T>("SliceRows", std::move(out), {a}, [begin](Node<T>& self) {
    auto& g = self.inputs[0]->GradBuffer();
    T* dst = g.data() + begin * g.cols();
    for (std::size_t j = 0; j < self.grad.size(); ++j) dst[j] += self.grad[j];
  });
}

template <typename T>
Var<T> SliceCols(const Var<T>& a, std::size_t begin, std::size_t end) {
  RequireRank2("SliceCols", a);
  if (begin > end || end > a.cols()) {
    throw ShapeError("SliceCols: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") outside " + ShapeToString(a.shape()));
  }
  Tensor<T> out = Tensor<T>::Zeros(a.rows(), end - begin);
  View(out) = View(a.value()).middleCols(static_cast<Eigen::Index>(begin),
                                         static_cast<Eigen::Index>(end - begin));
  return MakeResult<T>("SliceCols", std::move(out), {a}, [begin](Node<T>& self) {
    auto& g = self.inputs[0]->GradBuffer();
    View(g).middleCols(static_cast<Eigen::Index>(begin),
                       static_cast<Eigen::Index>(self.grad.cols())) +=
        View(static_cast<const Tensor<T>&>(self.grad));
  });
}

template <typename T>
Var<T> Sum(const Var<T>& a) {
  RequireRank2("Sum", a);
  T total = 0;
  for (auto v : a.value().values()) total += v;
  return MakeResult<T>("Sum", Tensor<T>::Scalar(total), {a}, [](Node<T>& self) {
    auto& g = self.inputs[0]->GradBuffer();
    const T d = self.grad[0];
    for (auto& v : g.values()) v += d;
  });
}

template <typename T>
Var<T> Mean(const Var<T>& a) {
  RequireRank2("Mean", a);
  if (a.value().empty()) throw ShapeError("Mean: empty operand");
  return Scale(Sum(a), T(1) / static_cast<T>(a.value().size()));
}

template <typename T>
Var<T> CrossEntropy(const Var<T>& logits, std::span<const std::size_t> targets) {
  RequireRank2("CrossEntropy", logits);
  if (targets.size() != logits.rows() || targets.empty()) {
    ThrowShapeMismatch("CrossEntropy", logits.shape(), Shape{targets.size()});
  }
  const std::size_t n = logits.rows();
  const std::size_t c = logits.cols();
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  Tensor<T> probs(logits.shape());
  T loss = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (tgt[r] >= c) {
      throw ShapeError("CrossEntropy: target " + std::to_string(tgt[r]) +
                       " out of range for " + std::to_string(c) + " classes");
    }
    auto x = logits.value().row(r);
    const T mx = *std::max_element(x.begin(), x.end());
    T total = 0;
    for (std::size_t j = 0; j < c; ++j) {
      probs(r, j) = std::exp(x[j] - mx);
      total += probs(r, j);
    }
    for (std::size_t j = 0; j < c; ++j) probs(r, j) /= total;
    loss += std::log(total) + mx - x[tgt[r]];
  }
  loss /= T(n);
  return MakeResult<T>(
      "CrossEntropy", Tensor<T>::Scalar(loss), {logits},
      [probs = std::move(probs), tgt = std::move(tgt)](Node<T>& self) {
        auto& g = self.inputs[0]->GradBuffer();
        const T d = self.grad[0] / T(probs.rows());
        for (std::size_t r = 0; r < probs.rows(); ++r) {
          for (std::size_t j = 0; j < probs.cols(); ++j) {
            g(r, j) += d * (probs(r, j) - (j == tgt[r] ? T(1) : T(0)));
          }
        }
      });
}

template <typename T>
Var<T> MeanSquaredError(const Var<T>& prediction, const Var<T>& target) {
  RequireSameShape("MeanSquaredError", prediction, target);
  if (prediction.value().empty()) throw ShapeError("MeanSquaredError: empty operand");
  auto diff = Sub(prediction, target);
  return Mean(Mul(diff, diff));
}

template <typename T>
Var<T> MeanAbsoluteError(const Var<T>& prediction, const Var<T>& target) {
  RequireSameShape("MeanAbsoluteError", prediction, target);
  const std::size_t n = prediction.value().size();
  if (n == 0) throw ShapeError("MeanAbsoluteError: empty operand");
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::abs(prediction.value()[i] - target.value()[i]);
  }
  return MakeResult<T>(
      "MeanAbsoluteError", Tensor<T>::Scalar(total / T(n)), {prediction, target},
      [](Node<T>& self) {
        auto& np = self.inputs[0];
        auto& nt = self.inputs[1];
        const std::size_t n = np->value.size();
        const T d = self.grad[0] / T(n);
        for (std::size_t i = 0; i < n; ++i) {
          const T diff = np->value[i] - nt->value[i];
          const T s = diff > 0 ? T(1) : (diff < 0 ? T(-1) : T(0));
          if (Wants(np)) np->GradBuffer()[i] += d * s;
          if (Wants(nt)) nt->GradBuffer()[i] -= d * s;
        }
      });
}

template <typename T>
Var<T> Detach(const Var<T>& a) {
  return Var<T>::Constant(a.value());
}

template <typename T>
Var<T> Dropout(const Var<T>& a, double p, std::mt19937_64& rng) {
  RequireRank2("Dropout", a);
  if (p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("Dropout: p must be below 1");
  std::bernoulli_distribution keep(1.0 - p);
  const T scale = T(1) / T(1.0 - p);
  std::vector<T> mask(a.value().size());
  for (auto& m : mask) m = keep(rng) ? scale : T(0);
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] *= mask[i];
  return MakeResult<T>("Dropout", std::move(out), {a},
                       [mask = std::move(mask)](Node<T>& self) {
                         auto& g = self.inputs[0]->GradBuffer();
                         for (std::size_t i = 0; i < mask.size(); ++i) {
                           g[i] += mask[i] * self.grad[i];
                         }
                       });
}

#define SPOKENDIAL_INSTANTIATE_OPS(T)                                           \
  template Var<T> MatMul(const Var<T>&, const Var<T>&);                         \
  template Var<T> MatMulNT(const Var<T>&, const Var<T>&);                       \
  template Var<T> Transpose(const Var<T>&);                                     \
  template Var<T> Add(const Var<T>&, const Var<T>&);                            \
  template Var<T> Sub(const Var<T>&, const Var<T>&);                            \
  template Var<T> Mul(const Var<T>&, const Var<T>&);                            \
  template Var<T> Scale(const Var<T>&, T);                                      \
  template Var<T> AddRow(const Var<T>&, const Var<T>&);                         \
  template Var<T> ScaleRows(const Var<T>&, std::span<const T>);                 \
  template Var<T> Gelu(const Var<T>&);                                          \
  template Var<T> SoftmaxRows(const Var<T>&, std::span<const std::uint8_t>);    \
  template Var<T> LayerNorm(const Var<T>&, const Var<T>&, const Var<T>&, T);    \
  template Var<T> Conv1d(const Var<T>&, const Var<T>&, const Var<T>&,           \
                         const Conv1dOptions&);                                 \
  template Var<T> GatherRows(const Var<T>&, std::span<const std::size_t>);      \
  template Var<T> ConcatRows(std::span<const Var<T>>);                          \
  template Var<T> ConcatCols(std::span<const Var<T>>);                          \
  template Var<T> SliceRows(const Var<T>&, std::size_t, std::size_t);           \
  template Var<T> SliceCols(const Var<T>&, std::size_t, std::size_t);           \
  template Var<T> Sum(const Var<T>&);                                           \
  template Var<T> Mean(const Var<T>&);                                          \
  template Var<T> CrossEntropy(const Var<T>&, std::span<const std::size_t>);    \
  template Var<T> MeanSquaredError(const Var<T>&, const Var<T>&);               \
  template Var<T> MeanAbsoluteError(const Var<T>&, const Var<T>&);              \
  template Var<T> Detach(const Var<T>&);                                        \
  template Var<T> Dropout(const Var<T>&, double, std::mt19937_64&);

SPOKENDIAL_INSTANTIATE_OPS(float)
SPOKENDIAL_INSTANTIATE_OPS(double)

#undef SPOKENDIAL_INSTANTIATE_OPS

}  // namespace spokendial::numerics
