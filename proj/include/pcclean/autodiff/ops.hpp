// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Differentiable tensor operations. Every op takes the tape first; with a
// non-recording tape (or inputs that need no gradient) the op only computes
// its forward value.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "pcclean/autodiff/tensor.hpp"
#include "pcclean/graph.hpp"

namespace pcclean::ad {

namespace detail {

inline void require_shape(bool ok, const char* op, const std::string& msg) {
  if (!ok) throw InvalidArgument(std::string(op) + ": " + msg);
}

template <typename Forward, typename Derivative>
Tensor unary(Tape& tape, const Tensor& x, Forward f, Derivative df) {
  std::vector<double> out(x.size());
  const auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(xv[i]);
  Tensor y(x.shape(), std::move(out), tape.tracks(x));
  if (y.requires_grad()) {
    tape.record(y, [x, y, df]() mutable {
      const auto xv = x.values();
      const auto yv = y.values();
      const auto gy = y.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * df(xv[i], yv[i]);
    });
  }
  return y;
}

}  // namespace detail

/// y = x·w (+ b), applied over every leading index of x. x: (..., in),
/// w: (in, out), b: (out) or undefined.
inline Tensor linear(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b = {}) {
  detail::require_shape(w.rank() == 2, "linear", "weight must be 2-D, got " + shape_string(w.shape()));
  detail::require_shape(x.rank() >= 1 && x.shape().back() == w.dim(0), "linear",
                        "inner dimensions disagree: " + shape_string(x.shape()) + " vs " + shape_string(w.shape()));
  const std::size_t in = w.dim(0);
  const std::size_t out = w.dim(1);
  const bool has_bias = b.defined();
  if (has_bias) {
    detail::require_shape(b.size() == out, "linear", "bias has " + std::to_string(b.size()) + " entries, need " +
                                                         std::to_string(out));
  }
  const std::size_t rows = x.size() / in;
  Shape shape = x.shape();
  shape.back() = out;

  std::vector<double> y(rows * out, 0.0);
  const double* xv = x.values().data();
  const double* wv = w.values().data();
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = y.data() + r * out;
    if (has_bias) std::copy_n(b.values().data(), out, yr);
    const double* xr = xv + r * in;
    for (std::size_t i = 0; i < in; ++i) {
      const double a = xr[i];
      if (a == 0.0) continue;
      const double* wi = wv + i * out;
      for (std::size_t o = 0; o < out; ++o) yr[o] += a * wi[o];
    }
  }

  const bool track = has_bias ? tape.tracks(x, w, b) : tape.tracks(x, w);
  Tensor result(std::move(shape), std::move(y), track);
  if (track) {
    tape.record(result, [x, w, b, result, rows, in, out, has_bias]() mutable {
      const double* gy = result.grad().data();
      const double* xv = x.values().data();
      const double* wv = w.values().data();
      if (x.requires_grad()) {
        double* gx = x.mutable_grad().data();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gyr = gy + r * out;
          double* gxr = gx + r * in;
          for (std::size_t i = 0; i < in; ++i) {
            const double* wi = wv + i * out;
            double s = 0.0;
            for (std::size_t o = 0; o < out; ++o) s += gyr[o] * wi[o];
            gxr[i] += s;
          }
        }
      }
      if (w.requires_grad()) {
        double* gw = w.mutable_grad().data();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gyr = gy + r * out;
          const double* xr = xv + r * in;
          for (std::size_t i = 0; i < in; ++i) {
            const double a = xr[i];
            if (a == 0.0) continue;
            double* gwi = gw + i * out;
            for (std::size_t o = 0; o < out; ++o) gwi[o] += a * gyr[o];
          }
        }
      }
      if (has_bias && b.requires_grad()) {
        double* gb = b.mutable_grad().data();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gyr = gy + r * out;
          for (std::size_t o = 0; o < out; ++o) gb[o] += gyr[o];
        }
      }
    });
  }
  return result;
}

/// Matrix product of a (n, p) and b (p, q).
inline Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_shape(a.rank() == 2, "matmul", "left operand must be 2-D, got " + shape_string(a.shape()));
  return linear(tape, a, b);
}

inline Tensor transpose(Tape& tape, const Tensor& a) {
  detail::require_shape(a.rank() == 2, "transpose", "operand must be 2-D, got " + shape_string(a.shape()));
  const std::size_t p = a.dim(0);
  const std::size_t q = a.dim(1);
  std::vector<double> out(p * q);
  const auto av = a.values();
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) out[j * p + i] = av[i * q + j];
  Tensor y({q, p}, std::move(out), tape.tracks(a));
  if (y.requires_grad()) {
    tape.record(y, [a, y, p, q]() mutable {
      const auto gy = y.grad();
      auto ga = a.mutable_grad();
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < q; ++j) ga[i * q + j] += gy[j * p + i];
    });
  }
  return y;
}

inline Tensor relu(Tape& tape, const Tensor& x) {
  return detail::unary(
      tape, x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sigmoid(Tape& tape, const Tensor& x) {
  return detail::unary(
      tape, x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh(Tape& tape, const Tensor& x) {
  return detail::unary(
      tape, x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

/// |x|; subgradient 0 at the origin.
inline Tensor abs(Tape& tape, const Tensor& x) {
  return detail::unary(
      tape, x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

inline Tensor square(Tape& tape, const Tensor& x) {
  return detail::unary(
      tape, x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

inline Tensor scale(Tape& tape, const Tensor& x, double factor) {
  return detail::unary(
      tape, x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

/// x + c for a constant array c with the same element count.
inline Tensor add_constant(Tape& tape, const Tensor& x, std::span<const double> c) {
  detail::require_shape(c.size() == x.size(), "add_constant",
                        "constant has " + std::to_string(c.size()) + " entries, tensor " + std::to_string(x.size()));
  std::vector<double> out(x.size());
  const auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] + c[i];
  Tensor y(x.shape(), std::move(out), tape.tracks(x));
  if (y.requires_grad()) {
    tape.record(y, [x, y]() mutable {
      const auto gy = y.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
    });
  }
  return y;
}

inline Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::require_shape(a.shape() == b.shape(), "add",
                        "shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  std::vector<double> out(a.size());
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  Tensor y(a.shape(), std::move(out), tape.tracks(a, b));
  if (y.requires_grad()) {
    tape.record(y, [a, b, y]() mutable {
      const auto gy = y.grad();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gy[i];
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gy[i];
      }
    });
  }
  return y;
}

/// Sum of all elements, as a scalar tensor.
inline Tensor sum(Tape& tape, const Tensor& x) {
  const auto xv = x.values();
  const double s = std::accumulate(xv.begin(), xv.end(), 0.0);
  Tensor y({}, {s}, tape.tracks(x));
  if (y.requires_grad()) {
    tape.record(y, [x, y]() mutable {
      const double g = y.grad()[0];
      for (double& gx : x.mutable_grad()) gx += g;
    });
  }
  return y;
}

inline Tensor mean(Tape& tape, const Tensor& x) {
  return scale(tape, sum(tape, x), 1.0 / static_cast<double>(x.size()));
}

/// Sum of same-shaped tensors (e.g. per-sample losses of a batch).
inline Tensor add_n(Tape& tape, std::span<const Tensor> xs) {
  detail::require_shape(!xs.empty(), "add_n", "needs at least one operand");
  Tensor acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = add(tape, acc, xs[i]);
  return acc;
}

/// Concatenation of (n, c_i) matrices along the channel axis.
inline Tensor concat_cols(Tape& tape, std::span<const Tensor> parts) {
  detail::require_shape(!parts.empty(), "concat_cols", "needs at least one operand");
  const std::size_t n = parts[0].dim(0);
  std::size_t total = 0;
  bool track = false;
  for (const Tensor& p : parts) {
    detail::require_shape(p.rank() == 2 && p.dim(0) == n, "concat_cols",
                          "operands must be 2-D with equal row counts, got " + shape_string(p.shape()));
    total += p.dim(1);
    track = track || tape.tracks(p);
  }
  std::vector<double> out(n * total);
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t c = p.dim(1);
    const auto pv = p.values();
    for (std::size_t r = 0; r < n; ++r) std::copy_n(pv.data() + r * c, c, out.data() + r * total + offset);
    offset += c;
  }
  Tensor y({n, total}, std::move(out), track);
  if (track) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.record(y, [inputs, y, n, total]() mutable {
      const auto gy = y.grad();
      std::size_t offset = 0;
      for (Tensor& p : inputs) {
        const std::size_t c = p.dim(1);
        if (p.requires_grad()) {
          auto gp = p.mutable_grad();
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < c; ++j) gp[r * c + j] += gy[r * total + offset + j];
        }
        offset += c;
      }
    });
  }
  return y;
}

/// (n, c) node features -> (n, k, 2c) edge features (x_i, x_j - x_i).
inline Tensor edge_features(Tape& tape, const Tensor& x, const NeighborGraph& g) {
  detail::require_shape(x.rank() == 2, "edge_features", "features must be 2-D, got " + shape_string(x.shape()));
  const std::size_t n = x.dim(0);
  const std::size_t c = x.dim(1);
  if (g.nodes != n) {
    throw InvalidArgument("edge_features: graph has " + std::to_string(g.nodes) + " nodes, features have " +
                          std::to_string(n) + " rows");
  }
  const std::size_t k = g.k;
  std::vector<double> out(n * k * 2 * c);
  pcclean::detail::fill_edge_features(x.values().data(), n, c, g, out.data());
  Tensor y({n, k, 2 * c}, std::move(out), tape.tracks(x));
  if (y.requires_grad()) {
    tape.record(y, [x, y, nbrs = g.neighbors, n, k, c]() mutable {
      const double* gy = y.grad().data();
      double* gx = x.mutable_grad().data();
      for (std::size_t i = 0; i < n; ++i) {
        double* gxi = gx + i * c;
        for (std::size_t s = 0; s < k; ++s) {
          const double* e = gy + (i * k + s) * 2 * c;
          double* gxj = gx + static_cast<std::size_t>(nbrs[i * k + s]) * c;
          for (std::size_t d = 0; d < c; ++d) {
            gxi[d] += e[d] - e[c + d];
            gxj[d] += e[c + d];
          }
        }
      }
    });
  }
  return y;
}

namespace detail {

// Max over the middle axis of an (outer, span, inner) array; gradient routes
// to the first maximal entry.
inline Tensor max_over_axis(Tape& tape, const Tensor& x, std::size_t outer, std::size_t span, std::size_t inner,
                            Shape out_shape, const char* op) {
  if (span == 0) throw InvalidArgument(std::string(op) + ": reduction axis is empty");
  std::vector<double> out(outer * inner);
  std::vector<std::uint32_t> arg(outer * inner, 0);
  const double* xv = x.values().data();
  for (std::size_t o = 0; o < outer; ++o) {
    const double* base = xv + o * span * inner;
    double* yo = out.data() + o * inner;
    std::uint32_t* ao = arg.data() + o * inner;
    std::copy_n(base, inner, yo);
    for (std::size_t s = 1; s < span; ++s) {
      const double* row = base + s * inner;
      for (std::size_t c = 0; c < inner; ++c) {
        if (row[c] > yo[c]) {
          yo[c] = row[c];
          ao[c] = static_cast<std::uint32_t>(s);
        }
      }
    }
  }
  Tensor y(std::move(out_shape), std::move(out), tape.tracks(x));
  if (y.requires_grad()) {
    tape.record(y, [x, y, arg = std::move(arg), outer, span, inner]() mutable {
      const double* gy = y.grad().data();
      double* gx = x.mutable_grad().data();
      for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t c = 0; c < inner; ++c)
          gx[(o * span + arg[o * inner + c]) * inner + c] += gy[o * inner + c];
    });
  }
  return y;
}

}  // namespace detail

/// (n, k, c) -> (n, c): elementwise max over the neighbor axis.
inline Tensor max_over_neighbors(Tape& tape, const Tensor& e) {
  detail::require_shape(e.rank() == 3, "max_over_neighbors", "input must be 3-D, got " + shape_string(e.shape()));
  return detail::max_over_axis(tape, e, e.dim(0), e.dim(1), e.dim(2), {e.dim(0), e.dim(2)}, "max_over_neighbors");
}

/// (n, c) -> (1, c): global max pool over nodes.
inline Tensor max_over_nodes(Tape& tape, const Tensor& x) {
  detail::require_shape(x.rank() == 2, "max_over_nodes", "input must be 2-D, got " + shape_string(x.shape()));
  return detail::max_over_axis(tape, x, 1, x.dim(0), x.dim(1), {1, x.dim(1)}, "max_over_nodes");
}

// ---------------------------------------------------------------------------
// Quaternions

/// Below this norm a predicted quaternion is replaced by the identity.
inline constexpr double kQuaternionEpsilon = 1e-8;

/// Number of identity substitutions made by quaternion_rotation since start.
inline std::atomic<std::size_t>& quaternion_fallback_count() {
  static std::atomic<std::size_t> count{0};
  return count;
}

namespace detail {

using Mat3 = std::array<double, 9>;

// Unit quaternion (w, x, y, z) -> row-major rotation matrix.
inline Mat3 unit_quaternion_matrix(double w, double x, double y, double z) {
  return {1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z),       2.0 * (x * z + w * y),
          2.0 * (x * y + w * z),       1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
          2.0 * (x * z - w * y),       2.0 * (y * z + w * x),       1.0 - 2.0 * (x * x + y * y)};
}

}  // namespace detail

/// Differentiable quaternion (4 elements) -> (3, 3) rotation. The input is
/// normalized first; a near-zero input maps to the identity with zero
/// gradient and bumps quaternion_fallback_count().
inline Tensor quaternion_rotation(Tape& tape, const Tensor& q) {
  detail::require_shape(q.size() == 4, "quaternion_rotation", "needs 4 components, got " + shape_string(q.shape()));
  const auto qv = q.values();
  const double len = std::sqrt(qv[0] * qv[0] + qv[1] * qv[1] + qv[2] * qv[2] + qv[3] * qv[3]);
  const bool degenerate = !(len >= kQuaternionEpsilon);
  if (degenerate) ++quaternion_fallback_count();
  const std::array<double, 4> u =
      degenerate ? std::array<double, 4>{1.0, 0.0, 0.0, 0.0}
                 : std::array<double, 4>{qv[0] / len, qv[1] / len, qv[2] / len, qv[3] / len};
  const detail::Mat3 r = detail::unit_quaternion_matrix(u[0], u[1], u[2], u[3]);
  Tensor y({3, 3}, std::vector<double>(r.begin(), r.end()), tape.tracks(q));
  if (y.requires_grad() && !degenerate) {
    tape.record(y, [q, y, u, len]() mutable {
      const auto g = y.grad();
      const auto [w, x, yy, z] = u;
      // dR/du contracted with the incoming gradient, one row per entry of R.
      const double gw = g[1] * (-2 * z) + g[2] * (2 * yy) + g[3] * (2 * z) + g[5] * (-2 * x) + g[6] * (-2 * yy) +
                        g[7] * (2 * x);
      const double gx = g[1] * (2 * yy) + g[2] * (2 * z) + g[3] * (2 * yy) + g[4] * (-4 * x) + g[5] * (-2 * w) +
                        g[6] * (2 * z) + g[7] * (2 * w) + g[8] * (-4 * x);
      const double gy = g[0] * (-4 * yy) + g[1] * (2 * x) + g[2] * (2 * w) + g[3] * (2 * x) + g[5] * (2 * z) +
                        g[6] * (-2 * w) + g[7] * (2 * z) + g[8] * (-4 * yy);
      const double gz = g[0] * (-4 * z) + g[1] * (-2 * w) + g[2] * (2 * x) + g[3] * (2 * w) + g[4] * (-4 * z) +
                        g[5] * (2 * yy) + g[6] * (2 * x) + g[7] * (2 * yy);
      const std::array<double, 4> gu{gw, gx, gy, gz};
      const double proj = gu[0] * u[0] + gu[1] * u[1] + gu[2] * u[2] + gu[3] * u[3];
      auto gq = q.mutable_grad();
      for (std::size_t i = 0; i < 4; ++i) gq[i] += (gu[i] - u[i] * proj) / len;
    });
  }
  return y;
}

}  // namespace pcclean::ad
