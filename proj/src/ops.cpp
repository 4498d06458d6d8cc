#include "dropnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

constexpr double kLogFloor = 1e-12;

bool tracking(const Tensor& a) {
  return Tape::active() != nullptr && a.requires_grad();
}

bool tracking(const Tensor& a, const Tensor& b) {
  return Tape::active() != nullptr && (a.requires_grad() || b.requires_grad());
}

Tensor make_output(std::vector<int> shape, bool track) {
  Tensor out = Tensor::zeros(std::move(shape), track);
  return out;
}

[[noreturn]] void dimension_mismatch(const char* op, const Tensor& a,
                                     const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shape_string(a.shape()) + " and " +
                       shape_string(b.shape()));
}

// C[m,n] += A[m,k] * B[k,n], row-major
void gemm_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::ptrdiff_t>(i) * k;
    double* crow = c + static_cast<std::ptrdiff_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<std::ptrdiff_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m,k] += A[m,n] * B[k,n]^T
void gemm_bt_acc(const double* a, const double* b, double* c, int m, int n, int k) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::ptrdiff_t>(i) * n;
    double* crow = c + static_cast<std::ptrdiff_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double* brow = b + static_cast<std::ptrdiff_t>(p) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += arow[j] * brow[j];
      crow[p] += acc;
    }
  }
}

// C[k,n] += A[m,k]^T * B[m,n]
void gemm_at_acc(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::ptrdiff_t>(i) * k;
    const double* brow = b + static_cast<std::ptrdiff_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* crow = c + static_cast<std::ptrdiff_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// Strides of b against the output shape; 0 on axes where b has extent 1.
std::vector<std::size_t> broadcast_strides(const std::vector<int>& out_shape,
                                           const std::vector<int>& b_shape) {
  std::vector<std::size_t> strides(out_shape.size(), 0);
  std::size_t running = 1;
  for (int axis = static_cast<int>(out_shape.size()) - 1; axis >= 0; --axis) {
    std::size_t idx = static_cast<std::size_t>(axis);
    strides[idx] = (b_shape[idx] == 1) ? 0 : running;
    running *= static_cast<std::size_t>(b_shape[idx]);
  }
  return strides;
}

// Calls fn(out_flat, b_flat) for every element of the output shape.
template <typename Fn>
void for_each_broadcast(const std::vector<int>& out_shape,
                        const std::vector<int>& b_shape, Fn&& fn) {
  if (out_shape == b_shape) {
    std::size_t total = 1;
    for (int e : out_shape) total *= static_cast<std::size_t>(e);
    for (std::size_t i = 0; i < total; ++i) fn(i, i);
    return;
  }
  if (out_shape.size() == 2) {
    const std::size_t rows = static_cast<std::size_t>(out_shape[0]);
    const std::size_t cols = static_cast<std::size_t>(out_shape[1]);
    const std::size_t bi = (b_shape[0] == 1) ? 0 : static_cast<std::size_t>(b_shape[1]);
    const std::size_t bj = (b_shape[1] == 1) ? 0 : 1;
    std::size_t flat = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j, ++flat) {
        fn(flat, i * bi + j * bj);
      }
    }
    return;
  }
  // general odometer walk
  const auto strides = broadcast_strides(out_shape, b_shape);
  std::vector<std::size_t> index(out_shape.size(), 0);
  std::size_t total = 1;
  for (int e : out_shape) total *= static_cast<std::size_t>(e);
  std::size_t b_flat = 0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(flat, b_flat);
    for (int axis = static_cast<int>(out_shape.size()) - 1; axis >= 0; --axis) {
      std::size_t idx = static_cast<std::size_t>(axis);
      ++index[idx];
      b_flat += strides[idx];
      if (index[idx] < static_cast<std::size_t>(out_shape[idx])) break;
      b_flat -= strides[idx] * index[idx];
      index[idx] = 0;
    }
  }
}

void check_broadcastable(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank()) dimension_mismatch(op, a, b);
  for (int axis = 0; axis < a.rank(); ++axis) {
    if (b.extent(axis) != a.extent(axis) && b.extent(axis) != 1) {
      dimension_mismatch(op, a, b);
    }
  }
}

// Layout of the slices normalised/reduced along `axis` of a rank-1/2 tensor:
// `count` independent slices of `length` positions, where the i-th position
// of slice s sits at s * slice_pitch + i * step.
struct SliceLayout {
  int count;
  int length;
  std::size_t slice_pitch;
  std::size_t step;
};

SliceLayout slice_layout(const Tensor& a, int axis, const char* op) {
  if (a.rank() == 1) {
    if (axis != 0) {
      throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                           " out of range for shape " + shape_string(a.shape()));
    }
    return {1, a.extent(0), 0, 1};
  }
  if (a.rank() == 2) {
    if (axis == 1) {
      return {a.extent(0), a.extent(1), static_cast<std::size_t>(a.extent(1)), 1};
    }
    if (axis == 0) {
      return {a.extent(1), a.extent(0), 1, static_cast<std::size_t>(a.extent(1))};
    }
  }
  throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                       " out of range for shape " + shape_string(a.shape()));
}

void check_mask(const char* op, const Mask* mask, int length) {
  if (mask != nullptr && static_cast<int>(mask->size()) != length) {
    throw DimensionError(std::string(op) + ": mask length " +
                         std::to_string(mask->size()) +
                         " does not match slice length " + std::to_string(length));
  }
}

std::vector<int> reduced_shape(const Tensor& a, int axis) {
  if (a.rank() == 1) return {1};
  return {a.extent(axis == 0 ? 1 : 0)};
}

}  // namespace

Tensor matmul(Tensor a, Tensor b) {
  const bool track = tracking(a, b);
  if (a.rank() == 2 && b.rank() == 2) {
    if (a.extent(1) != b.extent(0)) dimension_mismatch("matmul", a, b);
    const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
    Tensor out = make_output({m, n}, track);
    gemm_acc(a.values().data(), b.values().data(), out.values().data(), m, k, n);
    if (track) {
      Tape::active()->record(out, [a, b, out, m, k, n]() mutable {
        if (a.requires_grad()) {
          gemm_bt_acc(out.grad().data(), b.values().data(), a.grad().data(), m, n, k);
        }
        if (b.requires_grad()) {
          gemm_at_acc(a.values().data(), out.grad().data(), b.grad().data(), m, k, n);
        }
      });
    }
    return out;
  }
  if (a.rank() == 2 && b.rank() == 1) {
    if (a.extent(1) != b.extent(0)) dimension_mismatch("matmul", a, b);
    const int m = a.extent(0), k = a.extent(1);
    Tensor out = make_output({m}, track);
    gemm_acc(a.values().data(), b.values().data(), out.values().data(), m, k, 1);
    if (track) {
      Tape::active()->record(out, [a, b, out, m, k]() mutable {
        if (a.requires_grad()) {
          gemm_acc(out.grad().data(), b.values().data(), a.grad().data(), m, 1, k);
        }
        if (b.requires_grad()) {
          gemm_at_acc(a.values().data(), out.grad().data(), b.grad().data(), m, k, 1);
        }
      });
    }
    return out;
  }
  if (a.rank() == 1 && b.rank() == 2) {
    if (a.extent(0) != b.extent(0)) dimension_mismatch("matmul", a, b);
    const int k = a.extent(0), n = b.extent(1);
    Tensor out = make_output({n}, track);
    gemm_acc(a.values().data(), b.values().data(), out.values().data(), 1, k, n);
    if (track) {
      Tape::active()->record(out, [a, b, out, k, n]() mutable {
        if (a.requires_grad()) {
          gemm_bt_acc(out.grad().data(), b.values().data(), a.grad().data(), 1, n, k);
        }
        if (b.requires_grad()) {
          gemm_acc(a.values().data(), out.grad().data(), b.grad().data(), k, 1, n);
        }
      });
    }
    return out;
  }
  dimension_mismatch("matmul", a, b);
}

namespace {

enum class PointwiseKind { add, sub, mul };

Tensor pointwise(PointwiseKind kind, Tensor a, Tensor b) {
  const char* name = kind == PointwiseKind::add   ? "add"
                     : kind == PointwiseKind::sub ? "sub"
                                                  : "mul";
  check_broadcastable(name, a, b);
  const bool track = tracking(a, b);
  Tensor out = make_output(a.shape(), track);
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  switch (kind) {
    case PointwiseKind::add:
      for_each_broadcast(a.shape(), b.shape(),
                         [&](std::size_t i, std::size_t j) { ov[i] = av[i] + bv[j]; });
      break;
    case PointwiseKind::sub:
      for_each_broadcast(a.shape(), b.shape(),
                         [&](std::size_t i, std::size_t j) { ov[i] = av[i] - bv[j]; });
      break;
    case PointwiseKind::mul:
      for_each_broadcast(a.shape(), b.shape(),
                         [&](std::size_t i, std::size_t j) { ov[i] = av[i] * bv[j]; });
      break;
  }
  if (track) {
    Tape::active()->record(out, [kind, a, b, out]() mutable {
      auto og = out.grad();
      if (a.requires_grad()) {
        auto ag = a.grad();
        if (kind == PointwiseKind::mul) {
          auto bv = b.values();
          for_each_broadcast(a.shape(), b.shape(), [&](std::size_t i, std::size_t j) {
            ag[i] += og[i] * bv[j];
          });
        } else {
          for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += og[i];
        }
      }
      if (b.requires_grad()) {
        auto bg = b.grad();
        switch (kind) {
          case PointwiseKind::add:
            for_each_broadcast(a.shape(), b.shape(),
                               [&](std::size_t i, std::size_t j) { bg[j] += og[i]; });
            break;
          case PointwiseKind::sub:
            for_each_broadcast(a.shape(), b.shape(),
                               [&](std::size_t i, std::size_t j) { bg[j] -= og[i]; });
            break;
          case PointwiseKind::mul: {
            auto av = a.values();
            for_each_broadcast(a.shape(), b.shape(), [&](std::size_t i, std::size_t j) {
              bg[j] += og[i] * av[i];
            });
            break;
          }
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor add(Tensor a, Tensor b) { return pointwise(PointwiseKind::add, a, b); }
Tensor sub(Tensor a, Tensor b) { return pointwise(PointwiseKind::sub, a, b); }
Tensor mul(Tensor a, Tensor b) { return pointwise(PointwiseKind::mul, a, b); }

Tensor scale(Tensor a, double factor) {
  const bool track = tracking(a);
  Tensor out = make_output(a.shape(), track);
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = factor * av[i];
  if (track) {
    Tape::active()->record(out, [a, out, factor]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += factor * og[i];
    });
  }
  return out;
}

Tensor tanh(Tensor a) {
  const bool track = tracking(a);
  Tensor out = make_output(a.shape(), track);
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::tanh(av[i]);
  if (track) {
    Tape::active()->record(out, [a, out]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      auto yv = out.values();
      for (std::size_t i = 0; i < ag.size(); ++i) {
        ag[i] += og[i] * (1.0 - yv[i] * yv[i]);
      }
    });
  }
  return out;
}

Tensor sigmoid(Tensor a) {
  const bool track = tracking(a);
  Tensor out = make_output(a.shape(), track);
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = 1.0 / (1.0 + std::exp(-av[i]));
  if (track) {
    Tape::active()->record(out, [a, out]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      auto yv = out.values();
      for (std::size_t i = 0; i < ag.size(); ++i) {
        ag[i] += og[i] * yv[i] * (1.0 - yv[i]);
      }
    });
  }
  return out;
}

Tensor softmax(Tensor a, int axis, const Mask* mask) {
  const SliceLayout layout = slice_layout(a, axis, "softmax");
  check_mask("softmax", mask, layout.length);
  const bool track = tracking(a);
  Tensor out = make_output(a.shape(), track);
  auto av = a.values();
  auto ov = out.values();
  for (int s = 0; s < layout.count; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * layout.slice_pitch;
    double max_valid = -HUGE_VAL;
    for (int i = 0; i < layout.length; ++i) {
      if (mask != nullptr && (*mask)[static_cast<std::size_t>(i)] == 0) continue;
      max_valid = std::max(max_valid, av[base + static_cast<std::size_t>(i) * layout.step]);
    }
    if (max_valid == -HUGE_VAL) {
      throw MaskError("softmax slice has no valid positions");
    }
    double total = 0.0;
    for (int i = 0; i < layout.length; ++i) {
      const std::size_t at = base + static_cast<std::size_t>(i) * layout.step;
      if (mask != nullptr && (*mask)[static_cast<std::size_t>(i)] == 0) {
        ov[at] = 0.0;
        continue;
      }
      ov[at] = std::exp(av[at] - max_valid);
      total += ov[at];
    }
    for (int i = 0; i < layout.length; ++i) {
      const std::size_t at = base + static_cast<std::size_t>(i) * layout.step;
      if (mask != nullptr && (*mask)[static_cast<std::size_t>(i)] == 0) continue;
      ov[at] /= total;
    }
  }
  if (track) {
    Mask mask_copy = (mask != nullptr) ? *mask : Mask{};
    Tape::active()->record(out, [a, out, layout, mask_copy]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      auto yv = out.values();
      const Mask* m = mask_copy.empty() ? nullptr : &mask_copy;
      for (int s = 0; s < layout.count; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) * layout.slice_pitch;
        double weighted = 0.0;
        for (int i = 0; i < layout.length; ++i) {
          if (m != nullptr && (*m)[static_cast<std::size_t>(i)] == 0) continue;
          const std::size_t at = base + static_cast<std::size_t>(i) * layout.step;
          weighted += og[at] * yv[at];
        }
        for (int i = 0; i < layout.length; ++i) {
          if (m != nullptr && (*m)[static_cast<std::size_t>(i)] == 0) continue;
          const std::size_t at = base + static_cast<std::size_t>(i) * layout.step;
          ag[at] += yv[at] * (og[at] - weighted);
        }
      }
    });
  }
  return out;
}

Tensor reduce_mean(Tensor a, int axis, const Mask* mask) {
  const SliceLayout layout = slice_layout(a, axis, "reduce_mean");
  check_mask("reduce_mean", mask, layout.length);
  int valid = 0;
  for (int i = 0; i < layout.length; ++i) {
    if (mask == nullptr || (*mask)[static_cast<std::size_t>(i)] != 0) ++valid;
  }
  if (valid == 0) throw MaskError("reduce_mean slice has no valid positions");
  const bool track = tracking(a);
  Tensor out = make_output(reduced_shape(a, axis), track);
  auto av = a.values();
  auto ov = out.values();
  for (int s = 0; s < layout.count; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * layout.slice_pitch;
    double total = 0.0;
    for (int i = 0; i < layout.length; ++i) {
      if (mask != nullptr && (*mask)[static_cast<std::size_t>(i)] == 0) continue;
      total += av[base + static_cast<std::size_t>(i) * layout.step];
    }
    ov[static_cast<std::size_t>(s)] = total / valid;
  }
  if (track) {
    Mask mask_copy = (mask != nullptr) ? *mask : Mask{};
    Tape::active()->record(out, [a, out, layout, mask_copy, valid]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      const Mask* m = mask_copy.empty() ? nullptr : &mask_copy;
      for (int s = 0; s < layout.count; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) * layout.slice_pitch;
        const double share = og[static_cast<std::size_t>(s)] / valid;
        for (int i = 0; i < layout.length; ++i) {
          if (m != nullptr && (*m)[static_cast<std::size_t>(i)] == 0) continue;
          ag[base + static_cast<std::size_t>(i) * layout.step] += share;
        }
      }
    });
  }
  return out;
}

Tensor reduce_max(Tensor a, int axis, const Mask* mask) {
  const SliceLayout layout = slice_layout(a, axis, "reduce_max");
  check_mask("reduce_max", mask, layout.length);
  const bool track = tracking(a);
  Tensor out = make_output(reduced_shape(a, axis), track);
  auto av = a.values();
  auto ov = out.values();
  std::vector<int> argmax(static_cast<std::size_t>(layout.count), -1);
  for (int s = 0; s < layout.count; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * layout.slice_pitch;
    double best = -HUGE_VAL;
    int best_at = -1;
    for (int i = 0; i < layout.length; ++i) {
      if (mask != nullptr && (*mask)[static_cast<std::size_t>(i)] == 0) continue;
      const double v = av[base + static_cast<std::size_t>(i) * layout.step];
      if (v > best) {  // ties keep the first maximal position
        best = v;
        best_at = i;
      }
    }
    if (best_at < 0) throw MaskError("reduce_max slice has no valid positions");
    ov[static_cast<std::size_t>(s)] = best;
    argmax[static_cast<std::size_t>(s)] = best_at;
  }
  if (track) {
    Tape::active()->record(out, [a, out, layout, argmax]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      for (int s = 0; s < layout.count; ++s) {
        const std::size_t base = static_cast<std::size_t>(s) * layout.slice_pitch;
        const std::size_t at =
            base + static_cast<std::size_t>(argmax[static_cast<std::size_t>(s)]) * layout.step;
        ag[at] += og[static_cast<std::size_t>(s)];
      }
    });
  }
  return out;
}

Tensor concat(std::vector<Tensor> parts, int axis) {
  if (parts.empty()) throw ContractError("concat needs at least one tensor");
  const int rank = parts.front().rank();
  for (const Tensor& p : parts) {
    if (p.rank() != rank) dimension_mismatch("concat", parts.front(), p);
    for (int d = 0; d < rank; ++d) {
      if (d != axis && p.extent(d) != parts.front().extent(d)) {
        dimension_mismatch("concat", parts.front(), p);
      }
    }
  }
  if (axis < 0 || axis >= rank) {
    throw DimensionError("concat: axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
  }
  bool track = false;
  for (const Tensor& p : parts) track = track || tracking(p);

  std::vector<int> shape = parts.front().shape();
  int joined = 0;
  for (const Tensor& p : parts) joined += p.extent(axis);
  shape[static_cast<std::size_t>(axis)] = joined;
  Tensor out = make_output(shape, track);

  // offsets of each part along the concat axis
  std::vector<int> offsets(parts.size(), 0);
  for (std::size_t p = 1; p < parts.size(); ++p) {
    offsets[p] = offsets[p - 1] + parts[p - 1].extent(axis);
  }

  // Walks one part's elements; fn(part_flat, out_flat).
  auto for_each_element = [rank, axis](const Tensor& part, const std::vector<int>& out_shape,
                                       int offset, auto&& fn) {
    if (rank == 1) {
      for (int i = 0; i < part.extent(0); ++i) {
        fn(static_cast<std::size_t>(i), static_cast<std::size_t>(offset + i));
      }
      return;
    }
    const int rows = part.extent(0), cols = part.extent(1);
    const int out_cols = out_shape[1];
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const std::size_t src =
            static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j);
        const std::size_t dst =
            (axis == 0)
                ? static_cast<std::size_t>(offset + i) * static_cast<std::size_t>(out_cols) +
                      static_cast<std::size_t>(j)
                : static_cast<std::size_t>(i) * static_cast<std::size_t>(out_cols) +
                      static_cast<std::size_t>(offset + j);
        fn(src, dst);
      }
    }
  };

  auto ov = out.values();
  for (std::size_t p = 0; p < parts.size(); ++p) {
    auto pv = parts[p].values();
    for_each_element(parts[p], shape, offsets[p],
                     [&](std::size_t src, std::size_t dst) { ov[dst] = pv[src]; });
  }
  if (track) {
    Tape::active()->record(out, [parts, out, offsets, shape, for_each_element]() mutable {
      auto og = out.grad();
      for (std::size_t p = 0; p < parts.size(); ++p) {
        if (!parts[p].requires_grad()) continue;
        auto pg = parts[p].grad();
        for_each_element(parts[p], shape, offsets[p],
                         [&](std::size_t src, std::size_t dst) { pg[src] += og[dst]; });
      }
    });
  }
  return out;
}

Tensor transpose(Tensor a) {
  if (a.rank() != 2) {
    throw DimensionError("transpose expects a rank-2 tensor, got " +
                         shape_string(a.shape()));
  }
  const int rows = a.extent(0), cols = a.extent(1);
  const bool track = tracking(a);
  Tensor out = make_output({cols, rows}, track);
  auto av = a.values();
  auto ov = out.values();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      ov[static_cast<std::size_t>(j) * static_cast<std::size_t>(rows) + static_cast<std::size_t>(i)] =
          av[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
    }
  }
  if (track) {
    Tape::active()->record(out, [a, out, rows, cols]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          ag[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)] +=
              og[static_cast<std::size_t>(j) * static_cast<std::size_t>(rows) + static_cast<std::size_t>(i)];
        }
      }
    });
  }
  return out;
}

Tensor reshape(Tensor a, std::vector<int> shape) {
  std::size_t count = 1;
  for (int e : shape) count *= static_cast<std::size_t>(std::max(e, 0));
  if (static_cast<int>(count) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) +
                         " as " + shape_string(shape));
  }
  const bool track = tracking(a);
  Tensor out = make_output(std::move(shape), track);
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i];
  if (track) {
    Tape::active()->record(out, [a, out]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += og[i];
    });
  }
  return out;
}

Tensor column(Tensor a, int j) {
  if (a.rank() != 2) {
    throw DimensionError("column expects a rank-2 tensor, got " +
                         shape_string(a.shape()));
  }
  if (j < 0 || j >= a.extent(1)) {
    throw IndexError("column index " + std::to_string(j) + " out of range [0, " +
                     std::to_string(a.extent(1)) + ")");
  }
  const int rows = a.extent(0), cols = a.extent(1);
  const bool track = tracking(a);
  Tensor out = make_output({rows}, track);
  auto av = a.values();
  auto ov = out.values();
  for (int i = 0; i < rows; ++i) {
    ov[static_cast<std::size_t>(i)] =
        av[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
  }
  if (track) {
    Tape::active()->record(out, [a, out, rows, cols, j]() mutable {
      auto ag = a.grad();
      auto og = out.grad();
      for (int i = 0; i < rows; ++i) {
        ag[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)] +=
            og[static_cast<std::size_t>(i)];
      }
    });
  }
  return out;
}

Tensor lookup(Tensor table, std::span<const int> indices) {
  if (table.rank() != 2) {
    throw DimensionError("lookup expects a rank-2 table, got " +
                         shape_string(table.shape()));
  }
  const int vocab = table.extent(0), dim = table.extent(1);
  for (int idx : indices) {
    if (idx < 0 || idx >= vocab) {
      throw IndexError("lookup index " + std::to_string(idx) +
                       " out of range [0, " + std::to_string(vocab) + ")");
    }
  }
  const int length = static_cast<int>(indices.size());
  const bool track = tracking(table);
  Tensor out = make_output({dim, length}, track);
  auto tv = table.values();
  auto ov = out.values();
  for (int t = 0; t < length; ++t) {
    const std::size_t row = static_cast<std::size_t>(indices[static_cast<std::size_t>(t)]) *
                            static_cast<std::size_t>(dim);
    for (int r = 0; r < dim; ++r) {
      ov[static_cast<std::size_t>(r) * static_cast<std::size_t>(length) + static_cast<std::size_t>(t)] =
          tv[row + static_cast<std::size_t>(r)];
    }
  }
  if (track) {
    std::vector<int> idx_copy(indices.begin(), indices.end());
    Tape::active()->record(out, [table, out, idx_copy, dim, length]() mutable {
      auto tg = table.grad();
      auto og = out.grad();
      for (int t = 0; t < length; ++t) {
        const std::size_t row = static_cast<std::size_t>(idx_copy[static_cast<std::size_t>(t)]) *
                                static_cast<std::size_t>(dim);
        for (int r = 0; r < dim; ++r) {
          tg[row + static_cast<std::size_t>(r)] +=
              og[static_cast<std::size_t>(r) * static_cast<std::size_t>(length) + static_cast<std::size_t>(t)];
        }
      }
    });
  }
  return out;
}

Tensor sum(Tensor a) {
  const bool track = tracking(a);
  Tensor out = make_output({1}, track);
  double total = 0.0;
  for (double v : a.values()) total += v;
  out.values()[0] = total;
  if (track) {
    Tape::active()->record(out, [a, out]() mutable {
      auto ag = a.grad();
      const double g = out.grad()[0];
      for (std::size_t i = 0; i < ag.size(); ++i) ag[i] += g;
    });
  }
  return out;
}

Tensor cross_entropy(Tensor probs, int label) {
  if (probs.rank() != 1) {
    throw DimensionError("cross_entropy expects a probability vector, got " +
                         shape_string(probs.shape()));
  }
  if (label < 0 || label >= probs.extent(0)) {
    throw IndexError("label " + std::to_string(label) + " out of range [0, " +
                     std::to_string(probs.extent(0)) + ")");
  }
  const bool track = tracking(probs);
  Tensor out = make_output({1}, track);
  const double p = std::max(probs(label), kLogFloor);
  out.values()[0] = -std::log(p);
  if (track) {
    Tape::active()->record(out, [probs, out, label]() mutable {
      const double p = probs(label);
      if (p > kLogFloor) {
        probs.grad()[static_cast<std::size_t>(label)] += out.grad()[0] * (-1.0 / p);
      }
    });
  }
  return out;
}

}  // namespace dropnet
