#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dropnet {

// Per-position validity flags; 1 = valid, 0 = padding.
using Mask = std::vector<std::uint8_t>;

namespace detail {
struct TensorData {
  std::vector<int> shape;
  std::vector<double> values;
  std::vector<double> grad;  // same length as values, zero-initialised
  bool requires_grad = false;
};
}  // namespace detail

// Dense row-major tensor. Handles copy shallowly: two Tensors may share one
// buffer, which is how parameters keep accumulating gradients across tapes.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value,
                     bool requires_grad = false);
  static Tensor from(std::vector<double> values, std::vector<int> shape,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return data_ != nullptr; }
  const std::vector<int>& shape() const { return data_->shape; }
  int rank() const { return static_cast<int>(data_->shape.size()); }
  int extent(int axis) const { return data_->shape[static_cast<std::size_t>(axis)]; }
  int size() const { return static_cast<int>(data_->values.size()); }

  bool requires_grad() const { return data_->requires_grad; }
  void set_requires_grad(bool on) { data_->requires_grad = on; }

  std::span<const double> values() const { return data_->values; }
  std::span<double> values() { return data_->values; }
  std::span<const double> grad() const { return data_->grad; }
  std::span<double> grad() { return data_->grad; }

  // contract: size() == 1
  double scalar_value() const;

  double operator()(int i) const { return data_->values[static_cast<std::size_t>(i)]; }
  double operator()(int i, int j) const;  // rank-2 accessor

  void zero_grad();

  // Deep copy with a detached buffer (used for checkpoint snapshots).
  Tensor clone() const;

  // Identity of the underlying buffer, for aliasing checks in tests.
  const void* buffer_id() const { return data_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorData> data) : data_(std::move(data)) {}
  std::shared_ptr<detail::TensorData> data_;
};

// Reverse-mode tape. Constructing a Tape makes it the active recorder for
// the current thread; operations append their gradient rules while one is
// active and at least one operand requires gradients. Records are replayed
// newest-first by backward().
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* active();

  void record(Tensor output, std::function<void()> backward_fn);

  // Seeds d(loss)/d(loss) = 1 and replays the recorded rules in reverse.
  // Gradients of leaf tensors accumulate across calls; gradients of recorded
  // outputs are reset at the start of each call so replays stay exact.
  void backward(const Tensor& loss);

  std::size_t size() const { return records_.size(); }

 private:
  struct Record {
    Tensor output;
    std::function<void()> backward_fn;
  };
  std::vector<Record> records_;
  Tape* previous_ = nullptr;
};

std::string shape_string(const std::vector<int>& shape);

}  // namespace dropnet
