#include "dropnet/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "dropnet/error.hpp"

namespace dropnet {

namespace {

std::size_t checked_count(const std::vector<int>& shape) {
  std::size_t count = 1;
  for (int extent : shape) {
    if (extent <= 0) {
      throw DimensionError("tensor extents must be positive, got " +
                           shape_string(shape));
    }
    count *= static_cast<std::size_t>(extent);
  }
  return count;
}

std::shared_ptr<detail::TensorData> make_data(std::vector<int> shape,
                                              std::vector<double> values,
                                              bool requires_grad) {
  auto data = std::make_shared<detail::TensorData>();
  data->grad.assign(values.size(), 0.0);
  data->values = std::move(values);
  data->shape = std::move(shape);
  data->requires_grad = requires_grad;
  return data;
}

thread_local Tape* g_active_tape = nullptr;

}  // namespace

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  std::size_t count = checked_count(shape);
  return Tensor(make_data(std::move(shape), std::vector<double>(count, value),
                          requires_grad));
}

Tensor Tensor::from(std::vector<double> values, std::vector<int> shape,
                    bool requires_grad) {
  std::size_t count = checked_count(shape);
  if (count != values.size()) {
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not fill shape " + shape_string(shape));
  }
  return Tensor(make_data(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({value}, {1}, requires_grad);
}

double Tensor::scalar_value() const {
  if (size() != 1) {
    throw ContractError("expected a scalar tensor, got shape " +
                        shape_string(shape()));
  }
  return data_->values[0];
}

double Tensor::operator()(int i, int j) const {
  return data_->values[static_cast<std::size_t>(i) *
                           static_cast<std::size_t>(data_->shape[1]) +
                       static_cast<std::size_t>(j)];
}

void Tensor::zero_grad() {
  std::fill(data_->grad.begin(), data_->grad.end(), 0.0);
}

Tensor Tensor::clone() const {
  auto copy = make_data(data_->shape, data_->values, data_->requires_grad);
  copy->grad = data_->grad;
  return Tensor(std::move(copy));
}

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() { g_active_tape = previous_; }

Tape* Tape::active() { return g_active_tape; }

void Tape::record(Tensor output, std::function<void()> backward_fn) {
  records_.push_back(Record{std::move(output), std::move(backward_fn)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  for (Record& record : records_) {
    record.output.zero_grad();
  }
  Tensor seed = loss;
  seed.grad()[0] = 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    it->backward_fn();
  }
}

}  // namespace dropnet
