#include "qpnls/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <vector>

#include "qpnls/grid.hpp"

namespace qpnls::fft {
namespace {

// FFTW plan creation mutates global planner state and is not thread-safe;
// execution via fftw_execute_dft on freshly supplied pointers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) {
  return reinterpret_cast<fftw_complex*>(p);
}

class PlanHandle {
 public:
  PlanHandle() = default;
  explicit PlanHandle(fftw_plan p) : plan_(p) {
    if (!plan_) throw std::runtime_error("fft: plan creation failed");
  }
  PlanHandle(const PlanHandle&) = delete;
  PlanHandle& operator=(const PlanHandle&) = delete;
  PlanHandle(PlanHandle&& other) noexcept : plan_(other.plan_) {
    other.plan_ = nullptr;
  }
  PlanHandle& operator=(PlanHandle&& other) noexcept {
    if (this != &other) {
      reset();
      plan_ = other.plan_;
      other.plan_ = nullptr;
    }
    return *this;
  }
  ~PlanHandle() { reset(); }
  fftw_plan get() const { return plan_; }

 private:
  void reset() {
    if (plan_) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
      plan_ = nullptr;
    }
  }
  fftw_plan plan_ = nullptr;
};

PlanHandle plan_full(const Grid& grid, std::complex<double>* data, int sign) {
  std::vector<int> dims(grid.n());
  for (int j = 0; j < grid.n(); ++j) dims[j] = static_cast<int>(grid.points(j));
  std::lock_guard<std::mutex> lock(planner_mutex());
  return PlanHandle(fftw_plan_dft(grid.n(), dims.data(), as_fftw(data),
                                  as_fftw(data), sign, FFTW_ESTIMATE));
}

// Transform along one axis of a row-major array.  The axis has length N and
// element stride `stride` (= product of trailing dimensions).  We plan one
// batch covering a contiguous block of `stride` interleaved transforms and
// execute it at each outer offset; new-array execution requires matching
// alignment, which holds because offsets are multiples of N*stride complex
// doubles (16 bytes each).
struct AxisShape {
  int length;
  int stride;
  std::size_t outer;
};

AxisShape axis_shape(const Grid& grid, int axis) {
  if (axis < 0 || axis >= grid.n())
    throw std::out_of_range("fft: axis out of range");
  AxisShape s;
  s.length = static_cast<int>(grid.points(axis));
  s.stride = static_cast<int>(grid.stride(axis));
  s.outer = grid.size() / (static_cast<std::size_t>(s.length) * s.stride);
  return s;
}

void transform_axis(const Grid& grid, std::complex<double>* data, int axis,
                    int sign) {
  const AxisShape s = axis_shape(grid, axis);
  if (s.stride == 1) {
    dft_rows(data, s.length, static_cast<int>(s.outer), sign);
    return;
  }
  PlanHandle plan;
  {
    const int n[1] = {s.length};
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = PlanHandle(fftw_plan_many_dft(1, n, s.stride, as_fftw(data), nullptr,
                                         s.stride, 1, as_fftw(data), nullptr,
                                         s.stride, 1, sign, FFTW_ESTIMATE));
  }
  const std::size_t block = static_cast<std::size_t>(s.length) * s.stride;
  for (std::size_t k = 0; k < s.outer; ++k) {
    fftw_complex* p = as_fftw(data + k * block);
    fftw_execute_dft(plan.get(), p, p);
  }
}

}  // namespace

void forward(const Grid& grid, std::complex<double>* data) {
  PlanHandle plan = plan_full(grid, data, FFTW_FORWARD);
  fftw_execute_dft(plan.get(), as_fftw(data), as_fftw(data));
}

void backward(const Grid& grid, std::complex<double>* data) {
  PlanHandle plan = plan_full(grid, data, FFTW_BACKWARD);
  fftw_execute_dft(plan.get(), as_fftw(data), as_fftw(data));
}

void forward_axis(const Grid& grid, std::complex<double>* data, int axis) {
  transform_axis(grid, data, axis, FFTW_FORWARD);
}

void backward_axis(const Grid& grid, std::complex<double>* data, int axis) {
  transform_axis(grid, data, axis, FFTW_BACKWARD);
}

void dft_rows(std::complex<double>* data, int len, int count, int sign) {
  if (len <= 0 || count <= 0) throw std::invalid_argument("fft: bad row shape");
  PlanHandle plan;
  {
    const int n[1] = {len};
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = PlanHandle(fftw_plan_many_dft(1, n, count, as_fftw(data), nullptr, 1,
                                         len, as_fftw(data), nullptr, 1, len,
                                         sign, FFTW_ESTIMATE));
  }
  fftw_execute_dft(plan.get(), as_fftw(data), as_fftw(data));
}

}  // namespace qpnls::fft
