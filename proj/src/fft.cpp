#include "utm/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace utm {

namespace {
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

void fft_axis(std::vector<std::complex<double>>& data, const std::vector<std::size_t>& shape, std::size_t axis,
              int sign) {
  if (axis >= shape.size()) throw std::invalid_argument("fft_axis: axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= shape[a];
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
  const int n = int(shape[axis]);
  if (n <= 1 || data.empty()) return;

  fftw_iodim dim{n, int(inner), int(inner)};
  fftw_iodim loops[2] = {{int(outer), int(n * inner), int(n * inner)}, {int(inner), 1, 1}};
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // FFTW_ESTIMATE leaves the array untouched and keeps plans deterministic.
    std::lock_guard<std::mutex> lk(planner_mutex());
    plan = fftw_plan_guru_dft(1, &dim, 2, loops, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!plan) throw std::runtime_error("fftw planning failed");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lk(planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace utm
