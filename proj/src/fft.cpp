#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace mvf::detail {

namespace {

// fftw planner calls are not thread-safe; execution on a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<Complex> transform(std::vector<Complex> data, int sign) {
  if (data.empty()) return data;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return data;
}

}  // namespace

std::vector<Complex> fft_forward(std::vector<Complex> data) { return transform(std::move(data), FFTW_FORWARD); }

std::vector<Complex> fft_backward(std::vector<Complex> data) { return transform(std::move(data), FFTW_BACKWARD); }

std::string fft_library_version() { return fftw_version; }

}  // namespace mvf::detail
