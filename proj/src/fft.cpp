#include "detail/fft.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>

namespace chaoscomm::detail {
namespace {

// FFTW planning is not thread-safe; execution with new-array is.
std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s *plan) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
    const auto n = static_cast<int>(x.size());
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(x.size() / 2 + 1);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex *>(out.data()),
                                        FFTW_ESTIMATE));
    }
    fftw_execute(plan.get());
    return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n) {
    std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
    in.resize(n / 2 + 1);
    std::vector<double> out(n);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), reinterpret_cast<fftw_complex *>(in.data()),
                                        out.data(), FFTW_ESTIMATE));
    }
    fftw_execute(plan.get());
    const double scale = 1.0 / static_cast<double>(n);
    for (double &v : out) v *= scale;
    return out;
}

}  // namespace chaoscomm::detail
