#include "hypflow/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace hypflow {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
    int n = 0;
};

class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache c;
        return c;
    }

    PlanPair& get(int n) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        PlanPair p;
        p.n = n;
        p.buf = fftw_alloc_complex(static_cast<size_t>(n) * n);
        // in-place transforms on the shared buffer; planner is not thread-safe
        p.fwd = fftw_plan_dft_2d(n, n, p.buf, p.buf, FFTW_FORWARD, FFTW_ESTIMATE);
        p.bwd = fftw_plan_dft_2d(n, n, p.buf, p.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
        return plans_.emplace(n, p).first->second;
    }

    std::mutex& exec_mutex() { return exec_mu_; }

  private:
    std::map<int, PlanPair> plans_;
    std::mutex mu_;
    std::mutex exec_mu_;
};

} // namespace

std::vector<cplx> fft2_forward(int n, const std::vector<double>& v) {
    auto& p = PlanCache::instance().get(n);
    std::lock_guard<std::mutex> lock(PlanCache::instance().exec_mutex());
    const size_t total = static_cast<size_t>(n) * n;
    for (size_t i = 0; i < total; ++i) {
        p.buf[i][0] = v[i];
        p.buf[i][1] = 0.0;
    }
    fftw_execute(p.fwd);
    std::vector<cplx> out(total);
    const double scale = 1.0 / static_cast<double>(total);
    for (size_t i = 0; i < total; ++i) out[i] = cplx(p.buf[i][0], p.buf[i][1]) * scale;
    return out;
}

std::vector<cplx> fft2_forward_c(int n, const std::vector<cplx>& v) {
    auto& p = PlanCache::instance().get(n);
    std::lock_guard<std::mutex> lock(PlanCache::instance().exec_mutex());
    const size_t total = static_cast<size_t>(n) * n;
    for (size_t i = 0; i < total; ++i) {
        p.buf[i][0] = v[i].real();
        p.buf[i][1] = v[i].imag();
    }
    fftw_execute(p.fwd);
    std::vector<cplx> out(total);
    const double scale = 1.0 / static_cast<double>(total);
    for (size_t i = 0; i < total; ++i) out[i] = cplx(p.buf[i][0], p.buf[i][1]) * scale;
    return out;
}

std::vector<double> fft2_inverse_real(int n, const std::vector<cplx>& c) {
    auto& p = PlanCache::instance().get(n);
    std::lock_guard<std::mutex> lock(PlanCache::instance().exec_mutex());
    const size_t total = static_cast<size_t>(n) * n;
    for (size_t i = 0; i < total; ++i) {
        p.buf[i][0] = c[i].real();
        p.buf[i][1] = c[i].imag();
    }
    fftw_execute(p.bwd);
    std::vector<double> out(total);
    for (size_t i = 0; i < total; ++i) out[i] = p.buf[i][0];
    return out;
}

std::vector<cplx> fft2_inverse_c(int n, const std::vector<cplx>& c) {
    auto& p = PlanCache::instance().get(n);
    std::lock_guard<std::mutex> lock(PlanCache::instance().exec_mutex());
    const size_t total = static_cast<size_t>(n) * n;
    for (size_t i = 0; i < total; ++i) {
        p.buf[i][0] = c[i].real();
        p.buf[i][1] = c[i].imag();
    }
    fftw_execute(p.bwd);
    std::vector<cplx> out(total);
    for (size_t i = 0; i < total; ++i) out[i] = cplx(p.buf[i][0], p.buf[i][1]);
    return out;
}

} // namespace hypflow
