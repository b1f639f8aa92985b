#include "fsfbmc/fft.hpp"

#include <fftw3.h>

#include <cassert>
#include <map>
#include <mutex>

namespace fsfbmc {
namespace {

// FFTW planning is not thread safe; execution via fftw_execute_dft is. Plans
// are cached per size and shared, so only creation takes the lock.
struct PlanCache {
    std::mutex mtx;
    std::map<int, fftw_plan> fwd;
    std::map<int, fftw_plan> bwd;

    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mtx);
        auto& table = sign == FFTW_FORWARD ? fwd : bwd;
        auto it = table.find(n);
        if (it != table.end()) return it->second;
        fftw_complex* a = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_complex* b = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_plan p = fftw_plan_dft_1d(n, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(a);
        fftw_free(b);
        table.emplace(n, p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run(const cd* in, cd* out, int n, int sign) {
    assert(in != out);
    fftw_plan p = cache().get(n, sign);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cd*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

void fft(const cd* in, cd* out, int n) { run(in, out, n, FFTW_FORWARD); }

void ifft_unscaled(const cd* in, cd* out, int n) { run(in, out, n, FFTW_BACKWARD); }

std::vector<cd> fft(const std::vector<cd>& in) {
    std::vector<cd> out(in.size());
    fft(in.data(), out.data(), static_cast<int>(in.size()));
    return out;
}

std::vector<cd> ifft_unscaled(const std::vector<cd>& in) {
    std::vector<cd> out(in.size());
    ifft_unscaled(in.data(), out.data(), static_cast<int>(in.size()));
    return out;
}

}  // namespace fsfbmc
