#include <cstdlib>

#include "tmsim/kernels.hpp"

namespace tmsim::kernels {

namespace {

const Backend& select() {
    const char* force = std::getenv("TMSIM_FORCE_SCALAR");
    if (force && force[0] == '1') return scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_available()) return avx2_backend();
#endif
    return scalar_backend();
}

}  // namespace

const Backend& active_backend() {
    static const Backend& chosen = select();
    return chosen;
}

}  // namespace tmsim::kernels
