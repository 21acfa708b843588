#include "qkdlab/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace qkd::kernels {

#ifndef QKDLAB_HAVE_AVX2
const Ops* avx2_ops() { return nullptr; }
#endif

const Ops& active() {
    static const Ops& chosen = []() -> const Ops& {
        if (const char* env = std::getenv("QKDLAB_KERNELS")) {
            if (std::strcmp(env, "scalar") == 0) return scalar_ops();
            if (std::strcmp(env, "avx2") == 0) {
                if (const Ops* a = avx2_ops()) return *a;
                throw std::runtime_error("QKDLAB_KERNELS=avx2 requested but AVX2 is unavailable");
            }
            throw std::runtime_error(std::string("unknown QKDLAB_KERNELS value: ") + env);
        }
        if (const Ops* a = avx2_ops()) return *a;
        return scalar_ops();
    }();
    return chosen;
}

} // namespace qkd::kernels
