#include "owl/kernels.hpp"

namespace owl::nn {

Backend& kernel_backend() {
    static Backend b = Backend::OpenMP;
    return b;
}

}  // namespace owl::nn
