#pragma once

#include "oamlens/simd.hpp"

namespace oamlens::simd::detail
{

#if defined(OAMLENS_HAVE_AVX2)
const Kernels& avx2_table() noexcept;
#endif

} // namespace oamlens::simd::detail
