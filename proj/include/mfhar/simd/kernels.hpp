#pragma once

// Data-parallel inner loops with a scalar reference and vectorized variants.
//
// Every variant must produce results equal to the scalar reference (IoU
// values compare equal as doubles, planar conversion is bit-identical); the
// equivalence tests enforce this for each level compiled into the build.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mfhar/geometry.hpp"

namespace mfhar::simd {

enum class Level { Scalar, Avx2, Neon };

std::string_view to_string(Level level) noexcept;

/// Structure-of-arrays view over a set of boxes (x, y, w, h columns).
struct BoxColumnsView {
    const double* x = nullptr;
    const double* y = nullptr;
    const double* w = nullptr;
    const double* h = nullptr;
    std::size_t size = 0;
};

/// Owning column store used to feed the batched IoU kernel.
class BoxColumns {
public:
    BoxColumns() = default;
    explicit BoxColumns(std::span<const Box> boxes);

    void reserve(std::size_t n);
    void push_back(const Box& box);
    void clear() noexcept;
    std::size_t size() const noexcept { return x_.size(); }
    BoxColumnsView view() const noexcept;

private:
    std::vector<double> x_, y_, w_, h_;
};

using IouOneToManyFn = void (*)(const Box& query, BoxColumnsView boxes, double* out);
/// Deinterleaves `pixels` RGB triplets into three planes of `pixels` floats each,
/// multiplying every byte by `scale`.
using RgbToPlanarFn = void (*)(const std::uint8_t* rgb, std::size_t pixels, float* planes,
                               float scale);

struct KernelTable {
    Level level;
    IouOneToManyFn iou_one_to_many;
    RgbToPlanarFn rgb_to_planar;
};

/// Levels compiled into this build and supported by the running CPU.
std::vector<Level> available_levels();

/// Kernel table for a specific level, or nullptr if unavailable.
const KernelTable* table_for(Level level) noexcept;

/// Table chosen once per process: the best available level, unless the
/// MFHAR_SIMD environment variable names another available one
/// ("scalar", "avx2", "neon").
const KernelTable& active();

void iou_one_to_many(const Box& query, BoxColumnsView boxes, std::span<double> out);

void rgb_to_planar(std::span<const std::uint8_t> rgb, std::span<float> planes, float scale);

namespace scalar {
void iou_one_to_many(const Box& query, BoxColumnsView boxes, double* out);
void rgb_to_planar(const std::uint8_t* rgb, std::size_t pixels, float* planes, float scale);
}  // namespace scalar

#if defined(MFHAR_HAVE_AVX2)
namespace avx2 {
void iou_one_to_many(const Box& query, BoxColumnsView boxes, double* out);
void rgb_to_planar(const std::uint8_t* rgb, std::size_t pixels, float* planes, float scale);
}  // namespace avx2
#endif

#if defined(MFHAR_HAVE_NEON)
namespace neon {
void iou_one_to_many(const Box& query, BoxColumnsView boxes, double* out);
void rgb_to_planar(const std::uint8_t* rgb, std::size_t pixels, float* planes, float scale);
}  // namespace neon
#endif

}  // namespace mfhar::simd
