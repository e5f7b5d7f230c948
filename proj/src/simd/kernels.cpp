#include "mfhar/simd/kernels.hpp"

#include <cstdlib>
#include <string>

#include "mfhar/error.hpp"

namespace mfhar::simd {

std::string_view to_string(Level level) noexcept {
    switch (level) {
        case Level::Scalar:
            return "scalar";
        case Level::Avx2:
            return "avx2";
        case Level::Neon:
            return "neon";
    }
    return "unknown";
}

BoxColumns::BoxColumns(std::span<const Box> boxes) {
    reserve(boxes.size());
    for (const auto& b : boxes) {
        push_back(b);
    }
}

void BoxColumns::reserve(std::size_t n) {
    x_.reserve(n);
    y_.reserve(n);
    w_.reserve(n);
    h_.reserve(n);
}

void BoxColumns::push_back(const Box& box) {
    x_.push_back(box.x());
    y_.push_back(box.y());
    w_.push_back(box.w());
    h_.push_back(box.h());
}

void BoxColumns::clear() noexcept {
    x_.clear();
    y_.clear();
    w_.clear();
    h_.clear();
}

BoxColumnsView BoxColumns::view() const noexcept {
    return BoxColumnsView{x_.data(), y_.data(), w_.data(), h_.data(), x_.size()};
}

namespace {

constexpr KernelTable kScalar{Level::Scalar, &scalar::iou_one_to_many, &scalar::rgb_to_planar};
#if defined(MFHAR_HAVE_AVX2)
constexpr KernelTable kAvx2{Level::Avx2, &avx2::iou_one_to_many, &avx2::rgb_to_planar};
#endif
#if defined(MFHAR_HAVE_NEON)
constexpr KernelTable kNeon{Level::Neon, &neon::iou_one_to_many, &neon::rgb_to_planar};
#endif

bool cpu_supports(Level level) noexcept {
    switch (level) {
        case Level::Scalar:
            return true;
        case Level::Avx2:
#if defined(MFHAR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Level::Neon:
#if defined(MFHAR_HAVE_NEON)
            return true;  // mandatory on AArch64
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& select_table() {
    const auto levels = available_levels();
    if (const char* forced = std::getenv("MFHAR_SIMD")) {
        for (Level level : levels) {
            if (to_string(level) == forced) {
                return *table_for(level);
            }
        }
    }
    return *table_for(levels.back());
}

}  // namespace

std::vector<Level> available_levels() {
    std::vector<Level> levels{Level::Scalar};
    for (Level level : {Level::Neon, Level::Avx2}) {
        if (cpu_supports(level)) {
            levels.push_back(level);
        }
    }
    return levels;
}

const KernelTable* table_for(Level level) noexcept {
    if (!cpu_supports(level)) {
        return nullptr;
    }
    switch (level) {
        case Level::Scalar:
            return &kScalar;
        case Level::Avx2:
#if defined(MFHAR_HAVE_AVX2)
            return &kAvx2;
#else
            return nullptr;
#endif
        case Level::Neon:
#if defined(MFHAR_HAVE_NEON)
            return &kNeon;
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable& active() {
    static const KernelTable& table = select_table();
    return table;
}

void iou_one_to_many(const Box& query, BoxColumnsView boxes, std::span<double> out) {
    if (out.size() < boxes.size) {
        throw PreconditionError("iou output span shorter than box set");
    }
    active().iou_one_to_many(query, boxes, out.data());
}

void rgb_to_planar(std::span<const std::uint8_t> rgb, std::span<float> planes, float scale) {
    if (rgb.size() % 3 != 0 || planes.size() < rgb.size()) {
        throw PreconditionError("rgb_to_planar: input must be whole RGB triplets and fit the output");
    }
    active().rgb_to_planar(rgb.data(), rgb.size() / 3, planes.data(), scale);
}

}  // namespace mfhar::simd
