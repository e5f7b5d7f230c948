// Compiled with -mavx2 only; dispatch guarantees the CPU supports it before
// any function here runs.

#include <immintrin.h>

#include <array>

#include "mfhar/simd/kernels.hpp"

namespace mfhar::simd::avx2 {

void iou_one_to_many(const Box& query, BoxColumnsView boxes, double* out) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d qx = _mm256_set1_pd(query.x());
    const __m256d qy = _mm256_set1_pd(query.y());
    const __m256d qr = _mm256_set1_pd(query.right());
    const __m256d qb = _mm256_set1_pd(query.bottom());
    const __m256d qarea = _mm256_set1_pd((query.right() - query.x()) * (query.bottom() - query.y()));

    std::size_t i = 0;
    for (; i + 4 <= boxes.size; i += 4) {
        const __m256d bx = _mm256_loadu_pd(boxes.x + i);
        const __m256d by = _mm256_loadu_pd(boxes.y + i);
        const __m256d br = _mm256_add_pd(bx, _mm256_loadu_pd(boxes.w + i));
        const __m256d bb = _mm256_add_pd(by, _mm256_loadu_pd(boxes.h + i));
        const __m256d iw =
            _mm256_max_pd(zero, _mm256_sub_pd(_mm256_min_pd(qr, br), _mm256_max_pd(qx, bx)));
        const __m256d ih =
            _mm256_max_pd(zero, _mm256_sub_pd(_mm256_min_pd(qb, bb), _mm256_max_pd(qy, by)));
        const __m256d inter = _mm256_mul_pd(iw, ih);
        const __m256d uni = _mm256_sub_pd(_mm256_add_pd(qarea, _mm256_mul_pd(_mm256_sub_pd(br, bx), _mm256_sub_pd(bb, by))), inter);
        _mm256_storeu_pd(out + i, _mm256_div_pd(inter, uni));
    }
    if (i < boxes.size) {
        const BoxColumnsView tail{boxes.x + i, boxes.y + i, boxes.w + i, boxes.h + i,
                                  boxes.size - i};
        scalar::iou_one_to_many(query, tail, out + i);
    }
}

namespace {

// pshufb masks selecting channel `c` from three consecutive 16-byte blocks of
// interleaved RGB (48 bytes = 16 pixels). Mask k for block k places the bytes
// it owns into their pixel slot and zeroes the rest (high bit set).
struct ChannelMasks {
    std::array<std::array<std::int8_t, 16>, 3> block;
};

constexpr ChannelMasks make_masks(int channel) {
    ChannelMasks m{};
    for (auto& blk : m.block) {
        for (auto& b : blk) {
            b = static_cast<std::int8_t>(0x80);
        }
    }
    for (int pixel = 0; pixel < 16; ++pixel) {
        const int offset = 3 * pixel + channel;
        m.block[static_cast<std::size_t>(offset / 16)][static_cast<std::size_t>(pixel)] =
            static_cast<std::int8_t>(offset % 16);
    }
    return m;
}

constexpr std::array<ChannelMasks, 3> kMasks{make_masks(0), make_masks(1), make_masks(2)};

inline __m128i gather_channel(__m128i a, __m128i b, __m128i c, const ChannelMasks& m) {
    const __m128i ma = _mm_loadu_si128(reinterpret_cast<const __m128i*>(m.block[0].data()));
    const __m128i mb = _mm_loadu_si128(reinterpret_cast<const __m128i*>(m.block[1].data()));
    const __m128i mc = _mm_loadu_si128(reinterpret_cast<const __m128i*>(m.block[2].data()));
    return _mm_or_si128(_mm_or_si128(_mm_shuffle_epi8(a, ma), _mm_shuffle_epi8(b, mb)),
                        _mm_shuffle_epi8(c, mc));
}

inline void store_scaled(__m128i bytes, float* dst, __m256 scale) {
    const __m256 lo = _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(bytes));
    const __m256 hi = _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(_mm_srli_si128(bytes, 8)));
    _mm256_storeu_ps(dst, _mm256_mul_ps(lo, scale));
    _mm256_storeu_ps(dst + 8, _mm256_mul_ps(hi, scale));
}

}  // namespace

void rgb_to_planar(const std::uint8_t* rgb, std::size_t pixels, float* planes, float scale) {
    float* r = planes;
    float* g = planes + pixels;
    float* b = planes + 2 * pixels;
    const __m256 vscale = _mm256_set1_ps(scale);

    std::size_t i = 0;
    for (; i + 16 <= pixels; i += 16) {
        const std::uint8_t* src = rgb + 3 * i;
        const __m128i b0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(src));
        const __m128i b1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(src + 16));
        const __m128i b2 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(src + 32));
        store_scaled(gather_channel(b0, b1, b2, kMasks[0]), r + i, vscale);
        store_scaled(gather_channel(b0, b1, b2, kMasks[1]), g + i, vscale);
        store_scaled(gather_channel(b0, b1, b2, kMasks[2]), b + i, vscale);
    }
    for (; i < pixels; ++i) {
        r[i] = static_cast<float>(rgb[3 * i]) * scale;
        g[i] = static_cast<float>(rgb[3 * i + 1]) * scale;
        b[i] = static_cast<float>(rgb[3 * i + 2]) * scale;
    }
}

}  // namespace mfhar::simd::avx2
