#include <arm_neon.h>

#include "mfhar/simd/kernels.hpp"

namespace mfhar::simd::neon {

void iou_one_to_many(const Box& query, BoxColumnsView boxes, double* out) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    const float64x2_t qx = vdupq_n_f64(query.x());
    const float64x2_t qy = vdupq_n_f64(query.y());
    const float64x2_t qr = vdupq_n_f64(query.right());
    const float64x2_t qb = vdupq_n_f64(query.bottom());
    const float64x2_t qarea = vdupq_n_f64((query.right() - query.x()) * (query.bottom() - query.y()));

    std::size_t i = 0;
    for (; i + 2 <= boxes.size; i += 2) {
        const float64x2_t bx = vld1q_f64(boxes.x + i);
        const float64x2_t by = vld1q_f64(boxes.y + i);
        const float64x2_t br = vaddq_f64(bx, vld1q_f64(boxes.w + i));
        const float64x2_t bb = vaddq_f64(by, vld1q_f64(boxes.h + i));
        const float64x2_t iw = vmaxq_f64(zero, vsubq_f64(vminq_f64(qr, br), vmaxq_f64(qx, bx)));
        const float64x2_t ih = vmaxq_f64(zero, vsubq_f64(vminq_f64(qb, bb), vmaxq_f64(qy, by)));
        const float64x2_t inter = vmulq_f64(iw, ih);
        const float64x2_t uni = vsubq_f64(vaddq_f64(qarea, vmulq_f64(vsubq_f64(br, bx), vsubq_f64(bb, by))), inter);
        vst1q_f64(out + i, vdivq_f64(inter, uni));
    }
    if (i < boxes.size) {
        const BoxColumnsView tail{boxes.x + i, boxes.y + i, boxes.w + i, boxes.h + i,
                                  boxes.size - i};
        scalar::iou_one_to_many(query, tail, out + i);
    }
}

namespace {

inline void store_scaled(uint8x16_t bytes, float* dst, float scale) {
    const uint16x8_t lo16 = vmovl_u8(vget_low_u8(bytes));
    const uint16x8_t hi16 = vmovl_u8(vget_high_u8(bytes));
    vst1q_f32(dst, vmulq_n_f32(vcvtq_f32_u32(vmovl_u16(vget_low_u16(lo16))), scale));
    vst1q_f32(dst + 4, vmulq_n_f32(vcvtq_f32_u32(vmovl_u16(vget_high_u16(lo16))), scale));
    vst1q_f32(dst + 8, vmulq_n_f32(vcvtq_f32_u32(vmovl_u16(vget_low_u16(hi16))), scale));
    vst1q_f32(dst + 12, vmulq_n_f32(vcvtq_f32_u32(vmovl_u16(vget_high_u16(hi16))), scale));
}

}  // namespace

void rgb_to_planar(const std::uint8_t* rgb, std::size_t pixels, float* planes, float scale) {
    float* r = planes;
    float* g = planes + pixels;
    float* b = planes + 2 * pixels;

    std::size_t i = 0;
    for (; i + 16 <= pixels; i += 16) {
        const uint8x16x3_t px = vld3q_u8(rgb + 3 * i);
        store_scaled(px.val[0], r + i, scale);
        store_scaled(px.val[1], g + i, scale);
        store_scaled(px.val[2], b + i, scale);
    }
    for (; i < pixels; ++i) {
        r[i] = static_cast<float>(rgb[3 * i]) * scale;
        g[i] = static_cast<float>(rgb[3 * i + 1]) * scale;
        b[i] = static_cast<float>(rgb[3 * i + 2]) * scale;
    }
}

}  // namespace mfhar::simd::neon
