#include <algorithm>

#include "mfhar/simd/kernels.hpp"

namespace mfhar::simd::scalar {

void iou_one_to_many(const Box& query, BoxColumnsView boxes, double* out) {
    const double qx = query.x();
    const double qy = query.y();
    const double qr = query.right();
    const double qb = query.bottom();
    const double qarea = (qr - qx) * (qb - qy);
    for (std::size_t i = 0; i < boxes.size; ++i) {
        const double br = boxes.x[i] + boxes.w[i];
        const double bb = boxes.y[i] + boxes.h[i];
        const double iw = std::max(0.0, std::min(qr, br) - std::max(qx, boxes.x[i]));
        const double ih = std::max(0.0, std::min(qb, bb) - std::max(qy, boxes.y[i]));
        const double inter = iw * ih;
        const double uni = qarea + (br - boxes.x[i]) * (bb - boxes.y[i]) - inter;
        out[i] = inter / uni;
    }
}

void rgb_to_planar(const std::uint8_t* rgb, std::size_t pixels, float* planes, float scale) {
    float* r = planes;
    float* g = planes + pixels;
    float* b = planes + 2 * pixels;
    for (std::size_t i = 0; i < pixels; ++i) {
        r[i] = static_cast<float>(rgb[3 * i]) * scale;
        g[i] = static_cast<float>(rgb[3 * i + 1]) * scale;
        b[i] = static_cast<float>(rgb[3 * i + 2]) * scale;
    }
}

}  // namespace mfhar::simd::scalar
