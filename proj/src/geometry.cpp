#include "mfhar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfhar/error.hpp"

namespace mfhar {

Box::Box(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
        throw InvalidBoxError("box coordinates must be finite");
    }
    if (!(w > 0.0) || !(h > 0.0)) {
        throw InvalidBoxError("box extent must be positive, got w=" + std::to_string(w) +
                              " h=" + std::to_string(h));
    }
}

Box Box::from_corners(double x1, double y1, double x2, double y2) {
    return Box(x1, y1, x2 - x1, y2 - y1);
}

double intersection_area(const Box& a, const Box& b) noexcept {
    const double iw = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x(), b.x()));
    const double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y()));
    return iw * ih;
}

// The SIMD IoU kernels evaluate this exact operation sequence; keep them in sync.
// Area from the corner spans rather than w*h, so that iou(a, a) is exactly 1:
// (x + w) - x need not round back to w.
static double span_area(const Box& b) noexcept { return (b.right() - b.x()) * (b.bottom() - b.y()); }

double iou(const Box& a, const Box& b) noexcept {
    const double inter = intersection_area(a, b);
    const double uni = span_area(a) + span_area(b) - inter;
    return inter / uni;
}

double containment(const Box& a, const Box& b) noexcept {
    return intersection_area(a, b) / std::min(span_area(a), span_area(b));
}

Box LetterboxTransform::to_canvas(const Box& source_box) const {
    return Box(source_box.x() * scale + pad_x, source_box.y() * scale + pad_y,
               source_box.w() * scale, source_box.h() * scale);
}

LetterboxTransform letterbox_fit(Extent src, Extent dst) {
    if (!(src.w > 0.0) || !(src.h > 0.0) || !(dst.w > 0.0) || !(dst.h > 0.0)) {
        throw PreconditionError("letterbox dimensions must be positive");
    }
    LetterboxTransform t;
    t.src_size = src;
    t.dst_size = dst;
    t.scale = std::min(dst.w / src.w, dst.h / src.h);
    const int dst_w = static_cast<int>(std::lround(dst.w));
    const int dst_h = static_cast<int>(std::lround(dst.h));
    t.scaled_w = std::clamp(static_cast<int>(std::lround(src.w * t.scale)), 1, dst_w);
    t.scaled_h = std::clamp(static_cast<int>(std::lround(src.h * t.scale)), 1, dst_h);
    t.pad_x = (dst_w - t.scaled_w) / 2;
    t.pad_y = (dst_h - t.scaled_h) / 2;
    return t;
}

Box map_box_to_source(const Box& canvas_box, const LetterboxTransform& t) {
    const double x1 = std::clamp((canvas_box.x() - t.pad_x) / t.scale, 0.0, t.src_size.w);
    const double y1 = std::clamp((canvas_box.y() - t.pad_y) / t.scale, 0.0, t.src_size.h);
    const double x2 = std::clamp((canvas_box.right() - t.pad_x) / t.scale, 0.0, t.src_size.w);
    const double y2 = std::clamp((canvas_box.bottom() - t.pad_y) / t.scale, 0.0, t.src_size.h);
    if (!(x2 > x1) || !(y2 > y1)) {
        throw InvalidDetectionError("box lies outside the source frame after unmapping");
    }
    return Box::from_corners(x1, y1, x2, y2);
}

LetterboxTransform classifier_crop_geometry(const Box& box, Extent target) {
    return letterbox_fit(Extent{box.w(), box.h()}, target);
}

}  // namespace mfhar
