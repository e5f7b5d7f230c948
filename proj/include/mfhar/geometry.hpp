#pragma once

#include <compare>

namespace mfhar {

/// Width/height pair in pixels. Real-valued so that box extents can be used
/// as letterbox sources (classifier crops).
struct Extent {
    double w = 0.0;
    double h = 0.0;

    bool operator==(const Extent&) const = default;
};

/// Axis-aligned half-open rectangle [x, x+w) x [y, y+h) in pixels.
///
/// Construction rejects non-finite coordinates and non-positive extents, so
/// every live Box is valid.
class Box {
public:
    Box(double x, double y, double w, double h);

    /// Builds a box from corner coordinates.
    static Box from_corners(double x1, double y1, double x2, double y2);

    double x() const noexcept { return x_; }
    double y() const noexcept { return y_; }
    double w() const noexcept { return w_; }
    double h() const noexcept { return h_; }
    double right() const noexcept { return x_ + w_; }
    double bottom() const noexcept { return y_ + h_; }
    double area() const noexcept { return w_ * h_; }

    bool operator==(const Box&) const = default;
    auto operator<=>(const Box&) const = default;

private:
    double x_;
    double y_;
    double w_;
    double h_;
};

/// Area of the overlap of two boxes (0 when disjoint).
double intersection_area(const Box& a, const Box& b) noexcept;

/// Intersection over union, in [0, 1]. Symmetric; iou(a, a) == 1 exactly.
double iou(const Box& a, const Box& b) noexcept;

/// Intersection area divided by the smaller box's area.
double containment(const Box& a, const Box& b) noexcept;

/// Aspect-preserving fit of a source extent into a fixed destination canvas.
///
/// The source is scaled isotropically by `scale`, rounded to whole pixels,
/// and placed at (`pad_x`, `pad_y`). Odd padding remainders sit on the
/// right/bottom edge.
struct LetterboxTransform {
    double scale = 1.0;
    int pad_x = 0;
    int pad_y = 0;
    Extent src_size;
    Extent dst_size;
    /// Pixel size of the scaled source inside the canvas.
    int scaled_w = 0;
    int scaled_h = 0;

    /// Forward mapping (source coordinates to canvas coordinates). No clamping.
    Box to_canvas(const Box& source_box) const;

    bool operator==(const LetterboxTransform&) const = default;
};

LetterboxTransform letterbox_fit(Extent src, Extent dst);

/// Inverse letterbox mapping clamped to the source frame.
///
/// Throws InvalidDetectionError when nothing of the box lies inside the frame.
Box map_box_to_source(const Box& canvas_box, const LetterboxTransform& t);

/// Default classifier canvas: 128 wide, 384 tall.
inline constexpr Extent kClassifierCanvas{128.0, 384.0};

/// Fit of a detection box into the classifier canvas.
LetterboxTransform classifier_crop_geometry(const Box& box, Extent target = kClassifierCanvas);

}  // namespace mfhar
