#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mfhar/error.hpp"
#include "mfhar/geometry.hpp"
#include "support/oracles.hpp"

using namespace mfhar;

TEST(Box, RejectsNonPositiveExtent) {
    EXPECT_THROW(Box(0, 0, 0, 5), InvalidBoxError);
    EXPECT_THROW(Box(0, 0, 5, -1), InvalidBoxError);
    EXPECT_THROW(Box(std::numeric_limits<double>::quiet_NaN(), 0, 1, 1), InvalidBoxError);
    EXPECT_THROW(Box(0, std::numeric_limits<double>::infinity(), 1, 1), InvalidBoxError);
    EXPECT_NO_THROW(Box(-5, -5, 0.5, 0.5));
}

TEST(Box, CornersAndArea) {
    const auto b = Box::from_corners(2, 3, 12, 23);
    EXPECT_EQ(b, Box(2, 3, 10, 20));
    EXPECT_DOUBLE_EQ(b.right(), 12);
    EXPECT_DOUBLE_EQ(b.bottom(), 23);
    EXPECT_DOUBLE_EQ(b.area(), 200);
}

TEST(Iou, IdenticalBoxesGiveOne) { EXPECT_EQ(iou(Box(0, 0, 10, 10), Box(0, 0, 10, 10)), 1.0); }

TEST(Iou, DisjointBoxesGiveZero) { EXPECT_EQ(iou(Box(0, 0, 10, 10), Box(20, 20, 5, 5)), 0.0); }

TEST(Iou, HalfShiftedBoxesGiveOneThird) {
    const Box a(0, 0, 10, 10), b(5, 0, 10, 10);
    EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
    EXPECT_NEAR(oracle::raster_iou(a, b, 30), 1.0 / 3.0, 2.0 / 900.0);
}

TEST(Iou, TouchingEdgesDoNotOverlap) { EXPECT_EQ(iou(Box(0, 0, 10, 10), Box(10, 0, 10, 10)), 0.0); }

TEST(Iou, MatchesRasterOracleOnRandomGridBoxes) {
    constexpr int kGrid = 32;
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> coord(0, kGrid - 1);
    auto random_box = [&] {
        const int x = coord(rng), y = coord(rng);
        std::uniform_int_distribution<int> w(1, kGrid - x), h(1, kGrid - y);
        return Box(x, y, w(rng), h(rng));
    };
    for (int i = 0; i < 1000; ++i) {
        const Box a = random_box(), b = random_box();
        EXPECT_NEAR(iou(a, b), oracle::raster_iou(a, b, kGrid), 2.0 / (kGrid * kGrid));
    }
}

TEST(Iou, SymmetricAndSelfIdentityOnRandomRealBoxes) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> pos(-100, 100), ext(0.01, 80);
    for (int i = 0; i < 2000; ++i) {
        const Box a(pos(rng), pos(rng), ext(rng), ext(rng));
        const Box b(pos(rng), pos(rng), ext(rng), ext(rng));
        EXPECT_EQ(iou(a, b), iou(b, a));
        EXPECT_EQ(iou(a, a), 1.0);
        const double v = iou(a, b);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Containment, UsesSmallerArea) {
    EXPECT_DOUBLE_EQ(containment(Box(0, 0, 100, 100), Box(10, 10, 20, 20)), 1.0);
    EXPECT_DOUBLE_EQ(containment(Box(0, 0, 10, 10), Box(5, 0, 10, 10)), 0.5);
}

TEST(Letterbox, IdentityFit) {
    const auto t = letterbox_fit({640, 640}, {640, 640});
    EXPECT_EQ(t.scale, 1.0);
    EXPECT_EQ(t.pad_x, 0);
    EXPECT_EQ(t.pad_y, 0);
}

TEST(Letterbox, WideSourcePadsVertically) {
    const auto t = letterbox_fit({1280, 720}, {640, 640});
    EXPECT_EQ(t.scale, 0.5);
    EXPECT_EQ(t.pad_x, 0);
    EXPECT_EQ(t.pad_y, 140);
    EXPECT_EQ(t.scaled_w, 640);
    EXPECT_EQ(t.scaled_h, 360);
}

TEST(Letterbox, TallSourcePadsHorizontally) {
    const auto t = letterbox_fit({320, 640}, {640, 640});
    EXPECT_EQ(t.scale, 1.0);
    EXPECT_EQ(t.pad_x, 160);
    EXPECT_EQ(t.pad_y, 0);
}

TEST(Letterbox, OddRemainderGoesRightAndBottom) {
    const auto t = letterbox_fit({100, 99}, {100, 100});
    EXPECT_EQ(t.scaled_h, 99);
    EXPECT_EQ(t.pad_y, 0);  // 1 spare row, all of it below
    const auto u = letterbox_fit({97, 100}, {100, 100});
    EXPECT_EQ(u.pad_x, 1);  // 3 spare columns: 1 left, 2 right
}

TEST(Letterbox, RejectsNonPositiveSizes) {
    EXPECT_THROW(letterbox_fit({0, 10}, {10, 10}), PreconditionError);
    EXPECT_THROW(letterbox_fit({10, 10}, {10, -1}), PreconditionError);
}

TEST(Letterbox, IsotropicOnRandomSizes) {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> dim(1, 4000);
    for (int i = 0; i < 1000; ++i) {
        const Extent src{double(dim(rng)), double(dim(rng))};
        const Extent dst{double(dim(rng)), double(dim(rng))};
        const auto t = letterbox_fit(src, dst);
        EXPECT_NEAR((src.w * t.scale) / (src.h * t.scale), src.w / src.h, 1e-9 * (src.w / src.h));
        EXPECT_GE(t.pad_x, 0);
        EXPECT_GE(t.pad_y, 0);
        EXPECT_LE(t.scaled_w + 2 * t.pad_x, int(dst.w));
        EXPECT_LE(t.scaled_h + 2 * t.pad_y, int(dst.h));
    }
}

TEST(MapBox, IdentityTransformKeepsBox) {
    const auto t = letterbox_fit({640, 640}, {640, 640});
    EXPECT_EQ(map_box_to_source(Box(10, 20, 30, 40), t), Box(10, 20, 30, 40));
}

TEST(MapBox, InvertsWideLetterbox) {
    const auto t = letterbox_fit({1280, 720}, {640, 640});
    EXPECT_EQ(map_box_to_source(Box(0, 140, 640, 360), t), Box(0, 0, 1280, 720));
}

TEST(MapBox, ClampsToSource) {
    const auto t = letterbox_fit({1280, 720}, {640, 640});
    EXPECT_EQ(map_box_to_source(Box(-20, 100, 100, 100), t), Box(0, 0, 160, 120));
}

TEST(MapBox, PaddingOnlyBoxIsInvalidDetection) {
    const auto t = letterbox_fit({1280, 720}, {640, 640});
    EXPECT_THROW(map_box_to_source(Box(10, 10, 100, 100), t), InvalidDetectionError);
}

TEST(MapBox, RoundTripOnRandomInImageBoxes) {
    std::mt19937_64 rng(14);
    std::uniform_int_distribution<int> dim(16, 4000);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Extent src{double(dim(rng)), double(dim(rng))};
        const auto t = letterbox_fit(src, {640, 640});
        const double x = unit(rng) * (src.w - 1), y = unit(rng) * (src.h - 1);
        const double w = std::max(0.5, unit(rng) * (src.w - x)), h = std::max(0.5, unit(rng) * (src.h - y));
        const Box b(x, y, std::min(w, src.w - x), std::min(h, src.h - y));
        const Box back = map_box_to_source(t.to_canvas(b), t);
        EXPECT_NEAR(back.x(), b.x(), 1e-6);
        EXPECT_NEAR(back.y(), b.y(), 1e-6);
        EXPECT_NEAR(back.right(), b.right(), 1e-6);
        EXPECT_NEAR(back.bottom(), b.bottom(), 1e-6);
    }
}

TEST(CropGeometry, MatchingAspectFillsCanvas) {
    const auto t = classifier_crop_geometry(Box(5, 5, 40, 120));
    EXPECT_DOUBLE_EQ(t.scale, 3.2);
    EXPECT_EQ(t.pad_x, 0);
    EXPECT_EQ(t.pad_y, 0);
}

TEST(CropGeometry, SquareBoxIsPaddedVertically) {
    const auto t = classifier_crop_geometry(Box(0, 0, 100, 100));
    EXPECT_DOUBLE_EQ(t.scale, 1.28);
    EXPECT_EQ(t.pad_x, 0);
    EXPECT_EQ(t.pad_y, 128);
}

TEST(CropGeometry, TallBoxIsHeightLimited) {
    const auto t = classifier_crop_geometry(Box(0, 0, 10, 90));
    EXPECT_DOUBLE_EQ(t.scale, 384.0 / 90.0);
    EXPECT_EQ(t.scaled_h, 384);
    EXPECT_EQ(t.scaled_w, 43);
    EXPECT_EQ(t.pad_x, (128 - 43) / 2);
}
