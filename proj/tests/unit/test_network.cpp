#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "mfhar/classification.hpp"
#include "mfhar/detection.hpp"
#include "mfhar/error.hpp"

using namespace mfhar;

namespace {

const std::filesystem::path kModels = std::filesystem::path(MFHAR_SOURCE_DIR) / "tests" / "fixtures" / "models";

DetectorConfig small_input() {
    DetectorConfig c;
    c.input_size = 64;
    return c;
}

Image solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < px.size(); i += 3) {
        px[i] = r;
        px[i + 1] = g;
        px[i + 2] = b;
    }
    return Image(w, h, std::move(px));
}

}  // namespace

TEST(Decode, RowsBecomeCenteredCandidates) {
    const std::vector<int> shape = {1, 2, 8};
    const std::vector<float> data = {50, 60, 20, 40, 0.5f, 0.1f, 0.8f, 0.1f,  //
                                     10, 10, 0, 5, 0.9f, 1, 0, 0};            // zero width, skipped
    const auto c = NetworkDetector::decode(shape, data);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].box, Box(40, 40, 20, 40));
    EXPECT_EQ(c[0].form, BodyForm::Upper);
    EXPECT_DOUBLE_EQ(c[0].score, double(0.5f) * double(0.8f));
    const std::vector<int> flat = {2, 8};
    EXPECT_EQ(NetworkDetector::decode(flat, data).size(), 1u);
}

TEST(Decode, WrongLayoutIsShapeMismatch) {
    const std::vector<float> data(85 * 2, 0.0f);
    const std::vector<int> yolo = {1, 2, 85};
    try {
        NetworkDetector::decode(yolo, data);
        FAIL();
    } catch (const ShapeMismatchError& e) {
        EXPECT_NE(std::string(e.what()).find("[1, 2, 85]"), std::string::npos) << e.what();
    }
    const std::vector<int> batched = {2, 1, 8};
    EXPECT_THROW(NetworkDetector::decode(batched, std::vector<float>(16)), ShapeMismatchError);
    const std::vector<int> short_data = {1, 3, 8};
    EXPECT_THROW(NetworkDetector::decode(short_data, std::vector<float>(16)), ShapeMismatchError);
}

TEST(NetworkDetectorTest, MapsSuppressesAndFilters) {
    NetworkDetector det(kModels / "detector_64.onnx", small_input());
    // 640x480 into 64x64: scale 0.1, 8 rows of padding above.
    const auto out = det.detect(Frame{"cam", 0, 0, Image::filled(640, 480, 50)});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].form, BodyForm::Whole);
    EXPECT_NEAR(out[0].box.x(), 220, 1e-9);
    EXPECT_NEAR(out[0].box.y(), 40, 1e-9);
    EXPECT_NEAR(out[0].box.w(), 200, 1e-9);
    EXPECT_NEAR(out[0].box.h(), 400, 1e-9);
    EXPECT_NEAR(out[0].confidence, 0.81, 1e-6);
    EXPECT_EQ(out[1].form, BodyForm::Upper);
    EXPECT_NEAR(out[1].box.y(), 0, 1e-9);  // clamped out of the padding
    EXPECT_NEAR(out[1].box.h(), 60, 1e-9);
    // Same frame, same answer.
    EXPECT_EQ(det.detect(Frame{"cam", 1, 0, Image::filled(640, 480, 50)}), out);
}

TEST(NetworkDetectorTest, LoadErrors) {
    EXPECT_THROW(NetworkDetector(kModels / "missing.onnx", small_input()), ModelLoadError);
    const auto junk = std::filesystem::temp_directory_path() / "mfhar_junk.onnx";
    std::ofstream(junk) << "not a model";
    EXPECT_THROW(NetworkDetector(junk, small_input()), ModelLoadError);
    std::filesystem::remove(junk);
    EXPECT_THROW(NetworkDetector(kModels / "detector_85col.onnx", small_input()), ShapeMismatchError);
    // The model only accepts a 64x64 input.
    EXPECT_THROW(NetworkDetector(kModels / "detector_64.onnx", DetectorConfig{}), ModelLoadError);
}

TEST(NetworkClassifierTest, SoftmaxOverLogits) {
    NetworkClassifier clf(kModels / "classifier_3.onnx", LabelSet({"fall", "sit_on_furniture", "other"}, {"fall"}));
    const auto red = crop_to_canvas(solid(640, 480, 255, 0, 0), Box(0, 0, 40, 120), kClassifierCanvas, 114);
    const auto d = clf.classify({red, 0, 0});
    const std::vector<double> logits = {10, 0, 0};
    const auto want = softmax(logits);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(d.probabilities()[i], want[i], 1e-5);
    EXPECT_EQ(collapse(d, clf.labels()).top_label, "fall");
    const auto blue = crop_to_canvas(solid(640, 480, 0, 0, 255), Box(0, 0, 40, 120), kClassifierCanvas, 114);
    EXPECT_EQ(collapse(clf.classify({blue, 0, 0}), clf.labels()).top_label, "other");
    EXPECT_EQ(clf.classify({red, 0, 0}), d);
    EXPECT_THROW(clf.classify({Image::filled(64, 64, 0), 0, 0}), PreconditionError);
}

TEST(NetworkClassifierTest, ClassCountMismatchNamesBothCounts) {
    try {
        NetworkClassifier(kModels / "classifier_5.onnx", LabelSet({"fall", "sit_on_furniture", "other"}, {"fall"}));
        FAIL();
    } catch (const ShapeMismatchError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("5"), std::string::npos) << msg;
        EXPECT_NE(msg.find("3"), std::string::npos) << msg;
    }
    EXPECT_THROW(NetworkClassifier(kModels / "nope.onnx", LabelSet({"a", "b"}, {"a"})), ModelLoadError);
}
