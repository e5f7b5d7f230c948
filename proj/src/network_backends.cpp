// ONNX-backed detector and classifier adapters (OpenCV dnn).

#include <algorithm>
#include <cmath>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/dnn.hpp>

#include "mfhar/classification.hpp"
#include "mfhar/detection.hpp"
#include "mfhar/error.hpp"

namespace mfhar {

namespace {

constexpr int kDetectorRowWidth = 4 + 1 + 3;

std::string shape_string(std::span<const int> shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out << (i ? ", " : "") << shape[i];
    }
    out << ']';
    return out.str();
}

cv::dnn::Net load_net(const std::filesystem::path& path, const char* role) {
    if (!std::filesystem::exists(path)) {
        throw ModelLoadError(std::string(role) + " model not found: " + path.string());
    }
    try {
        auto net = cv::dnn::readNetFromONNX(path.string());
        if (net.empty()) {
            throw ModelLoadError(std::string(role) + " model is empty: " + path.string());
        }
        net.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
        net.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
        return net;
    } catch (const cv::Exception& e) {
        throw ModelLoadError(std::string("cannot load ") + role + " model " + path.string() + ": " + e.what());
    }
}

// 1x3xHxW float blob of an RGB image, values in [0, 1].
cv::Mat make_blob(const Image& img) {
    const int dims[] = {1, 3, img.height(), img.width()};
    cv::Mat blob(4, dims, CV_32F);
    const auto planes = to_planar_unit(img);
    std::copy(planes.begin(), planes.end(), blob.ptr<float>());
    return blob;
}

std::vector<int> mat_shape(const cv::Mat& m) {
    std::vector<int> shape(static_cast<std::size_t>(m.dims));
    for (int i = 0; i < m.dims; ++i) shape[static_cast<std::size_t>(i)] = m.size[i];
    return shape;
}

}  // namespace

struct NetworkDetector::Impl {
    cv::dnn::Net net;
    DetectorConfig config;
};

NetworkDetector::NetworkDetector(const std::filesystem::path& model_path, DetectorConfig config)
    : impl_(std::make_unique<Impl>(Impl{load_net(model_path, "detector"), config})) {
    // Probe once so that layout problems surface at load time, not mid-stream.
    const auto probe = Image::filled(config.input_size, config.input_size,
                                     static_cast<std::uint8_t>(config.letterbox_fill));
    cv::Mat output;
    try {
        impl_->net.setInput(make_blob(probe));
        output = impl_->net.forward();
    } catch (const cv::Exception& e) {
        throw ModelLoadError("detector model " + model_path.string() + " rejects a " +
                    std::to_string(config.input_size) + "x" + std::to_string(config.input_size) +
                    " input: " + e.what());
    }
    decode(mat_shape(output), std::span<const float>(output.ptr<float>(), output.total()));
}

NetworkDetector::~NetworkDetector() = default;
NetworkDetector::NetworkDetector(NetworkDetector&&) noexcept = default;
NetworkDetector& NetworkDetector::operator=(NetworkDetector&&) noexcept = default;

std::vector<Candidate> NetworkDetector::decode(std::span<const int> shape, std::span<const float> data) {
    const bool rank_ok = shape.size() == 2 || (shape.size() == 3 && shape[0] == 1);
    if (!rank_ok || shape.back() != kDetectorRowWidth) {
        throw ShapeMismatchError("detector output layout mismatch: expected [1, N, 8] "
                                 "(cx, cy, w, h, objectness, 3 body-form scores), found " +
                                 shape_string(shape));
    }
    const std::size_t rows = static_cast<std::size_t>(shape[shape.size() - 2]);
    if (data.size() != rows * kDetectorRowWidth) {
        throw ShapeMismatchError("detector output holds " + std::to_string(data.size()) +
                                 " values for shape " + shape_string(shape));
    }
    // Class columns follow BodyForm's completeness order, most complete first.
    constexpr BodyForm kColumnForm[] = {BodyForm::Whole, BodyForm::Upper, BodyForm::Part};
    std::vector<Candidate> out;
    for (std::size_t r = 0; r < rows; ++r) {
        const float* row = data.data() + r * kDetectorRowWidth;
        const double w = row[2];
        const double h = row[3];
        if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(row[0]) || !std::isfinite(row[1])) continue;
        const auto best = static_cast<std::size_t>(std::max_element(row + 5, row + 8) - (row + 5));
        const double score = static_cast<double>(row[4]) * static_cast<double>(row[5 + best]);
        out.push_back(Candidate{Box(row[0] - w / 2.0, row[1] - h / 2.0, w, h), kColumnForm[best], score});
    }
    return out;
}

std::vector<Detection> NetworkDetector::detect(const Frame& frame) {
    const auto& cfg = impl_->config;
    const std::string id = frame.stream_id + "#" + std::to_string(frame.index);
    if (frame.image.empty()) {
        throw DetectionBackendError("frame " + id + " has no pixels");
    }
    const Extent input{double(cfg.input_size), double(cfg.input_size)};
    const auto transform = letterbox_fit(frame.image.extent(), input);
    const auto canvas = letterbox_image(frame.image, transform, static_cast<std::uint8_t>(cfg.letterbox_fill));

    cv::Mat output;
    try {
        impl_->net.setInput(make_blob(canvas));
        output = impl_->net.forward();
    } catch (const cv::Exception& e) {
        throw DetectionBackendError("inference failed on frame " + id + ": " + e.what());
    }
    const auto shape = mat_shape(output);
    const auto raw = decode(shape, std::span<const float>(output.ptr<float>(), output.total()));

    std::vector<Candidate> mapped;
    mapped.reserve(raw.size());
    for (const auto& c : raw) {
        try {
            mapped.push_back(Candidate{map_box_to_source(c.box, transform), c.form, c.score});
        } catch (const InvalidDetectionError&) {
            // entirely inside the letterbox padding
        }
    }
    return postprocess(mapped, cfg);
}

struct NetworkClassifier::Impl {
    cv::dnn::Net net;
};

NetworkClassifier::NetworkClassifier(const std::filesystem::path& model_path, LabelSet labels, Extent canvas)
    : Classifier(std::move(labels), canvas),
      impl_(std::make_unique<Impl>(Impl{load_net(model_path, "classifier")})) {
    const auto probe = Image::filled(static_cast<int>(canvas.w), static_cast<int>(canvas.h), 114);
    cv::Mat output;
    try {
        impl_->net.setInput(make_blob(probe));
        output = impl_->net.forward();
    } catch (const cv::Exception& e) {
        throw ModelLoadError("classifier model " + model_path.string() + " rejects the canvas: " + e.what());
    }
    if (output.total() != this->labels().size()) {
        throw ShapeMismatchError("classifier model " + model_path.string() + " emits " +
                                 std::to_string(output.total()) + " classes but the label set has " +
                                 std::to_string(this->labels().size()));
    }
}

NetworkClassifier::~NetworkClassifier() = default;

ClassDistribution NetworkClassifier::do_classify(const ClassifierInput& input) {
    cv::Mat output;
    try {
        impl_->net.setInput(make_blob(input.canvas));
        output = impl_->net.forward();
    } catch (const cv::Exception& e) {
        throw ClassifierBackendError("classifier inference failed on frame " + std::to_string(input.frame_index) +
                                     ": " + e.what());
    }
    return interpret_head(std::span<const float>(output.ptr<float>(), output.total()), labels().size());
}

}  // namespace mfhar
