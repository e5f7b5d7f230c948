#include "mfhar/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "mfhar/error.hpp"
#include "mfhar/simd/kernels.hpp"
#include "text_util.hpp"

namespace mfhar {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

std::string Ratio::percent() const {
    // Per-mille, rounded half up, in exact integer arithmetic.
    const auto n = static_cast<__int128>(num);
    const auto d = static_cast<__int128>(den);
    const auto permille = static_cast<std::int64_t>((2000 * n + d) / (2 * d));
    return std::to_string(permille / 10) + "." + std::to_string(permille % 10);
}

namespace {

std::optional<Ratio> ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return Ratio{num, den};
}

}  // namespace

MetricEntry metrics(const ConfusionCounts& c) {
    MetricEntry m;
    m.sensitivity = ratio(c.tp, c.tp + c.fn);
    m.specificity = ratio(c.tn, c.tn + c.fp);
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    return m;
}

ConfusionCounts match_detections(std::span<const Detection> predictions, std::span<const AnnotationRecord> truth,
                                 double iou_threshold, bool form_aware) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
        throw PreconditionError("iou threshold must lie in (0, 1)");
    }
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].confidence > predictions[b].confidence;
    });

    simd::BoxColumns gt_boxes;
    gt_boxes.reserve(truth.size());
    for (const auto& t : truth) gt_boxes.push_back(t.bbox);
    std::vector<double> overlap(truth.size());
    std::vector<char> taken(truth.size(), 0);

    ConfusionCounts c;
    for (std::size_t p : order) {
        const auto& pred = predictions[p];
        simd::iou_one_to_many(pred.box, gt_boxes.view(), overlap);
        std::optional<std::size_t> best;
        for (std::size_t g = 0; g < truth.size(); ++g) {
            if (taken[g] || !(overlap[g] > iou_threshold)) continue;
            if (form_aware && truth[g].form != pred.form) continue;
            if (!best || overlap[g] > overlap[*best]) best = g;
        }
        if (best) {
            taken[*best] = 1;
            ++c.tp;
        } else {
            ++c.fp;
        }
    }
    c.fn = static_cast<std::int64_t>(truth.size()) - c.tp;
    return c;
}

ConfusionCounts score_frames(std::span<const FrameLabel> predicted, std::span<const bool> truth) {
    if (predicted.size() != truth.size()) {
        throw LengthMismatchError("predicted labels cover " + std::to_string(predicted.size()) +
                                  " frames, ground truth " + std::to_string(truth.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool pos = predicted[i] == FrameLabel::Positive;
        if (truth[i]) {
            ++(pos ? c.tp : c.fn);
        } else {
            ++(pos ? c.fp : c.tn);
        }
    }
    return c;
}

std::string_view to_string(ScoringProtocol p) noexcept {
    return p == ScoringProtocol::Frame ? "frame" : "event";
}

std::optional<ScoringProtocol> parse_protocol(std::string_view s) noexcept {
    if (s == "frame") return ScoringProtocol::Frame;
    if (s == "event") return ScoringProtocol::Event;
    return std::nullopt;
}

std::vector<std::string> report_column_order(const MetricReport& report) {
    static const std::vector<std::string> kPreferred = {"fall", "sleep", "jump", "on_duty"};
    std::vector<std::string> cols;
    for (const auto& name : kPreferred) {
        if (report.actions.contains(name)) cols.push_back(name);
    }
    for (const auto& [name, _] : report.actions) {
        if (std::find(kPreferred.begin(), kPreferred.end(), name) == kPreferred.end()) cols.push_back(name);
    }
    return cols;
}

namespace {

std::string column_title(const std::string& action) {
    if (action == "on_duty") return "On-duty detection";
    std::string t = action;
    std::replace(t.begin(), t.end(), '_', ' ');
    if (!t.empty() && t[0] >= 'a' && t[0] <= 'z') t[0] = static_cast<char>(t[0] - 'a' + 'A');
    return t + " detection";
}

std::string cell(const std::optional<Ratio>& a, const std::optional<Ratio>& b) {
    constexpr const char* kAbsent = "—";
    return (a ? a->percent() : kAbsent) + std::string(" / ") + (b ? b->percent() : kAbsent);
}

// Display width, counting each UTF-8 code point once.
std::size_t display_width(const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

void append_row(std::string& out, const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += " | ";
        line += cells[i];
        if (i + 1 < cells.size()) line.append(widths[i] - display_width(cells[i]), ' ');
    }
    out += line;
    out += '\n';
}

}  // namespace

std::string render_table(const MetricReport& report) {
    const auto cols = report_column_order(report);
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Metric"});
    rows.push_back({"Precision / Recall"});
    rows.push_back({"Sensitivity / Specificity"});
    for (const auto& name : cols) {
        const auto& m = report.actions.at(name).metrics;
        rows[0].push_back(column_title(name));
        rows[1].push_back(cell(m.precision, m.recall));
        rows[2].push_back(cell(m.sensitivity, m.specificity));
    }
    if (cols.empty()) {
        return "Metric\n";
    }
    std::vector<std::size_t> widths(rows[0].size(), 0);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
    }
    std::string out;
    for (const auto& row : rows) append_row(out, row, widths);
    return out;
}

std::string render_json(const MetricReport& report) {
    using nlohmann::ordered_json;
    auto metric = [](const std::optional<Ratio>& r) -> ordered_json {
        if (!r) return nullptr;
        return ordered_json{{"value", r->value()}, {"num", r->num}, {"den", r->den}};
    };
    ordered_json actions = ordered_json::object();
    for (const auto& name : report_column_order(report)) {
        const auto& a = report.actions.at(name);
        actions[name] = ordered_json{
            {"counts", {{"tp", a.counts.tp}, {"fp", a.counts.fp}, {"tn", a.counts.tn}, {"fn", a.counts.fn}}},
            {"sensitivity", metric(a.metrics.sensitivity)},
            {"specificity", metric(a.metrics.specificity)},
            {"precision", metric(a.metrics.precision)},
            {"recall", metric(a.metrics.recall)},
            {"predicted_labels",
             {{"positive", a.predicted[0]}, {"negative", a.predicted[1]}, {"absent", a.predicted[2]}}},
            {"unscored_frames", a.unscored},
        };
    }
    const ordered_json root{
        {"protocol", std::string(to_string(report.protocol))},
        {"absent_scored_as", "negative"},
        {"actions", actions},
        {"warnings", report.warnings},
    };
    return root.dump(2) + "\n";
}

std::vector<TruthEntry> parse_ground_truth(std::string_view text) {
    std::vector<TruthEntry> out;
    detail::for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        const std::string where = "line " + std::to_string(line_no);
        if (f.size() != 3 && f.size() != 4) {
            throw ParseError(where, "expected '[<stream_id>] <frame_index> <action> <p|n>'");
        }
        const std::size_t o = f.size() - 3;
        TruthEntry e;
        if (o == 1) e.stream_id = std::string(f[0]);
        e.frame_index = detail::parse_int(f[o], where, "frame index");
        if (e.frame_index < 0) throw ParseError(where, "frame index must be non-negative");
        e.action = std::string(f[o + 1]);
        if (f[o + 2] == "p") {
            e.positive = true;
        } else if (f[o + 2] != "n") {
            throw ParseError(where, "label must be 'p' or 'n'");
        }
        out.push_back(std::move(e));
    });
    return out;
}

}  // namespace mfhar
