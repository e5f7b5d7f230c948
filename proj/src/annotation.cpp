#include "mfhar/annotation.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "mfhar/error.hpp"
#include "text_util.hpp"

namespace mfhar {

using nlohmann::json;

namespace {

int count_visible(const KeypointPerson& p, std::initializer_list<Joint> joints, int level) {
    int n = 0;
    for (Joint j : joints) {
        if (p.at(j).v >= level) ++n;
    }
    return n;
}

}  // namespace

BodyForm derive_form(const KeypointPerson& p, const FormRules& r) {
    using J = Joint;
    const int lvl = r.visible_level;
    const bool whole = count_visible(p, {J::LeftHip, J::RightHip}, lvl) >= r.whole_min_hips &&
                       count_visible(p, {J::LeftKnee, J::RightKnee}, lvl) >= r.whole_min_knees &&
                       count_visible(p, {J::LeftAnkle, J::RightAnkle}, lvl) >= r.whole_min_ankles &&
                       count_visible(p, {J::LeftShoulder, J::RightShoulder}, lvl) >= r.whole_min_shoulders;
    if (whole) {
        return BodyForm::Whole;
    }
    const bool upper =
        count_visible(p, {J::Nose, J::LeftEye, J::RightEye, J::LeftEar, J::RightEar}, lvl) >= r.upper_min_head &&
        count_visible(p, {J::LeftShoulder, J::RightShoulder}, lvl) >= r.upper_min_shoulders;
    return upper ? BodyForm::Upper : BodyForm::Part;
}

void StatsReport::add(BodyForm form) noexcept {
    switch (form) {
        case BodyForm::Whole:
            ++whole;
            break;
        case BodyForm::Upper:
            ++upper;
            break;
        case BodyForm::Part:
            ++part;
            break;
    }
}

StatsReport& StatsReport::operator+=(const StatsReport& o) noexcept {
    whole += o.whole;
    upper += o.upper;
    part += o.part;
    warnings += o.warnings;
    return *this;
}

std::string StatsReport::to_json() const {
    const json j = {{"whole", whole}, {"upper", upper}, {"part", part}, {"warnings", warnings}};
    return j.dump(2) + "\n";
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(path + "." + key, "missing field");
    }
    return *it;
}

std::int64_t require_int(const json& obj, const char* key, const std::string& path) {
    const auto& v = require(obj, key, path);
    if (!v.is_number_integer()) {
        throw ParseError(path + "." + key, "expected an integer");
    }
    return v.get<std::int64_t>();
}

std::optional<std::int64_t> person_category(const json& root) {
    const auto it = root.find("categories");
    if (it == root.end() || !it->is_array()) return std::nullopt;
    for (const auto& cat : *it) {
        if (cat.is_object() && cat.value("name", "") == "person" && cat.contains("id") &&
            cat["id"].is_number_integer()) {
            return cat["id"].get<std::int64_t>();
        }
    }
    return std::nullopt;
}

}  // namespace

ConversionResult convert_dataset(std::string_view coco_json, const FormRules& rules) {
    json root;
    try {
        root = json::parse(coco_json);
    } catch (const json::parse_error& e) {
        throw ParseError("$", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ParseError("$", "expected a JSON object");
    }
    ConversionResult out;
    const auto anns = root.find("annotations");
    if (anns == root.end()) {
        return out;
    }
    if (!anns->is_array()) {
        throw ParseError("$.annotations", "expected an array");
    }
    const auto person_id = person_category(root);

    for (std::size_t i = 0; i < anns->size(); ++i) {
        const std::string path = "$.annotations[" + std::to_string(i) + "]";
        const json& a = (*anns)[i];
        if (!a.is_object()) throw ParseError(path, "expected an object");
        if (person_id && a.contains("category_id") && a["category_id"] != *person_id) {
            continue;
        }

        KeypointPerson person;
        person.annotation_id = require_int(a, "id", path);
        person.image_id = require_int(a, "image_id", path);
        const auto& bbox = require(a, "bbox", path);
        if (!bbox.is_array() || bbox.size() != 4 ||
            !std::all_of(bbox.begin(), bbox.end(), [](const json& v) { return v.is_number(); })) {
            throw ParseError(path + ".bbox", "expected [x, y, w, h]");
        }
        try {
            person.bbox = Box(bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                              bbox[3].get<double>());
        } catch (const InvalidBoxError& e) {
            throw ParseError(path + ".bbox", e.what());
        }

        bool labeled = false;
        if (const auto kp = a.find("keypoints"); kp != a.end()) {
            if (!kp->is_array() || kp->size() != 3 * kJointCount) {
                throw ParseError(path + ".keypoints", "expected 51 numbers");
            }
            for (std::size_t j = 0; j < kJointCount; ++j) {
                const auto& x = (*kp)[3 * j];
                const auto& y = (*kp)[3 * j + 1];
                const auto& v = (*kp)[3 * j + 2];
                if (!x.is_number() || !y.is_number() || !v.is_number_integer()) {
                    throw ParseError(path + ".keypoints[" + std::to_string(3 * j) + "]", "expected numbers");
                }
                const auto vis = v.get<std::int64_t>();
                if (vis < 0 || vis > 2) {
                    throw ParseError(path + ".keypoints[" + std::to_string(3 * j + 2) + "]",
                                     "visibility must be 0, 1 or 2");
                }
                person.keypoints[j] = Keypoint{x.get<double>(), y.get<double>(), static_cast<int>(vis)};
                labeled = labeled || vis > 0;
            }
        }

        BodyForm form = BodyForm::Part;
        if (labeled) {
            form = derive_form(person, rules);
        } else {
            ++out.stats.warnings;
            out.warnings.push_back("annotation " + std::to_string(person.annotation_id) +
                                   " has no labeled keypoints; treated as part body");
        }
        out.stats.add(form);
        out.records.push_back(AnnotationRecord{person.image_id, person.bbox, form, person.annotation_id});
    }
    return out;
}

std::string format_records(std::span<const AnnotationRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += std::to_string(r.image_id);
        out += ' ';
        out += to_string(r.form);
        for (double v : {r.bbox.x(), r.bbox.y(), r.bbox.w(), r.bbox.h()}) {
            out += ' ';
            out += detail::format_double(v);
        }
        out += ' ';
        out += std::to_string(r.source_annotation_id);
        out += '\n';
    }
    return out;
}

std::vector<AnnotationRecord> parse_records(std::string_view text) {
    std::vector<AnnotationRecord> out;
    detail::for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        const std::string where = "line " + std::to_string(line_no);
        if (f.size() != 7) throw ParseError(where, "expected 7 fields");
        const auto form = parse_body_form(f[1]);
        if (!form) throw ParseError(where, "unknown body form '" + std::string(f[1]) + "'");
        try {
            out.push_back(AnnotationRecord{
                detail::parse_int(f[0], where, "image id"),
                Box(detail::parse_double(f[2], where, "x"), detail::parse_double(f[3], where, "y"),
                    detail::parse_double(f[4], where, "w"), detail::parse_double(f[5], where, "h")),
                *form, detail::parse_int(f[6], where, "annotation id")});
        } catch (const InvalidBoxError& e) {
            throw ParseError(where, e.what());
        }
    });
    return out;
}

std::optional<BodyForm> subset_form(std::string_view action_class) noexcept {
    if (action_class == "stand" || action_class == "jump" || action_class == "fall") return BodyForm::Whole;
    if (action_class == "sleep" || action_class == "sit") return BodyForm::Upper;
    return std::nullopt;
}

ActionSubsets emit_action_subsets(std::span<const AnnotationRecord> records, std::string_view sidecar) {
    std::map<std::int64_t, std::string> labels;
    detail::for_each_record(sidecar, [&](std::size_t line_no, const std::vector<std::string_view>& f) {
        const std::string where = "line " + std::to_string(line_no);
        if (f.size() != 2) throw ParseError(where, "expected '<annotation_id> <action_class>'");
        if (!subset_form(f[1])) {
            throw ParseError(where, "unknown action class '" + std::string(f[1]) + "'");
        }
        labels.insert_or_assign(detail::parse_int(f[0], where, "annotation id"), std::string(f[1]));
    });

    ActionSubsets out;
    std::set<std::int64_t> seen;
    for (const auto& r : records) {
        const auto it = labels.find(r.source_annotation_id);
        if (it == labels.end()) continue;
        seen.insert(r.source_annotation_id);
        const auto want = *subset_form(it->second);
        if (r.form != want) {
            out.mismatches.push_back(SubsetMismatch{
                r.source_annotation_id, it->second,
                "class '" + it->second + "' needs a " + std::string(to_string(want)) + " body, record is " +
                    std::string(to_string(r.form))});
            continue;
        }
        out.manifests[it->second].push_back(r);
    }
    for (const auto& [id, cls] : labels) {
        if (!seen.contains(id)) {
            out.mismatches.push_back(SubsetMismatch{id, cls, "no such annotation"});
        }
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

ConvertOutputs convert_files(const std::filesystem::path& coco_path, const std::filesystem::path& out_dir,
                             const FormRules& rules, const std::optional<std::filesystem::path>& sidecar) {
    ConvertOutputs out;
    out.result = convert_dataset(detail::read_text_file(coco_path), rules);
    std::filesystem::create_directories(out_dir);
    write_file(out_dir / "labels.txt", format_records(out.result.records));
    write_file(out_dir / "stats.json", out.result.stats.to_json());
    if (sidecar) {
        out.subsets = emit_action_subsets(out.result.records, detail::read_text_file(*sidecar));
        const auto dir = out_dir / "subsets";
        std::filesystem::create_directories(dir);
        for (const auto& [cls, recs] : out.subsets->manifests) {
            write_file(dir / (cls + ".txt"), format_records(recs));
        }
    }
    return out;
}

}  // namespace mfhar
