#include "mfhar/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mfhar/error.hpp"
#include "text_util.hpp"

namespace mfhar {

using nlohmann::json;

LabelSet ClassifierConfig::label_set() const {
    return LabelSet(labels, std::set<std::string>(positive.begin(), positive.end()));
}

std::map<std::string, ClassifierConfig> default_classifiers() {
    std::map<std::string, ClassifierConfig> out;
    for (const char* name : {"fall", "sleep", "sit", "jump", "stand"}) {
        const auto labels = *default_label_set(name);
        ClassifierConfig c;
        c.labels = labels.labels();
        c.positive.assign(labels.positive().begin(), labels.positive().end());
        // Without a fixture every crop reads as the last (negative) class.
        c.fallback = "onehot:" + labels.labels().back();
        out.emplace(name, std::move(c));
    }
    return out;
}

std::filesystem::path ValidatedConfig::resolve(const std::string& path) const {
    if (path.empty() || path == "-") return path;
    const std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

// ---------------------------------------------------------------------------
// Schema

const std::vector<SchemaField>& config_schema() {
    static const std::vector<SchemaField> kSchema = {
        {"streams", "array", "[]", "input streams, processed one context each"},
        {"streams[].id", "string", "(required)", "unique stream identifier"},
        {"streams[].source", "object", "", "frame source"},
        {"streams[].source.kind", "string", "synthetic", "synthetic | directory | raw"},
        {"streams[].source.width", "int", "640", "synthetic frame width"},
        {"streams[].source.height", "int", "480", "synthetic frame height"},
        {"streams[].source.frames", "int", "0", "synthetic frame count (bench overrides it)"},
        {"streams[].source.gray", "int", "0", "synthetic pixel value 0..255"},
        {"streams[].source.fps", "number", "25", "frame rate used for timestamps"},
        {"streams[].source.path", "string", "\"\"", "directory with manifest.txt, or raw-protocol file ('-' = stdin)"},
        {"detector", "object", "", "multi-form person detector"},
        {"detector.backend", "string", "scripted", "scripted | network"},
        {"detector.fixture", "string", "\"\"", "scripted fixture path (empty = no detections)"},
        {"detector.model", "string", "\"\"", "ONNX model path for the network backend"},
        {"detector.input_size", "int", "640", "square network input size in pixels"},
        {"detector.score_threshold", "number", "0.25", "minimum candidate score, in (0, 1)"},
        {"detector.nms_iou_threshold", "number", "0.45", "per-form NMS IoU threshold, in (0, 1)"},
        {"detector.letterbox_fill", "int", "114", "gray level of letterbox padding"},
        {"registry", "array", "(default table)", "action routing rules; replaces the default table"},
        {"registry[].action", "string", "(required)", "lowercase action name"},
        {"registry[].forms", "array", "(required)", "eligible body forms: whole | upper | part"},
        {"registry[].handler", "string", "(required)", "'classifier <name>' or 'counter'"},
        {"classifiers", "object", "(default set)", "classifier bindings by name; replaces the default set"},
        {"classifiers.*.backend", "string", "scripted", "scripted | network"},
        {"classifiers.*.fixture", "string", "\"\"", "scripted fixture path"},
        {"classifiers.*.model", "string", "\"\"", "ONNX model path for the network backend"},
        {"classifiers.*.labels", "array", "(known actions)", "ordered class names"},
        {"classifiers.*.positive", "array", "(known actions)", "classes that mean the action is present"},
        {"classifiers.*.default", "string", "uniform", "scripted fallback: uniform | onehot:<label>"},
        {"classifiers.*.positive_mass_threshold", "number|null", "null",
         "if set, positive means positive-class mass >= threshold instead of argmax"},
        {"crop", "object", "", "classifier input canvas"},
        {"crop.width", "int", "128", "canvas width"},
        {"crop.height", "int", "384", "canvas height"},
        {"crop.fill", "int", "114", "gray level of canvas padding"},
        {"sampler", "object", "", "periodic sampling and majority window"},
        {"sampler.period", "int", "5", "process every Nth frame (frame_rate / 5 at 25 fps)"},
        {"sampler.window", "int", "5", "sampled frames per majority decision"},
        {"on_duty", "object", "", "person-count compliance"},
        {"on_duty.min", "int", "1", "minimum compliant count"},
        {"on_duty.max", "int|null", "null", "maximum compliant count (null = unbounded)"},
        {"on_duty.containment_threshold", "number", "0.7", "cross-form dedup containment threshold"},
        {"annotation", "object", "", "keypoint visibility rules for body-form labels"},
        {"annotation.visible_level", "int", "2", "minimum visibility flag that counts as seen"},
        {"annotation.whole_min_hips", "int", "1", "visible hips needed for whole body"},
        {"annotation.whole_min_knees", "int", "1", "visible knees needed for whole body"},
        {"annotation.whole_min_ankles", "int", "1", "visible ankles needed for whole body"},
        {"annotation.whole_min_shoulders", "int", "1", "visible shoulders needed for whole body"},
        {"annotation.upper_min_head", "int", "1", "visible nose/eyes/ears needed for upper body"},
        {"annotation.upper_min_shoulders", "int", "2", "visible shoulders needed for upper body"},
        {"sinks", "array", "[]", "event sinks besides the event log"},
        {"sinks[].kind", "string", "log", "log | webhook"},
        {"sinks[].path", "string", "\"\"", "JSON-lines file for log sinks"},
        {"sinks[].url", "string", "\"\"", "http://host:port/path for webhook sinks"},
        {"sinks[].actions", "array", "[]", "actions delivered (empty = all)"},
        {"sinks[].queue_capacity", "int", "64", "bounded queue length; overflow is dropped and counted"},
        {"sinks[].max_retries", "int", "3", "delivery retries before dropping"},
        {"sinks[].backoff_ms", "int", "50", "initial retry backoff, doubled per retry"},
        {"evaluation", "object", "", "offline scoring"},
        {"evaluation.iou_threshold", "number", "0.5", "detection matching IoU threshold"},
        {"evaluation.protocol", "string", "frame", "frame | event"},
    };
    return kSchema;
}

std::string render_schema() {
    std::ostringstream out;
    out << "Configuration is JSON. Every field is optional; relative paths resolve\n"
           "against the config file's directory.\n\n";
    std::size_t width = 0;
    for (const auto& f : config_schema()) width = std::max(width, f.path.size());
    for (const auto& f : config_schema()) {
        out << "  " << f.path << std::string(width - f.path.size() + 2, ' ') << f.type;
        if (!f.default_value.empty()) out << " = " << f.default_value;
        out << "\n      " << f.description << "\n";
    }
    return out.str();
}

const std::map<std::string, std::string>& default_provenance() {
    static const std::map<std::string, std::string> kNotes = {
        {"detector.input_size", "reference: 640x640 input of the reference multi-form detector"},
        {"crop.width", "reference: 384x128 (height x width) input of the reference action classifier"},
        {"crop.height", "reference: 384x128 (height x width) input of the reference action classifier"},
        {"detector.score_threshold", "decision: common one-stage detector convention"},
        {"detector.nms_iou_threshold", "decision: common one-stage detector convention"},
        {"detector.letterbox_fill", "decision: conventional gray letterbox padding"},
        {"crop.fill", "decision: mid-gray padding keeps posture undistorted"},
        {"sampler.period", "decision: frame_rate / 5 at a nominal 25 fps"},
        {"sampler.window", "decision: five samples per majority vote"},
        {"on_duty.min", "decision: at least one person on duty"},
        {"on_duty.containment_threshold", "decision: nested boxes of one person"},
        {"evaluation.iou_threshold", "decision: conventional detection matching threshold"},
        {"annotation.visible_level", "decision: only visible keypoints count"},
        {"annotation.whole_min_hips", "decision: torso and legs visible"},
        {"annotation.whole_min_knees", "decision: torso and legs visible"},
        {"annotation.whole_min_ankles", "decision: torso and legs visible"},
        {"annotation.whole_min_shoulders", "decision: torso and legs visible"},
        {"annotation.upper_min_head", "decision: head and shoulders visible"},
        {"annotation.upper_min_shoulders", "decision: head and shoulders visible"},
        {"sinks[].queue_capacity", "decision: bounded sink queue"},
        {"sinks[].max_retries", "decision: bounded delivery retries"},
        {"sinks[].backoff_ms", "decision: bounded delivery backoff"},
        {"streams[].source.fps", "decision: nominal camera frame rate"},
        {"streams[].source.width", "decision: synthetic frame size"},
        {"streams[].source.height", "decision: synthetic frame size"},
        {"streams[].source.frames", "decision: synthetic sources are empty unless sized"},
        {"streams[].source.gray", "decision: synthetic frames are black"},
    };
    return kNotes;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Reader {
public:
    std::vector<ConfigIssue> issues;

    void issue(std::string path, std::string message) { issues.push_back({std::move(path), std::move(message)}); }

    /// Flags keys of `obj` that the schema does not list under `schema_prefix`.
    void check_keys(const json& obj, const std::string& schema_prefix, const std::string& path) {
        std::set<std::string> allowed;
        const std::string lead = schema_prefix.empty() ? "" : schema_prefix + ".";
        for (const auto& f : config_schema()) {
            const std::string_view p = f.path;
            if (!p.starts_with(lead)) continue;
            auto rest = p.substr(lead.size());
            rest = rest.substr(0, std::min(rest.find('.'), rest.find('[')));
            if (!rest.empty() && rest != "*") allowed.emplace(rest);
        }
        for (const auto& [key, _] : obj.items()) {
            if (!allowed.contains(key)) issue(join(path, key), "unknown field");
        }
    }

    bool object_at(const json& parent, const char* key, const std::string& path, const json*& out) {
        const auto it = parent.find(key);
        if (it == parent.end()) return false;
        if (!it->is_object()) {
            issue(join(path, key), "expected an object");
            return false;
        }
        out = &*it;
        return true;
    }

    template <typename Int>
    void integer(const json& obj, const char* key, const std::string& path, Int& out, std::int64_t lo,
                 std::int64_t hi = std::numeric_limits<std::int32_t>::max()) {
        const auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!it->is_number_integer()) {
            issue(join(path, key), "expected an integer");
            return;
        }
        const auto v = it->get<std::int64_t>();
        if (v < lo || v > hi) {
            issue(join(path, key), "range error: " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                       std::to_string(hi) + "]");
            return;
        }
        out = static_cast<Int>(v);
    }

    /// Reads a number, checked by `ok`; `range` describes the accepted set.
    void number(const json& obj, const char* key, const std::string& path, double& out,
                const std::function<bool(double)>& ok, const char* range) {
        const auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!it->is_number()) {
            issue(join(path, key), "expected a number");
            return;
        }
        const double v = it->get<double>();
        if (!std::isfinite(v) || !ok(v)) {
            issue(join(path, key), std::string("range error: must lie in ") + range);
            return;
        }
        out = v;
    }

    void string(const json& obj, const char* key, const std::string& path, std::string& out) {
        const auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!it->is_string()) {
            issue(join(path, key), "expected a string");
            return;
        }
        out = it->get<std::string>();
    }

    void strings(const json& obj, const char* key, const std::string& path, std::vector<std::string>& out) {
        const auto it = obj.find(key);
        if (it == obj.end()) return;
        if (!it->is_array() ||
            !std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_string(); })) {
            issue(join(path, key), "expected an array of strings");
            return;
        }
        out = it->get<std::vector<std::string>>();
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }
};

bool in_open_unit(double v) { return v > 0.0 && v < 1.0; }

void read_streams(Reader& r, const json& root, PipelineConfig& cfg) {
    const auto it = root.find("streams");
    if (it == root.end()) return;
    if (!it->is_array()) {
        r.issue("streams", "expected an array");
        return;
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string path = "streams[" + std::to_string(i) + "]";
        const json& s = (*it)[i];
        if (!s.is_object()) {
            r.issue(path, "expected an object");
            continue;
        }
        r.check_keys(s, "streams[]", path);
        StreamConfig sc;
        r.string(s, "id", path, sc.id);
        if (sc.id.empty()) {
            r.issue(path + ".id", "stream id is required");
        } else if (!ids.insert(sc.id).second) {
            r.issue(path + ".id", "duplicate stream id '" + sc.id + "'");
        }
        const json* src = nullptr;
        if (r.object_at(s, "source", path, src)) {
            const std::string sp = path + ".source";
            r.check_keys(*src, "streams[].source", sp);
            std::string kind = "synthetic";
            r.string(*src, "kind", sp, kind);
            if (kind == "synthetic") {
                sc.source.kind = SourceConfig::Kind::Synthetic;
            } else if (kind == "directory") {
                sc.source.kind = SourceConfig::Kind::Directory;
            } else if (kind == "raw") {
                sc.source.kind = SourceConfig::Kind::Raw;
            } else {
                r.issue(sp + ".kind", "unknown source kind '" + kind + "'");
            }
            r.integer(*src, "width", sp, sc.source.width, 1);
            r.integer(*src, "height", sp, sc.source.height, 1);
            r.integer(*src, "frames", sp, sc.source.frames, 0, std::numeric_limits<std::int64_t>::max());
            r.integer(*src, "gray", sp, sc.source.gray, 0, 255);
            r.number(*src, "fps", sp, sc.source.fps, [](double v) { return v > 0.0; }, "(0, inf)");
            r.string(*src, "path", sp, sc.source.path);
            if (sc.source.kind != SourceConfig::Kind::Synthetic && sc.source.path.empty()) {
                r.issue(sp + ".path", "required for " + kind + " sources");
            }
        }
        cfg.streams.push_back(std::move(sc));
    }
}

void read_detector(Reader& r, const json& root, PipelineConfig& cfg) {
    const json* d = nullptr;
    if (!r.object_at(root, "detector", "", d)) return;
    r.check_keys(*d, "detector", "detector");
    auto& dc = cfg.detector;
    r.string(*d, "backend", "detector", dc.backend);
    r.string(*d, "fixture", "detector", dc.fixture);
    r.string(*d, "model", "detector", dc.model);
    r.integer(*d, "input_size", "detector", dc.params.input_size, 1);
    r.number(*d, "score_threshold", "detector", dc.params.score_threshold, in_open_unit, "(0, 1)");
    r.number(*d, "nms_iou_threshold", "detector", dc.params.nms_iou_threshold, in_open_unit, "(0, 1)");
    r.integer(*d, "letterbox_fill", "detector", dc.params.letterbox_fill, 0, 255);
    if (dc.backend != "scripted" && dc.backend != "network") {
        r.issue("detector.backend", "unknown backend '" + dc.backend + "'");
    } else if (dc.backend == "network" && dc.model.empty()) {
        r.issue("detector.model", "required for the network backend");
    }
}

void read_registry(Reader& r, const json& root, PipelineConfig& cfg) {
    const auto it = root.find("registry");
    if (it == root.end()) return;
    if (!it->is_array()) {
        r.issue("registry", "expected an array");
        return;
    }
    std::vector<RoutingRule> rules;
    std::set<std::string> actions;
    for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string path = "registry[" + std::to_string(i) + "]";
        const json& e = (*it)[i];
        if (!e.is_object()) {
            r.issue(path, "expected an object");
            continue;
        }
        r.check_keys(e, "registry[]", path);
        std::string action;
        std::vector<std::string> forms;
        std::string handler;
        r.string(e, "action", path, action);
        r.strings(e, "forms", path, forms);
        r.string(e, "handler", path, handler);

        std::optional<ActionKind> kind;
        try {
            kind.emplace(action);
        } catch (const PreconditionError& ex) {
            r.issue(path + ".action", ex.what());
        }
        if (kind && !actions.insert(action).second) {
            r.issue(path + ".action", "duplicate action '" + action + "'");
            kind.reset();
        }
        std::set<BodyForm> eligible;
        for (std::size_t f = 0; f < forms.size(); ++f) {
            if (const auto form = parse_body_form(forms[f])) {
                eligible.insert(*form);
            } else {
                r.issue(path + ".forms[" + std::to_string(f) + "]", "unknown body form '" + forms[f] + "'");
            }
        }
        if (forms.empty()) r.issue(path + ".forms", "at least one body form is required");
        const auto h = Handler::parse(handler);
        if (!h) r.issue(path + ".handler", "expected 'classifier <name>' or 'counter', got '" + handler + "'");
        if (kind && h && !eligible.empty()) rules.push_back(RoutingRule{*kind, eligible, *h});
    }
    cfg.registry = Registry(std::move(rules));
}

void read_classifiers(Reader& r, const json& root, PipelineConfig& cfg) {
    const json* cs = nullptr;
    if (!r.object_at(root, "classifiers", "", cs)) return;
    cfg.classifiers.clear();
    for (const auto& [name, c] : cs->items()) {
        const std::string path = "classifiers." + name;
        if (!c.is_object()) {
            r.issue(path, "expected an object");
            continue;
        }
        r.check_keys(c, "classifiers.*", path);
        ClassifierConfig cc;
        if (const auto defaults = default_label_set(name)) {
            cc.labels = defaults->labels();
            cc.positive.assign(defaults->positive().begin(), defaults->positive().end());
        }
        r.string(c, "backend", path, cc.backend);
        r.string(c, "fixture", path, cc.fixture);
        r.string(c, "model", path, cc.model);
        r.strings(c, "labels", path, cc.labels);
        r.strings(c, "positive", path, cc.positive);
        r.string(c, "default", path, cc.fallback);
        if (const auto t = c.find("positive_mass_threshold"); t != c.end() && !t->is_null()) {
            double v = 0.0;
            r.number(c, "positive_mass_threshold", path, v, [](double x) { return x > 0.0 && x <= 1.0; },
                     "(0, 1]");
            cc.positive_mass_threshold = v;
        }
        if (cc.backend != "scripted" && cc.backend != "network") {
            r.issue(path + ".backend", "unknown backend '" + cc.backend + "'");
        } else if (cc.backend == "network" && cc.model.empty()) {
            r.issue(path + ".model", "required for the network backend");
        }
        if (cc.labels.empty()) {
            r.issue(path + ".labels", "required for classifier '" + name + "'");
        } else {
            try {
                const auto labels = cc.label_set();
                std::sort(cc.positive.begin(), cc.positive.end());
                cc.positive.erase(std::unique(cc.positive.begin(), cc.positive.end()), cc.positive.end());
                if (cc.fallback != "uniform" &&
                    !(cc.fallback.starts_with("onehot:") && labels.index_of(cc.fallback.substr(7)))) {
                    r.issue(path + ".default", "expected 'uniform' or 'onehot:<label>'");
                }
            } catch (const PreconditionError& ex) {
                r.issue(path + ".positive", ex.what());
            }
        }
        cfg.classifiers.emplace(name, std::move(cc));
    }
}

void read_misc(Reader& r, const json& root, PipelineConfig& cfg) {
    const json* o = nullptr;
    if (r.object_at(root, "crop", "", o)) {
        r.check_keys(*o, "crop", "crop");
        r.integer(*o, "width", "crop", cfg.crop.width, 1);
        r.integer(*o, "height", "crop", cfg.crop.height, 1);
        r.integer(*o, "fill", "crop", cfg.crop.fill, 0, 255);
    }
    if (r.object_at(root, "sampler", "", o)) {
        r.check_keys(*o, "sampler", "sampler");
        r.integer(*o, "period", "sampler", cfg.sampler.period, 1);
        r.integer(*o, "window", "sampler", cfg.sampler.window, 1, 4096);
    }
    if (r.object_at(root, "on_duty", "", o)) {
        r.check_keys(*o, "on_duty", "on_duty");
        r.integer(*o, "min", "on_duty", cfg.on_duty.range.min_count, 0);
        if (const auto m = o->find("max"); m != o->end() && !m->is_null()) {
            std::int64_t v = 0;
            const auto before = r.issues.size();
            r.integer(*o, "max", "on_duty", v, 0);
            if (r.issues.size() == before) cfg.on_duty.range.max_count = v;
        }
        if (cfg.on_duty.range.max_count && *cfg.on_duty.range.max_count < cfg.on_duty.range.min_count) {
            r.issue("on_duty.max", "range error: max must be >= min");
        }
        r.number(*o, "containment_threshold", "on_duty", cfg.on_duty.containment_threshold, in_open_unit,
                 "(0, 1)");
    }
    if (r.object_at(root, "annotation", "", o)) {
        r.check_keys(*o, "annotation", "annotation");
        auto& a = cfg.annotation;
        r.integer(*o, "visible_level", "annotation", a.visible_level, 1, 2);
        r.integer(*o, "whole_min_hips", "annotation", a.whole_min_hips, 0, 2);
        r.integer(*o, "whole_min_knees", "annotation", a.whole_min_knees, 0, 2);
        r.integer(*o, "whole_min_ankles", "annotation", a.whole_min_ankles, 0, 2);
        r.integer(*o, "whole_min_shoulders", "annotation", a.whole_min_shoulders, 0, 2);
        r.integer(*o, "upper_min_head", "annotation", a.upper_min_head, 0, 5);
        r.integer(*o, "upper_min_shoulders", "annotation", a.upper_min_shoulders, 0, 2);
    }
    if (r.object_at(root, "evaluation", "", o)) {
        r.check_keys(*o, "evaluation", "evaluation");
        r.number(*o, "iou_threshold", "evaluation", cfg.evaluation.iou_threshold, in_open_unit, "(0, 1)");
        std::string protocol(to_string(cfg.evaluation.protocol));
        r.string(*o, "protocol", "evaluation", protocol);
        if (const auto p = parse_protocol(protocol)) {
            cfg.evaluation.protocol = *p;
        } else {
            r.issue("evaluation.protocol", "expected 'frame' or 'event'");
        }
    }
}

void read_sinks(Reader& r, const json& root, PipelineConfig& cfg) {
    const auto it = root.find("sinks");
    if (it == root.end()) return;
    if (!it->is_array()) {
        r.issue("sinks", "expected an array");
        return;
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string path = "sinks[" + std::to_string(i) + "]";
        const json& s = (*it)[i];
        if (!s.is_object()) {
            r.issue(path, "expected an object");
            continue;
        }
        r.check_keys(s, "sinks[]", path);
        SinkConfig sc;
        r.string(s, "kind", path, sc.kind);
        r.string(s, "path", path, sc.path);
        r.string(s, "url", path, sc.url);
        r.strings(s, "actions", path, sc.actions);
        r.integer(s, "queue_capacity", path, sc.queue_capacity, 1);
        r.integer(s, "max_retries", path, sc.max_retries, 0, 100);
        r.integer(s, "backoff_ms", path, sc.backoff_ms, 0, 60000);
        if (sc.kind == "log") {
            if (sc.path.empty()) r.issue(path + ".path", "required for log sinks");
        } else if (sc.kind == "webhook") {
            if (!sc.url.starts_with("http://")) r.issue(path + ".url", "expected an http:// URL");
        } else {
            r.issue(path + ".kind", "unknown sink kind '" + sc.kind + "'");
        }
        cfg.sinks.push_back(std::move(sc));
    }
}

void cross_check(Reader& r, const PipelineConfig& cfg) {
    const auto& rules = cfg.registry.rules();
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& h = rules[i].handler;
        if (h.kind == Handler::Kind::Classifier && !cfg.classifiers.contains(h.classifier)) {
            r.issue("registry[" + std::to_string(i) + "].handler",
                    "dangling reference: classifier '" + h.classifier + "' has no classifiers block");
        }
    }
    for (std::size_t i = 0; i < cfg.sinks.size(); ++i) {
        for (const auto& a : cfg.sinks[i].actions) {
            if (!cfg.registry.lookup(a)) {
                r.issue("sinks[" + std::to_string(i) + "].actions",
                        "dangling reference: action '" + a + "' is not in the registry");
            }
        }
    }
}

}  // namespace

ValidatedConfig validate(std::string_view text, std::filesystem::path base_dir) {
    json root = json::object();
    if (!detail::trim(text).empty()) {
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::vector<ConfigIssue>{{"", std::string("parse error: ") + e.what()}});
        }
    }
    if (!root.is_object()) {
        throw ConfigError(std::vector<ConfigIssue>{{"", "expected a JSON object at the top level"}});
    }
    Reader r;
    r.check_keys(root, "", "");
    PipelineConfig cfg;
    read_streams(r, root, cfg);
    read_detector(r, root, cfg);
    read_registry(r, root, cfg);
    read_classifiers(r, root, cfg);
    read_misc(r, root, cfg);
    read_sinks(r, root, cfg);
    cross_check(r, cfg);
    if (!r.issues.empty()) {
        throw ConfigError(std::move(r.issues));
    }
    return ValidatedConfig{std::move(cfg), std::move(base_dir)};
}

ValidatedConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = detail::read_text_file(path);
    } catch (const ParseError& e) {
        throw ConfigError(std::vector<ConfigIssue>{{"", e.what()}});
    }
    return validate(text, path.parent_path());
}

std::string print_effective(const PipelineConfig& cfg) {
    json root = json::object();

    json streams = json::array();
    for (const auto& s : cfg.streams) {
        static constexpr const char* kKinds[] = {"synthetic", "directory", "raw"};
        streams.push_back({{"id", s.id},
                           {"source",
                            {{"kind", kKinds[static_cast<int>(s.source.kind)]},
                             {"width", s.source.width},
                             {"height", s.source.height},
                             {"frames", s.source.frames},
                             {"gray", s.source.gray},
                             {"fps", s.source.fps},
                             {"path", s.source.path}}}});
    }
    root["streams"] = streams;

    const auto& d = cfg.detector;
    root["detector"] = {{"backend", d.backend},
                        {"fixture", d.fixture},
                        {"model", d.model},
                        {"input_size", d.params.input_size},
                        {"score_threshold", d.params.score_threshold},
                        {"nms_iou_threshold", d.params.nms_iou_threshold},
                        {"letterbox_fill", d.params.letterbox_fill}};

    json registry = json::array();
    for (const auto& rule : cfg.registry.rules()) {
        json forms = json::array();
        for (BodyForm f : kAllForms) {
            if (rule.eligible_forms.contains(f)) forms.push_back(std::string(to_string(f)));
        }
        registry.push_back({{"action", rule.action.str()}, {"forms", forms}, {"handler", rule.handler.to_string()}});
    }
    root["registry"] = registry;

    json classifiers = json::object();
    for (const auto& [name, c] : cfg.classifiers) {
        classifiers[name] = {{"backend", c.backend},
                             {"fixture", c.fixture},
                             {"model", c.model},
                             {"labels", c.labels},
                             {"positive", c.positive},
                             {"default", c.fallback},
                             {"positive_mass_threshold",
                              c.positive_mass_threshold ? json(*c.positive_mass_threshold) : json(nullptr)}};
    }
    root["classifiers"] = classifiers;

    root["crop"] = {{"width", cfg.crop.width}, {"height", cfg.crop.height}, {"fill", cfg.crop.fill}};
    root["sampler"] = {{"period", cfg.sampler.period}, {"window", cfg.sampler.window}};
    root["on_duty"] = {{"min", cfg.on_duty.range.min_count},
                       {"max", cfg.on_duty.range.max_count ? json(*cfg.on_duty.range.max_count) : json(nullptr)},
                       {"containment_threshold", cfg.on_duty.containment_threshold}};
    const auto& a = cfg.annotation;
    root["annotation"] = {{"visible_level", a.visible_level},
                          {"whole_min_hips", a.whole_min_hips},
                          {"whole_min_knees", a.whole_min_knees},
                          {"whole_min_ankles", a.whole_min_ankles},
                          {"whole_min_shoulders", a.whole_min_shoulders},
                          {"upper_min_head", a.upper_min_head},
                          {"upper_min_shoulders", a.upper_min_shoulders}};

    json sinks = json::array();
    for (const auto& s : cfg.sinks) {
        sinks.push_back({{"kind", s.kind},
                         {"path", s.path},
                         {"url", s.url},
                         {"actions", s.actions},
                         {"queue_capacity", s.queue_capacity},
                         {"max_retries", s.max_retries},
                         {"backoff_ms", s.backoff_ms}});
    }
    root["sinks"] = sinks;
    root["evaluation"] = {{"iou_threshold", cfg.evaluation.iou_threshold},
                          {"protocol", std::string(to_string(cfg.evaluation.protocol))}};
    return root.dump(2) + "\n";
}

}  // namespace mfhar
