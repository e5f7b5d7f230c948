#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfhar/detection.hpp"

namespace mfhar {

/// Action identifier: nonempty, lowercase ASCII letters, digits and '_'.
class ActionKind {
public:
    explicit ActionKind(std::string name);

    const std::string& str() const noexcept { return name_; }

    bool operator==(const ActionKind&) const = default;
    auto operator<=>(const ActionKind&) const = default;

private:
    std::string name_;
};

/// How an action's routed detections are consumed.
struct Handler {
    enum class Kind { Classifier, Counter };

    Kind kind = Kind::Counter;
    /// Classifier binding name; empty for counters.
    std::string classifier;

    static Handler classifier_named(std::string name) { return {Kind::Classifier, std::move(name)}; }
    static Handler counter() { return {Kind::Counter, {}}; }

    /// Parses "classifier <name>" or "counter".
    static std::optional<Handler> parse(std::string_view text);
    std::string to_string() const;

    bool operator==(const Handler&) const = default;
};

struct RoutingRule {
    ActionKind action;
    std::set<BodyForm> eligible_forms;
    Handler handler;

    bool operator==(const RoutingRule&) const = default;
};

/// Ordered, immutable set of routing rules with unique action names.
class Registry {
public:
    Registry() = default;
    /// Throws PreconditionError on duplicate actions or empty form sets.
    explicit Registry(std::vector<RoutingRule> rules);

    const std::vector<RoutingRule>& rules() const noexcept { return rules_; }
    const RoutingRule* lookup(std::string_view action) const noexcept;
    bool empty() const noexcept { return rules_.empty(); }

    bool operator==(const Registry&) const = default;

private:
    std::vector<RoutingRule> rules_;
};

/// fall, sleep, on_duty, jump, stand and sit with their eligible body forms.
Registry default_registry();

/// Detection indices (into the input sequence) routed to each action.
using RoutedIndices = std::map<ActionKind, std::vector<std::size_t>>;

RoutedIndices route_indices(std::span<const Detection> detections, const Registry& registry);

/// For every rule, the detections whose form is eligible, in input order.
std::map<ActionKind, std::vector<Detection>> route(std::span<const Detection> detections,
                                                   const Registry& registry);

}  // namespace mfhar
