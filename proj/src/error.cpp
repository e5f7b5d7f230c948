#include "mfhar/error.hpp"

namespace mfhar {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
    std::string text = "invalid configuration";
    for (const auto& issue : issues) {
        text += "\n  ";
        text += issue.path.empty() ? std::string("<root>") : issue.path;
        text += ": ";
        text += issue.message;
    }
    return text;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace mfhar
