#pragma once

#include <string_view>
#include <utility>

namespace cuescreen {

inline constexpr std::string_view kLibraryVersion = "0.3.0";

/// Per-module behaviour versions recorded in run manifests. Bump a module's
/// entry whenever its output for a fixed input changes.
inline constexpr std::pair<std::string_view, std::string_view> kModuleVersions[] = {
    {"chat_parser", "1.2"},     {"cue_analyzer", "1.1"}, {"prompt_compiler", "1.0"},
    {"corpus_manager", "1.0"},  {"synth_generator", "1.1"}, {"baseline_models", "1.0"},
    {"llm_gateway", "1.1"},     {"evaluator", "1.0"},
};

}  // namespace cuescreen
