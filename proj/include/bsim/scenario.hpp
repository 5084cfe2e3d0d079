#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsim/potential.hpp"

namespace bsim::scenario {

struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<std::string> problems)
        : std::runtime_error(problems.empty() ? "scenario validation failed" : problems.front()),
          issues(std::move(problems)) {}
    std::vector<std::string> issues;
};

struct Report {
    bool ok = false;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    nlohmann::json resolved; // scenario with defaults filled in
};

// Schema plus physics sanity checks, without executing.
Report validate_file(const std::filesystem::path& scenario_path);

struct Overrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

// Executes the scenario; throws ValidationError for schema/precondition
// problems and std::runtime_error for runtime failures. Writes all outputs
// plus manifest.json into the output directory.
void run_file(const std::filesystem::path& scenario_path, const Overrides& overrides = {});

// Structured-text (JSON) potential model serialization:
// terms[].coefficient, terms[].exponent, window.min, window.max.
nlohmann::json potential_to_json(const potential::PotentialModel& model);
potential::PotentialModel potential_from_json(const nlohmann::json& j);

inline constexpr const char* version = "0.1.0";

} // namespace bsim::scenario
