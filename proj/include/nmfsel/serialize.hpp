#pragma once

// JSON mirrors of the domain types. Field names follow the C++ members;
// non-finite numbers are written as null.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nmfsel/moments.hpp"
#include "nmfsel/pipeline.hpp"
#include "nmfsel/synth.hpp"
#include "nmfsel/theory.hpp"

namespace nmfsel {

using Json = nlohmann::json;

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json to_json(const GenerativeConfig& c);
/// Throws InvalidConfig for unknown or ill-typed fields.
GenerativeConfig generative_config_from_json(const Json& j);

Json to_json(const SweepConfig& c);
SweepConfig sweep_config_from_json(const Json& j);

Json to_json(const TheoryReport& r);
Json to_json(const PerturbationReport& r);
Json to_json(const EstimateResult& r);
Json to_json(const MomentEstimate& m, bool include_matrix = false);

/// Config, K_true and generator name for a generated dataset.
Json dataset_sidecar(const Dataset& d);

/// Throws Io or Parse.
Json read_json(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; byte-stable for equal input.
void write_json(const Json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);

}  // namespace nmfsel
