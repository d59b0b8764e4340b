#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlc/linalg.hpp"
#include "mlc/robustness.hpp"
#include "mlc/witness.hpp"

namespace mlc {

/// Matrix JSON schema: {"dim": d, "re": [[...]], "im": [[...]]}, row-major.
/// Serialization is lossless (shortest round-trip doubles).
nlohmann::json matrix_to_json(const Matrix& a);
Matrix matrix_from_json(const nlohmann::json& j);

Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& a);

/// Witness files use the matrix schema plus {"k": K}.
nlohmann::json witness_to_json(const Witness& w);
Witness witness_from_json(const nlohmann::json& j);

/// Observations file: JSON list of {observable, value, err_lo, err_hi}.
std::vector<Observation> observations_from_json(const nlohmann::json& j);
nlohmann::json observations_to_json(std::span<const Observation> obs);

nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mlc
