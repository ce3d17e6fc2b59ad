#pragma once

#include "causig/core.hpp"
#include "causig/modal.hpp"

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace causig::io {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr int kParamsFormatVersion = 1;
inline constexpr int kFeaturesFormatVersion = 1;
inline constexpr int kRecordingFormatVersion = 1;

// Writes via a temporary sibling file and rename, so readers never observe a
// partially written file.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

// Decimal with 17 significant digits (exact double round trip).
std::string format_number(double value);

std::string matrix_to_csv(const Matrix& M);
Matrix matrix_from_csv(const std::string& text);

// Recording = CSV (regions x samples) + JSON sidecar
// {dt, subject_id, task_id, scan_id, input_indices}.
Recording read_recording(const std::filesystem::path& csv, const std::filesystem::path& meta);
void write_recording(const Recording& rec, const std::filesystem::path& csv,
                     const std::filesystem::path& meta);
nlohmann::json recording_meta(const Recording& rec);

// Optional labels carried alongside params files.
struct Labels {
  std::string subject_id;
  std::string task_id;
  std::string scan_id;
};

nlohmann::json params_to_json(const ModelParams& params, const std::optional<Labels>& labels = {});
ModelParams params_from_json(const nlohmann::json& j);
std::optional<Labels> labels_from_json(const nlohmann::json& j);

nlohmann::json features_to_json(const ModalFeatures& features);
ModalFeatures features_from_json(const nlohmann::json& j);

}  // namespace causig::io
