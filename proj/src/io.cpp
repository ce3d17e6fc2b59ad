#include "causig/io.hpp"

#include "causig/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace causig::io {

namespace fs = std::filesystem;
using nlohmann::json;

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename into " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string matrix_to_csv(const Matrix& M) {
  std::string out;
  out.reserve(static_cast<std::size_t>(M.size()) * 24);
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      if (c) out += ',';
      out += format_number(M(r, c));
    }
    out += '\n';
  }
  return out;
}

Matrix matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                              : comma - start);
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      const bool trailing_ok = end && std::string(end).find_first_not_of(" \t") == std::string::npos;
      if (end == cell.c_str() || !trailing_ok || errno == ERANGE) {
        throw Error(ErrorCode::Parse,
                    "bad number '" + cell + "' on CSV line " + std::to_string(line_no));
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::Parse, "ragged CSV: line " + std::to_string(line_no) + " has " +
                                        std::to_string(row.size()) + " cells, expected " +
                                        std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, "empty CSV");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) {
      M(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return M;
}

namespace {

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
  }
}

json matrix_to_json(const Matrix& M) {
  json arr = json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    for (Index c = 0; c < M.cols(); ++c) arr.push_back(M(r, c));
  }
  return arr;
}

// Accepts a flat row-major array or an array of rows.
Matrix matrix_from_json(const json& j, const char* key, Index rows, Index cols) {
  if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  const json& a = j.at(key);
  if (!a.is_array()) throw Error(ErrorCode::Parse, std::string("field '") + key + "' not an array");
  Matrix M(rows, cols);
  if (!a.empty() && a.front().is_array()) {
    if (static_cast<Index>(a.size()) != rows) {
      throw Error(ErrorCode::ShapeMismatch, std::string("field '") + key + "' has wrong row count");
    }
    for (Index r = 0; r < rows; ++r) {
      const json& row = a[static_cast<std::size_t>(r)];
      if (static_cast<Index>(row.size()) != cols) {
        throw Error(ErrorCode::ShapeMismatch, std::string("field '") + key + "' is ragged");
      }
      for (Index c = 0; c < cols; ++c) M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return M;
  }
  if (static_cast<Index>(a.size()) != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch, std::string("field '") + key + "' has " +
                                              std::to_string(a.size()) + " entries, expected " +
                                              std::to_string(rows * cols));
  }
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      M(r, c) = a[static_cast<std::size_t>(r * cols + c)].get<double>();
    }
  }
  return M;
}

json complex_to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

std::complex<double> complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::Parse, "complex value must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

json recording_meta(const Recording& rec) {
  json meta;
  meta["format_version"] = kRecordingFormatVersion;
  meta["dt"] = rec.dt();
  meta["subject_id"] = rec.subject_id();
  meta["task_id"] = rec.task_id();
  meta["scan_id"] = rec.scan_id();
  meta["input_indices"] = rec.input_indices();
  return meta;
}

Recording read_recording(const fs::path& csv, const fs::path& meta_path) {
  Matrix data = matrix_from_csv(read_text(csv));
  const json meta = read_json(meta_path);
  std::vector<Index> inputs;
  if (meta.contains("input_indices")) inputs = meta.at("input_indices").get<std::vector<Index>>();
  return Recording(std::move(data), field<double>(meta, "dt"), field<std::string>(meta, "subject_id"),
                   field<std::string>(meta, "task_id"), field<std::string>(meta, "scan_id"),
                   std::move(inputs));
}

void write_recording(const Recording& rec, const fs::path& csv, const fs::path& meta) {
  write_atomic(csv, matrix_to_csv(rec.data()));
  write_atomic(meta, recording_meta(rec).dump(2) + "\n");
}

json params_to_json(const ModelParams& params, const std::optional<Labels>& labels) {
  json j;
  j["format"] = "causig-params";
  j["format_version"] = kParamsFormatVersion;
  j["m"] = params.m();
  j["n"] = params.n();
  j["dt"] = params.dt;
  j["lambda"] = params.lambda;
  j["Q"] = matrix_to_json(params.Q);
  j["A"] = matrix_to_json(params.A);
  j["B1"] = matrix_to_json(params.B1);
  j["B2"] = matrix_to_json(params.B2);
  if (labels) {
    j["subject_id"] = labels->subject_id;
    j["task_id"] = labels->task_id;
    j["scan_id"] = labels->scan_id;
  }
  return j;
}

ModelParams params_from_json(const json& j) {
  const Index m = field<Index>(j, "m");
  const Index n = field<Index>(j, "n");
  if (m < 1 || n < 1) throw Error(ErrorCode::Parse, "params need m >= 1 and n >= 1");
  ModelParams p;
  p.Q = matrix_from_json(j, "Q", m, m);
  p.A = matrix_from_json(j, "A", m, m);
  p.B1 = matrix_from_json(j, "B1", m, n);
  p.B2 = matrix_from_json(j, "B2", m, n);
  p.dt = field<double>(j, "dt");
  p.lambda = j.contains("lambda") ? j.at("lambda").get<double>() : 0.0;
  p.validate();
  return p;
}

std::optional<Labels> labels_from_json(const json& j) {
  if (!j.contains("subject_id")) return std::nullopt;
  return Labels{field<std::string>(j, "subject_id"),
                j.value("task_id", std::string{}), j.value("scan_id", std::string{})};
}

json features_to_json(const ModalFeatures& features) {
  json j;
  j["format"] = "causig-features";
  j["format_version"] = kFeaturesFormatVersion;
  j["source"] = to_string(features.source);
  j["dimension"] = features.dimension();
  json vectors = json::array();
  for (Index c = 0; c < features.vectors.cols(); ++c) {
    json v = json::array();
    for (Index r = 0; r < features.vectors.rows(); ++r) {
      v.push_back(complex_to_json(features.vectors(r, c)));
    }
    vectors.push_back(std::move(v));
  }
  j["vectors"] = std::move(vectors);
  json values = json::array();
  for (Index i = 0; i < features.eigenvalues.size(); ++i) {
    values.push_back(complex_to_json(features.eigenvalues(i)));
  }
  j["eigenvalues"] = std::move(values);
  return j;
}

ModalFeatures features_from_json(const json& j) {
  ModalFeatures f;
  f.source = parse_feature_source(field<std::string>(j, "source"));
  const json& vectors = j.at("vectors");
  const Index dim = field<Index>(j, "dimension");
  f.vectors.resize(dim, static_cast<Index>(vectors.size()));
  for (Index c = 0; c < f.vectors.cols(); ++c) {
    const json& v = vectors[static_cast<std::size_t>(c)];
    if (static_cast<Index>(v.size()) != dim) {
      throw Error(ErrorCode::ShapeMismatch, "feature vector has wrong dimension");
    }
    for (Index r = 0; r < dim; ++r) f.vectors(r, c) = complex_from_json(v[static_cast<std::size_t>(r)]);
  }
  const json& values = j.at("eigenvalues");
  f.eigenvalues.resize(static_cast<Index>(values.size()));
  for (Index i = 0; i < f.eigenvalues.size(); ++i) {
    f.eigenvalues(i) = complex_from_json(values[static_cast<std::size_t>(i)]);
  }
  return f;
}

}  // namespace causig::io
