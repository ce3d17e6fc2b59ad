#pragma once

#include "causig/core.hpp"
#include "causig/modal.hpp"
#include "causig/sysid.hpp"

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace causig {

struct RecordingKey {
  std::string subject_id;
  std::string task_id;
  std::string scan_id;

  auto operator<=>(const RecordingKey&) const = default;
};

/// Signature of one recording. `single` holds the one-timescale fit used by
/// FeatureSource::SingleTimescale; `features` caches modal features per source.
struct ReferenceEntry {
  ModelParams params;
  std::optional<ModelParams> single;
  std::map<FeatureSource, ModalFeatures> features;

  // Features for `source`, from the cache or computed on the fly.
  ModalFeatures features_for(FeatureSource source) const;
};

// Builds an entry and precomputes features for the requested sources.
ReferenceEntry make_entry(ModelParams params, std::optional<ModelParams> single,
                          std::span<const FeatureSource> sources);

class ReferenceDB {
 public:
  // Throws InvalidArgument on a duplicate key or when dimensions disagree with
  // entries already stored.
  void add(RecordingKey key, ReferenceEntry entry);

  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(const RecordingKey& key) const { return entries_.count(key) != 0; }
  const ReferenceEntry& at(const RecordingKey& key) const;
  const std::map<RecordingKey, ReferenceEntry>& entries() const noexcept { return entries_; }

 private:
  std::map<RecordingKey, ReferenceEntry> entries_;
};

struct Identification {
  std::string subject_id;
  double distance = 0.0;
};

// Nearest reference subject for `task_id` under aligned_distance. Ties go to
// the lexicographically smallest subject id.
Identification identify(const ModalFeatures& query, const ReferenceDB& db,
                        const std::string& task_id);

// A recording's key with its fitted signature. The one-timescale fit is only
// present when requested in FitSettings.
struct FittedRecording {
  RecordingKey key;
  ReferenceEntry entry;
};

struct FitSettings {
  RegionPartition partition;
  std::optional<double> lambda;  // default_lambda(T) when unset
  bool zscore = false;
  bool single_timescale = false;  // also fit the one-timescale model
  std::vector<FeatureSource> sources{FeatureSource::SlowOnly};
  int jobs = 1;
};

std::vector<FittedRecording> fit_recordings(std::span<const Recording> recordings,
                                            const FitSettings& settings);

struct QueryConditionResult {
  std::string condition;
  int n_queries = 0;
  int n_correct = 0;
};

struct FoldResult {
  int fold = 0;
  std::string reference_condition;
  std::vector<QueryConditionResult> queries;
  int n_queries = 0;
  int n_correct = 0;
  double accuracy = 0.0;  // each query recording weighted equally
};

struct AccuracyTable {
  std::vector<FoldResult> folds;

  double mean_accuracy() const;
  // CSV with columns fold,reference_condition,query_condition,n_queries,n_correct,accuracy;
  // one row per fold, query conditions joined with '|'.
  std::string to_csv() const;
};

// Each condition (scan id) in turn is the reference database; every other
// recording of a subject that has a reference in that condition is a query.
// `conditions` fixes the fold order; when empty the sorted distinct scan ids
// are used.
AccuracyTable evaluate_fitted(std::span<const FittedRecording> fitted, FeatureSource source,
                              const std::vector<std::string>& conditions = {}, int jobs = 1);

struct EvaluationOptions {
  FitSettings fit;
  FeatureSource source = FeatureSource::SlowOnly;
  std::vector<std::string> conditions;
};

AccuracyTable evaluate_folds(std::span<const Recording> recordings,
                             const EvaluationOptions& options);

}  // namespace causig
