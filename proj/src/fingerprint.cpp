#include "causig/fingerprint.hpp"

#include "causig/error.hpp"
#include "causig/io.hpp"
#include "causig/parallel.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace causig {

ModalFeatures ReferenceEntry::features_for(FeatureSource source) const {
  if (auto it = features.find(source); it != features.end()) return it->second;
  if (source == FeatureSource::SingleTimescale) {
    if (!single) {
      throw Error(ErrorCode::NotFound, "entry has no one-timescale fit for single-timescale features");
    }
    return modal_features(*single, source);
  }
  return modal_features(params, source);
}

ReferenceEntry make_entry(ModelParams params, std::optional<ModelParams> single,
                          std::span<const FeatureSource> sources) {
  ReferenceEntry entry{std::move(params), std::move(single), {}};
  for (FeatureSource s : sources) entry.features.emplace(s, entry.features_for(s));
  return entry;
}

void ReferenceDB::add(RecordingKey key, ReferenceEntry entry) {
  entry.params.validate();
  if (!entries_.empty()) {
    const ModelParams& first = entries_.begin()->second.params;
    if (first.m() != entry.params.m() || first.n() != entry.params.n()) {
      throw Error(ErrorCode::ShapeMismatch, "reference entry dimensions differ from the database");
    }
  }
  const auto [it, inserted] = entries_.emplace(std::move(key), std::move(entry));
  if (!inserted) {
    throw Error(ErrorCode::InvalidArgument, "duplicate reference entry (" + it->first.subject_id +
                                                ", " + it->first.task_id + ", " +
                                                it->first.scan_id + ")");
  }
}

const ReferenceEntry& ReferenceDB::at(const RecordingKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorCode::NotFound, "no reference entry for key");
  return it->second;
}

Identification identify(const ModalFeatures& query, const ReferenceDB& db,
                        const std::string& task_id) {
  std::optional<Identification> best;
  for (const auto& [key, entry] : db.entries()) {
    if (key.task_id != task_id) continue;
    const double d = aligned_distance(query, entry.features_for(query.source));
    // Map iteration is ordered by subject id within a task, so strict '<'
    // keeps the lexicographically smallest subject on ties.
    if (!best || d < best->distance) best = Identification{key.subject_id, d};
  }
  if (!best) throw Error(ErrorCode::NotFound, "reference database has no entries for task '" + task_id + "'");
  return *best;
}

std::vector<FittedRecording> fit_recordings(std::span<const Recording> recordings,
                                            const FitSettings& settings) {
  std::vector<FittedRecording> out(recordings.size());
  parallel_for(recordings.size(), settings.jobs, [&](std::size_t i) {
    const Recording rec = settings.zscore ? zscore_rows(recordings[i]) : recordings[i];
    const SplitData data = split(rec, settings.partition);
    FitOptions options;
    options.lambda = settings.lambda.value_or(default_lambda(rec.samples()));
    options.dt = rec.dt();
    ModelParams params = fit(data.X, data.U, options).params;
    std::optional<ModelParams> single;
    if (settings.single_timescale) {
      options.single_timescale = true;
      single = fit(data.X, data.U, options).params;
    }
    out[i] = FittedRecording{{rec.subject_id(), rec.task_id(), rec.scan_id()},
                             make_entry(std::move(params), std::move(single), settings.sources)};
  });
  return out;
}

double AccuracyTable::mean_accuracy() const {
  if (folds.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : folds) sum += f.accuracy;
  return sum / static_cast<double>(folds.size());
}

std::string AccuracyTable::to_csv() const {
  std::ostringstream out;
  out << "fold,reference_condition,query_condition,n_queries,n_correct,accuracy\n";
  for (const auto& f : folds) {
    std::string conditions;
    for (const auto& q : f.queries) {
      if (!conditions.empty()) conditions += '|';
      conditions += q.condition;
    }
    out << f.fold << ',' << f.reference_condition << ',' << conditions << ',' << f.n_queries << ','
        << f.n_correct << ',' << io::format_number(f.accuracy) << '\n';
  }
  return out.str();
}

AccuracyTable evaluate_fitted(std::span<const FittedRecording> fitted, FeatureSource source,
                              const std::vector<std::string>& conditions, int jobs) {
  // Subjects need at least two scans of a task to take part.
  std::map<std::pair<std::string, std::string>, int> scans_per_subject_task;
  std::set<RecordingKey> seen;
  for (const auto& f : fitted) {
    if (!seen.insert(f.key).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate recording (" + f.key.subject_id + ", " +
                                                  f.key.task_id + ", " + f.key.scan_id + ")");
    }
    ++scans_per_subject_task[{f.key.subject_id, f.key.task_id}];
  }
  for (const auto& [st, count] : scans_per_subject_task) {
    if (count < 2) {
      warn("subject '" + st.first + "' has a single scan of task '" + st.second + "'; skipped");
    }
  }
  auto eligible = [&](const RecordingKey& k) {
    return scans_per_subject_task.at({k.subject_id, k.task_id}) >= 2;
  };

  std::vector<std::string> folds = conditions;
  if (folds.empty()) {
    std::set<std::string> distinct;
    for (const auto& f : fitted) distinct.insert(f.key.scan_id);
    folds.assign(distinct.begin(), distinct.end());
  }
  // Recordings outside the listed conditions take no part.
  const std::set<std::string> fold_set(folds.begin(), folds.end());

  std::vector<ModalFeatures> features(fitted.size());
  parallel_for(fitted.size(), jobs,
               [&](std::size_t i) { features[i] = fitted[i].entry.features_for(source); });

  AccuracyTable table;
  for (std::size_t fi = 0; fi < folds.size(); ++fi) {
    const std::string& reference = folds[fi];
    ReferenceDB db;
    std::set<std::pair<std::string, std::string>> referenced;
    for (std::size_t i = 0; i < fitted.size(); ++i) {
      const RecordingKey& k = fitted[i].key;
      if (k.scan_id != reference || !eligible(k)) continue;
      ReferenceEntry entry{fitted[i].entry.params, std::nullopt, {}};
      entry.features.emplace(source, features[i]);
      db.add(k, std::move(entry));
      referenced.insert({k.subject_id, k.task_id});
    }

    std::vector<std::size_t> queries;
    for (std::size_t i = 0; i < fitted.size(); ++i) {
      const RecordingKey& k = fitted[i].key;
      if (k.scan_id == reference || !eligible(k) || !fold_set.count(k.scan_id)) continue;
      if (!referenced.count({k.subject_id, k.task_id})) continue;
      queries.push_back(i);
    }

    std::vector<char> correct(queries.size(), 0);
    parallel_for(queries.size(), jobs, [&](std::size_t q) {
      const std::size_t i = queries[q];
      const Identification id = identify(features[i], db, fitted[i].key.task_id);
      correct[q] = id.subject_id == fitted[i].key.subject_id ? 1 : 0;
    });

    FoldResult result;
    result.fold = static_cast<int>(fi);
    result.reference_condition = reference;
    std::map<std::string, QueryConditionResult> by_condition;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      auto& c = by_condition[fitted[queries[q]].key.scan_id];
      c.condition = fitted[queries[q]].key.scan_id;
      ++c.n_queries;
      c.n_correct += correct[q];
    }
    for (const std::string& cond : folds) {
      if (auto it = by_condition.find(cond); it != by_condition.end()) {
        result.queries.push_back(it->second);
        by_condition.erase(it);
      }
    }
    for (auto& [cond, c] : by_condition) result.queries.push_back(c);
    for (const auto& c : result.queries) {
      result.n_queries += c.n_queries;
      result.n_correct += c.n_correct;
    }
    result.accuracy = result.n_queries
                          ? static_cast<double>(result.n_correct) / static_cast<double>(result.n_queries)
                          : 0.0;
    table.folds.push_back(std::move(result));
  }
  return table;
}

AccuracyTable evaluate_folds(std::span<const Recording> recordings,
                             const EvaluationOptions& options) {
  FitSettings settings = options.fit;
  if (options.source == FeatureSource::SingleTimescale) settings.single_timescale = true;
  if (std::find(settings.sources.begin(), settings.sources.end(), options.source) ==
      settings.sources.end()) {
    settings.sources.push_back(options.source);
  }
  const std::vector<FittedRecording> fitted = fit_recordings(recordings, settings);
  return evaluate_fitted(fitted, options.source, options.conditions, settings.jobs);
}

}  // namespace causig
