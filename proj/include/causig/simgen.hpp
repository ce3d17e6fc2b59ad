#pragma once

#include "causig/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace causig {

enum class InputPolicy { GaussianIID, Sinusoidal, Pulse };

const char* to_string(InputPolicy policy);
InputPolicy parse_input_policy(const std::string& name);  // "gaussian" | "sinusoidal" | "pulse"

struct SimConfig {
  Index m = 10;
  Index n = 3;
  // Spectral radius of (I - Q)^{-1} A after rescaling; must lie in (0, 1).
  double spectral_radius_target = 0.9;
  // Spectral radius of the concurrent coupling Q, at most 0.3. Zero gives a
  // one-timescale system.
  double fast_radius = 0.3;
  // A is drawn as w I + (1 - w) R with R ~ N(0, 1/m) before rescaling.
  double slow_identity_weight = 0.0;
  double fast_input_gain = 1.0;  // scale of B1 entries
  double slow_input_gain = 1.0;  // scale of B2 entries
  // Observation noise added to every emitted row. With noise_relative the
  // deviation is noise_sigma times that row's clean standard deviation.
  double noise_sigma = 0.0;
  bool noise_relative = false;
  // Latent innovation w(k) in x(k) = Q x(k) + A x(k-1) + B1 u(k) + B2 u(k-1) + w(k).
  double process_sigma = 0.0;
  InputPolicy input_policy = InputPolicy::GaussianIID;
  Index T = 1000;
  double dt = 0.72;
  std::uint64_t seed = 0;
  // Region indices that carry the inputs; defaults to the last n of m + n.
  std::vector<Index> input_indices;

  void validate() const;
  std::vector<Index> resolved_input_indices() const;
};

SimConfig sim_config_from_json(const nlohmann::json& j, SimConfig base = {});
nlohmann::json sim_config_to_json(const SimConfig& cfg);

// Stable random two-timescale system. Deterministic in cfg.seed.
ModelParams sample_system(const SimConfig& cfg);

// Inputs u(0..T-1) for the configured policy, drawn from `seed`.
Matrix generate_inputs(const SimConfig& cfg, std::uint64_t seed);

// Simulates from x(0) = 0 with inputs, innovations and observation noise drawn
// from streams keyed on cfg.seed. Throws Unstable if any |x_i| exceeds 1e12.
Recording simulate(const ModelParams& params, const SimConfig& cfg,
                   const std::string& subject_id = "sim", const std::string& task_id = "task",
                   const std::string& scan_id = "scan1");

/// Cohort of subjects with repeated scans. A subject is one system; each of
/// its scans re-simulates that system with fresh input and noise draws.
struct CohortConfig {
  SimConfig sim;
  Index subjects = 50;
  Index scans = 2;
  std::string task_id = "rest";
  // false: every subject is an independent sample_system draw.
  // true: subjects share a population template and differ by a per-subject
  //       deviation of the given relative sizes.
  bool shared_template = false;
  double subject_spread = 0.5;  // deviation of the slow part R
  double fast_spread = 0.0;     // deviation of Q
  double input_spread = 0.3;    // deviation of B1 and B2

  // Shared-template cohort with latent innovations on genuinely two-timescale
  // systems. Used by `make-cohort` and the fingerprinting benchmarks.
  static CohortConfig benchmark();
};

CohortConfig cohort_config_from_json(const nlohmann::json& j, CohortConfig base = {});

std::string subject_name(Index subject);  // "sub001", ...
std::string scan_name(Index scan);        // "scan1", ...

std::vector<ModelParams> sample_cohort_systems(const CohortConfig& cfg);

struct Cohort {
  std::vector<ModelParams> systems;     // one per subject
  std::vector<Recording> recordings;    // subject-major, scans in order
};

// Scans simulate in parallel; the result does not depend on `jobs`.
Cohort make_cohort(const CohortConfig& cfg, int jobs = 1);

}  // namespace causig
