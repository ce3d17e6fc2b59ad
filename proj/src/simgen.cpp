#include "causig/simgen.hpp"

#include "causig/error.hpp"
#include "causig/parallel.hpp"
#include "causig/rng.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace causig {

namespace {

constexpr int kMaxRedraws = 100;
constexpr double kBlowUp = 1e12;

// Stream tags for derive_seed.
constexpr std::uint64_t kSystemStream = 1;
constexpr std::uint64_t kSimulationStream = 2;
constexpr std::uint64_t kTemplateStream = 3;
constexpr std::uint64_t kSubjectStream = 4;
constexpr std::uint64_t kScanStream = 5;

Matrix gaussian(Rng& rng, Index rows, Index cols, double sd) {
  Matrix M(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) M(r, c) = sd * rng.normal();
  }
  return M;
}

double spectral_radius(const Matrix& M) {
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

// Zero-diagonal matrix with spectral radius exactly `radius`.
Matrix draw_fast_coupling(Rng& rng, Index m, double radius) {
  if (radius == 0.0 || m == 1) return Matrix::Zero(m, m);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Matrix Q = gaussian(rng, m, m, 1.0);
    Q.diagonal().setZero();
    const double rho = spectral_radius(Q);
    if (rho > 1e-8) return Q * (radius / rho);
  }
  throw Error(ErrorCode::Singular, "could not draw a fast coupling with nonzero spectral radius");
}

// Rescales A so that (I - Q)^{-1} A has the target spectral radius.
Matrix rescale_slow(const Matrix& Q, Matrix A, double target) {
  const Index m = A.rows();
  const double rho = spectral_radius((Matrix::Identity(m, m) - Q).partialPivLu().solve(A));
  if (!(rho > 1e-8)) return Matrix{};
  return A * (target / rho);
}

Matrix slow_draw(const Matrix& R, double identity_weight) {
  const Index m = R.rows();
  return identity_weight * Matrix::Identity(m, m) + (1.0 - identity_weight) * R;
}

}  // namespace

const char* to_string(InputPolicy policy) {
  switch (policy) {
    case InputPolicy::GaussianIID: return "gaussian";
    case InputPolicy::Sinusoidal: return "sinusoidal";
    case InputPolicy::Pulse: return "pulse";
  }
  return "unknown";
}

InputPolicy parse_input_policy(const std::string& name) {
  if (name == "gaussian") return InputPolicy::GaussianIID;
  if (name == "sinusoidal") return InputPolicy::Sinusoidal;
  if (name == "pulse") return InputPolicy::Pulse;
  throw Error(ErrorCode::InvalidArgument,
              "unknown input policy '" + name + "' (expected gaussian|sinusoidal|pulse)");
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (m < 1 || n < 1) fail("sim config needs m >= 1 and n >= 1");
  if (!(spectral_radius_target > 0.0 && spectral_radius_target < 1.0)) {
    fail("spectral_radius_target must lie in (0, 1)");
  }
  if (!(fast_radius >= 0.0 && fast_radius <= 0.3)) fail("fast_radius must lie in [0, 0.3]");
  if (!(slow_identity_weight >= 0.0 && slow_identity_weight < 1.0)) {
    fail("slow_identity_weight must lie in [0, 1)");
  }
  if (!(noise_sigma >= 0.0) || !(process_sigma >= 0.0)) fail("noise deviations must be >= 0");
  if (!(fast_input_gain >= 0.0) || !(slow_input_gain >= 0.0)) fail("input gains must be >= 0");
  if (T < 2) fail("T must be >= 2");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!input_indices.empty()) {
    if (static_cast<Index>(input_indices.size()) != n) fail("input_indices must list n regions");
    RegionPartition::from_inputs(m + n, input_indices);
  }
}

std::vector<Index> SimConfig::resolved_input_indices() const {
  if (!input_indices.empty()) return input_indices;
  std::vector<Index> out;
  for (Index j = 0; j < n; ++j) out.push_back(m + j);
  return out;
}

SimConfig sim_config_from_json(const nlohmann::json& j, SimConfig cfg) {
  try {
    cfg.m = j.value("m", cfg.m);
    cfg.n = j.value("n", cfg.n);
    cfg.spectral_radius_target = j.value("spectral_radius_target", cfg.spectral_radius_target);
    cfg.fast_radius = j.value("fast_radius", cfg.fast_radius);
    cfg.slow_identity_weight = j.value("slow_identity_weight", cfg.slow_identity_weight);
    cfg.fast_input_gain = j.value("fast_input_gain", cfg.fast_input_gain);
    cfg.slow_input_gain = j.value("slow_input_gain", cfg.slow_input_gain);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.noise_relative = j.value("noise_relative", cfg.noise_relative);
    cfg.process_sigma = j.value("process_sigma", cfg.process_sigma);
    if (j.contains("input_policy")) {
      cfg.input_policy = parse_input_policy(j.at("input_policy").get<std::string>());
    }
    cfg.T = j.value("T", cfg.T);
    cfg.dt = j.value("dt", cfg.dt);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("input_indices")) cfg.input_indices = j.at("input_indices").get<std::vector<Index>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("sim config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json sim_config_to_json(const SimConfig& cfg) {
  nlohmann::json j;
  j["m"] = cfg.m;
  j["n"] = cfg.n;
  j["spectral_radius_target"] = cfg.spectral_radius_target;
  j["fast_radius"] = cfg.fast_radius;
  j["slow_identity_weight"] = cfg.slow_identity_weight;
  j["fast_input_gain"] = cfg.fast_input_gain;
  j["slow_input_gain"] = cfg.slow_input_gain;
  j["noise_sigma"] = cfg.noise_sigma;
  j["noise_relative"] = cfg.noise_relative;
  j["process_sigma"] = cfg.process_sigma;
  j["input_policy"] = to_string(cfg.input_policy);
  j["T"] = cfg.T;
  j["dt"] = cfg.dt;
  j["seed"] = cfg.seed;
  j["input_indices"] = cfg.resolved_input_indices();
  return j;
}

ModelParams sample_system(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, kSystemStream));
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const Matrix Q = draw_fast_coupling(rng, cfg.m, cfg.fast_radius);
    const Matrix R = gaussian(rng, cfg.m, cfg.m, 1.0 / std::sqrt(static_cast<double>(cfg.m)));
    Matrix A = rescale_slow(Q, slow_draw(R, cfg.slow_identity_weight), cfg.spectral_radius_target);
    if (A.size() == 0) continue;
    ModelParams p;
    p.Q = Q;
    p.A = std::move(A);
    p.B1 = gaussian(rng, cfg.m, cfg.n, cfg.fast_input_gain);
    p.B2 = gaussian(rng, cfg.m, cfg.n, cfg.slow_input_gain);
    p.dt = cfg.dt;
    return p;
  }
  throw Error(ErrorCode::Singular, "could not draw a system with nonzero slow dynamics");
}

Matrix generate_inputs(const SimConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  Matrix U(cfg.n, cfg.T);
  switch (cfg.input_policy) {
    case InputPolicy::GaussianIID:
      for (Index k = 0; k < cfg.T; ++k) {
        for (Index j = 0; j < cfg.n; ++j) U(j, k) = rng.normal();
      }
      break;
    case InputPolicy::Sinusoidal: {
      // Three tones per channel, frequencies in (0.01, 0.45) cycles/sample.
      constexpr int kTones = 3;
      for (Index j = 0; j < cfg.n; ++j) {
        double freq[kTones], phase[kTones];
        for (int t = 0; t < kTones; ++t) {
          freq[t] = 0.01 + 0.44 * rng.uniform();
          phase[t] = 2.0 * std::numbers::pi * rng.uniform();
        }
        for (Index k = 0; k < cfg.T; ++k) {
          double v = 0.0;
          for (int t = 0; t < kTones; ++t) {
            v += std::sin(2.0 * std::numbers::pi * freq[t] * static_cast<double>(k) + phase[t]);
          }
          U(j, k) = v * std::sqrt(2.0 / kTones);
        }
      }
      break;
    }
    case InputPolicy::Pulse:
      // Sparse unit pulses of random sign, each sample active with probability 0.1.
      for (Index k = 0; k < cfg.T; ++k) {
        for (Index j = 0; j < cfg.n; ++j) {
          const bool active = rng.uniform() < 0.1;
          const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
          U(j, k) = active ? sign : 0.0;
        }
      }
      break;
  }
  return U;
}

Recording simulate(const ModelParams& params, const SimConfig& cfg, const std::string& subject_id,
                   const std::string& task_id, const std::string& scan_id) {
  params.validate();
  SimConfig shape = cfg;
  shape.m = params.m();
  shape.n = params.n();
  if (!cfg.input_indices.empty() && static_cast<Index>(cfg.input_indices.size()) != params.n()) {
    throw Error(ErrorCode::ShapeMismatch, "config input_indices do not match the model's n");
  }
  shape.validate();
  const Index m = params.m();
  const Index n = params.n();
  const Index T = cfg.T;

  const Matrix IminusQ = Matrix::Identity(m, m) - params.Q;
  Eigen::JacobiSVD<Matrix> svd(IminusQ);
  const double smin = svd.singularValues()(m - 1);
  if (smin <= 1e-12 * std::max(1.0, svd.singularValues()(0))) {
    throw Error(ErrorCode::Singular,
                "I - Q is singular (smallest singular value " + std::to_string(smin) + ")");
  }
  const auto lu = IminusQ.partialPivLu();

  const Matrix U = generate_inputs(shape, derive_seed(cfg.seed, kSimulationStream, 0));
  Rng process(derive_seed(cfg.seed, kSimulationStream, 1));
  Rng observation(derive_seed(cfg.seed, kSimulationStream, 2));

  Matrix X = Matrix::Zero(m, T);
  Vector innovation = Vector::Zero(m);
  for (Index k = 1; k < T; ++k) {
    if (cfg.process_sigma > 0.0) {
      for (Index i = 0; i < m; ++i) innovation(i) = cfg.process_sigma * process.normal();
    }
    X.col(k) = lu.solve(params.A * X.col(k - 1) + params.B1 * U.col(k) + params.B2 * U.col(k - 1) +
                        innovation);
    if (!X.col(k).allFinite() || X.col(k).cwiseAbs().maxCoeff() > kBlowUp) {
      throw Error(ErrorCode::Unstable, "trajectory exceeded 1e12 at step " + std::to_string(k));
    }
  }

  const std::vector<Index> inputs = shape.resolved_input_indices();
  const RegionPartition part = RegionPartition::from_inputs(m + n, inputs);
  Matrix data(m + n, T);
  data(part.state_indices(), Eigen::all) = X;
  data(part.input_indices(), Eigen::all) = U;

  if (cfg.noise_sigma > 0.0) {
    const double count = static_cast<double>(T);
    for (Index r = 0; r < data.rows(); ++r) {
      double sd = cfg.noise_sigma;
      if (cfg.noise_relative) {
        const double mean = data.row(r).mean();
        sd *= std::sqrt((data.row(r).array() - mean).square().sum() / count);
      }
      for (Index k = 0; k < T; ++k) data(r, k) += sd * observation.normal();
    }
  }
  return Recording(std::move(data), cfg.dt, subject_id, task_id, scan_id, inputs);
}

CohortConfig cohort_config_from_json(const nlohmann::json& j, CohortConfig cfg) {
  cfg.sim = sim_config_from_json(j.value("sim", nlohmann::json::object()), cfg.sim);
  try {
    cfg.subjects = j.value("subjects", cfg.subjects);
    cfg.scans = j.value("scans", cfg.scans);
    cfg.task_id = j.value("task_id", cfg.task_id);
    cfg.shared_template = j.value("shared_template", cfg.shared_template);
    cfg.subject_spread = j.value("subject_spread", cfg.subject_spread);
    cfg.fast_spread = j.value("fast_spread", cfg.fast_spread);
    cfg.input_spread = j.value("input_spread", cfg.input_spread);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("cohort config: ") + e.what());
  }
  return cfg;
}

std::string subject_name(Index subject) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sub%03lld", static_cast<long long>(subject + 1));
  return buf;
}

std::string scan_name(Index scan) { return "scan" + std::to_string(scan + 1); }

CohortConfig CohortConfig::benchmark() {
  CohortConfig cfg;
  cfg.shared_template = true;
  cfg.subject_spread = 0.4;
  cfg.fast_spread = 0.0;
  cfg.input_spread = 0.3;
  cfg.sim.slow_identity_weight = 0.5;
  cfg.sim.fast_input_gain = 2.5;
  cfg.sim.process_sigma = 1.0;
  cfg.sim.noise_sigma = 0.05;
  cfg.sim.noise_relative = true;
  cfg.sim.T = 1000;
  return cfg;
}

std::vector<ModelParams> sample_cohort_systems(const CohortConfig& cfg) {
  cfg.sim.validate();
  if (cfg.subjects < 1 || cfg.scans < 1) {
    throw Error(ErrorCode::InvalidArgument, "cohort needs at least one subject and one scan");
  }
  const SimConfig& sim = cfg.sim;
  const Index m = sim.m;
  const Index n = sim.n;
  const double entry_sd = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<ModelParams> systems;
  systems.reserve(static_cast<std::size_t>(cfg.subjects));

  if (!cfg.shared_template) {
    for (Index s = 0; s < cfg.subjects; ++s) {
      SimConfig subject = sim;
      subject.seed = derive_seed(sim.seed, kSubjectStream, static_cast<std::uint64_t>(s));
      systems.push_back(sample_system(subject));
    }
    return systems;
  }

  Rng tmpl(derive_seed(sim.seed, kTemplateStream));
  const Matrix Q0 = draw_fast_coupling(tmpl, m, sim.fast_radius);
  const Matrix R0 = gaussian(tmpl, m, m, entry_sd);
  const Matrix B10 = gaussian(tmpl, m, n, sim.fast_input_gain);
  const Matrix B20 = gaussian(tmpl, m, n, sim.slow_input_gain);

  for (Index s = 0; s < cfg.subjects; ++s) {
    Rng rng(derive_seed(sim.seed, kSubjectStream, static_cast<std::uint64_t>(s)));
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxRedraws) {
        throw Error(ErrorCode::Singular, "could not draw a valid subject system");
      }
      Matrix Q = Q0;
      if (cfg.fast_spread > 0.0) Q += cfg.fast_spread * draw_fast_coupling(rng, m, sim.fast_radius);
      const Matrix R = R0 + cfg.subject_spread * gaussian(rng, m, m, entry_sd);
      const Matrix B1 = B10 + cfg.input_spread * gaussian(rng, m, n, sim.fast_input_gain);
      const Matrix B2 = B20 + cfg.input_spread * gaussian(rng, m, n, sim.slow_input_gain);
      if (spectral_radius(Q) >= 1.0) continue;
      Matrix A = rescale_slow(Q, slow_draw(R, sim.slow_identity_weight), sim.spectral_radius_target);
      if (A.size() == 0) continue;
      ModelParams p;
      p.Q = std::move(Q);
      p.A = std::move(A);
      p.B1 = B1;
      p.B2 = B2;
      p.dt = sim.dt;
      systems.push_back(std::move(p));
      break;
    }
  }
  return systems;
}

Cohort make_cohort(const CohortConfig& cfg, int jobs) {
  Cohort cohort;
  cohort.systems = sample_cohort_systems(cfg);
  const std::size_t total = static_cast<std::size_t>(cfg.subjects * cfg.scans);
  std::vector<std::optional<Recording>> slots(total);
  parallel_for(total, jobs, [&](std::size_t idx) {
    const Index s = static_cast<Index>(idx) / cfg.scans;
    const Index k = static_cast<Index>(idx) % cfg.scans;
    SimConfig scan = cfg.sim;
    scan.seed = derive_seed(cfg.sim.seed, kScanStream,
                            (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint64_t>(k));
    slots[idx] = simulate(cohort.systems[static_cast<std::size_t>(s)], scan, subject_name(s),
                          cfg.task_id, scan_name(k));
  });
  cohort.recordings.reserve(total);
  for (auto& r : slots) cohort.recordings.push_back(std::move(*r));
  return cohort;
}

}  // namespace causig
