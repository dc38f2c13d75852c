#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "critgrowth/criterion.hpp"
#include "critgrowth/models.hpp"
#include "critgrowth/montecarlo.hpp"

namespace critgrowth {

struct PmfSpec {
  std::vector<State> support;
  std::vector<double> probs;
  bool operator==(const PmfSpec&) const = default;
};

struct GwiSpec {
  std::vector<PmfSpec> offspring;
  PmfSpec immigration;
  bool operator==(const GwiSpec&) const = default;
};

struct SdgwSpec {
  std::vector<PmfSpec> base;
  std::vector<PmfSpec> boost;
  double kappa = 1.0;
  bool operator==(const SdgwSpec&) const = default;
};

struct TableSpec {
  struct Band {
    std::optional<double> max_total;  // absent on the last band
    std::vector<PmfSpec> offspring;
    bool operator==(const Band&) const = default;
  };
  std::vector<Band> bands;
  double alpha = 0.0;
  double delta = 1.0;
  bool operator==(const TableSpec&) const = default;
};

using ModelSpec = std::variant<GwiSpec, SdgwSpec, CellDivisionParams, TableSpec>;

struct SpectralSettings {
  double tol = 1e-12;
  int max_iter = 100000;
  double criticality_tol = kCriticalityTol;
  bool operator==(const SpectralSettings&) const = default;
};

struct CriterionSettings {
  std::vector<double> radii = kDefaultRadii;
  /// "analytic" uses closed forms where the model has them
  bool sigma2_monte_carlo = false;
  std::int64_t mc_samples = 100000;
  double stabilization_tol = kStabilizationTol;
  bool operator==(const CriterionSettings&) const = default;
};

struct LyapunovSettings {
  std::vector<double> magnitudes{1e2, 1e3, 1e4};
  bool off_ray = true;
  double perturbation = 0.2;
  std::vector<std::string> phi{"log", "invlog"};
  int k_max = 64;
  std::int64_t samples = 100000;
  double band = 2.0;
  std::vector<int> moment_k{1, 5};
  int transverse_steps = 50;
  std::int64_t transverse_samples = 10000;
  std::int64_t audit_samples = 20000;
  bool operator==(const LyapunovSettings&) const = default;
};

struct OutputSettings {
  std::string dir = "out";
  /// json | csv | both
  std::string format = "json";
  bool operator==(const OutputSettings&) const = default;
};

struct RunConfig {
  ModelSpec model;
  SpectralSettings spectral;
  CriterionSettings criterion;
  LyapunovSettings lyapunov;
  SimConfig simulation;
  /// start state; defaults to round(100 v)
  std::optional<State> x0;
  OutputSettings output;
  bool operator==(const RunConfig&) const = default;
};

std::string model_kind(const ModelSpec& spec);

/// Reads and validates a JSON config file. Schema violations raise
/// ConfigError naming the offending key; invalid PMFs and non-primitive mean
/// matrices are reported with their diagnostics.
RunConfig parse_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

/// Builds the model object; throws ConfigError on invalid laws, a
/// non-primitive mean matrix or a violated standing assumption.
std::unique_ptr<Model> build_model(const RunConfig& cfg);

}  // namespace critgrowth
