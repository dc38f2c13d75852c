#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "critgrowth/criterion.hpp"
#include "critgrowth/lyapunov.hpp"
#include "critgrowth/montecarlo.hpp"
#include "critgrowth/spectral.hpp"

namespace critgrowth {

// JSON views of the analysis results. Field order is fixed by nlohmann's
// sorted objects, so equal inputs dump to identical bytes.
nlohmann::json report_json(const PerronData& pd);
nlohmann::json report_json(const CriterionReport& rep);
nlohmann::json report_json(const EnsembleReport& rep);
nlohmann::json report_json(const GapRecord& rec);
nlohmann::json report_json(const ScanResult& scan);
nlohmann::json report_json(const MomentScan& scan);
nlohmann::json report_json(const std::vector<TransversePoint>& profile);
nlohmann::json report_json(const AuditReport& rep);

// CSV tables (header line + one row per record).
std::string ratio_samples_csv(const CriterionReport& rep);
std::string trajectories_csv(const EnsembleReport& rep);
std::string gaps_csv(const std::vector<ScanResult>& scans);
std::string moments_csv(const MomentScan& scan);

}  // namespace critgrowth
