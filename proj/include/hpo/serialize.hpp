#pragma once

#include <string>

#include "hpo/diagnostics.hpp"
#include "hpo/env.hpp"
#include "hpo/policy.hpp"

#include "json.hpp"

namespace hpo {

using ordered_json = nlohmann::ordered_json;

// Instance document: dims, seed, theta_star, weights, bias, scale and the
// measured/analytic reward ranges. Key order is fixed.
ordered_json instance_to_json(const BanditInstance& inst);
BanditInstance instance_from_json(const ordered_json& j);
void save_instance(const BanditInstance& inst, const std::string& path);
BanditInstance load_instance(const std::string& path);

// Dataset: line-delimited JSON, one record per line.
void save_dataset(const OfflineDataset& data, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

// Policy checkpoint: {"theta": [...], "d": n}.
void save_policy(const LogLinearPolicy& policy, const std::string& path);
LogLinearPolicy load_policy(const std::string& path);

ordered_json coverage_to_json(const CoverageReport& rep);

}  // namespace hpo
