#pragma once

#include <nlohmann/json.hpp>

#include "fmsync/certificate.hpp"
#include "fmsync/metrics.hpp"
#include "fmsync/pipeline.hpp"

namespace fmsync {

/// Finite doubles as numbers, NaN and infinities as null.
[[nodiscard]] nlohmann::json json_number(double v);

[[nodiscard]] nlohmann::json to_json(const CertificateReport& report);
[[nodiscard]] nlohmann::json gains_json(const RunConfig& config, const DesignResult& design);
[[nodiscard]] nlohmann::json tail_json(const TailSummary& tail, const std::vector<Edge>& edges);

/// Pretty-printed JSON with a trailing newline.
[[nodiscard]] std::string dump(const nlohmann::json& doc);

}  // namespace fmsync
