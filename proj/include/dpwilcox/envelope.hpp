#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpwilcox/experiments.hpp"
#include "dpwilcox/reference.hpp"
#include "dpwilcox/tc.hpp"
#include "dpwilcox/types.hpp"

namespace dpwilcox {

// Insertion-ordered JSON keeps envelopes byte-stable across runs.
using Json = nlohmann::ordered_json;

std::string to_string(Sidedness sidedness);
std::optional<Sidedness> sidedness_from_string(const std::string& name);

// Shortest round-trip decimal representation.
std::string format_double(double value);

// {"command":..., "version":..., "parameters":..., "payload":...}; the
// envelope alone identifies the run: parameters carry every knob and seed.
Json make_envelope(const std::string& command, Json parameters, Json payload);

Json to_json(const PrivateTestResult& result);
Json to_json(const TcResult& result);
Json to_json(const PowerEstimate& estimate);
Json to_json(const std::vector<CriticalValueRow>& rows);
Json to_json(const UniformityReport& report, bool include_arrays);

// CSV renderings with the documented column schemas.
std::string power_csv(const std::vector<PowerEstimate>& estimates);
std::string tables_csv(const std::vector<CriticalValueRow>& rows);
std::string uniformity_csv(const UniformityReport& report);

}  // namespace dpwilcox
