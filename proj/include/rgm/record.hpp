#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rgm/pipeline.hpp"

namespace rgm {

inline constexpr int kRunRecordSchemaVersion = 1;

using Json = nlohmann::ordered_json;

std::string_view seed_mode_name(SeedMode m) noexcept;
SeedMode parse_seed_mode(std::string_view s);
std::string_view pi_mode_name(PiMode m) noexcept;
PiMode parse_pi_mode(std::string_view s);

Json to_json(const RunConfig& cfg);
Json to_json(const TrialRecord& t);
Json to_json(const RunRecord& r);

/// Mean/median overlaps, failure counts, cleaning iterations and resamples.
Json summarize(const std::vector<TrialRecord>& trials);

void write_manifest(const std::string& path, const RunRecord& r);

/// One row per (cell, trial).
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells);
Json sweep_summary(const std::vector<SweepCell>& cells);

/// Reference constants: paper-mode K0 bound, Lambda, varphi''(0), alpha, psi(rho), ...
Json constants_json(double rho, double b, Index n, Index k0);

}  // namespace rgm
