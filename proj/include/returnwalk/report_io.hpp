#pragma once

// CSV and JSON writers. Every file carries the law fingerprint, tool version,
// arithmetic mode and seed; nothing time- or host-dependent is written, so
// identical runs produce identical bytes.

#include "returnwalk/oracle.hpp"
#include "returnwalk/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace rw {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunMeta {
  std::string command;
  std::string fingerprint;
  std::string mode;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json meta_json(const RunMeta& meta);
std::string format_double(double x);  // 17 significant digits

nlohmann::ordered_json class_json(const StepLaw& law, const WalkClass& cls);
nlohmann::ordered_json extrapolation_json(const Extrapolation& ex);
nlohmann::ordered_json summary_json(const ComputeResult& res, const RunMeta& meta);
nlohmann::ordered_json verify_json(const VerifyResult& v, const Tolerances& tol, const RunMeta& meta);
nlohmann::ordered_json mc_json(const MCEstimate& mc, const RunMeta& meta);

void write_u_csv(const std::filesystem::path& path, const USeq& u, const RunMeta& meta);
void write_p_csv(const std::filesystem::path& path, const TauDist& tau, const RunMeta& meta);
void write_plot_csv(const std::filesystem::path& path, const VerifyResult& v, const RunMeta& meta);
void write_mc_csv(const std::filesystem::path& path, const MCEstimate& mc, const RunMeta& meta);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

}  // namespace rw
