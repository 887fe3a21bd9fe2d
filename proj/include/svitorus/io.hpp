#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svitorus/field.hpp"
#include "svitorus/report.hpp"

namespace svt {

/// Write-then-rename so readers never observe a partial file.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);
void atomic_write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

/// Per-time Monte-Carlo aggregates emitted by the simulate command.
struct StatsTable {
    std::vector<double> t;
    std::vector<double> e_norm_H2, e_psi_lambda, e_form_A, mean;
    std::vector<double> se_norm_H2, se_psi_lambda, se_form_A, se_mean;
};

/// CSV with the versioned "# svi-torus v1" header comment.
std::string stats_to_csv(const StatsTable& table);

/// Snapshot codec: 4-byte magic "SVIT", u8 d, u32 n, u64 payload bytes,
/// little-endian, then row-major doubles.
std::vector<unsigned char> encode_snapshot(const ScalarField& f);
ScalarField decode_snapshot(const std::vector<unsigned char>& bytes);
void write_snapshot(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_snapshot(const std::filesystem::path& path);

nlohmann::json report_to_json(const VerifyReport& rep);
nlohmann::json report_to_json(const ConditionReport& rep);
std::string render_report_line(const VerifyReport& rep);
std::string render_report_line(const ConditionReport& rep);

}  // namespace svt
