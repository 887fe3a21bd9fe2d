#include "svitorus/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace svt {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_le(std::vector<unsigned char>& out, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    out.insert(out.end(), p, p + n);
}

}  // namespace

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.is_open()) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.good()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void atomic_write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.is_open()) throw std::runtime_error("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out.good()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string stats_to_csv(const StatsTable& table) {
    std::ostringstream out;
    out << "# svi-torus v1\n";
    out << "t,E_norm_H2,E_Psi_lambda,E_form_A,mean,"
           "mc_stderr_norm_H2,mc_stderr_Psi_lambda,mc_stderr_form_A,mc_stderr_mean\n";
    for (std::size_t i = 0; i < table.t.size(); ++i) {
        out << format_double(table.t[i]) << ',' << format_double(table.e_norm_H2[i]) << ','
            << format_double(table.e_psi_lambda[i]) << ',' << format_double(table.e_form_A[i]) << ','
            << format_double(table.mean[i]) << ',' << format_double(table.se_norm_H2[i]) << ','
            << format_double(table.se_psi_lambda[i]) << ',' << format_double(table.se_form_A[i])
            << ',' << format_double(table.se_mean[i]) << '\n';
    }
    return out.str();
}

std::vector<unsigned char> encode_snapshot(const ScalarField& f) {
    std::vector<unsigned char> out;
    const PeriodicGrid& g = f.grid();
    out.reserve(17 + f.size() * sizeof(double));
    append_le(out, "SVIT", 4);
    const unsigned char d = static_cast<unsigned char>(g.d);
    out.push_back(d);
    const std::uint32_t n = static_cast<std::uint32_t>(g.n);
    append_le(out, &n, 4);
    const std::uint64_t payload = static_cast<std::uint64_t>(f.size() * sizeof(double));
    append_le(out, &payload, 8);
    append_le(out, f.data(), f.size() * sizeof(double));
    return out;
}

ScalarField decode_snapshot(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 17 || std::memcmp(bytes.data(), "SVIT", 4) != 0) {
        throw std::runtime_error("snapshot: bad magic");
    }
    const int d = bytes[4];
    std::uint32_t n = 0;
    std::memcpy(&n, bytes.data() + 5, 4);
    std::uint64_t payload = 0;
    std::memcpy(&payload, bytes.data() + 9, 8);
    PeriodicGrid g(d, static_cast<int>(n));
    if (payload != g.size() * sizeof(double) || bytes.size() != 17 + payload) {
        throw std::runtime_error("snapshot: payload size mismatch");
    }
    std::vector<double> values(g.size());
    std::memcpy(values.data(), bytes.data() + 17, payload);
    return ScalarField(g, std::move(values));
}

void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
    atomic_write_bytes(path, encode_snapshot(f));
}

ScalarField read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("cannot read " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_snapshot(bytes);
}

nlohmann::json report_to_json(const VerifyReport& rep) {
    nlohmann::json j;
    j["name"] = rep.name;
    j["left"] = rep.left;
    j["right"] = rep.right;
    j["margin"] = rep.margin();
    j["stderr"] = rep.stderr_;
    j["abs_tol"] = rep.abs_tol;
    j["pass"] = rep.pass;
    j["runtime_seconds"] = rep.runtime_seconds;
    j["constants_used"] = rep.constants_used;
    if (!rep.notes.empty()) j["notes"] = rep.notes;
    return j;
}

nlohmann::json report_to_json(const ConditionReport& rep) {
    nlohmann::json j;
    j["condition"] = rep.condition;
    j["residual"] = rep.residual;
    j["tolerance"] = rep.tolerance;
    j["location"] = rep.location;
    j["pass"] = rep.pass;
    if (std::isfinite(rep.kappa)) j["kappa"] = rep.kappa;
    if (!rep.constants.empty()) j["constants"] = rep.constants;
    return j;
}

std::string render_report_line(const VerifyReport& rep) {
    std::ostringstream out;
    out << (rep.pass ? "[PASS] " : "[FAIL] ") << rep.name << ": left=" << rep.left
        << " right=" << rep.right << " margin=" << rep.margin() << " stderr=" << rep.stderr_;
    if (!rep.notes.empty()) out << "  (" << rep.notes << ")";
    return out.str();
}

std::string render_report_line(const ConditionReport& rep) {
    std::ostringstream out;
    out << (rep.pass ? "[PASS] " : "[FAIL] ") << "(" << rep.condition << ")";
    if (std::isfinite(rep.kappa)) {
        out << " kappa=" << rep.kappa;
    } else {
        out << " residual=" << rep.residual;
    }
    out << " at (" << rep.location[0] << "," << rep.location[1] << ")"
        << " tol=" << rep.tolerance;
    return out.str();
}

}  // namespace svt
