#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "tries/asymptotics.hpp"
#include "tries/errors.hpp"
#include "tries/exact_moments.hpp"
#include "tries/montecarlo.hpp"

namespace tries::io {

using json = nlohmann::ordered_json;

/// Round-trip formatting of a double; non-finite values print as nan/inf.
inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Writes `content` to `path` via a sibling temporary file and a rename, so a
/// failed command never leaves a partial file behind.
inline void write_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorKind::Io, "write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot rename onto " + path.string());
    }
}

inline std::string config_line(std::string_view config) { return "# config: " + std::string(config) + "\n"; }

// ---------------------------------------------------------------------------
// MomentTable
// ---------------------------------------------------------------------------

namespace detail {

inline double rho_or_nan(double cov, double va, double vb) {
    return (va > 0.0 && vb > 0.0) ? cov / std::sqrt(va * vb) : std::numeric_limits<double>::quiet_NaN();
}

} // namespace detail

/// Columns: n, ES, EK, EN, VarS, VarK, VarN, CovSK, CovSN, RhoSK, RhoSN.
/// Correlations are nan where a variance vanishes (n < 2).
inline std::string moment_table_csv(const MomentTable& t, std::string_view config) {
    std::string out = config_line(config);
    out += "n,ES,EK,EN,VarS,VarK,VarN,CovSK,CovSN,RhoSK,RhoSN\n";
    for (int n = 0; n <= t.n_max(); ++n) {
        const double vs = t.var_S(n), vk = t.var_K(n), vn = t.var_N(n);
        out += std::to_string(n);
        for (double v : {t.mean_S(n), t.mean_K(n), t.mean_N(n), vs, vk, vn, t.cov_SK(n), t.cov_SN(n),
                         detail::rho_or_nan(t.cov_SK(n), vs, vk), detail::rho_or_nan(t.cov_SN(n), vs, vn)}) {
            out += ',';
            out += fmt(v);
        }
        out += '\n';
    }
    return out;
}

namespace detail {

// JSON has no nan; missing correlations become null.
inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

} // namespace detail

inline json moment_table_json(const MomentTable& t, std::string_view config) {
    json cols = json::object();
    for (const char* name : {"n", "ES", "EK", "EN", "VarS", "VarK", "VarN", "CovSK", "CovSN", "RhoSK", "RhoSN"})
        cols[name] = json::array();
    for (int n = 0; n <= t.n_max(); ++n) {
        const double vs = t.var_S(n), vk = t.var_K(n), vn = t.var_N(n);
        cols["n"].push_back(n);
        cols["ES"].push_back(t.mean_S(n));
        cols["EK"].push_back(t.mean_K(n));
        cols["EN"].push_back(t.mean_N(n));
        cols["VarS"].push_back(vs);
        cols["VarK"].push_back(vk);
        cols["VarN"].push_back(vn);
        cols["CovSK"].push_back(t.cov_SK(n));
        cols["CovSN"].push_back(t.cov_SN(n));
        cols["RhoSK"].push_back(detail::number_or_null(detail::rho_or_nan(t.cov_SK(n), vs, vk)));
        cols["RhoSN"].push_back(detail::number_or_null(detail::rho_or_nan(t.cov_SN(n), vs, vn)));
    }
    return json{{"config", std::string(config)},       {"p", t.p()},          {"q", t.q()},
                {"n_max", t.n_max()},     {"precision", std::string(to_string(t.precision()))},
                {"columns", std::move(cols)}};
}

// ---------------------------------------------------------------------------
// Asymptotics
// ---------------------------------------------------------------------------

inline json truncation_json(const Truncation& t) {
    return json{{"l_max", t.l_max}, {"j_max", t.j_max}, {"k_max", t.k_max}, {"tolerance", t.tolerance}};
}

/// One record per coefficient: {family, k, re, im, trunc}.
inline json coeffs_json(const FourierCoeffs& c) {
    json rows = json::array();
    for (int k = -c.k_max; k <= c.k_max; ++k) {
        const cplx g = c.at(k);
        rows.push_back(json{{"family", std::string(to_string(c.family))}, {"k", k}, {"re", g.real()}, {"im", g.imag()},
                            {"trunc", truncation_json(c.trunc)}});
    }
    return rows;
}

inline json params_json(const ModelParams& m) {
    json ratio = m.ratio.rational ? json{{"kind", "rational"}, {"r", m.ratio.r}, {"l", m.ratio.l}}
                                  : json{{"kind", "irrational"}};
    ratio["detected"] = m.ratio_detected;
    return json{{"p", m.p}, {"q", m.q}, {"h", m.h}, {"lambda", m.lambda}, {"lambda_alt", m.lambda_alt},
                {"ratio", std::move(ratio)}};
}

/// (log2 n, F(n)) at `points` equally spaced positions of one period.
inline std::string fluctuation_csv(const SymmetricFluctuations& fl, int points, double log2_start,
                                   std::string_view config) {
    require(points >= 2, "need at least two points");
    std::string out = config_line(config);
    out += "log2n,F\n";
    for (int i = 0; i < points; ++i) {
        const double x = log2_start + static_cast<double>(i) / points;
        out += fmt(x) + "," + fmt(fl.F(std::exp2(x))) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo results
// ---------------------------------------------------------------------------

inline constexpr const char* kCoordNames[3] = {"S", "K", "N"};

inline json summary_json(const SampleSummary& s, std::string_view config) {
    json j{{"config", config}, {"n", s.n}, {"p", s.p}, {"trials", s.trials}, {"seed", s.seed}};
    json mean, se, skew, kurt;
    for (std::size_t i = 0; i < 3; ++i) {
        mean[kCoordNames[i]] = s.mean[i];
        se[kCoordNames[i]] = s.stderr_mean[i];
        skew[kCoordNames[i]] = s.skewness[i];
        kurt[kCoordNames[i]] = s.excess_kurtosis[i];
    }
    j["mean"] = mean;
    j["stderr_mean"] = se;
    j["cov"] = json{{"SS", s.cov[0][0]}, {"KK", s.cov[1][1]}, {"NN", s.cov[2][2]},
                    {"SK", s.cov[0][1]}, {"SN", s.cov[0][2]}, {"KN", s.cov[1][2]}};
    j["rho"] = json{{"SK", s.rho(0, 1)}, {"SN", s.rho(0, 2)}, {"KN", s.rho(1, 2)}};
    j["skewness"] = skew;
    j["excess_kurtosis"] = kurt;
    return j;
}

/// Flattens a JSON object into `key,value` CSV rows (nested keys joined by '.').
inline std::string flat_csv(const json& j, std::string_view config) {
    std::string out = config_line(config);
    out += "key,value\n";
    const json flat = j.flatten();
    for (const auto& [key, value] : flat.items()) {
        if (key == "/config") continue;
        std::string name = key.substr(1);
        for (auto& ch : name)
            if (ch == '/') ch = '.';
        out += name + ",";
        if (value.is_number_float()) out += fmt(value.get<double>());
        else if (value.is_string()) out += value.get<std::string>();
        else out += value.dump();
        out += '\n';
    }
    return out;
}

inline json whiten_json(const WhitenReport& r, std::string_view config) {
    return json{{"config", std::string(config)},
                {"n", r.n},
                {"p", r.p},
                {"trials", r.trials},
                {"seed", r.seed},
                {"source", std::string(to_string(r.source))},
                {"centering", std::string(to_string(r.centering))},
                {"mean", {{"S", r.mean_S}, {"K", r.mean_K}}},
                {"sigma", {{"a", r.sigma.a}, {"b", r.sigma.b}, {"c", r.sigma.c}}},
                {"whitened_cov", {{"a", r.whitened_cov.a}, {"b", r.whitened_cov.b}, {"c", r.whitened_cov.c}}},
                {"whitened_mean", r.whitened_mean},
                {"skewness", r.skewness},
                {"excess_kurtosis", r.excess_kurtosis},
                {"ks_distance", r.ks_distance},
                {"max_offdiag", r.max_offdiag},
                {"max_identity_deviation", r.max_identity_deviation()}};
}

inline json normality_json(const NormalityReport& r, std::string_view config) {
    auto marginal = [](const MarginalDiagnostics& d) {
        return json{{"mean", d.mean},
                    {"sd", d.sd},
                    {"skewness", d.skewness},
                    {"excess_kurtosis", d.excess_kurtosis},
                    {"ks_distance", d.ks_distance}};
    };
    return json{{"config", std::string(config)}, {"n", r.n},          {"p", r.p},
                {"trials", r.trials}, {"seed", r.seed},  {"S", marginal(r.size)},
                {"K", marginal(r.kpl)}};
}

inline json histogram_json(const HistogramGrid& g, std::string_view config) {
    return json{{"config", std::string(config)}, {"n", g.n},         {"p", g.p},
                {"trials", g.trials}, {"seed", g.seed}, {"bins", g.bins},
                {"range", g.range},   {"mean_S", g.mean_S}, {"sd_S", g.sd_S},
                {"mean_K", g.mean_K}, {"sd_K", g.sd_K}, {"rho", g.rho},
                {"counts", g.counts}};
}

/// Columns: row, col, s_lo, s_hi, k_lo, k_hi, count (standardized bin edges).
inline std::string histogram_csv(const HistogramGrid& g, std::string_view config) {
    std::string out = config_line(config);
    out += "# rho=" + fmt(g.rho) + " mean_S=" + fmt(g.mean_S) + " sd_S=" + fmt(g.sd_S) +
           " mean_K=" + fmt(g.mean_K) + " sd_K=" + fmt(g.sd_K) + "\n";
    out += "row,col,s_lo,s_hi,k_lo,k_hi,count\n";
    const double width = 2.0 * g.range / g.bins;
    for (int r = 0; r < g.bins; ++r)
        for (int c = 0; c < g.bins; ++c) {
            out += std::to_string(r) + "," + std::to_string(c) + "," + fmt(-g.range + r * width) + "," +
                   fmt(-g.range + (r + 1) * width) + "," + fmt(-g.range + c * width) + "," +
                   fmt(-g.range + (c + 1) * width) + "," + std::to_string(g.at(r, c)) + "\n";
        }
    return out;
}

/// Per-trial dump with columns trial, S, K, N.
inline std::string raw_csv(const std::vector<ShapeStats>& raw, std::string_view config) {
    std::string out = config_line(config);
    out += "trial,S,K,N\n";
    for (std::size_t t = 0; t < raw.size(); ++t)
        out += std::to_string(t) + "," + std::to_string(raw[t].size) + "," + std::to_string(raw[t].kpl) + "," +
               std::to_string(raw[t].npl) + "\n";
    return out;
}

} // namespace tries::io
