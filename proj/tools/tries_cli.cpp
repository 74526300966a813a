// Command-line front end: exact tables, asymptotic coefficients, Monte-Carlo
// summaries, whitening reports, joint histograms and cross-engine comparisons.
//
// Exit codes: 0 success, 2 usage or validation, 3 numeric failure, 4 I/O.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tries/io.hpp"
#include "tries/tries.hpp"

namespace {

using namespace tries;
using tries::io::json;

enum Exit { kOk = 0, kUsage = 2, kNumeric = 3, kIo = 4 };

struct RunConfig {
    std::string command;
    std::string p_text = "0.5";
    std::string ratio_text;
    bool irrational = false;
    std::int64_t n = 10000;
    int nmin = 256;
    int nmax = 1024;
    std::int64_t trials = 10000;
    std::uint64_t seed = 1;
    int kmax = 5;
    int lmax = 0;  // 0 = automatic
    int jmax = 40;
    std::string precision = "standard";
    std::string format = "auto";
    std::string out = "-";
    int threads = 1;
    bool emit_F = false;
    int points = 512;
    int bins = 40;
    std::string source = "auto";
    std::string raw_dump;
    double correction = 1.046;
    bool with_mc = false;

    // resolved during validation
    Bernoulli bits;
    std::optional<RatioSpec> ratio;
    Precision precision_mode = Precision::Standard;
    MatrixSource source_mode = MatrixSource::Exact;
};

/// q as the exact decimal complement of a plain decimal "0.ddd", so that
/// p = 0.3 and p = 0.7 describe the same pair of probabilities.
std::optional<std::string> decimal_complement(const std::string& text) {
    static const std::regex plain(R"(^0?\.([0-9]+)$)");
    std::smatch m;
    if (!std::regex_match(text, m, plain)) return std::nullopt;
    std::string digits = m[1].str();
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    // 10^L - d, digit by digit
    std::string out(digits.size(), '0');
    int borrow = 0;
    for (std::size_t i = digits.size(); i-- > 0;) {
        const int top = (i == digits.size() - 1) ? 10 : 9;
        int d = top - (digits[i] - '0') - borrow;
        borrow = 0;
        if (d < 0) {
            d += 10;
            borrow = 1;
        }
        out[i] = static_cast<char>('0' + d);
    }
    while (out.size() > 1 && out.back() == '0') out.pop_back();
    return "0." + out;
}

Bernoulli parse_probability(const std::string& text) {
    double p = 0.0;
    std::size_t used = 0;
    try {
        p = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || !(p > 0.0 && p < 1.0)) throw Error(ErrorKind::Precondition, "p must be in (0,1)");
    if (auto q = decimal_complement(text)) return Bernoulli::from_pair(p, std::stod(*q));
    return Bernoulli::from_p(p);
}

RatioSpec parse_ratio(const std::string& text) {
    static const std::regex form(R"(^([0-9]+)/([0-9]+)$)");
    std::smatch m;
    if (!std::regex_match(text, m, form)) throw Error(ErrorKind::Precondition, "--ratio expects r/l, e.g. 2/1");
    return RatioSpec::make_rational(std::stoi(m[1].str()), std::stoi(m[2].str()));
}

void validate(RunConfig& c) {
    c.bits = parse_probability(c.p_text);
    require(!(c.irrational && !c.ratio_text.empty()), "--ratio and --irrational are exclusive");
    if (!c.ratio_text.empty()) c.ratio = parse_ratio(c.ratio_text);
    if (c.irrational) c.ratio = RatioSpec::irrational();

    if (c.precision == "standard") c.precision_mode = Precision::Standard;
    else if (c.precision == "extended") c.precision_mode = Precision::Extended;
    else throw Error(ErrorKind::Precondition, "--precision must be standard or extended");

    if (c.format == "auto") {
        const bool tabular = c.command == "exact" || c.command == "hist" || c.command == "compare" ||
                             (c.command == "asym" && c.emit_F);
        c.format = tabular ? "csv" : "json";
    }
    require(c.format == "csv" || c.format == "json", "--format must be csv or json");
    require(c.kmax >= 0 && c.kmax <= 50, "--kmax must be in [0,50]");
    require(c.lmax >= 0, "--lmax must be non-negative");
    require(c.jmax >= 0, "--jmax must be non-negative");
    require(c.threads >= 1, "--threads must be at least 1");

    if (c.command == "exact") {
        require(c.nmax >= 2 && c.nmax <= kMaxExactN, "--nmax must be in [2," + std::to_string(kMaxExactN) + "]");
    } else if (c.command == "asym") {
        require(c.points >= 2, "--points must be at least 2");
        require(c.nmin >= 2, "--nmin must be at least 2");
    } else if (c.command == "simulate" || c.command == "whiten" || c.command == "hist") {
        require(c.n >= 2, "--n must be at least 2");
        require(c.trials >= (c.command == "hist" ? 2 : 100),
                c.command == "hist" ? "--trials must be at least 2" : "--trials must be at least 100");
        if (c.command == "hist") require(c.bins >= 10, "--bins must be at least 10");
        if (c.command == "whiten") {
            if (c.source == "auto") c.source_mode = c.n <= kMaxExactN ? MatrixSource::Exact : MatrixSource::Asymptotic;
            else if (c.source == "exact") c.source_mode = MatrixSource::Exact;
            else if (c.source == "sample") c.source_mode = MatrixSource::Sample;
            else if (c.source == "asymptotic") c.source_mode = MatrixSource::Asymptotic;
            else throw Error(ErrorKind::Precondition, "--source must be exact, sample or asymptotic");
            c.source = std::string(to_string(c.source_mode));
            if (c.source_mode == MatrixSource::Exact)
                require(c.n <= kMaxExactN, "--source exact needs --n <= " + std::to_string(kMaxExactN));
        }
    } else if (c.command == "compare") {
        require(c.nmin >= 2 && c.nmin <= c.nmax, "--nmin must be in [2, nmax]");
        require(c.nmax <= kMaxExactN, "--nmax must not exceed " + std::to_string(kMaxExactN));
        if (c.with_mc) require(c.trials >= 100, "--trials must be at least 100");
    }
}

std::string fmt(double x) { return io::fmt(x); }

/// Resolved configuration echoed into every output.
std::string config_text(const RunConfig& c) {
    std::ostringstream o;
    o << "command=" << c.command << " p=" << c.p_text << " q=" << fmt(c.bits.q);
    auto put = [&](const char* key, const auto& value) { o << ' ' << key << '=' << value; };
    const std::string& cmd = c.command;
    if (cmd == "asym" || cmd == "compare")
        put("ratio", c.ratio ? (c.ratio->rational ? std::to_string(c.ratio->r) + "/" + std::to_string(c.ratio->l)
                                                  : std::string("irrational"))
                             : std::string("auto"));
    if (cmd == "exact") put("nmax", c.nmax);
    if (cmd == "exact" || cmd == "compare") put("precision", c.precision);
    if (cmd == "asym" || cmd == "compare") {
        put("kmax", c.kmax);
        put("lmax", c.lmax == 0 ? std::string("auto") : std::to_string(c.lmax));
        put("jmax", c.jmax);
    }
    if (cmd == "asym") {
        put("emit_F", c.emit_F ? "true" : "false");
        if (c.emit_F) {
            put("points", c.points);
            put("nmin", c.nmin);
        }
    }
    if (cmd == "compare") {
        put("nmin", c.nmin);
        put("nmax", c.nmax);
        put("correction", fmt(c.correction));
        put("with_mc", c.with_mc ? "true" : "false");
    }
    if (cmd == "simulate" || cmd == "whiten" || cmd == "hist" || (cmd == "compare" && c.with_mc)) {
        if (cmd != "compare") put("n", c.n);
        put("trials", c.trials);
        put("seed", c.seed);
    }
    if (cmd == "whiten") put("source", c.source);
    if (cmd == "hist") put("bins", c.bins);
    put("format", c.format);
    return o.str();
}

void emit(const RunConfig& c, const std::string& content) {
    if (c.out == "-") {
        std::cout << content;
        std::cout.flush();
        if (!std::cout) throw Error(ErrorKind::Io, "cannot write to stdout");
    } else {
        io::write_atomic(c.out, content);
    }
}

void emit_json(const RunConfig& c, const json& j) { emit(c, j.dump(2) + "\n"); }

Truncation truncation_for(const RunConfig& c, const ModelParams& m) {
    Truncation t = default_truncation(m);
    if (c.lmax > 0) t.l_max = c.lmax;
    t.j_max = c.jmax;
    t.k_max = c.kmax;
    return t;
}

// ---------------------------------------------------------------------------

void cmd_exact(const RunConfig& c, const std::string& cfg) {
    const MomentTable t = compute(c.bits, c.nmax, c.precision_mode);
    if (c.format == "csv") emit(c, io::moment_table_csv(t, cfg));
    else emit_json(c, io::moment_table_json(t, cfg));
}

void cmd_asym(const RunConfig& c, const std::string& cfg) {
    const ModelParams m = params(c.bits, c.ratio);
    const Truncation trunc = truncation_for(c, m);
    if (c.emit_F) {
        if (!m.symmetric()) throw Error(ErrorKind::VariantUnavailable, "F(n) exists only for p = 1/2");
        const SymmetricFluctuations fl(trunc);
        const double start = std::log2(static_cast<double>(c.nmin));
        if (c.format == "csv") {
            emit(c, io::fluctuation_csv(fl, c.points, start, cfg));
        } else {
            json xs = json::array(), fs = json::array();
            for (int i = 0; i < c.points; ++i) {
                const double x = start + double(i) / c.points;
                xs.push_back(x);
                fs.push_back(fl.F(std::exp2(x)));
            }
            emit_json(c, json{{"config", cfg}, {"log2n", xs}, {"F", fs}});
        }
        return;
    }
    json j{{"config", cfg}, {"params", io::params_json(m)}, {"truncation", io::truncation_json(trunc)}};
    json coeffs = json::object();
    if (m.symmetric()) {
        const SymmetricFluctuations fl(trunc);
        coeffs["g1"] = io::coeffs_json(fl.g1());
        coeffs["g2"] = io::coeffs_json(fl.g2());
        coeffs["g3"] = io::coeffs_json(fl.g3());
        j["mean_correlation"] = fl.mean_level();
    } else {
        coeffs["g1"] = "unavailable for p != 1/2";
        coeffs["g2"] = io::coeffs_json(general_g2_coeffs(m, trunc));
        coeffs["g3"] = "unavailable for p != 1/2";
    }
    j["coefficients"] = std::move(coeffs);
    if (c.format == "json") emit_json(c, j);
    else emit(c, io::flat_csv(j, cfg));
}

void cmd_simulate(const RunConfig& c, const std::string& cfg) {
    std::vector<ShapeStats> raw;
    const SampleSummary s =
        run(c.n, c.bits.p, c.trials, c.seed, {c.threads, c.raw_dump.empty() ? nullptr : &raw});
    const json j = io::summary_json(s, cfg);
    // stage both outputs before touching the filesystem
    const std::string main = c.format == "json" ? j.dump(2) + "\n" : io::flat_csv(j, cfg);
    if (!c.raw_dump.empty()) io::write_atomic(c.raw_dump, io::raw_csv(raw, cfg));
    emit(c, main);
}

void cmd_whiten(const RunConfig& c, const std::string& cfg) {
    const WhitenReport r = whiten(c.n, c.bits.p, c.trials, c.seed, c.source_mode, c.threads);
    const json j = io::whiten_json(r, cfg);
    if (c.format == "json") emit_json(c, j);
    else emit(c, io::flat_csv(j, cfg));
}

void cmd_hist(const RunConfig& c, const std::string& cfg) {
    const HistogramGrid g = joint_histogram(c.n, c.bits.p, c.trials, c.seed, c.bins, c.threads);
    if (c.format == "json") emit_json(c, io::histogram_json(g, cfg));
    else emit(c, io::histogram_csv(g, cfg));
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : std::nan("");
}

void cmd_compare(const RunConfig& c, const std::string& cfg) {
    const MomentTable t = compute(c.bits, c.nmax, c.precision_mode);
    const ModelParams m = params(c.bits, c.ratio);
    const Truncation trunc = truncation_for(c, m);
    std::optional<SymmetricFluctuations> fl;
    FourierCoeffs g2;
    if (m.symmetric()) {
        fl.emplace(trunc);
        g2 = fl->g2();
    } else {
        g2 = general_g2_coeffs(m, trunc);
    }
    std::vector<int> grid;
    for (long n = 1; n <= c.nmax; n *= 2)
        if (n >= c.nmin) grid.push_back(static_cast<int>(n));
    require(grid.size() >= 2 || m.symmetric(), "compare needs at least two powers of two in [nmin, nmax]");

    std::vector<std::string> cols = {"n", "log2n", "CovSK_n", "Fg2", "AbsDiffCov_g2", "VarS_n", "VarK_n", "RhoSK",
                                     "RhoSK_corrected"};
    if (fl) {
        for (const char* extra : {"Fg1", "Fg3", "F", "AbsDiffVarS_g1", "AbsDiffVarK_g3"}) cols.emplace_back(extra);
    }
    if (c.with_mc) {
        cols.emplace_back("RhoSK_mc");
        cols.emplace_back("RhoSK_mc_se");
    }
    std::vector<std::vector<double>> rows;
    std::vector<double> lx, ly;
    for (int n : grid) {
        const double nd = n;
        const double cov = t.cov_SK(n), vs = t.var_S(n), vk = t.var_K(n);
        const double fg2 = fluct_eval(g2, nd);
        std::vector<double> row = {nd,           std::log2(nd),
                                   cov / nd,     fg2,
                                   std::abs(cov / nd - fg2), vs / nd,
                                   vk / nd,      t.rho_SK(n),
                                   cov / std::sqrt(vs * (vk + c.correction))};
        if (fl) {
            const double f1 = fluct_eval(fl->g1(), nd), f3 = fluct_eval(fl->g3(), nd);
            row.insert(row.end(), {f1, f3, fl->F(nd), std::abs(vs / nd - f1), std::abs(vk / nd - f3)});
        }
        if (c.with_mc) {
            const SampleSummary s = run(n, c.bits.p, c.trials, c.seed, {c.threads});
            const double r = s.rho(kS, kK);
            row.push_back(r);
            row.push_back((1 - r * r) / std::sqrt(double(c.trials)));
        }
        rows.push_back(std::move(row));
        lx.push_back(std::log(nd));
        ly.push_back(vk / nd);
    }
    const double fit = slope(lx, ly);
    const double rel_err = m.lambda > 0 ? std::abs(fit / m.lambda - 1.0) : std::nan("");

    if (c.format == "csv") {
        std::string out = io::config_line(cfg);
        out += "# lambda=" + fmt(m.lambda) + " lambda_alt=" + fmt(m.lambda_alt) + " slope_VarK_n_vs_ln_n=" +
               fmt(fit) + " rel_err=" + fmt(rel_err) + " g2_0=" + fmt(g2.at(0).real()) + "\n";
        for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out += (i ? "," : "") + (i == 0 ? std::to_string(static_cast<long>(row[i])) : fmt(row[i]));
            out += "\n";
        }
        emit(c, out);
    } else {
        json table = json::object();
        for (std::size_t i = 0; i < cols.size(); ++i) {
            json col = json::array();
            for (const auto& row : rows) col.push_back(io::detail::number_or_null(row[i]));
            table[cols[i]] = std::move(col);
        }
        emit_json(c, json{{"config", cfg},
                          {"params", io::params_json(m)},
                          {"g2_0", g2.at(0).real()},
                          {"lambda_fit", {{"slope", io::detail::number_or_null(fit)},
                                          {"rel_err", io::detail::number_or_null(rel_err)}}},
                          {"columns", std::move(table)}});
    }
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Precondition:
    case ErrorKind::RatioSpecMismatch:
    case ErrorKind::VariantUnavailable:
    case ErrorKind::IndexOutOfRange: return kUsage;
    case ErrorKind::Io: return kIo;
    default: return kNumeric;
    }
}

} // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"Moments, asymptotics and simulation of random binary tries"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value file; command-line flags override it");

    app.add_option("--p", c.p_text, "Probability of a 1 bit, in (0,1)")->capture_default_str();
    app.add_option("--ratio", c.ratio_text, "log p / log q as r/l (rational case)");
    app.add_flag("--irrational", c.irrational, "Treat log p / log q as irrational");
    app.add_option("--n", c.n, "Number of keys")->capture_default_str();
    app.add_option("--nmin", c.nmin, "Smallest n of a grid (compare) or start of the F period (asym)")
        ->capture_default_str();
    app.add_option("--nmax", c.nmax, "Largest n of the exact table")->capture_default_str();
    app.add_option("--trials", c.trials, "Monte-Carlo trials")->capture_default_str();
    app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app.add_option("--kmax", c.kmax, "Fourier truncation")->capture_default_str();
    app.add_option("--lmax", c.lmax, "l-series truncation (0 = automatic)")->capture_default_str();
    app.add_option("--jmax", c.jmax, "j-convolution truncation")->capture_default_str();
    app.add_option("--precision", c.precision, "standard | extended")->capture_default_str();
    app.add_option("--format", c.format, "csv | json (auto picks per command)")->capture_default_str();
    app.add_option("--out", c.out, "Output path, - for stdout")->capture_default_str();
    app.add_option("--threads", c.threads, "Worker threads for simulation")->capture_default_str();
    app.add_flag("--emit-F", c.emit_F, "asym: sample F(n) over one period");
    app.add_option("--points", c.points, "asym --emit-F: samples per period")->capture_default_str();
    app.add_option("--bins", c.bins, "hist: bins per axis")->capture_default_str();
    app.add_option("--source", c.source, "whiten: exact | sample | asymptotic | auto")->capture_default_str();
    app.add_option("--raw-dump", c.raw_dump, "simulate: write per-trial (trial,S,K,N) CSV here");
    app.add_option("--correction", c.correction, "compare: constant added to Var K in the corrected rho")
        ->capture_default_str();
    app.add_flag("--with-mc", c.with_mc, "compare: add Monte-Carlo correlation columns");

    for (const char* name : {"exact", "asym", "simulate", "whiten", "hist", "compare"})
        app.add_subcommand(name)->callback([&c, name] { c.command = name; });
    app.get_subcommand("exact")->description("Exact moment table for n <= nmax");
    app.get_subcommand("asym")->description("Model constants, Fourier coefficients, F(n) samples");
    app.get_subcommand("simulate")->description("Monte-Carlo moments of (S, K, N)");
    app.get_subcommand("whiten")->description("Whitened (S, K) diagnostics");
    app.get_subcommand("hist")->description("Joint histogram of standardized (S, K)");
    app.get_subcommand("compare")->description("Exact vs asymptotic on a power-of-two grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        validate(c);
        const std::string cfg = config_text(c);
        if (c.command == "exact") cmd_exact(c, cfg);
        else if (c.command == "asym") cmd_asym(c, cfg);
        else if (c.command == "simulate") cmd_simulate(c, cfg);
        else if (c.command == "whiten") cmd_whiten(c, cfg);
        else if (c.command == "hist") cmd_hist(c, cfg);
        else cmd_compare(c, cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kOk;
}
