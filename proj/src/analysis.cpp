#include "ctq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

namespace ctq {

namespace {

const double kOffsetX = (std::sqrt(5.0) + 1.0) / 2.0;
const double kOffsetY = std::sqrt(5.0) + 1.0;

double erf_factor(double coefficient, double offset, double variance) {
    const double arg = std::sqrt(std::numbers::pi) /
                       (2.0 * std::sqrt(2.0) * std::sqrt(variance * (coefficient + offset)));
    return std::erf(arg);
}

} // namespace

double variance_from_db(double s_db) {
    if (!std::isfinite(s_db))
        throw Error(ErrorCode::InvalidArgument, "squeezing degree must be finite");
    return std::pow(10.0, -s_db / 10.0) / 4.0;
}

double db_from_variance(double variance) {
    if (!(variance > 0.0))
        throw Error(ErrorCode::InvalidArgument, "variance must be positive");
    return -10.0 * std::log10(4.0 * variance);
}

SqueezingLevel SqueezingLevel::from_db(double s_db) {
    return {s_db, variance_from_db(s_db)};
}

SqueezingLevel SqueezingLevel::from_variance(double variance) {
    return {db_from_variance(variance), variance};
}

const ErrorProfile kProfileTwelve = {{5.0, 3.0}, {5.0, 3.0}, {5.0, 3.0}};
const ErrorProfile kProfileTwo = {{2.0, 2.0}, {2.0, 2.0}, {2.0, 2.0}};

ErrorProfile three_node_profile(double g) {
    const double x = 2.0 + 1.0 / (g * g);
    const double y = 1.0 + g * g;
    return {{x, y}, {x, y}, {x, y}};
}

double protocol_error_probability(const ErrorProfile& profile, const SqueezingLevel& level) {
    if (profile.empty())
        throw Error(ErrorCode::InvalidArgument, "error profile is empty");
    if (!(level.variance > 0.0))
        throw Error(ErrorCode::InvalidArgument, "squeezed variance must be positive");
    double product = 1.0;
    for (const auto& [x_er, y_er] : profile) {
        if (x_er < 0.0 || y_er < 0.0)
            throw Error(ErrorCode::InvalidArgument, "error coefficients must be non-negative");
        product *= erf_factor(x_er, kOffsetX, level.variance);
        product *= erf_factor(y_er, kOffsetY, level.variance);
    }
    return std::clamp(1.0 - product, 0.0, 1.0);
}

WeightOptimum optimize_weight(double s_db) {
    const SqueezingLevel level = SqueezingLevel::from_db(s_db);
    const auto objective = [&level](double g) {
        return protocol_error_probability(three_node_profile(g), level);
    };
    constexpr double kLo = 0.2, kHi = 5.0;

    // Bracket the minimum on a coarse grid before the golden-section phase.
    constexpr int kGrid = 65;
    double best_g = kLo, best_f = objective(kLo);
    int best_i = 0;
    for (int i = 1; i < kGrid; ++i) {
        const double g = kLo + (kHi - kLo) * i / (kGrid - 1);
        const double f = objective(g);
        if (f < best_f) {
            best_f = f;
            best_g = g;
            best_i = i;
        }
    }

    double a, b;
    if (best_i == 0 || best_i == kGrid - 1) {
        // No interior bracket; fall back to a dense scan.
        double g = kLo, f = objective(kLo);
        for (int i = 1; i < 100000; ++i) {
            const double gi = kLo + (kHi - kLo) * i / 99999.0;
            const double fi = objective(gi);
            if (fi < f) {
                f = fi;
                g = gi;
            }
        }
        return {g, f};
    }
    a = kLo + (kHi - kLo) * (best_i - 1) / (kGrid - 1);
    b = kLo + (kHi - kLo) * (best_i + 1) / (kGrid - 1);

    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = objective(c), fd = objective(d);
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    const double g = 0.5 * (a + b);
    return {g, objective(g)};
}

std::pair<double, double> dominance_interval() {
    // 2 + 1/g^2 = 5  and  1 + g^2 = 3
    return {1.0 / std::sqrt(3.0), std::sqrt(2.0)};
}

bool three_node_dominates(double g, std::pair<double, double> reference) {
    if (!(g > 0.0))
        throw Error(ErrorCode::InvalidArgument, "weight must be positive");
    return 2.0 + 1.0 / (g * g) < reference.first && 1.0 + g * g < reference.second;
}

std::vector<SweepRow> sweep_comparison(double s_min, double s_max, double step) {
    if (!(s_min < s_max) || !(step > 0.0))
        throw Error(ErrorCode::InvalidArgument, "need s_min < s_max and step > 0");
    const ErrorProfile three = three_node_profile(1.0);
    const int count = static_cast<int>(std::floor((s_max - s_min) / step + 1e-9)) + 1;
    std::vector<SweepRow> rows;
    rows.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double s = s_min + i * step;
        const SqueezingLevel level = SqueezingLevel::from_db(s);
        rows.push_back({s, protocol_error_probability(kProfileTwelve, level),
                        protocol_error_probability(three, level),
                        protocol_error_probability(kProfileTwo, level)});
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "s,p_twelve,p_three_g1,p_two\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.s_db, r.p_twelve,
                      r.p_three_g1, r.p_two);
        out += buf;
    }
    return out;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out)
            throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << sweep_to_csv(rows);
        if (!out.flush())
            throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorCode::Io, "cannot move " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

} // namespace ctq
