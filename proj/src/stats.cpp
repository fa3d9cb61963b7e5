// rwvote - majority-voting ransomware artefact detection
// Numeric kernels

#include <rwvote/stats.hpp>

#include <rwvote/error.hpp>

#include "bundled_assets.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

namespace rwvote::stats {

namespace {

constexpr double gamma_eps = 1e-16;
constexpr int gamma_max_iterations = 100000;

// log(x^a e^-x / Gamma(a)); shared prefactor of the series and the fraction.
double log_gamma_prefactor(double a, double x) {
    return a * std::log(x) - x - std::lgamma(a);
}

double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < gamma_max_iterations; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * gamma_eps) {
            break;
        }
    }
    return sum * std::exp(log_gamma_prefactor(a, x));
}

double gamma_q_continued_fraction(double a, double x) {
    const double tiny = DBL_MIN / gamma_eps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < gamma_max_iterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < gamma_eps) {
            break;
        }
    }
    const double log_q = log_gamma_prefactor(a, x) + std::log(h);
    if (log_q < std::log(DBL_MIN)) {
        return 0.0;
    }
    return std::exp(log_q);
}

std::array<std::size_t, byte_bins> histogram(std::span<const std::uint8_t> data) {
    std::array<std::size_t, byte_bins> counts{};
    for (std::uint8_t b : data) {
        ++counts[b];
    }
    return counts;
}

// Decodes one scalar value; malformed input consumes a single byte.
std::uint32_t next_scalar(std::string_view s, std::size_t& i) {
    const auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (lead < 0x80) {
        ++i;
        return lead;
    } else if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        ++i;
        return 0xDC00u + lead; // lone surrogate range keeps bad bytes distinct
    }
    if (i + len > s.size()) {
        ++i;
        return 0xDC00u + lead;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto cont = static_cast<unsigned char>(s[i + k]);
        if ((cont & 0xC0) != 0x80) {
            ++i;
            return 0xDC00u + lead;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    i += len;
    return cp;
}

} // namespace

double entropy_from_counts(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) {
        throw error(error_code::empty_input, "entropy of zero symbols");
    }
    const double n = static_cast<double>(total);
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c > 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log2(p);
        }
    }
    // -0.0 for a single symbol
    return h <= 0.0 ? 0.0 : h;
}

double shannon_entropy_bytes(std::span<const std::uint8_t> data) {
    if (data.empty()) {
        throw error(error_code::empty_input, "shannon_entropy_bytes on empty data");
    }
    const auto counts = histogram(data);
    return entropy_from_counts(counts, data.size());
}

double shannon_entropy_string(std::string_view text) {
    if (text.empty()) {
        throw error(error_code::empty_input, "shannon_entropy_string on empty string");
    }
    std::unordered_map<std::uint32_t, std::size_t> freq;
    std::size_t total = 0;
    for (std::size_t i = 0; i < text.size();) {
        ++freq[next_scalar(text, i)];
        ++total;
    }
    // Sum in a fixed order so the result does not depend on hash layout.
    std::vector<std::size_t> counts;
    counts.reserve(freq.size());
    for (const auto& [cp, c] : freq) {
        counts.push_back(c);
    }
    std::sort(counts.begin(), counts.end());
    return entropy_from_counts(counts, total);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || std::isnan(x)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (x <= 0.0) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
    }
    return std::clamp(gamma_q_continued_fraction(a, x), 0.0, 1.0);
}

double chi_square_sf(double statistic, int dof) {
    return regularized_gamma_q(dof / 2.0, statistic / 2.0);
}

double chi_square_statistic(std::span<const std::uint8_t> data) {
    if (data.empty()) {
        throw error(error_code::empty_input, "chi-square of empty data");
    }
    const auto counts = histogram(data);
    const double expected = static_cast<double>(data.size()) / byte_bins;
    double statistic = 0.0;
    for (std::size_t c : counts) {
        const double diff = static_cast<double>(c) - expected;
        statistic += diff * diff / expected;
    }
    return statistic;
}

chi_square_result chi_square_p(std::span<const std::uint8_t> data, std::size_t min_bytes) {
    if (data.size() < min_bytes || data.empty()) {
        throw error(error_code::sample_too_small,
                    std::to_string(data.size()) + " bytes, need " + std::to_string(min_bytes));
    }
    chi_square_result r;
    r.statistic = chi_square_statistic(data);
    r.dof = chi_square_dof;
    r.p_value = chi_square_sf(r.statistic, r.dof);
    return r;
}

double control_curve::sum() const {
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    return total;
}

void control_curve::validate() const {
    if (checkpoints.empty() || checkpoints.size() != values.size()) {
        throw error(error_code::parse_error, "control curve needs matching checkpoints and values");
    }
    for (std::size_t j = 0; j < checkpoints.size(); ++j) {
        if (checkpoints[j] == 0 || (j > 0 && checkpoints[j] <= checkpoints[j - 1])) {
            throw error(error_code::parse_error, "control curve checkpoints must be increasing");
        }
        if (!(values[j] >= 0.0 && values[j] <= 8.0) || (j > 0 && values[j] <= values[j - 1])) {
            throw error(error_code::parse_error, "control curve values must increase within [0, 8]");
        }
    }
}

control_curve compute_control_curve(std::uint64_t seed, std::size_t trials) {
    if (trials < 1000) {
        throw error(error_code::invalid_config, "control curve needs at least 1000 trials");
    }
    control_curve curve;
    curve.seed = seed;
    curve.trials = trials;
    for (std::size_t j = 1; j <= bitbyte_checkpoint_count; ++j) {
        curve.checkpoints.push_back(j * bitbyte_stride);
    }
    const std::size_t block = curve.checkpoints.back();
    std::vector<double> sums(curve.checkpoints.size(), 0.0);

    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> bytes(block);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < block; i += 8) {
            std::uint64_t word = rng();
            for (std::size_t k = 0; k < 8 && i + k < block; ++k) {
                bytes[i + k] = static_cast<std::uint8_t>(word >> (8 * k));
            }
        }
        std::array<std::size_t, byte_bins> counts{};
        std::size_t filled = 0;
        for (std::size_t j = 0; j < curve.checkpoints.size(); ++j) {
            for (; filled < curve.checkpoints[j]; ++filled) {
                ++counts[bytes[filled]];
            }
            sums[j] += entropy_from_counts(counts, filled);
        }
    }
    for (double s : sums) {
        curve.values.push_back(s / static_cast<double>(trials));
    }
    curve.validate();
    return curve;
}

control_curve control_curve_from_json(std::string_view json_text) {
    control_curve curve;
    try {
        const auto j = nlohmann::json::parse(json_text);
        curve.seed = j.at("seed").get<std::uint64_t>();
        curve.trials = j.at("trials").get<std::size_t>();
        curve.checkpoints = j.at("checkpoints").get<std::vector<std::size_t>>();
        curve.values = j.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw error(error_code::parse_error, std::string("control curve: ") + e.what());
    }
    curve.validate();
    return curve;
}

std::string control_curve_to_json(const control_curve& curve) {
    nlohmann::ordered_json j;
    j["seed"] = curve.seed;
    j["trials"] = curve.trials;
    j["checkpoints"] = curve.checkpoints;
    j["values"] = curve.values;
    return j.dump(1) + "\n";
}

const control_curve& bundled_control_curve() {
    static const control_curve curve = control_curve_from_json(assets::control_curve_json());
    return curve;
}

double bitbyte_value(std::span<const std::uint8_t> head, const control_curve& curve) {
    if (head.size() < bitbyte_stride) {
        throw error(error_code::head_too_short,
                    "BitByte needs " + std::to_string(bitbyte_stride) + " bytes, got " +
                        std::to_string(head.size()));
    }
    std::array<std::size_t, byte_bins> counts{};
    std::size_t filled = 0;
    double value = 0.0;
    for (std::size_t j = 0; j < curve.checkpoints.size(); ++j) {
        const std::size_t k = curve.checkpoints[j];
        if (k > head.size()) {
            break;
        }
        for (; filled < k; ++filled) {
            ++counts[head[filled]];
        }
        value += std::max(0.0, curve.values[j] - entropy_from_counts(counts, filled));
    }
    return value;
}

} // namespace rwvote::stats
