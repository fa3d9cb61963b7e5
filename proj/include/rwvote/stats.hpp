// rwvote - majority-voting ransomware artefact detection
// Numeric kernels: Shannon entropy, chi-square uniformity and BitByte profile

#ifndef RWVOTE_STATS_HPP
#define RWVOTE_STATS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rwvote::stats {

/// Number of byte values; the chi-square test has one fewer degree of freedom.
inline constexpr int byte_bins = 256;
inline constexpr int chi_square_dof = byte_bins - 1;
inline constexpr std::size_t chi_square_min_bytes = 1024;

/// Shannon entropy in bits per byte, in [0, 8]. Throws empty_input.
[[nodiscard]] double shannon_entropy_bytes(std::span<const std::uint8_t> data);

/// Shannon entropy in bits per character over Unicode scalar values of a
/// UTF-8 string. Malformed sequences count one scalar per offending byte.
/// Throws empty_input.
[[nodiscard]] double shannon_entropy_string(std::string_view text);

/// Entropy from a histogram whose counts sum to `total`.
[[nodiscard]] double entropy_from_counts(std::span<const std::size_t> counts, std::size_t total);

struct chi_square_result {
    double statistic = 0.0;
    int dof = chi_square_dof;
    double p_value = 1.0;
};

/**
 * Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
 *
 * Series expansion of P(a, x) when x < a + 1, Lentz continued fraction for
 * Q otherwise. Results below the smallest normal double are returned as 0.
 */
[[nodiscard]] double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution with `dof` degrees of freedom.
[[nodiscard]] double chi_square_sf(double statistic, int dof = chi_square_dof);

/// Pearson statistic of the byte histogram against a uniform expectation.
[[nodiscard]] double chi_square_statistic(std::span<const std::uint8_t> data);

/// Chi-square uniformity test with dof fixed at 255. Throws sample_too_small
/// when `data` is shorter than `min_bytes`.
[[nodiscard]] chi_square_result chi_square_p(std::span<const std::uint8_t> data,
                                             std::size_t min_bytes = chi_square_min_bytes);

/// Expected prefix entropy of uniform-random data at fixed byte checkpoints.
struct control_curve {
    std::vector<std::size_t> checkpoints; // 8, 16, ..., 256
    std::vector<double> values;
    std::size_t trials = 0;
    std::uint64_t seed = 0;

    [[nodiscard]] double sum() const;
    void validate() const;
};

inline constexpr std::size_t bitbyte_stride = 8;
inline constexpr std::size_t bitbyte_checkpoint_count = 32;
inline constexpr std::uint64_t default_curve_seed = 0xBEEF;
inline constexpr std::size_t default_curve_trials = 10000;

/// Monte Carlo control curve. Each trial draws one 256-byte block from a
/// seeded mt19937_64 and records the entropy of its nested prefixes.
[[nodiscard]] control_curve compute_control_curve(std::uint64_t seed,
                                                  std::size_t trials = default_curve_trials);

[[nodiscard]] control_curve control_curve_from_json(std::string_view json_text);
[[nodiscard]] std::string control_curve_to_json(const control_curve& curve);

/// The curve shipped in assets/control_curve.json.
[[nodiscard]] const control_curve& bundled_control_curve();

/// Sum over checkpoints k <= head size of max(0, control(k) - H(head[0..k))).
/// Low values mean the head looks as random as the control. Throws
/// head_too_short below 8 bytes.
[[nodiscard]] double bitbyte_value(std::span<const std::uint8_t> head, const control_curve& curve);

} // namespace rwvote::stats

#endif // RWVOTE_STATS_HPP
