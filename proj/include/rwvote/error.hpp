// rwvote - majority-voting ransomware artefact detection
// Error type shared by every module

#ifndef RWVOTE_ERROR_HPP
#define RWVOTE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace rwvote {

enum class error_code {
    not_found,
    not_a_file,
    io_error,
    empty_corpus,
    manifest_parse_error,
    unlabelable_path,
    invalid_spec,
    parse_error,
    duplicate_extension,
    head_too_short,
    empty_input,
    sample_too_small,
    blob_too_small,
    no_votes,
    invalid_config,
};

[[nodiscard]] std::string_view to_string(error_code code) noexcept;

class error : public std::runtime_error {
public:
    error(error_code code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] error_code code() const noexcept { return code_; }

private:
    error_code code_;
};

} // namespace rwvote

#endif // RWVOTE_ERROR_HPP
