// rwvote - majority-voting ransomware artefact detection

#include <rwvote/error.hpp>

namespace rwvote {

std::string_view to_string(error_code code) noexcept {
    switch (code) {
    case error_code::not_found: return "NotFound";
    case error_code::not_a_file: return "NotAFile";
    case error_code::io_error: return "IoError";
    case error_code::empty_corpus: return "EmptyCorpus";
    case error_code::manifest_parse_error: return "ManifestParseError";
    case error_code::unlabelable_path: return "UnlabelablePath";
    case error_code::invalid_spec: return "InvalidSpec";
    case error_code::parse_error: return "ParseError";
    case error_code::duplicate_extension: return "DuplicateExtension";
    case error_code::head_too_short: return "HeadTooShort";
    case error_code::empty_input: return "EmptyInput";
    case error_code::sample_too_small: return "SampleTooSmall";
    case error_code::blob_too_small: return "BlobTooSmall";
    case error_code::no_votes: return "NoVotes";
    case error_code::invalid_config: return "InvalidConfig";
    }
    return "Unknown";
}

} // namespace rwvote
