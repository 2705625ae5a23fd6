#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace casbench::context {

struct ContextDocument {
    std::string title;
    std::string body;
    std::string file;
    bool placeholder = false;
};

struct ContextPack {
    std::string id;
    std::vector<ContextDocument> documents;
    std::optional<std::string> preamble;
    std::optional<long long> declared_token_size;
    std::vector<std::string> warnings;
};

enum class PackIssueKind { manifest_missing, manifest_invalid, document_missing, encoding_error, placeholder };

struct PackIssue {
    PackIssueKind kind;
    std::string subject;  // document title, file name or manifest path
    std::string detail;

    bool fatal() const { return kind != PackIssueKind::placeholder; }
};

std::string describe(const PackIssue& issue);

/// Result of reading a pack directory without stopping at the first problem.
struct PackInspection {
    ContextPack pack;
    std::vector<PackIssue> issues;

    bool ok() const;
};

class PackError : public std::runtime_error {
public:
    PackError(const std::string& what, std::vector<PackIssue> issues)
        : std::runtime_error(what), issues_(std::move(issues)) {}
    const std::vector<PackIssue>& issues() const { return issues_; }

private:
    std::vector<PackIssue> issues_;
};

class ManifestMissing : public PackError {
public:
    using PackError::PackError;
};

class ManifestInvalid : public PackError {
public:
    using PackError::PackError;
};

class DocumentMissing : public PackError {
public:
    DocumentMissing(const std::string& what, std::vector<PackIssue> issues, std::string title)
        : PackError(what, std::move(issues)), title_(std::move(title)) {}
    const std::string& title() const { return title_; }

private:
    std::string title_;
};

class EncodingError : public PackError {
public:
    using PackError::PackError;
};

class UnknownPack : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* manifest_file_name = "manifest.json";

PackInspection inspect_pack(const std::filesystem::path& directory);

/// Loads a pack or throws the PackError matching its first fatal issue; the
/// exception carries every issue found.
ContextPack load_pack(const std::filesystem::path& directory);

/// Pack ids (sub-directory names holding a manifest) under `packs_dir`, sorted.
std::vector<std::string> list_packs(const std::filesystem::path& packs_dir);

/// packs_dir/id, or UnknownPack when that directory has no manifest.
std::filesystem::path find_pack(const std::filesystem::path& packs_dir, const std::string& id);

/// Preamble, then one `=== title ===` section per document, separated by blank lines.
std::string render_system_prompt(const ContextPack& pack);

enum class TokenMethod { bytes_div_4, provider_reported };

std::string_view to_string(TokenMethod method);

struct TokenEstimate {
    long long estimated_tokens = 0;
    TokenMethod method = TokenMethod::bytes_div_4;

    bool operator==(const TokenEstimate&) const = default;
};

TokenEstimate estimate_tokens(std::string_view text);

/// Reconciles the estimate with what the provider billed for the first request.
TokenEstimate provider_reported(long long first_turn_input_tokens);

}  // namespace casbench::context
