#include "casbench/context/pack.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "casbench/util/text.hpp"

namespace casbench::context {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim_trailing_newlines(std::string text) {
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

// Reads a UTF-8 text file, recording missing/encoding issues against `title`.
std::optional<std::string> read_text(const fs::path& path, const std::string& title, std::vector<PackIssue>& issues) {
    auto body = read_file(path);
    if (!body || fs::is_directory(path)) {
        issues.push_back({PackIssueKind::document_missing, title, path.string()});
        return std::nullopt;
    }
    if (!util::is_valid_utf8(*body)) {
        issues.push_back({PackIssueKind::encoding_error, title, path.string() + " is not valid UTF-8"});
        return std::nullopt;
    }
    return body;
}

[[noreturn]] void throw_for(const std::vector<PackIssue>& issues, const fs::path& directory) {
    std::string message = "pack " + directory.string() + " is invalid:";
    const PackIssue* first = nullptr;
    for (const auto& issue : issues) {
        if (!issue.fatal()) continue;
        if (first == nullptr) first = &issue;
        message += "\n  " + describe(issue);
    }
    switch (first->kind) {
        case PackIssueKind::manifest_missing: throw ManifestMissing(message, issues);
        case PackIssueKind::manifest_invalid: throw ManifestInvalid(message, issues);
        case PackIssueKind::document_missing: throw DocumentMissing(message, issues, first->subject);
        default: throw EncodingError(message, issues);
    }
}

}  // namespace

std::string describe(const PackIssue& issue) {
    switch (issue.kind) {
        case PackIssueKind::manifest_missing: return "manifest missing: " + issue.detail;
        case PackIssueKind::manifest_invalid: return "manifest invalid: " + issue.detail;
        case PackIssueKind::document_missing: return "document missing: '" + issue.subject + "' (" + issue.detail + ")";
        case PackIssueKind::encoding_error: return "encoding error in '" + issue.subject + "': " + issue.detail;
        case PackIssueKind::placeholder: return "placeholder document: '" + issue.subject + "'";
    }
    return issue.detail;
}

bool PackInspection::ok() const {
    return std::none_of(issues.begin(), issues.end(), [](const PackIssue& i) { return i.fatal(); });
}

PackInspection inspect_pack(const fs::path& directory) {
    PackInspection result;
    auto& pack = result.pack;
    auto& issues = result.issues;
    pack.id = directory.filename().string();
    if (pack.id.empty()) pack.id = directory.parent_path().filename().string();

    const fs::path manifest_path = directory / manifest_file_name;
    const auto manifest_text = read_file(manifest_path);
    if (!manifest_text || fs::is_directory(manifest_path)) {
        issues.push_back({PackIssueKind::manifest_missing, manifest_path.string(), manifest_path.string()});
        return result;
    }

    json manifest;
    try {
        manifest = json::parse(*manifest_text);
    } catch (const json::parse_error& e) {
        issues.push_back({PackIssueKind::manifest_invalid, manifest_path.string(), e.what()});
        return result;
    }
    if (!manifest.is_object()) {
        issues.push_back({PackIssueKind::manifest_invalid, manifest_path.string(), "top level is not an object"});
        return result;
    }

    try {
        if (manifest.contains("id")) pack.id = manifest.at("id").get<std::string>();
        if (manifest.contains("declared_token_size")) {
            pack.declared_token_size = manifest.at("declared_token_size").get<long long>();
        }
        if (manifest.contains("preamble")) {
            const auto file = manifest.at("preamble").get<std::string>();
            if (auto text = read_text(directory / file, "preamble", issues)) pack.preamble = std::move(*text);
        }
        const auto documents = manifest.value("documents", json::array());
        if (!documents.is_array()) throw std::invalid_argument("'documents' is not an array");
        for (const auto& entry : documents) {
            ContextDocument doc;
            doc.file = entry.at("file").get<std::string>();
            doc.title = entry.value("title", doc.file);
            doc.placeholder = entry.value("placeholder", false);
            auto body = read_text(directory / doc.file, doc.title, issues);
            if (!body) continue;
            doc.body = std::move(*body);
            if (doc.placeholder) issues.push_back({PackIssueKind::placeholder, doc.title, doc.file});
            pack.documents.push_back(std::move(doc));
        }
    } catch (const std::exception& e) {
        issues.push_back({PackIssueKind::manifest_invalid, manifest_path.string(), e.what()});
    }

    const auto placeholders = std::count_if(issues.begin(), issues.end(),
                                            [](const PackIssue& i) { return i.kind == PackIssueKind::placeholder; });
    if (placeholders > 0) {
        pack.warnings.push_back("pack '" + pack.id + "' has " + std::to_string(placeholders) +
                                " placeholder document(s); results obtained with it do not reproduce runs made "
                                "with the authors' full pack");
    }
    return result;
}

ContextPack load_pack(const fs::path& directory) {
    auto inspection = inspect_pack(directory);
    if (!inspection.ok()) throw_for(inspection.issues, directory);
    return std::move(inspection.pack);
}

std::vector<std::string> list_packs(const fs::path& packs_dir) {
    std::vector<std::string> ids;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(packs_dir, ec)) {
        if (entry.is_directory() && fs::exists(entry.path() / manifest_file_name)) {
            ids.push_back(entry.path().filename().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

fs::path find_pack(const fs::path& packs_dir, const std::string& id) {
    const auto path = packs_dir / id;
    if (id.empty() || id.find('/') != std::string::npos || !fs::exists(path / manifest_file_name)) {
        throw UnknownPack("unknown pack '" + id + "' (no " + (path / manifest_file_name).string() + ")");
    }
    return path;
}

std::string render_system_prompt(const ContextPack& pack) {
    std::vector<std::string> sections;
    if (pack.preamble) {
        auto text = trim_trailing_newlines(*pack.preamble);
        if (!text.empty()) sections.push_back(std::move(text));
    }
    for (const auto& doc : pack.documents) {
        sections.push_back("=== " + doc.title + " ===\n" + trim_trailing_newlines(doc.body));
    }
    return util::join(sections, "\n\n");
}

std::string_view to_string(TokenMethod method) {
    return method == TokenMethod::bytes_div_4 ? "bytes_div_4" : "provider_reported";
}

TokenEstimate estimate_tokens(std::string_view text) {
    return {static_cast<long long>((text.size() + 3) / 4), TokenMethod::bytes_div_4};
}

TokenEstimate provider_reported(long long first_turn_input_tokens) {
    return {first_turn_input_tokens, TokenMethod::provider_reported};
}

}  // namespace casbench::context
