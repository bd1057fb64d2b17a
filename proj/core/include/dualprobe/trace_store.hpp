#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dualprobe/errors.hpp"

namespace dualprobe::trace {

inline constexpr std::uint32_t kTraceFormatVersion = 1;

// Per-trace metadata. num_layers and ffn_width are fixed for every token of
// one trace; question_id must be non-empty and unique within a manifest.
struct TraceHeader {
    std::uint32_t format_version = kTraceFormatVersion;
    std::string model_id;
    std::uint32_t num_layers = 0;
    std::uint32_t ffn_width = 0;
    std::string question_id;
    std::string language;
    std::string culture;
    std::uint32_t num_response_tokens = 0;
};

// Dense activation tensor over (response token, layer, neuron). Values are
// the post-activation FFN scalars; prompt tokens are never stored, so dumps
// from external runtimes must be pre-filtered to response tokens.
class ActivationTrace {
  public:
    ActivationTrace() = default;
    ActivationTrace(TraceHeader header, std::vector<float> values)
        : header_(std::move(header)), values_(std::move(values)) {}

    const TraceHeader& header() const noexcept { return header_; }
    TraceHeader& header() noexcept { return header_; }
    const std::vector<float>& values() const noexcept { return values_; }
    std::vector<float>& values() noexcept { return values_; }

    std::size_t expected_value_count() const noexcept {
        return static_cast<std::size_t>(header_.num_response_tokens) * header_.num_layers * header_.ffn_width;
    }

    float value(std::uint32_t token, std::uint32_t layer, std::uint32_t neuron) const {
        return values_[index(token, layer, neuron)];
    }
    float& value(std::uint32_t token, std::uint32_t layer, std::uint32_t neuron) {
        return values_[index(token, layer, neuron)];
    }

    // One layer row: all ffn_width neuron values for (token, layer).
    std::span<const float> row(std::uint32_t token, std::uint32_t layer) const {
        return {values_.data() + index(token, layer, 0), header_.ffn_width};
    }

    // Throws errc::validation / errc::invalid_value when an invariant fails.
    void validate() const;

  private:
    std::size_t index(std::uint32_t token, std::uint32_t layer, std::uint32_t neuron) const noexcept {
        return (static_cast<std::size_t>(token) * header_.num_layers + layer) * header_.ffn_width + neuron;
    }

    TraceHeader header_;
    std::vector<float> values_;
};

// Binary container: magic "NTRC" | u32 LE version | u32 LE header byte length
// | UTF-8 JSON header | float32 LE values in [token][layer][neuron] order.
std::size_t write_trace(const ActivationTrace& trace, std::ostream& sink);
std::size_t write_trace_file(const ActivationTrace& trace, const std::filesystem::path& path);

ActivationTrace read_trace(std::istream& source);
ActivationTrace read_trace_file(const std::filesystem::path& path);

// Streaming reader; holds one layer row (ffn_width floats) at a time instead
// of materialising the full tensor.
class TraceRowReader {
  public:
    explicit TraceRowReader(std::istream& source);

    const TraceHeader& header() const noexcept { return header_; }

    // Rows arrive in [token][layer] order. Returns false after the last row.
    bool next_row(std::vector<float>& row, std::uint32_t& token, std::uint32_t& layer);

  private:
    std::istream& source_;
    TraceHeader header_;
    std::uint64_t rows_read_ = 0;
    std::uint64_t rows_total_ = 0;
};

// CRC-32 (zlib polynomial) over the raw little-endian value block.
std::uint32_t value_block_crc32(const ActivationTrace& trace);

struct ManifestEntry {
    std::string question_id;
    std::string language;
    std::string culture;
    std::string relative_path;
    std::uint64_t byte_length = 0;
    std::uint32_t checksum = 0;
};

struct TraceManifest {
    std::vector<ManifestEntry> entries;
};

// Line-delimited UTF-8, one tab-separated record per trace, fields in
// ManifestEntry order; checksum rendered as 8 lowercase hex digits.
void write_manifest(const TraceManifest& manifest, std::ostream& sink);
void write_manifest_file(const TraceManifest& manifest, const std::filesystem::path& path);
TraceManifest read_manifest(std::istream& source);
TraceManifest read_manifest_file(const std::filesystem::path& path);

struct ManifestViolation {
    std::string question_id;
    std::string kind;  // "missing", "unreadable", "byte-length", "checksum", "metadata", "duplicate-id"
    std::string detail;
};

// Violations are data, not errors: returns an empty list iff every entry
// resolves, checksums match and headers agree with the manifest rows.
std::vector<ManifestViolation> validate_manifest(const TraceManifest& manifest,
                                                 const std::filesystem::path& root,
                                                 unsigned jobs = 1);

ManifestEntry make_manifest_entry(const ActivationTrace& trace, const std::string& relative_path,
                                  std::uint64_t byte_length);

}  // namespace dualprobe::trace
