#include "dualprobe/trace_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "binio.hpp"
#include "parallel.hpp"

namespace dualprobe::trace {

namespace {

constexpr char kTraceMagic[4] = {'N', 'T', 'R', 'C'};

void validate_header(const TraceHeader& header) {
    if (header.num_layers < 1) raise(errc::validation, "num_layers must be >= 1");
    if (header.ffn_width < 1) raise(errc::validation, "ffn_width must be >= 1");
    if (header.question_id.empty()) raise(errc::validation, "question_id must be non-empty");
}

nlohmann::json header_to_json(const TraceHeader& header) {
    return nlohmann::json{
        {"format_version", header.format_version},
        {"model_id", header.model_id},
        {"num_layers", header.num_layers},
        {"ffn_width", header.ffn_width},
        {"question_id", header.question_id},
        {"language", header.language},
        {"culture", header.culture},
        {"num_response_tokens", header.num_response_tokens},
    };
}

TraceHeader header_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) raise(errc::bad_header, "trace header is not a JSON object");
    TraceHeader header;
    try {
        header.format_version = doc.at("format_version").get<std::uint32_t>();
        header.model_id = doc.at("model_id").get<std::string>();
        header.num_layers = doc.at("num_layers").get<std::uint32_t>();
        header.ffn_width = doc.at("ffn_width").get<std::uint32_t>();
        header.question_id = doc.at("question_id").get<std::string>();
        header.language = doc.at("language").get<std::string>();
        header.culture = doc.at("culture").get<std::string>();
        header.num_response_tokens = doc.at("num_response_tokens").get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        raise(errc::bad_header, std::string("trace header field missing or mistyped: ") + e.what());
    }
    return header;
}

// Reads magic, version, header document. Shared by the full and streaming
// readers; leaves the stream at the first value byte.
TraceHeader read_preamble(std::istream& source) {
    detail::expect_magic(source, kTraceMagic, "trace");
    const std::uint32_t version = detail::read_u32le(source, "trace version");
    if (version != kTraceFormatVersion) {
        raise(errc::unknown_version, "trace version " + std::to_string(version) + " not supported");
    }
    const std::uint32_t header_len = detail::read_u32le(source, "trace header length");
    std::string header_bytes(header_len, '\0');
    if (header_len > 0) detail::read_exact(source, header_bytes.data(), header_len, "trace header");
    TraceHeader header = header_from_json(header_bytes);
    validate_header(header);
    return header;
}

std::uint32_t crc32_of(std::span<const float> values) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    if (values.empty()) return static_cast<std::uint32_t>(crc);
    if constexpr (std::endian::native == std::endian::little) {
        crc = ::crc32(crc, reinterpret_cast<const Bytef*>(values.data()),
                      static_cast<uInt>(values.size() * 4));
    } else {
        for (float v : values) {
            const std::uint32_t u = std::bit_cast<std::uint32_t>(v);
            const Bytef bytes[4] = {static_cast<Bytef>(u & 0xff), static_cast<Bytef>((u >> 8) & 0xff),
                                    static_cast<Bytef>((u >> 16) & 0xff), static_cast<Bytef>((u >> 24) & 0xff)};
            crc = ::crc32(crc, bytes, 4);
        }
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

void ActivationTrace::validate() const {
    validate_header(header_);
    if (values_.size() != expected_value_count()) {
        raise(errc::validation, "value count " + std::to_string(values_.size()) + " != tokens*layers*width " +
                                    std::to_string(expected_value_count()));
    }
    for (float v : values_) {
        if (!std::isfinite(v)) raise(errc::invalid_value, "trace contains a non-finite activation value");
    }
}

std::size_t write_trace(const ActivationTrace& trace, std::ostream& sink) {
    trace.validate();  // nothing is written on an invariant violation
    const std::string header_bytes = header_to_json(trace.header()).dump();
    detail::write_bytes(sink, kTraceMagic, 4);
    detail::write_u32le(sink, kTraceFormatVersion);
    detail::write_u32le(sink, static_cast<std::uint32_t>(header_bytes.size()));
    detail::write_bytes(sink, header_bytes.data(), header_bytes.size());
    detail::write_f32le_block(sink, trace.values());
    sink.flush();
    if (!sink) raise(errc::io, "failed flushing trace sink");
    return 12 + header_bytes.size() + trace.values().size() * 4;
}

std::size_t write_trace_file(const ActivationTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io, "cannot open " + path.string() + " for writing");
    return write_trace(trace, out);
}

ActivationTrace read_trace(std::istream& source) {
    TraceHeader header = read_preamble(source);
    const std::size_t count =
        static_cast<std::size_t>(header.num_response_tokens) * header.num_layers * header.ffn_width;
    std::vector<float> values(count);
    detail::read_f32le_block(source, values, "trace values");
    // Anything beyond the declared tensor means the header undercounts.
    char extra;
    source.read(&extra, 1);
    if (source.gcount() == 1) {
        raise(errc::count_mismatch, "trailing bytes after the declared value block");
    }
    ActivationTrace trace(std::move(header), std::move(values));
    trace.validate();
    return trace;
}

ActivationTrace read_trace_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io, "cannot open " + path.string() + " for reading");
    return read_trace(in);
}

TraceRowReader::TraceRowReader(std::istream& source) : source_(source) {
    header_ = read_preamble(source_);
    rows_total_ = static_cast<std::uint64_t>(header_.num_response_tokens) * header_.num_layers;
}

bool TraceRowReader::next_row(std::vector<float>& row, std::uint32_t& token, std::uint32_t& layer) {
    if (rows_read_ >= rows_total_) return false;
    row.resize(header_.ffn_width);
    detail::read_f32le_block(source_, row, "trace values");
    token = static_cast<std::uint32_t>(rows_read_ / header_.num_layers);
    layer = static_cast<std::uint32_t>(rows_read_ % header_.num_layers);
    ++rows_read_;
    return true;
}

std::uint32_t value_block_crc32(const ActivationTrace& trace) { return crc32_of(trace.values()); }

namespace {

std::string checksum_hex(std::uint32_t checksum) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", checksum);
    return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

}  // namespace

void write_manifest(const TraceManifest& manifest, std::ostream& sink) {
    for (const auto& e : manifest.entries) {
        sink << e.question_id << '\t' << e.language << '\t' << e.culture << '\t' << e.relative_path << '\t'
             << e.byte_length << '\t' << checksum_hex(e.checksum) << '\n';
    }
    if (!sink) raise(errc::io, "failed writing manifest");
}

void write_manifest_file(const TraceManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::io, "cannot open " + path.string() + " for writing");
    write_manifest(manifest, out);
}

TraceManifest read_manifest(std::istream& source) {
    TraceManifest manifest;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != 6) {
            raise(errc::bad_header, "manifest line " + std::to_string(line_no) + " has " +
                                        std::to_string(fields.size()) + " fields, expected 6");
        }
        ManifestEntry e;
        e.question_id = fields[0];
        e.language = fields[1];
        e.culture = fields[2];
        e.relative_path = fields[3];
        auto parse_u64 = [&](const std::string& s, const char* what) {
            std::uint64_t value = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                raise(errc::bad_header,
                      "manifest line " + std::to_string(line_no) + ": unparseable " + what + " '" + s + "'");
            }
            return value;
        };
        e.byte_length = parse_u64(fields[4], "byte length");
        std::uint32_t checksum = 0;
        auto [ptr, ec] = std::from_chars(fields[5].data(), fields[5].data() + fields[5].size(), checksum, 16);
        if (ec != std::errc() || ptr != fields[5].data() + fields[5].size()) {
            raise(errc::bad_header, "manifest line " + std::to_string(line_no) + ": unparseable checksum");
        }
        e.checksum = checksum;
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

TraceManifest read_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io, "cannot open " + path.string() + " for reading");
    return read_manifest(in);
}

std::vector<ManifestViolation> validate_manifest(const TraceManifest& manifest,
                                                 const std::filesystem::path& root, unsigned jobs) {
    std::vector<std::vector<ManifestViolation>> per_entry(manifest.entries.size());

    detail::parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
        const ManifestEntry& e = manifest.entries[i];
        auto& out = per_entry[i];
        const std::filesystem::path path = root / e.relative_path;
        std::error_code fs_ec;
        if (!std::filesystem::exists(path, fs_ec)) {
            out.push_back({e.question_id, "missing", e.relative_path + " does not exist"});
            return;
        }
        const auto actual_size = std::filesystem::file_size(path, fs_ec);
        if (!fs_ec && actual_size != e.byte_length) {
            out.push_back({e.question_id, "byte-length",
                           "expected " + std::to_string(e.byte_length) + " bytes, found " +
                               std::to_string(actual_size)});
        }
        ActivationTrace trace;
        try {
            trace = read_trace_file(path);
        } catch (const Error& err) {
            out.push_back({e.question_id, "unreadable", err.what()});
            return;
        }
        if (const std::uint32_t crc = value_block_crc32(trace); crc != e.checksum) {
            out.push_back({e.question_id, "checksum",
                           "expected " + checksum_hex(e.checksum) + ", computed " + checksum_hex(crc)});
        }
        const TraceHeader& h = trace.header();
        if (h.question_id != e.question_id || h.language != e.language || h.culture != e.culture) {
            out.push_back({e.question_id, "metadata",
                           "header (" + h.question_id + ", " + h.language + ", " + h.culture +
                               ") does not match manifest row (" + e.question_id + ", " + e.language + ", " +
                               e.culture + ")"});
        }
    });

    std::vector<ManifestViolation> violations;
    for (auto& batch : per_entry) {
        violations.insert(violations.end(), batch.begin(), batch.end());
    }

    // question_id uniqueness is a manifest-level invariant.
    std::vector<std::string> ids;
    ids.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) ids.push_back(e.question_id);
    std::sort(ids.begin(), ids.end());
    for (std::size_t i = 1; i < ids.size(); ++i) {
        if (ids[i] == ids[i - 1] && (i == 1 || ids[i] != ids[i - 2])) {
            violations.push_back({ids[i], "duplicate-id", "question_id appears more than once"});
        }
    }
    return violations;
}

ManifestEntry make_manifest_entry(const ActivationTrace& trace, const std::string& relative_path,
                                  std::uint64_t byte_length) {
    ManifestEntry e;
    e.question_id = trace.header().question_id;
    e.language = trace.header().language;
    e.culture = trace.header().culture;
    e.relative_path = relative_path;
    e.byte_length = byte_length;
    e.checksum = value_block_crc32(trace);
    return e;
}

}  // namespace dualprobe::trace
