#include "antcensus/annotation_io.hpp"

#include "antcensus/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace fs = std::filesystem;

namespace antcensus {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

double parse_real(std::string_view field, std::size_t line_no, const char* what) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("expected a real number for ") + what + ", got '" +
                             std::string(field) + "'",
                         line_no);
    }
    return value;
}

int parse_category(std::string_view field, std::size_t line_no) {
    int value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || value < 0) {
        throw ParseError("expected a nonnegative integer class id, got '" + std::string(field) + "'",
                         line_no);
    }
    return value;
}

double check_unit_range(double v, std::size_t line_no, const char* what, ParsePolicy policy) {
    if (v >= 0.0 && v <= 1.0) return v;
    if (policy == ParsePolicy::strict) {
        throw ParseError(std::string(what) + " value " + std::to_string(v) + " outside [0,1]", line_no);
    }
    return std::clamp(v, 0.0, 1.0);
}

} // namespace

std::vector<AnnotationRecord> parse_label_text(const std::string& text, ParsePolicy policy) {
    std::vector<AnnotationRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line(text.data() + pos, (eol == std::string::npos ? text.size() : eol) - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        const auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != 5 && fields.size() != 6) {
            throw ParseError("expected 5 or 6 whitespace-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }

        AnnotationRecord rec;
        rec.category_id = parse_category(fields[0], line_no);
        rec.cx = check_unit_range(parse_real(fields[1], line_no, "cx"), line_no, "cx", policy);
        rec.cy = check_unit_range(parse_real(fields[2], line_no, "cy"), line_no, "cy", policy);
        rec.w = check_unit_range(parse_real(fields[3], line_no, "w"), line_no, "w", policy);
        rec.h = check_unit_range(parse_real(fields[4], line_no, "h"), line_no, "h", policy);
        if (fields.size() == 6) {
            rec.confidence =
                check_unit_range(parse_real(fields[5], line_no, "confidence"), line_no, "confidence", policy);
        }
        records.push_back(rec);
    }
    return records;
}

std::string write_label_text(const std::vector<AnnotationRecord>& records, bool with_confidence) {
    std::string out;
    out.reserve(records.size() * 48);
    char buf[160];
    for (const auto& rec : records) {
        int n = 0;
        if (with_confidence) {
            n = std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f %.6f\n", rec.category_id, rec.cx,
                              rec.cy, rec.w, rec.h, rec.confidence.value_or(1.0));
        } else {
            n = std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f\n", rec.category_id, rec.cx,
                              rec.cy, rec.w, rec.h);
        }
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

const DatasetEntry* DatasetIndex::find(const std::string& image_id) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), image_id,
                               [](const DatasetEntry& e, const std::string& id) { return e.image_id < id; });
    if (it == entries.end() || it->image_id != image_id) return nullptr;
    return &*it;
}

namespace {

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<fs::path> list_files(const fs::path& dir) {
    if (!fs::exists(dir) || !fs::is_directory(dir)) {
        throw DataError("not a readable directory: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace

DatasetIndex index_dataset(const fs::path& images_dir, const fs::path& labels_dir) {
    std::map<std::string, DatasetEntry> by_id;

    if (!images_dir.empty()) {
        for (const auto& path : list_files(images_dir)) {
            if (!has_image_extension(path)) continue;
            const std::string id = path.stem().string();
            auto [it, inserted] = by_id.try_emplace(id);
            if (!inserted && it->second.image_path) {
                throw DataError("duplicate image stem '" + id + "': " + it->second.image_path->string() +
                                " and " + path.string());
            }
            it->second.image_id = id;
            it->second.image_path = path;
            it->second.image_size = probe_image_size(path);
        }
    }

    if (!labels_dir.empty()) {
        for (const auto& path : list_files(labels_dir)) {
            if (path.extension() != ".txt") continue;
            const std::string id = path.stem().string();
            auto [it, inserted] = by_id.try_emplace(id);
            if (!inserted && it->second.label_path) {
                throw DataError("duplicate label stem '" + id + "': " + it->second.label_path->string() +
                                " and " + path.string());
            }
            it->second.image_id = id;
            it->second.label_path = path;
        }
    }

    DatasetIndex index;
    index.entries.reserve(by_id.size());
    for (auto& [id, entry] : by_id) index.entries.push_back(std::move(entry));
    return index;
}

namespace {

std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

std::optional<ImageSize> probe_png(const std::vector<unsigned char>& head) {
    static const std::array<unsigned char, 8> sig = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (head.size() < 24 || !std::equal(sig.begin(), sig.end(), head.begin())) return std::nullopt;
    // IHDR is the first chunk: length(4) "IHDR" width(4) height(4)
    if (head[12] != 'I' || head[13] != 'H' || head[14] != 'D' || head[15] != 'R') return std::nullopt;
    const auto w = be32(&head[16]);
    const auto h = be32(&head[20]);
    if (w == 0 || h == 0) return std::nullopt;
    return ImageSize{static_cast<int>(w), static_cast<int>(h)};
}

std::optional<ImageSize> probe_jpeg(const std::vector<unsigned char>& data) {
    if (data.size() < 4 || data[0] != 0xff || data[1] != 0xd8) return std::nullopt;
    std::size_t i = 2;
    while (i + 3 < data.size()) {
        if (data[i] != 0xff) return std::nullopt;
        unsigned char marker = data[i + 1];
        if (marker == 0xff) { // fill bytes
            ++i;
            continue;
        }
        if (marker == 0xd8 || (marker >= 0xd0 && marker <= 0xd7)) { // standalone
            i += 2;
            continue;
        }
        if (i + 3 >= data.size()) return std::nullopt;
        const std::size_t seg_len = (std::size_t(data[i + 2]) << 8) | data[i + 3];
        const bool is_sof = marker >= 0xc0 && marker <= 0xcf && marker != 0xc4 && marker != 0xc8 &&
                            marker != 0xcc;
        if (is_sof) {
            if (i + 9 >= data.size()) return std::nullopt;
            const int h = (int(data[i + 5]) << 8) | data[i + 6];
            const int w = (int(data[i + 7]) << 8) | data[i + 8];
            if (w == 0 || h == 0) return std::nullopt;
            return ImageSize{w, h};
        }
        i += 2 + seg_len;
    }
    return std::nullopt;
}

} // namespace

std::optional<ImageSize> probe_image_size(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    // SOF markers can sit after large metadata segments; 64 KiB covers them.
    std::vector<unsigned char> head(64 * 1024);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    if (auto png = probe_png(head)) return png;
    return probe_jpeg(head);
}

std::map<std::string, ImageSize> parse_size_manifest(const std::string& text) {
    std::map<std::string, ImageSize> sizes;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "image_id,width,height") {
                throw ParseError("size manifest must start with header 'image_id,width,height'", 1);
            }
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ParseError("expected 'image_id,width,height'", line_no);
        }
        const std::string id = line.substr(0, c1);
        ImageSize size;
        size.width = parse_category(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line_no);
        size.height = parse_category(std::string_view(line).substr(c2 + 1), line_no);
        if (!size.valid()) throw ParseError("image size must be at least 1x1", line_no);
        if (!sizes.emplace(id, size).second) throw ParseError("duplicate image_id '" + id + "'", line_no);
    }
    return sizes;
}

std::string write_size_manifest(const std::map<std::string, ImageSize>& sizes) {
    std::string out = "image_id,width,height\n";
    for (const auto& [id, size] : sizes) {
        out += id + ',' + std::to_string(size.width) + ',' + std::to_string(size.height) + '\n';
    }
    return out;
}

std::map<std::string, ImageSize> read_size_manifest_file(const fs::path& path) {
    try {
        return parse_size_manifest(read_text_file(path));
    } catch (const ParseError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw DataError("read failure: " + path.string());
    return std::move(buf).str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("write failure: " + path.string());
}

} // namespace antcensus
