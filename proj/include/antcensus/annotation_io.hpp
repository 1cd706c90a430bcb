#pragma once

#include "antcensus/geometry.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace antcensus {

/// One line of a label/detection file: class id, normalized center-format
/// geometry, and (for detections) a trailing confidence. The fields are
/// exactly those of NormBox, so the record type is the box type.
using AnnotationRecord = NormBox;

/// Range handling when parsing label text.
enum class ParsePolicy {
    strict,  // values outside [0,1] are an error
    lenient, // values are clamped into [0,1]
};

/// Parses label text: one record per nonblank line, `<cat> <cx> <cy> <w> <h>`
/// with an optional sixth confidence column. Decimal dot only; LF or CRLF.
/// Throws ParseError (with the 1-based line number) on malformed lines and,
/// in strict mode, on values outside [0,1].
std::vector<AnnotationRecord> parse_label_text(const std::string& text,
                                               ParsePolicy policy = ParsePolicy::strict);

/// Formats records back to label text, reals with 6 decimal places, LF line
/// endings. With with_confidence, a sixth column is written (1.0 when the
/// record has none). parse(write(R)) matches R within 1e-6 per field.
std::string write_label_text(const std::vector<AnnotationRecord>& records,
                             bool with_confidence = false);

struct DatasetEntry {
    std::string image_id;
    std::optional<std::filesystem::path> image_path;
    std::optional<std::filesystem::path> label_path;
    std::optional<ImageSize> image_size;
};

/// Image/label pairing for one dataset directory pair, sorted by image_id
/// (bytewise lexicographic, so the order is stable across platforms).
struct DatasetIndex {
    std::vector<DatasetEntry> entries;

    const DatasetEntry* find(const std::string& image_id) const;
};

/// Pairs image files (.png/.jpg/.jpeg, case-insensitive) with same-stem .txt
/// label files. Either directory may be empty (""), meaning that side is
/// absent (label-only and image-only workflows). Image sizes are probed from
/// file headers where possible. Throws DataError on unreadable directories
/// and duplicate stems.
DatasetIndex index_dataset(const std::filesystem::path& images_dir,
                           const std::filesystem::path& labels_dir);

/// Reads image dimensions from a PNG or JPEG header without decoding pixels.
/// Returns nullopt when the file is missing or not a recognized format.
std::optional<ImageSize> probe_image_size(const std::filesystem::path& path);

/// Size manifest: CSV with header `image_id,width,height`.
std::map<std::string, ImageSize> parse_size_manifest(const std::string& text);
std::string write_size_manifest(const std::map<std::string, ImageSize>& sizes);

std::map<std::string, ImageSize> read_size_manifest_file(const std::filesystem::path& path);

/// Whole-file helpers used across the toolkit; throw DataError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace antcensus
