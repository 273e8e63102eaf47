#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmfa/detect.hpp"
#include "cmfa/discriminate.hpp"

namespace cmfa {

// Dataset directory layout: images/<id>.<ext>, masks/<id>.<ext>,
// truth/<id>.json. Both layouts share the shape; synth-style datasets
// always carry truth files (written by the forgery synthesizer), grip-style
// ones may annotate the forged component via a {"forged_centroid": [x, y]}
// sidecar instead.
enum class DatasetLayout { grip_style, synth_style };

enum class EvalMode { ground_truth_mask, detected_mask };

std::string to_string(EvalMode m);

struct DatasetEntry {
    std::string id;
    std::filesystem::path image_path;
    std::filesystem::path mask_path;
    std::optional<std::filesystem::path> truth_path;
};

/// Scans root/images and pairs each image with its mask and optional truth
/// file by stem. Entries are sorted by id. Throws LayoutError when the
/// directory has no images; missing masks or truth files are left for
/// evaluate() to record as skipped entries.
std::vector<DatasetEntry> ingest(const std::filesystem::path& root, DatasetLayout layout);

struct EvalConfig {
    DiscriminatorConfig discriminator;
    DetectorParams detector; // consulted only in detected_mask mode
};

struct EntryRecord {
    std::string id;
    std::string status; // correct | incorrect | undecided | skipped
    std::string reason; // skip reason, empty otherwise
    std::string final;  // verdict name, empty when skipped
    std::vector<std::string> radius_votes; // per configured radius
    std::vector<bool> radius_correct;
};

struct EvalReport {
    EvalMode mode = EvalMode::ground_truth_mask;
    size_t dataset_size = 0;
    size_t correct = 0;
    size_t incorrect = 0; // wrong region named; undecided tallied separately
    size_t undecided = 0;
    size_t skipped = 0;
    double final_accuracy = 0.0;
    std::vector<double> radius_accuracy; // parallel to config radii
    std::vector<double> radii;
    int neighbors = 0;
    int band_width = 0;
    std::vector<EntryRecord> records; // sorted by id
};

/// Scores the discriminator against per-entry truth. ground_truth_mask mode
/// discriminates on the dataset mask; detected_mask mode runs the block
/// detector first and discriminates on its output, scoring regions by
/// overlap with the truth components. A radius is correct when its solo
/// vote names the pasted region; the final verdict uses the combined vote.
/// Undecided and abstaining entries stay in the accuracy denominator:
/// accuracy = correct / (dataset_size - skipped), 0 when that is empty.
/// Per-entry failures are recorded as skipped, never thrown.
EvalReport evaluate(const std::vector<DatasetEntry>& entries, EvalMode mode,
                    const EvalConfig& cfg = {});

/// Report as JSON with fixed field order; byte-stable for identical inputs.
std::string report_to_json(const EvalReport& report, int indent = -1);

/// Small fixed-width accuracy table, one row per radius plus the final vote.
std::string report_to_table(const EvalReport& report);

} // namespace cmfa
