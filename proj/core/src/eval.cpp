#include "cmfa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <utility>

#include <json.hpp>

#include "cmfa/errors.hpp"
#include "cmfa/image_io.hpp"
#include "cmfa/parallel.hpp"
#include "cmfa/region.hpp"

namespace cmfa {

namespace {

bool is_image_file(const std::filesystem::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".png" || ext == ".pgm" || ext == ".ppm";
}

std::filesystem::path mask_path_for(const std::filesystem::path& root, const std::string& id) {
    for (const char* ext : {".png", ".pgm"}) {
        std::filesystem::path candidate = root / "masks" / (id + ext);
        if (std::filesystem::exists(candidate)) return candidate;
    }
    return root / "masks" / (id + ".png"); // evaluate() records the miss as skipped
}

// Index into `components` of the component the truth file marks as pasted.
size_t resolve_pasted(const std::optional<std::filesystem::path>& truth_path,
                      const std::vector<Region>& components, int mask_width) {
    if (!truth_path) throw Error("truth: entry has no truth file");
    const ImageBytes bytes = read_file(*truth_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("truth: ") + e.what());
    }

    if (doc.contains("pasted_label")) {
        const int label = doc.at("pasted_label").get<int>();
        for (size_t i = 0; i < components.size(); ++i)
            if (components[i].label == label) return i;
        throw Error("truth: pasted_label does not name a mask component");
    }
    if (doc.contains("forged_centroid")) {
        const auto& c = doc.at("forged_centroid");
        if (!c.is_array() || c.size() != 2)
            throw Error("truth: forged_centroid must be [x, y]");
        const double tx = c.at(0).get<double>();
        const double ty = c.at(1).get<double>();
        size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < components.size(); ++i) {
            double sx = 0.0, sy = 0.0;
            for (uint32_t p : components[i].pixels) {
                sx += p % static_cast<uint32_t>(mask_width);
                sy += p / static_cast<uint32_t>(mask_width);
            }
            const double n = static_cast<double>(components[i].area());
            const double dx = sx / n - tx;
            const double dy = sy / n - ty;
            const double d = dx * dx + dy * dy;
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return best;
    }
    throw Error("truth: need pasted_label or forged_centroid");
}

enum class Outcome { correct, incorrect, undecided, skipped };

struct Scored {
    EntryRecord record;
    Outcome outcome = Outcome::skipped;
};

Scored score_entry(const DatasetEntry& entry, EvalMode mode, const EvalConfig& cfg) {
    Scored scored;
    scored.record.id = entry.id;
    scored.record.radius_votes.assign(cfg.discriminator.radii.size(), "");
    scored.record.radius_correct.assign(cfg.discriminator.radii.size(), false);
    try {
        const GrayImage img = load_gray(entry.image_path);
        const BinaryMask truth_mask = load_mask(entry.mask_path);
        if (truth_mask.width != img.width || truth_mask.height != img.height)
            throw DimensionMismatch("mask dimensions differ from image");

        const std::vector<Region> truth_cc = connected_components(truth_mask, 1);
        if (truth_cc.size() < 2) throw Error("truth mask lacks two components");
        const size_t pasted_idx = resolve_pasted(entry.truth_path, truth_cc, truth_mask.width);

        // 2 = pasted component, 1 = any other truth pixel, 0 = background
        std::vector<uint8_t> ownership(truth_mask.bits.size(), 0);
        for (size_t i = 0; i < truth_cc.size(); ++i)
            for (uint32_t p : truth_cc[i].pixels) ownership[p] = i == pasted_idx ? 2 : 1;

        const BinaryMask analysis_mask =
            mode == EvalMode::ground_truth_mask ? truth_mask : detect(img, cfg.detector).mask;
        const RegionPair pair = select_pair(connected_components(analysis_mask));
        const Verdict verdict = discriminate_pair(img, pair, analysis_mask, cfg.discriminator);

        const auto names_pasted = [&](const Region& winner) {
            size_t on_pasted = 0, on_source = 0;
            for (uint32_t p : winner.pixels) {
                if (ownership[p] == 2)
                    ++on_pasted;
                else if (ownership[p] == 1)
                    ++on_source;
            }
            return on_pasted > on_source;
        };

        for (size_t j = 0; j < verdict.decisions.size(); ++j) {
            const Vote v = verdict.decisions[j].vote;
            scored.record.radius_votes[j] = to_string(v);
            if (v == Vote::A_forged)
                scored.record.radius_correct[j] = names_pasted(pair.a);
            else if (v == Vote::B_forged)
                scored.record.radius_correct[j] = names_pasted(pair.b);
        }

        scored.record.final = to_string(verdict.final);
        if (verdict.final == Final::undecided) {
            scored.outcome = Outcome::undecided;
            scored.record.status = "undecided";
        } else {
            const Region& winner = verdict.final == Final::A_forged ? pair.a : pair.b;
            scored.outcome = names_pasted(winner) ? Outcome::correct : Outcome::incorrect;
            scored.record.status = scored.outcome == Outcome::correct ? "correct" : "incorrect";
        }
    } catch (const std::exception& e) {
        scored.outcome = Outcome::skipped;
        scored.record.status = "skipped";
        scored.record.reason = e.what();
        scored.record.final.clear();
    }
    return scored;
}

} // namespace

std::string to_string(EvalMode m) {
    return m == EvalMode::ground_truth_mask ? "ground_truth_mask" : "detected_mask";
}

std::vector<DatasetEntry> ingest(const std::filesystem::path& root, DatasetLayout layout) {
    namespace fs = std::filesystem;
    const fs::path images = root / "images";
    if (!fs::is_directory(images))
        throw LayoutError("dataset: missing images/ directory under " + root.string());

    std::vector<DatasetEntry> entries;
    for (const auto& item : fs::directory_iterator(images)) {
        if (!item.is_regular_file() || !is_image_file(item.path())) continue;
        DatasetEntry entry;
        entry.id = item.path().stem().string();
        entry.image_path = item.path();
        entry.mask_path = mask_path_for(root, entry.id);
        const fs::path truth = root / "truth" / (entry.id + ".json");
        if (fs::exists(truth)) entry.truth_path = truth;
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) throw LayoutError("dataset: no images under " + images.string());
    std::sort(entries.begin(), entries.end(),
              [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });

    if (layout == DatasetLayout::synth_style) {
        for (const DatasetEntry& e : entries)
            if (!e.truth_path)
                throw LayoutError("dataset: synth layout requires truth/" + e.id + ".json");
    }
    return entries;
}

EvalReport evaluate(const std::vector<DatasetEntry>& entries, EvalMode mode,
                    const EvalConfig& cfg) {
    if (entries.empty()) throw Error("eval: no entries");

    std::vector<DatasetEntry> sorted = entries;
    std::sort(sorted.begin(), sorted.end(),
              [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });

    std::vector<Scored> scored(sorted.size());
    detail::parallel_chunks(0, static_cast<int64_t>(sorted.size()), [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i)
            scored[static_cast<size_t>(i)] =
                score_entry(sorted[static_cast<size_t>(i)], mode, cfg);
    });

    EvalReport report;
    report.mode = mode;
    report.dataset_size = sorted.size();
    report.radii = cfg.discriminator.radii;
    report.neighbors = cfg.discriminator.neighbors;
    report.band_width = cfg.discriminator.band_width;
    report.radius_accuracy.assign(cfg.discriminator.radii.size(), 0.0);

    std::vector<size_t> radius_correct(cfg.discriminator.radii.size(), 0);
    for (Scored& s : scored) {
        switch (s.outcome) {
        case Outcome::correct: ++report.correct; break;
        case Outcome::incorrect: ++report.incorrect; break;
        case Outcome::undecided: ++report.undecided; break;
        case Outcome::skipped: ++report.skipped; break;
        }
        if (s.outcome != Outcome::skipped)
            for (size_t j = 0; j < radius_correct.size(); ++j)
                radius_correct[j] += s.record.radius_correct[j] ? 1 : 0;
        report.records.push_back(std::move(s.record));
    }

    const size_t denom = report.dataset_size - report.skipped;
    if (denom > 0) {
        report.final_accuracy = static_cast<double>(report.correct) / static_cast<double>(denom);
        for (size_t j = 0; j < radius_correct.size(); ++j)
            report.radius_accuracy[j] =
                static_cast<double>(radius_correct[j]) / static_cast<double>(denom);
    }
    return report;
}

std::string report_to_json(const EvalReport& report, int indent) {
    nlohmann::ordered_json doc;
    doc["mode"] = to_string(report.mode);
    doc["dataset_size"] = report.dataset_size;
    nlohmann::ordered_json counts;
    counts["correct"] = report.correct;
    counts["incorrect"] = report.incorrect;
    counts["undecided"] = report.undecided;
    counts["skipped"] = report.skipped;
    doc["counts"] = std::move(counts);

    nlohmann::ordered_json accuracy;
    accuracy["final"] = report.final_accuracy;
    nlohmann::ordered_json per_radius = nlohmann::ordered_json::array();
    for (size_t j = 0; j < report.radii.size(); ++j) {
        nlohmann::ordered_json row;
        row["radius"] = report.radii[j];
        row["accuracy"] = report.radius_accuracy[j];
        per_radius.push_back(std::move(row));
    }
    accuracy["per_radius"] = std::move(per_radius);
    doc["accuracy"] = std::move(accuracy);

    nlohmann::ordered_json config;
    config["radii"] = report.radii;
    config["neighbors"] = report.neighbors;
    config["band_width"] = report.band_width;
    doc["config"] = std::move(config);

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const EntryRecord& r : report.records) {
        nlohmann::ordered_json row;
        row["id"] = r.id;
        row["status"] = r.status;
        if (r.status == "skipped") {
            row["reason"] = r.reason;
        } else {
            row["final"] = r.final;
            row["votes"] = r.radius_votes;
        }
        rows.push_back(std::move(row));
    }
    doc["entries"] = std::move(rows);
    return doc.dump(indent);
}

std::string report_to_table(const EvalReport& report) {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof(line), "%-8s %9s\n", "radius", "accuracy");
    out += line;
    for (size_t j = 0; j < report.radii.size(); ++j) {
        char name[32];
        std::snprintf(name, sizeof(name), "R=%g", report.radii[j]);
        std::snprintf(line, sizeof(line), "%-8s %8.1f%%\n", name,
                      100.0 * report.radius_accuracy[j]);
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-8s %8.1f%%\n", "final", 100.0 * report.final_accuracy);
    out += line;
    std::snprintf(line, sizeof(line),
                  "\ncorrect=%zu incorrect=%zu undecided=%zu skipped=%zu total=%zu\n",
                  report.correct, report.incorrect, report.undecided, report.skipped,
                  report.dataset_size);
    out += line;
    return out;
}

} // namespace cmfa
